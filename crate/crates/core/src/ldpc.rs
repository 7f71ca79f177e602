//! GF(q) LDPC codes as labelled Tanner graphs.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! q n m
//! v_idx c_idx label
//! ...
//! ```

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::gf::{Field, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("degrees must be at least 2 (got d_v={dv}, d_c={dc})")]
    DegreeTooSmall { dv: usize, dc: usize },
    #[error("n*d_v = {sockets} is not divisible by d_c = {dc}")]
    Indivisible { sockets: usize, dc: usize },
    #[error("edge ({var}, {check}) references a node outside the graph")]
    NodeOutOfRange { var: usize, check: usize },
    #[error("edge ({var}, {check}) has a zero or out-of-field label {label}")]
    BadLabel { var: usize, check: usize, label: usize },
    #[error("assignment has length {got}, expected {expected}")]
    AssignmentLength { got: usize, expected: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("degree distribution invalid: {0}")]
    Distribution(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub var: usize,
    pub check: usize,
    pub label: FieldElement,
}

/// Bipartite variable/check graph with nonzero GF(q) edge labels. Parallel
/// edges are kept as distinct edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    q: usize,
    n: usize,
    m: usize,
    edges: Vec<Edge>,
    var_edges: Vec<Vec<usize>>,
    check_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn from_edges(field: &Field, n: usize, m: usize, edges: Vec<Edge>) -> Result<TannerGraph, GraphError> {
        let q = field.order();
        let mut var_edges = vec![Vec::new(); n];
        let mut check_edges = vec![Vec::new(); m];
        for (id, e) in edges.iter().enumerate() {
            if e.var >= n || e.check >= m {
                return Err(GraphError::NodeOutOfRange { var: e.var, check: e.check });
            }
            if e.label.is_zero() || e.label.value() >= q {
                return Err(GraphError::BadLabel {
                    var: e.var,
                    check: e.check,
                    label: e.label.value(),
                });
            }
            var_edges[e.var].push(id);
            check_edges[e.check].push(id);
        }
        Ok(TannerGraph {
            q,
            n,
            m,
            edges,
            var_edges,
            check_edges,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge ids incident to variable `i`.
    pub fn var_edges(&self, i: usize) -> &[usize] {
        &self.var_edges[i]
    }

    /// Edge ids incident to check `j`.
    pub fn check_edges(&self, j: usize) -> &[usize] {
        &self.check_edges[j]
    }

    pub fn var_degree(&self, i: usize) -> usize {
        self.var_edges[i].len()
    }

    pub fn check_degree(&self, j: usize) -> usize {
        self.check_edges[j].len()
    }

    /// Whether `sum_{i in N(j)} h_ij * v_i = 0`.
    pub fn check_satisfied(&self, field: &Field, assignment: &[FieldElement], j: usize) -> Result<bool, GraphError> {
        if assignment.len() != self.n {
            return Err(GraphError::AssignmentLength {
                got: assignment.len(),
                expected: self.n,
            });
        }
        let sum = self.check_edges[j].iter().fold(FieldElement::ZERO, |acc, &e| {
            let edge = &self.edges[e];
            field.add(acc, field.mul(edge.label, assignment[edge.var]))
        });
        Ok(sum.is_zero())
    }

    pub fn is_codeword(&self, field: &Field, assignment: &[FieldElement]) -> Result<bool, GraphError> {
        for j in 0..self.m {
            if !self.check_satisfied(field, assignment, j)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.q, self.n, self.m);
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.var, e.check, e.label).unwrap();
        }
        out
    }

    /// Parses the text format; the header fixes `q`, which must match `field`.
    pub fn from_text(field: &Field, text: &str) -> Result<TannerGraph, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing header \"q n m\"".into(),
        })?;
        let [q, n, m] = parse_triple(hline, header)?;
        if q != field.order() {
            return Err(GraphError::Parse {
                line: hline,
                msg: format!("header declares q={q} but the field has order {}", field.order()),
            });
        }
        let mut edges = Vec::new();
        for (line, body) in lines {
            let [var, check, label] = parse_triple(line, body)?;
            let label = field.element(label).map_err(|_| GraphError::BadLabel { var, check, label })?;
            edges.push(Edge { var, check, label });
        }
        TannerGraph::from_edges(field, n, m, edges)
    }
}

/// Reads a header or edge line of three unsigned integers.
pub fn parse_triple(line: usize, body: &str) -> Result<[usize; 3], GraphError> {
    let nums: Vec<usize> = body
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|e| GraphError::Parse { line, msg: format!("{e}") })?;
    <[usize; 3]>::try_from(nums).map_err(|v| GraphError::Parse {
        line,
        msg: format!("expected 3 integers, found {}", v.len()),
    })
}

fn random_label<R: Rng + ?Sized>(field: &Field, rng: &mut R) -> FieldElement {
    field.element(rng.random_range(1..field.order())).expect("label below q")
}

/// Configuration-model `(d_v, d_c)`-regular graph with uniform nonzero labels.
pub fn build_regular<R: Rng + ?Sized>(
    n: usize,
    dv: usize,
    dc: usize,
    field: &Field,
    rng: &mut R,
) -> Result<TannerGraph, GraphError> {
    if dv < 2 || dc < 2 {
        return Err(GraphError::DegreeTooSmall { dv, dc });
    }
    let sockets = n * dv;
    if !sockets.is_multiple_of(dc) {
        return Err(GraphError::Indivisible { sockets, dc });
    }
    let m = sockets / dc;
    let mut check_sockets: Vec<usize> = (0..sockets).map(|s| s / dc).collect();
    check_sockets.shuffle(rng);
    let edges = check_sockets
        .into_iter()
        .enumerate()
        .map(|(s, check)| Edge {
            var: s / dv,
            check,
            label: random_label(field, rng),
        })
        .collect();
    TannerGraph::from_edges(field, n, m, edges)
}

/// Edge-perspective degree distribution: `lambda[i]` (`rho[i]`) is the
/// fraction of edges attached to variable (check) nodes of degree `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    lambda: Vec<f64>,
    rho: Vec<f64>,
}

impl DegreeDistribution {
    pub fn regular(dv: usize, dc: usize) -> Result<DegreeDistribution, GraphError> {
        if dv < 2 || dc < 2 {
            return Err(GraphError::DegreeTooSmall { dv, dc });
        }
        let mut lambda = vec![0.0; dv + 1];
        lambda[dv] = 1.0;
        let mut rho = vec![0.0; dc + 1];
        rho[dc] = 1.0;
        Ok(DegreeDistribution { lambda, rho })
    }

    /// Coefficients indexed by degree; entries 0 and 1 must be zero.
    pub fn new(lambda: Vec<f64>, rho: Vec<f64>) -> Result<DegreeDistribution, GraphError> {
        for (name, c) in [("lambda", &lambda), ("rho", &rho)] {
            if c.iter().any(|&x| x.is_nan() || x < 0.0) {
                return Err(GraphError::Distribution(format!("{name} has a negative or NaN coefficient")));
            }
            if c.iter().take(2).any(|&x| x != 0.0) {
                return Err(GraphError::Distribution(format!("{name} puts mass on degree below 2")));
            }
            let total: f64 = c.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(GraphError::Distribution(format!("{name} sums to {total}")));
            }
        }
        Ok(DegreeDistribution { lambda, rho })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `(degree, weight)` pairs with nonzero variable-side weight.
    pub fn variable_degrees(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        nonzero(&self.lambda)
    }

    pub fn check_degrees(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        nonzero(&self.rho)
    }

    /// `lambda(x) = sum_i lambda_i x^(i-1)`.
    pub fn lambda_poly(&self, x: f64) -> f64 {
        nonzero(&self.lambda).map(|(i, c)| c * x.powi(i as i32 - 1)).sum()
    }

    pub fn rho_poly(&self, x: f64) -> f64 {
        nonzero(&self.rho).map(|(i, c)| c * x.powi(i as i32 - 1)).sum()
    }
}

fn nonzero(c: &[f64]) -> impl Iterator<Item = (usize, f64)> + '_ {
    c.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, &x)| (i, x))
}
