//! Set-valued message passing for GF(q) LDPC codes on the partial erasure
//! channel.
//!
//! Every message is a set of candidate symbols. A check sends each neighbour
//! the values that satisfy its parity equation given the other neighbours'
//! candidate sets (a scaled sumset); a variable sends the intersection of its
//! channel set with the other incoming check messages. Updates use a flooding
//! schedule: all checks, then all variables.

use thiserror::Error;

use crate::gf::{Field, FieldElement};
use crate::ldpc::TannerGraph;
use crate::symset::SymbolSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("received word has length {got}, graph has {expected} variables")]
    LengthMismatch { got: usize, expected: usize },
    #[error("graph is over GF({graph}) but the field is GF({field})")]
    FieldMismatch { graph: usize, field: usize },
    #[error("channel set for variable {0} is empty or over the wrong field")]
    BadChannelSet(usize),
    #[error("variable {var} has degree {degree}; the decoder needs degree >= 2")]
    VariableDegree { var: usize, degree: usize },
    #[error("inconsistent messages: empty candidate set at variable {var} in iteration {iteration}")]
    Inconsistent { var: usize, iteration: usize },
}

/// The check-to-variable message for one edge: the candidates for the target
/// variable given the other neighbours' sets and edge labels.
///
/// `incoming` lists `(v_{i'->j}, h_{i'j})` for the other edges of the check.
pub fn ctv_message(field: &Field, incoming: &[(SymbolSet, FieldElement)], out_label: FieldElement) -> SymbolSet {
    let q = field.order();
    let factor = field.neg(field.inv(out_label).expect("edge labels are nonzero"));
    incoming
        .iter()
        .fold(SymbolSet::singleton(q, FieldElement::ZERO), |acc, (set, h)| {
            let scaled = set.scale(field, field.mul(*h, factor)).expect("edge labels are nonzero");
            acc.sumset_pair(field, &scaled)
        })
}

/// The variable-to-check message: channel set intersected with the other
/// incoming check messages. An empty result is an inconsistency.
pub fn vtc_message(channel_info: &SymbolSet, incoming_ctv: &[SymbolSet]) -> Option<SymbolSet> {
    let out = incoming_ctv.iter().fold(*channel_info, |acc, s| acc.and(s));
    (!out.is_empty()).then_some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    /// Every posterior set is a singleton.
    Success,
    /// A fixed point was reached, or the iteration limit, with ambiguity left.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    /// Per-variable posterior: channel set intersected with all incoming
    /// check messages.
    pub estimate: Vec<SymbolSet>,
    pub iterations: usize,
    /// Whether every variable-to-check message was a singleton at the end.
    pub all_vtc_singletons: bool,
    /// Stopped by the iteration limit rather than a fixed point.
    pub hit_iteration_limit: bool,
}

impl DecodeOutcome {
    /// Number of variables whose posterior has more than one candidate.
    pub fn unresolved(&self) -> usize {
        self.estimate.iter().filter(|s| s.len() > 1).count()
    }
}

/// Messages after one iteration, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTrace {
    pub iteration: usize,
    /// Empty at iteration 0.
    pub ctv: Vec<SymbolSet>,
    pub vtc: Vec<SymbolSet>,
    pub posterior: Vec<SymbolSet>,
}

/// Decoder state for one received word.
#[derive(Debug, Clone)]
pub struct DecoderState<'a> {
    graph: &'a TannerGraph,
    field: &'a Field,
    channel_info: Vec<SymbolSet>,
    ctv: Vec<SymbolSet>,
    vtc: Vec<SymbolSet>,
    posterior: Vec<SymbolSet>,
    iteration: usize,
    // per-check scratch
    scaled: Vec<SymbolSet>,
    suffix: Vec<SymbolSet>,
}

impl<'a> DecoderState<'a> {
    pub fn new(graph: &'a TannerGraph, field: &'a Field, received: &[SymbolSet]) -> Result<DecoderState<'a>, DecodeError> {
        let q = field.order();
        if graph.q() != q {
            return Err(DecodeError::FieldMismatch { graph: graph.q(), field: q });
        }
        if received.len() != graph.n() {
            return Err(DecodeError::LengthMismatch {
                got: received.len(),
                expected: graph.n(),
            });
        }
        for (i, s) in received.iter().enumerate() {
            if s.is_empty() || s.universe() != q {
                return Err(DecodeError::BadChannelSet(i));
            }
            let degree = graph.var_degree(i);
            if degree < 2 {
                return Err(DecodeError::VariableDegree { var: i, degree });
            }
        }
        let vtc = graph.edges().iter().map(|e| received[e.var]).collect();
        let max_dc = (0..graph.m()).map(|j| graph.check_degree(j)).max().unwrap_or(0);
        Ok(DecoderState {
            graph,
            field,
            channel_info: received.to_vec(),
            ctv: vec![SymbolSet::full(q); graph.edges().len()],
            vtc,
            posterior: received.to_vec(),
            iteration: 0,
            scaled: Vec::with_capacity(max_dc),
            suffix: Vec::with_capacity(max_dc + 1),
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn ctv(&self) -> &[SymbolSet] {
        &self.ctv
    }

    pub fn vtc(&self) -> &[SymbolSet] {
        &self.vtc
    }

    pub fn channel_info(&self) -> &[SymbolSet] {
        &self.channel_info
    }

    pub fn posterior(&self) -> &[SymbolSet] {
        &self.posterior
    }

    pub fn all_posterior_singletons(&self) -> bool {
        self.posterior.iter().all(|s| s.len() == 1)
    }

    fn update_checks(&mut self) {
        let q = self.field.order();
        let zero = SymbolSet::singleton(q, FieldElement::ZERO);
        for j in 0..self.graph.m() {
            let edges = self.graph.check_edges(j);
            // h_{i'j} * v_{i'->j} for every edge of the check
            self.scaled.clear();
            for &e in edges {
                let label = self.graph.edges()[e].label;
                self.scaled.push(self.vtc[e].scale(self.field, label).expect("nonzero label"));
            }
            self.suffix.clear();
            self.suffix.resize(edges.len() + 1, zero);
            for k in (0..edges.len()).rev() {
                self.suffix[k] = self.suffix[k + 1].sumset_pair(self.field, &self.scaled[k]);
            }
            let mut prefix = zero;
            for (k, &e) in edges.iter().enumerate() {
                let others = prefix.sumset_pair(self.field, &self.suffix[k + 1]);
                let label = self.graph.edges()[e].label;
                let factor = self.field.neg(self.field.inv(label).expect("nonzero label"));
                self.ctv[e] = others.scale(self.field, factor).expect("nonzero factor");
                prefix = prefix.sumset_pair(self.field, &self.scaled[k]);
            }
        }
    }

    /// Returns whether any variable-to-check message changed.
    fn update_variables(&mut self) -> Result<bool, DecodeError> {
        let mut changed = false;
        for i in 0..self.graph.n() {
            let edges = self.graph.var_edges(i);
            let channel = self.channel_info[i];
            let mut post = channel;
            for &e in edges {
                post = post.and(&self.ctv[e]);
            }
            if post.is_empty() {
                return Err(DecodeError::Inconsistent {
                    var: i,
                    iteration: self.iteration,
                });
            }
            self.posterior[i] = post;
            for (k, &e) in edges.iter().enumerate() {
                let mut msg = channel;
                for (k2, &e2) in edges.iter().enumerate() {
                    if k2 != k {
                        msg = msg.and(&self.ctv[e2]);
                    }
                }
                if msg.is_empty() {
                    return Err(DecodeError::Inconsistent {
                        var: i,
                        iteration: self.iteration,
                    });
                }
                if msg != self.vtc[e] {
                    changed = true;
                    self.vtc[e] = msg;
                }
            }
        }
        Ok(changed)
    }

    /// One flooding iteration; returns whether any VTC message changed.
    pub fn step(&mut self) -> Result<bool, DecodeError> {
        self.iteration += 1;
        self.update_checks();
        self.update_variables()
    }

    fn snapshot(&self) -> IterationTrace {
        IterationTrace {
            iteration: self.iteration,
            ctv: if self.iteration == 0 { Vec::new() } else { self.ctv.clone() },
            vtc: self.vtc.clone(),
            posterior: self.posterior.clone(),
        }
    }

    /// Iterates until every posterior is a singleton, a fixed point, or
    /// `max_iters`. When `trace` is given, a snapshot is pushed after
    /// iteration 0 and after every update.
    pub fn run(mut self, max_iters: usize, mut trace: Option<&mut Vec<IterationTrace>>) -> Result<DecodeOutcome, DecodeError> {
        if let Some(t) = trace.as_deref_mut() {
            t.push(self.snapshot());
        }
        let mut hit_limit = false;
        while !self.all_posterior_singletons() {
            if self.iteration >= max_iters {
                hit_limit = true;
                break;
            }
            let changed = self.step()?;
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.snapshot());
            }
            if !changed {
                break;
            }
        }
        let status = if self.all_posterior_singletons() {
            DecodeStatus::Success
        } else {
            DecodeStatus::Stalled
        };
        Ok(DecodeOutcome {
            status,
            all_vtc_singletons: self.vtc.iter().all(|s| s.len() == 1),
            iterations: self.iteration,
            hit_iteration_limit: hit_limit && status == DecodeStatus::Stalled,
            estimate: self.posterior,
        })
    }
}

/// Decodes a received word of candidate sets.
pub fn decode(graph: &TannerGraph, field: &Field, received: &[SymbolSet], max_iters: usize) -> Result<DecodeOutcome, DecodeError> {
    DecoderState::new(graph, field, received)?.run(max_iters, None)
}

/// Like [`decode`], also returning every iteration's messages.
pub fn decode_traced(
    graph: &TannerGraph,
    field: &Field,
    received: &[SymbolSet],
    max_iters: usize,
) -> Result<(DecodeOutcome, Vec<IterationTrace>), DecodeError> {
    let mut trace = Vec::new();
    let outcome = DecoderState::new(graph, field, received)?.run(max_iters, Some(&mut trace))?;
    Ok((outcome, trace))
}
