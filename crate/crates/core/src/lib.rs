//! LDPC codes over GF(q) on the q-ary partial erasure channel: the channel,
//! a set-valued message-passing decoder, and density-evolution threshold
//! analysis with exact and approximate sumset-size models.

pub mod channel;
pub mod cli;
pub mod combinatorics;
pub mod de;
pub mod decoder;
mod dist;
pub mod gf;
pub mod ldpc;
pub mod pm_models;
pub mod sim;
pub mod symset;

pub use channel::{Channel, ChannelOutput};
pub use combinatorics::SizeTuple;
pub use de::{de_run, threshold_search, DeConfig, DeRun, SizeDistribution};
pub use decoder::{decode, DecodeOutcome, DecodeStatus};
pub use gf::{Field, FieldElement};
pub use ldpc::{build_regular, DegreeDistribution, TannerGraph};
pub use pm_models::{GammaMatrix, PmKind, PmModel, SumsetBounds};
pub use sim::{run_trials, TrialReport};
pub use symset::SymbolSet;
