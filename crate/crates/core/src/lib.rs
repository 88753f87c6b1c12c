//! Bridging-based ranking of crowd-rated notes.
//!
//! Votes are explained by a one-factor model `r̂ = i_u + i_n + f_u·f_n`.
//! The factor term soaks up agreement that follows viewpoint lines, so a
//! note's intercept `i_n` measures approval that holds across viewpoints.
//! Notes are ranked by that intercept and displayed once it clears a
//! threshold.
//!
//! Modules:
//! - [`model`]: parameters, prediction, loss and gradient
//! - [`train`]: seeded full-batch gradient descent
//! - [`scoring`]: ranking and display status
//! - [`sim`]: two-group polarized crowd simulator and sybil injection
//! - [`io`]: text file formats
//! - [`experiment`]: end-to-end drivers

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod io;
pub mod model;
pub mod rng;
pub mod scoring;
pub mod sim;
pub mod train;

pub use dataset::{DatasetBuilder, DuplicatePolicy, IndexedVote, RatingsDataset, Vote};
pub use error::{Error, Result};
pub use model::{gradient, loss, predict, ModelParams, RegConfig};
pub use scoring::{classify, score_notes, NoteScore, NoteStatus, Thresholds};
pub use sim::{
    evaluate_recovery, generate, inject_attack, ApprovalTable, Archetype, AttackConfig, GroundTruth, Group,
    RecoveryMetrics, SimulationConfig,
};
pub use train::{canonicalize, fit, init_params, TrainConfig, TrainReport};
