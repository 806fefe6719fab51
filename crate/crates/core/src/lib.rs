//! Discounted online convex optimization.
//!
//! * [`ogd`]: projected OGD tuned to a known discount factor.
//! * [`dnp`]: the discounted normal predictor, plain and with conservative updating.
//! * [`combiner`]: two-stream aggregation driven by a conservative predictor.
//! * [`sogd`]: Smoothed OGD, a chain of combiners over OGD experts on a
//!   geometric grid of discounts, with uniform discounted regret over an
//!   interval of unknown discount factors.
//! * [`lab`] and [`verify`]: comparators, bound checks and invariant corpora.

pub mod combiner;
pub mod commands;
pub mod config;
pub mod dnp;
pub mod domain;
pub mod error;
pub mod lab;
pub mod loss;
pub mod ogd;
pub mod sogd;
pub mod special;
pub mod verify;

pub use combiner::CombinerState;
pub use dnp::{discounted_payoff, run_sequence, Branch, PredictorRun, PredictorState, UpdateMode};
pub use domain::{Domain, ProblemBounds};
pub use error::{Error, Result};
pub use lab::{best_comparator, check_bound, discounted_loss, BoundInputs, BoundKind, Comparator, RegretReport};
pub use loss::{make_loss_sequence, GeneratorKind, GeneratorSpec, Loss, LossSequence};
pub use ogd::{run_ogd, step_size_for, OgdState};
pub use sogd::{run_sogd, DiscountGrid, ExpertStack, SogdRun};
pub use special::{erf_halfgauss, g, g_tilde, potential_phi, threshold_u, Confidence, ConfidenceParams};
