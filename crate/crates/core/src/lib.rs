//! Data-driven predictors and prescriptors built from large-deviation rate
//! functions, together with the Monte-Carlo machinery used to check their
//! out-of-sample disappointment behaviour.
//!
//! The crate is organised bottom-up:
//!
//! - [`processes`]: parameterised data-generating models and seeded simulators.
//! - [`statistics`]: summary statistics computed from trajectories and their
//!   asymptotic limits.
//! - [`rates`]: rate functions, limiting log-moment generating functions and a
//!   numerical Legendre transform.
//! - [`dro`]: worst-case expectation solvers over rate balls and the baseline
//!   ambiguity sets, plus the predictor/prescriptor dispatch.
//! - [`harness`]: disappointment curves, decay-rate regression, frontiers, the
//!   newsvendor scenario and CSV output.

pub mod dro;
pub mod error;
pub mod ext;
pub mod harness;
pub mod lp;
pub(crate) mod optim;
pub mod processes;
pub mod rates;
pub mod rng;
pub mod statistics;

pub use error::{Error, Result};
pub use ext::ExtendedReal;
