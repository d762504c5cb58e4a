//! PAC-Bayesian classification with convex surrogate losses: Gibbs
//! posteriors, oracle-inequality bounds, synthetic data and low-rank matrix
//! completion.

pub mod bounds;
pub mod data;
pub mod error;
pub mod gibbs;
pub mod harness;
pub mod io;
pub mod losses;
pub mod matcomp;
pub mod priors;
pub mod seed;
pub mod synthdata;

pub use data::{Dataset, Design, FactorState, ParamPoint};
pub use error::{Error, Result};
pub use losses::{Loss, LossKind};
pub use priors::{GammaKind, PriorSpec};
