//! Reversible-jump MCMC simulated annealing for radial basis function networks.
//!
//! The sampler searches jointly over the number of RBF centres `k` and their
//! locations, maximizing a posterior whose prior on `k` is calibrated so that
//! its mode coincides with the AIC, BIC or MDL penalized-likelihood optimum.
//! Linear weights and noise variances are integrated out analytically and
//! recovered by least squares at the end.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below name the concrete instantiations.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annealing;
pub mod cli;
pub mod criteria;
pub mod data_io;
pub mod error;
pub mod linalg;
pub mod model;
pub mod moves;
pub mod scalar;
pub mod trace;

pub use annealing::{
    annealed_accept, best_chain, run_annealing, run_multistart, AnnealConfig, CoolingSchedule, FitResult,
    ScheduleKind, TraceRecord,
};
pub use criteria::{penalized_score, Criterion, CriterionKind};
pub use data_io::{generate_robot_arm, load_csv, mean_squared_error, split, write_csv, SplitPolicy, SplitSpec};
pub use error::{Error, Result};
pub use model::{
    build_design_matrix, fit_least_squares, log_marginal_posterior, predict, residual_quadratic, residual_quadratics,
    BasisKind, BirthRegion, CentreSet, Dataset, DesignMatrix, Metric, Posterior, ResidualQuadratics,
};
pub use moves::{
    propose_birth, propose_death, propose_merge, propose_split, propose_update, rjmcmc_step, MoveConfig,
    MoveContext, MoveKind, MoveOutcome, MoveProbabilities, RatioMode, SamplerState, UpdateParams,
};
pub use scalar::Real;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type CentreSet64 = CentreSet<f64>;
pub type CentreSet32 = CentreSet<f32>;
pub type BasisKind64 = BasisKind<f64>;
pub type Metric64 = Metric<f64>;
pub type SamplerState64 = SamplerState<f64>;
pub type SamplerState32 = SamplerState<f32>;
pub type AnnealConfig64 = AnnealConfig<f64>;
pub type AnnealConfig32 = AnnealConfig<f32>;
pub type FitResult64 = FitResult<f64>;
pub type FitResult32 = FitResult<f32>;
pub type TraceRecord64 = TraceRecord<f64>;
