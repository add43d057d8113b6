//! PMQSopt: a proximal method of multipliers with quadratic approximations
//! for weakly convex stochastic optimization with expectation constraints.
//!
//! Each outer iteration samples a batch, builds quadratic minorants of the
//! sampled objective and constraints ([`qmodel`]), minimizes the proximal
//! augmented Lagrangian of that model over the box ([`subsolver`]) and takes
//! a projected multiplier step ([`driver`]). [`metrics`] evaluates the
//! stationarity, feasibility and complementarity residuals on the exact
//! expectations, and [`problems`] generates the benchmark families.
//!
//! ```
//! use pmqsopt::driver::{run_pmqsopt, schedule_params, RunSettings, ScheduleMode};
//! use pmqsopt::problems::{qcnp_generate, QcnpParams};
//!
//! let params = QcnpParams { n: 5, p: 3, samples: 10, ..QcnpParams::default() };
//! let problem = qcnp_generate(1, params)?;
//! let schedule = schedule_params(50, 1.0, ScheduleMode::Theorem)?;
//! let record = run_pmqsopt(&problem, &schedule, &RunSettings::default(), 1)?;
//! assert_eq!(record.grad_evals, 50 * (1 + 3));
//! # Ok::<(), pmqsopt::Error>(())
//! ```

// Negated comparisons like `!(x > 0.0)` are NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod driver;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod problem;
pub mod problems;
pub mod qmodel;
pub mod rng;
pub mod subsolver;
#[cfg(test)]
mod testing;

pub use constants::{compute_constants, compute_constants_with_margin, AlgoConstants};
pub use driver::{
    check_horizon, dual_update, run_pmqsopt, schedule_params, select_output, LogSchedule,
    MetricConfig, ParamSchedule, RunRecord, RunSettings, ScheduleMode,
};
pub use error::{Error, Result};
pub use problem::{
    positive_part, project_box, BoxDomain, ProblemBounds, SlaterPoint, StochasticProblem,
    WeakConvexity,
};
