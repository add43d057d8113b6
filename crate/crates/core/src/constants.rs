//! Constants derived from the problem data that drive the parameter
//! schedule and the multiplier-increment bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::StochasticProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgoConstants {
    /// Bound on `‖λᵗ⁺¹‖ - ‖λᵗ‖` per unit of `σ`.
    pub gamma1: f64,
    /// Bound on `|λᵗ⁺¹ᵢ - λᵗᵢ|` per unit of `σ`.
    pub gamma2: f64,
    /// Spectral bound on the constraint curvature matrices.
    pub kappa_sigma: f64,
    /// `2[L₀ + γ₂ Σⱼ Lⱼ] + 1`.
    pub beta: f64,
    /// Domain diameter `D₀`.
    pub diameter: f64,
}

pub fn compute_constants<P: StochasticProblem + ?Sized>(problem: &P) -> Result<AlgoConstants> {
    compute_constants_with_margin(problem, 0.0)
}

/// As [`compute_constants`], for curvature matrices `Σᵢ = -(Lᵢ + margin) I`.
pub fn compute_constants_with_margin<P: StochasticProblem + ?Sized>(
    problem: &P,
    sigma_margin: f64,
) -> Result<AlgoConstants> {
    let bounds = problem.bounds().ok_or(Error::MissingBounds)?;
    let moduli = problem.moduli();
    let p = problem.num_constraints();
    let d0 = problem.domain().diameter();

    let kappa_sigma = if p == 0 {
        0.0
    } else {
        moduli.max_constraint() + sigma_margin
    };
    let spread = bounds.kappa_g * d0 + 0.5 * kappa_sigma * d0 * d0;
    let gamma1 = bounds.nu_g + (p as f64).sqrt() * spread;
    let gamma2 = bounds.nu_g + spread;
    let sum_l: f64 = moduli.constraints.iter().sum();
    let beta = 2.0 * (moduli.objective + gamma2 * sum_l) + 1.0;

    Ok(AlgoConstants {
        gamma1,
        gamma2,
        kappa_sigma,
        beta,
        diameter: d0,
    })
}
