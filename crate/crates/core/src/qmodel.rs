//! Per-iteration quadratic models of the sampled objective and constraints.
//!
//! At the anchor `xᵗ` with batch average `(F, ∇F, Gᵢ, ∇Gᵢ)` the models are
//!
//! ```text
//! q₀(x) = F + ⟨∇F, d⟩ + ½⟨Σ₀d, d⟩,   qᵢ(x) = Gᵢ + ⟨∇Gᵢ, d⟩ + ½⟨Σᵢd, d⟩,   d = x - xᵗ
//! ```
//!
//! with `Σᵢ = -(Lᵢ + δ) I` so each `qᵢ` minorizes its sampled constraint, and
//! `Σ₀ = -Σᵢ λᵗᵢ Σᵢ + τ I`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::StochasticProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CurvatureMatrix {
    ScaledIdentity(f64),
    Diagonal(Vec<f64>),
}

impl CurvatureMatrix {
    /// `out += M v`
    #[inline]
    pub fn add_apply(&self, v: &[f64], out: &mut [f64]) {
        match self {
            CurvatureMatrix::ScaledIdentity(s) => linalg::axpy(*s, v, out),
            CurvatureMatrix::Diagonal(d) => {
                for ((o, vi), di) in out.iter_mut().zip(v).zip(d) {
                    *o += di * vi;
                }
            }
        }
    }

    /// `⟨M v, v⟩`, with `‖v‖²` supplied by the caller.
    #[inline]
    pub fn quad_form(&self, v: &[f64], v_norm_sq: f64) -> f64 {
        match self {
            CurvatureMatrix::ScaledIdentity(s) => s * v_norm_sq,
            CurvatureMatrix::Diagonal(d) => d.iter().zip(v).map(|(di, vi)| di * vi * vi).sum(),
        }
    }

    pub fn diag_entry(&self, j: usize) -> f64 {
        match self {
            CurvatureMatrix::ScaledIdentity(s) => *s,
            CurvatureMatrix::Diagonal(d) => d[j],
        }
    }

    pub fn min_diag(&self) -> f64 {
        match self {
            CurvatureMatrix::ScaledIdentity(s) => *s,
            CurvatureMatrix::Diagonal(d) => d.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max_diag(&self) -> f64 {
        match self {
            CurvatureMatrix::ScaledIdentity(s) => *s,
            CurvatureMatrix::Diagonal(d) => d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Spectral norm (largest absolute diagonal entry).
    pub fn norm(&self) -> f64 {
        match self {
            CurvatureMatrix::ScaledIdentity(s) => s.abs(),
            CurvatureMatrix::Diagonal(d) => d.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// How the objective curvature `Σ₀` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CurvatureMode {
    /// `Σ₀ = -Σᵢ λᵢ Σᵢ + τ I`.
    #[default]
    StepOne,
    /// Batch-averaged diagonal Hessian of the objective, floored entrywise at
    /// the `StepOne` value so the subproblem stays strongly convex.
    EmpiricalHessian,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelOptions {
    /// `δ ≥ 0` in `Σᵢ = -(Lᵢ + δ) I`.
    pub sigma_margin: f64,
    pub curvature: CurvatureMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub anchor: Vec<f64>,
    pub f0: f64,
    pub c0: Vec<f64>,
    pub sigma0: CurvatureMatrix,
    /// `Gᵢ(xᵗ, ξ)` for each constraint.
    pub base: Vec<f64>,
    /// Row-major `p × n` constraint gradients.
    pub jac: Vec<f64>,
    pub curvatures: Vec<CurvatureMatrix>,
    pub sigma: f64,
    pub alpha: f64,
    pub tau: f64,
    pub lambda: Vec<f64>,
}

impl QuadraticModel {
    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.base.len()
    }

    pub fn constraint_grad(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.jac[i * n..(i + 1) * n]
    }
}

/// Parameters shared by every model built during one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub tau: f64,
    pub sigma: f64,
    pub alpha: f64,
}

pub fn build_model<P: StochasticProblem + ?Sized>(
    problem: &P,
    x_t: &[f64],
    lambda_t: &[f64],
    batch: &[usize],
    params: ModelParams,
    options: &ModelOptions,
) -> Result<QuadraticModel> {
    let n = problem.dim();
    let p = problem.num_constraints();
    if x_t.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x_t.len(),
        });
    }
    if lambda_t.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: lambda_t.len(),
        });
    }
    if batch.is_empty() {
        return Err(Error::InvalidParameter {
            name: "batch",
            reason: "must contain at least one sample".into(),
        });
    }
    if let Some(v) = lambda_t.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("multipliers must be nonnegative, found {v}"),
        });
    }
    if !(params.tau > 0.0) || !(params.sigma > 0.0) || !(params.alpha > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau/sigma/alpha",
            reason: "must all be positive".into(),
        });
    }
    if options.sigma_margin < 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma_margin",
            reason: "must be nonnegative".into(),
        });
    }

    let inv = 1.0 / batch.len() as f64;
    let mut f0 = 0.0;
    let mut c0 = vec![0.0; n];
    let mut base = vec![0.0; p];
    let mut jac = vec![0.0; p * n];
    let mut grad = vec![0.0; n];
    let mut vals = vec![0.0; p];
    let mut jac_s = vec![0.0; p * n];
    for &s in batch {
        let f = problem.objective(x_t, s, Some(&mut grad));
        if !f.is_finite() || !linalg::all_finite(&grad) {
            return Err(Error::NonFiniteOracle {
                sample: s,
                what: "objective",
            });
        }
        problem.constraints(x_t, s, &mut vals, Some(&mut jac_s));
        if !linalg::all_finite(&vals) || !linalg::all_finite(&jac_s) {
            return Err(Error::NonFiniteOracle {
                sample: s,
                what: "constraints",
            });
        }
        f0 += inv * f;
        linalg::axpy(inv, &grad, &mut c0);
        linalg::axpy(inv, &vals, &mut base);
        linalg::axpy(inv, &jac_s, &mut jac);
    }

    let moduli = problem.moduli();
    let curv_scalars: Vec<f64> = moduli
        .constraints
        .iter()
        .map(|l| -(l + options.sigma_margin))
        .collect();
    let step_one = params.tau - linalg::dot(lambda_t, &curv_scalars);
    let sigma0 = match options.curvature {
        CurvatureMode::StepOne => CurvatureMatrix::ScaledIdentity(step_one),
        CurvatureMode::EmpiricalHessian => {
            let mut diag = vec![0.0; n];
            let mut h = vec![0.0; n];
            for &s in batch {
                problem.objective_hessian_diag(x_t, s, &mut h)?;
                if !linalg::all_finite(&h) {
                    return Err(Error::NonFiniteOracle {
                        sample: s,
                        what: "objective Hessian",
                    });
                }
                linalg::axpy(inv, &h, &mut diag);
            }
            for v in diag.iter_mut() {
                *v = v.max(step_one);
            }
            CurvatureMatrix::Diagonal(diag)
        }
    };

    Ok(QuadraticModel {
        anchor: x_t.to_vec(),
        f0,
        c0,
        sigma0,
        base,
        jac,
        curvatures: curv_scalars
            .into_iter()
            .map(CurvatureMatrix::ScaledIdentity)
            .collect(),
        sigma: params.sigma,
        alpha: params.alpha,
        tau: params.tau,
        lambda: lambda_t.to_vec(),
    })
}

/// Evaluates `(q₀(x), (qᵢ(x))ᵢ)`.
pub fn eval_model(model: &QuadraticModel, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = model.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let mut d = vec![0.0; n];
    linalg::sub_into(x, &model.anchor, &mut d);
    let dd = linalg::norm_sq(&d);
    let q0 = model.f0 + linalg::dot(&model.c0, &d) + 0.5 * model.sigma0.quad_form(&d, dd);
    let q = (0..model.num_constraints())
        .map(|i| {
            model.base[i]
                + linalg::dot(model.constraint_grad(i), &d)
                + 0.5 * model.curvatures[i].quad_form(&d, dd)
        })
        .collect();
    Ok((q0, q))
}
