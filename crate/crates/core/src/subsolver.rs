//! The strongly convex proximal augmented-Lagrangian subproblem and the
//! accelerated projected gradient method with backtracking used to solve it.
//!
//! The subproblem objective, with `d = x - xᵗ` and `sᵢ = λᵗᵢ + σ Gᵢ(xᵗ, ξ)`, is
//!
//! ```text
//! φ(x) = c₀ᵀd + ½dᵀΣ₀d + (1/2σ) Σᵢ [sᵢ + σ(cᵢᵀd + ½dᵀΣᵢd)]₊² + (α/2)‖d‖²
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::BoxDomain;
use crate::qmodel::{CurvatureMatrix, QuadraticModel};

/// A smooth function minimized over a box by [`apg_minimize`].
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Writes the gradient into `out` and returns the value.
    fn value_grad(&self, x: &[f64], out: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApgSettings {
    /// Backtracking growth factor, `> 1`.
    pub eta: f64,
    /// Initial curvature estimate `L₋₁`.
    pub initial_lipschitz: f64,
    /// Projected-gradient residual threshold.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ApgSettings {
    fn default() -> Self {
        Self {
            eta: 2.0,
            initial_lipschitz: 1.0,
            tol: 1e-8,
            max_iter: 2000,
        }
    }
}

impl ApgSettings {
    fn validate(&self) -> Result<()> {
        if !(self.eta > 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must exceed 1, got {}", self.eta),
            });
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: format!("must be positive, got {}", self.tol),
            });
        }
        if !(self.initial_lipschitz > 0.0) || !self.initial_lipschitz.is_finite() {
            return Err(Error::InvalidParameter {
                name: "initial_lipschitz",
                reason: "must be positive and finite".into(),
            });
        }
        Ok(())
    }
}

/// One accepted step; satisfies
/// `phi_next ≤ phi_y + inner + lipschitz/2 · step_sq` up to rounding slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApgStep {
    pub lipschitz: f64,
    pub phi_y: f64,
    pub phi_next: f64,
    pub inner: f64,
    pub step_sq: f64,
}

impl ApgStep {
    pub fn sufficient_decrease_gap(&self) -> f64 {
        self.phi_y + self.inner + 0.5 * self.lipschitz * self.step_sq - self.phi_next
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApgOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// `‖x - Π(x - ∇φ(x))‖` at the returned point.
    pub residual: f64,
    pub converged: bool,
    pub final_lipschitz: f64,
}

/// Projected-gradient residual `‖x - Π(x - g)‖`.
pub fn projected_residual(x: &[f64], grad: &[f64], domain: &BoxDomain) -> f64 {
    let r = domain.radius();
    x.iter()
        .zip(grad)
        .map(|(xi, gi)| {
            let v = xi - (xi - gi).clamp(-r, r);
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

// Relative slack absorbing rounding in the sufficient-decrease test.
const DECREASE_SLACK: f64 = 1e-12;
const MAX_LIPSCHITZ: f64 = 1e300;

/// Accelerated projected gradient with backtracking and a monotone restart.
pub fn apg_minimize<O: SmoothObjective + ?Sized>(
    objective: &O,
    domain: &BoxDomain,
    settings: &ApgSettings,
    x_start: &[f64],
    mut trace: Option<&mut Vec<ApgStep>>,
) -> Result<ApgOutcome> {
    settings.validate()?;
    let n = objective.dim();
    if x_start.len() != n || domain.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x_start.len(),
        });
    }

    let mut x = x_start.to_vec();
    domain.project_in_place(&mut x);
    let mut grad_x = vec![0.0; n];
    let mut phi_x = objective.value_grad(&x, &mut grad_x);
    check_finite(phi_x, &grad_x)?;
    let mut residual = projected_residual(&x, &grad_x, domain);
    let mut lipschitz = settings.initial_lipschitz;
    if residual <= settings.tol {
        return Ok(ApgOutcome {
            x,
            value: phi_x,
            iterations: 0,
            residual,
            converged: true,
            final_lipschitz: lipschitz,
        });
    }

    let mut y = x.clone();
    let mut grad_y = grad_x.clone();
    let mut phi_y = phi_x;
    let mut y_is_x = true;
    let mut momentum_k = 0usize;
    let mut z = vec![0.0; n];
    let mut diff = vec![0.0; n];

    for it in 1..=settings.max_iter {
        if !y_is_x {
            phi_y = objective.value_grad(&y, &mut grad_y);
            check_finite(phi_y, &grad_y)?;
        }

        // Smallest i with the sufficient-decrease condition at L·ηⁱ.
        let (phi_z, inner, step_sq) = loop {
            let inv_l = 1.0 / lipschitz;
            for j in 0..n {
                z[j] = y[j] - inv_l * grad_y[j];
            }
            domain.project_in_place(&mut z);
            linalg::sub_into(&z, &y, &mut diff);
            let phi_z = objective.value(&z);
            if !phi_z.is_finite() {
                return Err(Error::NonFinite("subproblem objective"));
            }
            let inner = linalg::dot(&grad_y, &diff);
            let step_sq = linalg::norm_sq(&diff);
            let bound = phi_y + inner + 0.5 * lipschitz * step_sq;
            if phi_z <= bound + DECREASE_SLACK * phi_y.abs().max(1.0) {
                break (phi_z, inner, step_sq);
            }
            lipschitz *= settings.eta;
            if lipschitz > MAX_LIPSCHITZ {
                return Err(Error::NonFinite("backtracking curvature estimate"));
            }
        };
        if let Some(t) = trace.as_deref_mut() {
            t.push(ApgStep {
                lipschitz,
                phi_y,
                phi_next: phi_z,
                inner,
                step_sq,
            });
        }

        let restart = phi_z > phi_x;
        // y ← z + k/(k+3)(z - x), or y ← z on restart.
        if restart || momentum_k == 0 {
            y.copy_from_slice(&z);
            y_is_x = true;
            momentum_k = if restart { 0 } else { 1 };
        } else {
            let w = momentum_k as f64 / (momentum_k as f64 + 3.0);
            for j in 0..n {
                y[j] = z[j] + w * (z[j] - x[j]);
            }
            y_is_x = false;
            momentum_k += 1;
        }
        std::mem::swap(&mut x, &mut z);

        phi_x = objective.value_grad(&x, &mut grad_x);
        check_finite(phi_x, &grad_x)?;
        residual = projected_residual(&x, &grad_x, domain);
        if y_is_x {
            grad_y.copy_from_slice(&grad_x);
            phi_y = phi_x;
        }
        if residual <= settings.tol {
            return Ok(ApgOutcome {
                x,
                value: phi_x,
                iterations: it,
                residual,
                converged: true,
                final_lipschitz: lipschitz,
            });
        }
    }

    Ok(ApgOutcome {
        x,
        value: phi_x,
        iterations: settings.max_iter,
        residual,
        converged: false,
        final_lipschitz: lipschitz,
    })
}

fn check_finite(value: f64, grad: &[f64]) -> Result<()> {
    if value.is_finite() && linalg::all_finite(grad) {
        Ok(())
    } else {
        Err(Error::NonFinite("subproblem objective or gradient"))
    }
}

/// The subproblem built from one quadratic model.
#[derive(Debug, Clone)]
pub struct SubproblemSpec<'a> {
    pub model: &'a QuadraticModel,
    pub domain: BoxDomain,
    /// `sᵢ = λᵗᵢ + σ qᵢ⁰`.
    pub shifted: Vec<f64>,
}

impl<'a> SubproblemSpec<'a> {
    pub fn new(model: &'a QuadraticModel, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: domain.dim(),
            });
        }
        let shifted = model
            .lambda
            .iter()
            .zip(&model.base)
            .map(|(l, g)| l + model.sigma * g)
            .collect();
        Ok(Self {
            model,
            domain,
            shifted,
        })
    }

    fn eval(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let m = self.model;
        let n = m.dim();
        let sigma = m.sigma;
        let mut d = vec![0.0; n];
        linalg::sub_into(x, &m.anchor, &mut d);
        let dd = linalg::norm_sq(&d);

        let mut value =
            linalg::dot(&m.c0, &d) + 0.5 * m.sigma0.quad_form(&d, dd) + 0.5 * m.alpha * dd;
        let mut penalty = 0.0;
        match grad {
            Some(g) => {
                g.copy_from_slice(&m.c0);
                m.sigma0.add_apply(&d, g);
                linalg::axpy(m.alpha, &d, g);
                for (i, s) in self.shifted.iter().enumerate() {
                    let ci = m.constraint_grad(i);
                    let curv = &m.curvatures[i];
                    let arg = s + sigma * (linalg::dot(ci, &d) + 0.5 * curv.quad_form(&d, dd));
                    if arg > 0.0 {
                        penalty += arg * arg;
                        linalg::axpy(arg, ci, g);
                        match curv {
                            CurvatureMatrix::ScaledIdentity(c) => linalg::axpy(arg * c, &d, g),
                            other => {
                                let mut tmp = vec![0.0; n];
                                other.add_apply(&d, &mut tmp);
                                linalg::axpy(arg, &tmp, g);
                            }
                        }
                    }
                }
            }
            None => {
                for (i, s) in self.shifted.iter().enumerate() {
                    let ci = m.constraint_grad(i);
                    let arg =
                        s + sigma * (linalg::dot(ci, &d) + 0.5 * m.curvatures[i].quad_form(&d, dd));
                    if arg > 0.0 {
                        penalty += arg * arg;
                    }
                }
            }
        }
        value += penalty / (2.0 * sigma);
        value
    }
}

impl SmoothObjective for SubproblemSpec<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x, None)
    }

    fn value_grad(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.eval(x, Some(out))
    }
}

pub fn eval_phi(spec: &SubproblemSpec<'_>, x: &[f64]) -> f64 {
    spec.eval(x, None)
}

pub fn grad_phi(spec: &SubproblemSpec<'_>, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; spec.model.dim()];
    spec.eval(x, Some(&mut g));
    g
}

pub fn solve_apg(
    spec: &SubproblemSpec<'_>,
    settings: &ApgSettings,
    x_start: &[f64],
) -> Result<ApgOutcome> {
    apg_minimize(spec, &spec.domain, settings, x_start, None)
}

/// Default stopping threshold `max(1e-8, 1e-3·σ·min(1, ‖c₀‖))`.
pub fn default_tolerance(model: &QuadraticModel) -> f64 {
    (1e-3 * model.sigma * linalg::norm(&model.c0).min(1.0)).max(1e-8)
}
