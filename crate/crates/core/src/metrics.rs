//! Stationarity, feasibility and complementarity residuals evaluated on the
//! exact finite-sum expectations, plus running averages and power-law fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::StochasticProblem;
use crate::subsolver::{apg_minimize, ApgSettings, SmoothObjective};

/// Residual tolerance for the deterministic prox solve.
pub const PROX_TOL: f64 = 1e-9;
const PROX_MAX_ITER: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MetricMode {
    /// `‖α(x - prox)‖²`, the squared Moreau-envelope gradient.
    Moreau,
    /// `‖R_α(x, λ)‖²`, the squared projected-gradient map.
    #[default]
    Map,
}

impl std::str::FromStr for MetricMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "moreau" => Ok(MetricMode::Moreau),
            "map" => Ok(MetricMode::Map),
            other => Err(format!(
                "unknown metric mode `{other}` (expected moreau|map)"
            )),
        }
    }
}

impl std::fmt::Display for MetricMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricMode::Moreau => "moreau",
            MetricMode::Map => "map",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: usize,
    pub kkt_sq: f64,
    /// `Σᵢ [gᵢ(x)]₊`
    pub cons: f64,
    /// `⟨λ, g(x)⟩`
    pub comp: f64,
}

/// `∇f(x) + Σᵢ λᵢ∇gᵢ(x)` on the full expectations.
pub fn lagrangian_grad<P: StochasticProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    lambda: &[f64],
) -> Vec<f64> {
    let mut grad = vec![0.0; problem.dim()];
    lagrangian_value_grad(problem, x, lambda, &mut grad);
    grad
}

/// Returns `L(x, λ)` and writes `∇ₓL` into `grad`.
pub fn lagrangian_value_grad<P: StochasticProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    lambda: &[f64],
    grad: &mut [f64],
) -> f64 {
    let n = problem.dim();
    let p = problem.num_constraints();
    let mut value = problem.full_objective(x, Some(grad));
    if p > 0 {
        let mut g = vec![0.0; p];
        let mut jac = vec![0.0; p * n];
        problem.full_constraints(x, &mut g, Some(&mut jac));
        for (i, row) in jac.chunks_exact(n).enumerate() {
            if lambda[i] != 0.0 {
                linalg::axpy(lambda[i], row, grad);
            }
        }
        value += linalg::dot(lambda, &g);
    }
    value
}

/// Projected-gradient map `R_α(x,λ) = α[x - Π(x - α⁻¹∇ₓL(x,λ))]`.
pub fn kkt_map<P: StochasticProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    lambda: &[f64],
    alpha: f64,
) -> Vec<f64> {
    let grad = lagrangian_grad(problem, x, lambda);
    map_from_grad(problem, x, &grad, alpha)
}

fn map_from_grad<P: StochasticProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    grad: &[f64],
    alpha: f64,
) -> Vec<f64> {
    let r = problem.domain().radius();
    x.iter()
        .zip(grad)
        .map(|(xi, gi)| alpha * (xi - (xi - gi / alpha).clamp(-r, r)))
        .collect()
}

struct ProxObjective<'a, P: ?Sized> {
    problem: &'a P,
    lambda: &'a [f64],
    center: &'a [f64],
    alpha: f64,
}

impl<P: StochasticProblem + ?Sized> SmoothObjective for ProxObjective<'_, P> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn value(&self, z: &[f64]) -> f64 {
        let mut value = self.problem.full_objective(z, None);
        let p = self.problem.num_constraints();
        if p > 0 {
            let mut g = vec![0.0; p];
            self.problem.full_constraints(z, &mut g, None);
            value += linalg::dot(self.lambda, &g);
        }
        value + 0.5 * self.alpha * linalg::dist(z, self.center).powi(2)
    }

    fn value_grad(&self, z: &[f64], out: &mut [f64]) -> f64 {
        let value = lagrangian_value_grad(self.problem, z, self.lambda, out);
        let mut prox = 0.0;
        for ((o, zi), ci) in out.iter_mut().zip(z).zip(self.center) {
            let d = zi - ci;
            *o += self.alpha * d;
            prox += d * d;
        }
        value + 0.5 * self.alpha * prox
    }
}

/// `argmin_{z ∈ X₀} L(z,λ) + (α/2)‖z - x‖²`, warm-started at `start`.
pub fn prox_point<P: StochasticProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    lambda: &[f64],
    alpha: f64,
    start: &[f64],
) -> Result<Vec<f64>> {
    let modulus = problem.moduli().lagrangian(lambda);
    if !(alpha > modulus) {
        return Err(Error::ProxNotStronglyConvex { alpha, modulus });
    }
    let objective = ProxObjective {
        problem,
        lambda,
        center: x,
        alpha,
    };
    let settings = ApgSettings {
        tol: PROX_TOL,
        max_iter: PROX_MAX_ITER,
        ..ApgSettings::default()
    };
    let out = apg_minimize(&objective, problem.domain(), &settings, start, None)?;
    if !out.converged {
        log::warn!(
            "prox solve stopped at residual {:.3e} after {} iterations",
            out.residual,
            out.iterations
        );
    }
    Ok(out.x)
}

/// Gradient of the Moreau envelope of `L(·,λ) + δ_{X₀}` with parameter
/// `1/α`: `α(x - prox(x))`.
pub fn moreau_grad<P: StochasticProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    lambda: &[f64],
    alpha: f64,
) -> Result<Vec<f64>> {
    let z = prox_point(problem, x, lambda, alpha, x)?;
    Ok(x.iter().zip(&z).map(|(xi, zi)| alpha * (xi - zi)).collect())
}

pub fn residual_row<P: StochasticProblem + ?Sized>(
    problem: &P,
    t: usize,
    x: &[f64],
    lambda: &[f64],
    alpha: f64,
    mode: MetricMode,
) -> Result<ResidualSample> {
    let p = problem.num_constraints();
    let mut g = vec![0.0; p];
    problem.full_constraints(x, &mut g, None);
    let cons = g.iter().map(|v| v.max(0.0)).sum();
    let comp = linalg::dot(lambda, &g);
    let kkt_sq = match mode {
        MetricMode::Map => linalg::norm_sq(&kkt_map(problem, x, lambda, alpha)),
        MetricMode::Moreau => linalg::norm_sq(&moreau_grad(problem, x, lambda, alpha)?),
    };
    Ok(ResidualSample {
        t,
        kkt_sq,
        cons,
        comp,
    })
}

/// Prefix averages `(r²_KKT, r_cons, |mean comp|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunningAverage {
    pub t: usize,
    pub r_kkt_sq: f64,
    pub r_cons: f64,
    pub r_comp_abs: f64,
}

/// Incremental prefix-average accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    count: usize,
    kkt: f64,
    cons: f64,
    comp: f64,
}

impl Accumulator {
    pub fn push(&mut self, row: &ResidualSample) -> RunningAverage {
        self.count += 1;
        self.kkt += row.kkt_sq;
        self.cons += row.cons;
        self.comp += row.comp;
        self.current(row.t)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    fn current(&self, t: usize) -> RunningAverage {
        let k = self.count as f64;
        RunningAverage {
            t,
            r_kkt_sq: self.kkt / k,
            r_cons: self.cons / k,
            r_comp_abs: (self.comp / k).abs(),
        }
    }
}

pub fn running_averages(rows: &[ResidualSample]) -> Vec<RunningAverage> {
    let mut acc = Accumulator::default();
    rows.iter().map(|r| acc.push(r)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    /// Intercept of the line in natural-log coordinates.
    pub intercept: f64,
    pub used: usize,
    pub dropped: usize,
}

impl PowerLawFit {
    pub fn predict(&self, t: f64) -> f64 {
        (self.intercept + self.slope * t.ln()).exp()
    }
}

/// Least-squares line through `(ln T, ln value)`; nonpositive values are
/// dropped with a warning.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, v)| *t > 0.0 && *v > 0.0 && t.is_finite() && v.is_finite())
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    if dropped > 0 {
        log::warn!("power-law fit: dropped {dropped} nonpositive or non-finite points");
    }
    if usable.len() < 2 {
        return Err(Error::NotEnoughPoints(usable.len()));
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::NotEnoughPoints(1));
    }
    let slope = sxy / sxx;
    Ok(PowerLawFit {
        slope,
        intercept: my - slope * mx,
        used: usable.len(),
        dropped,
    })
}
