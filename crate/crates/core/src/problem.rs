//! Problem abstraction: the box domain, per-sample oracles and the
//! geometry/regularity data the algorithm constants are built from.
//!
//! Randomness follows the scenario model: a problem owns a finite pool of
//! `num_samples()` realizations and a "fresh sample" is a uniform index into
//! that pool. Full expectations are exact averages over the pool.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// The box `{x : ‖x‖_∞ ≤ R}` in `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    radius: f64,
    dim: usize,
}

impl BoxDomain {
    pub fn new(radius: f64, dim: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be positive and finite, got {radius}"),
            });
        }
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self { radius, dim })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Euclidean diameter `2R√n`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius * (self.dim as f64).sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().all(|v| v.abs() <= self.radius)
    }

    pub fn center(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    /// Clamps `x` into the box in place.
    pub fn project_in_place(&self, x: &mut [f64]) {
        let r = self.radius;
        for v in x.iter_mut() {
            *v = v.clamp(-r, r);
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let r = self.radius;
        (0..self.dim).map(|_| rng.random_range(-r..=r)).collect()
    }
}

/// Euclidean projection onto the box.
pub fn project_box(x: &[f64], domain: &BoxDomain) -> Result<Vec<f64>> {
    if x.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: x.len(),
        });
    }
    let mut out = x.to_vec();
    domain.project_in_place(&mut out);
    Ok(out)
}

/// Projection onto the nonnegative orthant.
pub fn positive_part(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// Bounds on sampled values and gradients over the domain:
/// `‖G(x,ξ)‖ ≤ nu_g`, `‖∇F(x,ξ)‖ ≤ kappa_f`, `‖∇Gᵢ(x,ξ)‖ ≤ kappa_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemBounds {
    pub nu_g: f64,
    pub kappa_f: f64,
    pub kappa_g: f64,
}

/// Per-sample weak-convexity moduli: `F(·,ξ)` is `objective`-weakly convex
/// and `Gᵢ(·,ξ)` is `constraints[i]`-weakly convex for every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConvexity {
    pub objective: f64,
    pub constraints: Vec<f64>,
}

impl WeakConvexity {
    pub fn max_constraint(&self) -> f64 {
        self.constraints.iter().copied().fold(0.0, f64::max)
    }

    /// Modulus of `x ↦ f(x) + ⟨λ, g(x)⟩` for `λ ≥ 0`.
    pub fn lagrangian(&self, lambda: &[f64]) -> f64 {
        self.objective + linalg::dot(&self.constraints, lambda)
    }
}

/// A strictly feasible point `x̂` with `gᵢ(x̂) ≤ -margin` for all `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaterPoint {
    pub point: Vec<f64>,
    pub margin: f64,
}

/// Oracle access to a stochastic problem
/// `min E[F(x,ξ)] s.t. E[Gᵢ(x,ξ)] ≤ 0, x ∈ X₀`.
///
/// Oracles must be pure functions of `(x, sample)`.
pub trait StochasticProblem: Send + Sync {
    fn domain(&self) -> &BoxDomain;

    fn num_constraints(&self) -> usize;

    /// Size of the scenario pool.
    fn num_samples(&self) -> usize;

    /// Returns `F(x, ξ_sample)` and writes `∇ₓF` into `grad` when given.
    fn objective(&self, x: &[f64], sample: usize, grad: Option<&mut [f64]>) -> f64;

    /// Writes `G(x, ξ_sample)` into `values` and, when given, the Jacobian
    /// rows `∇ₓGᵢ` into `jac` (row-major, `p × n`).
    fn constraints(&self, x: &[f64], sample: usize, values: &mut [f64], jac: Option<&mut [f64]>);

    fn moduli(&self) -> &WeakConvexity;

    fn bounds(&self) -> Option<&ProblemBounds>;

    fn slater(&self) -> Option<&SlaterPoint> {
        None
    }

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    /// Exact `f(x)`, optionally with `∇f(x)`.
    fn full_objective(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let n = self.dim();
        let ns = self.num_samples();
        let inv = 1.0 / ns as f64;
        match grad {
            Some(g) => {
                g.fill(0.0);
                let mut tmp = vec![0.0; n];
                let mut val = 0.0;
                for s in 0..ns {
                    val += self.objective(x, s, Some(&mut tmp));
                    linalg::axpy(inv, &tmp, g);
                }
                val * inv
            }
            None => (0..ns).map(|s| self.objective(x, s, None)).sum::<f64>() * inv,
        }
    }

    /// Exact `g(x)`, optionally with its Jacobian.
    fn full_constraints(&self, x: &[f64], values: &mut [f64], jac: Option<&mut [f64]>) {
        let n = self.dim();
        let p = self.num_constraints();
        let ns = self.num_samples();
        let inv = 1.0 / ns as f64;
        values.fill(0.0);
        let mut vals = vec![0.0; p];
        match jac {
            Some(j) => {
                j.fill(0.0);
                let mut tmp = vec![0.0; p * n];
                for s in 0..ns {
                    self.constraints(x, s, &mut vals, Some(&mut tmp));
                    linalg::axpy(inv, &vals, values);
                    linalg::axpy(inv, &tmp, j);
                }
            }
            None => {
                for s in 0..ns {
                    self.constraints(x, s, &mut vals, None);
                    linalg::axpy(inv, &vals, values);
                }
            }
        }
    }

    /// Diagonal of `∇²ₓF(x, ξ_sample)`. Only needed for the
    /// empirical-Hessian curvature mode.
    fn objective_hessian_diag(&self, _x: &[f64], _sample: usize, _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("objective Hessian diagonal"))
    }
}

/// Estimates `(ν_g, κ_f, κ_g)` as the maximum over `probes` random
/// `(x, sample)` pairs in the domain, inflated by 10%.
pub fn estimate_bounds<P, R>(problem: &P, probes: usize, rng: &mut R) -> ProblemBounds
where
    P: StochasticProblem + ?Sized,
    R: Rng + ?Sized,
{
    let stats = probe_maxima(problem, probes, rng);
    ProblemBounds {
        nu_g: 1.1 * stats.nu_g,
        kappa_f: 1.1 * stats.kappa_f,
        kappa_g: 1.1 * stats.kappa_g,
    }
}

/// Raw maxima of `‖G‖`, `‖∇F‖`, `maxᵢ‖∇Gᵢ‖` over random probes.
pub fn probe_maxima<P, R>(problem: &P, probes: usize, rng: &mut R) -> ProblemBounds
where
    P: StochasticProblem + ?Sized,
    R: Rng + ?Sized,
{
    let n = problem.dim();
    let p = problem.num_constraints();
    let mut grad = vec![0.0; n];
    let mut vals = vec![0.0; p];
    let mut jac = vec![0.0; p * n];
    let mut out = ProblemBounds {
        nu_g: 0.0,
        kappa_f: 0.0,
        kappa_g: 0.0,
    };
    for _ in 0..probes {
        let x = problem.domain().sample_uniform(rng);
        let s = rng.random_range(0..problem.num_samples());
        problem.objective(&x, s, Some(&mut grad));
        problem.constraints(&x, s, &mut vals, Some(&mut jac));
        out.kappa_f = out.kappa_f.max(linalg::norm(&grad));
        out.nu_g = out.nu_g.max(linalg::norm(&vals));
        for row in jac.chunks_exact(n) {
            out.kappa_g = out.kappa_g.max(linalg::norm(row));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interior_point_is_fixed() {
        let d = BoxDomain::new(1.0, 2).unwrap();
        assert_eq!(project_box(&[0.5, -0.2], &d).unwrap(), vec![0.5, -0.2]);
    }

    #[test]
    fn clamps_componentwise() {
        let d = BoxDomain::new(2.0, 2).unwrap();
        assert_eq!(project_box(&[3.0, -7.0], &d).unwrap(), vec![2.0, -2.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let d = BoxDomain::new(1.0, 3).unwrap();
        assert!(matches!(
            project_box(&[1.0], &d),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn rejects_degenerate_domains() {
        assert!(BoxDomain::new(0.0, 2).is_err());
        assert!(BoxDomain::new(-1.0, 2).is_err());
        assert!(BoxDomain::new(1.0, 0).is_err());
        assert!(BoxDomain::new(f64::INFINITY, 2).is_err());
    }

    #[test]
    fn projection_is_nonexpansive() {
        let d = BoxDomain::new(1.5, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
            let y: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
            let px = project_box(&x, &d).unwrap();
            let py = project_box(&y, &d).unwrap();
            assert!(linalg::dist(&px, &py) <= linalg::dist(&x, &y) + 1e-15);
            assert_eq!(project_box(&px, &d).unwrap(), px);
        }
    }

    #[test]
    fn positive_part_cases() {
        assert_eq!(positive_part(&[-1.0, 0.0, 2.0]), vec![0.0, 0.0, 2.0]);
        assert_eq!(positive_part(&[-3.0, -0.1]), vec![0.0, 0.0]);
        assert_eq!(positive_part(&[0.5, 4.0]), vec![0.5, 4.0]);
    }

    #[test]
    fn diameter_matches_geometry() {
        let d = BoxDomain::new(10.0, 50).unwrap();
        assert!((d.diameter() - 20.0 * 50f64.sqrt()).abs() < 1e-12);
    }
}
