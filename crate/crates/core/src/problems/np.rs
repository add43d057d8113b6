//! Neyman-Pearson classification with the sigmoid loss `φ(u) = 1/(1 + eᵘ)`:
//!
//! ```text
//! min (1/N₀) Σ φ(xᵀaᵢ⁰)   s.t.   (1/N₁) Σ φ(-xᵀaᵢ¹) - τ ≤ 0
//! ```
//!
//! A scenario is a pair `(i₀, i₁)` drawn uniformly from the product of the two
//! class pools; index `s` maps to `(s / N₁, s % N₁)`. Feature vectors have unit
//! norm, so `|φ'| ≤ 1/4` bounds the gradients and `|φ''| ≤ 1/(6√3)` bounds the
//! weak-convexity moduli.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{BoxDomain, ProblemBounds, StochasticProblem, WeakConvexity};
use crate::rng::{stream_rng, Stream};

/// Default box radius for the otherwise unconstrained learning models.
pub const LEARNING_BOX_RADIUS: f64 = 100.0;

/// `max |φ''| = 1/(6√3)` for the logistic family.
pub const SIGMOID_CURVATURE: f64 = 0.096_225_044_864_937_63;

/// False-positive levels mirroring the three reference data sets.
pub const NP_LEVELS: [f64; 3] = [0.2, 0.3, 0.2];

#[inline]
pub fn sigmoid_loss(u: f64) -> f64 {
    logistic(-u)
}

/// `σ(u) = 1/(1 + e^{-u})`, stable for large `|u|`.
#[inline]
pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpParams {
    pub features: usize,
    pub positives: usize,
    pub negatives: usize,
    pub fp_level: f64,
    /// Distance between the class means before normalization.
    pub separation: f64,
    pub radius: f64,
}

impl Default for NpParams {
    fn default() -> Self {
        Self {
            features: 10,
            positives: 200,
            negatives: 200,
            fp_level: NP_LEVELS[0],
            separation: 2.0,
            radius: LEARNING_BOX_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpData {
    pub params: NpParams,
    /// Positive class, `N₀ × d`.
    pub positive: Vec<f64>,
    /// Negative class, `N₁ × d`.
    pub negative: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NeymanPearson {
    data: NpData,
    domain: BoxDomain,
    moduli: WeakConvexity,
    bounds: ProblemBounds,
}

pub(crate) fn gaussian_unit_rows<R: Rng>(rng: &mut R, rows: usize, mean: &[f64]) -> Vec<f64> {
    let d = mean.len();
    let mut out = Vec::with_capacity(rows * d);
    for _ in 0..rows {
        let mut v: Vec<f64> = mean
            .iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                m + z
            })
            .collect();
        let nv = linalg::norm(&v);
        if nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
        } else {
            v[0] = 1.0;
        }
        out.extend(v);
    }
    out
}

pub(crate) fn random_direction<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let nv = linalg::norm(&v);
        if nv > 1e-12 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

pub fn np_generate(seed: u64, params: NpParams) -> Result<NeymanPearson> {
    if !(params.fp_level > 0.0 && params.fp_level < 1.0) {
        return Err(Error::InvalidParameter {
            name: "fp_level",
            reason: format!("must lie in (0, 1), got {}", params.fp_level),
        });
    }
    if params.features == 0 || params.positives == 0 || params.negatives == 0 {
        return Err(Error::InvalidParameter {
            name: "features/positives/negatives",
            reason: "must be at least 1".into(),
        });
    }
    let mut rng = stream_rng(seed, Stream::Instance);
    let dir = random_direction(&mut rng, params.features);
    let half = 0.5 * params.separation;
    let mu_pos: Vec<f64> = dir.iter().map(|v| half * v).collect();
    let mu_neg: Vec<f64> = dir.iter().map(|v| -half * v).collect();
    let positive = gaussian_unit_rows(&mut rng, params.positives, &mu_pos);
    let negative = gaussian_unit_rows(&mut rng, params.negatives, &mu_neg);
    NeymanPearson::new(NpData {
        params,
        positive,
        negative,
    })
}

fn max_row_norm(rows: &[f64], d: usize) -> f64 {
    rows.chunks_exact(d).map(linalg::norm).fold(0.0, f64::max)
}

impl NeymanPearson {
    pub fn new(data: NpData) -> Result<Self> {
        let p = data.params;
        if !(p.fp_level > 0.0 && p.fp_level < 1.0) {
            return Err(Error::Instance("np: fp_level must lie in (0, 1)".into()));
        }
        if p.features == 0 || p.positives == 0 || p.negatives == 0 {
            return Err(Error::Instance("np: empty class or feature set".into()));
        }
        if Some(data.positive.len()) != p.positives.checked_mul(p.features)
            || Some(data.negative.len()) != p.negatives.checked_mul(p.features)
        {
            return Err(Error::Instance(
                "np: array sizes disagree with params".into(),
            ));
        }
        if !linalg::all_finite(&data.positive) || !linalg::all_finite(&data.negative) {
            return Err(Error::Instance("np: non-finite feature".into()));
        }
        if p.positives.checked_mul(p.negatives).is_none() {
            return Err(Error::Instance("np: scenario pool too large".into()));
        }
        let domain = BoxDomain::new(p.radius, p.features)
            .map_err(|e| Error::Instance(format!("np: {e}")))?;
        let r0 = max_row_norm(&data.positive, p.features);
        let r1 = max_row_norm(&data.negative, p.features);
        Ok(Self {
            domain,
            moduli: WeakConvexity {
                objective: SIGMOID_CURVATURE * r0 * r0,
                constraints: vec![SIGMOID_CURVATURE * r1 * r1],
            },
            bounds: ProblemBounds {
                nu_g: p.fp_level.max(1.0 - p.fp_level),
                kappa_f: 0.25 * r0,
                kappa_g: 0.25 * r1,
            },
            data,
        })
    }

    pub fn data(&self) -> &NpData {
        &self.data
    }

    fn row(rows: &[f64], d: usize, i: usize) -> &[f64] {
        &rows[i * d..(i + 1) * d]
    }

    fn split(&self, sample: usize) -> (usize, usize) {
        let n1 = self.data.params.negatives;
        (sample / n1, sample % n1)
    }

    fn class_mean(rows: &[f64], d: usize, x: &[f64], sign: f64, grad: Option<&mut [f64]>) -> f64 {
        let count = rows.len() / d;
        let inv = 1.0 / count as f64;
        let mut value = 0.0;
        match grad {
            Some(g) => {
                g.fill(0.0);
                for a in rows.chunks_exact(d) {
                    let u = sign * linalg::dot(a, x);
                    let phi = sigmoid_loss(u);
                    value += phi;
                    // d/du φ(u) = -φ(1 - φ)
                    linalg::axpy(-sign * phi * (1.0 - phi) * inv, a, g);
                }
            }
            None => {
                for a in rows.chunks_exact(d) {
                    value += sigmoid_loss(sign * linalg::dot(a, x));
                }
            }
        }
        value * inv
    }
}

impl StochasticProblem for NeymanPearson {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn num_samples(&self) -> usize {
        self.data.params.positives * self.data.params.negatives
    }

    fn objective(&self, x: &[f64], sample: usize, grad: Option<&mut [f64]>) -> f64 {
        let d = self.data.params.features;
        let a = Self::row(&self.data.positive, d, self.split(sample).0);
        let phi = sigmoid_loss(linalg::dot(a, x));
        if let Some(g) = grad {
            for (gi, ai) in g.iter_mut().zip(a) {
                *gi = -phi * (1.0 - phi) * ai;
            }
        }
        phi
    }

    fn constraints(&self, x: &[f64], sample: usize, values: &mut [f64], jac: Option<&mut [f64]>) {
        let d = self.data.params.features;
        let a = Self::row(&self.data.negative, d, self.split(sample).1);
        let phi = sigmoid_loss(-linalg::dot(a, x));
        values[0] = phi - self.data.params.fp_level;
        if let Some(j) = jac {
            for (ji, ai) in j.iter_mut().zip(a) {
                *ji = phi * (1.0 - phi) * ai;
            }
        }
    }

    fn full_objective(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let d = self.data.params.features;
        Self::class_mean(&self.data.positive, d, x, 1.0, grad)
    }

    fn full_constraints(&self, x: &[f64], values: &mut [f64], jac: Option<&mut [f64]>) {
        let d = self.data.params.features;
        values[0] =
            Self::class_mean(&self.data.negative, d, x, -1.0, jac) - self.data.params.fp_level;
    }

    fn moduli(&self) -> &WeakConvexity {
        &self.moduli
    }

    fn bounds(&self) -> Option<&ProblemBounds> {
        Some(&self.bounds)
    }

    fn objective_hessian_diag(&self, x: &[f64], sample: usize, out: &mut [f64]) -> Result<()> {
        let d = self.data.params.features;
        let a = Self::row(&self.data.positive, d, self.split(sample).0);
        let phi = sigmoid_loss(linalg::dot(a, x));
        // φ'' = φ(1 - φ)(1 - 2φ)
        let curv = phi * (1.0 - phi) * (1.0 - 2.0 * phi);
        for (o, ai) in out.iter_mut().zip(a) {
            *o = curv * ai * ai;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(seed: u64) -> NeymanPearson {
        np_generate(
            seed,
            NpParams {
                features: 4,
                positives: 12,
                negatives: 9,
                ..NpParams::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn sigmoid_at_zero() {
        assert_eq!(sigmoid_loss(0.0), 0.5);
        for level in NP_LEVELS {
            let prob = np_generate(
                1,
                NpParams {
                    fp_level: level,
                    ..NpParams::default()
                },
            )
            .unwrap();
            let mut g = [0.0];
            prob.full_constraints(&[0.0; 10], &mut g, None);
            assert!((g[0] - (0.5 - level)).abs() <= 1e-15);
        }
        assert_eq!(NP_LEVELS, [0.2, 0.3, 0.2]);
    }

    #[test]
    fn constraint_is_monotone_under_scaling() {
        let prob = NeymanPearson::new(NpData {
            params: NpParams {
                features: 2,
                positives: 1,
                negatives: 3,
                ..NpParams::default()
            },
            positive: vec![1.0, 0.0],
            negative: vec![1.0, 0.0, 0.8, 0.6, 0.6, 0.8],
        })
        .unwrap();
        let g = |z: &[f64]| {
            let mut v = [0.0];
            prob.full_constraints(z, &mut v, None);
            v[0]
        };
        // All margins xᵀa¹ > 0: φ(-xᵀa¹) = 1/(1 + e^{-xᵀa¹}) grows with the scale.
        let x = [0.5, 0.25];
        assert!(g(&[1.0, 0.5]) > g(&x));
        // All margins negative: the constraint value falls.
        assert!(g(&[-1.0, -0.5]) < g(&[-0.5, -0.25]));
    }

    #[test]
    fn samples_pair_both_classes() {
        let prob = small(3);
        assert_eq!(prob.num_samples(), 12 * 9);
        let x = vec![0.4, -0.1, 0.3, 0.2];
        // Generic per-sample averaging agrees with the class-mean fast path.
        let mut slow_grad = vec![0.0; 4];
        let mut g = vec![0.0; 4];
        let mut slow = 0.0;
        let mut slow_c = 0.0;
        let mut slow_jac = vec![0.0; 4];
        let mut v = [0.0];
        let mut j = vec![0.0; 4];
        let inv = 1.0 / prob.num_samples() as f64;
        for s in 0..prob.num_samples() {
            slow += inv * prob.objective(&x, s, Some(&mut g));
            linalg::axpy(inv, &g, &mut slow_grad);
            prob.constraints(&x, s, &mut v, Some(&mut j));
            slow_c += inv * v[0];
            linalg::axpy(inv, &j, &mut slow_jac);
        }
        let mut fast_grad = vec![0.0; 4];
        let fast = prob.full_objective(&x, Some(&mut fast_grad));
        let mut fast_c = [0.0];
        let mut fast_jac = vec![0.0; 4];
        prob.full_constraints(&x, &mut fast_c, Some(&mut fast_jac));
        assert!((fast - slow).abs() <= 1e-12);
        assert!((fast_c[0] - slow_c).abs() <= 1e-12);
        assert!(linalg::dist(&fast_grad, &slow_grad) <= 1e-12);
        assert!(linalg::dist(&fast_jac, &slow_jac) <= 1e-12);
    }

    #[test]
    fn rows_are_unit_norm_and_losses_bounded() {
        let prob = small(4);
        for a in prob
            .data()
            .positive
            .chunks_exact(4)
            .chain(prob.data().negative.chunks_exact(4))
        {
            assert!((linalg::norm(a) - 1.0).abs() <= 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut v = [0.0];
        for _ in 0..200 {
            let x = prob.domain().sample_uniform(&mut rng);
            let s = rng.random_range(0..prob.num_samples());
            let f = prob.objective(&x, s, None);
            prob.constraints(&x, s, &mut v, None);
            assert!((0.0..=1.0).contains(&f));
            assert!((0.0..=1.0).contains(&(v[0] + prob.data().params.fp_level)));
        }
    }

    #[test]
    fn declared_bounds_and_moduli_hold() {
        let prob = small(5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let seen = crate::problem::probe_maxima(&prob, 1000, &mut rng);
        let b = prob.bounds().unwrap();
        assert!(seen.nu_g <= b.nu_g && seen.kappa_f <= b.kappa_f && seen.kappa_g <= b.kappa_g);
        let mut h = vec![0.0; 4];
        for _ in 0..200 {
            let x = prob.domain().sample_uniform(&mut rng);
            let x: Vec<f64> = x.iter().map(|v| v * 0.02).collect();
            let s = rng.random_range(0..prob.num_samples());
            prob.objective_hessian_diag(&x, s, &mut h).unwrap();
            assert!(h.iter().all(|v| -v <= prob.moduli().objective + 1e-15));
        }
        assert!((SIGMOID_CURVATURE - 1.0 / (6.0 * 3f64.sqrt())).abs() < 1e-17);
    }

    #[test]
    fn hessian_diagonal_matches_differences() {
        let prob = small(6);
        let x = vec![0.7, -1.2, 0.4, 2.0];
        let mut h = vec![0.0; 4];
        prob.objective_hessian_diag(&x, 5, &mut h).unwrap();
        let step = 1e-4;
        let mut gp = vec![0.0; 4];
        let mut gm = vec![0.0; 4];
        for k in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += step;
            xm[k] -= step;
            prob.objective(&xp, 5, Some(&mut gp));
            prob.objective(&xm, 5, Some(&mut gm));
            assert!(((gp[k] - gm[k]) / (2.0 * step) - h[k]).abs() <= 1e-7);
        }
    }

    #[test]
    fn rejects_bad_levels() {
        for level in [0.0, 1.0, -0.5, f64::NAN] {
            let params = NpParams {
                fp_level: level,
                ..NpParams::default()
            };
            assert!(np_generate(1, params).is_err());
        }
        assert_eq!(small(7).data(), small(7).data());
    }
}
