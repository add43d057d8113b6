//! Fairness-constrained classification with a truncated logistic loss:
//!
//! ```text
//! min (1/|D|) Σ_{(a,b)∈D} φ_α(log(1 + exp(-b aᵀx)))
//! s.t. c·mean_{a∈S} σ(aᵀx) - mean_{a∈S_min} σ(aᵀx) ≤ 0,    c = τ|S|/|S_min|
//! ```
//!
//! with `φ_α(u) = α log(1 + u/α)`. A scenario is a triple drawn uniformly from
//! `D × S × S_min`.
//!
//! Moduli. For `h(u) = φ_α(ℓ(u))` with `ℓ(u) = log(1 + e^{-u})`,
//! `h'' = φ_α''(ℓ)ℓ'² + φ_α'(ℓ)ℓ''` where `φ_α'' ≥ -1/α`, `ℓ'² ≤ 1`, and the
//! second term is nonnegative, so `h'' ≥ -1/α` and the objective is
//! `‖a‖²/α`-weakly convex. The constraint is `(c + 1)‖a‖²/(6√3)`-weakly convex.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::np::{
    gaussian_unit_rows, logistic, random_direction, LEARNING_BOX_RADIUS, SIGMOID_CURVATURE,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{BoxDomain, ProblemBounds, StochasticProblem, WeakConvexity};
use crate::rng::{stream_rng, Stream};

/// Fairness levels mirroring the three reference data sets.
pub const FAIRNESS_LEVELS: [f64; 3] = [0.1, 0.62, 0.55];

/// Truncation parameter of `φ_α`.
pub const DEFAULT_TRUNCATION: f64 = 2.0;

/// `φ_α(u) = α log(1 + u/α)`
#[inline]
pub fn truncated_loss(u: f64, alpha: f64) -> f64 {
    alpha * (u / alpha).ln_1p()
}

/// `log(1 + e^{-u})`, stable for large `|u|`.
#[inline]
pub fn logistic_loss(u: f64) -> f64 {
    if u > 0.0 {
        (-u).exp().ln_1p()
    } else {
        -u + u.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessParams {
    pub features: usize,
    pub data_size: usize,
    pub group_size: usize,
    pub minority_size: usize,
    pub level: f64,
    pub truncation: f64,
    pub separation: f64,
    /// Mean shift applied to the minority subgroup.
    pub minority_shift: f64,
    pub radius: f64,
}

impl Default for FairnessParams {
    fn default() -> Self {
        Self {
            features: 10,
            data_size: 400,
            group_size: 160,
            minority_size: 40,
            level: FAIRNESS_LEVELS[0],
            truncation: DEFAULT_TRUNCATION,
            separation: 2.0,
            minority_shift: 1.0,
            radius: LEARNING_BOX_RADIUS,
        }
    }
}

impl FairnessParams {
    pub fn scale(&self) -> f64 {
        self.level * self.group_size as f64 / self.minority_size as f64
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.features == 0 || self.minority_size == 0 {
            return Err("features and minority_size must be at least 1".into());
        }
        if !(self.minority_size <= self.group_size && self.group_size <= self.data_size) {
            return Err("sizes must satisfy |S_min| <= |S| <= |D|".into());
        }
        if !(self.level > 0.0) || !self.level.is_finite() {
            return Err("level must be positive".into());
        }
        if !(self.truncation > 0.0) || !self.truncation.is_finite() {
            return Err("truncation must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessData {
    pub params: FairnessParams,
    /// `|D| × d`
    pub features: Vec<f64>,
    /// `±1` per row of `D`.
    pub labels: Vec<f64>,
    /// Row indices of `S` in `D`.
    pub group: Vec<usize>,
    /// Row indices of `S_min` in `D`; a subset of `group`.
    pub minority: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Fairness {
    data: FairnessData,
    domain: BoxDomain,
    scale: f64,
    moduli: WeakConvexity,
    bounds: ProblemBounds,
}

pub fn fairness_generate(seed: u64, params: FairnessParams) -> Result<Fairness> {
    params
        .validate()
        .map_err(|reason| Error::InvalidParameter {
            name: "fairness sizes",
            reason,
        })?;
    let d = params.features;
    let mut rng = stream_rng(seed, Stream::Instance);
    let dir = random_direction(&mut rng, d);
    let shift_dir = random_direction(&mut rng, d);
    let half = 0.5 * params.separation;

    let labels: Vec<f64> = (0..params.data_size)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let group = index::sample(&mut rng, params.data_size, params.group_size).into_vec();
    let minority: Vec<usize> = index::sample(&mut rng, params.group_size, params.minority_size)
        .into_iter()
        .map(|k| group[k])
        .collect();
    let mut is_minority = vec![false; params.data_size];
    for &k in &minority {
        is_minority[k] = true;
    }

    let mut features = Vec::with_capacity(params.data_size * d);
    for (k, &b) in labels.iter().enumerate() {
        let mut mean: Vec<f64> = dir.iter().map(|v| b * half * v).collect();
        if is_minority[k] {
            linalg::axpy(-params.minority_shift, &shift_dir, &mut mean);
        }
        features.extend(gaussian_unit_rows(&mut rng, 1, &mean));
    }

    Fairness::new(FairnessData {
        params,
        features,
        labels,
        group,
        minority,
    })
}

impl Fairness {
    pub fn new(data: FairnessData) -> Result<Self> {
        let p = data.params;
        p.validate()
            .map_err(|e| Error::Instance(format!("fairness: {e}")))?;
        let d = p.features;
        if Some(data.features.len()) != p.data_size.checked_mul(d)
            || data.labels.len() != p.data_size
            || data.group.len() != p.group_size
            || data.minority.len() != p.minority_size
        {
            return Err(Error::Instance(
                "fairness: array sizes disagree with params".into(),
            ));
        }
        if data.group.iter().any(|&k| k >= p.data_size) {
            return Err(Error::Instance("fairness: group index out of range".into()));
        }
        if data.minority.iter().any(|k| !data.group.contains(k)) {
            return Err(Error::Instance(
                "fairness: minority is not a subset of the group".into(),
            ));
        }
        if !linalg::all_finite(&data.features) || !data.labels.iter().all(|b| b.abs() == 1.0) {
            return Err(Error::Instance("fairness: bad feature or label".into()));
        }
        if p.data_size
            .checked_mul(p.group_size)
            .and_then(|v| v.checked_mul(p.minority_size))
            .is_none()
        {
            return Err(Error::Instance("fairness: scenario pool too large".into()));
        }
        let domain =
            BoxDomain::new(p.radius, d).map_err(|e| Error::Instance(format!("fairness: {e}")))?;
        let rmax = data
            .features
            .chunks_exact(d)
            .map(linalg::norm)
            .fold(0.0, f64::max);
        let scale = p.scale();
        Ok(Self {
            domain,
            scale,
            moduli: WeakConvexity {
                objective: rmax * rmax / p.truncation,
                constraints: vec![(scale + 1.0) * SIGMOID_CURVATURE * rmax * rmax],
            },
            bounds: ProblemBounds {
                nu_g: scale.max(1.0),
                kappa_f: rmax,
                kappa_g: 0.25 * (scale + 1.0) * rmax,
            },
            data,
        })
    }

    pub fn data(&self) -> &FairnessData {
        &self.data
    }

    /// `c = τ|S|/|S_min|`
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn row(&self, k: usize) -> &[f64] {
        let d = self.data.params.features;
        &self.data.features[k * d..(k + 1) * d]
    }

    fn split(&self, sample: usize) -> (usize, usize, usize) {
        let p = &self.data.params;
        let m = sample % p.minority_size;
        let rest = sample / p.minority_size;
        (rest / p.group_size, rest % p.group_size, m)
    }

    /// Loss term and its derivative in `u = b aᵀx`.
    fn loss(&self, u: f64) -> (f64, f64) {
        let alpha = self.data.params.truncation;
        let l = logistic_loss(u);
        // ℓ'(u) = -σ(-u), φ_α'(v) = 1/(1 + v/α)
        let dl = -logistic(-u);
        (truncated_loss(l, alpha), dl / (1.0 + l / alpha))
    }

    fn objective_row(&self, k: usize, x: &[f64], grad: Option<&mut [f64]>, weight: f64) -> f64 {
        let a = self.row(k);
        let b = self.data.labels[k];
        let (v, dv) = self.loss(b * linalg::dot(a, x));
        if let Some(g) = grad {
            linalg::axpy(weight * dv * b, a, g);
        }
        v
    }

    fn sigmoid_mean(&self, rows: &[usize], x: &[f64], weight: f64, jac: Option<&mut [f64]>) -> f64 {
        let inv = 1.0 / rows.len() as f64;
        let mut total = 0.0;
        let mut jac = jac;
        for &k in rows {
            let a = self.row(k);
            let s = logistic(linalg::dot(a, x));
            total += s;
            if let Some(j) = jac.as_deref_mut() {
                linalg::axpy(weight * inv * s * (1.0 - s), a, j);
            }
        }
        total * inv
    }
}

impl StochasticProblem for Fairness {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn num_samples(&self) -> usize {
        let p = &self.data.params;
        p.data_size * p.group_size * p.minority_size
    }

    fn objective(&self, x: &[f64], sample: usize, grad: Option<&mut [f64]>) -> f64 {
        let (k, _, _) = self.split(sample);
        match grad {
            Some(g) => {
                g.fill(0.0);
                self.objective_row(k, x, Some(g), 1.0)
            }
            None => self.objective_row(k, x, None, 1.0),
        }
    }

    fn constraints(&self, x: &[f64], sample: usize, values: &mut [f64], jac: Option<&mut [f64]>) {
        let (_, si, mi) = self.split(sample);
        let a_s = self.row(self.data.group[si]);
        let a_m = self.row(self.data.minority[mi]);
        let s1 = logistic(linalg::dot(a_s, x));
        let s2 = logistic(linalg::dot(a_m, x));
        values[0] = self.scale * s1 - s2;
        if let Some(j) = jac {
            for ((ji, u), v) in j.iter_mut().zip(a_s).zip(a_m) {
                *ji = self.scale * s1 * (1.0 - s1) * u - s2 * (1.0 - s2) * v;
            }
        }
    }

    fn full_objective(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let nd = self.data.params.data_size;
        let inv = 1.0 / nd as f64;
        match grad {
            Some(g) => {
                g.fill(0.0);
                (0..nd)
                    .map(|k| self.objective_row(k, x, Some(g), inv))
                    .sum::<f64>()
                    * inv
            }
            None => {
                (0..nd)
                    .map(|k| self.objective_row(k, x, None, inv))
                    .sum::<f64>()
                    * inv
            }
        }
    }

    fn full_constraints(&self, x: &[f64], values: &mut [f64], jac: Option<&mut [f64]>) {
        match jac {
            Some(j) => {
                j.fill(0.0);
                let a = self.sigmoid_mean(&self.data.group, x, self.scale, Some(j));
                let b = self.sigmoid_mean(&self.data.minority, x, -1.0, Some(j));
                values[0] = self.scale * a - b;
            }
            None => {
                let a = self.sigmoid_mean(&self.data.group, x, 1.0, None);
                let b = self.sigmoid_mean(&self.data.minority, x, 1.0, None);
                values[0] = self.scale * a - b;
            }
        }
    }

    fn moduli(&self) -> &WeakConvexity {
        &self.moduli
    }

    fn bounds(&self) -> Option<&ProblemBounds> {
        Some(&self.bounds)
    }

    fn objective_hessian_diag(&self, x: &[f64], sample: usize, out: &mut [f64]) -> Result<()> {
        let (k, _, _) = self.split(sample);
        let a = self.row(k);
        let b = self.data.labels[k];
        let u = b * linalg::dot(a, x);
        let alpha = self.data.params.truncation;
        let l = logistic_loss(u);
        let s = logistic(-u);
        let dl = -s;
        let ddl = s * (1.0 - s);
        let dphi = 1.0 / (1.0 + l / alpha);
        let ddphi = -dphi * dphi / alpha;
        let curv = ddphi * dl * dl + dphi * ddl;
        for (o, ai) in out.iter_mut().zip(a) {
            *o = curv * ai * ai;
        }
        Ok(())
    }
}
