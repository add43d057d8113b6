//! Synthetic quadratically constrained nonconvex problem.
//!
//! ```text
//! f(x)  = (1/N) Σₛ log(1 + ½‖Hₛx - cₛ‖²),                 cₛ = Hₛ𝟙
//! gᵢ(x) = (1/N) Σₛ [aᵢₛᵀ(x - x̄) + ½(x - x̄)ᵀQᵢₛ(x - x̄)]
//! ```
//!
//! Both constraint terms are centered at `x̄`, so `gᵢ(x̄) = 0` exactly.
//!
//! Curvature moduli. With `r = Hx - c` and `ρ = ‖r‖`,
//! `∇²F = HᵀH/(1+ρ²/2) - HᵀrrᵀH/(1+ρ²/2)²`. Along `v` with `Hv ∥ r` the
//! quadratic form is `‖Hv‖²(1 - u)/(1 + u)²` with `u = ρ²/2`, minimized at
//! `u = 3` with value `-‖Hv‖²/8`, so `F(·,s)` is `‖Hₛ‖²/8`-weakly convex. We
//! use the Frobenius norm as the bound on `‖Hₛ‖`. The gradient satisfies
//! `‖∇F‖ ≤ ‖H‖ρ/(1+ρ²/2) ≤ ‖H‖/√2`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{BoxDomain, ProblemBounds, SlaterPoint, StochasticProblem, WeakConvexity};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcnpParams {
    pub n: usize,
    pub p: usize,
    pub samples: usize,
    pub m: usize,
    pub radius: f64,
    pub q_max: f64,
    pub a_range: (f64, f64),
    pub xbar_range: (f64, f64),
}

impl Default for QcnpParams {
    fn default() -> Self {
        Self {
            n: 50,
            p: 50,
            samples: 100,
            m: 5,
            radius: 10.0,
            q_max: 0.05,
            a_range: (0.5, 0.7),
            xbar_range: (-1.5, -0.5),
        }
    }
}

impl QcnpParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.into(),
            })
        };
        if self.n == 0 || self.samples == 0 || self.m == 0 {
            return bad("n/samples/m", "must be at least 1");
        }
        if !(self.radius > 0.0) {
            return bad("radius", "must be positive");
        }
        if !(self.q_max >= 0.0) {
            return bad("q_max", "must be nonnegative");
        }
        if !(self.a_range.0 <= self.a_range.1) || !(self.xbar_range.0 <= self.xbar_range.1) {
            return bad("a_range/xbar_range", "lower end must not exceed upper end");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcnpData {
    pub params: QcnpParams,
    pub xbar: Vec<f64>,
    /// `samples × m × n`
    pub h: Vec<f64>,
    /// `samples × m`
    pub c: Vec<f64>,
    /// `samples × p × n`
    pub a: Vec<f64>,
    /// Diagonals of `Qᵢₛ`, `samples × p × n`.
    pub q: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Qcnp {
    data: QcnpData,
    domain: BoxDomain,
    xfeas: Vec<f64>,
    mean_a: Vec<f64>,
    mean_q: Vec<f64>,
    moduli: WeakConvexity,
    bounds: ProblemBounds,
    slater: SlaterPoint,
}

pub fn qcnp_generate(seed: u64, params: QcnpParams) -> Result<Qcnp> {
    params.validate()?;
    let QcnpParams {
        n, p, samples, m, ..
    } = params;
    let mut rng = stream_rng(seed, Stream::Instance);
    let uniform = |rng: &mut rand_chacha::ChaCha8Rng, (lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    };

    let xbar: Vec<f64> = (0..n)
        .map(|_| uniform(&mut rng, params.xbar_range))
        .collect();
    let normal = Normal::new(0.0, 1.0 / (n as f64).sqrt()).expect("valid std");
    let mut h = Vec::with_capacity(samples * m * n);
    let mut c = Vec::with_capacity(samples * m);
    for _ in 0..samples {
        let hs: Vec<f64> = (0..m * n).map(|_| normal.sample(&mut rng)).collect();
        // cₛ = Hₛ 𝟙
        for row in hs.chunks_exact(n) {
            c.push(row.iter().sum());
        }
        h.extend(hs);
    }
    let mut a = Vec::with_capacity(samples * p * n);
    let mut q = Vec::with_capacity(samples * p * n);
    for _ in 0..samples * p {
        for _ in 0..n {
            a.push(uniform(&mut rng, params.a_range));
        }
        for _ in 0..n {
            q.push(uniform(&mut rng, (-params.q_max, params.q_max)));
        }
    }
    Qcnp::new(QcnpData {
        params,
        xbar,
        h,
        c,
        a,
        q,
    })
}

impl Qcnp {
    pub fn new(data: QcnpData) -> Result<Self> {
        let params = data.params;
        params
            .validate()
            .map_err(|e| Error::Instance(format!("qcnp: {e}")))?;
        let QcnpParams {
            n,
            p,
            samples,
            m,
            radius,
            ..
        } = params;
        let sizes_ok = data.xbar.len() == n
            && Some(data.h.len()) == samples.checked_mul(m).and_then(|v| v.checked_mul(n))
            && Some(data.c.len()) == samples.checked_mul(m)
            && Some(data.a.len()) == samples.checked_mul(p).and_then(|v| v.checked_mul(n))
            && data.q.len() == data.a.len();
        if !sizes_ok {
            return Err(Error::Instance(
                "qcnp: array sizes disagree with params".into(),
            ));
        }
        let finite = [&data.xbar, &data.h, &data.c, &data.a, &data.q]
            .iter()
            .all(|v| linalg::all_finite(v));
        if !finite {
            return Err(Error::Instance("qcnp: non-finite coefficient".into()));
        }
        let domain = BoxDomain::new(radius, n)?;

        let inv = 1.0 / samples as f64;
        let mut mean_a = vec![0.0; p * n];
        let mut mean_q = vec![0.0; p * n];
        for s in 0..samples {
            let block = s * p * n..(s + 1) * p * n;
            linalg::axpy(inv, &data.a[block.clone()], &mut mean_a);
            linalg::axpy(inv, &data.q[block], &mut mean_q);
        }

        let h_frob_sq = data
            .h
            .chunks_exact(m * n)
            .map(linalg::norm_sq)
            .fold(0.0, f64::max);
        let constraint_moduli: Vec<f64> = (0..p)
            .map(|i| {
                (0..samples)
                    .flat_map(|s| data.q[(s * p + i) * n..(s * p + i + 1) * n].iter())
                    .fold(0.0f64, |acc, v| acc.max(-v))
            })
            .collect();

        let dmax: Vec<f64> = data.xbar.iter().map(|xb| radius + xb.abs()).collect();
        let mut nu_sq = 0.0;
        let mut kappa_g: f64 = 0.0;
        for i in 0..p {
            let mut worst: f64 = 0.0;
            for s in 0..samples {
                let off = (s * p + i) * n;
                let (ai, qi) = (&data.a[off..off + n], &data.q[off..off + n]);
                let mut val = 0.0;
                let mut gsq = 0.0;
                for j in 0..n {
                    val += ai[j].abs() * dmax[j] + 0.5 * qi[j].abs() * dmax[j] * dmax[j];
                    let gj = ai[j].abs() + qi[j].abs() * dmax[j];
                    gsq += gj * gj;
                }
                worst = worst.max(val);
                kappa_g = kappa_g.max(gsq.sqrt());
            }
            nu_sq += worst * worst;
        }

        let xfeas: Vec<f64> = data.xbar.iter().map(|v| v - 0.5).collect();
        let mut problem = Self {
            domain,
            xfeas: xfeas.clone(),
            mean_a,
            mean_q,
            moduli: WeakConvexity {
                objective: h_frob_sq / 8.0,
                constraints: constraint_moduli,
            },
            bounds: ProblemBounds {
                nu_g: nu_sq.sqrt(),
                kappa_f: h_frob_sq.sqrt() / std::f64::consts::SQRT_2,
                kappa_g,
            },
            slater: SlaterPoint {
                point: xfeas,
                margin: 0.0,
            },
            data,
        };
        let mut g = vec![0.0; p];
        problem.full_constraints(&problem.xfeas, &mut g, None);
        problem.slater.margin = -g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(problem)
    }

    pub fn data(&self) -> &QcnpData {
        &self.data
    }

    /// Boundary reference point `x̄` with `g(x̄) = 0`.
    pub fn xbar(&self) -> &[f64] {
        &self.data.xbar
    }

    /// `x̄ - 0.5·𝟙`
    pub fn xfeas(&self) -> &[f64] {
        &self.xfeas
    }

    /// Objective center `x^{obj} = 𝟙`.
    pub fn xobj(&self) -> Vec<f64> {
        vec![1.0; self.data.params.n]
    }
}

impl StochasticProblem for Qcnp {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn num_constraints(&self) -> usize {
        self.data.params.p
    }

    fn num_samples(&self) -> usize {
        self.data.params.samples
    }

    fn objective(&self, x: &[f64], sample: usize, grad: Option<&mut [f64]>) -> f64 {
        let QcnpParams { n, m, .. } = self.data.params;
        let hs = &self.data.h[sample * m * n..(sample + 1) * m * n];
        let cs = &self.data.c[sample * m..(sample + 1) * m];
        let mut r = [0.0f64; 16];
        let mut r_heap;
        let r: &mut [f64] = if m <= 16 {
            &mut r[..m]
        } else {
            r_heap = vec![0.0; m];
            &mut r_heap
        };
        for (k, row) in hs.chunks_exact(n).enumerate() {
            r[k] = linalg::dot(row, x) - cs[k];
        }
        let denom = 1.0 + 0.5 * linalg::norm_sq(r);
        if let Some(g) = grad {
            g.fill(0.0);
            for (k, row) in hs.chunks_exact(n).enumerate() {
                linalg::axpy(r[k] / denom, row, g);
            }
        }
        denom.ln()
    }

    fn constraints(&self, x: &[f64], sample: usize, values: &mut [f64], jac: Option<&mut [f64]>) {
        let QcnpParams { n, p, .. } = self.data.params;
        let xbar = &self.data.xbar;
        let block = sample * p * n..(sample + 1) * p * n;
        eval_centered(
            &self.data.a[block.clone()],
            &self.data.q[block],
            x,
            xbar,
            values,
            jac,
        );
    }

    fn full_constraints(&self, x: &[f64], values: &mut [f64], jac: Option<&mut [f64]>) {
        eval_centered(&self.mean_a, &self.mean_q, x, &self.data.xbar, values, jac);
    }

    fn moduli(&self) -> &WeakConvexity {
        &self.moduli
    }

    fn bounds(&self) -> Option<&ProblemBounds> {
        Some(&self.bounds)
    }

    fn slater(&self) -> Option<&SlaterPoint> {
        Some(&self.slater)
    }

    fn objective_hessian_diag(&self, x: &[f64], sample: usize, out: &mut [f64]) -> Result<()> {
        let QcnpParams { n, m, .. } = self.data.params;
        let hs = &self.data.h[sample * m * n..(sample + 1) * m * n];
        let cs = &self.data.c[sample * m..(sample + 1) * m];
        let r: Vec<f64> = hs
            .chunks_exact(n)
            .zip(cs)
            .map(|(row, c)| linalg::dot(row, x) - c)
            .collect();
        let denom = 1.0 + 0.5 * linalg::norm_sq(&r);
        for (j, o) in out.iter_mut().enumerate() {
            let mut col_sq = 0.0;
            let mut col_r = 0.0;
            for (k, row) in hs.chunks_exact(n).enumerate() {
                col_sq += row[j] * row[j];
                col_r += row[j] * r[k];
            }
            *o = col_sq / denom - col_r * col_r / (denom * denom);
        }
        Ok(())
    }
}

/// Values (and Jacobian) of `aᵢᵀd + ½ Σⱼ qᵢⱼ dⱼ²` with `d = x - x̄`.
fn eval_centered(
    a: &[f64],
    q: &[f64],
    x: &[f64],
    xbar: &[f64],
    values: &mut [f64],
    jac: Option<&mut [f64]>,
) {
    let n = x.len();
    let d: Vec<f64> = x.iter().zip(xbar).map(|(xi, bi)| xi - bi).collect();
    for (i, v) in values.iter_mut().enumerate() {
        let ai = &a[i * n..(i + 1) * n];
        let qi = &q[i * n..(i + 1) * n];
        let mut acc = 0.0;
        for j in 0..n {
            acc += d[j] * (ai[j] + 0.5 * qi[j] * d[j]);
        }
        *v = acc;
    }
    if let Some(jac) = jac {
        for (i, row) in jac.chunks_exact_mut(n).enumerate() {
            let ai = &a[i * n..(i + 1) * n];
            let qi = &q[i * n..(i + 1) * n];
            for j in 0..n {
                row[j] = ai[j] + qi[j] * d[j];
            }
        }
    }
}
