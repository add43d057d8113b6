//! Finite-sum quadratic problems with diagonal-quadratic constraints.
//!
//! Sample `s` has objective `½xᵀPx + qₛᵀx + rₛ` and constraints
//! `Gᵢ(x, s) = bᵢₛ + aᵢₛᵀx + ½ Σⱼ hᵢₛⱼ xⱼ²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{BoxDomain, ProblemBounds, SlaterPoint, StochasticProblem, WeakConvexity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagQuadratic {
    pub offset: f64,
    pub linear: Vec<f64>,
    pub diag: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadData {
    pub radius: f64,
    /// Row-major `n × n`, symmetric.
    pub hessian: Vec<f64>,
    /// Per-sample linear term `qₛ`.
    pub linear: Vec<Vec<f64>>,
    /// Per-sample constant `rₛ`.
    pub offset: Vec<f64>,
    /// `constraints[s][i]`
    pub constraints: Vec<Vec<DiagQuadratic>>,
    /// Objective modulus; defaults to a Gershgorin bound on `P`.
    #[serde(default)]
    pub objective_modulus: Option<f64>,
    #[serde(default)]
    pub slater: Option<SlaterPoint>,
}

#[derive(Debug, Clone)]
pub struct QuadProblem {
    data: QuadData,
    domain: BoxDomain,
    n: usize,
    p: usize,
    moduli: WeakConvexity,
    bounds: ProblemBounds,
}

impl QuadProblem {
    pub fn new(data: QuadData) -> Result<Self> {
        let ns = data.linear.len();
        if ns == 0 {
            return Err(Error::Instance("quad: at least one sample required".into()));
        }
        let n = data.linear[0].len();
        let domain = BoxDomain::new(data.radius, n)?;
        if data.hessian.len() != n * n {
            return Err(Error::Instance(format!(
                "quad: hessian has {} entries, expected {}",
                data.hessian.len(),
                n * n
            )));
        }
        if data.offset.len() != ns || data.constraints.len() != ns {
            return Err(Error::Instance(
                "quad: per-sample arrays disagree in length".into(),
            ));
        }
        let p = data.constraints[0].len();
        for s in 0..ns {
            if data.linear[s].len() != n || data.constraints[s].len() != p {
                return Err(Error::Instance(format!(
                    "quad: sample {s} has inconsistent shapes"
                )));
            }
            for c in &data.constraints[s] {
                if c.linear.len() != n || c.diag.len() != n {
                    return Err(Error::Instance(format!(
                        "quad: constraint in sample {s} has wrong dimension"
                    )));
                }
            }
        }
        let finite = data.hessian.iter().all(|v| v.is_finite())
            && data.linear.iter().flatten().all(|v| v.is_finite())
            && data.offset.iter().all(|v| v.is_finite())
            && data.constraints.iter().flatten().all(|c| {
                c.offset.is_finite() && linalg::all_finite(&c.linear) && linalg::all_finite(&c.diag)
            });
        if !finite {
            return Err(Error::Instance("quad: non-finite coefficient".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (data.hessian[i * n + j] - data.hessian[j * n + i]).abs()
                    > 1e-12 * (1.0 + data.hessian[i * n + j].abs())
                {
                    return Err(Error::Instance("quad: hessian is not symmetric".into()));
                }
            }
        }
        if let Some(s) = &data.slater {
            if s.point.len() != n {
                return Err(Error::Instance(
                    "quad: slater point has wrong dimension".into(),
                ));
            }
        }

        let objective_modulus = data.objective_modulus.unwrap_or_else(|| {
            // Gershgorin lower bound on λ_min(P).
            let lo = (0..n)
                .map(|i| {
                    let row = &data.hessian[i * n..(i + 1) * n];
                    let off: f64 = row
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, v)| v.abs())
                        .sum();
                    row[i] - off
                })
                .fold(f64::INFINITY, f64::min);
            (-lo).max(0.0)
        });
        let constraint_moduli = (0..p)
            .map(|i| {
                data.constraints
                    .iter()
                    .flat_map(|cs| cs[i].diag.iter())
                    .fold(0.0f64, |m, h| m.max(-h))
            })
            .collect();

        let r = data.radius;
        let xmax = r * (n as f64).sqrt();
        let p_frob = linalg::norm(&data.hessian);
        let kappa_f = data
            .linear
            .iter()
            .map(|q| p_frob * xmax + linalg::norm(q))
            .fold(0.0, f64::max);
        let mut nu_sq = 0.0;
        let mut kappa_g: f64 = 0.0;
        for i in 0..p {
            let mut worst: f64 = 0.0;
            for cs in &data.constraints {
                let c = &cs[i];
                let val: f64 = c.offset.abs()
                    + c.linear.iter().map(|a| a.abs() * r).sum::<f64>()
                    + c.diag.iter().map(|h| 0.5 * h.abs() * r * r).sum::<f64>();
                worst = worst.max(val);
                let g: f64 = c
                    .linear
                    .iter()
                    .zip(&c.diag)
                    .map(|(a, h)| (a.abs() + h.abs() * r).powi(2))
                    .sum::<f64>()
                    .sqrt();
                kappa_g = kappa_g.max(g);
            }
            nu_sq += worst * worst;
        }

        Ok(Self {
            domain,
            n,
            p,
            moduli: WeakConvexity {
                objective: objective_modulus,
                constraints: constraint_moduli,
            },
            bounds: ProblemBounds {
                nu_g: nu_sq.sqrt(),
                kappa_f,
                kappa_g,
            },
            data,
        })
    }

    pub fn data(&self) -> &QuadData {
        &self.data
    }
}

impl StochasticProblem for QuadProblem {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn num_constraints(&self) -> usize {
        self.p
    }

    fn num_samples(&self) -> usize {
        self.data.linear.len()
    }

    fn objective(&self, x: &[f64], sample: usize, grad: Option<&mut [f64]>) -> f64 {
        let n = self.n;
        let q = &self.data.linear[sample];
        let mut px = vec![0.0; n];
        for (i, row) in self.data.hessian.chunks_exact(n).enumerate() {
            px[i] = linalg::dot(row, x);
        }
        let value = 0.5 * linalg::dot(&px, x) + linalg::dot(q, x) + self.data.offset[sample];
        if let Some(g) = grad {
            for ((gi, pi), qi) in g.iter_mut().zip(&px).zip(q) {
                *gi = pi + qi;
            }
        }
        value
    }

    fn constraints(&self, x: &[f64], sample: usize, values: &mut [f64], jac: Option<&mut [f64]>) {
        let cs = &self.data.constraints[sample];
        for (v, c) in values.iter_mut().zip(cs) {
            *v = c.offset
                + linalg::dot(&c.linear, x)
                + 0.5 * c.diag.iter().zip(x).map(|(h, xi)| h * xi * xi).sum::<f64>();
        }
        if let Some(j) = jac {
            for (row, c) in j.chunks_exact_mut(self.n).zip(cs) {
                for k in 0..self.n {
                    row[k] = c.linear[k] + c.diag[k] * x[k];
                }
            }
        }
    }

    fn moduli(&self) -> &WeakConvexity {
        &self.moduli
    }

    fn bounds(&self) -> Option<&ProblemBounds> {
        Some(&self.bounds)
    }

    fn slater(&self) -> Option<&SlaterPoint> {
        self.data.slater.as_ref()
    }

    fn objective_hessian_diag(&self, _x: &[f64], _sample: usize, out: &mut [f64]) -> Result<()> {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.data.hessian[i * self.n + i];
        }
        Ok(())
    }
}
