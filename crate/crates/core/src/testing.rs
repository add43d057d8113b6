//! Test doubles shared by unit tests.

use crate::problem::{BoxDomain, ProblemBounds, SlaterPoint, StochasticProblem, WeakConvexity};

/// A problem with zero oracles and caller-chosen geometry, moduli and bounds.
pub(crate) struct Fixed {
    pub domain: BoxDomain,
    pub moduli: WeakConvexity,
    pub bounds: Option<ProblemBounds>,
    pub slater: Option<SlaterPoint>,
}

impl Fixed {
    pub fn new(
        radius: f64,
        dim: usize,
        l0: f64,
        li: Vec<f64>,
        bounds: Option<ProblemBounds>,
    ) -> Self {
        Self {
            domain: BoxDomain::new(radius, dim).unwrap(),
            moduli: WeakConvexity {
                objective: l0,
                constraints: li,
            },
            bounds,
            slater: None,
        }
    }
}

pub(crate) fn bounds(nu_g: f64, kappa_g: f64) -> Option<ProblemBounds> {
    Some(ProblemBounds {
        nu_g,
        kappa_f: 1.0,
        kappa_g,
    })
}

impl StochasticProblem for Fixed {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn num_constraints(&self) -> usize {
        self.moduli.constraints.len()
    }
    fn num_samples(&self) -> usize {
        1
    }
    fn objective(&self, _x: &[f64], _s: usize, _g: Option<&mut [f64]>) -> f64 {
        0.0
    }
    fn constraints(&self, _x: &[f64], _s: usize, v: &mut [f64], _j: Option<&mut [f64]>) {
        v.fill(0.0);
    }
    fn moduli(&self) -> &WeakConvexity {
        &self.moduli
    }
    fn bounds(&self) -> Option<&ProblemBounds> {
        self.bounds.as_ref()
    }
    fn slater(&self) -> Option<&SlaterPoint> {
        self.slater.as_ref()
    }
}
