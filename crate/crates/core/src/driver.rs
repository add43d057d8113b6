//! The outer loop: parameter schedule, model build, subproblem solve, dual
//! update and iterate recording.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::AlgoConstants;
use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics::{self, Accumulator, MetricMode, ResidualSample, RunningAverage};
use crate::problem::StochasticProblem;
use crate::qmodel::{build_model, eval_model, ModelOptions, ModelParams};
use crate::rng::{stream_rng, Stream};
use crate::subsolver::{apg_minimize, default_tolerance, ApgSettings, SubproblemSpec};

/// Subproblems whose final residual exceeds this are counted as failures.
pub const SUBPROBLEM_FAILURE_RESIDUAL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleMode {
    /// `σ = T^{-3/4}`, `α = βT^{1/4}`, `τ = T^{1/2}`.
    Theorem,
    /// `α = a√T`, `σ = s/√T`, `τ = c√T`.
    Practical {
        alpha_scale: f64,
        sigma_scale: f64,
        tau_scale: f64,
    },
    Custom {
        sigma: f64,
        alpha: f64,
        tau: f64,
    },
}

impl ScheduleMode {
    pub fn practical() -> Self {
        ScheduleMode::Practical {
            alpha_scale: 1.0,
            sigma_scale: 1.0,
            tau_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub horizon: usize,
    pub beta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub tau: f64,
    pub mode: ScheduleMode,
}

pub fn schedule_params(horizon: usize, beta: f64, mode: ScheduleMode) -> Result<ParamSchedule> {
    if horizon == 0 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: "must be at least 1".into(),
        });
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("must be positive and finite, got {beta}"),
        });
    }
    let t = horizon as f64;
    let sqrt_t = t.sqrt();
    let (sigma, alpha, tau) = match mode {
        ScheduleMode::Theorem => {
            let quarter = sqrt_t.sqrt();
            (1.0 / (quarter * quarter * quarter), beta * quarter, sqrt_t)
        }
        ScheduleMode::Practical {
            alpha_scale,
            sigma_scale,
            tau_scale,
        } => (
            sigma_scale / sqrt_t,
            alpha_scale * sqrt_t,
            tau_scale * sqrt_t,
        ),
        ScheduleMode::Custom { sigma, alpha, tau } => (sigma, alpha, tau),
    };
    for (name, v) in [("sigma", sigma), ("alpha", alpha), ("tau", tau)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be positive and finite, got {v}"),
            });
        }
    }
    Ok(ParamSchedule {
        horizon,
        beta,
        sigma,
        alpha,
        tau,
        mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HorizonWarning {
    BelowBetaSquared { horizon: usize, threshold: f64 },
    BelowGradientSpread { horizon: usize, threshold: f64 },
    BelowCurvatureProduct { horizon: usize, threshold: f64 },
    SlaterMarginTooSmall { required: f64, margin: f64 },
}

impl fmt::Display for HorizonWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HorizonWarning::BelowBetaSquared { horizon, threshold } => {
                write!(f, "T = {horizon} does not exceed beta^2 = {threshold:.6e}")
            }
            HorizonWarning::BelowGradientSpread { horizon, threshold } => write!(
                f,
                "T = {horizon} does not exceed p(kappa_g + kappa_Sigma D0/2)^2 / beta = {threshold:.6e}"
            ),
            HorizonWarning::BelowCurvatureProduct { horizon, threshold } => write!(
                f,
                "T = {horizon} does not exceed (kappa_Sigma gamma_2)^4 = {threshold:.6e}"
            ),
            HorizonWarning::SlaterMarginTooSmall { required, margin } => write!(
                f,
                "sqrt(p) kappa_Sigma = {required:.6e} exceeds the Slater margin {margin:.6e}"
            ),
        }
    }
}

/// Diagnostics for the horizon and Slater-margin conditions; never fatal.
pub fn check_horizon<P: StochasticProblem + ?Sized>(
    horizon: usize,
    beta: f64,
    constants: &AlgoConstants,
    problem: &P,
) -> Vec<HorizonWarning> {
    let mut out = Vec::new();
    let t = horizon as f64;
    let p = problem.num_constraints() as f64;
    let kappa_g = problem.bounds().map_or(0.0, |b| b.kappa_g);

    let beta_sq = beta * beta;
    if !(t > beta_sq) {
        out.push(HorizonWarning::BelowBetaSquared {
            horizon,
            threshold: beta_sq,
        });
    }
    let spread = kappa_g + 0.5 * constants.kappa_sigma * constants.diameter;
    let spread_threshold = p * spread * spread / beta;
    if !(t > spread_threshold) {
        out.push(HorizonWarning::BelowGradientSpread {
            horizon,
            threshold: spread_threshold,
        });
    }
    let curvature_threshold = (constants.kappa_sigma * constants.gamma2).powi(4);
    if !(t > curvature_threshold) {
        out.push(HorizonWarning::BelowCurvatureProduct {
            horizon,
            threshold: curvature_threshold,
        });
    }
    if let Some(slater) = problem.slater() {
        let required = p.sqrt() * constants.kappa_sigma;
        if required > slater.margin {
            out.push(HorizonWarning::SlaterMarginTooSmall {
                required,
                margin: slater.margin,
            });
        }
    }
    out
}

/// `λᵢ ← [λᵢ + σ qᵢ]₊`
pub fn dual_update(lambda: &[f64], sigma: f64, q_vals: &[f64]) -> Vec<f64> {
    lambda
        .iter()
        .zip(q_vals)
        .map(|(l, q)| (l + sigma * q).max(0.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ToleranceRule {
    /// `max(1e-8, 1e-3·σ·min(1, ‖c₀‖))`
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsolverConfig {
    pub eta: f64,
    pub max_iter: usize,
    pub tolerance: ToleranceRule,
    /// Start each subproblem from the previous final curvature estimate
    /// instead of `L₋₁ = 1`.
    pub carry_lipschitz: bool,
}

impl Default for SubsolverConfig {
    fn default() -> Self {
        Self {
            eta: 2.0,
            max_iter: 2000,
            tolerance: ToleranceRule::Auto,
            carry_lipschitz: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LogSchedule {
    /// Every `k`-th iteration plus the last.
    Stride(usize),
    /// About `count` geometrically spaced iterations, always including the
    /// first and the last.
    Geometric(usize),
}

impl LogSchedule {
    /// Sorted, deduplicated iteration indices in `1..=horizon`.
    pub fn points(&self, horizon: usize) -> Vec<usize> {
        let mut pts = match *self {
            LogSchedule::Stride(k) => {
                let k = k.max(1);
                let mut v: Vec<usize> = (k..=horizon).step_by(k).collect();
                v.push(horizon);
                v
            }
            LogSchedule::Geometric(count) => {
                let count = count.max(2);
                let top = (horizon as f64).ln();
                (0..count)
                    .map(|k| {
                        let e = top * k as f64 / (count - 1) as f64;
                        (e.exp().round() as usize).clamp(1, horizon)
                    })
                    .collect()
            }
        };
        pts.push(1);
        pts.sort_unstable();
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub mode: MetricMode,
    /// Metric parameter; `None` uses the schedule's `α`.
    pub alpha: Option<f64>,
    /// Evaluate at every iteration (exact running averages) rather than only
    /// at logged iterations.
    pub every_iteration: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub batch_size: usize,
    pub subsolver: SubsolverConfig,
    pub model: ModelOptions,
    /// Defaults to the Slater point when known, else the box center.
    pub x_start: Option<Vec<f64>>,
    pub retain_iterates: bool,
    pub log: LogSchedule,
    pub metrics: Option<MetricConfig>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            batch_size: 1,
            subsolver: SubsolverConfig::default(),
            model: ModelOptions::default(),
            x_start: None,
            retain_iterates: false,
            log: LogSchedule::Geometric(100),
            metrics: None,
        }
    }
}

/// State after `t` outer iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t: usize,
    pub grad_evals: u64,
    pub objective: f64,
    pub feasibility: f64,
    pub lambda_norm: f64,
    pub inner_iters: usize,
    pub subproblem_residual: f64,
    /// Instantaneous residuals at this iterate, when evaluated.
    pub residual: Option<ResidualSample>,
    /// Running averages over all evaluated iterates up to `t`.
    pub averages: Option<RunningAverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schedule: ParamSchedule,
    pub settings: RunSettings,
    pub seed: u64,
    pub rows: Vec<LogRow>,
    pub grad_evals: u64,
    pub subproblem_failures: usize,
    pub total_inner_iters: u64,
    /// `(x^{T+1}, λ^{T+1})`
    pub last: IterateState,
    /// `(xᵗ, λᵗ)` for `t = 1..=T+1` when retained.
    pub iterates: Option<Vec<IterateState>>,
    /// Metric parameter actually used, when metrics were evaluated.
    pub metric_alpha: Option<f64>,
    /// Number of iterates the running averages are taken over.
    pub metric_count: usize,
}

/// Gradient evaluations per outer iteration: `b(1 + p)`.
pub fn grad_evals_per_iteration(batch: usize, num_constraints: usize) -> u64 {
    (batch * (1 + num_constraints)) as u64
}

pub fn run_pmqsopt<P: StochasticProblem + ?Sized>(
    problem: &P,
    schedule: &ParamSchedule,
    settings: &RunSettings,
    seed: u64,
) -> Result<RunRecord> {
    let n = problem.dim();
    let p = problem.num_constraints();
    let domain = *problem.domain();
    if settings.batch_size == 0 {
        return Err(Error::InvalidParameter {
            name: "batch_size",
            reason: "must be at least 1".into(),
        });
    }
    if problem.num_samples() == 0 {
        return Err(Error::InvalidParameter {
            name: "num_samples",
            reason: "problem has an empty sample pool".into(),
        });
    }

    let mut x = match &settings.x_start {
        Some(x) => {
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: x.len(),
                });
            }
            x.clone()
        }
        None => problem
            .slater()
            .map(|s| s.point.clone())
            .unwrap_or_else(|| domain.center()),
    };
    domain.project_in_place(&mut x);
    let mut lambda = vec![0.0; p];

    let mut sample_rng = stream_rng(seed, Stream::Samples);
    let params = ModelParams {
        tau: schedule.tau,
        sigma: schedule.sigma,
        alpha: schedule.alpha,
    };
    let metric_alpha = settings.metrics.map(|m| m.alpha.unwrap_or(schedule.alpha));
    let log_points = settings.log.points(schedule.horizon);
    let mut next_log = 0usize;
    let per_iter = grad_evals_per_iteration(settings.batch_size, p);

    let mut iterates = settings.retain_iterates.then(|| {
        let mut v = Vec::with_capacity(schedule.horizon + 1);
        v.push(IterateState {
            x: x.clone(),
            lambda: lambda.clone(),
            t: 1,
        });
        v
    });
    let mut rows = Vec::with_capacity(log_points.len());
    let mut acc = Accumulator::default();
    let mut batch = vec![0usize; settings.batch_size];
    let mut lipschitz = 1.0;
    let mut failures = 0usize;
    let mut total_inner = 0u64;
    let mut grad_evals = 0u64;

    for t in 1..=schedule.horizon {
        for b in batch.iter_mut() {
            *b = sample_rng.random_range(0..problem.num_samples());
        }
        let model = build_model(problem, &x, &lambda, &batch, params, &settings.model)?;
        let spec = SubproblemSpec::new(&model, domain)?;
        let apg = ApgSettings {
            eta: settings.subsolver.eta,
            initial_lipschitz: if settings.subsolver.carry_lipschitz {
                lipschitz
            } else {
                1.0
            },
            tol: match settings.subsolver.tolerance {
                ToleranceRule::Auto => default_tolerance(&model),
                ToleranceRule::Fixed(v) => v,
            },
            max_iter: settings.subsolver.max_iter,
        };
        let out = apg_minimize(&spec, &domain, &apg, &x, None)?;
        lipschitz = out.final_lipschitz;
        total_inner += out.iterations as u64;
        if out.residual > SUBPROBLEM_FAILURE_RESIDUAL {
            failures += 1;
            log::warn!(
                "iteration {t}: subproblem residual {:.3e} after {} inner iterations",
                out.residual,
                out.iterations
            );
        }
        let (_, q_vals) = eval_model(&model, &out.x)?;
        lambda = dual_update(&lambda, schedule.sigma, &q_vals);
        x = out.x;
        grad_evals += per_iter;

        if let Some(v) = iterates.as_mut() {
            v.push(IterateState {
                x: x.clone(),
                lambda: lambda.clone(),
                t: t + 1,
            });
        }

        let is_log = next_log < log_points.len() && log_points[next_log] == t;
        let mut residual = None;
        let mut averages = None;
        if let (Some(cfg), Some(a)) = (settings.metrics, metric_alpha) {
            if cfg.every_iteration || is_log {
                let r = metrics::residual_row(problem, t, &x, &lambda, a, cfg.mode)?;
                averages = Some(acc.push(&r));
                residual = Some(r);
            }
        }
        if is_log {
            next_log += 1;
            let objective = problem.full_objective(&x, None);
            let feasibility = match residual {
                Some(r) => r.cons,
                None => {
                    let mut g = vec![0.0; p];
                    problem.full_constraints(&x, &mut g, None);
                    g.iter().map(|v| v.max(0.0)).sum()
                }
            };
            rows.push(LogRow {
                t,
                grad_evals,
                objective,
                feasibility,
                lambda_norm: linalg::norm(&lambda),
                inner_iters: out.iterations,
                subproblem_residual: out.residual,
                residual,
                averages,
            });
        }
    }

    if failures > 0 {
        log::warn!("{failures} subproblems ended above residual {SUBPROBLEM_FAILURE_RESIDUAL:e}");
    }

    Ok(RunRecord {
        schedule: *schedule,
        settings: settings.clone(),
        seed,
        rows,
        grad_evals,
        subproblem_failures: failures,
        total_inner_iters: total_inner,
        last: IterateState {
            x,
            lambda,
            t: schedule.horizon + 1,
        },
        iterates,
        metric_alpha,
        metric_count: acc.count(),
    })
}

/// Draws `R` uniformly from `{1, …, T}` and returns `(x^R, λ^R)`.
pub fn select_output(record: &RunRecord, seed: u64) -> Result<(usize, Vec<f64>, Vec<f64>)> {
    let iterates = record.iterates.as_ref().ok_or(Error::IteratesNotRetained)?;
    let mut rng = stream_rng(seed, Stream::Output);
    let r = draw_output_index(record.schedule.horizon, &mut rng);
    let state = &iterates[r - 1];
    Ok((r, state.x.clone(), state.lambda.clone()))
}

pub fn draw_output_index<R: Rng + ?Sized>(horizon: usize, rng: &mut R) -> usize {
    rng.random_range(1..=horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::compute_constants;
    use crate::problems::{qcnp_generate, DiagQuadratic, Qcnp, QcnpParams, QuadData, QuadProblem};
    use crate::subsolver::eval_phi;
    use crate::testing::{bounds, Fixed};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_qcnp(seed: u64) -> Qcnp {
        qcnp_generate(
            seed,
            QcnpParams {
                n: 8,
                p: 4,
                samples: 10,
                m: 3,
                ..QcnpParams::default()
            },
        )
        .unwrap()
    }

    fn convex_box_qp() -> QuadProblem {
        QuadProblem::new(QuadData {
            radius: 1.0,
            hessian: vec![3.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.5],
            linear: vec![vec![-4.0, 1.0, 2.5]],
            offset: vec![0.0],
            constraints: vec![vec![]],
            objective_modulus: None,
            slater: None,
        })
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn theorem_schedule_examples() {
        let s = schedule_params(16, 1.0, ScheduleMode::Theorem).unwrap();
        assert_eq!((s.sigma, s.alpha, s.tau), (0.125, 2.0, 4.0));
        let s = schedule_params(1, 3.0, ScheduleMode::Theorem).unwrap();
        assert_eq!((s.sigma, s.alpha, s.tau), (1.0, 3.0, 1.0));
        let s = schedule_params(10_000, 2.0, ScheduleMode::Theorem).unwrap();
        assert!(close(s.sigma, 1e-3) && close(s.alpha, 20.0) && close(s.tau, 100.0));
    }

    #[test]
    fn theorem_schedule_relations() {
        for t in [1usize, 2, 7, 100, 999, 123_456] {
            let s = schedule_params(t, 1.7, ScheduleMode::Theorem).unwrap();
            let tf = t as f64;
            assert!(close(s.sigma * tf.powf(0.75), 1.0));
            assert!(close(s.alpha, 1.7 * tf.powf(0.25)));
            assert_eq!(s.tau, tf.sqrt());
        }
    }

    #[test]
    fn practical_and_custom_schedules() {
        let mode = ScheduleMode::Practical {
            alpha_scale: 2.0,
            sigma_scale: 0.5,
            tau_scale: 3.0,
        };
        let s = schedule_params(400, 1.0, mode).unwrap();
        assert_eq!((s.sigma, s.alpha, s.tau), (0.025, 40.0, 60.0));
        let s = schedule_params(
            5,
            1.0,
            ScheduleMode::Custom {
                sigma: 0.1,
                alpha: 2.0,
                tau: 3.0,
            },
        )
        .unwrap();
        assert_eq!((s.sigma, s.alpha, s.tau), (0.1, 2.0, 3.0));
        assert!(schedule_params(
            5,
            1.0,
            ScheduleMode::Custom {
                sigma: 0.0,
                alpha: 2.0,
                tau: 3.0
            }
        )
        .is_err());
        assert!(schedule_params(0, 1.0, ScheduleMode::Theorem).is_err());
        assert!(schedule_params(5, 0.0, ScheduleMode::Theorem).is_err());
    }

    #[test]
    fn horizon_warning_examples() {
        let flat = Fixed::new(0.5, 1, 0.0, vec![0.0; 50], bounds(0.0, 1.0));
        let c = compute_constants(&flat).unwrap();
        assert_eq!(c.kappa_sigma, 0.0);
        let w = check_horizon(2, 1.0, &c, &flat);
        assert!(!w
            .iter()
            .any(|w| matches!(w, HorizonWarning::BelowBetaSquared { .. })));
        assert!(!w
            .iter()
            .any(|w| matches!(w, HorizonWarning::BelowCurvatureProduct { .. })));
        let w = check_horizon(10, 1.0, &c, &flat);
        assert!(w.iter().any(|w| matches!(
            w,
            HorizonWarning::BelowGradientSpread { threshold, .. } if *threshold == 50.0
        )));
        assert!(check_horizon(51, 1.0, &c, &flat).is_empty());
        let w = check_horizon(3, 2.0, &c, &flat);
        assert!(w
            .iter()
            .any(|w| matches!(w, HorizonWarning::BelowBetaSquared { .. })));
    }

    #[test]
    fn slater_margin_warning() {
        let mut prob = Fixed::new(1.0, 2, 0.0, vec![0.5; 4], bounds(0.0, 0.0));
        prob.slater = Some(crate::problem::SlaterPoint {
            point: vec![0.0; 2],
            margin: 0.9,
        });
        let c = compute_constants(&prob).unwrap();
        let w = check_horizon(1_000_000_000, 1.0, &c, &prob);
        assert_eq!(
            w,
            vec![HorizonWarning::SlaterMarginTooSmall {
                required: 1.0,
                margin: 0.9
            }]
        );
        prob.slater.as_mut().unwrap().margin = 1.0;
        assert!(check_horizon(1_000_000_000, 1.0, &c, &prob).is_empty());
        assert!(!w[0].to_string().is_empty());
    }

    #[test]
    fn dual_update_examples() {
        assert_eq!(dual_update(&[0.0], 1.0, &[-1.0]), vec![0.0]);
        assert_eq!(dual_update(&[1.0], 0.5, &[1.0]), vec![1.5]);
        assert_eq!(dual_update(&[1.0], 1.0, &[-2.0]), vec![0.0]);
    }

    #[test]
    fn log_points_include_endpoints() {
        assert_eq!(LogSchedule::Stride(3).points(10), vec![1, 3, 6, 9, 10]);
        assert_eq!(LogSchedule::Stride(1).points(3), vec![1, 2, 3]);
        let g = LogSchedule::Geometric(20).points(1000);
        assert_eq!((g[0], *g.last().unwrap()), (1, 1000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(LogSchedule::Geometric(5).points(1), vec![1]);
    }

    #[test]
    fn single_step_equals_one_subproblem() {
        let prob = small_qcnp(1);
        let sched = schedule_params(1, 1.0, ScheduleMode::Theorem).unwrap();
        let settings = RunSettings {
            retain_iterates: true,
            ..RunSettings::default()
        };
        let rec = run_pmqsopt(&prob, &sched, &settings, 5).unwrap();
        let mut rng = stream_rng(5, Stream::Samples);
        let s = rng.random_range(0..prob.num_samples());
        let params = ModelParams {
            tau: 1.0,
            sigma: 1.0,
            alpha: 1.0,
        };
        let x1 = prob.xfeas().to_vec();
        let model = build_model(
            &prob,
            &x1,
            &[0.0; 4],
            &[s],
            params,
            &ModelOptions::default(),
        )
        .unwrap();
        let spec = SubproblemSpec::new(&model, *prob.domain()).unwrap();
        let apg = ApgSettings {
            tol: default_tolerance(&model),
            ..ApgSettings::default()
        };
        let out = apg_minimize(&spec, prob.domain(), &apg, &x1, None).unwrap();
        assert_eq!(rec.last.x, out.x);
        assert_eq!(rec.iterates.as_ref().unwrap()[0].lambda, vec![0.0; 4]);
        assert_eq!(rec.rows.len(), 1);
        assert_eq!(rec.grad_evals, 5);
        let (r, x, _) = select_output(&rec, 99).unwrap();
        assert_eq!((r, x), (1, x1));
    }

    #[test]
    fn convex_quadratic_reaches_stationarity() {
        let prob = convex_box_qp();
        let sched = schedule_params(200, 1.0, ScheduleMode::Theorem).unwrap();
        let rec = run_pmqsopt(&prob, &sched, &RunSettings::default(), 1).unwrap();
        let r = metrics::kkt_map(&prob, &rec.last.x, &[], sched.alpha);
        assert!(linalg::norm(&r) <= 1e-4, "{}", linalg::norm(&r));
    }

    #[test]
    fn identical_seeds_give_identical_records() {
        let prob = small_qcnp(2);
        let sched = schedule_params(50, 1.0, ScheduleMode::Theorem).unwrap();
        let settings = RunSettings {
            log: LogSchedule::Stride(5),
            metrics: Some(MetricConfig {
                mode: MetricMode::Map,
                alpha: None,
                every_iteration: true,
            }),
            ..RunSettings::default()
        };
        let a = run_pmqsopt(&prob, &sched, &settings, 3).unwrap();
        let b = run_pmqsopt(&prob, &sched, &settings, 3).unwrap();
        assert_eq!(a, b);
        let c = run_pmqsopt(&prob, &sched, &settings, 4).unwrap();
        assert_ne!(a.last, c.last);
    }

    #[test]
    fn rows_and_counts_are_consistent() {
        let prob = small_qcnp(3);
        let sched = schedule_params(40, 1.0, ScheduleMode::Theorem).unwrap();
        let settings = RunSettings {
            batch_size: 3,
            log: LogSchedule::Stride(7),
            ..RunSettings::default()
        };
        let rec = run_pmqsopt(&prob, &sched, &settings, 1).unwrap();
        let ts: Vec<usize> = rec.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![1, 7, 14, 21, 28, 35, 40]);
        for row in &rec.rows {
            assert_eq!(row.grad_evals, row.t as u64 * 3 * 5);
        }
        assert_eq!(rec.grad_evals, 40 * 15);
    }

    #[test]
    fn output_selection_is_deterministic_and_requires_iterates() {
        let prob = small_qcnp(4);
        let sched = schedule_params(30, 1.0, ScheduleMode::Theorem).unwrap();
        let rec = run_pmqsopt(&prob, &sched, &RunSettings::default(), 2).unwrap();
        assert!(matches!(
            select_output(&rec, 1),
            Err(Error::IteratesNotRetained)
        ));
        let settings = RunSettings {
            retain_iterates: true,
            ..RunSettings::default()
        };
        let rec = run_pmqsopt(&prob, &sched, &settings, 2).unwrap();
        assert_eq!(rec.iterates.as_ref().unwrap().len(), 31);
        let a = select_output(&rec, 11).unwrap();
        let b = select_output(&rec, 11).unwrap();
        assert_eq!(a, b);
        assert!((1..=30).contains(&a.0));
        assert_eq!(rec.iterates.as_ref().unwrap()[a.0 - 1].t, a.0);
    }

    #[test]
    fn output_index_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let bins = 10;
        let draws = 10_000;
        let mut counts = vec![0usize; bins];
        for _ in 0..draws {
            counts[draw_output_index(bins, &mut rng) - 1] += 1;
        }
        let expected = draws as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 99th percentile of χ² with 9 degrees of freedom.
        assert!(chi2 < 21.666, "chi2 = {chi2}");
    }

    #[test]
    fn multiplier_increments_are_bounded() {
        for seed in 1..=3 {
            let prob = small_qcnp(seed);
            let c = compute_constants(&prob).unwrap();
            let sched = schedule_params(300, 1.0, ScheduleMode::Theorem).unwrap();
            let settings = RunSettings {
                retain_iterates: true,
                x_start: Some(vec![0.0; 8]),
                ..RunSettings::default()
            };
            let rec = run_pmqsopt(&prob, &sched, &settings, seed).unwrap();
            let its = rec.iterates.unwrap();
            assert!(its[0].lambda.iter().all(|l| *l == 0.0));
            for w in its.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                assert!(b.lambda.iter().all(|l| *l >= 0.0));
                assert!(prob.domain().contains(&b.x));
                for (la, lb) in a.lambda.iter().zip(&b.lambda) {
                    assert!((lb - la).abs() <= c.gamma2 * sched.sigma * (1.0 + 1e-12));
                }
                assert!(
                    linalg::norm(&b.lambda)
                        <= linalg::norm(&a.lambda) + c.gamma1 * sched.sigma * (1.0 + 1e-12)
                );
            }
        }
    }

    #[test]
    fn each_step_decreases_the_subproblem() {
        let prob = small_qcnp(5);
        let sched = schedule_params(60, 1.0, ScheduleMode::Theorem).unwrap();
        let settings = RunSettings {
            retain_iterates: true,
            x_start: Some(vec![0.0; 8]),
            ..RunSettings::default()
        };
        let rec = run_pmqsopt(&prob, &sched, &settings, 8).unwrap();
        let its = rec.iterates.unwrap();
        let mut rng = stream_rng(8, Stream::Samples);
        let params = ModelParams {
            tau: sched.tau,
            sigma: sched.sigma,
            alpha: sched.alpha,
        };
        for w in its.windows(2) {
            let s = rng.random_range(0..prob.num_samples());
            let model = build_model(
                &prob,
                &w[0].x,
                &w[0].lambda,
                &[s],
                params,
                &ModelOptions::default(),
            )
            .unwrap();
            let spec = SubproblemSpec::new(&model, *prob.domain()).unwrap();
            let before = eval_phi(&spec, &w[0].x);
            let after = eval_phi(&spec, &w[1].x);
            assert!(after <= before + 1e-12 * before.abs().max(1.0));
            let (_, q) = eval_model(&model, &w[1].x).unwrap();
            assert_eq!(dual_update(&w[0].lambda, sched.sigma, &q), w[1].lambda);
        }
    }

    #[test]
    fn rejects_bad_settings() {
        let prob = small_qcnp(6);
        let sched = schedule_params(5, 1.0, ScheduleMode::Theorem).unwrap();
        let bad_batch = RunSettings {
            batch_size: 0,
            ..RunSettings::default()
        };
        assert!(run_pmqsopt(&prob, &sched, &bad_batch, 1).is_err());
        let bad_start = RunSettings {
            x_start: Some(vec![0.0; 3]),
            ..RunSettings::default()
        };
        assert!(matches!(
            run_pmqsopt(&prob, &sched, &bad_start, 1),
            Err(Error::DimensionMismatch {
                expected: 8,
                got: 3
            })
        ));
    }

    #[test]
    fn default_start_is_box_center_without_slater_data() {
        let prob = QuadProblem::new(QuadData {
            radius: 2.0,
            hessian: vec![1.0, 0.0, 0.0, 1.0],
            linear: vec![vec![0.0, 0.0]],
            offset: vec![0.0],
            constraints: vec![vec![DiagQuadratic {
                offset: -1.0,
                linear: vec![1.0, 0.0],
                diag: vec![0.0, 0.0],
            }]],
            objective_modulus: None,
            slater: None,
        })
        .unwrap();
        let sched = schedule_params(3, 1.0, ScheduleMode::Theorem).unwrap();
        let settings = RunSettings {
            retain_iterates: true,
            ..RunSettings::default()
        };
        let rec = run_pmqsopt(&prob, &sched, &settings, 1).unwrap();
        assert_eq!(rec.iterates.unwrap()[0].x, vec![0.0, 0.0]);
    }
}
