//! Multi-seed experiment runner and its on-disk artifacts.
//!
//! An output directory holds `seed_<s>.csv` per seed, `aggregate.csv` with
//! across-seed means per logged `t`, `manifest.json`, and optionally
//! `iterates_seed_<s>.json`. The manifest stores the raw configuration so
//! `run --manifest` reproduces the per-seed CSVs exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use pmqsopt::constants::{compute_constants_with_margin, AlgoConstants};
use pmqsopt::driver::{
    check_horizon, run_pmqsopt, schedule_params, select_output, HorizonWarning, IterateState,
    LogSchedule, ParamSchedule, RunSettings,
};
use pmqsopt::problems::{fairness_generate, np_generate, qcnp_generate, ProblemInstance};
use serde::{Deserialize, Serialize};

use crate::config::{
    BetaRule, Family, Horizons, InstanceConfig, InstanceSource, RawConfig, RunConfig, StartRule,
};
use crate::error::{CliError, CliResult};
use crate::table::{aggregate, row_from_log, Table};

pub const MANIFEST_FORMAT: u32 = 1;

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Qcnp => "qcnp",
        Family::Np => "np",
        Family::Fairness => "fairness",
        Family::Quad => "quad",
    }
}

/// Builds the instance for a run seed. Generated families use
/// `instance_seed` when set, otherwise the run seed itself.
pub fn build_instance(cfg: &InstanceConfig, run_seed: u64) -> CliResult<ProblemInstance> {
    let seed = cfg.instance_seed.unwrap_or(run_seed);
    let inst = match &cfg.source {
        InstanceSource::Qcnp(p) => ProblemInstance::Qcnp(qcnp_generate(seed, *p)?),
        InstanceSource::Np(p) => ProblemInstance::NeymanPearson(np_generate(seed, *p)?),
        InstanceSource::Fairness(p) => ProblemInstance::Fairness(fairness_generate(seed, *p)?),
        InstanceSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let inst = ProblemInstance::from_json(&text)?;
            if inst.family() != family_name(cfg.family) {
                return Err(CliError::Usage(format!(
                    "{} holds a `{}` instance but family is `{}`",
                    path.display(),
                    inst.family(),
                    family_name(cfg.family)
                )));
            }
            inst
        }
    };
    Ok(inst)
}

/// Driver settings for one horizon of a run.
pub fn run_settings(cfg: &RunConfig, inst: &ProblemInstance, horizon: usize) -> RunSettings {
    let problem = inst.as_problem();
    let x_start = match cfg.start {
        StartRule::Slater => None,
        StartRule::Center => Some(problem.domain().center()),
        StartRule::Constant(v) => Some(vec![v; problem.dim()]),
    };
    let log = match cfg.horizons {
        Horizons::Single(_) => cfg.log,
        // Only the final row of each sweep run is reported.
        Horizons::Sweep(_) => LogSchedule::Stride(horizon),
    };
    RunSettings {
        batch_size: cfg.batch_size,
        subsolver: cfg.subsolver,
        model: cfg.model,
        x_start,
        retain_iterates: cfg.retain_iterates,
        log,
        metrics: cfg.metric,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSelection {
    pub r: usize,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    pub horizon: usize,
    pub schedule: ParamSchedule,
    pub warnings: Vec<HorizonWarning>,
    pub grad_evals: u64,
    pub subproblem_failures: usize,
    pub total_inner_iters: u64,
    pub metric_alpha: Option<f64>,
    /// Number of iterates behind the running averages in the final row.
    pub metric_count: usize,
    /// `every_iteration` or `logged_iterations`; absent without metrics.
    pub averages_over: Option<String>,
    pub wall_clock_secs: f64,
    pub output: Option<OutputSelection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub ok: bool,
    pub error: Option<String>,
    pub csv: Option<String>,
    pub iterates: Option<String>,
    pub dim: Option<usize>,
    pub num_constraints: Option<usize>,
    pub constants: Option<AlgoConstants>,
    pub runs: Vec<HorizonReport>,
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub config: BTreeMap<String, String>,
    pub resolved: RunConfig,
    pub seeds: Vec<SeedReport>,
    pub aggregate: Option<String>,
    pub aggregate_seeds: Vec<u64>,
    pub wall_clock_secs: f64,
}

impl Manifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.format != MANIFEST_FORMAT {
            return Err(CliError::Usage(format!(
                "unsupported manifest format {} (expected {MANIFEST_FORMAT})",
                m.format
            )));
        }
        Ok(m)
    }

    pub fn raw_config(&self) -> RawConfig {
        RawConfig {
            entries: self.config.clone(),
        }
    }
}

/// Retained iterates of one run, as written to `iterates_seed_<s>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateFile {
    pub seed: u64,
    pub schedule: ParamSchedule,
    /// `(xᵗ, λᵗ)` for `t = 1..=T+1`.
    pub iterates: Vec<IterateState>,
}

struct SeedOutcome {
    report: SeedReport,
    table: Option<Table>,
    iterates: Option<IterateFile>,
}

fn run_seed(cfg: &RunConfig, seed: u64) -> SeedOutcome {
    let start = Instant::now();
    let mut report = SeedReport {
        seed,
        ok: false,
        error: None,
        csv: None,
        iterates: None,
        dim: None,
        num_constraints: None,
        constants: None,
        runs: Vec::new(),
        wall_clock_secs: 0.0,
    };
    let mut iterates = None;
    let result = (|| -> CliResult<Table> {
        let inst = build_instance(&cfg.instance, seed)?;
        let problem = inst.as_problem();
        report.dim = Some(problem.dim());
        report.num_constraints = Some(problem.num_constraints());
        let constants = compute_constants_with_margin(problem, cfg.model.sigma_margin);
        let beta = match (cfg.beta, &constants) {
            (BetaRule::Fixed(b), _) => b,
            (BetaRule::Auto, Ok(c)) => c.beta,
            (BetaRule::Auto, Err(e)) => {
                return Err(CliError::Usage(format!(
                    "beta = auto needs problem bounds: {e}"
                )))
            }
        };
        let constants = constants.ok();
        report.constants = constants;

        let mut table = Table { rows: Vec::new() };
        for horizon in cfg.horizons.values() {
            let t0 = Instant::now();
            let schedule = schedule_params(horizon, beta, cfg.schedule)?;
            let warnings = constants
                .as_ref()
                .map(|c| check_horizon(horizon, beta, c, problem))
                .unwrap_or_default();
            for w in &warnings {
                log::warn!("seed {seed}: {w}");
            }
            let settings = run_settings(cfg, &inst, horizon);
            let record = run_pmqsopt(problem, &schedule, &settings, seed)?;
            match cfg.horizons {
                Horizons::Single(_) => table.rows.extend(record.rows.iter().map(row_from_log)),
                Horizons::Sweep(_) => {
                    let last = record
                        .rows
                        .last()
                        .expect("the final iteration is always logged");
                    table.rows.push(row_from_log(last));
                }
            }
            let output = if cfg.retain_iterates {
                let (r, x, lambda) = select_output(&record, seed)?;
                Some(OutputSelection { r, x, lambda })
            } else {
                None
            };
            report.runs.push(HorizonReport {
                horizon,
                schedule,
                warnings,
                grad_evals: record.grad_evals,
                subproblem_failures: record.subproblem_failures,
                total_inner_iters: record.total_inner_iters,
                metric_alpha: record.metric_alpha,
                metric_count: record.metric_count,
                averages_over: cfg.metric.map(|m| {
                    if m.every_iteration {
                        "every_iteration"
                    } else {
                        "logged_iterations"
                    }
                    .to_string()
                }),
                wall_clock_secs: t0.elapsed().as_secs_f64(),
                output,
            });
            if let Some(its) = record.iterates {
                iterates = Some(IterateFile {
                    seed,
                    schedule,
                    iterates: its,
                });
            }
        }
        Ok(table)
    })();
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    match result {
        Ok(table) => {
            report.ok = true;
            SeedOutcome {
                report,
                table: Some(table),
                iterates,
            }
        }
        Err(e) => {
            log::error!("seed {seed} failed: {e}");
            report.error = Some(e.to_string());
            SeedOutcome {
                report,
                table: None,
                iterates: None,
            }
        }
    }
}

/// Runs every seed, in parallel up to `threads` workers.
fn run_all(cfg: &RunConfig, threads: usize) -> Vec<SeedOutcome> {
    let threads = threads.clamp(1, cfg.seeds.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SeedOutcome>>> =
        Mutex::new((0..cfg.seeds.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cfg.seeds.len() {
                    break;
                }
                let outcome = run_seed(cfg, cfg.seeds[i]);
                slots
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(outcome);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|o| o.expect("every seed ran"))
        .collect()
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn seed_csv_name(seed: u64) -> String {
    format!("seed_{seed}.csv")
}

pub fn iterates_name(seed: u64) -> String {
    format!("iterates_seed_{seed}.json")
}

pub const AGGREGATE_NAME: &str = "aggregate.csv";
pub const MANIFEST_NAME: &str = "manifest.json";

/// Runs the experiment and writes all artifacts into `out`.
///
/// Files are written even when some seeds fail; the manifest records the
/// failures and the call returns [`CliError::SeedsFailed`].
pub fn run_experiment(
    raw: &RawConfig,
    cfg: &RunConfig,
    out: &Path,
    threads: usize,
) -> CliResult<Manifest> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let start = Instant::now();
    let outcomes = run_all(cfg, threads);

    let mut reports = Vec::with_capacity(outcomes.len());
    let mut tables = Vec::new();
    let mut agg_seeds = Vec::new();
    for outcome in outcomes {
        let mut report = outcome.report;
        if let Some(table) = outcome.table {
            let name = seed_csv_name(report.seed);
            write_file(&out.join(&name), table.to_csv_string().as_bytes())?;
            report.csv = Some(name);
            agg_seeds.push(report.seed);
            tables.push(table);
        }
        if let Some(its) = outcome.iterates {
            let name = iterates_name(report.seed);
            write_file(&out.join(&name), serde_json::to_string(&its)?.as_bytes())?;
            report.iterates = Some(name);
        }
        reports.push(report);
    }

    let aggregate_name = if tables.is_empty() {
        None
    } else {
        let refs: Vec<&Table> = tables.iter().collect();
        let agg = aggregate(&refs).ok_or_else(|| {
            CliError::Usage("per-seed tables do not share logged iterations".into())
        })?;
        write_file(&out.join(AGGREGATE_NAME), agg.to_csv_string().as_bytes())?;
        Some(AGGREGATE_NAME.to_string())
    };

    let failed = reports.iter().filter(|r| !r.ok).count();
    let manifest = Manifest {
        format: MANIFEST_FORMAT,
        config: raw.entries.clone(),
        resolved: cfg.clone(),
        seeds: reports,
        aggregate: aggregate_name,
        aggregate_seeds: agg_seeds,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    write_file(
        &out.join(MANIFEST_NAME),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    if failed > 0 {
        return Err(CliError::SeedsFailed {
            failed,
            total: manifest.seeds.len(),
        });
    }
    Ok(manifest)
}

/// Output directory: explicit flag first, then the config's `out`.
pub fn resolve_out(flag: Option<&Path>, cfg: &RunConfig) -> CliResult<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::Usage("no output directory; pass --out or set `out`".into()))
}
