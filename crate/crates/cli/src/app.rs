//! Argument parsing and subcommand dispatch.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pmqsopt::metrics::MetricMode;

use crate::config::{InstanceConfig, RawConfig, RunConfig, KEYS};
use crate::error::{CliError, CliResult};
use crate::experiment::{build_instance, resolve_out, run_experiment, IterateFile, Manifest};
use crate::reeval::reevaluate;
use crate::slope::{slope_from_files, write_curve};

#[derive(Debug, Parser)]
#[command(
    name = "pmqsopt",
    version,
    about = "Proximal method of multipliers with quadratic approximations"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` config file (see `pmqsopt keys`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Single seed; replaces `seeds` for `run`, picks the instance for
    /// `generate` and `metrics`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: the config's `out`].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Config override `key=value`; repeatable, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run PMQSopt over all seeds and write CSVs and a manifest.
    Run {
        /// Re-run from a manifest's stored config instead of --config.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Worker threads [default: available parallelism].
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write the problem instance as JSON (`instance_seed_<s>.json`).
    Generate,
    /// Fit a power law to a residual column and write the fitted curve.
    Slope {
        /// Run CSVs; their points are pooled.
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// r_kkt_sq, r_cons or r_comp_abs.
        #[arg(long, default_value = "r_kkt_sq")]
        column: String,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Re-evaluate metrics on an `iterates_seed_<s>.json` file.
    Metrics {
        #[arg(long)]
        iterates: PathBuf,
        /// map or moreau [default: the config's `metric`, else map].
        #[arg(long)]
        metric: Option<MetricMode>,
        /// [default: the config's `metric_alpha`, else the run's alpha]
        #[arg(long)]
        metric_alpha: Option<f64>,
        /// Evaluate every `stride`-th iterate.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// List config keys with defaults.
    Keys,
}

fn load_raw(common: &Common) -> CliResult<RawConfig> {
    let mut raw = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    for o in &common.overrides {
        raw.set(o)?;
    }
    Ok(raw)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let common = &cli.common;
    match cli.command {
        Command::Run { manifest, threads } => {
            let mut raw = match manifest {
                Some(path) => {
                    if common.config.is_some() {
                        return Err(CliError::Usage("give either --config or --manifest".into()));
                    }
                    Manifest::load(&path)?.raw_config()
                }
                None => RawConfig::default(),
            };
            let file = load_raw(common)?;
            raw.entries.extend(file.entries);
            if let Some(s) = common.seed {
                raw.set(&format!("seeds={s}"))?;
            }
            let cfg = RunConfig::from_raw(&raw)?;
            let out = resolve_out(common.out.as_deref(), &cfg)?;
            let threads = threads
                .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
                .unwrap_or(1);
            let m = run_experiment(&raw, &cfg, &out, threads)?;
            println!(
                "wrote {} seed CSVs, {} and manifest.json to {}",
                m.seeds.len(),
                m.aggregate.as_deref().unwrap_or("no aggregate"),
                out.display()
            );
            Ok(())
        }
        Command::Generate => {
            let raw = load_raw(common)?;
            let cfg = InstanceConfig::from_raw(&raw)?;
            let seed = common.seed.or(cfg.instance_seed).ok_or_else(|| {
                CliError::Usage("generate needs --seed or `instance_seed`".into())
            })?;
            let inst = build_instance(&cfg, seed)?;
            let out = common
                .out
                .clone()
                .or_else(|| raw.get("out").map(PathBuf::from))
                .ok_or_else(|| {
                    CliError::Usage("no output directory; pass --out or set `out`".into())
                })?;
            let path = write_out(
                &out,
                &format!("instance_seed_{seed}.json"),
                &inst.to_json()?,
            )?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Slope {
            csv,
            column,
            t_min,
            t_max,
        } => {
            let report = slope_from_files(&csv, &column, t_min, t_max)?;
            println!(
                "column {column}: slope {:.6} intercept {:.6} ({} points, {} dropped)",
                report.fit.slope, report.fit.intercept, report.fit.used, report.fit.dropped
            );
            if let Some(out) = &common.out {
                let path = write_curve(&report, out)?;
                println!("fitted curve: {}", path.display());
            }
            Ok(())
        }
        Command::Metrics {
            iterates,
            metric,
            metric_alpha,
            stride,
        } => {
            let raw = load_raw(common)?;
            let cfg = InstanceConfig::from_raw(&raw)?;
            let text = fs::read_to_string(&iterates).map_err(|e| CliError::io(&iterates, e))?;
            let file: IterateFile = serde_json::from_str(&text)?;
            let seed = common.seed.unwrap_or(file.seed);
            let inst = build_instance(&cfg, seed)?;
            let mode = match metric {
                Some(m) => m,
                None => match raw.get("metric") {
                    None | Some("none") => MetricMode::Map,
                    Some(m) => m
                        .parse()
                        .map_err(|e| CliError::Usage(format!("metric: {e}")))?,
                },
            };
            let alpha = match (metric_alpha, raw.get("metric_alpha")) {
                (Some(a), _) => a,
                (None, Some(a)) => a
                    .parse()
                    .map_err(|e| CliError::Usage(format!("metric_alpha: {e}")))?,
                (None, None) => file.schedule.alpha,
            };
            let batch: usize = match raw.get("batch_size") {
                Some(b) => b
                    .parse()
                    .map_err(|e| CliError::Usage(format!("batch_size: {e}")))?,
                None => 1,
            };
            let table = reevaluate(inst.as_problem(), &file, batch, mode, alpha, stride)?;
            let out = common
                .out
                .clone()
                .or_else(|| raw.get("out").map(PathBuf::from))
                .ok_or_else(|| {
                    CliError::Usage("no output directory; pass --out or set `out`".into())
                })?;
            let path = write_out(
                &out,
                &format!("metrics_seed_{seed}.csv"),
                &table.to_csv_string(),
            )?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Keys => {
            for (key, default, doc) in KEYS {
                println!("{key:<28} {default:<22} {doc}");
            }
            Ok(())
        }
    }
}
