//! Flat `key = value` experiment configuration.
//!
//! One entry per line; `#` starts a comment; keys are unique. Command-line
//! overrides (`--set key=value`) replace file entries. Every key is
//! documented in [`KEYS`]; unknown keys are rejected so typos surface early.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pmqsopt::driver::{LogSchedule, MetricConfig, ScheduleMode, SubsolverConfig, ToleranceRule};
use pmqsopt::metrics::MetricMode;
use pmqsopt::problems::{FairnessParams, NpParams, QcnpParams};
use pmqsopt::qmodel::{CurvatureMode, ModelOptions};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("duplicate key `{key}` on line {line}")]
    Duplicate { key: String, line: usize },
    #[error("missing required field `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("key `{key}` does not apply: {reason}")]
    NotApplicable { key: String, reason: String },
}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Every accepted key with its default and meaning.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "family",
        "(required)",
        "qcnp | np | fairness | quad (quad needs instance_file)",
    ),
    (
        "instance_file",
        "(none)",
        "instance JSON written by `generate`; replaces generation",
    ),
    (
        "instance_seed",
        "(run seed)",
        "seed for instance generation; default regenerates per run seed",
    ),
    ("qcnp.n", "50", "dimension"),
    ("qcnp.p", "50", "number of constraints"),
    ("qcnp.samples", "100", "scenario pool size N"),
    ("qcnp.m", "5", "rows of each H_s"),
    ("qcnp.radius", "10", "box radius R"),
    (
        "qcnp.q_max",
        "0.05",
        "range of the diagonal curvature entries",
    ),
    ("qcnp.a_min", "0.5", "lower end of the linear coefficients"),
    ("qcnp.a_max", "0.7", "upper end of the linear coefficients"),
    (
        "qcnp.xbar_min",
        "-1.5",
        "lower end of the boundary reference",
    ),
    (
        "qcnp.xbar_max",
        "-0.5",
        "upper end of the boundary reference",
    ),
    ("np.features", "10", "feature dimension"),
    ("np.positives", "200", "positive-class size N0"),
    ("np.negatives", "200", "negative-class size N1"),
    ("np.fp_level", "0.2", "false-positive level in (0, 1)"),
    ("np.separation", "2", "distance between class means"),
    ("np.radius", "100", "box radius"),
    ("fairness.features", "10", "feature dimension"),
    ("fairness.data_size", "400", "|D|"),
    ("fairness.group_size", "160", "|S|"),
    ("fairness.minority_size", "40", "|S_min|"),
    ("fairness.level", "0.1", "violation level"),
    (
        "fairness.truncation",
        "2",
        "truncation parameter of the loss",
    ),
    ("fairness.separation", "2", "distance between label means"),
    (
        "fairness.minority_shift",
        "1",
        "mean shift of the minority subgroup",
    ),
    ("fairness.radius", "100", "box radius"),
    ("horizon", "(required)", "iteration budget T"),
    (
        "horizons",
        "(none)",
        "sweep: list `a,b,c` or `geom:LO:HI:COUNT`; one run per T; replaces horizon",
    ),
    (
        "seeds",
        "(required)",
        "list `1,2,3` or inclusive range `1-8`",
    ),
    ("schedule", "theorem", "theorem | practical | custom"),
    (
        "beta",
        "auto",
        "theorem-mode beta; auto uses 2[L0 + gamma2 sum L_j] + 1",
    ),
    ("alpha_scale", "1", "practical: alpha = alpha_scale sqrt(T)"),
    (
        "sigma_scale",
        "1",
        "practical: sigma = sigma_scale / sqrt(T)",
    ),
    ("tau_scale", "1", "practical: tau = tau_scale sqrt(T)"),
    ("sigma", "(required for custom)", "custom sigma"),
    ("alpha", "(required for custom)", "custom alpha"),
    ("tau", "(required for custom)", "custom tau"),
    ("batch_size", "1", "samples per iteration"),
    ("start", "slater", "slater | center | constant:V"),
    ("sigma_margin", "0", "delta in Sigma_i = -(L_i + delta) I"),
    ("curvature", "step_one", "step_one | empirical_hessian"),
    ("metric", "map", "map | moreau | none"),
    (
        "metric_alpha",
        "(schedule alpha)",
        "metric parameter alpha_met",
    ),
    (
        "metric_every_iteration",
        "true",
        "evaluate metrics at every t (exact running averages)",
    ),
    ("log", "geometric:100", "stride:K | geometric:COUNT"),
    ("subsolver.eta", "2", "backtracking factor"),
    ("subsolver.max_iter", "2000", "inner iteration cap"),
    ("subsolver.tol", "auto", "auto | fixed threshold"),
    (
        "subsolver.carry_lipschitz",
        "false",
        "warm-start the curvature estimate",
    ),
    (
        "retain_iterates",
        "false",
        "store all iterates; enables output selection and `metrics`",
    ),
    ("out", "(none)", "output directory; --out overrides"),
];

fn is_known(key: &str) -> bool {
    KEYS.iter().any(|(k, _, _)| *k == key)
}

/// Parsed but untyped entries, in key order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_entry(line).map_err(|reason| ConfigError::Syntax {
                line: line_no,
                reason,
            })?;
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    line: line_no,
                });
            }
        }
        Ok(Self { entries })
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> ConfigResult<()> {
        let (key, value) =
            split_entry(assignment.trim()).map_err(|reason| ConfigError::Syntax {
                line: 0,
                reason: format!("override `{assignment}`: {reason}"),
            })?;
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Canonical text form; parses back to the same entries.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

fn split_entry(line: &str) -> std::result::Result<(&str, &str), String> {
    let (key, value) = line
        .split_once('=')
        .ok_or_else(|| "expected `key = value`".to_string())?;
    let key = key.trim();
    let value = value.trim();
    if key.is_empty() {
        return Err("empty key".into());
    }
    if !key
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
    {
        return Err(format!("invalid key `{key}`"));
    }
    if value.is_empty() {
        return Err(format!("empty value for `{key}`"));
    }
    Ok((key, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Qcnp,
    Np,
    Fairness,
    Quad,
}

impl Family {
    fn prefix(self) -> &'static str {
        match self {
            Family::Qcnp => "qcnp.",
            Family::Np => "np.",
            Family::Fairness => "fairness.",
            Family::Quad => "quad.",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InstanceSource {
    Qcnp(QcnpParams),
    Np(NpParams),
    Fairness(FairnessParams),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub family: Family,
    pub source: InstanceSource,
    pub instance_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StartRule {
    Slater,
    Center,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaRule {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Horizons {
    Single(usize),
    /// One independent run per horizon; each contributes its final row.
    Sweep(Vec<usize>),
}

impl Horizons {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Horizons::Single(t) => vec![*t],
            Horizons::Sweep(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub instance: InstanceConfig,
    pub horizons: Horizons,
    pub seeds: Vec<u64>,
    pub schedule: ScheduleMode,
    pub beta: BetaRule,
    pub batch_size: usize,
    pub start: StartRule,
    pub model: ModelOptions,
    pub metric: Option<MetricConfig>,
    pub log: LogSchedule,
    pub subsolver: SubsolverConfig,
    pub retain_iterates: bool,
    pub out: Option<PathBuf>,
}

/// Typed view over a [`RawConfig`] that records which keys were read.
struct Reader<'a> {
    raw: &'a RawConfig,
    used: std::cell::RefCell<Vec<&'a str>>,
}

impl<'a> Reader<'a> {
    fn new(raw: &'a RawConfig) -> Self {
        Self {
            raw,
            used: Default::default(),
        }
    }

    fn get(&self, key: &'static str) -> Option<&'a str> {
        let (k, v) = self.raw.entries.get_key_value(key)?;
        self.used.borrow_mut().push(k.as_str());
        Some(v.as_str())
    }

    fn require(&self, key: &'static str) -> ConfigResult<&'a str> {
        self.get(key).ok_or(ConfigError::Missing(key))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &'static str) -> ConfigResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| invalid(key, e)))
            .transpose()
    }

    fn or<T: std::str::FromStr>(&self, key: &'static str, default: T) -> ConfigResult<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn positive(&self, key: &'static str, default: f64) -> ConfigResult<f64> {
        let v = self.or(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(
                key,
                format!("must be positive and finite, got {v}"),
            ))
        }
    }

    fn count(&self, key: &'static str, default: usize) -> ConfigResult<usize> {
        let v = self.or(key, default)?;
        if v >= 1 {
            Ok(v)
        } else {
            Err(invalid(key, "must be at least 1"))
        }
    }

    /// Rejects keys that were present but never read.
    fn finish(&self, family: Option<Family>) -> ConfigResult<()> {
        let used = self.used.borrow();
        for key in self.raw.entries.keys() {
            if used.contains(&key.as_str()) {
                continue;
            }
            if !is_known(key) {
                return Err(ConfigError::Unknown(key.clone()));
            }
            if let Some(f) = family {
                for other in [Family::Qcnp, Family::Np, Family::Fairness] {
                    if other != f && key.starts_with(other.prefix()) {
                        return Err(ConfigError::NotApplicable {
                            key: key.clone(),
                            reason: format!("family is {}", f.prefix().trim_end_matches('.')),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_family(value: &str) -> ConfigResult<Family> {
    match value {
        "qcnp" => Ok(Family::Qcnp),
        "np" => Ok(Family::Np),
        "fairness" => Ok(Family::Fairness),
        "quad" => Ok(Family::Quad),
        other => Err(invalid("family", format!("unknown family `{other}`"))),
    }
}

fn parse_bool(key: &str, value: &str) -> ConfigResult<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(invalid(
            key,
            format!("expected true or false, got `{other}`"),
        )),
    }
}

/// `1,2,3` or the inclusive range `1-8`.
pub fn parse_seeds(value: &str) -> ConfigResult<Vec<u64>> {
    let bad = |e: std::num::ParseIntError| invalid("seeds", e);
    let seeds: Vec<u64> = match value.split_once('-') {
        Some((lo, hi)) if !value.contains(',') => {
            let lo: u64 = lo.trim().parse().map_err(bad)?;
            let hi: u64 = hi.trim().parse().map_err(bad)?;
            if lo > hi {
                return Err(invalid("seeds", format!("empty range {lo}-{hi}")));
            }
            if hi - lo >= 1_000_000 {
                return Err(invalid("seeds", "range longer than one million"));
            }
            (lo..=hi).collect()
        }
        _ => value
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(bad))
            .collect::<ConfigResult<_>>()?,
    };
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        return Err(invalid("seeds", "duplicate seed"));
    }
    Ok(seeds)
}

/// `a,b,c` or `geom:LO:HI:COUNT` (geometric grid, rounded, deduplicated).
pub fn parse_horizons(value: &str) -> ConfigResult<Vec<usize>> {
    let positive = |s: &str| -> ConfigResult<usize> {
        let v: usize = s.trim().parse().map_err(|e| invalid("horizons", e))?;
        if v == 0 {
            return Err(invalid("horizons", "horizons must be at least 1"));
        }
        Ok(v)
    };
    let mut out = if let Some(rest) = value.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(invalid("horizons", "expected geom:LO:HI:COUNT"));
        }
        let (lo, hi, count) = (
            positive(parts[0])?,
            positive(parts[1])?,
            positive(parts[2])?,
        );
        if lo > hi || !(2..=10_000).contains(&count) {
            return Err(invalid("horizons", "need LO <= HI and 2 <= COUNT <= 10000"));
        }
        let ratio = (hi as f64 / lo as f64).ln();
        (0..count)
            .map(|k| (lo as f64 * (ratio * k as f64 / (count - 1) as f64).exp()).round() as usize)
            .collect::<Vec<_>>()
    } else {
        value
            .split(',')
            .map(positive)
            .collect::<ConfigResult<Vec<_>>>()?
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_log(value: &str) -> ConfigResult<LogSchedule> {
    let (kind, k) = value
        .split_once(':')
        .ok_or_else(|| invalid("log", "expected stride:K or geometric:COUNT"))?;
    let k: usize = k.trim().parse().map_err(|e| invalid("log", e))?;
    if k == 0 {
        return Err(invalid("log", "count must be at least 1"));
    }
    match kind.trim() {
        "stride" => Ok(LogSchedule::Stride(k)),
        "geometric" => Ok(LogSchedule::Geometric(k)),
        other => Err(invalid("log", format!("unknown log kind `{other}`"))),
    }
}

fn parse_start(value: &str) -> ConfigResult<StartRule> {
    match value {
        "slater" => Ok(StartRule::Slater),
        "center" => Ok(StartRule::Center),
        other => match other.strip_prefix("constant:") {
            Some(v) => {
                let v: f64 = v.trim().parse().map_err(|e| invalid("start", e))?;
                if !v.is_finite() {
                    return Err(invalid("start", "constant must be finite"));
                }
                Ok(StartRule::Constant(v))
            }
            None => Err(invalid(
                "start",
                format!("expected slater, center or constant:V, got `{other}`"),
            )),
        },
    }
}

fn read_instance(r: &Reader<'_>) -> ConfigResult<InstanceConfig> {
    let family = parse_family(r.require("family")?)?;
    let instance_seed = r.parsed("instance_seed")?;
    if let Some(path) = r.get("instance_file") {
        return Ok(InstanceConfig {
            family,
            source: InstanceSource::File(PathBuf::from(path)),
            instance_seed,
        });
    }
    let source = match family {
        Family::Qcnp => {
            let d = QcnpParams::default();
            let params = QcnpParams {
                n: r.count("qcnp.n", d.n)?,
                p: r.or("qcnp.p", d.p)?,
                samples: r.count("qcnp.samples", d.samples)?,
                m: r.count("qcnp.m", d.m)?,
                radius: r.positive("qcnp.radius", d.radius)?,
                q_max: r.or("qcnp.q_max", d.q_max)?,
                a_range: (
                    r.or("qcnp.a_min", d.a_range.0)?,
                    r.or("qcnp.a_max", d.a_range.1)?,
                ),
                xbar_range: (
                    r.or("qcnp.xbar_min", d.xbar_range.0)?,
                    r.or("qcnp.xbar_max", d.xbar_range.1)?,
                ),
            };
            params.validate().map_err(|e| invalid("qcnp", e))?;
            InstanceSource::Qcnp(params)
        }
        Family::Np => {
            let d = NpParams::default();
            let params = NpParams {
                features: r.count("np.features", d.features)?,
                positives: r.count("np.positives", d.positives)?,
                negatives: r.count("np.negatives", d.negatives)?,
                fp_level: r.or("np.fp_level", d.fp_level)?,
                separation: r.or("np.separation", d.separation)?,
                radius: r.positive("np.radius", d.radius)?,
            };
            if !(params.fp_level > 0.0 && params.fp_level < 1.0) {
                return Err(invalid("np.fp_level", "must lie in (0, 1)"));
            }
            if !params.separation.is_finite() {
                return Err(invalid("np.separation", "must be finite"));
            }
            InstanceSource::Np(params)
        }
        Family::Fairness => {
            let d = FairnessParams::default();
            let params = FairnessParams {
                features: r.count("fairness.features", d.features)?,
                data_size: r.count("fairness.data_size", d.data_size)?,
                group_size: r.count("fairness.group_size", d.group_size)?,
                minority_size: r.count("fairness.minority_size", d.minority_size)?,
                level: r.positive("fairness.level", d.level)?,
                truncation: r.positive("fairness.truncation", d.truncation)?,
                separation: r.or("fairness.separation", d.separation)?,
                minority_shift: r.or("fairness.minority_shift", d.minority_shift)?,
                radius: r.positive("fairness.radius", d.radius)?,
            };
            params.validate().map_err(|e| invalid("fairness", e))?;
            if !params.separation.is_finite() || !params.minority_shift.is_finite() {
                return Err(invalid("fairness", "separation and shift must be finite"));
            }
            InstanceSource::Fairness(params)
        }
        Family::Quad => return Err(ConfigError::Missing("instance_file")),
    };
    Ok(InstanceConfig {
        family,
        source,
        instance_seed,
    })
}

impl InstanceConfig {
    /// Reads only the instance keys; all other known keys are ignored.
    pub fn from_raw(raw: &RawConfig) -> ConfigResult<Self> {
        let r = Reader::new(raw);
        let cfg = read_instance(&r)?;
        for key in raw.entries.keys() {
            if !is_known(key) {
                return Err(ConfigError::Unknown(key.clone()));
            }
        }
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> ConfigResult<Self> {
        let r = Reader::new(raw);
        let instance = read_instance(&r)?;

        let horizons = match (r.get("horizon"), r.get("horizons")) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "horizons",
                    "give either horizon or horizons, not both",
                ))
            }
            (Some(t), None) => {
                let t: usize = t.parse().map_err(|e| invalid("horizon", e))?;
                if t == 0 {
                    return Err(invalid("horizon", "must be at least 1"));
                }
                Horizons::Single(t)
            }
            (None, Some(list)) => Horizons::Sweep(parse_horizons(list)?),
            (None, None) => return Err(ConfigError::Missing("horizon")),
        };
        let seeds = parse_seeds(r.require("seeds")?)?;

        let schedule = match r.get("schedule").unwrap_or("theorem") {
            "theorem" => ScheduleMode::Theorem,
            "practical" => ScheduleMode::Practical {
                alpha_scale: r.positive("alpha_scale", 1.0)?,
                sigma_scale: r.positive("sigma_scale", 1.0)?,
                tau_scale: r.positive("tau_scale", 1.0)?,
            },
            "custom" => {
                let need = |key: &'static str| -> ConfigResult<f64> {
                    r.require(key)?;
                    r.positive(key, 1.0)
                };
                ScheduleMode::Custom {
                    sigma: need("sigma")?,
                    alpha: need("alpha")?,
                    tau: need("tau")?,
                }
            }
            other => return Err(invalid("schedule", format!("unknown schedule `{other}`"))),
        };
        let beta = match r.get("beta") {
            None | Some("auto") => BetaRule::Auto,
            Some(_) => BetaRule::Fixed(r.positive("beta", 1.0)?),
        };

        let batch_size = r.count("batch_size", 1)?;
        let start = parse_start(r.get("start").unwrap_or("slater"))?;
        let sigma_margin: f64 = r.or("sigma_margin", 0.0)?;
        if !(sigma_margin >= 0.0) || !sigma_margin.is_finite() {
            return Err(invalid("sigma_margin", "must be nonnegative and finite"));
        }
        let curvature = match r.get("curvature").unwrap_or("step_one") {
            "step_one" => CurvatureMode::StepOne,
            "empirical_hessian" => CurvatureMode::EmpiricalHessian,
            other => return Err(invalid("curvature", format!("unknown mode `{other}`"))),
        };

        let metric = match r.get("metric").unwrap_or("map") {
            "none" => None,
            mode => Some(MetricConfig {
                mode: mode
                    .parse::<MetricMode>()
                    .map_err(|e| invalid("metric", e))?,
                alpha: match r.get("metric_alpha") {
                    Some(_) => Some(r.positive("metric_alpha", 1.0)?),
                    None => None,
                },
                every_iteration: match r.get("metric_every_iteration") {
                    Some(v) => parse_bool("metric_every_iteration", v)?,
                    None => false,
                },
            }),
        };
        let log = parse_log(r.get("log").unwrap_or("geometric:100"))?;

        let d = SubsolverConfig::default();
        let subsolver = SubsolverConfig {
            eta: r.or("subsolver.eta", d.eta)?,
            max_iter: r.count("subsolver.max_iter", d.max_iter)?,
            tolerance: match r.get("subsolver.tol") {
                None | Some("auto") => ToleranceRule::Auto,
                Some(_) => ToleranceRule::Fixed(r.positive("subsolver.tol", 1.0)?),
            },
            carry_lipschitz: match r.get("subsolver.carry_lipschitz") {
                Some(v) => parse_bool("subsolver.carry_lipschitz", v)?,
                None => false,
            },
        };
        if !(subsolver.eta > 1.0) || !subsolver.eta.is_finite() {
            return Err(invalid("subsolver.eta", "must exceed 1"));
        }

        let retain_iterates = match r.get("retain_iterates") {
            Some(v) => parse_bool("retain_iterates", v)?,
            None => false,
        };
        if retain_iterates && matches!(horizons, Horizons::Sweep(_)) {
            return Err(invalid(
                "retain_iterates",
                "not supported together with horizons",
            ));
        }
        let out = r.get("out").map(PathBuf::from);

        r.finish(Some(instance.family))?;
        Ok(Self {
            instance,
            horizons,
            seeds,
            schedule,
            beta,
            batch_size,
            start,
            model: ModelOptions {
                sigma_margin,
                curvature,
            },
            metric,
            log,
            subsolver,
            retain_iterates,
            out,
        })
    }
}

/// Parses and validates a full run configuration from text.
pub fn parse_run_config(text: &str) -> ConfigResult<RunConfig> {
    RunConfig::from_raw(&RawConfig::parse(text)?)
}
