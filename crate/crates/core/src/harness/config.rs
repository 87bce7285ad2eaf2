//! Experiment configuration: flat `key = value` text with optional
//! `[kind]` sections, plus command-line overrides.
//!
//! Keys before the first section apply to every experiment kind; keys in a
//! `[kind]` section apply only when that kind runs and override the global
//! ones. Lists are comma-separated. Numbers may be written as multiples of
//! pi (`pi`, `2pi`, `4*pi`).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fit::FitWindow;
use crate::propagator::{Renormalize, SimParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Evolve,
    ReverseCheck,
    Otoc,
    ScanK,
    Classical,
    OracleCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Evolve,
        ExperimentKind::ReverseCheck,
        ExperimentKind::Otoc,
        ExperimentKind::ScanK,
        ExperimentKind::Classical,
        ExperimentKind::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::ReverseCheck => "reverse-check",
            ExperimentKind::Otoc => "otoc",
            ExperimentKind::ScanK => "scan-k",
            ExperimentKind::Classical => "classical",
            ExperimentKind::OracleCheck => "oracle-check",
        }
    }

    fn default_t_max(self) -> usize {
        match self {
            ExperimentKind::Otoc => 25,
            _ => 12,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub params: SimParams,
    /// K values for `scan-k` and `classical`.
    pub k_values: Vec<f64>,
    /// Lambda values overlaid by `otoc`.
    pub lambda_values: Vec<f64>,
    pub t_max: usize,
    pub window: FitWindow,
    pub out_dir: PathBuf,
    pub renormalize: Renormalize,
    pub jobs: usize,
    /// Grid sizes exercised by `oracle-check`.
    pub oracle_points: Vec<usize>,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let t_max = kind.default_t_max();
        Self {
            kind,
            params: SimParams::default(),
            k_values: default_scan_k(),
            lambda_values: Vec::new(),
            t_max,
            window: FitWindow::new(5.0, t_max as f64),
            out_dir: PathBuf::from("results"),
            renormalize: Renormalize::PerKick,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            oracle_points: vec![8, 16, 64],
        }
    }

    /// Parse config text for `kind`, then apply `key=value` overrides.
    pub fn parse(kind: ExperimentKind, text: &str, overrides: &[String]) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        Error::Config(format!("line {}: bad section header", lineno + 1))
                    })?
                    .trim();
                ExperimentKind::from_str(name)?;
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = split_pair(line).ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            match &section {
                None => raw.set(key, value),
                Some(s) if s == kind.name() => raw.set_override(key, value),
                Some(_) => {}
            }
        }
        for o in overrides {
            let (key, value) = split_pair(o)
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{o}`")))?;
            raw.set_override(key, value);
        }
        Self::from_raw(kind, raw)
    }

    fn from_raw(kind: ExperimentKind, raw: RawConfig) -> Result<Self> {
        let mut cfg = Self::defaults(kind);
        let mut fit_start = None;
        let mut fit_end = None;
        for (key, value) in raw.resolved() {
            match key.as_str() {
                "kind" => {
                    let named = ExperimentKind::from_str(&value)?;
                    if named != kind {
                        return Err(Error::Config(format!(
                            "config declares kind `{named}` but `{kind}` was requested"
                        )));
                    }
                }
                "K" | "k" => cfg.params.k = parse_number("K", &value)?,
                "lambda" => cfg.params.lambda = parse_number("lambda", &value)?,
                "hbar" | "hbar_eff" => cfg.params.hbar = parse_number("hbar", &value)?,
                "sigma" => cfg.params.sigma = parse_number("sigma", &value)?,
                "n_points" => cfg.params.n_points = parse_count("n_points", &value)?,
                "n_kicks" => cfg.params.n_kicks = parse_count("n_kicks", &value)?,
                "t_max" => cfg.t_max = parse_count("t_max", &value)?,
                "fit_start" => fit_start = Some(parse_number("fit_start", &value)?),
                "fit_end" => fit_end = Some(parse_number("fit_end", &value)?),
                "k_values" => cfg.k_values = parse_list("k_values", &value)?,
                "lambda_values" => cfg.lambda_values = parse_list("lambda_values", &value)?,
                "out" | "output" => cfg.out_dir = PathBuf::from(value),
                "renormalize" => cfg.renormalize = value.parse()?,
                "jobs" => cfg.jobs = parse_count("jobs", &value)?,
                "oracle_points" => {
                    cfg.oracle_points = value
                        .split(',')
                        .map(|v| parse_count("oracle_points", v.trim()))
                        .collect::<Result<_>>()?
                }
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.window = FitWindow::new(
            fit_start.unwrap_or(5.0),
            fit_end.unwrap_or(cfg.t_max as f64),
        );
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.jobs == 0 {
            return Err(Error::Config("field `jobs`: must be positive".into()));
        }
        if matches!(self.kind, ExperimentKind::Otoc | ExperimentKind::ScanK) && self.t_max < 2 {
            return Err(Error::Config("field `t_max`: must be >= 2".into()));
        }
        if self.kind == ExperimentKind::ScanK && self.k_values.is_empty() {
            return Err(Error::Config(
                "field `k_values`: must not be empty for scan-k".into(),
            ));
        }
        if let Some(k) = self
            .k_values
            .iter()
            .find(|k| !(**k >= 0.0 && k.is_finite()))
        {
            return Err(Error::Config(format!(
                "field `k_values`: invalid entry {k}"
            )));
        }
        if let Some(l) = self
            .lambda_values
            .iter()
            .find(|l| !(**l >= 0.0 && l.is_finite()))
        {
            return Err(Error::Config(format!(
                "field `lambda_values`: invalid entry {l}"
            )));
        }
        if !(self.window.start <= self.window.end) {
            return Err(Error::Config(format!(
                "field `fit_start`: window [{}, {}] is empty",
                self.window.start, self.window.end
            )));
        }
        if let Some(n) = self
            .oracle_points
            .iter()
            .find(|n| !n.is_power_of_two() || **n < 2 || **n > super::dense::MAX_DENSE_POINTS)
        {
            return Err(Error::Config(format!(
                "field `oracle_points`: {n} must be a power of two in [2, {}]",
                super::dense::MAX_DENSE_POINTS
            )));
        }
        Ok(())
    }

    /// Lambda values for the `otoc` experiment (falls back to `params.lambda`).
    pub fn otoc_lambdas(&self) -> Vec<f64> {
        if self.lambda_values.is_empty() {
            vec![self.params.lambda]
        } else {
            self.lambda_values.clone()
        }
    }
}

/// Twenty K values spread over `(pi, 5 pi)`, none on an interval edge.
pub fn default_scan_k() -> Vec<f64> {
    use std::f64::consts::PI;
    (0..20)
        .map(|i| PI + 4.0 * PI * (i as f64 + 0.5) / 20.0)
        .collect()
}

#[derive(Default)]
struct RawConfig {
    global: Vec<(String, String)>,
    overrides: Vec<(String, String)>,
}

impl RawConfig {
    fn set(&mut self, key: &str, value: &str) {
        self.global.push((key.to_string(), value.to_string()));
    }

    fn set_override(&mut self, key: &str, value: &str) {
        self.overrides.push((key.to_string(), value.to_string()));
    }

    /// Later entries win; overrides come after globals.
    fn resolved(self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for (k, v) in self.global.into_iter().chain(self.overrides) {
            if let Some(slot) = out.iter_mut().find(|(key, _)| *key == k) {
                slot.1 = v;
            } else {
                out.push((k, v));
            }
        }
        out
    }
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty()).then_some((k, v))
}

/// A float, optionally written as a multiple of pi.
pub fn parse_number(field: &str, value: &str) -> Result<f64> {
    let bad = || {
        Error::Config(format!(
            "field `{field}`: cannot parse `{value}` as a number"
        ))
    };
    let v = value.trim();
    let x = if let Some(prefix) = v.strip_suffix("pi") {
        let prefix = prefix.trim().trim_end_matches('*').trim();
        let factor = if prefix.is_empty() {
            1.0
        } else {
            prefix.parse::<f64>().map_err(|_| bad())?
        };
        factor * std::f64::consts::PI
    } else {
        v.parse::<f64>().map_err(|_| bad())?
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn parse_count(field: &str, value: &str) -> Result<usize> {
    value.trim().parse::<usize>().map_err(|_| {
        Error::Config(format!(
            "field `{field}`: expected a non-negative integer, got `{value}`"
        ))
    })
}

fn parse_list(field: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_number(field, s))
        .collect()
}
