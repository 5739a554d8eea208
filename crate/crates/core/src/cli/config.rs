use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::hermite::{DEFAULT_QUAD_ORDER, MIN_QUAD_ORDER};
use crate::model::ModeMethod;
use crate::transform::TransformMethod;

use super::CliError;

pub const QUAD_ORDER_ENV: &str = "QUBIT_ENTROPY_QUAD_ORDER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModesArg {
    SmallAngle,
    Exact,
}

impl From<MethodArg> for TransformMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::ClosedForm => TransformMethod::ClosedForm,
            MethodArg::Quadrature => TransformMethod::Quadrature,
        }
    }
}

impl From<ModesArg> for ModeMethod {
    fn from(m: ModesArg) -> Self {
        match m {
            ModesArg::SmallAngle => ModeMethod::SmallAngle,
            ModesArg::Exact => ModeMethod::Exact,
        }
    }
}

/// Temperature and q sweep over the coupled-oscillator pipeline.
///
/// Every option may also be given in a `key = value` file passed with
/// `--config`; flags win over the file.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "qubit-entropy", version, allow_negative_numbers = true)]
pub struct Args {
    /// Frequency ratio ω2/ω1
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Coupling constant, |g| < 1
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub t_scale: Option<TScale>,
    /// Comma-separated deformation parameters
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub q: Option<Vec<f64>>,
    /// Levels per mode for the entropies
    #[arg(long)]
    pub levels_small: Option<usize>,
    /// Levels per mode for the purity diagnostics
    #[arg(long)]
    pub levels_big: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Normal-mode frequencies: small-angle formulas or exact eigenvalues
    #[arg(long, value_enum)]
    pub modes: Option<ModesArg>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file; stdout when absent or `-`
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub lambda: f64,
    pub g: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub t_scale: TScale,
    pub q_values: Vec<f64>,
    pub d_small: usize,
    pub d_big: usize,
    pub method: TransformMethod,
    pub modes: ModeMethod,
    pub quad_order: usize,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda: 1.5,
            g: 0.1,
            t_min: 0.01,
            t_max: 0.5,
            t_steps: 50,
            t_scale: TScale::Linear,
            q_values: vec![0.5, 0.8, 1.0, 1.5, 2.0],
            d_small: 2,
            d_big: 6,
            method: TransformMethod::ClosedForm,
            modes: ModeMethod::SmallAngle,
            quad_order: DEFAULT_QUAD_ORDER,
            output_path: None,
            output_format: OutputFormat::Csv,
        }
    }
}

impl SweepConfig {
    pub fn temperatures(&self) -> Vec<f64> {
        let n = self.t_steps;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.t_max;
                }
                let f = i as f64 / last;
                match self.t_scale {
                    TScale::Linear => self.t_min + f * (self.t_max - self.t_min),
                    TScale::Log => self.t_min * (self.t_max / self.t_min).powf(f),
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, reason: String| Err(CliError::config(field, reason));
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad("lambda", format!("must be positive, got {}", self.lambda));
        }
        if !(self.g.abs() < 1.0) {
            return bad(
                "g",
                format!("need |g| < 1 for a stable potential, got {}", self.g),
            );
        }
        if !(self.t_min > 0.0) {
            return bad(
                "t-min",
                format!("temperature must be positive, got {}", self.t_min),
            );
        }
        if !(self.t_max > self.t_min) || !self.t_max.is_finite() {
            return bad(
                "t-max",
                format!("must exceed t-min = {}, got {}", self.t_min, self.t_max),
            );
        }
        if self.t_steps < 2 {
            return bad(
                "t-steps",
                format!("need at least 2 steps, got {}", self.t_steps),
            );
        }
        if self.q_values.is_empty() {
            return bad("q", "empty list".into());
        }
        if let Some(q) = self
            .q_values
            .iter()
            .find(|q| !(**q > 0.0) || !q.is_finite())
        {
            return bad("q", format!("values must be positive, got {q}"));
        }
        if self.d_small < 2 {
            return bad(
                "levels-small",
                format!("need at least 2, got {}", self.d_small),
            );
        }
        if self.d_big <= self.d_small {
            return bad(
                "levels-big",
                format!(
                    "must exceed levels-small = {}, got {}",
                    self.d_small, self.d_big
                ),
            );
        }
        if self.method == TransformMethod::ClosedForm && self.d_small != 2 {
            return bad(
                "levels-small",
                format!("closed-form method needs 2 levels, got {}", self.d_small),
            );
        }
        if self.modes == ModeMethod::SmallAngle && self.lambda == 1.0 {
            return bad(
                "lambda",
                "small-angle modes are singular at lambda = 1".into(),
            );
        }
        if self.quad_order < MIN_QUAD_ORDER {
            return bad(
                QUAD_ORDER_ENV,
                format!("must be at least {MIN_QUAD_ORDER}, got {}", self.quad_order),
            );
        }
        Ok(())
    }

    /// `key = value` lines, one per setting.
    pub fn provenance(&self) -> Vec<String> {
        let q: Vec<String> = self.q_values.iter().map(|q| q.to_string()).collect();
        vec![
            format!("qubit-entropy {}", env!("CARGO_PKG_VERSION")),
            format!("lambda = {}", self.lambda),
            format!("g = {}", self.g),
            format!("t-min = {}", self.t_min),
            format!("t-max = {}", self.t_max),
            format!("t-steps = {}", self.t_steps),
            format!("t-scale = {}", value_name(self.t_scale)),
            format!("q = {}", q.join(",")),
            format!("levels-small = {}", self.d_small),
            format!("levels-big = {}", self.d_big),
            format!("method = {}", method_name(self.method)),
            format!("modes = {}", modes_name(self.modes)),
            format!("quad-order = {}", self.quad_order),
        ]
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

fn method_name(m: TransformMethod) -> &'static str {
    match m {
        TransformMethod::ClosedForm => "closed-form",
        TransformMethod::Quadrature => "quadrature",
    }
}

fn modes_name(m: ModeMethod) -> &'static str {
    match m {
        ModeMethod::SmallAngle => "small-angle",
        ModeMethod::Exact => "exact",
    }
}

impl fmt::Display for SweepConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.provenance().join("; "))
    }
}

/// Reads a flat `key = value` file. Blank lines and `#` comments are skipped;
/// keys may use `-` or `_`.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(
                "config",
                format!("line {}: expected `key = value`, got `{line}`", lineno + 1),
            ));
        };
        let key = key.trim().replace('_', "-");
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(field: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    raw.parse()
        .map_err(|e| CliError::config(field, format!("cannot parse `{raw}`: {e}")))
}

fn parse_enum<T: ValueEnum>(field: &str, raw: &str) -> Result<T, CliError> {
    T::from_str(raw, true).map_err(|e| CliError::config(field, e))
}

fn parse_q_list(field: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| parse_value(field, s.trim()))
        .collect()
}

fn apply_file(cfg: &mut SweepConfig, entries: &BTreeMap<String, String>) -> Result<(), CliError> {
    for (key, raw) in entries {
        match key.as_str() {
            "lambda" => cfg.lambda = parse_value(key, raw)?,
            "g" => cfg.g = parse_value(key, raw)?,
            "t-min" => cfg.t_min = parse_value(key, raw)?,
            "t-max" => cfg.t_max = parse_value(key, raw)?,
            "t-steps" => cfg.t_steps = parse_value(key, raw)?,
            "t-scale" => cfg.t_scale = parse_enum(key, raw)?,
            "q" | "q-values" => cfg.q_values = parse_q_list(key, raw)?,
            "levels-small" | "d-small" => cfg.d_small = parse_value(key, raw)?,
            "levels-big" | "d-big" => cfg.d_big = parse_value(key, raw)?,
            "method" => cfg.method = parse_enum::<MethodArg>(key, raw)?.into(),
            "modes" => cfg.modes = parse_enum::<ModesArg>(key, raw)?.into(),
            "format" | "output-format" => cfg.output_format = parse_enum(key, raw)?,
            "output" | "output-path" => cfg.output_path = Some(PathBuf::from(raw)),
            "quad-order" => cfg.quad_order = parse_value(key, raw)?,
            other => {
                return Err(CliError::config("config", format!("unknown key `{other}`")));
            }
        }
    }
    Ok(())
}

/// Defaults, then the config file, then the environment, then flags.
pub fn parse_config(args: &Args, quad_order_env: Option<&str>) -> Result<SweepConfig, CliError> {
    let mut cfg = SweepConfig::default();
    if let Some(path) = &args.config {
        apply_file(&mut cfg, &read_config_file(path)?)?;
    }
    if let Some(raw) = quad_order_env {
        cfg.quad_order = parse_value(QUAD_ORDER_ENV, raw.trim())?;
    }
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.g {
        cfg.g = v;
    }
    if let Some(v) = args.t_min {
        cfg.t_min = v;
    }
    if let Some(v) = args.t_max {
        cfg.t_max = v;
    }
    if let Some(v) = args.t_steps {
        cfg.t_steps = v;
    }
    if let Some(v) = args.t_scale {
        cfg.t_scale = v;
    }
    if let Some(v) = &args.q {
        cfg.q_values = v.clone();
    }
    if let Some(v) = args.levels_small {
        cfg.d_small = v;
    }
    if let Some(v) = args.levels_big {
        cfg.d_big = v;
    }
    if let Some(v) = args.method {
        cfg.method = v.into();
    }
    if let Some(v) = args.modes {
        cfg.modes = v.into();
    }
    if let Some(v) = args.format {
        cfg.output_format = v;
    }
    if let Some(v) = &args.output {
        cfg.output_path = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}
