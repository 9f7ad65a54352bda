//! Flat key-value run configuration.
//!
//! One `key=value` pair per whitespace-separated token, `#` starts a comment,
//! and a parameter may take the sweep form `sweep(start,stop,count)`:
//!
//! ```text
//! model=ssh phi=sweep(-1,1,201) dims=101
//! model=free_fermion d=2 lambda=sweep(0,3,121) gamma=1 dims=41,41
//! ```
//!
//! Keys: `model` (ssh | free_fermion | custom), the model's own parameters
//! (`phi`; `d`, `lambda`, `gamma`; `table`), `dims`, and optional
//! `twist_axis`, `threshold`, `format`, `twist_n` (total | linear), `sizes`
//! (for finite-size trends). Unknown keys are rejected, every error carries
//! its line number, and a free-fermion config with fixed `gamma=0` is refused
//! outright: the twist commutes with the Hamiltonian and the scan would be
//! meaningless.

use std::fmt;
use std::path::{Path, PathBuf};

use twistz::engine::NConvention;
use twistz::models::CustomModel;
use twistz::{ModelSpec, TwistError, DEFAULT_ILL_DEFINED_THRESHOLD};

/// A model parameter: fixed, or swept over an inclusive linear range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Fixed(f64),
    Sweep { start: f64, stop: f64, count: usize },
}

impl Value {
    pub fn is_sweep(&self) -> bool {
        matches!(self, Value::Sweep { .. })
    }

    fn fixed(&self) -> Option<f64> {
        match self {
            Value::Fixed(v) => Some(*v),
            Value::Sweep { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    FreeFermion {
        dim: usize,
        lambda: Value,
        gamma: Value,
    },
    Ssh {
        phi: Value,
    },
    Custom {
        table: PathBuf,
    },
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::FreeFermion { .. } => "free_fermion",
            ModelConfig::Ssh { .. } => "ssh",
            ModelConfig::Custom { .. } => "custom",
        }
    }

    fn sweep_params(&self) -> Vec<(&'static str, Value)> {
        match self {
            ModelConfig::FreeFermion { lambda, gamma, .. } => {
                vec![("lambda", *lambda), ("gamma", *gamma)]
            }
            ModelConfig::Ssh { phi } => vec![("phi", *phi)],
            ModelConfig::Custom { .. } => vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub model: ModelConfig,
    pub dims: Vec<usize>,
    /// 0-based twist axis (the config file and CLI use 1-based).
    pub twist_axis: usize,
    pub threshold: f64,
    pub format: OutputFormat,
    pub n_convention: NConvention,
    /// Linear sizes for finite-size trends.
    pub sizes: Option<Vec<usize>>,
}

/// Parse failure with the 1-based line it occurred on.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn parse_value(line: usize, key: &str, raw: &str) -> Result<Value, ParseError> {
    if let Some(rest) = raw.strip_prefix("sweep(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| err(line, format!("{key}: sweep value must end with ')'")))?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(err(line, format!("{key}: sweep needs (start,stop,count)")));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| err(line, format!("{key}: bad sweep start {:?}", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| err(line, format!("{key}: bad sweep stop {:?}", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| err(line, format!("{key}: bad sweep count {:?}", parts[2])))?;
        if count < 2 {
            return Err(err(line, format!("{key}: sweep count must be >= 2")));
        }
        if !start.is_finite() || !stop.is_finite() || start >= stop {
            return Err(err(line, format!("{key}: sweep needs finite start < stop")));
        }
        Ok(Value::Sweep { start, stop, count })
    } else {
        let v: f64 = raw
            .parse()
            .map_err(|_| err(line, format!("{key}: bad number {raw:?}")))?;
        Ok(Value::Fixed(v))
    }
}

fn parse_usize_list(line: usize, key: &str, raw: &str) -> Result<Vec<usize>, ParseError> {
    raw.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| err(line, format!("{key}: bad entry {p:?}")))
        })
        .collect()
}

/// Parse a configuration text. See the module docs for the format.
pub fn parse_config(text: &str) -> Result<Config, ParseError> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected key=value, got {token:?}")))?;
            if entries.iter().any(|(_, k, _)| k == key) {
                return Err(err(line_no, format!("duplicate key {key:?}")));
            }
            entries.push((line_no, key.to_string(), value.to_string()));
        }
    }
    let find = |key: &str| entries.iter().find(|(_, k, _)| k == key);
    let (model_line, _, model_name) = find("model")
        .ok_or_else(|| err(1, "missing required key 'model'"))?
        .clone();

    let known_keys: &[&str] = match model_name.as_str() {
        "free_fermion" => &[
            "model",
            "d",
            "lambda",
            "gamma",
            "dims",
            "twist_axis",
            "threshold",
            "format",
            "twist_n",
            "sizes",
        ],
        "ssh" => &[
            "model",
            "phi",
            "dims",
            "twist_axis",
            "threshold",
            "format",
            "twist_n",
            "sizes",
        ],
        "custom" => &[
            "model",
            "table",
            "dims",
            "twist_axis",
            "threshold",
            "format",
            "twist_n",
            "sizes",
        ],
        other => {
            return Err(err(
                model_line,
                format!("unknown model {other:?} (expected ssh, free_fermion or custom)"),
            ))
        }
    };
    for (line, key, _) in &entries {
        if !known_keys.contains(&key.as_str()) {
            return Err(err(
                *line,
                format!("unknown key {key:?} for model {model_name}"),
            ));
        }
    }
    let require = |key: &str| {
        find(key).cloned().ok_or_else(|| {
            err(
                model_line,
                format!("model {model_name} requires key {key:?}"),
            )
        })
    };

    let model = match model_name.as_str() {
        "free_fermion" => {
            let (dl, _, draw) = require("d")?;
            let dim: usize = draw
                .parse()
                .map_err(|_| err(dl, format!("d: bad integer {draw:?}")))?;
            if !(1..=3).contains(&dim) {
                return Err(err(dl, format!("d must be 1, 2 or 3, got {dim}")));
            }
            let (ll, _, lraw) = require("lambda")?;
            let lambda = parse_value(ll, "lambda", &lraw)?;
            let (gl, _, graw) = require("gamma")?;
            let gamma = parse_value(gl, "gamma", &graw)?;
            if gamma.fixed() == Some(0.0) {
                return Err(err(
                    gl,
                    "trivial twist: gamma = 0 commutes with the twist operator and the \
                     overlap carries no information; choose gamma != 0"
                        .to_string(),
                ));
            }
            ModelConfig::FreeFermion { dim, lambda, gamma }
        }
        "ssh" => {
            let (pl, _, praw) = require("phi")?;
            let phi = parse_value(pl, "phi", &praw)?;
            let in_domain = |v: f64| (-1.0..=1.0).contains(&v);
            match phi {
                Value::Fixed(v) if !in_domain(v) => {
                    return Err(err(pl, format!("phi must lie in [-1, 1], got {v}")))
                }
                Value::Sweep { start, stop, .. } if !in_domain(start) || !in_domain(stop) => {
                    return Err(err(pl, "phi sweep must stay inside [-1, 1]".to_string()))
                }
                _ => {}
            }
            ModelConfig::Ssh { phi }
        }
        "custom" => {
            let (_, _, table) = require("table")?;
            ModelConfig::Custom {
                table: PathBuf::from(table),
            }
        }
        _ => unreachable!(),
    };

    let (dims_line, _, dims_raw) = require("dims")?;
    let dims = parse_usize_list(dims_line, "dims", &dims_raw)?;
    if dims.is_empty() || dims.len() > 3 {
        return Err(err(dims_line, "dims needs 1 to 3 axes"));
    }
    if let Some(&bad) = dims.iter().find(|&&l| l < 2) {
        return Err(err(
            dims_line,
            format!("dims entries must be >= 2, got {bad}"),
        ));
    }
    let model_dim = match &model {
        ModelConfig::FreeFermion { dim, .. } => *dim,
        ModelConfig::Ssh { .. } => 1,
        ModelConfig::Custom { .. } => dims.len(),
    };
    if dims.len() != model_dim {
        return Err(err(
            dims_line,
            format!(
                "model {model_name} is {model_dim}-dimensional but dims has {} axes",
                dims.len()
            ),
        ));
    }

    let twist_axis = match find("twist_axis") {
        Some((l, _, raw)) => {
            let axis: usize = raw
                .parse()
                .map_err(|_| err(*l, format!("twist_axis: bad integer {raw:?}")))?;
            if axis < 1 || axis > dims.len() {
                return Err(err(
                    *l,
                    format!("twist_axis must lie in 1..={}", dims.len()),
                ));
            }
            axis - 1
        }
        None => 0,
    };
    let threshold = match find("threshold") {
        Some((l, _, raw)) => {
            let t: f64 = raw
                .parse()
                .map_err(|_| err(*l, format!("threshold: bad number {raw:?}")))?;
            if !t.is_finite() || t < 0.0 {
                return Err(err(*l, "threshold must be finite and >= 0"));
            }
            t
        }
        None => DEFAULT_ILL_DEFINED_THRESHOLD,
    };
    let format = match find("format") {
        Some((l, _, raw)) => match raw.as_str() {
            "csv" => OutputFormat::Csv,
            "jsonl" => OutputFormat::Jsonl,
            other => {
                return Err(err(
                    *l,
                    format!("format must be csv or jsonl, got {other:?}"),
                ))
            }
        },
        None => OutputFormat::Csv,
    };
    let n_convention = match find("twist_n") {
        Some((l, _, raw)) => match raw.as_str() {
            "total" => NConvention::TotalModes,
            "linear" => NConvention::LinearSize,
            other => {
                return Err(err(
                    *l,
                    format!("twist_n must be total or linear, got {other:?}"),
                ))
            }
        },
        None => NConvention::TotalModes,
    };
    let sizes = match find("sizes") {
        Some((l, _, raw)) => {
            let s = parse_usize_list(*l, "sizes", raw)?;
            if s.len() < 3 {
                return Err(err(*l, "sizes needs at least 3 entries"));
            }
            if let Some(&bad) = s.iter().find(|&&v| v < 2) {
                return Err(err(*l, format!("sizes entries must be >= 2, got {bad}")));
            }
            Some(s)
        }
        None => None,
    };

    let config = Config {
        model,
        dims,
        twist_axis,
        threshold,
        format,
        n_convention,
        sizes,
    };
    let n_sweeps = config
        .model
        .sweep_params()
        .iter()
        .filter(|(_, v)| v.is_sweep())
        .count();
    if n_sweeps > 1 {
        return Err(err(model_line, "at most one parameter may sweep"));
    }
    Ok(config)
}

impl Config {
    /// Instantiate the model with all parameters fixed.
    pub fn fixed_model(&self) -> Result<ModelSpec, CliConfigError> {
        self.fixed_model_with(|path| {
            std::fs::read_to_string(path)
                .map_err(|e| TwistError::Table(format!("reading {}: {e}", path.display())))
        })
    }

    /// Like [`Config::fixed_model`] with a custom table loader (for tests).
    pub fn fixed_model_with(
        &self,
        load: impl Fn(&Path) -> Result<String, TwistError>,
    ) -> Result<ModelSpec, CliConfigError> {
        match &self.model {
            ModelConfig::FreeFermion { dim, lambda, gamma } => {
                let l = lambda.fixed().ok_or(CliConfigError::UnexpectedSweep)?;
                let g = gamma.fixed().ok_or(CliConfigError::UnexpectedSweep)?;
                Ok(ModelSpec::free_fermion(*dim, l, g)?)
            }
            ModelConfig::Ssh { phi } => {
                let p = phi.fixed().ok_or(CliConfigError::UnexpectedSweep)?;
                Ok(ModelSpec::ssh(p)?)
            }
            ModelConfig::Custom { table } => {
                let text = load(table)?;
                Ok(ModelSpec::custom(CustomModel::parse(&text, &self.dims)?))
            }
        }
    }

    /// Turn this config into a sweep: exactly one parameter must sweep.
    pub fn sweep_spec(&self) -> Result<SweepSpec, CliConfigError> {
        let swept: Vec<(&'static str, Value)> = self
            .model
            .sweep_params()
            .into_iter()
            .filter(|(_, v)| v.is_sweep())
            .collect();
        match swept.as_slice() {
            [(name, Value::Sweep { start, stop, count })] => Ok(SweepSpec {
                config: self.clone(),
                param: name,
                start: *start,
                stop: *stop,
                count: *count,
            }),
            [] => Err(CliConfigError::MissingSweep),
            _ => unreachable!("parse_config rejects multiple sweeps"),
        }
    }
}

/// A validated parameter scan: `config` with `param` swept over
/// `count` evenly spaced values in `[start, stop]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub config: Config,
    pub param: &'static str,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|j| self.start + (self.stop - self.start) * j as f64 / (self.count - 1) as f64)
            .collect()
    }

    /// Model at one swept value.
    pub fn model_at(&self, value: f64) -> Result<ModelSpec, TwistError> {
        match (&self.config.model, self.param) {
            (ModelConfig::FreeFermion { dim, gamma, .. }, "lambda") => {
                ModelSpec::free_fermion(*dim, value, gamma.fixed().expect("gamma fixed"))
            }
            (ModelConfig::FreeFermion { dim, lambda, .. }, "gamma") => {
                ModelSpec::free_fermion(*dim, lambda.fixed().expect("lambda fixed"), value)
            }
            (ModelConfig::Ssh { .. }, "phi") => ModelSpec::ssh(value),
            _ => unreachable!("sweep parameter validated at parse time"),
        }
    }
}

/// Errors from turning a parsed config into runnable specs.
#[derive(Debug, thiserror::Error)]
pub enum CliConfigError {
    #[error("this command needs all parameters fixed, but one sweeps")]
    UnexpectedSweep,
    #[error("this command needs one parameter of the form sweep(start,stop,count)")]
    MissingSweep,
    #[error(transparent)]
    Model(#[from] TwistError),
}
