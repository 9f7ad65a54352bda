//! Parameter sweeps, finite-size trends, and transition detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use twistz::engine::EvalOptions;
use twistz::models::min_gap;
use twistz::{evaluate_with, ModelSpec, MomentumGrid, TwistError};

use crate::config::{Config, SweepSpec};
use crate::CliError;

/// One output row of a scan.
///
/// A singular or otherwise unevaluable point leaves the `z` fields NaN (and
/// `gamma_g` empty) but keeps `min_gap` and the singular-mode count, so the
/// row still brackets critical points. `gamma_g` is `None` either when the
/// row is NaN or when `|z|` sits below the ill-defined threshold; the two
/// cases are told apart by `abs_z` being NaN or finite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub param: f64,
    #[serde(with = "nan_as_null")]
    pub re_z: f64,
    #[serde(with = "nan_as_null")]
    pub im_z: f64,
    #[serde(with = "nan_as_null")]
    pub abs_z: f64,
    #[serde(with = "nan_as_null")]
    pub log_abs_z: f64,
    pub gamma_g: Option<f64>,
    #[serde(with = "nan_as_null")]
    pub min_gap: f64,
    pub n_singular: usize,
}

impl ResultRow {
    /// Bitwise equality (NaN-aware), for round-trip checks.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        let f = |a: f64, b: f64| a.to_bits() == b.to_bits();
        f(self.param, other.param)
            && f(self.re_z, other.re_z)
            && f(self.im_z, other.im_z)
            && f(self.abs_z, other.abs_z)
            && f(self.log_abs_z, other.log_abs_z)
            && match (self.gamma_g, other.gamma_g) {
                (None, None) => true,
                (Some(a), Some(b)) => f(a, b),
                _ => false,
            }
            && f(self.min_gap, other.min_gap)
            && self.n_singular == other.n_singular
    }
}

/// NaN <-> null for JSON (JSON has no NaN literal).
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// How a row with singular on-grid modes is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularPolicy {
    /// Blank the `z` fields (sweeps: keeps critical points bracketable
    /// without letting a partial product masquerade as the full one).
    Nan,
    /// Keep the partial product over the non-singular modes (finite-size
    /// trends at a critical point, where the excluded mode is the point).
    Keep,
    /// Hard error.
    Strict,
}

fn nan_row(param: f64, min_gap: f64, n_singular: usize) -> ResultRow {
    ResultRow {
        param,
        re_z: f64::NAN,
        im_z: f64::NAN,
        abs_z: f64::NAN,
        log_abs_z: f64::NAN,
        gamma_g: None,
        min_gap,
        n_singular,
    }
}

fn row_for(
    model: &ModelSpec,
    grid: &MomentumGrid,
    axis: usize,
    options: &EvalOptions,
    param: f64,
    policy: SingularPolicy,
) -> Result<ResultRow, TwistError> {
    let gap = min_gap(model, grid)?.min;
    match evaluate_with(model, grid, axis, options) {
        Ok(res) => {
            if !res.singular_modes.is_empty() && policy == SingularPolicy::Strict {
                return Err(TwistError::GapClosure {
                    k: res.singular_modes[0],
                });
            }
            if !res.singular_modes.is_empty() && policy == SingularPolicy::Nan {
                return Ok(nan_row(param, gap, res.singular_modes.len()));
            }
            Ok(ResultRow {
                param,
                re_z: res.z.re,
                im_z: res.z.im,
                abs_z: res.abs_z(),
                log_abs_z: res.log_abs_z,
                gamma_g: res.gamma_g,
                min_gap: gap,
                n_singular: res.singular_modes.len(),
            })
        }
        Err(e) if policy == SingularPolicy::Strict => Err(e),
        Err(TwistError::TrivialTwist) | Err(TwistError::AllModesSingular) => {
            Ok(nan_row(param, gap, grid.total_modes()))
        }
        Err(e) => Err(e),
    }
}

/// Run a parameter sweep. One row per swept value, in sweep order regardless
/// of how many workers execute the points.
pub fn run_sweep(spec: &SweepSpec, strict: bool) -> Result<ResultTable, CliError> {
    let grid =
        MomentumGrid::build(&spec.config.dims).map_err(|e| CliError::Usage(e.to_string()))?;
    let options = EvalOptions {
        threshold: spec.config.threshold,
        n_convention: spec.config.n_convention,
    };
    let policy = if strict {
        SingularPolicy::Strict
    } else {
        SingularPolicy::Nan
    };
    let outcomes: Vec<Result<ResultRow, TwistError>> = spec
        .values()
        .par_iter()
        .map(|&v| {
            let model = spec.model_at(v)?;
            row_for(&model, &grid, spec.config.twist_axis, &options, v, policy)
        })
        .collect();
    let mut rows = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        rows.push(o.map_err(|e| CliError::Evaluation(e.to_string()))?);
    }
    Ok(ResultTable { rows })
}

/// Evaluate one fixed model across a list of linear sizes (`dims = [s; D]`),
/// keyed by total mode count. Rows keep the partial product when a critical
/// mode sits on the grid; `log_abs_z` supports underflow-safe trend fitting.
pub fn finite_size_trend(
    config: &Config,
    model: &ModelSpec,
    sizes: &[usize],
    strict: bool,
) -> Result<ResultTable, CliError> {
    if sizes.len() < 3 {
        return Err(CliError::Usage(
            "finite-size trends need at least 3 sizes".into(),
        ));
    }
    let options = EvalOptions {
        threshold: config.threshold,
        n_convention: config.n_convention,
    };
    let policy = if strict {
        SingularPolicy::Strict
    } else {
        SingularPolicy::Keep
    };
    let d = model.dim();
    let outcomes: Vec<Result<ResultRow, TwistError>> = sizes
        .par_iter()
        .map(|&s| {
            let grid = MomentumGrid::build(&vec![s; d])?;
            row_for(
                model,
                &grid,
                config.twist_axis,
                &options,
                grid.total_modes() as f64,
                policy,
            )
        })
        .collect();
    let mut rows = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        rows.push(o.map_err(|e| CliError::Evaluation(e.to_string()))?);
    }
    Ok(ResultTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    /// Interior local minimum of `|z|` below 0.1.
    ZMinimum,
    /// `|Δγ_g| > π/2` (mod 2π) between adjacent defined rows.
    GammaJump,
    /// First row whose `|z|` is finite but below the ill-defined threshold.
    IllDefinedOnset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub param: f64,
    pub kind: TransitionKind,
}

const Z_MINIMUM_CEILING: f64 = 0.1;
const GAMMA_JUMP_THRESHOLD: f64 = std::f64::consts::FRAC_PI_2;

/// Scan a sweep table for transition signatures.
///
/// NaN rows are skipped; neighbor relations are taken on the surviving
/// subsequence. Gamma jumps are attributed to the midpoint of the bracketing
/// parameter interval.
pub fn detect_transitions(table: &ResultTable) -> Vec<Transition> {
    let mut out = Vec::new();
    let defined: Vec<&ResultRow> = table.rows.iter().filter(|r| !r.abs_z.is_nan()).collect();
    for w in defined.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        if b.abs_z < Z_MINIMUM_CEILING && b.abs_z < a.abs_z && b.abs_z < c.abs_z {
            out.push(Transition {
                param: b.param,
                kind: TransitionKind::ZMinimum,
            });
        }
    }
    let with_gamma: Vec<&ResultRow> = table.rows.iter().filter(|r| r.gamma_g.is_some()).collect();
    for w in with_gamma.windows(2) {
        let (a, b) = (w[0], w[1]);
        let delta = twistz::principal_angle(b.gamma_g.unwrap() - a.gamma_g.unwrap()).abs();
        if delta > GAMMA_JUMP_THRESHOLD {
            out.push(Transition {
                param: 0.5 * (a.param + b.param),
                kind: TransitionKind::GammaJump,
            });
        }
    }
    if let Some(first_ill) = table
        .rows
        .iter()
        .find(|r| !r.abs_z.is_nan() && r.gamma_g.is_none())
    {
        out.push(Transition {
            param: first_ill.param,
            kind: TransitionKind::IllDefinedOnset,
        });
    }
    out
}
