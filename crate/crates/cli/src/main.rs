//! `twistz` — twist-operator overlaps and geometric phases for two-band
//! lattice models.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use twistz::engine::{EvalOptions, NConvention};
use twistz::models::min_gap;
use twistz::oracle::compare_variants;
use twistz::{check_twist_symmetry, evaluate_with, MomentumGrid};

use twistz_cli::check::run_checks;
use twistz_cli::config::{parse_config, Config, OutputFormat};
use twistz_cli::sweep::{detect_transitions, finite_size_trend, run_sweep, TransitionKind};
use twistz_cli::{emit, CliError};

#[derive(Parser)]
#[command(
    name = "twistz",
    version,
    about = "Ground-state twist-operator overlaps z = <g|exp((2πi/N) Σ x n_x)|g> and \
             geometric phases for two-band lattice models",
    after_help = "Exit codes: 0 success, 1 usage/config error, 2 evaluation error, \
                  3 oracle-check failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (key=value format; see README)
    #[arg(long)]
    config: PathBuf,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config output format
    #[arg(long, value_parser = ["csv", "jsonl"])]
    format: Option<String>,
    /// Worker threads (default: all cores); output is identical for any count
    #[arg(long)]
    workers: Option<usize>,
    /// Override the |z| threshold below which the phase is ill-defined
    #[arg(long)]
    threshold: Option<f64>,
    /// Override the twist axis (1-based)
    #[arg(long)]
    twist_axis: Option<usize>,
    /// Override the twist mode count convention
    #[arg(long, value_parser = ["total", "linear"])]
    twist_n: Option<String>,
    /// Treat singular on-grid modes as hard errors instead of NaN rows
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate z and the geometric phase at a single parameter point
    Point(CommonArgs),
    /// Scan one swept parameter and emit a result table
    Sweep(CommonArgs),
    /// Evaluate a fixed point across the config's `sizes` list
    Trend(CommonArgs),
    /// Scan the spectrum gap over the grid
    Gap(CommonArgs),
    /// Run the oracle validation battery (optionally against a config)
    Check {
        /// Also cross-check the factor routes of this configured model
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn load_config(path: &PathBuf, args: &CommonArgs) -> Result<Config, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(t) = args.threshold {
        if !t.is_finite() || t < 0.0 {
            return Err(CliError::Usage(
                "--threshold must be finite and >= 0".into(),
            ));
        }
        config.threshold = t;
    }
    if let Some(axis) = args.twist_axis {
        if axis < 1 || axis > config.dims.len() {
            return Err(CliError::Usage(format!(
                "--twist-axis must lie in 1..={}",
                config.dims.len()
            )));
        }
        config.twist_axis = axis - 1;
    }
    if let Some(f) = &args.format {
        config.format = match f.as_str() {
            "jsonl" => OutputFormat::Jsonl,
            _ => OutputFormat::Csv,
        };
    }
    if let Some(n) = &args.twist_n {
        config.n_convention = match n.as_str() {
            "linear" => NConvention::LinearSize,
            _ => NConvention::TotalModes,
        };
    }
    Ok(config)
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Evaluation(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Evaluation(format!("writing stdout: {e}"))),
    }
}

fn eval_options(config: &Config) -> EvalOptions {
    EvalOptions {
        threshold: config.threshold,
        n_convention: config.n_convention,
    }
}

fn cmd_point(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config, args)?;
    let model = config
        .fixed_model()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = MomentumGrid::build(&config.dims).map_err(|e| CliError::Usage(e.to_string()))?;
    let symmetry =
        check_twist_symmetry(&model, &grid).map_err(|e| CliError::Evaluation(e.to_string()))?;
    let result = evaluate_with(&model, &grid, config.twist_axis, &eval_options(&config))
        .map_err(|e| CliError::Evaluation(e.to_string()))?;
    if args.strict && !result.singular_modes.is_empty() {
        return Err(CliError::Evaluation(format!(
            "{} singular grid mode(s), first at k = {}",
            result.singular_modes.len(),
            result.singular_modes[0]
        )));
    }
    let gap = min_gap(&model, &grid).map_err(|e| CliError::Evaluation(e.to_string()))?;
    let mut text = String::new();
    text.push_str(&format!("model: {}\n", config.model.name()));
    text.push_str(&format!("dims: {:?}\n", config.dims));
    text.push_str(&format!("twist_axis: {}\n", config.twist_axis + 1));
    text.push_str(&format!("n_modes: {}\n", grid.total_modes()));
    text.push_str(&format!("re_z: {}\n", result.z.re));
    text.push_str(&format!("im_z: {}\n", result.z.im));
    text.push_str(&format!("abs_z: {}\n", result.abs_z()));
    text.push_str(&format!("log_abs_z: {}\n", result.log_abs_z));
    match result.gamma_g {
        Some(g) => text.push_str(&format!("gamma_g: {g}\n")),
        None => text.push_str("gamma_g: nan  # |z| below threshold, phase ill-defined\n"),
    }
    text.push_str(&format!("min_gap: {}\n", gap.min));
    text.push_str(&format!("n_singular: {}\n", result.singular_modes.len()));
    text.push_str(&format!("symmetry_residual: {}\n", symmetry.residual));
    write_output(&args.out, text.as_bytes())
}

fn cmd_sweep(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config, args)?;
    let spec = config
        .sweep_spec()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let table = run_sweep(&spec, args.strict)?;
    for t in detect_transitions(&table) {
        let kind = match t.kind {
            TransitionKind::ZMinimum => "z-minimum",
            TransitionKind::GammaJump => "gamma-jump",
            TransitionKind::IllDefinedOnset => "ill-defined-onset",
        };
        eprintln!("transition: {kind} near {} = {}", spec.param, t.param);
    }
    write_output(&args.out, &emit(&table, config.format))
}

fn cmd_trend(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config, args)?;
    let sizes = config
        .sizes
        .clone()
        .ok_or_else(|| CliError::Usage("trend needs sizes=s1,s2,... in the config".into()))?;
    if matches!(config.model, twistz_cli::config::ModelConfig::Custom { .. }) {
        return Err(CliError::Usage(
            "trend needs a closed-form model; a table covers only its own grid".into(),
        ));
    }
    let model = config
        .fixed_model()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let table = finite_size_trend(&config, &model, &sizes, args.strict)?;
    write_output(&args.out, &emit(&table, config.format))
}

fn cmd_gap(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config, args)?;
    let model = config
        .fixed_model()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = MomentumGrid::build(&config.dims).map_err(|e| CliError::Usage(e.to_string()))?;
    let gap = min_gap(&model, &grid).map_err(|e| CliError::Evaluation(e.to_string()))?;
    let gapless = gap.min <= 1e-12 * model.energy_scale();
    let text = format!(
        "model: {}\ndims: {:?}\nmin_gap: {}\nargmin_k: {}\ngapless_on_grid: {}\n",
        config.model.name(),
        config.dims,
        gap.min,
        gap.argmin,
        gapless
    );
    write_output(&args.out, text.as_bytes())
}

fn cmd_check(config_path: &Option<PathBuf>) -> Result<(), CliError> {
    let loaded = match config_path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
            let config = parse_config(&text)?;
            let model = config
                .fixed_model()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let grid =
                MomentumGrid::build(&config.dims).map_err(|e| CliError::Usage(e.to_string()))?;
            Some((model, grid, config))
        }
        None => None,
    };
    let report = run_checks(loaded.as_ref().map(|(m, g, _)| (m, g)))?;
    for o in &report.outcomes {
        println!(
            "{} {} — {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    if let Some((model, grid, _)) = &loaded {
        if let Ok(rep) = compare_variants(model, grid) {
            if let Some(det) = &rep.determinant {
                println!(
                    "info determinant cross-check (n={}): |z_det| = {:.12}, |z_prod| = {:.12}, \
                     deviation {:.3e} (shrinks as the grid refines)",
                    det.n_cells,
                    det.determinant_z.norm(),
                    det.product_z.norm(),
                    det.abs_z_deviation
                );
            }
        }
    }
    if report.all_pass() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::OracleCheck(
            "one or more oracle checks failed (see FAIL lines above)".into(),
        ))
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let workers = match &cli.command {
        Command::Point(a) | Command::Sweep(a) | Command::Trend(a) | Command::Gap(a) => a.workers,
        Command::Check { workers, .. } => *workers,
    };
    let run = || match &cli.command {
        Command::Point(a) => cmd_point(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Trend(a) => cmd_trend(a),
        Command::Gap(a) => cmd_gap(a),
        Command::Check { config, .. } => cmd_check(config),
    };
    match workers {
        Some(n) => {
            if n == 0 {
                return Err(CliError::Usage("--workers must be >= 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("building worker pool: {e}")))?;
            pool.install(run)
        }
        None => run(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
