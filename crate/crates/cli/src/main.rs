//! Batch front door: parse config, dispatch generators and experiments,
//! write CSV/JSON artifacts deterministically.
//!
//! Exit codes: 0 pass, 1 experiment fail, 2 usage/validation, 3 runtime.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{CliConfig, CommonArgs, ConfigError, load_config_file, push_override, resolve_params};
use fraclab::drift::DriftSpec;
use fraclab::experiments::{
    ContractionConfig, ExpansionRateConfig, HeatKernelConfig, SemigroupConfig,
    ThresholdScanConfig, VarianceConfig, contraction_rate_experiment, expansion_rate_experiment,
    heat_kernel_probe, semigroup_identity_experiment, threshold_scan,
    variance_identity_experiment,
};
use fraclab::grid::TimeGrid;
use fraclab::hurst::validate_hurst;
use fraclab::noise::{MultiLevelPath, gen_base_fbm_exact, gen_mvn_fbm};
use fraclab::report::{ExperimentReport, write_report};
use fraclab::rng::RngSeed;
use fraclab::sewing::{Germ, dyadic_sew};
use fraclab::solver::{
    PicardInit, SolutionPath, SolverConfig, SolverError, choose_epsilon, picard_solve,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fraclab",
    version,
    about = "Numerical laboratory for fractional noise, sewing, and singular SDEs",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a fractional Brownian path (all levels) as CSV + metadata
    #[command(name = "gen-fbm")]
    GenFbm(GenFbmArgs),
    /// Conditional-variance identity experiment
    #[command(name = "check-variance")]
    CheckVariance(ScalarExpArgs),
    /// Dyadic sewing demonstration on a builtin germ
    #[command(name = "sew-demo")]
    SewDemo(SewDemoArgs),
    /// Solve the SDE by the stopped Picard iteration
    Solve(SolveArgs),
    /// Conditional expansion-order experiment
    #[command(name = "expansion-rate")]
    ExpansionRate(ScalarExpArgs),
    /// Uniqueness/contraction phase scan over (H, α)
    #[command(name = "threshold-scan")]
    ThresholdScan(ScanArgs),
    /// Picard contraction-ratio experiment
    Contraction(ScalarExpArgs),
    /// Conditioning identity for the reparametrised semigroup
    Semigroup(ScalarExpArgs),
    /// Heat-kernel bound consistency probe
    Heatkernel(ScalarExpArgs),
}

#[derive(Args, Debug, Default)]
struct GenFbmArgs {
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long = "n-steps")]
    n_steps: Option<usize>,
    /// "exact" (covariance) or "mvn" (grid kernel with simulated past)
    #[arg(long)]
    generator: Option<String>,
    #[arg(long = "mvn-scale")]
    mvn_scale: Option<bool>,
    #[arg(long = "past-truncation")]
    past_truncation: Option<f64>,
}

/// Flags shared by the scalar-configured experiments; unused flags for a
/// given command are rejected by the target config's deny_unknown_fields.
#[derive(Args, Debug, Default)]
struct ScalarExpArgs {
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long = "n-steps")]
    n_steps: Option<usize>,
    #[arg(long = "n-samples")]
    n_samples: Option<usize>,
    #[arg(long = "n-outer")]
    n_outer: Option<usize>,
    #[arg(long = "n-inner")]
    n_inner: Option<usize>,
    #[arg(long = "n-paths")]
    n_paths: Option<usize>,
    #[arg(long = "n-trials")]
    n_trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    spacings: Option<Vec<f64>>,
    #[arg(long = "t-smalls", value_delimiter = ',')]
    t_smalls: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    drift: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    predictor: Option<String>,
}

#[derive(Args, Debug, Default)]
struct SewDemoArgs {
    /// builtin germ: additive | left-point | square | ito
    #[arg(long)]
    germ: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long = "max-level")]
    max_level: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct SolveArgs {
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "n-steps")]
    n_steps: Option<usize>,
    /// zero | abs_pow | sign_pow | smooth
    #[arg(long)]
    drift: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    generator: Option<String>,
    #[arg(long = "past-truncation")]
    past_truncation: Option<f64>,
    /// zero | linear
    #[arg(long)]
    init: Option<String>,
}

#[derive(Args, Debug, Default)]
struct ScanArgs {
    #[arg(long = "h-list", value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    #[arg(long = "alpha-list", value_delimiter = ',')]
    alpha_list: Option<Vec<f64>>,
    #[arg(long = "n-paths")]
    n_paths: Option<usize>,
    #[arg(long = "n-steps")]
    n_steps: Option<usize>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long = "t-small")]
    t_small: Option<f64>,
    #[arg(long)]
    drift: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GenFbmConfig {
    hurst: f64,
    dim: usize,
    n_steps: usize,
    generator: String,
    mvn_scale: bool,
    past_truncation: f64,
    seed: u64,
}

impl Default for GenFbmConfig {
    fn default() -> Self {
        Self {
            hurst: 0.7,
            dim: 1,
            n_steps: 1024,
            generator: "exact".into(),
            mvn_scale: false,
            past_truncation: 50.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolveConfig {
    hurst: f64,
    alpha: f64,
    drift: String,
    k_level: f64,
    eps: Option<f64>,
    n_steps: usize,
    generator: String,
    past_truncation: f64,
    init: String,
    seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            hurst: 1.5,
            alpha: 0.8,
            drift: "abs_pow".into(),
            k_level: 5.0,
            eps: None,
            n_steps: 1024,
            generator: "exact".into(),
            past_truncation: 50.0,
            init: "zero".into(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SewDemoConfig {
    germ: String,
    s: f64,
    t: f64,
    max_level: usize,
    seed: u64,
}

impl Default for SewDemoConfig {
    fn default() -> Self {
        Self { germ: "left-point".into(), s: 0.0, t: 1.0, max_level: 16, seed: 0 }
    }
}

enum RunError {
    Validation(String),
    Runtime(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Validation(e.0)
    }
}

impl From<fraclab::experiments::ExperimentError> for RunError {
    fn from(e: fraclab::experiments::ExperimentError) -> Self {
        use fraclab::experiments::ExperimentError as E;
        match &e {
            E::Hurst(_) | E::Drift(_) | E::Grid(_) | E::BadConfig(_) => {
                RunError::Validation(e.to_string())
            }
            _ => RunError::Runtime(e.to_string()),
        }
    }
}

impl From<fraclab::report::ReportError> for RunError {
    fn from(e: fraclab::report::ReportError) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // LAB_THREADS, when set, pins the worker count for everything below
    match fraclab::parallel::run_in_pool(|| run(cli)) {
        Ok(code) => code,
        Err(RunError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Resolve the shared parts (config file, output dir, seed overrides).
fn resolve_common(common: &CommonArgs) -> Result<(config::ConfigFile, PathBuf, Option<u64>), RunError> {
    let file = match &common.config {
        Some(path) => load_config_file(path)?,
        None => config::ConfigFile::default(),
    };
    let out = common
        .out
        .clone()
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((file, out, common.seed))
}

/// Run an experiment-shaped command: resolve params, run, write, exit per pass.
fn run_experiment<C, F>(
    common: &CommonArgs,
    command: &str,
    overrides: serde_json::Map<String, serde_json::Value>,
    runner: F,
) -> Result<ExitCode, RunError>
where
    C: serde::de::DeserializeOwned + Serialize,
    F: FnOnce(C) -> Result<ExperimentReport, fraclab::experiments::ExperimentError>,
{
    let (file, out, seed_flag) = resolve_common(common)?;
    let mut overrides = overrides;
    push_override(&mut overrides, "seed", &seed_flag);
    let cfg: C = resolve_params(&file, command, overrides)?;
    let params = serde_json::to_value(&cfg).expect("config serializes");
    let resolved = CliConfig {
        command: command.to_string(),
        seed: params["seed"].as_u64().unwrap_or(0),
        params,
        output_dir: out,
    };
    let report = runner(cfg)?;
    debug_assert_eq!(report.config, resolved.params, "report must echo the parsed config");
    let paths = write_report(&report, &resolved.output_dir)?;
    println!(
        "{} [{}]: {} (seed {}, {:.2}s) -> {}",
        resolved.command,
        report.name,
        if report.pass { "PASS" } else { "FAIL" },
        resolved.seed,
        report.runtime_seconds,
        paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
    );
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn scalar_overrides(args: &ScalarExpArgs) -> serde_json::Map<String, serde_json::Value> {
    let mut m = serde_json::Map::new();
    push_override(&mut m, "hurst", &args.hurst);
    push_override(&mut m, "alpha", &args.alpha);
    push_override(&mut m, "dim", &args.dim);
    push_override(&mut m, "n_steps", &args.n_steps);
    push_override(&mut m, "n_samples", &args.n_samples);
    push_override(&mut m, "n_outer", &args.n_outer);
    push_override(&mut m, "n_inner", &args.n_inner);
    push_override(&mut m, "n_paths", &args.n_paths);
    push_override(&mut m, "n_trials", &args.n_trials);
    push_override(&mut m, "spacings", &args.spacings);
    push_override(&mut m, "t_smalls", &args.t_smalls);
    push_override(&mut m, "k_level", &args.k);
    push_override(&mut m, "eps", &args.eps.map(Some));
    push_override(&mut m, "drift_name", &args.drift);
    push_override(&mut m, "nodes", &args.nodes);
    push_override(&mut m, "cells", &args.cells);
    push_override(&mut m, "predictor", &args.predictor);
    m
}

fn run(cli: Cli) -> Result<ExitCode, RunError> {
    match &cli.command {
        Command::CheckVariance(args) => run_experiment::<VarianceConfig, _>(
            &cli.common,
            "check-variance",
            scalar_overrides(args),
            |cfg| variance_identity_experiment(&cfg),
        ),
        Command::ExpansionRate(args) => run_experiment::<ExpansionRateConfig, _>(
            &cli.common,
            "expansion-rate",
            scalar_overrides(args),
            |cfg| expansion_rate_experiment(&cfg),
        ),
        Command::Contraction(args) => run_experiment::<ContractionConfig, _>(
            &cli.common,
            "contraction",
            scalar_overrides(args),
            |cfg| contraction_rate_experiment(&cfg),
        ),
        Command::Semigroup(args) => run_experiment::<SemigroupConfig, _>(
            &cli.common,
            "semigroup",
            scalar_overrides(args),
            |cfg| semigroup_identity_experiment(&cfg),
        ),
        Command::Heatkernel(args) => run_experiment::<HeatKernelConfig, _>(
            &cli.common,
            "heatkernel",
            scalar_overrides(args),
            |cfg| heat_kernel_probe(&cfg),
        ),
        Command::ThresholdScan(args) => {
            let mut m = serde_json::Map::new();
            push_override(&mut m, "h_list", &args.h_list);
            push_override(&mut m, "alpha_list", &args.alpha_list);
            push_override(&mut m, "n_paths", &args.n_paths);
            push_override(&mut m, "n_steps", &args.n_steps);
            push_override(&mut m, "k_level", &args.k);
            push_override(&mut m, "t_small", &args.t_small);
            push_override(&mut m, "drift_name", &args.drift);
            run_experiment::<ThresholdScanConfig, _>(&cli.common, "threshold-scan", m, |cfg| {
                threshold_scan(&cfg)
            })
        }
        Command::GenFbm(args) => run_gen_fbm(&cli.common, args),
        Command::Solve(args) => run_solve(&cli.common, args),
        Command::SewDemo(args) => run_sew_demo(&cli.common, args),
    }
}

/// Build the (lifted) path for `gen-fbm` and `solve`.
fn build_path(
    hurst: f64,
    dim: usize,
    n_steps: usize,
    generator: &str,
    mvn_scale: bool,
    past_truncation: f64,
    seed: u64,
) -> Result<MultiLevelPath, RunError> {
    let h = validate_hurst(hurst).map_err(|e| RunError::Validation(format!("hurst: {e}")))?;
    let grid = TimeGrid::unit(n_steps);
    match generator {
        "exact" => {
            let base = gen_base_fbm_exact(h.base(), grid, dim, RngSeed::new(seed, 0), mvn_scale)
                .map_err(|e| RunError::Runtime(e.to_string()))?;
            base.lift(h).map_err(|e| RunError::Runtime(e.to_string()))
        }
        "mvn" => {
            let sim = gen_mvn_fbm(h, grid, dim, past_truncation, RngSeed::new(seed, 0))
                .map_err(|e| RunError::Validation(e.to_string()))?;
            Ok(sim.path().clone())
        }
        other => Err(RunError::Validation(format!(
            "generator: expected \"exact\" or \"mvn\", got {other:?}"
        ))),
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, body)?;
    Ok(())
}

fn run_gen_fbm(common: &CommonArgs, args: &GenFbmArgs) -> Result<ExitCode, RunError> {
    let (file, out, seed_flag) = resolve_common(common)?;
    let mut m = serde_json::Map::new();
    push_override(&mut m, "hurst", &args.hurst);
    push_override(&mut m, "dim", &args.dim);
    push_override(&mut m, "n_steps", &args.n_steps);
    push_override(&mut m, "generator", &args.generator);
    push_override(&mut m, "mvn_scale", &args.mvn_scale);
    push_override(&mut m, "past_truncation", &args.past_truncation);
    push_override(&mut m, "seed", &seed_flag);
    let cfg: GenFbmConfig = resolve_params(&file, "gen-fbm", m)?;

    let path = build_path(
        cfg.hurst,
        cfg.dim,
        cfg.n_steps,
        &cfg.generator,
        cfg.mvn_scale,
        cfg.past_truncation,
        cfg.seed,
    )?;
    let csv_path = out.join(format!("fbm-{}.csv", cfg.seed));
    write_file(&csv_path, &path.to_csv_string())?;

    // the kernel magnitude at the truncation horizon documents the MvN bias
    let h_bar = validate_hurst(cfg.hurst).expect("validated above").fractional_part();
    let (past, bias) = if cfg.generator == "mvn" {
        (
            serde_json::json!(cfg.past_truncation),
            serde_json::json!(cfg.past_truncation.powf(h_bar - 1.5)),
        )
    } else {
        (serde_json::Value::Null, serde_json::Value::Null)
    };
    let metadata = serde_json::json!({
        "hurst": cfg.hurst,
        "dim": cfg.dim,
        "seed": cfg.seed,
        "generator": cfg.generator,
        "mvn_scale": cfg.mvn_scale,
        "past_truncation": past,
        "truncation_bias_bound": bias,
    });
    let meta_path = out.join(format!("fbm-{}.meta.json", cfg.seed));
    write_file(&meta_path, &format!("{}\n", serde_json::to_string_pretty(&metadata).unwrap()))?;
    println!("gen-fbm: wrote {} and {}", csv_path.display(), meta_path.display());
    Ok(ExitCode::SUCCESS)
}

fn make_drift(name: &str, alpha: f64) -> Result<DriftSpec, RunError> {
    match name {
        "zero" => Ok(DriftSpec::zero(1)),
        other => fraclab::drift::builtin_drift_by_name(other, alpha, 1)
            .map_err(|e| RunError::Validation(e.to_string())),
    }
}

fn run_solve(common: &CommonArgs, args: &SolveArgs) -> Result<ExitCode, RunError> {
    let (file, out, seed_flag) = resolve_common(common)?;
    let mut m = serde_json::Map::new();
    push_override(&mut m, "hurst", &args.hurst);
    push_override(&mut m, "alpha", &args.alpha);
    push_override(&mut m, "n_steps", &args.n_steps);
    push_override(&mut m, "drift", &args.drift);
    push_override(&mut m, "k_level", &args.k);
    push_override(&mut m, "eps", &args.eps.map(Some));
    push_override(&mut m, "generator", &args.generator);
    push_override(&mut m, "past_truncation", &args.past_truncation);
    push_override(&mut m, "init", &args.init);
    push_override(&mut m, "seed", &seed_flag);
    let cfg: SolveConfig = resolve_params(&file, "solve", m)?;

    let h = validate_hurst(cfg.hurst).map_err(|e| RunError::Validation(format!("hurst: {e}")))?;
    let drift = make_drift(&cfg.drift, cfg.alpha)?;
    let eps = match cfg.eps {
        Some(e) => e,
        None => choose_epsilon(h, cfg.alpha).unwrap_or(0.5 * h.value().min(1.0)),
    };
    let path = build_path(
        cfg.hurst,
        1,
        cfg.n_steps,
        &cfg.generator,
        false,
        cfg.past_truncation,
        cfg.seed,
    )?;
    let solver_cfg = SolverConfig::for_drift(&drift, cfg.k_level, eps);
    let init = match cfg.init.as_str() {
        "zero" => PicardInit::Zero,
        "linear" => PicardInit::LinearUnit,
        other => {
            return Err(RunError::Validation(format!(
                "init: expected \"zero\" or \"linear\", got {other:?}"
            )));
        }
    };

    let (state, converged) = match picard_solve(&path, &drift, &solver_cfg, init) {
        Ok(state) => (state, true),
        Err(SolverError::MaxItersExceeded(state)) => (*state, false),
        Err(e) => return Err(RunError::Runtime(e.to_string())),
    };

    // X = φ + B^H with the chain U¹..U^{⌊H⌋} from the path levels
    let n_pts = path.n_points();
    let x: Vec<f64> = (0..n_pts).map(|i| state.phi[i] + path.top()[i]).collect();
    let u_levels: Vec<Vec<f64>> =
        (0..path.hurst().integer_part()).map(|k| path.level(k).to_vec()).collect();
    let solution = SolutionPath { grid: path.grid().clone(), dim: 1, x, u_levels };
    let csv_path = out.join(format!("solution-{}.csv", cfg.seed));
    write_file(&csv_path, &solution.to_csv_string())?;

    let state_json = serde_json::json!({
        "config": cfg,
        "iteration_index": state.iteration_index,
        "distance_history": state.distance_history,
        "converged": converged,
        "phi": state.phi,
    });
    let json_path = out.join(format!("picard-{}.json", cfg.seed));
    write_file(&json_path, &format!("{}\n", serde_json::to_string_pretty(&state_json).unwrap()))?;
    println!(
        "solve: {} after {} iterations -> {}, {}",
        if converged { "converged" } else { "max_iters" },
        state.iteration_index,
        csv_path.display(),
        json_path.display()
    );
    Ok(if converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_sew_demo(common: &CommonArgs, args: &SewDemoArgs) -> Result<ExitCode, RunError> {
    let (file, out, seed_flag) = resolve_common(common)?;
    let mut m = serde_json::Map::new();
    push_override(&mut m, "germ", &args.germ);
    push_override(&mut m, "s", &args.s);
    push_override(&mut m, "t", &args.t);
    push_override(&mut m, "max_level", &args.max_level);
    push_override(&mut m, "seed", &seed_flag);
    let cfg: SewDemoConfig = resolve_params(&file, "sew-demo", m)?;

    if cfg.t <= cfg.s {
        return Err(RunError::Validation("need s < t".into()));
    }
    let germ = match cfg.germ.as_str() {
        "additive" => Germ::scalar("additive", |s, t| t - s),
        "left-point" => Germ::scalar("left-point", |s, t| s * (t - s)),
        "square" => Germ::scalar("square", |s, t| (t - s) * (t - s)),
        "ito" => {
            // Brownian path sampled at the finest dyadic resolution
            let n = 1usize << cfg.max_level.min(24);
            let span = cfg.t - cfg.s;
            let dt = span / n as f64;
            let mut w = vec![0.0; n + 1];
            let mut z = vec![0.0; n];
            RngSeed::new(cfg.seed, 0).fill_standard_normal(&mut z);
            for i in 0..n {
                w[i + 1] = w[i] + z[i] * dt.sqrt();
            }
            let (s0, sp) = (cfg.s, span);
            Germ::new("ito", 1, move |s, t, out| {
                let i = (((s - s0) / sp) * n as f64).round() as usize;
                let j = (((t - s0) / sp) * n as f64).round() as usize;
                out[0] = w[i] * (w[j] - w[i]);
            })
        }
        other => {
            return Err(RunError::Validation(format!(
                "germ: expected additive | left-point | square | ito, got {other:?}"
            )));
        }
    };

    match dyadic_sew(&germ, cfg.s, cfg.t, cfg.max_level) {
        Ok(result) => {
            let json_path = out.join(format!("sew-{}-{}.json", cfg.germ, cfg.seed));
            write_file(
                &json_path,
                &format!("{}\n", serde_json::to_string_pretty(&result).unwrap()),
            )?;
            println!(
                "sew-demo: limit {:?}, rate {:?} -> {}",
                result.limit,
                result.rate.as_ref().map(|r| r.slope),
                json_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(fraclab::sewing::SewError::NoConvergence) => {
            eprintln!("sew-demo: Riemann sums failed to converge");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(RunError::Validation(e.to_string())),
    }
}
