//! `curveflow`: command-line orchestration of flow runs, uniqueness audits,
//! and the tensor-identity suite.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical abort,
//! 4 identity or audit failure.

mod config;

use std::fs;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curveflow_core::error::Error as CoreError;
use curveflow_core::flows::{FlowSpec, XcfAlgebra};
use curveflow_core::grid;
use curveflow_core::identities::{run_suite, suite_passed, SuiteOptions};
use curveflow_core::prolongation::{
    audit_frame_ricci_pair, audit_frame_xcf_pair, audit_pair, choose_weights, EnergySeries,
    GronwallReport, Verdict,
};
use curveflow_core::runtime::{
    run_flow_frame, run_flow_grid, save_frame_trajectory, save_grid_trajectory, FrameTrajectory,
    GridTrajectory, MANIFEST_SCHEMA_VERSION,
};

use config::{build_scene, load_config, FileConfig, Scene, CONFIG_SCHEMA_VERSION};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Error carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or environment (exit 2).
    Config(String),
    /// The computation itself failed or left its validity domain (exit 3).
    Numerical(String),
    /// A gate the tool checks — identity suite or audit verdict — failed (exit 4).
    Gate(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Gate(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Gate(m) => m,
        }
    }

    /// Core error surfaced while interpreting configuration or input files.
    pub fn from_core_config(e: CoreError) -> CliError {
        CliError::Config(e.to_string())
    }

    /// Core error surfaced while computing: health failures abort numerically,
    /// everything else indicates the run was set up wrong.
    pub fn from_core_run(e: CoreError) -> CliError {
        match e {
            CoreError::NonFinite { .. }
            | CoreError::LostPositivity { .. }
            | CoreError::SingularMetric { .. }
            | CoreError::NonInvertibleEinstein { .. }
            | CoreError::DefinitenessViolated { .. }
            | CoreError::AsymmetricMetric { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "curveflow",
    version,
    about = "Geometric evolution engine: curvature flows, uniqueness audits, identity checks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one flow trajectory and store snapshots + diagnostics.
    Run {
        /// Run configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's [output] section).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the perturbation seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a pair of legs and audit their difference energy.
    Audit {
        /// Leg configuration; pass twice for an explicit pair, once to pair a
        /// base run with its [perturbation] variant.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        /// Output directory for energy.csv and verdict.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the perturbation seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the discrete tensor-identity suite over the built-in corpus.
    Identities {
        /// Only run checks whose name contains this substring.
        #[arg(long)]
        scope: Option<String>,
        /// Directory for the JSON report (printed to stdout regardless).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Negative control: flip a curvature sign convention on purpose.
        #[arg(long, hide = true)]
        corrupt_convention: bool,
    },
    /// Print build and format information.
    Info,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = validate_threads_env() {
        eprintln!("error: {}", e.message());
        return ExitCode::from(e.exit_code());
    }
    let result = match cli.cmd {
        Command::Run { config, out, seed } => cmd_run(&config, out, seed),
        Command::Audit { config, out, seed } => cmd_audit(&config, out, seed),
        Command::Identities {
            scope,
            out,
            corrupt_convention,
        } => cmd_identities(scope, out, corrupt_convention),
        Command::Info => cmd_info(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

/// `CURVEFLOW_THREADS` caps worker parallelism. Execution in this build is
/// sequential, so any positive value is honored trivially; the variable is
/// still validated so schedulers get an early failure on bad values.
fn validate_threads_env() -> Result<usize, CliError> {
    match std::env::var("CURVEFLOW_THREADS") {
        Err(_) => Ok(1),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Config(format!(
                "CURVEFLOW_THREADS must be a positive integer, got \"{raw}\""
            ))),
        },
    }
}

fn out_dir(cfg: &FileConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Config(format!("io error: {e}"))
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn cmd_run(config_path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<(), CliError> {
    let cfg = load_config(config_path)?;
    let dir = out_dir(&cfg, out);
    let effective_seed = seed.or(cfg.perturbation.as_ref().map(|p| p.seed));
    match build_scene(&cfg, true, seed)? {
        Scene::Chart {
            g0,
            spec,
            run,
            static_only,
        } => {
            if static_only {
                return run_static_algebra(&g0, &spec, &dir);
            }
            let traj = run_flow_grid(&g0, &spec, &run).map_err(CliError::from_core_run)?;
            fs::create_dir_all(&dir).map_err(io_err)?;
            save_grid_trajectory(&dir, &traj, effective_seed)
                .map_err(CliError::from_core_run)?;
            write_grid_diagnostics(&dir.join("diagnostics.csv"), &traj)?;
            finish_run(&dir, traj.times.len(), traj.stopped.map(|s| format!("{s:?}")))
        }
        Scene::Frame { f0, spec, run } => {
            let traj = run_flow_frame(&f0, &spec, &run).map_err(CliError::from_core_run)?;
            fs::create_dir_all(&dir).map_err(io_err)?;
            save_frame_trajectory(&dir, &traj, effective_seed)
                .map_err(CliError::from_core_run)?;
            write_frame_diagnostics(&dir.join("diagnostics.csv"), &traj)?;
            finish_run(&dir, traj.times.len(), traj.stopped.map(|s| format!("{s:?}")))
        }
    }
}

fn finish_run(dir: &Path, samples: usize, stopped: Option<String>) -> Result<(), CliError> {
    match stopped {
        None => {
            println!("run complete: {samples} samples in {}", dir.display());
            Ok(())
        }
        Some(reason) => {
            println!(
                "run aborted early ({reason}); partial trajectory ({samples} samples) in {}",
                dir.display()
            );
            Err(CliError::Numerical(format!("run stopped early: {reason}")))
        }
    }
}

/// `static_only` evaluation: build the cross-curvature algebra on the initial
/// metric and report its health without evolving.
fn run_static_algebra(
    g0: &curveflow_core::MetricField,
    spec: &FlowSpec,
    dir: &Path,
) -> Result<(), CliError> {
    let sigma = match spec {
        FlowSpec::Xcf { sigma } => *sigma,
        _ => unreachable!("static_only is gated to xcf during validation"),
    };
    let alg = XcfAlgebra::build(g0).map_err(CliError::from_core_run)?;
    let defect = alg.formula_defect(g0).map_err(CliError::from_core_run)?;
    let mut min_p = f64::INFINITY;
    for &p in alg.det_ratio().components() {
        min_p = min_p.min(p.abs());
    }
    let (margin, node) = alg.margin(g0, sigma).map_err(CliError::from_core_run)?;
    fs::create_dir_all(dir).map_err(io_err)?;
    let json = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "flow": "xcf",
        "sigma": sigma,
        "formula_defect": defect,
        "min_abs_det_ratio": min_p,
        "margin": margin,
        "margin_node": node,
    });
    write_json(&dir.join("algebra.json"), &json)?;
    println!(
        "static cross-curvature algebra: formula defect {defect:e}, min |P| {min_p:e}, margin {margin:e}"
    );
    Ok(())
}

fn write_grid_diagnostics(path: &Path, traj: &GridTrajectory<f64>) -> Result<(), CliError> {
    let mut out = csv_file(path)?;
    writeln!(out, "t,min_eigenvalue,curvature_sup,lambda_margin").map_err(io_err)?;
    for (t, d) in traj.times.iter().zip(&traj.diagnostics) {
        let margin = d.lambda_margin.map(|m| m.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", t, d.min_eigenvalue, d.curvature_sup, margin)
            .map_err(io_err)?;
    }
    Ok(())
}

fn write_frame_diagnostics(path: &Path, traj: &FrameTrajectory<f64>) -> Result<(), CliError> {
    let mut out = csv_file(path)?;
    writeln!(out, "t,a1,a2,a3,scalar_curvature,lambda_margin").map_err(io_err)?;
    for ((t, f), d) in traj.times.iter().zip(&traj.snapshots).zip(&traj.diagnostics) {
        let margin = d.margin.map(|m| m.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t, f.coeffs[0], f.coeffs[1], f.coeffs[2], d.scalar_curvature, margin
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn csv_file(path: &Path) -> Result<std::io::BufWriter<fs::File>, CliError> {
    Ok(std::io::BufWriter::new(
        fs::File::create(path).map_err(io_err)?,
    ))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("json encoding: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err)
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

fn cmd_audit(configs: &[PathBuf], out: Option<PathBuf>, seed: Option<u64>) -> Result<(), CliError> {
    let (cfg_a, cfg_b, scene_a, scene_b) = match configs {
        [single] => {
            let cfg = load_config(single)?;
            if cfg.perturbation.is_none() {
                return Err(CliError::Config(
                    "audit with one config needs a [perturbation] section; \
                     pass --config twice for an explicit pair"
                        .into(),
                ));
            }
            let base = build_scene(&cfg, false, seed)?;
            let tilde = build_scene(&cfg, true, seed)?;
            let cfg_b = load_config(single)?;
            (cfg, cfg_b, base, tilde)
        }
        [a, b] => {
            let cfg_a = load_config(a)?;
            let cfg_b = load_config(b)?;
            let scene_a = build_scene(&cfg_a, true, seed)?;
            let scene_b = build_scene(&cfg_b, true, seed)?;
            (cfg_a, cfg_b, scene_a, scene_b)
        }
        _ => {
            return Err(CliError::Config(
                "audit takes --config once (base + perturbation) or twice (explicit pair)".into(),
            ))
        }
    };
    let dir = out_dir(&cfg_a, out);
    fs::create_dir_all(&dir).map_err(io_err)?;

    match (scene_a, scene_b) {
        (
            Scene::Chart {
                g0: ga,
                spec: spec_a,
                run: run_a,
                static_only: false,
            },
            Scene::Chart {
                g0: gb,
                spec: spec_b,
                run: run_b,
                static_only: false,
            },
        ) => {
            if spec_a != spec_b {
                return Err(CliError::Config(
                    "audit legs evolve different flows; both legs must share the flow spec".into(),
                ));
            }
            if !same_geometry(&ga, &gb) {
                return Err(CliError::Config(
                    "audit legs live on different grids; extents, lengths and stencil order must match"
                        .into(),
                ));
            }
            let ta = run_flow_grid(&ga, &spec_a, &run_a).map_err(CliError::from_core_run)?;
            let tb = run_flow_grid(&gb, &spec_b, &run_b).map_err(CliError::from_core_run)?;
            check_time_grids(&ta.times, &tb.times, run_a.t_end)?;
            let (k, alpha) = audit_parameters(&cfg_a, &cfg_b, &spec_a)?;
            let (series, report) = audit_pair(&ta.times, &ta.snapshots, &tb.snapshots, k, alpha)
                .map_err(CliError::from_core_run)?;
            emit_audit(&dir, &spec_a, Some(k), Some(alpha), &series, &report)
        }
        (
            Scene::Frame {
                f0: fa,
                spec: spec_a,
                run: run_a,
            },
            Scene::Frame {
                f0: fb,
                spec: spec_b,
                run: run_b,
            },
        ) => {
            if spec_a != spec_b {
                return Err(CliError::Config(
                    "audit legs evolve different flows; both legs must share the flow spec".into(),
                ));
            }
            let ta = run_flow_frame(&fa, &spec_a, &run_a).map_err(CliError::from_core_run)?;
            let tb = run_flow_frame(&fb, &spec_b, &run_b).map_err(CliError::from_core_run)?;
            check_time_grids(&ta.times, &tb.times, run_a.t_end)?;
            let (series, report) = match spec_a {
                FlowSpec::Xcf { .. } => {
                    audit_frame_xcf_pair(&ta.times, &ta.snapshots, &tb.snapshots)
                        .map_err(CliError::from_core_run)?
                }
                FlowSpec::Ricci => {
                    audit_frame_ricci_pair(&ta.times, &ta.snapshots, &tb.snapshots)
                        .map_err(CliError::from_core_run)?
                }
                _ => unreachable!("frame scenes are gated to ricci/xcf during validation"),
            };
            emit_audit(&dir, &spec_a, None, None, &series, &report)
        }
        _ => Err(CliError::Config(
            "audit legs must share the same backend (and cannot be static_only)".into(),
        )),
    }
}

fn same_geometry(a: &curveflow_core::MetricField, b: &curveflow_core::MetricField) -> bool {
    let (ga, gb) = (a.grid(), b.grid());
    ga.extents() == gb.extents() && ga.lengths() == gb.lengths() && ga.fd_order() == gb.fd_order()
}

fn check_time_grids(ta: &[f64], tb: &[f64], t_end: f64) -> Result<(), CliError> {
    if ta.len() != tb.len() {
        return Err(CliError::Config(format!(
            "audit legs sample different time grids ({} vs {} samples); \
             align time.dt × time.sample_every",
            ta.len(),
            tb.len()
        )));
    }
    let tol = 1e-9 * t_end.max(1.0);
    for (x, y) in ta.iter().zip(tb) {
        if (x - y).abs() > tol {
            return Err(CliError::Config(format!(
                "audit legs sample different time grids (t = {x} vs {y})"
            )));
        }
    }
    Ok(())
}

/// Difference-operator order and scalar coupling for the audit: explicit
/// `[audit]` keys win, otherwise both are read off the flow.
fn audit_parameters(
    cfg_a: &FileConfig,
    cfg_b: &FileConfig,
    spec: &FlowSpec,
) -> Result<(usize, f64), CliError> {
    let section = cfg_a.audit.or(cfg_b.audit);
    let (dk, da) = match spec {
        FlowSpec::Ricci => (0, 0.0),
        FlowSpec::L2 => (1, 0.0),
        FlowSpec::Family { k, alpha, .. } => (*k, *alpha),
        FlowSpec::Xcf { .. } => {
            return Err(CliError::Config(
                "chart audits cover the polynomial family; the cross term flow audits on the frame backend"
                    .into(),
            ))
        }
    };
    let k = section.and_then(|s| s.k).unwrap_or(dk);
    let alpha = section.and_then(|s| s.alpha).unwrap_or(da);
    Ok((k, alpha))
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::PassWithFloor => "pass_with_floor",
        Verdict::Fail => "fail",
    }
}

fn spec_beta(spec: &FlowSpec) -> Option<f64> {
    match spec {
        FlowSpec::Ricci => Some(0.0),
        FlowSpec::L2 => Some(-0.5),
        FlowSpec::Family { beta, .. } => Some(*beta),
        FlowSpec::Xcf { .. } => None,
    }
}

fn emit_audit(
    dir: &Path,
    spec: &FlowSpec,
    k: Option<usize>,
    alpha: Option<f64>,
    series: &EnergySeries<f64>,
    report: &GronwallReport<f64>,
) -> Result<(), CliError> {
    let csv = csv_file(&dir.join("energy.csv"))?;
    series.write_csv(csv).map_err(io_err)?;
    let json = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "flow": spec.name(),
        "k": k,
        "alpha": alpha,
        "beta": spec_beta(spec),
        "r": series.r,
        "eps": series.eps,
        "C_fit": report.c_fit,
        "max_violation": report.max_violation,
        "verdict": verdict_str(report.verdict),
        "floor": report.floor,
        "samples_used": report.samples_used,
    });
    write_json(&dir.join("verdict.json"), &json)?;
    println!(
        "audit verdict: {} (C_fit {:e}, max violation {:e}, E(0) {:e}, {} samples) → {}",
        verdict_str(report.verdict),
        report.c_fit,
        report.max_violation,
        series.e.first().copied().unwrap_or(f64::NAN),
        series.times.len(),
        dir.display()
    );
    match report.verdict {
        Verdict::Pass | Verdict::PassWithFloor => Ok(()),
        Verdict::Fail => Err(CliError::Gate(format!(
            "difference energy violates its exponential bound (max violation {:e})",
            report.max_violation
        ))),
    }
}

// ---------------------------------------------------------------------------
// identities
// ---------------------------------------------------------------------------

fn cmd_identities(
    scope: Option<String>,
    out: Option<PathBuf>,
    corrupt_convention: bool,
) -> Result<(), CliError> {
    let opts = SuiteOptions {
        scope,
        corrupt_convention,
    };
    let reports = run_suite::<f64>(&opts).map_err(CliError::from_core_run)?;
    if reports.is_empty() {
        return Err(CliError::Config(
            "scope matched no identity checks; run `curveflow identities` to see all names".into(),
        ));
    }
    println!(
        "{:<34} {:<18} {:>5} {:>12} {:>12} {:>8}  {}",
        "check", "corpus", "order", "defect", "tolerance", "ratio", "result"
    );
    for r in &reports {
        let ratio = r
            .refinement_ratio
            .map(|x| format!("{x:.2}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<34} {:<18} {:>5} {:>12.3e} {:>12.3e} {:>8}  {}",
            r.check,
            r.grid,
            r.fd_order,
            r.defect,
            r.tolerance,
            ratio,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    let passed = suite_passed(&reports);
    if let Some(dir) = out {
        fs::create_dir_all(&dir).map_err(io_err)?;
        let json = serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "passed": passed,
            "reports": reports,
        });
        write_json(&dir.join("identities.json"), &json)?;
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!(
        "identity suite: {}/{} checks pass",
        reports.len() - failed,
        reports.len()
    );
    if passed {
        Ok(())
    } else {
        Err(CliError::Gate(format!(
            "{failed} identity check(s) failed"
        )))
    }
}

// ---------------------------------------------------------------------------
// info
// ---------------------------------------------------------------------------

fn cmd_info() -> Result<(), CliError> {
    let threads = validate_threads_env()?;
    println!("curveflow {}", env!("CARGO_PKG_VERSION"));
    println!("flows:     ricci | l2 | family(k, alpha, beta, lambda) | xcf(sigma)");
    println!("backends:  chart (periodic grid, dims 2-4, extents >= {}, stencil order 2 or 4)", grid::MIN_EXTENT);
    println!("           frame (homogeneous 3D, preset su2)");
    println!("schemas:   config v{CONFIG_SCHEMA_VERSION}, manifest v{MANIFEST_SCHEMA_VERSION}, reports v{REPORT_SCHEMA_VERSION}");
    println!("threads:   {threads} (CURVEFLOW_THREADS; execution is sequential in this build)");
    println!("formats:   docs/formats.md in the source tree describes every emitted file");
    let w = choose_weights(0.0, 3).map_err(CliError::from_core_config)?;
    println!(
        "defaults:  audit weights at (alpha = 0, n = 3): r = {}, eps = {}, a = {}, b = {}",
        w.r, w.eps, w.a, w.b
    );
    Ok(())
}
