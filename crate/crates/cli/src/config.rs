//! TOML run configuration: schema, validation with field-level messages, and
//! construction of the initial data + schedule described by a file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use curveflow_core::field::sym2_from_coords;
use curveflow_core::flows::{FlowSpec, LambdaPreset};
use curveflow_core::grid::FdOrder;
use curveflow_core::runtime::{load_grid_trajectory, RunConfig, RunManifest};
use curveflow_core::{ChartGrid, FrameMetric, MetricField, TensorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}

/// One run configuration file. Unknown keys are rejected so typos surface as
/// field-level errors instead of silently falling back to defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub flow: FlowSection,
    #[serde(default)]
    pub backend: BackendSection,
    pub grid: Option<GridSection>,
    pub frame: Option<FrameSection>,
    pub initial: InitialSection,
    pub time: TimeSection,
    pub perturbation: Option<PerturbationSection>,
    pub audit: Option<AuditSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub kind: String,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<String>,
    pub sigma: Option<i8>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    #[serde(default = "default_backend_kind")]
    pub kind: String,
    #[serde(default)]
    pub static_only: bool,
}

fn default_backend_kind() -> String {
    "chart".into()
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            kind: default_backend_kind(),
            static_only: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub extents: Vec<usize>,
    pub lengths: Option<Vec<f64>>,
    #[serde(default = "default_fd_order")]
    pub fd_order: u32,
}

fn default_fd_order() -> u32 {
    4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    #[serde(default = "default_frame_preset")]
    pub preset: String,
}

fn default_frame_preset() -> String {
    "su2".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub recipe: String,
    pub amplitude: Option<f64>,
    pub modes: Option<u32>,
    pub coeffs: Option<[f64; 3]>,
    pub path: Option<PathBuf>,
    pub sample: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default)]
    pub dt: DtPolicy,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "default_safety")]
    pub safety: f64,
}

fn default_sample_every() -> usize {
    1
}

fn default_safety() -> f64 {
    0.5
}

/// `dt = "auto"` derives the step from the stability bound; a number is
/// honored exactly.
#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(untagged)]
pub enum DtPolicy {
    #[default]
    #[serde(skip)]
    AutoDefault,
    Auto(AutoTag),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl DtPolicy {
    pub fn as_option(self) -> Option<f64> {
        match self {
            DtPolicy::AutoDefault | DtPolicy::Auto(_) => None,
            DtPolicy::Fixed(dt) => Some(dt),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    pub amplitude: f64,
    pub mode: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub direction: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    pub k: Option<usize>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Fully validated initial data plus schedule, ready to run.
pub enum Scene {
    Chart {
        g0: MetricField,
        spec: FlowSpec,
        run: RunConfig<f64>,
        static_only: bool,
    },
    Frame {
        f0: FrameMetric,
        spec: FlowSpec,
        run: RunConfig<f64>,
    },
}

pub fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: FileConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if cfg.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "{}: schema_version {} unsupported (this build reads version {CONFIG_SCHEMA_VERSION})",
            path.display(),
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

pub fn flow_spec(f: &FlowSection) -> Result<FlowSpec, CliError> {
    let reject = |field: &str, wanted: &str| -> Result<(), CliError> {
        config_err(format!("flow.{field} applies only to kind = \"{wanted}\""))
    };
    let spec = match f.kind.as_str() {
        "ricci" | "l2" => {
            if f.k.is_some() || f.alpha.is_some() || f.beta.is_some() || f.lambda.is_some() {
                reject("k/alpha/beta/lambda", "family")?;
            }
            if f.sigma.is_some() {
                reject("sigma", "xcf")?;
            }
            if f.kind == "ricci" {
                FlowSpec::Ricci
            } else {
                FlowSpec::L2
            }
        }
        "family" => {
            if f.sigma.is_some() {
                reject("sigma", "xcf")?;
            }
            let k = match f.k {
                Some(k) => k,
                None => return config_err("flow.k is required for kind = \"family\""),
            };
            let lambda = match f.lambda.as_deref() {
                None | Some("zero") => LambdaPreset::Zero,
                Some("l2_quadratics") => LambdaPreset::L2Quadratics,
                Some(other) => {
                    return config_err(format!(
                        "flow.lambda must be \"zero\" or \"l2_quadratics\", got \"{other}\""
                    ))
                }
            };
            FlowSpec::Family {
                k,
                alpha: f.alpha.unwrap_or(0.0),
                beta: f.beta.unwrap_or(0.0),
                lambda,
            }
        }
        "xcf" => {
            if f.k.is_some() || f.alpha.is_some() || f.beta.is_some() || f.lambda.is_some() {
                reject("k/alpha/beta/lambda", "family")?;
            }
            FlowSpec::Xcf {
                sigma: f.sigma.unwrap_or(1),
            }
        }
        other => {
            return config_err(format!(
                "flow.kind must be one of ricci | l2 | family | xcf, got \"{other}\""
            ))
        }
    };
    Ok(spec)
}

fn run_schedule(t: &TimeSection) -> Result<RunConfig<f64>, CliError> {
    if !(t.t_end.is_finite() && t.t_end > 0.0) {
        return config_err("time.t_end must be a positive finite number");
    }
    if let Some(dt) = t.dt.as_option() {
        if !(dt.is_finite() && dt > 0.0) {
            return config_err("time.dt must be \"auto\" or a positive number");
        }
    }
    if t.sample_every == 0 {
        return config_err("time.sample_every must be at least 1");
    }
    if !(t.safety.is_finite() && t.safety > 0.0 && t.safety <= 1.0) {
        return config_err("time.safety must lie in (0, 1]");
    }
    Ok(RunConfig {
        t_end: t.t_end,
        dt: t.dt.as_option(),
        sample_every: t.sample_every,
        safety: t.safety,
    })
}

/// Smooth random symmetric 2-tensor built from low Fourier modes and
/// sup-normalized; the deterministic perturbation shape used for pair runs.
pub fn random_sym2(grid: &Arc<ChartGrid>, seed: u64) -> TensorField {
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = 3usize;
    let mut table = vec![];
    for _ in 0..(dim * dim * modes) {
        let c: f64 = rng.gen_range(-1.0..1.0);
        let kvec: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1i32..2) as f64).collect();
        let ph: f64 = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
        table.push((c, kvec, ph));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut h = sym2_from_coords(grid.clone(), move |x, i, j| {
        let (a, b) = (i.min(j), i.max(j));
        let base = (a * dim + b) * modes;
        let mut v = 0.0;
        for m in 0..modes {
            let (c, ref kvec, ph) = table[base + m];
            let dot: f64 = kvec.iter().zip(x.iter()).map(|(k, xi)| k * xi).sum();
            v += c * (tau * dot + ph).cos();
        }
        v
    });
    let sup = h.max_abs();
    if sup > 0.0 {
        h = h.scaled(1.0 / sup);
    }
    h
}

fn conformal_metric(
    grid: Arc<ChartGrid>,
    amplitude: f64,
    modes: u32,
) -> Result<MetricField, CliError> {
    if !(1..=2).contains(&modes) {
        return config_err("initial.modes must be 1 or 2");
    }
    let dim = grid.dim();
    let tau = 2.0 * std::f64::consts::PI;
    let g = sym2_from_coords(grid, move |x, i, j| {
        if i != j {
            return 0.0;
        }
        let mut phi = (tau * x[0]).sin();
        if modes >= 2 {
            let (p, q) = if dim == 2 { (0, 1) } else { (1, 2) };
            phi += 0.6 * (tau * (x[p] + x[q])).cos();
        }
        (2.0 * amplitude * phi).exp()
    });
    MetricField::new(g).map_err(CliError::from_core_config)
}

fn build_grid(section: &GridSection) -> Result<Arc<ChartGrid>, CliError> {
    let lengths = match &section.lengths {
        Some(l) => {
            if l.len() != section.extents.len() {
                return config_err(format!(
                    "grid.lengths has {} entries but grid.extents has {}",
                    l.len(),
                    section.extents.len()
                ));
            }
            l.clone()
        }
        None => vec![1.0; section.extents.len()],
    };
    let fd = FdOrder::from_order(section.fd_order).map_err(CliError::from_core_config)?;
    ChartGrid::new(&section.extents, &lengths, fd)
        .map(Arc::new)
        .map_err(CliError::from_core_config)
}

fn snapshot_index(len: usize, requested: Option<i64>) -> Result<usize, CliError> {
    let idx = requested.unwrap_or(-1);
    let resolved = if idx < 0 { len as i64 + idx } else { idx };
    if resolved < 0 || resolved as usize >= len {
        return config_err(format!(
            "initial.sample {idx} out of range for a run with {len} stored samples"
        ));
    }
    Ok(resolved as usize)
}

fn chart_initial(init: &InitialSection, grid_sec: Option<&GridSection>) -> Result<MetricField, CliError> {
    match init.recipe.as_str() {
        "flat" | "conformal" => {
            let section = match grid_sec {
                Some(s) => s,
                None => return config_err("[grid] section is required for the chart backend"),
            };
            let grid = build_grid(section)?;
            match init.recipe.as_str() {
                "flat" => Ok(MetricField::flat(grid)),
                _ => {
                    let amp = match init.amplitude {
                        Some(a) if a.is_finite() => a,
                        _ => {
                            return config_err(
                                "initial.amplitude is required for recipe = \"conformal\"",
                            )
                        }
                    };
                    conformal_metric(grid, amp, init.modes.unwrap_or(2))
                }
            }
        }
        "snapshot" => {
            let path = match &init.path {
                Some(p) => p,
                None => return config_err("initial.path is required for recipe = \"snapshot\""),
            };
            let (_, snaps, _) =
                load_grid_trajectory::<f64>(path).map_err(CliError::from_core_config)?;
            let idx = snapshot_index(snaps.len(), init.sample)?;
            Ok(snaps[idx].clone())
        }
        "berger" => config_err("initial.recipe = \"berger\" needs backend.kind = \"frame\""),
        other => config_err(format!(
            "chart initial.recipe must be flat | conformal | snapshot, got \"{other}\""
        )),
    }
}

fn frame_initial(init: &InitialSection, frame_sec: Option<&FrameSection>) -> Result<FrameMetric, CliError> {
    if let Some(f) = frame_sec {
        if f.preset != "su2" {
            return config_err(format!(
                "frame.preset \"{}\" unknown (available: su2)",
                f.preset
            ));
        }
    }
    match init.recipe.as_str() {
        "berger" => {
            let coeffs = match init.coeffs {
                Some(c) => c,
                None => return config_err("initial.coeffs = [a, b, c] is required for recipe = \"berger\""),
            };
            FrameMetric::su2()
                .with_coeffs(coeffs)
                .map_err(CliError::from_core_config)
        }
        "snapshot" => {
            let path = match &init.path {
                Some(p) => p,
                None => return config_err("initial.path is required for recipe = \"snapshot\""),
            };
            let text = std::fs::read_to_string(path.join("manifest.json"))
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let manifest: RunManifest = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if manifest.backend != "frame" {
                return config_err("initial.path points at a chart run; use the chart backend");
            }
            let structure = manifest
                .structure
                .ok_or_else(|| CliError::Config("frame manifest lacks structure constants".into()))?;
            let coeffs_list = manifest
                .frame_coeffs
                .ok_or_else(|| CliError::Config("frame manifest lacks coefficient history".into()))?;
            let idx = snapshot_index(coeffs_list.len(), init.sample)?;
            FrameMetric::new(
                structure,
                coeffs_list[idx],
                manifest.volume_norm.unwrap_or(1.0),
            )
            .map_err(CliError::from_core_config)
        }
        "flat" | "conformal" => {
            config_err("chart recipes (flat/conformal) need backend.kind = \"chart\"")
        }
        other => config_err(format!(
            "frame initial.recipe must be berger | snapshot, got \"{other}\""
        )),
    }
}

fn apply_chart_perturbation(
    g0: &MetricField,
    p: &PerturbationSection,
    seed_override: Option<u64>,
) -> Result<MetricField, CliError> {
    match p.mode.as_deref().unwrap_or("fourier") {
        "fourier" => {
            if !(p.amplitude.is_finite()) {
                return config_err("perturbation.amplitude must be finite");
            }
            let seed = seed_override.unwrap_or(p.seed);
            let v = random_sym2(g0.grid(), seed);
            MetricField::new(g0.value().add(&v.scaled(p.amplitude)).map_err(CliError::from_core_config)?)
                .map_err(CliError::from_core_config)
        }
        other => config_err(format!(
            "chart perturbation.mode must be \"fourier\", got \"{other}\""
        )),
    }
}

fn apply_frame_perturbation(
    f0: &FrameMetric,
    p: &PerturbationSection,
) -> Result<FrameMetric, CliError> {
    match p.mode.as_deref().unwrap_or("coeffs") {
        "coeffs" => {
            let dir = match p.direction {
                Some(d) => d,
                None => {
                    return config_err(
                        "perturbation.direction = [d1, d2, d3] is required for mode = \"coeffs\"",
                    )
                }
            };
            f0.with_coeffs([
                f0.coeffs[0] + p.amplitude * dir[0],
                f0.coeffs[1] + p.amplitude * dir[1],
                f0.coeffs[2] + p.amplitude * dir[2],
            ])
            .map_err(CliError::from_core_config)
        }
        other => config_err(format!(
            "frame perturbation.mode must be \"coeffs\", got \"{other}\""
        )),
    }
}

/// Build the scene a config describes. `perturb` selects whether the
/// `[perturbation]` block is applied (audit pairs run one leg each way);
/// `seed_override` comes from `--seed`.
pub fn build_scene(
    cfg: &FileConfig,
    perturb: bool,
    seed_override: Option<u64>,
) -> Result<Scene, CliError> {
    let spec = flow_spec(&cfg.flow)?;
    let run = run_schedule(&cfg.time)?;
    match cfg.backend.kind.as_str() {
        "chart" => {
            if cfg.frame.is_some() {
                return config_err("[frame] section requires backend.kind = \"frame\"");
            }
            let mut g0 = chart_initial(&cfg.initial, cfg.grid.as_ref())?;
            spec.validate(g0.dim()).map_err(CliError::from_core_config)?;
            if matches!(spec, FlowSpec::Xcf { .. }) && !cfg.backend.static_only {
                return config_err(
                    "cross term flow cannot evolve on the chart backend: the periodic chart's \
                     flat topology cannot keep the sigma-adjusted Einstein tensor definite \
                     everywhere (definiteness violated by topology). Set backend.static_only = \
                     true to evaluate the pointwise algebra, or use backend.kind = \"frame\".",
                );
            }
            if cfg.backend.static_only && !matches!(spec, FlowSpec::Xcf { .. }) {
                return config_err("backend.static_only applies only to flow.kind = \"xcf\"");
            }
            if perturb {
                if let Some(p) = &cfg.perturbation {
                    g0 = apply_chart_perturbation(&g0, p, seed_override)?;
                }
            }
            Ok(Scene::Chart {
                g0,
                spec,
                run,
                static_only: cfg.backend.static_only,
            })
        }
        "frame" => {
            if cfg.grid.is_some() {
                return config_err("[grid] section requires backend.kind = \"chart\"");
            }
            if cfg.backend.static_only {
                return config_err("backend.static_only applies to the chart backend only");
            }
            if !matches!(spec, FlowSpec::Ricci | FlowSpec::Xcf { .. }) {
                return config_err(format!(
                    "the frame backend integrates ricci and xcf only; \"{}\" needs the chart backend",
                    spec.name()
                ));
            }
            let mut f0 = frame_initial(&cfg.initial, cfg.frame.as_ref())?;
            if perturb {
                if let Some(p) = &cfg.perturbation {
                    f0 = apply_frame_perturbation(&f0, p)?;
                }
            }
            Ok(Scene::Frame { f0, spec, run })
        }
        other => config_err(format!(
            "backend.kind must be \"chart\" or \"frame\", got \"{other}\""
        )),
    }
}
