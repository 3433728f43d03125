//! Registered discrete identity checks, run across a built-in corpus of
//! metrics (flat tori, conformal and generic perturbations in 2–4 dimensions,
//! and a near-round frame metric). Each check emits a serializable report
//! with its measured defect, tolerance, and — for checks whose defect is a
//! discretization error — the coarse/fine refinement ratio.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::field::{sym2_from_coords, TensorField};
use crate::flows::{family_rhs, LambdaPreset, XcfAlgebra};
use crate::grid::{ChartGrid, FdOrder};
use crate::homogeneous::FrameMetric;
use crate::metric::MetricField;
use crate::scalar::{real, Real};
use crate::tensor::curvature::bach;
use crate::tensor::{covariant_derivative, divergence, kn_pair, laplacian, trace_inv};

/// One identity-check result. `refinement_ratio` is the coarse/fine defect
/// quotient where the check measures a discretization error.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub check: String,
    pub grid: String,
    pub fd_order: u32,
    pub defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_ratio: Option<f64>,
}

/// Options for [`run_suite`]: an optional substring filter on check names and
/// a deliberate convention corruption used as a negative control (it must
/// make the curvature-symmetry check fail).
#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub scope: Option<String>,
    pub corrupt_convention: bool,
}

pub fn suite_passed(reports: &[IdentityReport]) -> bool {
    !reports.is_empty() && reports.iter().all(|r| r.pass)
}

const NAMES: &[&str] = &[
    "riemann_symmetry",
    "first_bianchi",
    "metric_compatibility",
    "second_bianchi_contracted",
    "einstein_divergence",
    "commutator_scalar",
    "commutator_vector",
    "integration_by_parts",
    "interpolation_inequality",
    "kulkarni_nomizu_symmetry",
    "cross_formula_frame",
    "cross_formula_grid",
    "bach_flat",
    "bach_trace_free",
    "bach_conformal",
    "obstruction_flat",
    "scaling_collapse",
];

/// All registered check names, in execution order.
pub fn check_names() -> &'static [&'static str] {
    NAMES
}

fn in_scope(name: &str, scope: &Option<String>) -> bool {
    match scope {
        None => true,
        Some(s) => name.contains(s.as_str()),
    }
}

// ---------------------------------------------------------------------------
// corpus
// ---------------------------------------------------------------------------

fn conformal3<T: Real>(n: usize, amp: f64) -> MetricField<T> {
    let grid = Arc::new(
        ChartGrid::new(&[n, n, n], &[T::one(), T::one(), T::one()], FdOrder::Four).unwrap(),
    );
    let tau = real::<T>(2.0 * PI);
    let a = real::<T>(amp);
    let g = sym2_from_coords(grid, move |x, i, j| {
        let phi = a
            * ((tau * x[0]).sin()
                + real::<T>(0.5) * (tau * x[1]).cos()
                + real::<T>(1.0 / 3.0) * (tau * x[2]).sin());
        if i == j {
            (real::<T>(2.0) * phi).exp()
        } else {
            T::zero()
        }
    });
    MetricField::new(g).unwrap()
}

fn generic3<T: Real>(n: usize, amp: f64) -> MetricField<T> {
    let grid = Arc::new(
        ChartGrid::new(&[n, n, n], &[T::one(), T::one(), T::one()], FdOrder::Four).unwrap(),
    );
    let tau = real::<T>(2.0 * PI);
    let a = real::<T>(amp);
    let g = sym2_from_coords(grid, move |x, i, j| {
        let (x0, x1, x2) = (tau * x[0], tau * x[1], tau * x[2]);
        match (i.min(j), i.max(j)) {
            (0, 0) => T::one() + a * x0.sin() * x1.cos(),
            (1, 1) => T::one() + real::<T>(0.8) * a * x1.cos() * x2.sin(),
            (2, 2) => T::one() + real::<T>(0.9) * a * x2.sin() * x0.cos(),
            (0, 1) => real::<T>(0.5) * a * (x0 + x2).sin(),
            (0, 2) => real::<T>(0.4) * a * (x1 - x0).cos(),
            _ => real::<T>(0.6) * a * (x1 + x2).sin(),
        }
    });
    MetricField::new(g).unwrap()
}

fn generic4<T: Real>(n: usize, amp: f64) -> MetricField<T> {
    let grid = Arc::new(
        ChartGrid::new(
            &[n, n, n, n],
            &[T::one(), T::one(), T::one(), T::one()],
            FdOrder::Four,
        )
        .unwrap(),
    );
    let tau = real::<T>(2.0 * PI);
    let a = real::<T>(amp);
    let g = sym2_from_coords(grid, move |x, i, j| {
        let c = [tau * x[0], tau * x[1], tau * x[2], tau * x[3]];
        match (i.min(j), i.max(j)) {
            (0, 0) => T::one() + a * c[0].sin() * c[3].cos(),
            (1, 1) => T::one() + real::<T>(0.7) * a * c[1].cos() * c[2].sin(),
            (2, 2) => T::one() + real::<T>(0.8) * a * c[2].sin() * c[0].cos(),
            (3, 3) => T::one() + real::<T>(0.9) * a * c[3].cos() * c[1].sin(),
            (0, 1) => real::<T>(0.5) * a * (c[0] + c[2]).sin(),
            (1, 2) => real::<T>(0.4) * a * (c[1] - c[3]).cos(),
            (2, 3) => real::<T>(0.5) * a * (c[2] + c[0]).sin(),
            (0, 3) => real::<T>(0.3) * a * (c[3] - c[1]).cos(),
            _ => T::zero(),
        }
    });
    MetricField::new(g).unwrap()
}

fn flat<T: Real>(dim: usize, n: usize) -> MetricField<T> {
    let extents = vec![n; dim];
    let lengths = vec![T::one(); dim];
    let grid = Arc::new(ChartGrid::new(&extents, &lengths, FdOrder::Four).unwrap());
    MetricField::flat(grid)
}

#[derive(Default)]
struct Corpus<T: Real> {
    conformal3_coarse: Option<MetricField<T>>,
    conformal3_fine: Option<MetricField<T>>,
    generic3_coarse: Option<MetricField<T>>,
    generic3_fine: Option<MetricField<T>>,
    generic4_coarse: Option<MetricField<T>>,
    generic4: Option<MetricField<T>>,
}

const N3_COARSE: usize = 12;
const N3_FINE: usize = 24;
const N4_COARSE: usize = 8;
const N4: usize = 12;
const CONF_AMP: f64 = 0.04;
const GEN_AMP: f64 = 0.05;
const GEN4_AMP: f64 = 0.03;

impl<T: Real> Corpus<T> {
    fn conformal3_coarse(&mut self) -> MetricField<T> {
        self.conformal3_coarse
            .get_or_insert_with(|| conformal3(N3_COARSE, CONF_AMP))
            .clone()
    }
    fn conformal3_fine(&mut self) -> MetricField<T> {
        self.conformal3_fine
            .get_or_insert_with(|| conformal3(N3_FINE, CONF_AMP))
            .clone()
    }
    fn generic3_coarse(&mut self) -> MetricField<T> {
        self.generic3_coarse
            .get_or_insert_with(|| generic3(N3_COARSE, GEN_AMP))
            .clone()
    }
    fn generic3_fine(&mut self) -> MetricField<T> {
        self.generic3_fine
            .get_or_insert_with(|| generic3(N3_FINE, GEN_AMP))
            .clone()
    }
    fn generic4_coarse(&mut self) -> MetricField<T> {
        self.generic4_coarse
            .get_or_insert_with(|| generic4(N4_COARSE, GEN4_AMP))
            .clone()
    }
    fn generic4(&mut self) -> MetricField<T> {
        self.generic4
            .get_or_insert_with(|| generic4(N4, GEN4_AMP))
            .clone()
    }
}

// ---------------------------------------------------------------------------
// individual checks
// ---------------------------------------------------------------------------

fn simple_report(check: &str, grid: String, fd: u32, defect: f64, tol: f64) -> IdentityReport {
    IdentityReport {
        check: check.to_string(),
        grid,
        fd_order: fd,
        defect,
        tolerance: tol,
        pass: defect.is_finite() && defect <= tol,
        refinement_ratio: None,
        expected_ratio: None,
    }
}

fn ratio_report(
    check: &str,
    grid: String,
    fd: u32,
    fine_defect: f64,
    tol: f64,
    ratio: f64,
    expected: f64,
    band: f64,
) -> IdentityReport {
    let ratio_ok = ratio.is_finite() && ratio >= expected / band && ratio <= expected * band;
    IdentityReport {
        check: check.to_string(),
        grid,
        fd_order: fd,
        defect: fine_defect,
        tolerance: tol,
        pass: fine_defect.is_finite() && fine_defect <= tol && ratio_ok,
        refinement_ratio: Some(ratio),
        expected_ratio: Some(expected),
    }
}

fn grid_label<T: Real>(g: &MetricField<T>, tag: &str) -> String {
    format!("{tag} N={} dim={}", g.grid().extents()[0], g.dim())
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Antisymmetry in the first and last index pairs plus pair-interchange
/// symmetry of the (0,4) curvature. With `corrupt` set, a deliberate
/// asymmetric offset is added first — the check must then fail.
fn riemann_symmetry<T: Real>(g: &MetricField<T>, corrupt: bool) -> IdentityReport {
    let rm = g.curvature().rm().clone();
    let scale = to_f64(rm.max_abs()).max(1.0);
    let mut rm = rm;
    if corrupt {
        let dim = g.dim();
        let bump = real::<T>(0.1 * scale);
        for node in 0..g.grid().node_count() {
            let s = rm.node_slice_mut(node);
            s[((0 * dim + 1) * dim) * dim + 1] += bump;
        }
    }
    let dim = g.dim();
    let d2 = dim * dim;
    let mut worst = T::zero();
    for node in 0..g.grid().node_count() {
        let s = rm.node_slice(node);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let v = s[(i * dim + j) * d2 + k * dim + l];
                        let anti_a = v + s[(j * dim + i) * d2 + k * dim + l];
                        let anti_b = v + s[(i * dim + j) * d2 + l * dim + k];
                        let swap = v - s[(k * dim + l) * d2 + i * dim + j];
                        worst = worst
                            .max(anti_a.abs())
                            .max(anti_b.abs())
                            .max(swap.abs());
                    }
                }
            }
        }
    }
    simple_report(
        "riemann_symmetry",
        grid_label(g, "conformal"),
        g.grid().fd_order().order(),
        to_f64(worst),
        1e-11 * scale,
    )
}

fn first_bianchi<T: Real>(g: &MetricField<T>) -> IdentityReport {
    let rm = g.curvature().rm();
    let dim = g.dim();
    let d2 = dim * dim;
    let scale = to_f64(rm.max_abs()).max(1.0);
    let mut worst = T::zero();
    for node in 0..g.grid().node_count() {
        let s = rm.node_slice(node);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let cyc = s[(i * dim + j) * d2 + k * dim + l]
                            + s[(j * dim + k) * d2 + i * dim + l]
                            + s[(k * dim + i) * d2 + j * dim + l];
                        worst = worst.max(cyc.abs());
                    }
                }
            }
        }
    }
    simple_report(
        "first_bianchi",
        grid_label(g, "conformal"),
        g.grid().fd_order().order(),
        to_f64(worst),
        1e-11 * scale,
    )
}

fn metric_compatibility<T: Real>(g: &MetricField<T>) -> Result<IdentityReport> {
    let dg = covariant_derivative(g.value(), g.curvature().connection())?;
    Ok(simple_report(
        "metric_compatibility",
        grid_label(g, "conformal"),
        g.grid().fd_order().order(),
        to_f64(dg.max_abs()),
        1e-11 * to_f64(g.value().max_abs()).max(1.0),
    ))
}

/// Defect of `div Rc = ½ ∇S` (the contracted differential curvature
/// identity), measured at two resolutions.
fn second_bianchi_defect<T: Real>(g: &MetricField<T>) -> Result<T> {
    let bundle = g.curvature().clone();
    let div_rc = divergence(bundle.rc(), g)?;
    let ds = covariant_derivative(bundle.scalar(), g.curvature().connection())?;
    let mut worst = T::zero();
    for (a, b) in div_rc.components().iter().zip(ds.components()) {
        worst = worst.max((*a - real::<T>(0.5) * *b).abs());
    }
    Ok(worst)
}

fn einstein_divergence_defect<T: Real>(g: &MetricField<T>) -> Result<T> {
    let div_e = divergence(g.curvature().einstein(), g)?;
    Ok(div_e.max_abs())
}

fn smooth_vector<T: Real>(grid: &Arc<ChartGrid<T>>) -> TensorField<T> {
    let tau = real::<T>(2.0 * PI);
    let g2 = grid.clone();
    TensorField::from_fn(grid.clone(), 1, 0, move |node, idx| {
        let x = g2.coords(node);
        let c = [tau * x[0], tau * x[1], tau * x[2]];
        match idx[0] {
            0 => c[0].sin() * c[1].cos(),
            1 => (c[1] + c[2]).cos(),
            _ => c[2].sin() * c[0].sin(),
        }
    })
}

fn smooth_scalar<T: Real>(grid: &Arc<ChartGrid<T>>) -> TensorField<T> {
    let tau = real::<T>(2.0 * PI);
    TensorField::scalar_from_coords(grid.clone(), move |x| {
        (tau * x[0]).sin() + (tau * x[1]).cos() * (tau * x[2]).sin()
    })
}

fn ibp_defect<T: Real>(g: &MetricField<T>) -> Result<(T, T)> {
    let w = smooth_vector(g.grid());
    let lap = laplacian(&w, g)?;
    let dw = covariant_derivative(&w, g.curvature().connection())?;
    let lhs = g.l2_inner(&lap, &w)?;
    let grad_sq = g.norm_sq(&dw)?;
    Ok(((lhs + grad_sq).abs(), grad_sq))
}

fn interpolation_inequality<T: Real>(g: &MetricField<T>) -> Result<IdentityReport> {
    let grid = g.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1de2);
    let tau = real::<T>(2.0 * PI);
    let mut worst = T::zero();
    for _ in 0..50 {
        let mut coef = [[0.0f64; 6]; 3];
        for row in &mut coef {
            for c in row.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
        let g2 = grid.clone();
        let w = TensorField::from_fn(grid.clone(), 1, 0, |node, idx| {
            let x = g2.coords(node);
            let c = &coef[idx[0]];
            real::<T>(c[0]) * (tau * x[0]).sin()
                + real::<T>(c[1]) * (tau * x[0]).cos()
                + real::<T>(c[2]) * (tau * x[1]).sin()
                + real::<T>(c[3]) * (tau * x[1]).cos()
                + real::<T>(c[4]) * (tau * x[2]).sin()
                + real::<T>(c[5]) * (tau * x[2]).cos()
        });
        let dw = covariant_derivative(&w, g.curvature().connection())?;
        let lap = laplacian(&w, g)?;
        let lhs = g.norm_sq(&dw)?;
        let rhs = g.norm_sq(&w)?.sqrt() * g.norm_sq(&lap)?.sqrt();
        let excess = (lhs - rhs) / rhs.max(real::<T>(1e-30));
        worst = worst.max(excess);
    }
    Ok(simple_report(
        "interpolation_inequality",
        grid_label(g, "flat"),
        g.grid().fd_order().order(),
        to_f64(worst),
        1e-12,
    ))
}

fn kulkarni_nomizu_symmetry<T: Real>(g: &MetricField<T>) -> Result<IdentityReport> {
    let grid = g.grid().clone();
    let tau = real::<T>(2.0 * PI);
    let b = sym2_from_coords(grid.clone(), |x, i, j| {
        (tau * x[0]).sin() * real::<T>((i + j + 1) as f64 / 4.0) + (tau * x[1]).cos()
    });
    let k = sym2_from_coords(grid.clone(), |x, i, j| {
        (tau * x[2]).cos() * real::<T>((i * j + 1) as f64 / 3.0) + (tau * x[0]).sin()
    });
    let q = kn_pair(&b, &k)?;
    let dim = g.dim();
    let d2 = dim * dim;
    let scale = to_f64(q.max_abs()).max(1.0);
    let mut worst = T::zero();
    for node in 0..grid.node_count() {
        let s = q.node_slice(node);
        for i in 0..dim {
            for j in 0..dim {
                for kk in 0..dim {
                    for l in 0..dim {
                        let v = s[(i * dim + j) * d2 + kk * dim + l];
                        worst = worst
                            .max((v + s[(j * dim + i) * d2 + kk * dim + l]).abs())
                            .max((v + s[(i * dim + j) * d2 + l * dim + kk]).abs())
                            .max((v - s[(kk * dim + l) * d2 + i * dim + j]).abs());
                        let cyc = v
                            + s[(j * dim + kk) * d2 + i * dim + l]
                            + s[(kk * dim + i) * d2 + j * dim + l];
                        worst = worst.max(cyc.abs());
                    }
                }
            }
        }
    }
    Ok(simple_report(
        "kulkarni_nomizu_symmetry",
        grid_label(g, "conformal"),
        g.grid().fd_order().order(),
        to_f64(worst),
        1e-12 * scale,
    ))
}

/// On the frame backend the cross tensor from the inverse-Einstein route must
/// match the direct curvature contraction `−½ E^{pq} R_{pijq}`.
fn cross_formula_frame<T: Real>() -> Result<IdentityReport> {
    let fm = FrameMetric::<T>::su2()
        .with_coeffs([real(1.05), real(0.95), real(1.0)])
        .unwrap();
    let alg = crate::homogeneous::frame_xcf_algebra(&fm)?;
    let rm = fm.riemann_frame();
    let a = fm.coeffs;
    let mut worst = T::zero();
    let mut scale = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let mut direct = T::zero();
            for p in 0..3 {
                direct -= real::<T>(0.5) * alg.einstein_on[p] / a[p] * rm[p][i][j][p];
            }
            let x = if i == j { alg.x_frame[i] } else { T::zero() };
            worst = worst.max((x - direct).abs());
            scale = scale.max(x.abs());
        }
    }
    Ok(simple_report(
        "cross_formula_frame",
        "berger frame (1.05, 0.95, 1.0)".to_string(),
        0,
        to_f64(worst),
        1e-12 * to_f64(scale).max(1.0),
    ))
}

/// On grids the two cross-tensor routes differ by the discrete violation of
/// the three-dimensional curvature decomposition, which refines away at the
/// stencil order.
fn cross_formula_grid_defect<T: Real>(g: &MetricField<T>) -> Result<(T, T)> {
    let alg = XcfAlgebra::build(g)?;
    let mut min_p = T::infinity();
    for &p in alg.det_ratio().components() {
        min_p = min_p.min(p.abs());
    }
    Ok((alg.formula_defect(g)?, min_p))
}

fn bach_flat_check<T: Real>() -> Result<IdentityReport> {
    let g = flat::<T>(4, 8);
    let b = bach(&g)?;
    Ok(simple_report(
        "bach_flat",
        grid_label(&g, "flat"),
        4,
        to_f64(b.max_abs()),
        1e-10,
    ))
}

/// Relative size of `tr_g B`.  The trace picks up the middle-slot trace of
/// the discrete Weyl tensor, which is pure stencil error, so the number
/// refines away at the stencil order rather than sitting at roundoff.
fn bach_trace_rel<T: Real>(g: &MetricField<T>) -> Result<f64> {
    let b = bach(g)?;
    let tr = trace_inv(g, &b, 0, 1)?;
    Ok(to_f64(tr.max_abs()) / to_f64(b.max_abs()).max(1.0))
}

/// Conformal covariance in dimension four: `B(e^{2ω}g) = e^{−2ω} B(g)` up to
/// discretization error.
fn bach_conformal<T: Real>(g: &MetricField<T>) -> Result<IdentityReport> {
    let grid = g.grid().clone();
    let tau = real::<T>(2.0 * PI);
    let omega = TensorField::scalar_from_coords(grid.clone(), move |x| {
        real::<T>(0.02) * ((tau * x[0]).sin() + (tau * x[2]).cos())
    });
    let mut scaled_val = g.value().clone();
    for node in 0..grid.node_count() {
        let f = (real::<T>(2.0) * omega.components()[node]).exp();
        for c in scaled_val.node_slice_mut(node) {
            *c *= f;
        }
    }
    let g_hat = MetricField::new(scaled_val)?;
    let b = bach(g)?;
    let b_hat = bach(&g_hat)?;
    let mut worst = T::zero();
    let mut scale = T::zero();
    for node in 0..grid.node_count() {
        let f = (real::<T>(-2.0) * omega.components()[node]).exp();
        let bv = b.node_slice(node);
        let bh = b_hat.node_slice(node);
        for c in 0..bv.len() {
            worst = worst.max((bh[c] - f * bv[c]).abs());
            scale = scale.max(bv[c].abs());
        }
    }
    let rel = to_f64(worst) / to_f64(scale).max(1e-30);
    Ok(simple_report(
        "bach_conformal",
        grid_label(g, "generic"),
        4,
        rel,
        BACH_CONFORMAL_TOL,
    ))
}

fn obstruction_flat<T: Real>() -> Result<IdentityReport> {
    let g = flat::<T>(3, 8);
    let mut worst = T::zero();
    for k in [1usize, 2] {
        let rhs = family_rhs(&g, k, 0.25, -0.5, LambdaPreset::Zero)?;
        worst = worst.max(rhs.max_abs());
    }
    Ok(simple_report(
        "obstruction_flat",
        grid_label(&g, "flat"),
        4,
        to_f64(worst),
        1e-11,
    ))
}

/// Doubling the metric must commute bitwise with the whole curvature chain:
/// `Γ(2g) = Γ(g)`, `Rm(2g) = 2·Rm(g)`, `S(2g) = S(g)/2`.
fn scaling_collapse<T: Real>(g: &MetricField<T>) -> Result<IdentityReport> {
    let doubled = MetricField::new(g.value().scaled(real::<T>(2.0)))?;
    let b1 = g.curvature().clone();
    let b2 = doubled.curvature().clone();
    let mut worst = T::zero();
    for (a, b) in b1
        .connection()
        .gamma()
        .components()
        .iter()
        .zip(b2.connection().gamma().components())
    {
        worst = worst.max((*a - *b).abs());
    }
    for (a, b) in b1.rm().components().iter().zip(b2.rm().components()) {
        worst = worst.max((real::<T>(2.0) * *a - *b).abs());
    }
    for (a, b) in b1.scalar().components().iter().zip(b2.scalar().components()) {
        worst = worst.max((*a / real::<T>(2.0) - *b).abs());
    }
    Ok(simple_report(
        "scaling_collapse",
        grid_label(g, "conformal"),
        g.grid().fd_order().order(),
        to_f64(worst),
        0.0,
    ))
}

// Tolerances for the discretization-error checks, fixed from measured defects
// on the corpus (fine grid) with ~4-6× headroom.
const SECOND_BIANCHI_TOL: f64 = 2e-2;
const EINSTEIN_DIV_TOL: f64 = 1e-2;
const COMMUTATOR_VECTOR_TOL: f64 = 3e-2;
const IBP_REL_TOL: f64 = 1e-4;
const CROSS_GRID_TOL: f64 = 5e-3;
const BACH_TRACE_TOL: f64 = 2e-2;
const BACH_CONFORMAL_TOL: f64 = 1.5e-1;
const RATIO_BAND: f64 = 2.0;
const CROSS_RATIO_BAND: f64 = 1.25;

/// Run the registered checks (optionally filtered by substring) and return
/// one report per executed check.
pub fn run_suite<T: Real>(opts: &SuiteOptions) -> Result<Vec<IdentityReport>> {
    let mut corpus = Corpus::<T>::default();
    let mut reports = Vec::new();
    let expected = 16.0; // order-4 stencils throughout the corpus

    for &name in NAMES {
        if !in_scope(name, &opts.scope) {
            continue;
        }
        let report = match name {
            "riemann_symmetry" => {
                riemann_symmetry(&corpus.conformal3_coarse(), opts.corrupt_convention)
            }
            "first_bianchi" => first_bianchi(&corpus.conformal3_coarse()),
            "metric_compatibility" => metric_compatibility(&corpus.conformal3_coarse())?,
            "second_bianchi_contracted" => {
                let coarse = second_bianchi_defect(&corpus.conformal3_coarse())?;
                let fine = second_bianchi_defect(&corpus.conformal3_fine())?;
                ratio_report(
                    name,
                    format!("conformal N={N3_COARSE}→{N3_FINE} dim=3"),
                    4,
                    to_f64(fine),
                    SECOND_BIANCHI_TOL,
                    to_f64(coarse / fine),
                    expected,
                    RATIO_BAND,
                )
            }
            "einstein_divergence" => {
                let coarse = einstein_divergence_defect(&corpus.conformal3_coarse())?;
                let fine = einstein_divergence_defect(&corpus.conformal3_fine())?;
                ratio_report(
                    name,
                    format!("conformal N={N3_COARSE}→{N3_FINE} dim=3"),
                    4,
                    to_f64(fine),
                    EINSTEIN_DIV_TOL,
                    to_f64(coarse / fine),
                    expected,
                    RATIO_BAND,
                )
            }
            "commutator_scalar" => {
                let g = corpus.conformal3_coarse();
                let s = smooth_scalar(g.grid());
                let defect = crate::tensor::commutator::commutator_defect(&s, &g)?;
                simple_report(name, grid_label(&g, "conformal"), 4, to_f64(defect), 1e-10)
            }
            "commutator_vector" => {
                let gc = corpus.conformal3_coarse();
                let gf = corpus.conformal3_fine();
                let coarse =
                    crate::tensor::commutator::commutator_defect(&smooth_vector(gc.grid()), &gc)?;
                let fine =
                    crate::tensor::commutator::commutator_defect(&smooth_vector(gf.grid()), &gf)?;
                ratio_report(
                    name,
                    format!("conformal N={N3_COARSE}→{N3_FINE} dim=3"),
                    4,
                    to_f64(fine),
                    COMMUTATOR_VECTOR_TOL,
                    to_f64(coarse / fine),
                    expected,
                    RATIO_BAND,
                )
            }
            "integration_by_parts" => {
                let (dc, _) = ibp_defect(&corpus.conformal3_coarse())?;
                let (df, norm) = ibp_defect(&corpus.conformal3_fine())?;
                ratio_report(
                    name,
                    format!("conformal N={N3_COARSE}→{N3_FINE} dim=3"),
                    4,
                    to_f64(df / norm),
                    IBP_REL_TOL,
                    to_f64(dc / df),
                    expected,
                    RATIO_BAND,
                )
            }
            "interpolation_inequality" => interpolation_inequality(&flat::<T>(3, N3_COARSE))?,
            "kulkarni_nomizu_symmetry" => kulkarni_nomizu_symmetry(&corpus.conformal3_coarse())?,
            "cross_formula_frame" => cross_formula_frame::<T>()?,
            "cross_formula_grid" => {
                let (dc, min_pc) = cross_formula_grid_defect(&corpus.generic3_coarse())?;
                let (df, min_pf) = cross_formula_grid_defect(&corpus.generic3_fine())?;
                let mut r = ratio_report(
                    name,
                    format!("generic N={N3_COARSE}→{N3_FINE} dim=3"),
                    4,
                    to_f64(df),
                    CROSS_GRID_TOL,
                    to_f64(dc / df),
                    expected,
                    CROSS_RATIO_BAND,
                );
                // the comparison is meaningful only with a well-conditioned
                // Einstein tensor at every node
                if to_f64(min_pc.min(min_pf)) < 1e-6 {
                    r.pass = false;
                }
                r
            }
            "bach_flat" => bach_flat_check::<T>()?,
            "bach_trace_free" => {
                let dc = bach_trace_rel(&corpus.generic4_coarse())?;
                let df = bach_trace_rel(&corpus.generic4())?;
                let expected4 = (N4 as f64 / N4_COARSE as f64).powi(4);
                ratio_report(
                    name,
                    format!("generic N={N4_COARSE}→{N4} dim=4"),
                    4,
                    df,
                    BACH_TRACE_TOL,
                    dc / df,
                    expected4,
                    RATIO_BAND,
                )
            }
            "bach_conformal" => bach_conformal(&corpus.generic4())?,
            "obstruction_flat" => obstruction_flat::<T>()?,
            "scaling_collapse" => scaling_collapse(&corpus.conformal3_coarse())?,
            other => unreachable!("unregistered check {other}"),
        };
        reports.push(report);
    }
    Ok(reports)
}
