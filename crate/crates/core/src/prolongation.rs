//! Prolonged difference systems and energy audits for pairs of solutions.
//!
//! Given two metrics (or two trajectories), this module assembles the closed
//! system of difference tensors — metric difference `h`, connection
//! difference `A`, curvature prolongation differences `X^{(l)}` and scalar
//! prolongation differences `Z^{(l)}` — evaluates the weighted energies built
//! from them, and audits the resulting time series against an exponential
//! (Grönwall) growth bound. A pair with identical initial data must hold the
//! energy at the roundoff floor; a perturbed pair must grow no faster than
//! `e^{C t}` with a `C` fitted from the series itself.

use std::io::Write as IoWrite;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::homogeneous::{
    frame_cov_deriv, frame_norm_sq, frame_xcf_algebra, FrameConnection, FrameMetric,
};
use crate::metric::MetricField;
use crate::scalar::{real, Real};
use crate::tensor::covariant_derivative;

/// The difference tensors of a pair `(g, g̃)` prolonged to order `2k`.
#[derive(Debug, Clone)]
pub struct DifferencePack<T: Real> {
    reference: MetricField<T>,
    h: TensorField<T>,
    conn_diff: TensorField<T>,
    x_list: Vec<TensorField<T>>,
    z_list: Vec<TensorField<T>>,
    k: usize,
}

/// Build the difference pack: `h = g − g̃`, `A = Γ − Γ̃`,
/// `X^{(l)} = ∇^{(l)}Rm − ∇̃^{(l)}R̃m` for `l = 0…2k`, and
/// `Z^{(l)} = ∇^{(l)}S − ∇̃^{(l)}S̃` for `l ∈ {0, 2k}`.
/// `g` becomes the reference metric for all later norms.
pub fn build_differences<T: Real>(
    g: &MetricField<T>,
    g_tilde: &MetricField<T>,
    k: usize,
) -> Result<DifferencePack<T>> {
    if !g.grid().same_layout(g_tilde.grid()) {
        return Err(Error::GridMismatch);
    }
    if k > 2 {
        return Err(Error::InvalidParameter(format!(
            "difference packs support k ≤ 2 (prolongation order 2k ≤ 4), got k = {k}"
        )));
    }
    let bundle = g.curvature().clone();
    let bundle_t = g_tilde.curvature().clone();
    let h = g.value().sub(g_tilde.value())?;
    let conn_diff = bundle
        .connection()
        .gamma()
        .sub(bundle_t.connection().gamma())?;

    let mut x_list = Vec::with_capacity(2 * k + 1);
    let mut d = bundle.rm().clone();
    let mut d_t = bundle_t.rm().clone();
    x_list.push(d.sub(&d_t)?);
    for _ in 1..=(2 * k) {
        d = covariant_derivative(&d, bundle.connection())?;
        d_t = covariant_derivative(&d_t, bundle_t.connection())?;
        x_list.push(d.sub(&d_t)?);
    }

    let mut z_list = Vec::new();
    let mut s = bundle.scalar().clone();
    let mut s_t = bundle_t.scalar().clone();
    z_list.push(s.sub(&s_t)?);
    if k > 0 {
        for _ in 1..=(2 * k) {
            s = covariant_derivative(&s, bundle.connection())?;
            s_t = covariant_derivative(&s_t, bundle_t.connection())?;
        }
        z_list.push(s.sub(&s_t)?);
    }

    Ok(DifferencePack {
        reference: g.clone(),
        h,
        conn_diff,
        x_list,
        z_list,
        k,
    })
}

impl<T: Real> DifferencePack<T> {
    pub fn reference(&self) -> &MetricField<T> {
        &self.reference
    }
    /// Metric difference `g − g̃`.
    pub fn h(&self) -> &TensorField<T> {
        &self.h
    }
    /// Connection difference `Γ − Γ̃` (a genuine `(1,2)` tensor).
    pub fn conn_diff(&self) -> &TensorField<T> {
        &self.conn_diff
    }
    /// `X^{(l)}`, indexed by `l = 0…2k`.
    pub fn x_list(&self) -> &[TensorField<T>] {
        &self.x_list
    }
    /// `Z^{(0)}` and (for `k ≥ 1`) `Z^{(2k)}`.
    pub fn z_list(&self) -> &[TensorField<T>] {
        &self.z_list
    }
    pub fn k(&self) -> usize {
        self.k
    }

    /// Largest component magnitude across every difference tensor.
    pub fn max_abs(&self) -> T {
        let mut worst = self.h.max_abs().max(self.conn_diff.max_abs());
        for x in &self.x_list {
            worst = worst.max(x.max_abs());
        }
        for z in &self.z_list {
            worst = worst.max(z.max_abs());
        }
        worst
    }

    /// The weighted energies
    /// `G = ∥h∥² + ∥∇^{(k)}A∥²`, `H = ∥X^{(0)}∥² + ∥X^{(2k)}∥²`,
    /// `K = ∥Z^{(2k)}∥²`, `E = G + H + r·K`,
    /// all norms taken with the reference metric. For `k = 0` the two `H`
    /// terms coincide and are counted once.
    pub fn energies(&self, r: T) -> Result<(T, T, T, T)> {
        if r < T::zero() {
            return Err(Error::InvalidParameter("energy weight r must be ≥ 0".into()));
        }
        let g = &self.reference;
        let conn = g.curvature().clone();
        let mut da = self.conn_diff.clone();
        for _ in 0..self.k {
            da = covariant_derivative(&da, conn.connection())?;
        }
        let g_energy = g.norm_sq(&self.h)? + g.norm_sq(&da)?;
        let h_energy = if self.k == 0 {
            g.norm_sq(&self.x_list[0])?
        } else {
            g.norm_sq(&self.x_list[0])? + g.norm_sq(&self.x_list[2 * self.k])?
        };
        let k_energy = g.norm_sq(self.z_list.last().expect("z list non-empty"))?;
        let total = g_energy + h_energy + r * k_energy;
        Ok((g_energy, h_energy, k_energy, total))
    }
}

/// Difference system of the cross term flow: `W = V − Ṽ`, `h`, `A`, and the
/// first-order remainder
/// `U^a_{ij} = (E^{ab} − Ẽ^{ab}) ∇̃_b Ṽ_{ij} − E^{ab}(A^p_{bi} Ṽ_{pj} + A^p_{bj} Ṽ_{ip})`,
/// which is pointwise controlled by `|A| + |W|`.
#[derive(Debug, Clone)]
pub struct XcfPack<T: Real> {
    pub w: TensorField<T>,
    pub h: TensorField<T>,
    pub conn_diff: TensorField<T>,
    pub u: TensorField<T>,
    /// Fitted constant: max over nodes of `|U| / (|A| + |W|)`.
    pub fit_c: T,
}

pub fn xcf_pack<T: Real>(g: &MetricField<T>, g_tilde: &MetricField<T>) -> Result<XcfPack<T>> {
    if !g.grid().same_layout(g_tilde.grid()) {
        return Err(Error::GridMismatch);
    }
    let dim = g.dim();
    let grid = g.grid().clone();
    let alg = crate::flows::XcfAlgebra::build(g)?;
    let alg_t = crate::flows::XcfAlgebra::build(g_tilde)?;
    let h = g.value().sub(g_tilde.value())?;
    let conn_diff = g
        .curvature()
        .connection()
        .gamma()
        .sub(g_tilde.curvature().connection().gamma())?;
    let w = alg.inverse_einstein().sub(alg_t.inverse_einstein())?;
    let dv_t = covariant_derivative(alg_t.inverse_einstein(), g_tilde.curvature().connection())?;

    let mut u = TensorField::zeros(grid.clone(), 1, 2);
    let d2 = dim * dim;
    for node in 0..grid.node_count() {
        let eu = alg.einstein_raised().node_slice(node);
        let eu_t = alg_t.einstein_raised().node_slice(node);
        let dv = dv_t.node_slice(node);
        let av = conn_diff.node_slice(node);
        let vv = alg_t.inverse_einstein().node_slice(node);
        let uv = u.node_slice_mut(node);
        for a in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut val = T::zero();
                    for b in 0..dim {
                        val += (eu[a * dim + b] - eu_t[a * dim + b]) * dv[b * d2 + i * dim + j];
                        let mut corr = T::zero();
                        for p in 0..dim {
                            corr += av[p * d2 + b * dim + i] * vv[p * dim + j]
                                + av[p * d2 + b * dim + j] * vv[i * dim + p];
                        }
                        val -= eu[a * dim + b] * corr;
                    }
                    uv[a * d2 + i * dim + j] = val;
                }
            }
        }
    }

    // pointwise fit of |U| ≤ C (|A| + |W|)
    let u_sq = g.pointwise_inner(&u, &u)?;
    let a_sq = g.pointwise_inner(&conn_diff, &conn_diff)?;
    let w_sq = g.pointwise_inner(&w, &w)?;
    let mut max_denom = T::zero();
    for node in 0..grid.node_count() {
        let denom = a_sq.node_slice(node)[0].max(T::zero()).sqrt()
            + w_sq.node_slice(node)[0].max(T::zero()).sqrt();
        max_denom = max_denom.max(denom);
    }
    let cutoff = max_denom * real::<T>(1e-13);
    let mut fit_c = T::zero();
    for node in 0..grid.node_count() {
        let denom = a_sq.node_slice(node)[0].max(T::zero()).sqrt()
            + w_sq.node_slice(node)[0].max(T::zero()).sqrt();
        if denom > cutoff {
            let num = u_sq.node_slice(node)[0].max(T::zero()).sqrt();
            fit_c = fit_c.max(num / denom);
        }
    }
    Ok(XcfPack {
        w,
        h,
        conn_diff,
        u,
        fit_c,
    })
}

/// The frame-backend analogue of [`XcfPack`] for homogeneous pairs.
#[derive(Debug, Clone, Copy)]
pub struct FrameXcfPack<T: Real> {
    /// Diagonal frame components of `W = V − Ṽ`.
    pub w: [T; 3],
    /// Diagonal frame components of `h = g − g̃`.
    pub h: [T; 3],
    /// `A = Γ − Γ̃` in the frame.
    pub conn_diff: FrameConnection<T>,
    /// The remainder tensor `U` in the frame.
    pub u: FrameConnection<T>,
    /// `|U| / (|A| + |W|)` in reference-frame norms (0 when both vanish).
    pub fit_c: T,
}

pub fn frame_xcf_pack<T: Real>(
    f: &FrameMetric<T>,
    f_tilde: &FrameMetric<T>,
) -> Result<FrameXcfPack<T>> {
    let alg = frame_xcf_algebra(f)?;
    let alg_t = frame_xcf_algebra(f_tilde)?;
    let mut w = [T::zero(); 3];
    let mut h = [T::zero(); 3];
    for i in 0..3 {
        w[i] = alg.v_frame[i] - alg_t.v_frame[i];
        h[i] = f.coeffs[i] - f_tilde.coeffs[i];
    }
    let gam = f.christoffel();
    let gam_t = f_tilde.christoffel();
    let mut conn_diff = [[[T::zero(); 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                conn_diff[k][i][j] = gam[k][i][j] - gam_t[k][i][j];
            }
        }
    }
    // Ṽ as a full (0,2) array and its g̃-covariant derivative
    let mut v_t = [T::zero(); 9];
    for i in 0..3 {
        v_t[i * 3 + i] = alg_t.v_frame[i];
    }
    let dv_t = frame_cov_deriv(&v_t, 0, 2, &gam_t);
    // diagonal raised Einstein components E^{aa} = e_on[a]/a_a
    let mut e_up = [T::zero(); 3];
    let mut e_up_t = [T::zero(); 3];
    for a in 0..3 {
        e_up[a] = alg.einstein_on[a] / f.coeffs[a];
        e_up_t[a] = alg_t.einstein_on[a] / f_tilde.coeffs[a];
    }
    let mut u = [[[T::zero(); 3]; 3]; 3];
    for a in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut val = (e_up[a] - e_up_t[a]) * dv_t[a * 9 + i * 3 + j];
                let mut corr = T::zero();
                for p in 0..3 {
                    corr += conn_diff[p][a][i] * v_t[p * 3 + j]
                        + conn_diff[p][a][j] * v_t[i * 3 + p];
                }
                val -= e_up[a] * corr;
                u[a][i][j] = val;
            }
        }
    }
    let flat = |t: &FrameConnection<T>| -> Vec<T> {
        let mut out = Vec::with_capacity(27);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    out.push(t[k][i][j]);
                }
            }
        }
        out
    };
    let w_full: Vec<T> = (0..9)
        .map(|c| if c / 3 == c % 3 { w[c / 3] } else { T::zero() })
        .collect();
    let vol = f.volume();
    let u_norm = (frame_norm_sq(f, &flat(&u), 1, 2) / vol).max(T::zero()).sqrt();
    let a_norm = (frame_norm_sq(f, &flat(&conn_diff), 1, 2) / vol)
        .max(T::zero())
        .sqrt();
    let w_norm = (frame_norm_sq(f, &w_full, 0, 2) / vol).max(T::zero()).sqrt();
    let denom = a_norm + w_norm;
    let fit_c = if denom > T::zero() { u_norm / denom } else { T::zero() };
    Ok(FrameXcfPack {
        w,
        h,
        conn_diff,
        u,
        fit_c,
    })
}

/// Corollary weights for the order-`2k+2` uniqueness energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub r: f64,
    pub eps: f64,
    pub a: f64,
    pub b: f64,
}

impl Weights {
    /// The inequalities the weights must satisfy:
    /// `r > −2α/(1+2α(n−1))` (with `r = 0` allowed at `α = 0`, where the
    /// bound degenerates to zero and the `K` term can be dropped) and
    /// `ε < 1/(r+2)`.
    pub fn satisfies_inequalities(&self, alpha: f64, n: usize) -> bool {
        let bound = -2.0 * alpha / (1.0 + 2.0 * alpha * (n as f64 - 1.0));
        let r_ok = if alpha == 0.0 {
            self.r >= 0.0
        } else {
            self.r > bound
        };
        r_ok && self.eps < 1.0 / (self.r + 2.0) && self.a < 0.0 && self.b <= 0.0
    }
}

/// Deterministic weight rule: `r = max(0, −4α/(1+2α(n−1)))`,
/// `ε = 1/(2(r+2))`, `a = −2(1 − ε(r+2))`, `b = −2(2α + r(1+2α(n−1)))`.
/// Requires `α > −1/(2(n−1))`.
pub fn choose_weights(alpha: f64, n: usize) -> Result<Weights> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "weights need dimension ≥ 2, got {n}"
        )));
    }
    let m = 2.0 * (n as f64 - 1.0);
    if !(alpha > -1.0 / m) {
        return Err(Error::InvalidParameter(format!(
            "alpha must exceed −1/(2(n−1)) = {}, got {alpha}",
            -1.0 / m
        )));
    }
    let denom = 1.0 + 2.0 * alpha * (n as f64 - 1.0);
    let r = (-4.0 * alpha / denom).max(0.0);
    let eps = 1.0 / (2.0 * (r + 2.0));
    let a = -2.0 * (1.0 - eps * (r + 2.0));
    let b = -2.0 * (2.0 * alpha + r * denom);
    Ok(Weights { r, eps, a, b })
}

/// Outcome of the exponential-bound audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Growth bounded by `e^{C_fit t}` within tolerance.
    Pass,
    /// Entire series at or below the roundoff floor (identical-data case).
    PassWithFloor,
    Fail,
}

/// Result of fitting the exponential bound to an energy series.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(bound = "T: Serialize")]
pub struct GronwallReport<T: Real> {
    pub c_fit: T,
    pub max_violation: T,
    pub verdict: Verdict,
    pub floor: T,
    pub samples_used: usize,
}

/// Fit `C` as the largest consecutive-sample log-slope among samples above
/// `floor`, then measure the worst violation of
/// `log E(t₂) − log E(t₁) ≤ C (t₂ − t₁)` over all ordered pairs.
/// A series that starts at the floor must stay there; rising off the floor is
/// a failure regardless of the fit.
pub fn gronwall_audit<T: Real>(times: &[T], energy: &[T], floor: T) -> Result<GronwallReport<T>> {
    if times.len() != energy.len() {
        return Err(Error::InvalidParameter(
            "times and energies must have equal length".into(),
        ));
    }
    if times.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: times.len(),
        });
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "audit times must be strictly increasing".into(),
            ));
        }
    }
    if energy.iter().any(|e| !e.is_finite() || *e < T::zero()) {
        return Err(Error::NonFinite {
            context: "energy series".into(),
        });
    }
    let thresh = floor.max(real::<T>(1e-300));
    let above: Vec<usize> = (0..energy.len()).filter(|&i| energy[i] > thresh).collect();
    if above.is_empty() {
        return Ok(GronwallReport {
            c_fit: T::zero(),
            max_violation: T::zero(),
            verdict: Verdict::PassWithFloor,
            floor,
            samples_used: 0,
        });
    }
    if energy[0] <= thresh {
        // identical initial data grew off the floor: uniqueness violated
        return Ok(GronwallReport {
            c_fit: T::infinity(),
            max_violation: T::infinity(),
            verdict: Verdict::Fail,
            floor,
            samples_used: above.len(),
        });
    }
    if above.len() < 2 {
        // started above the floor and immediately decayed into it
        return Ok(GronwallReport {
            c_fit: T::zero(),
            max_violation: T::zero(),
            verdict: Verdict::Pass,
            floor,
            samples_used: above.len(),
        });
    }
    let mut c_fit = T::neg_infinity();
    for pair in above.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let slope = (energy[j].ln() - energy[i].ln()) / (times[j] - times[i]);
        c_fit = c_fit.max(slope);
    }
    let mut max_violation = T::neg_infinity();
    for (pi, &i) in above.iter().enumerate() {
        for &j in &above[pi + 1..] {
            let v = energy[j].ln() - energy[i].ln() - c_fit * (times[j] - times[i]);
            max_violation = max_violation.max(v);
        }
    }
    let verdict = if max_violation <= real::<T>(1e-9) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(GronwallReport {
        c_fit,
        max_violation,
        verdict,
        floor,
        samples_used: above.len(),
    })
}

/// A time series of difference energies, ready for the exponential audit and
/// for CSV export.
#[derive(Debug, Clone)]
pub struct EnergySeries<T: Real> {
    pub times: Vec<T>,
    pub g: Vec<T>,
    pub h: Vec<T>,
    pub k: Vec<T>,
    pub e: Vec<T>,
    pub r: T,
    pub eps: T,
    pub c_fit: Option<T>,
    pub max_violation: Option<T>,
}

impl<T: Real> EnergySeries<T> {
    pub fn new(r: T, eps: T) -> Self {
        EnergySeries {
            times: Vec::new(),
            g: Vec::new(),
            h: Vec::new(),
            k: Vec::new(),
            e: Vec::new(),
            r,
            eps,
            c_fit: None,
            max_violation: None,
        }
    }

    pub fn push(&mut self, t: T, g: T, h: T, k: T) {
        self.times.push(t);
        self.g.push(g);
        self.h.push(h);
        self.k.push(k);
        self.e.push(g + h + self.r * k);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Run the exponential audit and stamp the fitted values on the series.
    pub fn audit(&mut self, floor: T) -> Result<GronwallReport<T>> {
        let report = gronwall_audit(&self.times, &self.e, floor)?;
        self.c_fit = Some(report.c_fit);
        self.max_violation = Some(report.max_violation);
        Ok(report)
    }

    /// Columns: `t,G,H,K,E,C_fit_running` where the running fit is the max
    /// consecutive log-slope over the prefix (NaN until two usable samples).
    pub fn write_csv<W: IoWrite>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,G,H,K,E,C_fit_running")?;
        let guard = real::<T>(1e-300);
        let mut running = T::nan();
        let mut last_above: Option<usize> = None;
        for i in 0..self.len() {
            if self.e[i] > guard {
                if let Some(j) = last_above {
                    let slope =
                        (self.e[i].ln() - self.e[j].ln()) / (self.times[i] - self.times[j]);
                    running = if running.is_nan() { slope } else { running.max(slope) };
                }
                last_above = Some(i);
            }
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.times[i], self.g[i], self.h[i], self.k[i], self.e[i], running
            )?;
        }
        Ok(())
    }
}

/// Generic energy audit: `E(t) = Σ‖X_i(t)‖² + Σ‖Y_j(t)‖²` with norms taken in
/// the reference trajectory's metric at each sample. The X group is reported
/// as `H`, the Y group as `G`, with no `K` term.
pub fn abstract_energy_audit<T: Real>(
    times: &[T],
    x_parts: &[Vec<TensorField<T>>],
    y_parts: &[Vec<TensorField<T>>],
    reference: &[MetricField<T>],
) -> Result<EnergySeries<T>> {
    let n = times.len();
    if reference.len() != n
        || x_parts.iter().any(|p| p.len() != n)
        || y_parts.iter().any(|p| p.len() != n)
    {
        return Err(Error::InvalidParameter(
            "all trajectories must share the audit time grid".into(),
        ));
    }
    let mut series = EnergySeries::new(T::zero(), T::zero());
    for i in 0..n {
        let g = &reference[i];
        let mut h_energy = T::zero();
        for part in x_parts {
            h_energy += g.norm_sq(&part[i])?;
        }
        let mut g_energy = T::zero();
        for part in y_parts {
            g_energy += g.norm_sq(&part[i])?;
        }
        series.push(times[i], g_energy, h_energy, T::zero());
    }
    Ok(series)
}

/// Energy floor below which a difference series counts as "identically zero":
/// `1e-24` times the squared reference scale.
pub fn energy_floor<T: Real>(reference_scale: T) -> T {
    real::<T>(1e-24) * reference_scale * reference_scale
}

/// Audit a pair of sampled chart-backend trajectories for the order-`2k+2`
/// flow with coupling `alpha`: build a difference pack at every sample,
/// evaluate the weighted energies, and fit the exponential bound.
pub fn audit_pair<T: Real>(
    times: &[T],
    gs: &[MetricField<T>],
    g_tildes: &[MetricField<T>],
    k: usize,
    alpha: f64,
) -> Result<(EnergySeries<T>, GronwallReport<T>)> {
    if gs.len() != times.len() || g_tildes.len() != times.len() {
        return Err(Error::InvalidParameter(
            "trajectory samples must match the time grid".into(),
        ));
    }
    if times.is_empty() {
        return Err(Error::TooFewSamples { need: 3, got: 0 });
    }
    let n = gs[0].dim();
    let weights = choose_weights(alpha, n)?;
    let r = real::<T>(weights.r);
    let mut series = EnergySeries::new(r, real::<T>(weights.eps));
    for i in 0..times.len() {
        let pack = build_differences(&gs[i], &g_tildes[i], k)?;
        let (ge, he, ke, _) = pack.energies(r)?;
        series.push(times[i], ge, he, ke);
    }
    let scale = gs[0].value().max_abs().max(T::one());
    let report = series.audit(energy_floor(scale))?;
    Ok((series, report))
}

/// Audit a pair of homogeneous cross term flow trajectories: the energy is
/// `‖W‖² + ‖h‖² + ‖A‖²` (X group `{W}`, Y group `{h, A}`) in the reference
/// frame metric at each sample.
pub fn audit_frame_xcf_pair<T: Real>(
    times: &[T],
    fs: &[FrameMetric<T>],
    f_tildes: &[FrameMetric<T>],
) -> Result<(EnergySeries<T>, GronwallReport<T>)> {
    if fs.len() != times.len() || f_tildes.len() != times.len() {
        return Err(Error::InvalidParameter(
            "trajectory samples must match the time grid".into(),
        ));
    }
    if times.is_empty() {
        return Err(Error::TooFewSamples { need: 3, got: 0 });
    }
    let mut series = EnergySeries::new(T::zero(), T::zero());
    for i in 0..times.len() {
        let pack = frame_xcf_pack(&fs[i], &f_tildes[i])?;
        let f = &fs[i];
        let w_full: Vec<T> = (0..9)
            .map(|c| if c / 3 == c % 3 { pack.w[c / 3] } else { T::zero() })
            .collect();
        let h_full: Vec<T> = (0..9)
            .map(|c| if c / 3 == c % 3 { pack.h[c / 3] } else { T::zero() })
            .collect();
        let mut a_flat = Vec::with_capacity(27);
        for k in 0..3 {
            for ii in 0..3 {
                for j in 0..3 {
                    a_flat.push(pack.conn_diff[k][ii][j]);
                }
            }
        }
        let h_energy = frame_norm_sq(f, &w_full, 0, 2);
        let g_energy = frame_norm_sq(f, &h_full, 0, 2) + frame_norm_sq(f, &a_flat, 1, 2);
        series.push(times[i], g_energy, h_energy, T::zero());
    }
    let scale = fs[0]
        .coeffs
        .iter()
        .fold(T::one(), |acc, &a| acc.max(a));
    let report = series.audit(energy_floor(scale))?;
    Ok((series, report))
}

/// Frame-backend difference energies for the second-order flow (`k = 0`):
/// `G = ‖h‖² + ‖A‖²`, `H = ‖Rm − R̃m‖²`, `K = (S − S̃)²·Vol`.
pub fn frame_difference_energies<T: Real>(
    f: &FrameMetric<T>,
    f_tilde: &FrameMetric<T>,
    r: T,
) -> (T, T, T, T) {
    let mut h_full = [T::zero(); 9];
    for i in 0..3 {
        h_full[i * 3 + i] = f.coeffs[i] - f_tilde.coeffs[i];
    }
    let gam = f.christoffel();
    let gam_t = f_tilde.christoffel();
    let mut a_flat = [T::zero(); 27];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                a_flat[(k * 3 + i) * 3 + j] = gam[k][i][j] - gam_t[k][i][j];
            }
        }
    }
    let rm = f.riemann_frame();
    let rm_t = f_tilde.riemann_frame();
    let mut x0 = [T::zero(); 81];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    x0[((i * 3 + j) * 3 + k) * 3 + l] = rm[i][j][k][l] - rm_t[i][j][k][l];
                }
            }
        }
    }
    let ds = f.curvature().scalar - f_tilde.curvature().scalar;
    let g_energy = frame_norm_sq(f, &h_full, 0, 2) + frame_norm_sq(f, &a_flat, 1, 2);
    let h_energy = frame_norm_sq(f, &x0, 0, 4);
    let k_energy = ds * ds * f.volume();
    (g_energy, h_energy, k_energy, g_energy + h_energy + r * k_energy)
}

/// Audit a pair of homogeneous second-order flow trajectories with the
/// `k = 0` difference energies.
pub fn audit_frame_ricci_pair<T: Real>(
    times: &[T],
    fs: &[FrameMetric<T>],
    f_tildes: &[FrameMetric<T>],
) -> Result<(EnergySeries<T>, GronwallReport<T>)> {
    if fs.len() != times.len() || f_tildes.len() != times.len() {
        return Err(Error::InvalidParameter(
            "trajectory samples must match the time grid".into(),
        ));
    }
    if times.is_empty() {
        return Err(Error::TooFewSamples { need: 3, got: 0 });
    }
    let mut series = EnergySeries::new(T::zero(), T::zero());
    for i in 0..times.len() {
        let (ge, he, ke, _) = frame_difference_energies(&fs[i], &f_tildes[i], T::zero());
        series.push(times[i], ge, he, ke);
    }
    let scale = fs[0]
        .coeffs
        .iter()
        .fold(T::one(), |acc, &a| acc.max(a));
    let report = series.audit(energy_floor(scale))?;
    Ok((series, report))
}
