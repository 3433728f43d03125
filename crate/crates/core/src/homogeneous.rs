//! Exact backend for homogeneous three-dimensional geometries.
//!
//! Metrics are diagonal in a fixed frame `e_1, e_2, e_3` whose brackets are
//! `[e_i, e_j] = ε_{ijk} c_k e_k`. All curvature quantities reduce to closed
//! algebraic expressions in the structure constants `c_i` and the metric
//! coefficients `a_i`, so this backend can evolve geometries (round and
//! squashed spheres, nilmanifolds, solvable geometries) that no periodic
//! chart can represent, and serves as an exact oracle for the chart backend.

use crate::error::{Error, Result};
use crate::field::{sym2_from_coords, TensorField};
use crate::flows::FlowSpec;
use crate::grid::{ChartGrid, FdOrder};
use crate::metric::MetricField;
use crate::scalar::{real, Real};
use std::sync::Arc;

/// Levi-Civita symbol on three indices.
fn epsilon(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn encode3(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * 3 + i)
}

/// Frame Christoffel symbols, `gamma[k][i][j] = Γ^k_{ij}` meaning
/// `∇_{e_i} e_j = Γ^k_{ij} e_k`.
pub type FrameConnection<T> = [[[T; 3]; 3]; 3];

/// A left-invariant diagonal metric `g = diag(a_1, a_2, a_3)` on a
/// three-dimensional unimodular Lie group with `[e_i, e_j] = ε_{ijk} c_k e_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMetric<T: Real> {
    /// Structure constants `c_1, c_2, c_3`.
    pub structure: [T; 3],
    /// Metric coefficients `a_1, a_2, a_3` (all positive).
    pub coeffs: [T; 3],
    /// Total coordinate volume of the reference frame domain; the Riemannian
    /// volume is `√(a_1 a_2 a_3) ·` this number.
    pub volume_norm: T,
}

/// Closed-form curvature data of a [`FrameMetric`].
///
/// `_on` suffixed arrays hold orthonormal-frame components; `_frame` suffixed
/// arrays hold components in the defining frame (diagonal entries `a_i ·`
/// orthonormal value for covariant 2-tensors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameCurvature<T: Real> {
    /// `γ_i = c_i a_i / √(a_1 a_2 a_3)`.
    pub gamma: [T; 3],
    /// `μ_i = (γ_1 + γ_2 + γ_3)/2 − γ_i`.
    pub mu: [T; 3],
    /// `sectional[i]` is the curvature of the plane orthogonal to `e_i`.
    pub sectional: [T; 3],
    pub ricci_on: [T; 3],
    pub ricci_frame: [T; 3],
    pub scalar: T,
    pub einstein_on: [T; 3],
    pub einstein_frame: [T; 3],
}

impl<T: Real> FrameMetric<T> {
    pub fn new(structure: [T; 3], coeffs: [T; 3], volume_norm: T) -> Result<Self> {
        for (i, &a) in coeffs.iter().enumerate() {
            if !(a.is_finite() && a > T::zero()) {
                return Err(Error::LostPositivity {
                    node: i,
                    eigenvalue: a.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        if !structure.iter().all(|c| c.is_finite()) || !volume_norm.is_finite()
            || volume_norm <= T::zero()
        {
            return Err(Error::InvalidParameter(
                "frame structure constants and volume must be finite, volume positive".into(),
            ));
        }
        Ok(FrameMetric {
            structure,
            coeffs,
            volume_norm,
        })
    }

    /// Berger-sphere family: structure `(2,2,2)`; coefficients `(1,1,1)` give
    /// the unit round three-sphere (volume `2π²`).
    pub fn su2() -> Self {
        let two = real::<T>(2.0);
        FrameMetric {
            structure: [two, two, two],
            coeffs: [T::one(), T::one(), T::one()],
            volume_norm: real::<T>(2.0) * T::PI() * T::PI(),
        }
    }

    /// Nilpotent geometry: structure `(2,0,0)` on a unit-volume quotient.
    pub fn nil() -> Self {
        FrameMetric {
            structure: [real::<T>(2.0), T::zero(), T::zero()],
            coeffs: [T::one(), T::one(), T::one()],
            volume_norm: T::one(),
        }
    }

    /// Solvable geometry: structure `(2,−2,0)` on a unit-volume quotient.
    pub fn sol() -> Self {
        FrameMetric {
            structure: [real::<T>(2.0), real::<T>(-2.0), T::zero()],
            coeffs: [T::one(), T::one(), T::one()],
            volume_norm: T::one(),
        }
    }

    /// Same geometry with different metric coefficients.
    pub fn with_coeffs(&self, coeffs: [T; 3]) -> Result<Self> {
        FrameMetric::new(self.structure, coeffs, self.volume_norm)
    }

    /// `√(a_1 a_2 a_3)`, the volume density relative to the frame.
    pub fn nu(&self) -> T {
        (self.coeffs[0] * self.coeffs[1] * self.coeffs[2]).sqrt()
    }

    /// Riemannian volume.
    pub fn volume(&self) -> T {
        self.nu() * self.volume_norm
    }

    /// All curvature invariants in closed form.
    pub fn curvature(&self) -> FrameCurvature<T> {
        let a = self.coeffs;
        let c = self.structure;
        let nu = self.nu();
        let gamma = [a[0] * c[0] / nu, a[1] * c[1] / nu, a[2] * c[2] / nu];
        let half_sum = (gamma[0] + gamma[1] + gamma[2]) / real::<T>(2.0);
        let mu = [half_sum - gamma[0], half_sum - gamma[1], half_sum - gamma[2]];
        let mut sectional = [T::zero(); 3];
        let mut ricci_on = [T::zero(); 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            sectional[i] = gamma[i] * mu[i] - mu[j] * mu[k];
            ricci_on[i] = real::<T>(2.0) * mu[j] * mu[k];
        }
        let scalar = real::<T>(2.0) * (mu[0] * mu[1] + mu[1] * mu[2] + mu[2] * mu[0]);
        let half_s = scalar / real::<T>(2.0);
        let einstein_on = [
            ricci_on[0] - half_s,
            ricci_on[1] - half_s,
            ricci_on[2] - half_s,
        ];
        FrameCurvature {
            gamma,
            mu,
            sectional,
            ricci_on,
            ricci_frame: [a[0] * ricci_on[0], a[1] * ricci_on[1], a[2] * ricci_on[2]],
            scalar,
            einstein_on,
            einstein_frame: [
                a[0] * einstein_on[0],
                a[1] * einstein_on[1],
                a[2] * einstein_on[2],
            ],
        }
    }

    /// Levi-Civita connection in the frame: nonzero only on fully distinct
    /// index triples,
    /// `Γ^k_{ij} = ε_{ijk} (c_k a_k − c_i a_i + c_j a_j) / (2 a_k)`.
    pub fn christoffel(&self) -> FrameConnection<T> {
        let a = self.coeffs;
        let c = self.structure;
        let mut gam = [[[T::zero(); 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let eps = epsilon(i, j, k);
                    if eps != 0.0 {
                        gam[k][i][j] = real::<T>(eps)
                            * (c[k] * a[k] - c[i] * a[i] + c[j] * a[j])
                            / (real::<T>(2.0) * a[k]);
                    }
                }
            }
        }
        gam
    }

    /// Full covariant curvature tensor `R_{ijkl}` in the frame, assembled
    /// from the connection and the bracket — an independent path from the
    /// closed-form sectional curvatures, used to cross-validate them.
    pub fn riemann_frame(&self) -> [[[[T; 3]; 3]; 3]; 3] {
        let gam = self.christoffel();
        let a = self.coeffs;
        let c = self.structure;
        let mut rm = [[[[T::zero(); 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        // R^l_{ijk} = Γ^m_{jk}Γ^l_{im} − Γ^m_{ik}Γ^l_{jm}
                        //             − ε_{ijn} c_n Γ^l_{nk}
                        let mut up = T::zero();
                        for m in 0..3 {
                            up += gam[m][j][k] * gam[l][i][m] - gam[m][i][k] * gam[l][j][m];
                        }
                        for n in 0..3 {
                            let eps = epsilon(i, j, n);
                            if eps != 0.0 {
                                up -= real::<T>(eps) * c[n] * gam[l][n][k];
                            }
                        }
                        rm[i][j][k][l] = a[l] * up;
                    }
                }
            }
        }
        rm
    }
}

/// Covariant derivative of a frame-constant `(p,q)` tensor (row-major
/// components, contravariant block first, last index fastest). The new
/// covariant index is inserted at tuple position `p`, matching the chart
/// backend's layout.
pub fn frame_cov_deriv<T: Real>(
    comps: &[T],
    p: usize,
    q: usize,
    gamma: &FrameConnection<T>,
) -> Vec<T> {
    let rank_in = p + q;
    assert_eq!(comps.len(), 3usize.pow(rank_in as u32), "component count");
    let rank_out = rank_in + 1;
    let mut out = vec![T::zero(); 3usize.pow(rank_out as u32)];
    let mut idx = [0usize; 9];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut rem = c;
        for s in (0..rank_out).rev() {
            idx[s] = rem % 3;
            rem /= 3;
        }
        let deriv = idx[p];
        let mut in_idx = [0usize; 8];
        in_idx[..p].copy_from_slice(&idx[..p]);
        for s in (p + 1)..rank_out {
            in_idx[s - 1] = idx[s];
        }
        let mut val = T::zero();
        for s in 0..p {
            let u = in_idx[s];
            for m in 0..3 {
                let mut tmp = in_idx;
                tmp[s] = m;
                val += gamma[u][deriv][m] * comps[encode3(&tmp[..rank_in])];
            }
        }
        for s in p..rank_in {
            let d = in_idx[s];
            for m in 0..3 {
                let mut tmp = in_idx;
                tmp[s] = m;
                val -= gamma[m][deriv][d] * comps[encode3(&tmp[..rank_in])];
            }
        }
        *slot = val;
    }
    out
}

/// Contract tuple slots `s1 < s2` of a rank-`rank` frame tensor against a
/// diagonal weight (e.g. `1/a_i` for the inverse metric).
pub fn frame_contract_pair<T: Real>(
    comps: &[T],
    rank: usize,
    s1: usize,
    s2: usize,
    weights: &[T; 3],
) -> Vec<T> {
    assert!(s1 < s2 && s2 < rank);
    assert_eq!(comps.len(), 3usize.pow(rank as u32));
    let rank_out = rank - 2;
    let mut out = vec![T::zero(); 3usize.pow(rank_out as u32)];
    let mut idx = [0usize; 9];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut rem = c;
        for s in (0..rank_out).rev() {
            idx[s] = rem % 3;
            rem /= 3;
        }
        // rebuild full index with the contracted pair set to `m`
        let mut full = [0usize; 9];
        let mut src = 0usize;
        for (s, f) in full.iter_mut().enumerate().take(rank) {
            if s == s1 || s == s2 {
                *f = 0;
            } else {
                *f = idx[src];
                src += 1;
            }
        }
        let mut val = T::zero();
        for m in 0..3 {
            full[s1] = m;
            full[s2] = m;
            val += weights[m] * comps[encode3(&full[..rank])];
        }
        *slot = val;
    }
    out
}

/// Rough Laplacian `g^{ab} ∇_a ∇_b` of a frame-constant `(p,q)` tensor.
/// Although the components are constant, the frame is anholonomic, so the
/// result is generally nonzero.
pub fn frame_laplacian<T: Real>(comps: &[T], p: usize, q: usize, fm: &FrameMetric<T>) -> Vec<T> {
    let gamma = fm.christoffel();
    let d1 = frame_cov_deriv(comps, p, q, &gamma);
    let d2 = frame_cov_deriv(&d1, p, q + 1, &gamma);
    let w = [
        T::one() / fm.coeffs[0],
        T::one() / fm.coeffs[1],
        T::one() / fm.coeffs[2],
    ];
    frame_contract_pair(&d2, p + q + 2, p, p + 1, &w)
}

/// Degenerate-elliptic operator `E^{ab} ∇_a ∇_b` with diagonal weights
/// `E^{aa} = e_on[a]/a_a` (orthonormal Einstein components over coefficients).
pub fn frame_box_operator<T: Real>(
    comps: &[T],
    p: usize,
    q: usize,
    fm: &FrameMetric<T>,
    e_on: &[T; 3],
) -> Vec<T> {
    let gamma = fm.christoffel();
    let d1 = frame_cov_deriv(comps, p, q, &gamma);
    let d2 = frame_cov_deriv(&d1, p, q + 1, &gamma);
    let w = [
        e_on[0] / fm.coeffs[0],
        e_on[1] / fm.coeffs[1],
        e_on[2] / fm.coeffs[2],
    ];
    frame_contract_pair(&d2, p + q + 2, p, p + 1, &w)
}

/// Pointwise squared norm of a frame tensor: up slots lowered with
/// `diag(a_i)`, down slots raised with `diag(1/a_i)`.
pub fn frame_pointwise_norm_sq<T: Real>(
    fm: &FrameMetric<T>,
    comps: &[T],
    p: usize,
    q: usize,
) -> T {
    let rank = p + q;
    assert_eq!(comps.len(), 3usize.pow(rank as u32));
    let mut idx = [0usize; 9];
    let mut total = T::zero();
    for (c, &v) in comps.iter().enumerate() {
        let mut rem = c;
        for s in (0..rank).rev() {
            idx[s] = rem % 3;
            rem /= 3;
        }
        let mut w = T::one();
        for (s, &i) in idx.iter().enumerate().take(rank) {
            if s < p {
                w *= fm.coeffs[i];
            } else {
                w /= fm.coeffs[i];
            }
        }
        total += w * v * v;
    }
    total
}

/// Integrated squared norm `∫ |T|² dμ` (pointwise norm times volume).
pub fn frame_norm_sq<T: Real>(fm: &FrameMetric<T>, comps: &[T], p: usize, q: usize) -> T {
    frame_pointwise_norm_sq(fm, comps, p, q) * fm.volume()
}

/// Cross term flow data in the frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameXcf<T: Real> {
    /// Orthonormal Einstein components (negatives of the sectional
    /// curvatures).
    pub einstein_on: [T; 3],
    /// Frame components of `V = (E^{··})^{-1}`: `V_{ii} = a_i / e_on[i]`.
    pub v_frame: [T; 3],
    /// `P = det E_{ij} / det g_{ij} = Π e_on[i]`.
    pub det_ratio: T,
    /// Frame components of `X = P·V`: `X_{ii} = a_i e_on[j] e_on[k]`.
    pub x_frame: [T; 3],
    /// Orthonormal components of `X`.
    pub x_on: [T; 3],
}

impl<T: Real> FrameXcf<T> {
    /// Smallest orthonormal eigenvalue of `−σE`; positive means `σE` is
    /// negative definite, the flow's gate.
    pub fn margin(&self, sigma: i8) -> Result<T> {
        if sigma != 1 && sigma != -1 {
            return Err(Error::InvalidFlowSpec(format!(
                "sigma must be +1 or -1, got {sigma}"
            )));
        }
        let s = real::<T>(-f64::from(sigma));
        let vals = [
            s * self.einstein_on[0],
            s * self.einstein_on[1],
            s * self.einstein_on[2],
        ];
        Ok(vals[0].min(vals[1]).min(vals[2]))
    }
}

/// Assemble the cross term flow tensors for a frame metric.
pub fn frame_xcf_algebra<T: Real>(fm: &FrameMetric<T>) -> Result<FrameXcf<T>> {
    let cur = fm.curvature();
    let e_on = cur.einstein_on;
    let det_ratio = e_on[0] * e_on[1] * e_on[2];
    let ratio = det_ratio.abs().to_f64().unwrap_or(0.0);
    if !ratio.is_finite() || ratio < crate::flows::EINSTEIN_DET_CUTOFF {
        return Err(Error::NonInvertibleEinstein { node: 0, ratio });
    }
    let a = fm.coeffs;
    let mut v_frame = [T::zero(); 3];
    let mut x_frame = [T::zero(); 3];
    let mut x_on = [T::zero(); 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        v_frame[i] = a[i] / e_on[i];
        x_on[i] = e_on[j] * e_on[k];
        x_frame[i] = a[i] * x_on[i];
    }
    Ok(FrameXcf {
        einstein_on: e_on,
        v_frame,
        det_ratio,
        x_frame,
        x_on,
    })
}

/// Frame components of `∂_t a_i` for the flows this backend integrates
/// (second-order and cross term). Higher-order flows need the chart backend.
pub fn frame_flow_rhs<T: Real>(fm: &FrameMetric<T>, spec: &FlowSpec) -> Result<[T; 3]> {
    spec.validate(3)?;
    match spec {
        FlowSpec::Ricci => {
            let rc = fm.curvature().ricci_frame;
            let m2 = real::<T>(-2.0);
            Ok([m2 * rc[0], m2 * rc[1], m2 * rc[2]])
        }
        FlowSpec::Xcf { sigma } => {
            let alg = frame_xcf_algebra(fm)?;
            let margin = alg.margin(*sigma)?;
            if margin <= T::zero() {
                return Err(Error::DefinitenessViolated {
                    node: 0,
                    eigenvalue: margin.to_f64().unwrap_or(f64::NAN),
                });
            }
            let s = real::<T>(-2.0 * f64::from(*sigma));
            Ok([s * alg.x_frame[0], s * alg.x_frame[1], s * alg.x_frame[2]])
        }
        FlowSpec::L2 | FlowSpec::Family { .. } => Err(Error::WrongBackend {
            required: "chart",
            got: "frame",
        }),
    }
}

/// Static fourth-order right-hand side in the frame (not integrated in time;
/// used as an exact oracle for the chart backend's curvature algebra).
/// Returns frame components, row-major 3×3.
pub fn frame_l2_rhs<T: Real>(fm: &FrameMetric<T>) -> [[T; 3]; 3] {
    let a = fm.coeffs;
    let cur = fm.curvature();
    let rm = fm.riemann_frame();
    let mut rc = [[T::zero(); 3]; 3];
    for i in 0..3 {
        rc[i][i] = cur.ricci_frame[i];
    }
    // 2 Δ Rc (the Hessian of the constant scalar curvature vanishes)
    let rc_flat: Vec<T> = (0..9).map(|c| rc[c / 3][c % 3]).collect();
    let lap = frame_laplacian(&rc_flat, 0, 2, fm);
    // quadratic completion with the diagonal metric
    let inv = [T::one() / a[0], T::one() / a[1], T::one() / a[2]];
    let two = real::<T>(2.0);
    let quarter = real::<T>(0.25);
    let mut rup = [[[[T::zero(); 3]; 3]; 3]; 3];
    for i in 0..3 {
        for p in 0..3 {
            for q in 0..3 {
                for r in 0..3 {
                    rup[i][p][q][r] = inv[p] * inv[q] * inv[r] * rm[i][p][q][r];
                }
            }
        }
    }
    let mut rm_sq = T::zero();
    for i in 0..3 {
        for p in 0..3 {
            for q in 0..3 {
                for r in 0..3 {
                    rm_sq += inv[i] * rup[i][p][q][r] * rm[i][p][q][r];
                }
            }
        }
    }
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut term1 = T::zero();
            for p in 0..3 {
                for q in 0..3 {
                    // Rc^{pq} is diagonal: rc[p][p]/a_p²
                    if p == q {
                        term1 += rc[p][p] * inv[p] * inv[p] * rm[i][p][q][j];
                    }
                }
            }
            let mut rc2 = T::zero();
            for m in 0..3 {
                rc2 += rc[i][m] * inv[m] * rc[m][j];
            }
            let mut term3 = T::zero();
            for p in 0..3 {
                for q in 0..3 {
                    for r in 0..3 {
                        term3 += rup[i][p][q][r] * rm[j][p][q][r];
                    }
                }
            }
            let gij = if i == j { a[i] } else { T::zero() };
            out[i][j] = two * lap[i * 3 + j] + two * term1 - two * rc2 + term3
                - quarter * rm_sq * gij;
        }
    }
    out
}

/// A flat periodic box whose coordinate volume equals the frame's reference
/// volume, carrying the frame metric as constant diagonal components. Norms
/// of frame-constant tensors agree exactly between the two backends on it.
pub fn lift_metric_to_grid<T: Real>(
    fm: &FrameMetric<T>,
    extent: usize,
    fd: FdOrder,
) -> Result<MetricField<T>> {
    let side = fm.volume_norm.powf(T::one() / real::<T>(3.0));
    let grid = Arc::new(ChartGrid::new(&[extent; 3], &[side; 3], fd)?);
    let coeffs = fm.coeffs;
    let g = sym2_from_coords(grid, move |_x, i, j| {
        if i == j {
            coeffs[i]
        } else {
            T::zero()
        }
    });
    MetricField::new(g)
}

/// Constant diagonal covariant 2-tensor on an existing grid.
pub fn lift_sym2_to_grid<T: Real>(grid: Arc<ChartGrid<T>>, diag: [T; 3]) -> TensorField<T> {
    sym2_from_coords(grid, move |_x, i, j| if i == j { diag[i] } else { T::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::FlowSpec;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
    }

    #[test]
    fn unit_round_sphere_curvature() {
        let fm = FrameMetric::<f64>::su2();
        let cur = fm.curvature();
        for i in 0..3 {
            assert_close(cur.gamma[i], 2.0, 1e-14, "gamma");
            assert_close(cur.mu[i], 1.0, 1e-14, "mu");
            assert_close(cur.sectional[i], 1.0, 1e-14, "sectional");
            assert_close(cur.ricci_on[i], 2.0, 1e-14, "ricci");
            assert_close(cur.einstein_on[i], -1.0, 1e-14, "einstein");
        }
        assert_close(cur.scalar, 6.0, 1e-14, "scalar");
        assert_close(fm.volume(), 2.0 * std::f64::consts::PI.powi(2), 1e-12, "volume");
        let gam = fm.christoffel();
        assert_close(gam[2][0][1], 1.0, 1e-14, "gamma^3_12");
        assert_close(gam[2][1][0], -1.0, 1e-14, "gamma^3_21");
        let rhs = frame_flow_rhs(&fm, &FlowSpec::Ricci).unwrap();
        for r in rhs {
            assert_close(r, -4.0, 1e-14, "ricci rhs");
        }
    }

    #[test]
    fn scalar_curvature_scales_inversely_with_the_coefficient() {
        let fm = FrameMetric::<f64>::su2().with_coeffs([0.25, 0.25, 0.25]).unwrap();
        assert_close(fm.curvature().scalar, 24.0, 1e-12, "S = 6/t");
    }

    #[test]
    fn berger_sphere_sectional_curvatures() {
        let t = 0.3;
        let fm = FrameMetric::<f64>::su2().with_coeffs([t, 1.0, 1.0]).unwrap();
        let cur = fm.curvature();
        assert_close(cur.sectional[0], 4.0 - 3.0 * t, 1e-12, "base plane");
        assert_close(cur.sectional[1], t, 1e-12, "mixed plane");
        assert_close(cur.sectional[2], t, 1e-12, "mixed plane");
        assert_close(cur.scalar, 2.0 * (4.0 - t), 1e-12, "scalar");
        // isotropy in the base directions is preserved by the flows
        let rhs = frame_flow_rhs(&fm, &FlowSpec::Ricci).unwrap();
        assert_close(rhs[1], rhs[2], 1e-14, "base isotropy");
    }

    #[test]
    fn connection_riemann_agrees_with_closed_forms() {
        let cases = [
            FrameMetric::<f64>::su2(),
            FrameMetric::<f64>::su2().with_coeffs([0.3, 1.0, 1.0]).unwrap(),
            FrameMetric::<f64>::su2().with_coeffs([0.7, 1.3, 2.1]).unwrap(),
            FrameMetric::<f64>::nil(),
            FrameMetric::<f64>::sol(),
            FrameMetric::<f64>::nil().with_coeffs([0.5, 2.0, 1.5]).unwrap(),
        ];
        for fm in cases {
            let cur = fm.curvature();
            let rm = fm.riemann_frame();
            let a = fm.coeffs;
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                // sectional curvature of the plane (e_j, e_k)
                let sec = rm[j][k][k][j] / (a[j] * a[k]);
                assert_close(sec, cur.sectional[i], 1e-12, "sectional from Riemann");
            }
            // Ricci by contraction
            for j in 0..3 {
                for k in 0..3 {
                    let mut s = 0.0;
                    for i in 0..3 {
                        s += rm[i][j][k][i] / a[i];
                    }
                    let expect = if j == k { cur.ricci_frame[j] } else { 0.0 };
                    assert_close(s, expect, 1e-12, "ricci from Riemann");
                }
            }
        }
        // sign convention anchor: R_{1221} = +1 on the unit round sphere
        let rm = FrameMetric::<f64>::su2().riemann_frame();
        assert_close(rm[0][1][1][0], 1.0, 1e-14, "R_1221");
    }

    #[test]
    fn nil_and_sol_match_classical_values() {
        let nil = FrameMetric::<f64>::nil().curvature();
        assert_close(nil.ricci_on[0], 2.0, 1e-14, "nil ricci 1");
        assert_close(nil.ricci_on[1], -2.0, 1e-14, "nil ricci 2");
        assert_close(nil.ricci_on[2], -2.0, 1e-14, "nil ricci 3");
        assert_close(nil.scalar, -2.0, 1e-14, "nil scalar");
        let sol = FrameMetric::<f64>::sol().curvature();
        assert_close(sol.ricci_on[0], 0.0, 1e-14, "sol ricci 1");
        assert_close(sol.ricci_on[1], 0.0, 1e-14, "sol ricci 2");
        assert_close(sol.ricci_on[2], -8.0, 1e-14, "sol ricci 3");
        assert_close(sol.scalar, -8.0, 1e-14, "sol scalar");
    }

    #[test]
    fn rejects_degenerate_coefficients() {
        assert!(FrameMetric::<f64>::su2().with_coeffs([1.0, 0.0, 1.0]).is_err());
        assert!(FrameMetric::<f64>::su2().with_coeffs([1.0, -0.5, 1.0]).is_err());
        assert!(FrameMetric::<f64>::su2().with_coeffs([1.0, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn cross_term_flow_on_the_round_sphere() {
        let fm = FrameMetric::<f64>::su2();
        let alg = frame_xcf_algebra(&fm).unwrap();
        for i in 0..3 {
            assert_close(alg.einstein_on[i], -1.0, 1e-14, "E");
            assert_close(alg.v_frame[i], -1.0, 1e-14, "V");
            assert_close(alg.x_frame[i], 1.0, 1e-14, "X");
        }
        assert_close(alg.det_ratio, -1.0, 1e-14, "P");
        assert_close(alg.margin(1).unwrap(), 1.0, 1e-14, "margin");
        let rhs = frame_flow_rhs(&fm, &FlowSpec::Xcf { sigma: 1 }).unwrap();
        for r in rhs {
            assert_close(r, -2.0, 1e-14, "xcf rhs");
        }
        // a(t)² = 1 − 4t for the round solution: at a = 1/2 the slope is −4
        let shrunk = fm.with_coeffs([0.5, 0.5, 0.5]).unwrap();
        let rhs = frame_flow_rhs(&shrunk, &FlowSpec::Xcf { sigma: 1 }).unwrap();
        for r in rhs {
            assert_close(r, -4.0, 1e-12, "xcf rhs at a = 1/2");
        }
    }

    #[test]
    fn indefinite_einstein_tensor_blocks_the_cross_term_flow() {
        let fm = FrameMetric::<f64>::nil();
        let alg = frame_xcf_algebra(&fm).unwrap();
        assert!(alg.margin(1).unwrap() < 0.0);
        assert!(alg.margin(-1).unwrap() < 0.0);
        for sigma in [1i8, -1] {
            match frame_flow_rhs(&fm, &FlowSpec::Xcf { sigma }) {
                Err(Error::DefinitenessViolated { .. }) => {}
                other => panic!("expected DefinitenessViolated, got {other:?}"),
            }
        }
        assert!(matches!(
            frame_flow_rhs(&fm, &FlowSpec::L2),
            Err(Error::WrongBackend { .. })
        ));
    }

    #[test]
    fn metric_is_parallel_and_einstein_metrics_have_parallel_ricci() {
        let fm = FrameMetric::<f64>::su2().with_coeffs([0.8, 0.8, 0.8]).unwrap();
        let a = fm.coeffs;
        let g_flat: Vec<f64> = (0..9)
            .map(|c| if c / 3 == c % 3 { a[c / 3] } else { 0.0 })
            .collect();
        let gamma = fm.christoffel();
        let dg = frame_cov_deriv(&g_flat, 0, 2, &gamma);
        assert!(dg.iter().all(|v| v.abs() < 1e-13), "metric not parallel");
        let lap_g = frame_laplacian(&g_flat, 0, 2, &fm);
        assert!(lap_g.iter().all(|v| v.abs() < 1e-12));
        // round: Rc = 2κ g is parallel too
        let cur = fm.curvature();
        let rc_flat: Vec<f64> = (0..9)
            .map(|c| if c / 3 == c % 3 { cur.ricci_frame[c / 3] } else { 0.0 })
            .collect();
        let lap_rc = frame_laplacian(&rc_flat, 0, 2, &fm);
        assert!(lap_rc.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn fourth_order_rhs_on_round_spheres() {
        for a in [1.0, 2.0, 0.5] {
            let fm = FrameMetric::<f64>::su2().with_coeffs([a, a, a]).unwrap();
            let out = frame_l2_rhs(&fm);
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 / a } else { 0.0 };
                    assert_close(out[i][j], expect, 1e-11, "l2 rhs");
                }
            }
        }
    }

    #[test]
    fn norms_match_between_frame_and_lifted_grid() {
        let fm = FrameMetric::<f64>::su2().with_coeffs([0.4, 1.1, 2.3]).unwrap();
        let w = [1.5, -0.3, 2.0];
        let w_flat: Vec<f64> = (0..9)
            .map(|c| if c / 3 == c % 3 { w[c / 3] } else { 0.0 })
            .collect();
        let frame_val = frame_norm_sq(&fm, &w_flat, 0, 2);
        let g = lift_metric_to_grid(&fm, 8, FdOrder::Four).unwrap();
        let w_grid = lift_sym2_to_grid(g.grid().clone(), w);
        let grid_val = g.norm_sq(&w_grid).unwrap();
        assert_close(grid_val, frame_val, 1e-10 * frame_val.abs().max(1.0), "norms");
        // pointwise norm for a mixed-rank example: the metric itself has |g|² = 3
        let g_flat: Vec<f64> = (0..9)
            .map(|c| if c / 3 == c % 3 { fm.coeffs[c / 3] } else { 0.0 })
            .collect();
        assert_close(frame_pointwise_norm_sq(&fm, &g_flat, 0, 2), 3.0, 1e-12, "|g|²");
    }
}
