//! Riemannian tensor calculus on metric fields: Levi-Civita connection,
//! covariant derivatives, rough Laplacians, traces, divergence, Lie
//! derivatives, and the Kulkarni–Nomizu product.
//!
//! Index bookkeeping convention: a covariant derivative *prepends* its new
//! index as the first covariant slot, so `(∇∇T)[c2, c1, ...] = ∇_{c2}∇_{c1}T`
//! and the rough Laplacian contracts those two leading slots with `g^{ab}`.

pub mod commutator;
pub mod curvature;

use crate::error::{Error, Result};
use crate::field::{decode_tuple, SymmetryPair, TensorField, MAX_RANK};
use crate::linalg::SmallMat;
use crate::metric::MetricField;
use crate::scalar::{real, Real};

/// Levi-Civita connection coefficients of a metric.
#[derive(Clone, Debug)]
pub struct Connection<T: Real> {
    /// `Γ^k_{ij}` as a rank-(1,2) field, symmetric in the lower pair.
    gamma: TensorField<T>,
}

impl<T: Real> Connection<T> {
    pub fn gamma(&self) -> &TensorField<T> {
        &self.gamma
    }

    pub fn from_gamma(gamma: TensorField<T>) -> Result<Self> {
        if gamma.rank() != (1, 2) {
            let (p, q) = gamma.rank();
            return Err(Error::RankMismatch {
                expected_up: 1,
                expected_down: 2,
                got_up: p,
                got_down: q,
            });
        }
        Ok(Self { gamma })
    }
}

/// `Γ^k_{ij} = ½ g^{km} (∂_i g_{jm} + ∂_j g_{im} − ∂_m g_{ij})`.
pub fn christoffel<T: Real>(g: &MetricField<T>) -> Connection<T> {
    let dim = g.dim();
    let grid = g.grid().clone();
    let mut dg = Vec::with_capacity(dim);
    for axis in 0..dim {
        dg.push(
            g.value()
                .partial_derivative(axis)
                .expect("axis < dim by construction"),
        );
    }
    let mut gamma = TensorField::zeros(grid.clone(), 1, 2);
    let half = real::<T>(0.5);
    for node in 0..grid.node_count() {
        let inv = g.node_inv(node);
        let out = gamma.node_slice_mut(node);
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = T::zero();
                    for m in 0..dim {
                        let di = dg[i].node_slice(node)[j * dim + m];
                        let dj = dg[j].node_slice(node)[i * dim + m];
                        let dm = dg[m].node_slice(node)[i * dim + j];
                        s += inv[k][m] * (di + dj - dm);
                    }
                    out[(k * dim + i) * dim + j] = half * s;
                }
            }
        }
    }
    Connection {
        gamma: gamma.with_symmetries(vec![SymmetryPair::Symmetric(1, 2)]),
    }
}

/// Covariant derivative: output rank (p, q+1), new index first in the
/// covariant block.  `(∇T)^{u..}_{c l..} = ∂_c T + Γ-corrections`.
pub fn covariant_derivative<T: Real>(
    t: &TensorField<T>,
    conn: &Connection<T>,
) -> Result<TensorField<T>> {
    if !t.grid().same_layout(conn.gamma.grid()) {
        return Err(Error::GridMismatch);
    }
    let grid = t.grid().clone();
    let dim = grid.dim();
    let (p, q) = t.rank();
    let rank_in = p + q;
    let mut partials = Vec::with_capacity(dim);
    for axis in 0..dim {
        partials.push(t.partial_derivative(axis)?);
    }
    let mut out = TensorField::zeros(grid.clone(), p, q + 1);
    let cpn_out = out.comps_per_node();
    let mut tuple = [0usize; MAX_RANK];
    // strides of the input tuple
    let mut stride_in = [0usize; MAX_RANK];
    for s in 0..rank_in {
        stride_in[s] = dim.pow((rank_in - 1 - s) as u32);
    }
    for node in 0..grid.node_count() {
        let gam = conn.gamma.node_slice(node);
        let t_slice = t.node_slice(node);
        for c_out in 0..cpn_out {
            decode_tuple(c_out, dim, rank_in + 1, &mut tuple);
            // tuple = [u_0..u_{p-1}, c_new, l_0..l_{q-1}]
            let c_new = tuple[p];
            // offset of [u.., l..] in the input tuple
            let mut c_in = 0;
            for s in 0..p {
                c_in = c_in * dim + tuple[s];
            }
            for s in 0..q {
                c_in = c_in * dim + tuple[p + 1 + s];
            }
            let mut v = partials[c_new].node_slice(node)[c_in];
            // + Γ^{u_s}_{c_new m} T^{..m..}
            for s in 0..p {
                let u = tuple[s];
                let base = c_in - u * stride_in[s];
                let grow = (u * dim + c_new) * dim;
                for m in 0..dim {
                    v += gam[grow + m] * t_slice[base + m * stride_in[s]];
                }
            }
            // − Γ^{m}_{c_new l_s} T^{..m..}
            for s in 0..q {
                let l = tuple[p + 1 + s];
                let slot_in = p + s;
                let base = c_in - l * stride_in[slot_in];
                for m in 0..dim {
                    v -= gam[(m * dim + c_new) * dim + l] * t_slice[base + m * stride_in[slot_in]];
                }
            }
            out.node_slice_mut(node)[c_out] = v;
        }
    }
    Ok(out)
}

/// How a pair of slots is contracted.
enum PairWeight {
    /// `g^{ab}` — both slots must be covariant.
    Inverse,
    /// `g_{ab}` — both slots must be contravariant.
    Metric,
    /// `δ^a_b` — one contravariant, one covariant slot.
    Kronecker,
}

fn contract_pair<T: Real>(
    w: &TensorField<T>,
    g: &MetricField<T>,
    s1: usize,
    s2: usize,
    weight: PairWeight,
    out_rank: (usize, usize),
) -> TensorField<T> {
    let (s1, s2) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
    let dim = w.grid().dim();
    let rank = w.total_rank();
    debug_assert!(s2 < rank && s1 != s2);
    let mut out = TensorField::zeros(w.grid().clone(), out_rank.0, out_rank.1);
    let cpn_out = out.comps_per_node();
    let rank_out = rank - 2;
    let mut tuple_out = [0usize; MAX_RANK];
    let mut tuple_in = [0usize; MAX_RANK];
    for node in 0..w.grid().node_count() {
        let mat: Option<SmallMat<T>> = match weight {
            PairWeight::Inverse => Some(g.node_inv(node)),
            PairWeight::Metric => Some(g.node_mat(node)),
            PairWeight::Kronecker => None,
        };
        let src = w.node_slice(node);
        let dst = out.node_slice_mut(node);
        for c_out in 0..cpn_out {
            decode_tuple(c_out, dim, rank_out, &mut tuple_out);
            // rebuild the input tuple with slots s1, s2 reinserted
            let mut t = 0;
            for s in 0..rank {
                if s == s1 || s == s2 {
                    continue;
                }
                tuple_in[s] = tuple_out[t];
                t += 1;
            }
            let mut v = T::zero();
            match &mat {
                Some(m) => {
                    for i in 0..dim {
                        tuple_in[s1] = i;
                        for j in 0..dim {
                            tuple_in[s2] = j;
                            let mut c = 0;
                            for &x in &tuple_in[..rank] {
                                c = c * dim + x;
                            }
                            v += m[i][j] * src[c];
                        }
                    }
                }
                None => {
                    for i in 0..dim {
                        tuple_in[s1] = i;
                        tuple_in[s2] = i;
                        let mut c = 0;
                        for &x in &tuple_in[..rank] {
                            c = c * dim + x;
                        }
                        v += src[c];
                    }
                }
            }
            dst[c_out] = v;
        }
    }
    out
}

/// Contract two covariant slots with `g^{ab}`.
pub fn trace_inv<T: Real>(
    g: &MetricField<T>,
    w: &TensorField<T>,
    s1: usize,
    s2: usize,
) -> Result<TensorField<T>> {
    let (p, q) = w.rank();
    if s1.min(s2) < p || s1.max(s2) >= p + q || s1 == s2 {
        return Err(Error::InvalidParameter(format!(
            "trace_inv: slots ({s1},{s2}) must be distinct covariant slots of a rank-({p},{q}) field"
        )));
    }
    Ok(contract_pair(w, g, s1, s2, PairWeight::Inverse, (p, q - 2)))
}

/// Contract two contravariant slots with `g_{ab}`.
pub fn trace_metric<T: Real>(
    g: &MetricField<T>,
    w: &TensorField<T>,
    s1: usize,
    s2: usize,
) -> Result<TensorField<T>> {
    let (p, q) = w.rank();
    if s1.max(s2) >= p || s1 == s2 {
        return Err(Error::InvalidParameter(format!(
            "trace_metric: slots ({s1},{s2}) must be distinct contravariant slots of a rank-({p},{q}) field"
        )));
    }
    Ok(contract_pair(w, g, s1, s2, PairWeight::Metric, (p - 2, q)))
}

/// Plain Kronecker contraction of one contravariant and one covariant slot.
pub fn trace_mixed<T: Real>(
    g: &MetricField<T>,
    w: &TensorField<T>,
    up: usize,
    down: usize,
) -> Result<TensorField<T>> {
    let (p, q) = w.rank();
    if up >= p || down < p || down >= p + q {
        return Err(Error::InvalidParameter(format!(
            "trace_mixed: slot {up} must be contravariant and {down} covariant in rank ({p},{q})"
        )));
    }
    Ok(contract_pair(
        w,
        g,
        up,
        down,
        PairWeight::Kronecker,
        (p - 1, q - 1),
    ))
}

/// Rough Laplacian `Δ = g^{ab} ∇_a ∇_b`, applied `k` times.
pub fn laplacian_iter<T: Real>(
    t: &TensorField<T>,
    g: &MetricField<T>,
    k: usize,
) -> Result<TensorField<T>> {
    let conn = g.curvature().connection();
    let mut cur = t.clone();
    for _ in 0..k {
        let d1 = covariant_derivative(&cur, conn)?;
        let d2 = covariant_derivative(&d1, conn)?;
        let p = t.rank().0;
        // the two newest covariant slots sit at tuple positions p and p+1
        cur = trace_inv(g, &d2, p, p + 1)?;
    }
    Ok(cur)
}

/// Single rough Laplacian.
pub fn laplacian<T: Real>(t: &TensorField<T>, g: &MetricField<T>) -> Result<TensorField<T>> {
    laplacian_iter(t, g, 1)
}

/// Divergence: `g`-trace of `∇T` on the first index of `T`.
/// For `p ≥ 1` this is `∇_a T^{a...}`; for purely covariant `T` the first
/// slot is raised internally: `(div T)_{...} = g^{ab} ∇_a T_{b...}`.
pub fn divergence<T: Real>(t: &TensorField<T>, g: &MetricField<T>) -> Result<TensorField<T>> {
    let (p, q) = t.rank();
    if p + q == 0 {
        return Err(Error::InvalidParameter(
            "divergence of a scalar field is undefined".to_string(),
        ));
    }
    let conn = g.curvature().connection();
    let d = covariant_derivative(t, conn)?;
    if p >= 1 {
        // contract contravariant slot 0 with the new covariant slot (tuple pos p)
        trace_mixed(g, &d, 0, p)
    } else {
        // contract the new slot (pos 0) with the first original covariant slot
        trace_inv(g, &d, 0, 1)
    }
}

/// Lie derivative of a (p,q) tensor along a vector field, expressed through
/// covariant derivatives (torsion-free):
/// `𝓛_X T = X^a ∇_a T − Σ_up (∇_m X^{u}) T^{..m..} + Σ_down (∇_{l} X^m) T^{..m..}`.
pub fn lie_derivative<T: Real>(
    t: &TensorField<T>,
    x: &TensorField<T>,
    g: &MetricField<T>,
) -> Result<TensorField<T>> {
    if x.rank() != (1, 0) {
        let (p, q) = x.rank();
        return Err(Error::RankMismatch {
            expected_up: 1,
            expected_down: 0,
            got_up: p,
            got_down: q,
        });
    }
    if !t.grid().same_layout(x.grid()) {
        return Err(Error::GridMismatch);
    }
    let conn = g.curvature().connection();
    let grid = t.grid().clone();
    let dim = grid.dim();
    let (p, q) = t.rank();
    let rank = p + q;
    let dt = covariant_derivative(t, conn)?; // rank (p, q+1), new slot at pos p
    let dx = covariant_derivative(x, conn)?; // (1,1): (∇X)^i_c at offset i*dim+c
    let mut out = TensorField::zeros(grid.clone(), p, q);
    let cpn = out.comps_per_node();
    let mut tuple = [0usize; MAX_RANK];
    let mut stride = [0usize; MAX_RANK];
    for s in 0..rank {
        stride[s] = dim.pow((rank - 1 - s) as u32);
    }
    // stride of the inserted derivative slot inside dt's tuple
    let d_stride = dim.pow(q as u32);
    for node in 0..grid.node_count() {
        let xv = x.node_slice(node);
        let dxv = dx.node_slice(node);
        let tv = t.node_slice(node);
        let dtv = dt.node_slice(node);
        for c in 0..cpn {
            decode_tuple(c, dim, rank, &mut tuple);
            // offset of [u.., a, l..] in dt for a = 0: split c at position p
            let up_part = c / dim.pow(q as u32);
            let low_part = c % dim.pow(q as u32);
            let dt_base = (up_part * dim) * d_stride + low_part;
            let mut v = T::zero();
            for a in 0..dim {
                v += xv[a] * dtv[dt_base + a * d_stride];
            }
            for s in 0..p {
                let u = tuple[s];
                let base = c - u * stride[s];
                for m in 0..dim {
                    v -= dxv[u * dim + m] * tv[base + m * stride[s]];
                }
            }
            for s in 0..q {
                let slot = p + s;
                let l = tuple[slot];
                let base = c - l * stride[slot];
                for m in 0..dim {
                    v += dxv[m * dim + l] * tv[base + m * stride[slot]];
                }
            }
            out.node_slice_mut(node)[c] = v;
        }
    }
    Ok(out)
}

/// Kulkarni–Nomizu product of a symmetric 2-tensor with the metric:
/// `(b⊙g)_{abcd} = b_{ad}g_{bc} + b_{bc}g_{ad} − b_{ac}g_{bd} − b_{bd}g_{ac}`.
pub fn kulkarni_nomizu<T: Real>(
    b: &TensorField<T>,
    g: &MetricField<T>,
) -> Result<TensorField<T>> {
    kn_pair(b, g.value())
}

/// Kulkarni–Nomizu product of two symmetric 2-tensors.
pub fn kn_pair<T: Real>(b: &TensorField<T>, k: &TensorField<T>) -> Result<TensorField<T>> {
    b.same_shape(k)?;
    if b.rank() != (0, 2) {
        let (p, q) = b.rank();
        return Err(Error::RankMismatch {
            expected_up: 0,
            expected_down: 2,
            got_up: p,
            got_down: q,
        });
    }
    for f in [b, k] {
        let scale = f.max_abs().max(T::one());
        let probe = f.clone().with_symmetries(vec![SymmetryPair::Symmetric(0, 1)]);
        let defect = probe.symmetry_defect();
        if defect > real::<T>(1e-12) * scale {
            return Err(Error::InvalidParameter(format!(
                "kulkarni_nomizu: input not symmetric (defect {:e})",
                defect.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    let grid = b.grid().clone();
    let dim = grid.dim();
    let mut out = TensorField::zeros(grid.clone(), 0, 4);
    for node in 0..grid.node_count() {
        let bs = b.node_slice(node);
        let ks = k.node_slice(node);
        let dst = out.node_slice_mut(node);
        for a in 0..dim {
            for bb in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        dst[((a * dim + bb) * dim + c) * dim + d] = bs[a * dim + d]
                            * ks[bb * dim + c]
                            + bs[bb * dim + c] * ks[a * dim + d]
                            - bs[a * dim + c] * ks[bb * dim + d]
                            - bs[bb * dim + d] * ks[a * dim + c];
                    }
                }
            }
        }
    }
    Ok(out.with_symmetries(vec![
        SymmetryPair::Antisymmetric(0, 1),
        SymmetryPair::Antisymmetric(2, 3),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sym2_from_coords;
    use crate::grid::{ChartGrid, FdOrder};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn conformal_2d(n: usize, amp: f64) -> MetricField<f64> {
        let grid = Arc::new(
            ChartGrid::new(&[n, n], &[1.0, 1.0], FdOrder::Four).unwrap(),
        );
        let g = sym2_from_coords(grid, |x, i, j| {
            let phi = amp * ((2.0 * PI * x[0]).sin() + 0.5 * (2.0 * PI * x[1]).cos());
            if i == j {
                (2.0 * phi).exp()
            } else {
                0.0
            }
        });
        MetricField::new(g).unwrap()
    }

    #[test]
    fn christoffel_of_constant_metric_vanishes() {
        let grid = Arc::new(ChartGrid::new(&[8, 8], &[1.0, 1.0], FdOrder::Four).unwrap());
        let g = sym2_from_coords(grid, |_, i, j| if i == j { 2.5 } else { 0.3 });
        let m = MetricField::new(g).unwrap();
        let conn = christoffel(&m);
        assert!(conn.gamma().max_abs() <= 1e-13);
    }

    #[test]
    fn christoffel_matches_conformal_2d_formula() {
        // g = e^{2φ}δ in 2D: Γ^x_{xx} = φ_x, Γ^x_{yy} = −φ_x, Γ^x_{xy} = φ_y,
        // Γ^y_{yy} = φ_y, Γ^y_{xx} = −φ_y, Γ^y_{xy} = φ_x.
        let n = 64;
        let m = conformal_2d(n, 0.1);
        let conn = christoffel(&m);
        let grid = m.grid().clone();
        let phi_x = |x: &[f64]| 0.1 * 2.0 * PI * (2.0 * PI * x[0]).cos();
        let phi_y = |x: &[f64]| -0.1 * 0.5 * 2.0 * PI * (2.0 * PI * x[1]).sin();
        let mut worst = 0.0f64;
        for node in 0..grid.node_count() {
            let x = grid.coords(node);
            let px = phi_x(&x[..2]);
            let py = phi_y(&x[..2]);
            let gam = conn.gamma().node_slice(node);
            let expect = |k: usize, i: usize, j: usize| -> f64 {
                match (k, i, j) {
                    (0, 0, 0) => px,
                    (0, 1, 1) => -px,
                    (0, 0, 1) | (0, 1, 0) => py,
                    (1, 1, 1) => py,
                    (1, 0, 0) => -py,
                    (1, 0, 1) | (1, 1, 0) => px,
                    _ => unreachable!(),
                }
            };
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let d = (gam[(k * 2 + i) * 2 + j] - expect(k, i, j)).abs();
                        worst = worst.max(d);
                    }
                }
            }
        }
        // ~4.4e-6 of stencil truncation remains at N = 64, order 4.
        assert!(worst <= 2e-5, "worst defect {worst:e}");
    }

    #[test]
    fn covariant_derivative_of_scalar_is_gradient() {
        let m = conformal_2d(32, 0.05);
        let f = TensorField::scalar_from_coords(m.grid().clone(), |x| {
            (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos()
        });
        let conn = christoffel(&m);
        let df = covariant_derivative(&f, &conn).unwrap();
        assert_eq!(df.rank(), (0, 1));
        for axis in 0..2 {
            let partial = f.partial_derivative(axis).unwrap();
            let mut worst = 0.0f64;
            for node in 0..m.grid().node_count() {
                let d = (df.get(node, &[axis]) - partial.components()[node]).abs();
                worst = worst.max(d);
            }
            assert!(worst == 0.0, "scalar ∇ must be the bare partial");
        }
    }

    #[test]
    fn metric_compatibility() {
        let m = conformal_2d(48, 0.1);
        let conn = christoffel(&m);
        let dg = covariant_derivative(m.value(), &conn).unwrap();
        // ∇g = 0 holds to roundoff: the Γ terms cancel the same stencil
        // derivatives they are built from.
        assert!(dg.max_abs() <= 1e-12, "∇g = {:e}", dg.max_abs());
    }

    #[test]
    fn laplacian_matches_fourier_eigenvalue_on_flat_torus() {
        let grid = Arc::new(
            ChartGrid::new(&[64, 8], &[1.0, 1.0], FdOrder::Four).unwrap(),
        );
        let m = MetricField::flat(grid.clone());
        let f = TensorField::scalar_from_coords(grid.clone(), |x| (2.0 * PI * x[0]).sin());
        let lf = laplacian(&f, &m).unwrap();
        // discrete symbol of the order-4 stencil applied twice:
        // D4(sin(ωx)) has symbol s = (8 sin θ − sin 2θ)/(6 Δx), θ = ωΔx,
        // and the flat Laplacian here is D4∘D4, eigenvalue −s².
        let dx: f64 = 1.0 / 64.0;
        let theta = 2.0 * PI * dx;
        let s = (8.0 * theta.sin() - (2.0 * theta).sin()) / (6.0 * dx);
        let expected = -(s * s);
        for node in [0usize, 5, 130, 300] {
            let x = grid.coords(node);
            let want = expected * (2.0 * PI * x[0]).sin();
            assert_relative_eq!(lf.components()[node], want, max_relative = 1e-11, epsilon = 1e-11);
        }
        // and the symbol itself approximates −(2π)² at 4th order
        assert_relative_eq!(expected, -(2.0 * PI) * (2.0 * PI), max_relative = 1e-4);
    }

    #[test]
    fn iterated_laplacian_equals_composition_bitwise() {
        let m = conformal_2d(16, 0.05);
        let f = TensorField::scalar_from_coords(m.grid().clone(), |x| {
            (2.0 * PI * x[0]).sin() + (2.0 * PI * x[1]).cos()
        });
        let twice = laplacian_iter(&f, &m, 2).unwrap();
        let once_once = laplacian(&laplacian(&f, &m).unwrap(), &m).unwrap();
        assert_eq!(twice.components(), once_once.components());
    }

    #[test]
    fn trace_helpers_and_divergence_of_constant_vanish() {
        let grid = Arc::new(ChartGrid::new(&[8, 8, 8], &[1.0; 3], FdOrder::Two).unwrap());
        let m = MetricField::flat(grid.clone());
        // trace of g with g^{-1} is the dimension
        let tr = trace_inv(&m, m.value(), 0, 1).unwrap();
        assert_relative_eq!(tr.components()[0], 3.0);
        let t = TensorField::from_fn(grid, 1, 1, |_, idx| {
            if idx[0] == idx[1] {
                2.0
            } else {
                0.5
            }
        });
        let mixed = trace_mixed(&m, &t, 0, 1).unwrap();
        assert_relative_eq!(mixed.components()[0], 6.0);
        let div = divergence(&t, &m).unwrap();
        assert!(div.max_abs() <= 1e-13);
    }

    #[test]
    fn lie_derivative_of_metric_is_symmetrized_gradient() {
        let m = conformal_2d(48, 0.08);
        let grid = m.grid().clone();
        let x_field = TensorField::from_fn(grid.clone(), 1, 0, |node, idx| {
            let x = grid.coords(node);
            match idx[0] {
                0 => (2.0 * PI * x[1]).sin() * 0.3,
                _ => (2.0 * PI * x[0]).cos() * 0.2,
            }
        });
        let lg = lie_derivative(m.value(), &x_field, &m).unwrap();
        // oracle: (𝓛_X g)_{ij} = ∇_i X_j + ∇_j X_i with X lowered
        let x_low = m.metric_dual(&x_field);
        let conn = christoffel(&m);
        let dxl = covariant_derivative(&x_low, &conn).unwrap(); // (0,2): [i, j] = ∇_i X_j
        let mut worst = 0.0f64;
        for node in 0..grid.node_count() {
            for i in 0..2 {
                for j in 0..2 {
                    let want = dxl.get(node, &[i, j]) + dxl.get(node, &[j, i]);
                    let d = (lg.get(node, &[i, j]) - want).abs();
                    worst = worst.max(d);
                }
            }
        }
        // The two sides differentiate different products, so the discrete
        // Leibniz error leaves ~7e-5 at N = 48 with the order-4 stencil.
        assert!(worst <= 3e-4, "worst {worst:e}");
    }

    #[test]
    fn lie_derivative_flow_pullback_oracle_on_scalar() {
        // (𝓛_X f)(x) = X^a ∂_a f; compare with (f(Φ_s(x)) − f(x))/s.
        let grid = Arc::new(ChartGrid::new(&[32, 32], &[1.0, 1.0], FdOrder::Four).unwrap());
        let m = MetricField::flat(grid.clone());
        let xfun = |x: &[f64]| [0.3 * (2.0 * PI * x[1]).sin(), 0.2];
        let ffun = |x: &[f64]| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin();
        let f = TensorField::scalar_from_coords(grid.clone(), ffun);
        let xf = TensorField::from_fn(grid.clone(), 1, 0, |node, idx| {
            let x = grid.coords(node);
            xfun(&x[..2])[idx[0]]
        });
        let lf = lie_derivative(&f, &xf, &m).unwrap();
        let s = 1e-6;
        let mut worst = 0.0f64;
        for node in (0..grid.node_count()).step_by(37) {
            let x = grid.coords(node);
            let v = xfun(&x[..2]);
            let fwd = ffun(&[x[0] + s * v[0], x[1] + s * v[1]]);
            let bwd = ffun(&[x[0] - s * v[0], x[1] - s * v[1]]);
            let oracle = (fwd - bwd) / (2.0 * s);
            worst = worst.max((lf.components()[node] - oracle).abs());
        }
        // Limited by the order-4 stencil on f: (2π)⁵·0.3/30·Δx⁴ ≈ 9e-5.
        assert!(worst <= 5e-4, "worst {worst:e}");
    }

    #[test]
    fn kn_product_matches_hand_formula_on_flat_metric() {
        let grid = Arc::new(ChartGrid::new(&[8, 8, 8], &[1.0; 3], FdOrder::Two).unwrap());
        let m = MetricField::flat(grid);
        let kn = kulkarni_nomizu(m.value(), &m).unwrap();
        // (δ⊙δ)_{abcd} = 2(δ_{ad}δ_{bc} − δ_{ac}δ_{bd})
        for (tuple, want) in [
            ([0, 1, 1, 0], 2.0),
            ([0, 1, 0, 1], -2.0),
            ([0, 0, 0, 0], 0.0),
            ([0, 1, 2, 0], 0.0),
            ([1, 2, 2, 1], 2.0),
        ] {
            assert_relative_eq!(kn.get(3, &tuple), want);
        }
        assert_eq!(kn.symmetry_defect(), 0.0);
    }

    #[test]
    fn kn_product_has_curvature_symmetries_for_random_input() {
        let grid = Arc::new(ChartGrid::new(&[8, 8, 8], &[1.0; 3], FdOrder::Two).unwrap());
        let m = MetricField::flat(grid.clone());
        let b = sym2_from_coords(grid.clone(), |x, i, j| {
            0.5 * ((i + j) as f64 + (2.0 * PI * (x[0] + x[1] * ((i * j) as f64 + 1.0))).sin())
        });
        let kn = kulkarni_nomizu(&b, &m).unwrap();
        assert!(kn.symmetry_defect() <= 1e-13);
        // pair swap (ab) <-> (cd)
        let mut worst = 0.0f64;
        for node in 0..grid.node_count() {
            for a in 0..3 {
                for bb in 0..3 {
                    for c in 0..3 {
                        for d in 0..3 {
                            let x = kn.get(node, &[a, bb, c, d]) - kn.get(node, &[c, d, a, bb]);
                            worst = worst.max(x.abs());
                        }
                    }
                }
            }
        }
        assert!(worst <= 1e-13);
        // asymmetric input rejected
        let asym = TensorField::from_fn(grid, 0, 2, |_, idx| idx[0] as f64 - idx[1] as f64);
        assert!(kulkarni_nomizu(&asym, &m).is_err());
    }
}
