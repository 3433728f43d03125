//! Curvature tensors of a metric field, under one fixed sign convention:
//!
//! * `R(∂_i,∂_j)∂_k = ∇_i∇_j∂_k − ∇_j∇_i∂_k`
//! * `R_{ijkl} = g(R(∂_i,∂_j)∂_k, ∂_l)`
//! * `Rc_{jk} = g^{il} R_{ijkl}`
//!
//! With this choice a space form of curvature `κ` has
//! `R_{abcd} = κ(g_{ad}g_{bc} − g_{ac}g_{bd})` and the unit round 3-sphere has
//! scalar curvature `+6`.  The full sheet lives in `docs/conventions.md`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::field::{SymmetryPair, TensorField};
use crate::metric::MetricField;
use crate::scalar::{real, Real};
use crate::tensor::{
    christoffel, covariant_derivative, kn_pair, laplacian_iter, trace_inv, Connection,
};

/// Every curvature quantity of one metric snapshot, computed once and cached
/// on the metric.  Re-computation on the same snapshot is bit-identical.
#[derive(Debug)]
pub struct CurvatureBundle<T: Real> {
    conn: Connection<T>,
    rm: TensorField<T>,
    rc: TensorField<T>,
    scalar: TensorField<T>,
    einstein: TensorField<T>,
    schouten: Option<TensorField<T>>,
    weyl: OnceLock<TensorField<T>>,
}

impl<T: Real> CurvatureBundle<T> {
    pub fn compute(g: &MetricField<T>) -> Self {
        let dim = g.dim();
        let grid = g.grid().clone();
        let conn = christoffel(g);
        let mut dgamma = Vec::with_capacity(dim);
        for axis in 0..dim {
            dgamma.push(
                conn.gamma()
                    .partial_derivative(axis)
                    .expect("axis < dim by construction"),
            );
        }
        let mut rm = TensorField::zeros(grid.clone(), 0, 4);
        for node in 0..grid.node_count() {
            let gm = g.node_mat(node);
            let gam = conn.gamma().node_slice(node);
            let dst = rm.node_slice_mut(node);
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let dgi = dgamma[i].node_slice(node);
                    let dgj = dgamma[j].node_slice(node);
                    for k in 0..dim {
                        // R^m_{ijk} = ∂_iΓ^m_{jk} − ∂_jΓ^m_{ik}
                        //           + Γ^m_{ip}Γ^p_{jk} − Γ^m_{jp}Γ^p_{ik}
                        let mut up = [T::zero(); 4];
                        for m in 0..dim {
                            let mut v =
                                dgi[(m * dim + j) * dim + k] - dgj[(m * dim + i) * dim + k];
                            for p in 0..dim {
                                v += gam[(m * dim + i) * dim + p] * gam[(p * dim + j) * dim + k]
                                    - gam[(m * dim + j) * dim + p]
                                        * gam[(p * dim + i) * dim + k];
                            }
                            up[m] = v;
                        }
                        for l in 0..dim {
                            let mut v = T::zero();
                            for (m, um) in up.iter().enumerate().take(dim) {
                                v += gm[l][m] * *um;
                            }
                            // exact antisymmetry in (i,j) by construction
                            dst[((i * dim + j) * dim + k) * dim + l] = v;
                            dst[((j * dim + i) * dim + k) * dim + l] = -v;
                        }
                    }
                }
            }
        }
        let rm = rm.with_symmetries(vec![
            SymmetryPair::Antisymmetric(0, 1),
            SymmetryPair::Antisymmetric(2, 3),
        ]);
        let mut rc = trace_inv(g, &rm, 0, 3).expect("slots 0,3 are covariant in a (0,4) field");
        // The stencil-level (0,1)<->(2,3) pair swap of the curvature field only
        // holds to discretization order, so the traced field picks up a small
        // asymmetric part; project it out so every consumer (gradient flows,
        // RK4 stages, checkpoints) sees a bitwise-symmetric field.
        rc.symmetrize_pair(0, 1);
        let rc = rc.with_symmetries(vec![SymmetryPair::Symmetric(0, 1)]);
        let scalar = trace_inv(g, &rc, 0, 1).expect("slots of a (0,2) field");
        let mut einstein = rc.clone();
        let half = real::<T>(0.5);
        for node in 0..grid.node_count() {
            let s = scalar.components()[node];
            let gv = g.value().node_slice(node);
            let dst = einstein.node_slice_mut(node);
            for c in 0..dst.len() {
                dst[c] = dst[c] - half * s * gv[c];
            }
        }
        let schouten = if dim >= 3 {
            let cn = real::<T>(1.0 / (2.0 * (dim as f64 - 1.0)));
            let inv_n2 = real::<T>(1.0 / (dim as f64 - 2.0));
            let mut p = rc.clone();
            for node in 0..grid.node_count() {
                let s = scalar.components()[node];
                let gv = g.value().node_slice(node);
                let dst = p.node_slice_mut(node);
                for c in 0..dst.len() {
                    dst[c] = inv_n2 * (dst[c] - cn * s * gv[c]);
                }
            }
            Some(p)
        } else {
            None
        };
        Self {
            conn,
            rm,
            rc,
            scalar,
            einstein,
            schouten,
            weyl: OnceLock::new(),
        }
    }

    pub fn connection(&self) -> &Connection<T> {
        &self.conn
    }

    /// (4,0)-curvature `R_{ijkl}` (all indices down).
    pub fn rm(&self) -> &TensorField<T> {
        &self.rm
    }

    pub fn rc(&self) -> &TensorField<T> {
        &self.rc
    }

    pub fn scalar(&self) -> &TensorField<T> {
        &self.scalar
    }

    /// Einstein tensor `E = Rc − (S/2) g`.
    pub fn einstein(&self) -> &TensorField<T> {
        &self.einstein
    }

    /// Schouten tensor `(n−2)^{-1}(Rc − S/(2(n−1)) g)`; `None` in dimension 2.
    pub fn schouten(&self) -> Option<&TensorField<T>> {
        self.schouten.as_ref()
    }

    /// Weyl tensor via `Rm = Weyl + Schouten ⊙ g`; `None` in dimension 2.
    /// Built lazily (it is only needed by the Bach tensor) and cached.
    pub fn weyl_for(&self, g: &MetricField<T>) -> Option<&TensorField<T>> {
        let p = self.schouten.as_ref()?;
        Some(self.weyl.get_or_init(|| {
            let kn = kn_pair(p, g.value()).expect("schouten is symmetric");
            self.rm.sub(&kn).expect("same shape by construction")
        }))
    }
}

pub fn riemann<T: Real>(g: &MetricField<T>) -> TensorField<T> {
    g.curvature().rm().clone()
}

pub fn ricci<T: Real>(g: &MetricField<T>) -> TensorField<T> {
    g.curvature().rc().clone()
}

pub fn scalar_curv<T: Real>(g: &MetricField<T>) -> TensorField<T> {
    g.curvature().scalar().clone()
}

pub fn einstein<T: Real>(g: &MetricField<T>) -> TensorField<T> {
    g.curvature().einstein().clone()
}

pub fn schouten<T: Real>(g: &MetricField<T>) -> Result<TensorField<T>> {
    g.curvature().schouten().cloned().ok_or_else(|| {
        Error::InvalidParameter("Schouten tensor requires dimension >= 3".to_string())
    })
}

pub fn weyl<T: Real>(g: &MetricField<T>) -> Result<TensorField<T>> {
    let bundle = g.curvature().clone();
    bundle.weyl_for(g).cloned().ok_or_else(|| {
        Error::InvalidParameter("Weyl tensor requires dimension >= 3".to_string())
    })
}

/// Bach tensor (dimension 4 only):
/// `B_{ij} = ΔP_{ij} − ∇_i∇_j(tr P) − 2 P^{kl} W_{kijl} + |P|² g_{ij} − 4 P²_{ij}`
/// with `P` the Schouten tensor.
pub fn bach<T: Real>(g: &MetricField<T>) -> Result<TensorField<T>> {
    let dim = g.dim();
    if dim != 4 {
        return Err(Error::InvalidParameter(format!(
            "Bach tensor requires dimension 4, got {dim}"
        )));
    }
    let bundle = g.curvature().clone();
    let p = bundle.schouten().expect("dim 4 has a Schouten tensor");
    let weyl = bundle.weyl_for(g).expect("dim 4 has a Weyl tensor");
    let conn = bundle.connection();
    let lap_p = laplacian_iter(p, g, 1)?;
    let tr_p = trace_inv(g, p, 0, 1)?;
    let hess_tr = covariant_derivative(&covariant_derivative(&tr_p, conn)?, conn)?;
    // P^{kl}: both slots raised
    let p_up = g.metric_dual(p);
    let grid = g.grid().clone();
    let mut out = TensorField::zeros(grid.clone(), 0, 2);
    let two = real::<T>(2.0);
    let four = real::<T>(4.0);
    let p_normsq = g.pointwise_inner(p, p)?;
    for node in 0..grid.node_count() {
        let gv = g.value().node_slice(node);
        let gi = g.node_inv(node);
        let pv = p.node_slice(node);
        let pu = p_up.node_slice(node);
        let wv = weyl.node_slice(node);
        let lp = lap_p.node_slice(node);
        let ht = hess_tr.node_slice(node);
        let pn = p_normsq.components()[node];
        let dst = out.node_slice_mut(node);
        for i in 0..dim {
            for j in 0..dim {
                let mut v = lp[i * dim + j] - ht[i * dim + j];
                // −2 P^{kl} W_{kijl}
                let mut wterm = T::zero();
                for k in 0..dim {
                    for l in 0..dim {
                        wterm += pu[k * dim + l] * wv[((k * dim + i) * dim + j) * dim + l];
                    }
                }
                v -= two * wterm;
                v += pn * gv[i * dim + j];
                // −4 (P²)_{ij} = −4 g^{mn} P_{im} P_{nj}
                let mut psq = T::zero();
                for m in 0..dim {
                    for n in 0..dim {
                        psq += gi[m][n] * pv[i * dim + m] * pv[n * dim + j];
                    }
                }
                v -= four * psq;
                dst[i * dim + j] = v;
            }
        }
    }
    Ok(out)
}

/// Leading (highest-order) term of the quasilinear flow family:
/// `(−1)^{k+1} · 2 (Δ^{(k)}Rc + α Δ^{(k)}S · g + β Δ^{(k−1)}∇∇S)`.
/// `k = 0` is permitted only with `β = 0` and collapses to `−2(Rc + αSg)`.
pub fn obstruction_leading<T: Real>(
    g: &MetricField<T>,
    k: usize,
    alpha: f64,
    beta: f64,
) -> Result<TensorField<T>> {
    if k == 0 && beta != 0.0 {
        return Err(Error::InvalidFlowSpec(
            "k = 0 requires beta = 0 (no ∇∇S term is available)".to_string(),
        ));
    }
    let bundle = g.curvature().clone();
    let mut out = laplacian_iter(bundle.rc(), g, k)?;
    if alpha != 0.0 {
        let s_k = laplacian_iter(bundle.scalar(), g, k)?;
        let a = real::<T>(alpha);
        for node in 0..g.grid().node_count() {
            let sv = s_k.components()[node];
            let gv = g.value().node_slice(node);
            let dst = out.node_slice_mut(node);
            for c in 0..dst.len() {
                dst[c] += a * sv * gv[c];
            }
        }
    }
    if beta != 0.0 && k >= 1 {
        let conn = bundle.connection();
        let hess_s = covariant_derivative(
            &covariant_derivative(bundle.scalar(), conn)?,
            conn,
        )?;
        let term = laplacian_iter(&hess_s, g, k - 1)?;
        out.add_scaled(real::<T>(beta), &term)?;
    }
    let sign = if k % 2 == 0 { -2.0 } else { 2.0 };
    // Contractions inside the iterated Laplacian sum mirrored components in
    // different orders; average the output so time steppers that feed it back
    // into a metric keep exact symmetry.
    out.symmetrize_pair(0, 1);
    Ok(out.scaled(real::<T>(sign)))
}

/// Linearization of the (4,0)-curvature in the metric:
/// `DR[h]_{ijkl} = −½(∇_i∇_l h_{jk} + ∇_j∇_k h_{il} − ∇_i∇_k h_{jl} − ∇_j∇_l h_{ik})`
/// `             + ½(R^m_{ijk} h_{ml} − R^m_{ijl} h_{mk})`,  `R^m_{ijk} = g^{ml}R_{ijkl}`.
pub fn linearized_riemann<T: Real>(
    g: &MetricField<T>,
    h: &TensorField<T>,
) -> Result<TensorField<T>> {
    if h.rank() != (0, 2) {
        let (p, q) = h.rank();
        return Err(Error::RankMismatch {
            expected_up: 0,
            expected_down: 2,
            got_up: p,
            got_down: q,
        });
    }
    if !h.grid().same_layout(g.grid()) {
        return Err(Error::GridMismatch);
    }
    let scale = h.max_abs().max(T::one());
    let probe = h.clone().with_symmetries(vec![SymmetryPair::Symmetric(0, 1)]);
    if probe.symmetry_defect() > real::<T>(1e-12) * scale {
        return Err(Error::InvalidParameter(
            "linearized_riemann: perturbation must be symmetric".to_string(),
        ));
    }
    let dim = g.dim();
    let grid = g.grid().clone();
    let bundle = g.curvature().clone();
    let conn = bundle.connection();
    let d2 = covariant_derivative(&covariant_derivative(h, conn)?, conn)?;
    // d2 tuple: [c2, c1, a, b] = ∇_{c2}∇_{c1} h_{ab}
    let rm = bundle.rm();
    let half = real::<T>(0.5);
    let mut out = TensorField::zeros(grid.clone(), 0, 4);
    let d3 = dim * dim * dim;
    let d2s = dim * dim;
    for node in 0..grid.node_count() {
        let gi = g.node_inv(node);
        let hv = h.node_slice(node);
        let dv = d2.node_slice(node);
        let rv = rm.node_slice(node);
        let dst = out.node_slice_mut(node);
        // R^m_{ijk} = g^{mn} R_{ijkn}
        let hess = |a: usize, b: usize, c: usize, d: usize| dv[a * d3 + b * d2s + c * dim + d];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let second = hess(i, l, j, k) + hess(j, k, i, l)
                            - hess(i, k, j, l)
                            - hess(j, l, i, k);
                        let mut action = T::zero();
                        for m in 0..dim {
                            let mut rup_k = T::zero();
                            let mut rup_l = T::zero();
                            for n in 0..dim {
                                rup_k += gi[m][n] * rv[i * d3 + j * d2s + k * dim + n];
                                rup_l += gi[m][n] * rv[i * d3 + j * d2s + l * dim + n];
                            }
                            action += rup_k * hv[m * dim + l] - rup_l * hv[m * dim + k];
                        }
                        dst[i * d3 + j * d2s + k * dim + l] = half * (action - second);
                    }
                }
            }
        }
    }
    Ok(out)
}
