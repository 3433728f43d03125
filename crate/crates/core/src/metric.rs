//! Riemannian metric fields: validation, inverse and volume caches,
//! metric-weighted integration, and the L² inner product.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::field::{SymmetryPair, TensorField};
use crate::grid::ChartGrid;
use crate::linalg::{
    cholesky, determinant, inverse, inverse_defect, symmetric_eigenvalues, zero_mat, SmallMat,
};
use crate::scalar::{real, Real};
use crate::tensor::curvature::CurvatureBundle;

/// A validated rank-(0,2) symmetric positive-definite field, with its
/// pointwise inverse and volume density precomputed and a lazily built
/// curvature bundle that is computed at most once per metric snapshot.
#[derive(Clone, Debug)]
pub struct MetricField<T: Real> {
    value: TensorField<T>,
    inverse: TensorField<T>,
    sqrt_det: TensorField<T>,
    min_eigenvalue: T,
    curvature: OnceLock<Arc<CurvatureBundle<T>>>,
}

impl<T: Real> MetricField<T> {
    /// Validate and wrap a rank-(0,2) field: pointwise symmetry,
    /// positive-definiteness, and an inverse accurate to 1e-12 relative.
    pub fn new(value: TensorField<T>) -> Result<Self> {
        if value.rank() != (0, 2) {
            let (p, q) = value.rank();
            return Err(Error::RankMismatch {
                expected_up: 0,
                expected_down: 2,
                got_up: p,
                got_down: q,
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: "metric components".to_string(),
            });
        }
        let grid = value.grid().clone();
        let dim = grid.dim();
        let mut inv_field = TensorField::zeros(grid.clone(), 2, 0);
        let mut sqrt_det = TensorField::zeros(grid.clone(), 0, 0);
        let mut min_eig = T::infinity();
        let sym_tol = real::<T>(1e-12);
        let inv_tol = real::<T>(1e-12);
        for node in 0..grid.node_count() {
            let m = node_mat_of(&value, node, dim);
            let mut scale = T::one();
            let mut defect = T::zero();
            for i in 0..dim {
                for j in 0..dim {
                    let a = m[i][j].abs();
                    if a > scale {
                        scale = a;
                    }
                    let d = (m[i][j] - m[j][i]).abs();
                    if d > defect {
                        defect = d;
                    }
                }
            }
            if defect > sym_tol * scale {
                return Err(Error::AsymmetricMetric {
                    node,
                    defect: defect.to_f64().unwrap_or(f64::NAN),
                });
            }
            if cholesky(&m, dim).is_none() {
                let eigs = symmetric_eigenvalues(&m, dim);
                return Err(Error::LostPositivity {
                    node,
                    eigenvalue: eigs[0].to_f64().unwrap_or(f64::NAN),
                });
            }
            let eigs = symmetric_eigenvalues(&m, dim);
            if eigs[0] < min_eig {
                min_eig = eigs[0];
            }
            let inv = match inverse(&m, dim) {
                Some(inv) => inv,
                None => {
                    return Err(Error::SingularMetric {
                        node,
                        defect: f64::INFINITY,
                    })
                }
            };
            let d = inverse_defect(&m, &inv, dim);
            if d > inv_tol * scale.max(T::one()) {
                return Err(Error::SingularMetric {
                    node,
                    defect: d.to_f64().unwrap_or(f64::NAN),
                });
            }
            let det = determinant(&m, dim);
            sqrt_det.components_mut()[node] = det.sqrt();
            let slice = inv_field.node_slice_mut(node);
            for i in 0..dim {
                for j in 0..dim {
                    slice[i * dim + j] = inv[i][j];
                }
            }
        }
        let value = value.with_symmetries(vec![SymmetryPair::Symmetric(0, 1)]);
        Ok(Self {
            value,
            inverse: inv_field.with_symmetries(vec![SymmetryPair::Symmetric(0, 1)]),
            sqrt_det,
            min_eigenvalue: min_eig,
            curvature: OnceLock::new(),
        })
    }

    /// The flat unit metric `delta_ij` on a grid.
    pub fn flat(grid: Arc<ChartGrid<T>>) -> Self {
        let f = TensorField::from_fn(grid, 0, 2, |_, idx| {
            if idx[0] == idx[1] {
                T::one()
            } else {
                T::zero()
            }
        });
        Self::new(f).expect("identity metric is always valid")
    }

    pub fn grid(&self) -> &Arc<ChartGrid<T>> {
        self.value.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn value(&self) -> &TensorField<T> {
        &self.value
    }

    pub fn inverse(&self) -> &TensorField<T> {
        &self.inverse
    }

    pub fn sqrt_det(&self) -> &TensorField<T> {
        &self.sqrt_det
    }

    pub fn min_eigenvalue(&self) -> T {
        self.min_eigenvalue
    }

    /// Metric components at one node as a small matrix.
    pub fn node_mat(&self, node: usize) -> SmallMat<T> {
        node_mat_of(&self.value, node, self.dim())
    }

    /// Inverse-metric components at one node.
    pub fn node_inv(&self, node: usize) -> SmallMat<T> {
        node_mat_of(&self.inverse, node, self.dim())
    }

    /// Curvature bundle for this metric snapshot, computed once and cached.
    pub fn curvature(&self) -> &Arc<CurvatureBundle<T>> {
        self.curvature
            .get_or_init(|| Arc::new(CurvatureBundle::compute(self)))
    }

    /// `∫ f dμ` by the periodic node sum `Σ f·√det g·ΠΔx_i`.
    pub fn integrate(&self, f: &TensorField<T>) -> Result<T> {
        f.same_shape(&self.sqrt_det)?;
        let w = self.grid().cell_volume();
        let mut s = T::zero();
        for (v, d) in f.components().iter().zip(self.sqrt_det.components()) {
            s += *v * *d;
        }
        Ok(s * w)
    }

    /// Riemannian volume of the chart.
    pub fn volume(&self) -> T {
        let w = self.grid().cell_volume();
        let mut s = T::zero();
        for d in self.sqrt_det.components() {
            s += *d;
        }
        s * w
    }

    /// Slot-wise metric dual: every contravariant index lowered with `g`,
    /// every covariant index raised with `g^{-1}`.  Slot *positions* are
    /// preserved; only the recorded variance counts swap.
    pub fn metric_dual(&self, w: &TensorField<T>) -> TensorField<T> {
        let (p, q) = w.rank();
        let rank = p + q;
        let mut cur = w.clone();
        for slot in 0..rank {
            let use_metric = slot < p; // lower contravariant slots with g
            cur = self.apply_to_slot(&cur, slot, use_metric);
        }
        let mut out = TensorField::zeros(w.grid().clone(), q, p);
        out.components_mut().copy_from_slice(cur.components());
        out
    }

    /// Contract one slot of `w` with `g` (`use_metric`) or `g^{-1}` at every
    /// node: `out[..., i, ...] = Σ_j M_{ij} w[..., j, ...]`.
    fn apply_to_slot(&self, w: &TensorField<T>, slot: usize, use_metric: bool) -> TensorField<T> {
        let dim = self.dim();
        let rank = w.total_rank();
        debug_assert!(slot < rank);
        let cpn = w.comps_per_node();
        // stride of `slot` in the row-major tuple layout
        let stride = dim.pow((rank - 1 - slot) as u32);
        let mut out = w.clone();
        let n_mat = if use_metric { &self.value } else { &self.inverse };
        for node in 0..self.grid().node_count() {
            let m = node_mat_of(n_mat, node, dim);
            let src = w.node_slice(node);
            let dst = out.node_slice_mut(node);
            for c in 0..cpn {
                let i = (c / stride) % dim;
                let base = c - i * stride;
                let mut s = T::zero();
                for j in 0..dim {
                    s += m[i][j] * src[base + j * stride];
                }
                dst[c] = s;
            }
        }
        out
    }

    /// Pointwise full contraction `⟨U, V⟩_g` as a scalar field.
    /// Exactly symmetric in its arguments.
    pub fn pointwise_inner(
        &self,
        u: &TensorField<T>,
        v: &TensorField<T>,
    ) -> Result<TensorField<T>> {
        u.same_shape(v)?;
        if !u.grid().same_layout(self.grid()) {
            return Err(Error::GridMismatch);
        }
        let cpn = u.comps_per_node();
        let mut out = TensorField::zeros(self.grid().clone(), 0, 0);
        if std::ptr::eq(u, v) || u.components() == v.components() {
            let dual = self.metric_dual(u);
            for node in 0..self.grid().node_count() {
                let a = u.node_slice(node);
                let b = dual.node_slice(node);
                let mut s = T::zero();
                for c in 0..cpn {
                    s += a[c] * b[c];
                }
                out.components_mut()[node] = s;
            }
        } else {
            // Average the two evaluation orders so the result is exactly
            // symmetric in (U, V): addition is commutative in IEEE floats.
            let du = self.metric_dual(u);
            let dv = self.metric_dual(v);
            let half = real::<T>(0.5);
            for node in 0..self.grid().node_count() {
                let a = u.node_slice(node);
                let b = v.node_slice(node);
                let da = du.node_slice(node);
                let db = dv.node_slice(node);
                let mut s1 = T::zero();
                let mut s2 = T::zero();
                for c in 0..cpn {
                    s1 += a[c] * db[c];
                    s2 += b[c] * da[c];
                }
                out.components_mut()[node] = half * (s1 + s2);
            }
        }
        Ok(out)
    }

    /// `(U, V) = ∫ ⟨U, V⟩ dμ`, all indices contracted with `g`/`g^{-1}`.
    pub fn l2_inner(&self, u: &TensorField<T>, v: &TensorField<T>) -> Result<T> {
        let f = self.pointwise_inner(u, v)?;
        self.integrate(&f)
    }

    /// `∥U∥² = (U, U)`, clamped at zero (the exact value is a nonnegative
    /// quadratic form; roundoff may produce a tiny negative).
    pub fn norm_sq(&self, u: &TensorField<T>) -> Result<T> {
        let v = self.l2_inner(u, u)?;
        Ok(if v < T::zero() { T::zero() } else { v })
    }
}

fn node_mat_of<T: Real>(f: &TensorField<T>, node: usize, dim: usize) -> SmallMat<T> {
    let slice = f.node_slice(node);
    let mut m = zero_mat();
    for i in 0..dim {
        for j in 0..dim {
            m[i][j] = slice[i * dim + j];
        }
    }
    m
}
