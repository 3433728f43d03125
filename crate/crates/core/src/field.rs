//! Tensor fields: per-node component arrays of arbitrary rank on a [`ChartGrid`].
//!
//! Storage is node-major.  Each node holds `dim^(p+q)` components laid out
//! row-major over the index tuple — contravariant indices first, then
//! covariant, last index varying fastest.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{ChartGrid, FdOrder};
use crate::scalar::{real, Real};

/// Highest total rank (p+q) a field may carry.  Rank grows two slots per
/// covariant Hessian, and the deepest objects used anywhere are sixth-rank
/// curvature derivatives plus one more gradient.
pub const MAX_RANK: usize = 8;

/// A declared index symmetry, checked by [`TensorField::symmetry_defect`].
/// Slot numbers refer to the full index tuple (contravariant slots first).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryPair {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

#[derive(Clone, Debug)]
pub struct TensorField<T: Real> {
    grid: Arc<ChartGrid<T>>,
    p: usize,
    q: usize,
    comps_per_node: usize,
    comps: Vec<T>,
    symmetries: Vec<SymmetryPair>,
}

impl<T: Real> TensorField<T> {
    pub fn zeros(grid: Arc<ChartGrid<T>>, p: usize, q: usize) -> Self {
        let rank = p + q;
        assert!(rank <= MAX_RANK, "total rank {rank} exceeds {MAX_RANK}");
        let comps_per_node = grid.dim().pow(rank as u32);
        let comps = vec![T::zero(); grid.node_count() * comps_per_node];
        Self {
            grid,
            p,
            q,
            comps_per_node,
            comps,
            symmetries: Vec::new(),
        }
    }

    /// Build a field by evaluating `f(node, index_tuple)` everywhere.
    pub fn from_fn(
        grid: Arc<ChartGrid<T>>,
        p: usize,
        q: usize,
        mut f: impl FnMut(usize, &[usize]) -> T,
    ) -> Self {
        let mut out = Self::zeros(grid, p, q);
        let dim = out.grid.dim();
        let rank = p + q;
        let cpn = out.comps_per_node;
        let mut tuple = [0usize; MAX_RANK];
        for node in 0..out.grid.node_count() {
            let base = node * cpn;
            for c in 0..cpn {
                decode_tuple(c, dim, rank, &mut tuple);
                out.comps[base + c] = f(node, &tuple[..rank]);
            }
        }
        out
    }

    /// Scalar field (rank (0,0)) from a coordinate function.
    pub fn scalar_from_coords(
        grid: Arc<ChartGrid<T>>,
        mut f: impl FnMut(&[T]) -> T,
    ) -> Self {
        let mut out = Self::zeros(grid.clone(), 0, 0);
        for node in 0..grid.node_count() {
            let x = grid.coords(node);
            out.comps[node] = f(&x[..grid.dim()]);
        }
        out
    }

    pub fn grid(&self) -> &Arc<ChartGrid<T>> {
        &self.grid
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn total_rank(&self) -> usize {
        self.p + self.q
    }

    pub fn comps_per_node(&self) -> usize {
        self.comps_per_node
    }

    pub fn components(&self) -> &[T] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [T] {
        &mut self.comps
    }

    pub fn symmetries(&self) -> &[SymmetryPair] {
        &self.symmetries
    }

    /// Attach declared symmetries (builder style).  The declaration is
    /// checked by `symmetry_defect`, not enforced here.
    pub fn with_symmetries(mut self, symmetries: Vec<SymmetryPair>) -> Self {
        for s in &symmetries {
            let (SymmetryPair::Symmetric(a, b) | SymmetryPair::Antisymmetric(a, b)) = s;
            assert!(*a < self.total_rank() && *b < self.total_rank() && a != b);
        }
        self.symmetries = symmetries;
        self
    }

    /// Offset of one index tuple inside a node block.
    pub fn comp_offset(&self, indices: &[usize]) -> usize {
        debug_assert_eq!(indices.len(), self.total_rank());
        let dim = self.grid.dim();
        let mut c = 0;
        for &i in indices {
            debug_assert!(i < dim);
            c = c * dim + i;
        }
        c
    }

    pub fn get(&self, node: usize, indices: &[usize]) -> T {
        self.comps[node * self.comps_per_node + self.comp_offset(indices)]
    }

    pub fn set(&mut self, node: usize, indices: &[usize], value: T) {
        let off = node * self.comps_per_node + self.comp_offset(indices);
        self.comps[off] = value;
    }

    pub fn node_slice(&self, node: usize) -> &[T] {
        let base = node * self.comps_per_node;
        &self.comps[base..base + self.comps_per_node]
    }

    pub fn node_slice_mut(&mut self, node: usize) -> &mut [T] {
        let base = node * self.comps_per_node;
        &mut self.comps[base..base + self.comps_per_node]
    }

    /// Shape compatibility check used by all binary operations.
    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if !self.grid.same_layout(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch {
                expected_up: self.p,
                expected_down: self.q,
                got_up: other.p,
                got_down: other.q,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.symmetries.clear();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            *a += *b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.symmetries.clear();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            *a -= *b;
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for a in out.comps.iter_mut() {
            *a *= factor;
        }
        out
    }

    /// `self += factor * other`, in place.
    pub fn add_scaled(&mut self, factor: T, other: &Self) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            *a += factor * *b;
        }
        Ok(())
    }

    /// Replace the component array by its symmetric part in slots
    /// `(s1, s2)`, averaging each entry with its mirrored partner. Entries
    /// already equal to their mirror are left bitwise unchanged.
    pub fn symmetrize_pair(&mut self, s1: usize, s2: usize) {
        let rank = self.total_rank();
        assert!(s1 < rank && s2 < rank && s1 != s2, "slots out of range");
        let (s1, s2) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        let dim = self.grid.dim();
        let stride1 = dim.pow((rank - 1 - s1) as u32);
        let stride2 = dim.pow((rank - 1 - s2) as u32);
        let half = real::<T>(0.5);
        let cpn = self.comps_per_node;
        let mut tuple = [0usize; MAX_RANK];
        for node in 0..self.grid.node_count() {
            let base = node * cpn;
            for c in 0..cpn {
                decode_tuple(c, dim, rank, &mut tuple);
                let (a, b) = (tuple[s1], tuple[s2]);
                if a < b {
                    let mirror = c + (b - a) * stride1 - (b - a) * stride2;
                    let avg = half * (self.comps[base + c] + self.comps[base + mirror]);
                    self.comps[base + c] = avg;
                    self.comps[base + mirror] = avg;
                }
            }
        }
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for &v in &self.comps {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn linf_diff(&self, other: &Self) -> Result<T> {
        self.same_shape(other)?;
        let mut m = T::zero();
        for (a, b) in self.comps.iter().zip(&other.comps) {
            let d = (*a - *b).abs();
            if d > m {
                m = d;
            }
        }
        Ok(m)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|v| v.is_finite())
    }

    /// Worst violation of the declared symmetries over all nodes.
    pub fn symmetry_defect(&self) -> T {
        let dim = self.grid.dim();
        let rank = self.total_rank();
        let mut tuple = [0usize; MAX_RANK];
        let mut worst = T::zero();
        for node in 0..self.grid.node_count() {
            let slice = self.node_slice(node);
            for c in 0..self.comps_per_node {
                decode_tuple(c, dim, rank, &mut tuple);
                for s in &self.symmetries {
                    let (a, b, sign) = match s {
                        SymmetryPair::Symmetric(a, b) => (*a, *b, T::one()),
                        SymmetryPair::Antisymmetric(a, b) => (*a, *b, -T::one()),
                    };
                    let mut swapped = tuple;
                    swapped.swap(a, b);
                    let mut c2 = 0;
                    for &i in &swapped[..rank] {
                        c2 = c2 * dim + i;
                    }
                    let d = (slice[c] - sign * slice[c2]).abs();
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        worst
    }

    /// Centered finite-difference coordinate derivative along `axis`,
    /// component-wise, using the grid's default stencil order.
    pub fn partial_derivative(&self, axis: usize) -> Result<Self> {
        self.partial_derivative_ord(axis, self.grid.fd_order())
    }

    /// Same, with an explicit stencil order.
    pub fn partial_derivative_ord(&self, axis: usize, order: FdOrder) -> Result<Self> {
        let dim = self.grid.dim();
        if axis >= dim {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        let mut out = self.clone();
        out.symmetries.clear();
        let cpn = self.comps_per_node;
        let extent = self.grid.extents()[axis];
        let stride = {
            // stride of `axis` in node numbering: product of faster extents
            let mut s = 1usize;
            for a in (axis + 1)..dim {
                s *= self.grid.extents()[a];
            }
            s
        };
        let dx = self.grid.spacing(axis);
        let inv_2dx = T::one() / (real::<T>(2.0) * dx);
        let inv_12dx = T::one() / (real::<T>(12.0) * dx);
        let eight = real::<T>(8.0);
        for node in 0..self.grid.node_count() {
            let i = (node / stride) % extent;
            let row = node - i * stride;
            let at = |j: isize| -> usize {
                let w = (i as isize + j).rem_euclid(extent as isize) as usize;
                (row + w * stride) * cpn
            };
            let (b_m2, b_m1, b_p1, b_p2);
            match order {
                FdOrder::Two => {
                    b_m1 = at(-1);
                    b_p1 = at(1);
                    b_m2 = 0;
                    b_p2 = 0;
                }
                FdOrder::Four => {
                    b_m2 = at(-2);
                    b_m1 = at(-1);
                    b_p1 = at(1);
                    b_p2 = at(2);
                }
            }
            let dst = node * cpn;
            for c in 0..cpn {
                out.comps[dst + c] = match order {
                    FdOrder::Two => (self.comps[b_p1 + c] - self.comps[b_m1 + c]) * inv_2dx,
                    FdOrder::Four => {
                        (eight * (self.comps[b_p1 + c] - self.comps[b_m1 + c])
                            - (self.comps[b_p2 + c] - self.comps[b_m2 + c]))
                            * inv_12dx
                    }
                };
            }
        }
        Ok(out)
    }
}

/// Decode a component offset into its index tuple (row-major, last fastest).
pub fn decode_tuple(mut c: usize, dim: usize, rank: usize, out: &mut [usize; MAX_RANK]) {
    for slot in (0..rank).rev() {
        out[slot] = c % dim;
        c /= dim;
    }
    for slot in rank..MAX_RANK {
        out[slot] = 0;
    }
}

/// Encode an index tuple into its component offset.
pub fn encode_tuple(indices: &[usize], dim: usize) -> usize {
    let mut c = 0;
    for &i in indices {
        c = c * dim + i;
    }
    c
}

/// Plain unweighted node sum of the product of two same-shape fields.
/// This is the summation under which centered stencils are exactly
/// skew-adjoint; the metric-weighted inner product lives with `MetricField`.
pub fn node_sum_product<T: Real>(u: &TensorField<T>, v: &TensorField<T>) -> Result<T> {
    u.same_shape(v)?;
    let mut s = T::zero();
    for (a, b) in u.components().iter().zip(v.components()) {
        s += *a * *b;
    }
    Ok(s)
}

/// Convenience: coordinates of every node exposed to closures building
/// metrics and perturbations.  `f` receives the node coordinates and the
/// (row-major) index pair for a rank-(0,2) field.
pub fn sym2_from_coords<T: Real>(
    grid: Arc<ChartGrid<T>>,
    mut f: impl FnMut(&[T], usize, usize) -> T,
) -> TensorField<T> {
    let dim = grid.dim();
    TensorField::from_fn(grid.clone(), 0, 2, |node, idx| {
        let x = grid.coords(node);
        f(&x[..dim], idx[0], idx[1])
    })
    .with_symmetries(vec![SymmetryPair::Symmetric(0, 1)])
}
