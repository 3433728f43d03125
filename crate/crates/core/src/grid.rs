//! Periodic structured grids over flat coordinate charts.
//!
//! A [`ChartGrid`] discretizes the torus `[0, L_0) x ... x [0, L_{d-1})` with
//! uniform spacing along each axis.  Every axis wraps around, so finite
//! difference stencils never need boundary handling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;
use crate::scalar::{real, Real};

/// Order of accuracy for the centered finite-difference stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FdOrder {
    #[serde(rename = "2")]
    Two,
    #[default]
    #[serde(rename = "4")]
    Four,
}

impl FdOrder {
    pub fn order(self) -> u32 {
        match self {
            FdOrder::Two => 2,
            FdOrder::Four => 4,
        }
    }

    /// Half-width of the centered stencil (1 for order 2, 2 for order 4).
    pub fn radius(self) -> usize {
        match self {
            FdOrder::Two => 1,
            FdOrder::Four => 2,
        }
    }

    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(FdOrder::Two),
            4 => Ok(FdOrder::Four),
            other => Err(Error::UnsupportedFdOrder(other)),
        }
    }
}

/// Uniform periodic grid on a `dim`-torus (`2 <= dim <= 4`).
///
/// Nodes are stored row-major: the last axis varies fastest.  All tensor
/// fields refer back to a shared grid so that mixed-grid arithmetic can be
/// rejected instead of silently producing nonsense.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartGrid<T: Real> {
    dim: usize,
    extents: [usize; MAX_DIM],
    lengths: [T; MAX_DIM],
    spacing: [T; MAX_DIM],
    strides: [usize; MAX_DIM],
    node_count: usize,
    fd_order: FdOrder,
}

/// Minimum nodes per axis; keeps the widest stencil (5 points) meaningful.
pub const MIN_EXTENT: usize = 8;

impl<T: Real> ChartGrid<T> {
    pub fn new(extents: &[usize], lengths: &[T], fd_order: FdOrder) -> Result<Self> {
        let dim = extents.len();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2..=4, got {dim}"
            )));
        }
        if lengths.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} extents but {} lengths",
                dim,
                lengths.len()
            )));
        }
        let mut ext = [1usize; MAX_DIM];
        let mut len = [T::one(); MAX_DIM];
        let mut spacing = [T::one(); MAX_DIM];
        for a in 0..dim {
            if extents[a] < MIN_EXTENT {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} nodes; need at least {MIN_EXTENT}",
                    extents[a]
                )));
            }
            if !(lengths[a].is_finite() && lengths[a] > T::zero()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} length must be positive and finite"
                )));
            }
            ext[a] = extents[a];
            len[a] = lengths[a];
            spacing[a] = lengths[a] / real::<T>(extents[a] as f64);
        }
        let mut strides = [0usize; MAX_DIM];
        let mut node_count = 1usize;
        for a in (0..dim).rev() {
            strides[a] = node_count;
            node_count = node_count.checked_mul(ext[a]).ok_or_else(|| {
                Error::InvalidGrid("node count overflows usize".to_string())
            })?;
        }
        Ok(Self {
            dim,
            extents: ext,
            lengths: len,
            spacing,
            strides,
            node_count,
            fd_order,
        })
    }

    /// Square grid: same extent and length along every axis.
    pub fn cube(dim: usize, extent: usize, length: T, fd_order: FdOrder) -> Result<Self> {
        let extents = vec![extent; dim];
        let lengths = vec![length; dim];
        Self::new(&extents, &lengths, fd_order)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.dim]
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths[..self.dim]
    }

    pub fn spacing(&self, axis: usize) -> T {
        debug_assert!(axis < self.dim);
        self.spacing[axis]
    }

    pub fn min_spacing(&self) -> T {
        let mut m = self.spacing[0];
        for a in 1..self.dim {
            if self.spacing[a] < m {
                m = self.spacing[a];
            }
        }
        m
    }

    pub fn fd_order(&self) -> FdOrder {
        self.fd_order
    }

    /// Volume element of one grid cell (product of spacings).
    pub fn cell_volume(&self) -> T {
        let mut v = T::one();
        for a in 0..self.dim {
            v = v * self.spacing[a];
        }
        v
    }

    /// Total coordinate volume of the chart (product of lengths).
    pub fn total_volume(&self) -> T {
        let mut v = T::one();
        for a in 0..self.dim {
            v = v * self.lengths[a];
        }
        v
    }

    pub fn multi_index(&self, node: usize) -> [usize; MAX_DIM] {
        debug_assert!(node < self.node_count);
        let mut idx = [0usize; MAX_DIM];
        let mut rem = node;
        for a in 0..self.dim {
            idx[a] = rem / self.strides[a];
            rem %= self.strides[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim);
        let mut node = 0;
        for a in 0..self.dim {
            debug_assert!(idx[a] < self.extents[a]);
            node += idx[a] * self.strides[a];
        }
        node
    }

    /// Coordinates of a node: `x_a = i_a * dx_a`.
    pub fn coords(&self, node: usize) -> [T; MAX_DIM] {
        let idx = self.multi_index(node);
        let mut x = [T::zero(); MAX_DIM];
        for a in 0..self.dim {
            x[a] = real::<T>(idx[a] as f64) * self.spacing[a];
        }
        x
    }

    /// Node shifted `offset` steps along `axis`, wrapping periodically.
    pub fn neighbor(&self, node: usize, axis: usize, offset: isize) -> usize {
        debug_assert!(axis < self.dim);
        let n = self.extents[axis] as isize;
        let idx = self.multi_index(node);
        let shifted = (idx[axis] as isize + offset).rem_euclid(n) as usize;
        let base = node - idx[axis] * self.strides[axis];
        base + shifted * self.strides[axis]
    }

    /// True when `other` describes the identical discretization.
    pub fn same_layout(&self, other: &Self) -> bool {
        self == other
    }
}
