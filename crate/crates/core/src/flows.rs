//! Right-hand sides of the curvature evolution equations.
//!
//! The general family evolves the metric by a leading term built from iterated
//! Laplacians of the Ricci tensor plus optional scalar-curvature pieces, with
//! the fourth-order member admitting a quadratic completion that makes it the
//! negative gradient of the squared-curvature functional. The cross term flow
//! (definiteness-gated, three dimensions only) is driven by the inverse of the
//! Einstein tensor weighted by its determinant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SymmetryPair, TensorField};
use crate::linalg::{
    determinant, inverse, min_generalized_eigenvalue, symmetrize_mat, zero_mat, SmallMat,
};
use crate::metric::MetricField;
use crate::scalar::{real, Real};
use crate::tensor::curvature::obstruction_leading;

/// Lower-order completion attached to the family's leading operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaPreset {
    /// No lower-order terms: the bare leading operator.
    #[default]
    Zero,
    /// The curvature-squared gradient completion (fourth-order member only).
    L2Quadratics,
}

/// Which evolution equation to run or audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowSpec {
    /// Second-order: `∂g = −2 Rc`.
    Ricci,
    /// Fourth-order gradient flow of `½∫|Rm|²`.
    L2,
    /// Order `2k+2` member with scalar-curvature couplings `alpha`, `beta`.
    Family {
        k: usize,
        alpha: f64,
        beta: f64,
        #[serde(default)]
        lambda: LambdaPreset,
    },
    /// Cross term flow `∂g = −2σ X`, `sigma = ±1`, three dimensions only.
    Xcf { sigma: i8 },
}

impl FlowSpec {
    /// Short stable identifier used in reports and file names.
    pub fn name(&self) -> &'static str {
        match self {
            FlowSpec::Ricci => "ricci",
            FlowSpec::L2 => "l2",
            FlowSpec::Family { .. } => "family",
            FlowSpec::Xcf { .. } => "xcf",
        }
    }

    /// Number of spatial derivatives in the leading operator.
    pub fn operator_order(&self) -> usize {
        match self {
            FlowSpec::Ricci => 2,
            FlowSpec::L2 => 4,
            FlowSpec::Family { k, .. } => 2 * k + 2,
            FlowSpec::Xcf { .. } => 2,
        }
    }

    /// Check internal consistency and compatibility with the dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            FlowSpec::Ricci | FlowSpec::L2 => Ok(()),
            FlowSpec::Family {
                k, beta, lambda, ..
            } => {
                if *k == 0 && *beta != 0.0 {
                    return Err(Error::InvalidFlowSpec(
                        "the second-order member (k = 0) has no Hessian coupling; beta must be 0"
                            .into(),
                    ));
                }
                if *lambda == LambdaPreset::L2Quadratics && *k != 1 {
                    return Err(Error::InvalidFlowSpec(
                        "the quadratic completion is defined only for the fourth-order member (k = 1)"
                            .into(),
                    ));
                }
                Ok(())
            }
            FlowSpec::Xcf { sigma } => {
                if dim != 3 {
                    return Err(Error::InvalidFlowSpec(format!(
                        "the cross term flow is defined only in three dimensions, got {dim}"
                    )));
                }
                if *sigma != 1 && *sigma != -1 {
                    return Err(Error::InvalidFlowSpec(format!(
                        "sigma must be +1 or -1, got {sigma}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// `∂g = −2 Rc`, the second-order member of the family.
pub fn ricci_rhs<T: Real>(g: &MetricField<T>) -> Result<TensorField<T>> {
    obstruction_leading(g, 0, 0.0, 0.0)
}

/// Quadratic curvature terms completing the fourth-order leading operator to
/// the negative gradient of `½∫|Rm|² dμ`:
///
/// `2 Rc^{pq} R_{ipqj} − 2 Rc_i^p Rc_{pj} + R_i^{pqr} R_{jpqr} − ¼|Rm|² g_{ij}`.
pub fn l2_quadratics<T: Real>(g: &MetricField<T>) -> Result<TensorField<T>> {
    let dim = g.dim();
    let grid = g.grid().clone();
    let bundle = g.curvature().clone();
    let rm = bundle.rm();
    let rc = bundle.rc();
    let d2 = dim * dim;
    let d3 = d2 * dim;
    let mut out = TensorField::zeros(grid.clone(), 0, 2);
    let two = real::<T>(2.0);
    let quarter = real::<T>(0.25);
    for node in 0..grid.node_count() {
        let gv = g.node_mat(node);
        let gi = g.node_inv(node);
        let rmv = rm.node_slice(node);
        let rcv = rc.node_slice(node);

        // Raise the last three slots of Rm one at a time.
        let mut t1 = [[[[T::zero(); 4]; 4]; 4]; 4];
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let mut s = T::zero();
                        for p in 0..dim {
                            s += gi[b][p] * rmv[a * d3 + p * d2 + c * dim + d];
                        }
                        t1[a][b][c][d] = s;
                    }
                }
            }
        }
        let mut t2 = [[[[T::zero(); 4]; 4]; 4]; 4];
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let mut s = T::zero();
                        for q in 0..dim {
                            s += gi[c][q] * t1[a][b][q][d];
                        }
                        t2[a][b][c][d] = s;
                    }
                }
            }
        }
        // rup[a][b][c][d] = R_a^{bcd}
        let mut rup = [[[[T::zero(); 4]; 4]; 4]; 4];
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let mut s = T::zero();
                        for r in 0..dim {
                            s += gi[d][r] * t2[a][b][c][r];
                        }
                        rup[a][b][c][d] = s;
                    }
                }
            }
        }
        // |Rm|^2 = R_{abcd} R^{abcd}
        let mut rm_sq = T::zero();
        for a in 0..dim {
            for e in 0..dim {
                let mut inner = T::zero();
                for b in 0..dim {
                    for c in 0..dim {
                        for d in 0..dim {
                            inner += rmv[a * d3 + b * d2 + c * dim + d] * rup[e][b][c][d];
                        }
                    }
                }
                rm_sq += gi[a][e] * inner;
            }
        }
        // Rc^{pq}
        let mut rc_up = [[T::zero(); 4]; 4];
        for p in 0..dim {
            for q in 0..dim {
                let mut s = T::zero();
                for a in 0..dim {
                    for b in 0..dim {
                        s += gi[p][a] * gi[q][b] * rcv[a * dim + b];
                    }
                }
                rc_up[p][q] = s;
            }
        }
        let dst = out.node_slice_mut(node);
        for i in 0..dim {
            for j in 0..dim {
                let mut term1 = T::zero();
                for p in 0..dim {
                    for q in 0..dim {
                        term1 += rc_up[p][q] * rmv[i * d3 + p * d2 + q * dim + j];
                    }
                }
                let mut rc2 = T::zero();
                for a in 0..dim {
                    for b in 0..dim {
                        rc2 += rcv[i * dim + a] * gi[a][b] * rcv[b * dim + j];
                    }
                }
                let mut term3 = T::zero();
                for p in 0..dim {
                    for q in 0..dim {
                        for r in 0..dim {
                            term3 += rup[i][p][q][r] * rmv[j * d3 + p * d2 + q * dim + r];
                        }
                    }
                }
                dst[i * dim + j] =
                    two * term1 - two * rc2 + term3 - quarter * rm_sq * gv[i][j];
            }
        }
    }
    out.symmetrize_pair(0, 1);
    Ok(out.with_symmetries(vec![SymmetryPair::Symmetric(0, 1)]))
}

/// Order `2k+2` right-hand side: leading operator plus the selected
/// lower-order completion.
pub fn family_rhs<T: Real>(
    g: &MetricField<T>,
    k: usize,
    alpha: f64,
    beta: f64,
    lambda: LambdaPreset,
) -> Result<TensorField<T>> {
    let spec = FlowSpec::Family {
        k,
        alpha,
        beta,
        lambda,
    };
    spec.validate(g.dim())?;
    let mut out = obstruction_leading(g, k, alpha, beta)?;
    if lambda == LambdaPreset::L2Quadratics {
        let quad = l2_quadratics(g)?;
        out.add_scaled(T::one(), &quad)?;
    }
    Ok(out.with_symmetries(vec![SymmetryPair::Symmetric(0, 1)]))
}

/// `∂g = −grad(½∫|Rm|² dμ)`: the fourth-order member with `alpha = 0`,
/// `beta = −½` and the quadratic completion.
pub fn l2_rhs<T: Real>(g: &MetricField<T>) -> Result<TensorField<T>> {
    family_rhs(g, 1, 0.0, -0.5, LambdaPreset::L2Quadratics)
}

/// Cutoff on `|det E / det g|` below which the Einstein tensor is treated as
/// non-invertible and the cross term flow refuses to proceed.
pub const EINSTEIN_DET_CUTOFF: f64 = 1e-12;

/// Per-node algebra of the cross term flow:
/// Einstein tensor `E`, its raised form, `V = (E^{··})^{-1}`,
/// determinant ratio `P = det E_{ij} / det g_{ij}`, and `X = P·V`.
fn xcf_node<T: Real>(
    gv: &SmallMat<T>,
    gi: &SmallMat<T>,
    e_down: &SmallMat<T>,
    dim: usize,
) -> std::result::Result<(SmallMat<T>, SmallMat<T>, T), f64> {
    let mut e_up = zero_mat::<T>();
    for i in 0..dim {
        for j in 0..dim {
            let mut s = T::zero();
            for k in 0..dim {
                for l in 0..dim {
                    s += gi[i][k] * gi[j][l] * e_down[k][l];
                }
            }
            e_up[i][j] = s;
        }
    }
    // Raising with two inverse-metric factors sums the same products in a
    // different order for (i,j) and (j,i); average so the matrix, and
    // everything derived from it, is symmetric to the last bit.
    symmetrize_mat(&mut e_up, dim);
    let det_e = determinant(e_down, dim);
    let det_g = determinant(gv, dim);
    let p = det_e / det_g;
    let ratio = p.abs().to_f64().unwrap_or(0.0);
    if !ratio.is_finite() || ratio < EINSTEIN_DET_CUTOFF {
        return Err(ratio);
    }
    let mut v = inverse(&e_up, dim).ok_or(ratio)?;
    symmetrize_mat(&mut v, dim);
    Ok((e_up, v, p))
}

/// The tensors entering the cross term flow, assembled over a whole grid.
#[derive(Debug, Clone)]
pub struct XcfAlgebra<T: Real> {
    einstein: TensorField<T>,
    einstein_raised: TensorField<T>,
    inverse_einstein: TensorField<T>,
    det_ratio: TensorField<T>,
    cross: TensorField<T>,
}

impl<T: Real> XcfAlgebra<T> {
    /// Build `E`, `E^{··}`, `V`, `P` and `X = P·V` at every node, failing with
    /// the offending node if the Einstein tensor degenerates anywhere.
    pub fn build(g: &MetricField<T>) -> Result<Self> {
        let dim = g.dim();
        let grid = g.grid().clone();
        let bundle = g.curvature().clone();
        let e_field = bundle.einstein();
        let mut e_raised = TensorField::zeros(grid.clone(), 2, 0);
        let mut v_field = TensorField::zeros(grid.clone(), 0, 2);
        let mut p_field = TensorField::zeros(grid.clone(), 0, 0);
        let mut x_field = TensorField::zeros(grid.clone(), 0, 2);
        for node in 0..grid.node_count() {
            let gv = g.node_mat(node);
            let gi = g.node_inv(node);
            let ev = e_field.node_slice(node);
            let mut e_mat = zero_mat::<T>();
            for i in 0..dim {
                for j in 0..dim {
                    e_mat[i][j] = ev[i * dim + j];
                }
            }
            let (e_up, v, p) = xcf_node(&gv, &gi, &e_mat, dim)
                .map_err(|ratio| Error::NonInvertibleEinstein { node, ratio })?;
            let eu = e_raised.node_slice_mut(node);
            let vv = v_field.node_slice_mut(node);
            let xv = x_field.node_slice_mut(node);
            for i in 0..dim {
                for j in 0..dim {
                    eu[i * dim + j] = e_up[i][j];
                    vv[i * dim + j] = v[i][j];
                    xv[i * dim + j] = p * v[i][j];
                }
            }
            p_field.node_slice_mut(node)[0] = p;
        }
        let sym = vec![SymmetryPair::Symmetric(0, 1)];
        Ok(XcfAlgebra {
            einstein: e_field.clone().with_symmetries(sym.clone()),
            einstein_raised: e_raised.with_symmetries(sym.clone()),
            inverse_einstein: v_field.with_symmetries(sym.clone()),
            det_ratio: p_field,
            cross: x_field.with_symmetries(sym),
        })
    }

    /// Einstein tensor `E_{ij}`.
    pub fn einstein(&self) -> &TensorField<T> {
        &self.einstein
    }

    /// `E^{ij} = g^{ik} g^{jl} E_{kl}`.
    pub fn einstein_raised(&self) -> &TensorField<T> {
        &self.einstein_raised
    }

    /// `V = (E^{··})^{-1}`, a covariant symmetric 2-tensor.
    pub fn inverse_einstein(&self) -> &TensorField<T> {
        &self.inverse_einstein
    }

    /// Scalar field `P = det E_{ij} / det g_{ij}`.
    pub fn det_ratio(&self) -> &TensorField<T> {
        &self.det_ratio
    }

    /// `X = P·V`, the tensor driving the flow.
    pub fn cross(&self) -> &TensorField<T> {
        &self.cross
    }

    /// Max-abs deviation of `X` from its curvature form
    /// `X_{ij} = −½ E^{pq} R_{pijq}`.
    pub fn formula_defect(&self, g: &MetricField<T>) -> Result<T> {
        if !self.cross.grid().same_layout(g.grid()) {
            return Err(Error::GridMismatch);
        }
        let dim = g.dim();
        let d2 = dim * dim;
        let d3 = d2 * dim;
        let bundle = g.curvature().clone();
        let rm = bundle.rm();
        let half = real::<T>(0.5);
        let mut worst = T::zero();
        for node in 0..g.grid().node_count() {
            let eu = self.einstein_raised.node_slice(node);
            let rmv = rm.node_slice(node);
            let xv = self.cross.node_slice(node);
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = T::zero();
                    for p in 0..dim {
                        for q in 0..dim {
                            s += eu[p * dim + q] * rmv[p * d3 + i * d2 + j * dim + q];
                        }
                    }
                    let d = (xv[i * dim + j] + half * s).abs();
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Smallest generalized eigenvalue of `−σE` against `g` over all nodes,
    /// with the node attaining it. Positive margin means `σE` is negative
    /// definite everywhere, the condition gating the flow.
    pub fn margin(&self, g: &MetricField<T>, sigma: i8) -> Result<(T, usize)> {
        if sigma != 1 && sigma != -1 {
            return Err(Error::InvalidFlowSpec(format!(
                "sigma must be +1 or -1, got {sigma}"
            )));
        }
        let dim = g.dim();
        let s = real::<T>(-f64::from(sigma));
        let mut best = T::infinity();
        let mut best_node = 0usize;
        for node in 0..g.grid().node_count() {
            let gv = g.node_mat(node);
            let ev = self.einstein.node_slice(node);
            let mut m = zero_mat::<T>();
            for i in 0..dim {
                for j in 0..dim {
                    m[i][j] = s * ev[i * dim + j];
                }
            }
            let lam = min_generalized_eigenvalue(&m, &gv, dim).ok_or(Error::NonFinite {
                context: format!("generalized eigenvalue at node {node}"),
            })?;
            if lam < best {
                best = lam;
                best_node = node;
            }
        }
        Ok((best, best_node))
    }
}

/// `∂g = −2σ X`, gated on `σE` being negative definite everywhere.
pub fn xcf_rhs<T: Real>(g: &MetricField<T>, sigma: i8) -> Result<TensorField<T>> {
    FlowSpec::Xcf { sigma }.validate(g.dim())?;
    let algebra = XcfAlgebra::build(g)?;
    let (lam, node) = algebra.margin(g, sigma)?;
    if lam <= T::zero() {
        return Err(Error::DefinitenessViolated {
            node,
            eigenvalue: lam.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(algebra
        .cross()
        .scaled(real::<T>(-2.0 * f64::from(sigma)))
        .with_symmetries(vec![SymmetryPair::Symmetric(0, 1)]))
}

/// `∫ |Rm|² dμ`, the functional whose negative gradient is the fourth-order
/// flow (up to the factor ½ carried by the flow definition).
pub fn curvature_functional<T: Real>(g: &MetricField<T>) -> Result<T> {
    let rm = g.curvature().clone();
    let density = g.pointwise_inner(rm.rm(), rm.rm())?;
    g.integrate(&density)
}

/// Evaluate the right-hand side of `spec` on the chart backend.
pub fn flow_rhs<T: Real>(g: &MetricField<T>, spec: &FlowSpec) -> Result<TensorField<T>> {
    spec.validate(g.dim())?;
    match spec {
        FlowSpec::Ricci => ricci_rhs(g),
        FlowSpec::L2 => l2_rhs(g),
        FlowSpec::Family {
            k,
            alpha,
            beta,
            lambda,
        } => family_rhs(g, *k, *alpha, *beta, *lambda),
        FlowSpec::Xcf { sigma } => xcf_rhs(g, *sigma),
    }
}
