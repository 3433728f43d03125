//! Concrete first-order commutator check: `[∇_a, ∇_b]` applied to low-rank
//! fields must equal the curvature action, locking the sign convention of the
//! Riemann tensor to the operational definition `∇∇ − ∇∇`.

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::metric::MetricField;
use crate::scalar::Real;
use crate::tensor::covariant_derivative;

/// Max-abs over all nodes of `([∇_a,∇_b]W − curvature action)` for `W` of
/// rank (0,0), (1,0), (0,1) or (1,1):
///
/// * vectors:   `[∇_a,∇_b]V^l = R^l_{abk} V^k`
/// * one-forms: `[∇_a,∇_b]ω_k = −R^m_{abk} ω_m`
/// * (1,1):     both corrections, one per slot
/// * scalars:   zero
///
/// with `R^l_{abk} = g^{lm} R_{abkm}`.
pub fn commutator_defect<T: Real>(w: &TensorField<T>, g: &MetricField<T>) -> Result<T> {
    let (p, q) = w.rank();
    if p > 1 || q > 1 {
        return Err(Error::InvalidParameter(format!(
            "commutator_defect supports ranks up to (1,1), got ({p},{q})"
        )));
    }
    if !w.grid().same_layout(g.grid()) {
        return Err(Error::GridMismatch);
    }
    let dim = g.dim();
    let bundle = g.curvature().clone();
    let conn = bundle.connection();
    let rm = bundle.rm();
    let d2 = covariant_derivative(&covariant_derivative(w, conn)?, conn)?;
    // d2 tuple: [up-slots.., c2, c1, down-slots..]
    let mut worst = T::zero();
    let d2s = dim * dim;
    let d3 = d2s * dim;
    for node in 0..g.grid().node_count() {
        let gi = g.node_inv(node);
        let rv = rm.node_slice(node);
        let wv = w.node_slice(node);
        let dv = d2.node_slice(node);
        // R^l_{abk} at this node
        let mut rup = [[[[T::zero(); 4]; 4]; 4]; 4];
        for a in 0..dim {
            for b in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let mut s = T::zero();
                        for m in 0..dim {
                            s += gi[l][m] * rv[a * d3 + b * d2s + k * dim + m];
                        }
                        rup[l][a][b][k] = s;
                    }
                }
            }
        }
        for a in 0..dim {
            for b in (a + 1)..dim {
                match (p, q) {
                    (0, 0) => {
                        let comm = dv[a * dim + b] - dv[b * dim + a];
                        let d = comm.abs();
                        if d > worst {
                            worst = d;
                        }
                    }
                    (1, 0) => {
                        for l in 0..dim {
                            let comm = dv[l * d2s + a * dim + b] - dv[l * d2s + b * dim + a];
                            let mut act = T::zero();
                            for k in 0..dim {
                                act += rup[l][a][b][k] * wv[k];
                            }
                            let d = (comm - act).abs();
                            if d > worst {
                                worst = d;
                            }
                        }
                    }
                    (0, 1) => {
                        for k in 0..dim {
                            let comm = dv[a * d2s + b * dim + k] - dv[b * d2s + a * dim + k];
                            let mut act = T::zero();
                            for m in 0..dim {
                                act -= rup[m][a][b][k] * wv[m];
                            }
                            let d = (comm - act).abs();
                            if d > worst {
                                worst = d;
                            }
                        }
                    }
                    (1, 1) => {
                        for u in 0..dim {
                            for v in 0..dim {
                                let comm = dv[u * d3 + a * d2s + b * dim + v]
                                    - dv[u * d3 + b * d2s + a * dim + v];
                                let mut act = T::zero();
                                for m in 0..dim {
                                    act += rup[u][a][b][m] * wv[m * dim + v]
                                        - rup[m][a][b][v] * wv[u * dim + m];
                                }
                                let d = (comm - act).abs();
                                if d > worst {
                                    worst = d;
                                }
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
    }
    Ok(worst)
}
