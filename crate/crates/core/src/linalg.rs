//! Dense linear algebra on tiny matrices (dimension 2..=4).
//!
//! Metric components at a single grid node form a small symmetric matrix;
//! everything here operates on a fixed `[[T; 4]; 4]` buffer with an explicit
//! active dimension.  All routines are deterministic (fixed iteration order).

use crate::scalar::{real, Real};

pub const MAX_DIM: usize = 4;

/// Fixed-capacity square matrix with active dimension `dim <= 4`.
pub type SmallMat<T> = [[T; MAX_DIM]; MAX_DIM];

pub fn zero_mat<T: Real>() -> SmallMat<T> {
    [[T::zero(); MAX_DIM]; MAX_DIM]
}

/// Average `m` with its transpose in place. Entries that already equal
/// their mirror are unchanged bit for bit.
pub fn symmetrize_mat<T: Real>(m: &mut SmallMat<T>, dim: usize) {
    let half = real::<T>(0.5);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = half * (m[i][j] + m[j][i]);
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
}

pub fn identity<T: Real>(dim: usize) -> SmallMat<T> {
    let mut m = zero_mat();
    for i in 0..dim {
        m[i][i] = T::one();
    }
    m
}

pub fn determinant<T: Real>(m: &SmallMat<T>, dim: usize) -> T {
    match dim {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        4 => {
            let mut det = T::zero();
            let mut sign = T::one();
            for col in 0..4 {
                let minor = minor3(m, 0, col);
                det = det + sign * m[0][col] * determinant(&minor, 3);
                sign = -sign;
            }
            det
        }
        _ => panic!("determinant: unsupported dimension {dim}"),
    }
}

fn minor3<T: Real>(m: &SmallMat<T>, drop_row: usize, drop_col: usize) -> SmallMat<T> {
    let mut out = zero_mat();
    let mut r = 0;
    for i in 0..4 {
        if i == drop_row {
            continue;
        }
        let mut c = 0;
        for j in 0..4 {
            if j == drop_col {
                continue;
            }
            out[r][c] = m[i][j];
            c += 1;
        }
        r += 1;
    }
    out
}

/// Matrix inverse via cofactors.  Returns `None` when the determinant
/// vanishes (or is not finite).
pub fn inverse<T: Real>(m: &SmallMat<T>, dim: usize) -> Option<SmallMat<T>> {
    let det = determinant(m, dim);
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    let inv_det = T::one() / det;
    let mut out = zero_mat();
    match dim {
        1 => out[0][0] = inv_det,
        2 => {
            out[0][0] = m[1][1] * inv_det;
            out[0][1] = -m[0][1] * inv_det;
            out[1][0] = -m[1][0] * inv_det;
            out[1][1] = m[0][0] * inv_det;
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let a = m[(i + 1) % 3][(j + 1) % 3] * m[(i + 2) % 3][(j + 2) % 3]
                        - m[(i + 1) % 3][(j + 2) % 3] * m[(i + 2) % 3][(j + 1) % 3];
                    // transpose of cofactor matrix
                    out[j][i] = a * inv_det;
                }
            }
        }
        4 => {
            for i in 0..4 {
                for j in 0..4 {
                    let minor = minor3(m, i, j);
                    let cof = determinant(&minor, 3);
                    let sign = if (i + j) % 2 == 0 { T::one() } else { -T::one() };
                    out[j][i] = sign * cof * inv_det;
                }
            }
        }
        _ => panic!("inverse: unsupported dimension {dim}"),
    }
    Some(out)
}

pub fn mat_mul<T: Real>(a: &SmallMat<T>, b: &SmallMat<T>, dim: usize) -> SmallMat<T> {
    let mut out = zero_mat();
    for i in 0..dim {
        for j in 0..dim {
            let mut s = T::zero();
            for k in 0..dim {
                s = s + a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// Max absolute entry of `a*b - id`; used to validate metric inverses.
pub fn inverse_defect<T: Real>(a: &SmallMat<T>, b: &SmallMat<T>, dim: usize) -> T {
    let prod = mat_mul(a, b, dim);
    let mut worst = T::zero();
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { T::one() } else { T::zero() };
            let d = (prod[i][j] - target).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Cholesky factorization of a symmetric matrix: `m = L L^T`.
/// Returns `None` when the matrix is not positive definite.
pub fn cholesky<T: Real>(m: &SmallMat<T>, dim: usize) -> Option<SmallMat<T>> {
    let mut l = zero_mat();
    for i in 0..dim {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            if i == j {
                if s <= T::zero() || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi sweeps, ascending.
pub fn symmetric_eigenvalues<T: Real>(m: &SmallMat<T>, dim: usize) -> [T; MAX_DIM] {
    let mut a = *m;
    // Fixed sweep count; quadratic convergence makes this far more than enough
    // for 4x4 at double precision.
    for _ in 0..24 {
        let mut off = T::zero();
        for p in 0..dim {
            for q in (p + 1)..dim {
                off = off + a[p][q] * a[p][q];
            }
        }
        if off <= T::min_positive_value() {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (real::<T>(2.0) * a[p][q]);
                let t = if theta >= T::zero() {
                    T::one() / (theta + (T::one() + theta * theta).sqrt())
                } else {
                    -T::one() / (-theta + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig = [T::zero(); MAX_DIM];
    for i in 0..dim {
        eig[i] = a[i][i];
    }
    eig[..dim].sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues must be comparable"));
    eig
}

/// Smallest eigenvalue of the pencil `(a, g)` with `g` positive definite,
/// i.e. the smallest `lambda` with `det(a - lambda g) = 0`.
///
/// Solved by reducing with the Cholesky factor of `g`:
/// `g = L L^T  =>  eig(L^-1 a L^-T)`.
pub fn min_generalized_eigenvalue<T: Real>(
    a: &SmallMat<T>,
    g: &SmallMat<T>,
    dim: usize,
) -> Option<T> {
    let l = cholesky(g, dim)?;
    // b = L^-1 a L^-T  via two triangular solves
    let mut b = *a;
    // forward-solve L x = b column-wise (x overwrites b): handles L^-1 a
    for j in 0..dim {
        for i in 0..dim {
            let mut s = b[i][j];
            for k in 0..i {
                s = s - l[i][k] * b[k][j];
            }
            b[i][j] = s / l[i][i];
        }
    }
    // now solve (L^-1 a) L^-T: transpose-solve row-wise
    for i in 0..dim {
        for j in 0..dim {
            let mut s = b[i][j];
            for k in 0..j {
                s = s - b[i][k] * l[j][k];
            }
            b[i][j] = s / l[j][j];
        }
    }
    let eig = symmetric_eigenvalues(&b, dim);
    Some(eig[0])
}
