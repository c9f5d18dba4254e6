//! Dense least-squares primitives shared by the selection pipeline.
//!
//! Everything here is built on a thin Householder QR factorization rather
//! than normal equations: the Gram matrix squares the condition number,
//! while the orthogonal route gives the same minimizer with better
//! conditioning. All functions are pure; callers keep ownership of their
//! inputs.

use ndarray::Array2;
use thiserror::Error;

/// Relative tolerance on the triangular factor's diagonal below which a
/// design block is declared rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Columns whose Euclidean norm is at or below this cannot be normalized.
pub const COLUMN_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    /// The triangular factor has an effectively zero diagonal entry, or the
    /// design has more columns than rows.
    #[error("rank deficient design: column {col}, diagonal ratio {ratio:.3e} below {RANK_TOL:.0e}")]
    RankDeficient { col: usize, ratio: f64 },
    #[error("column {index} has norm {norm:.3e}; cannot normalize")]
    ZeroColumn { index: usize, norm: f64 },
    #[error("row count mismatch: design has {design_rows} rows, response has {response_rows}")]
    RowMismatch {
        design_rows: usize,
        response_rows: usize,
    },
}

/// Squared Frobenius norm.
pub fn frob_sq(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// Frobenius norm.
pub fn frob(m: &Array2<f64>) -> f64 {
    frob_sq(m).sqrt()
}

/// In-place thin Householder QR of `a` (n×m, n ≥ m), applying the same
/// reflections to `y`. On return the upper triangle of `a` holds R with a
/// nonnegative diagonal, `y` holds Qᵀy, and the returned vector is diag(R).
///
/// Reflector construction follows Golub & Van Loan (alg. 5.1.1); the tail of
/// each processed column stores the reflector and is never read back as R.
fn householder_qr_inplace(a: &mut Array2<f64>, y: &mut Array2<f64>) -> Vec<f64> {
    let (n, m) = a.dim();
    let l = y.ncols();
    let mut diag = Vec::with_capacity(m);
    for k in 0..m {
        let mut sigma = 0.0;
        for i in k + 1..n {
            sigma += a[[i, k]] * a[[i, k]];
        }
        let alpha = a[[k, k]];
        let (beta, mu) = if sigma == 0.0 {
            // Column already triangular below k; reflect only to fix the sign.
            (if alpha < 0.0 { 2.0 } else { 0.0 }, alpha.abs())
        } else {
            let mu = (alpha * alpha + sigma).sqrt();
            let v0 = if alpha <= 0.0 {
                alpha - mu
            } else {
                -sigma / (alpha + mu)
            };
            let beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
            for i in k + 1..n {
                a[[i, k]] /= v0;
            }
            (beta, mu)
        };
        if beta != 0.0 {
            // v = [1, a[k+1.., k]]; apply I - beta v vᵀ to a[:, k+1..] and y.
            for j in k + 1..m {
                let mut w = a[[k, j]];
                for i in k + 1..n {
                    w += a[[i, k]] * a[[i, j]];
                }
                w *= beta;
                a[[k, j]] -= w;
                for i in k + 1..n {
                    a[[i, j]] -= w * a[[i, k]];
                }
            }
            for j in 0..l {
                let mut w = y[[k, j]];
                for i in k + 1..n {
                    w += a[[i, k]] * y[[i, j]];
                }
                w *= beta;
                y[[k, j]] -= w;
                for i in k + 1..n {
                    y[[i, j]] -= w * a[[i, k]];
                }
            }
        }
        a[[k, k]] = mu;
        diag.push(mu);
    }
    diag
}

fn check_rank(diag: &[f64]) -> Result<(), LinalgError> {
    let max = diag.iter().cloned().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return Err(LinalgError::RankDeficient { col: 0, ratio: 0.0 });
    }
    for (k, &d) in diag.iter().enumerate() {
        if d < RANK_TOL * max {
            return Err(LinalgError::RankDeficient {
                col: k,
                ratio: d / max,
            });
        }
    }
    Ok(())
}

/// Back-substitute R x = b for the upper-triangular m×m block of `r`.
fn back_substitute(r: &Array2<f64>, b: &Array2<f64>, m: usize) -> Array2<f64> {
    let l = b.ncols();
    let mut x = Array2::zeros((m, l));
    for col in 0..l {
        for i in (0..m).rev() {
            let mut s = b[[i, col]];
            for j in i + 1..m {
                s -= r[[i, j]] * x[[j, col]];
            }
            x[[i, col]] = s / r[[i, i]];
        }
    }
    x
}

/// QR-based least-squares core: returns the minimizer and the squared
/// residual norm read off the tail energy of Qᵀy.
fn qr_least_squares(
    a_sub: &Array2<f64>,
    y: &Array2<f64>,
) -> Result<(Array2<f64>, f64), LinalgError> {
    let (n, m) = a_sub.dim();
    let l = y.ncols();
    if y.nrows() != n {
        return Err(LinalgError::RowMismatch {
            design_rows: n,
            response_rows: y.nrows(),
        });
    }
    if m == 0 {
        return Ok((Array2::zeros((0, l)), frob_sq(y)));
    }
    if m > n {
        // An n×m design with m > n has rank at most n < m.
        return Err(LinalgError::RankDeficient { col: n, ratio: 0.0 });
    }
    let mut work = a_sub.clone();
    let mut qty = y.clone();
    let diag = householder_qr_inplace(&mut work, &mut qty);
    check_rank(&diag)?;
    let xhat = back_substitute(&work, &qty, m);
    let mut tail_sq = 0.0;
    for i in m..n {
        for j in 0..l {
            tail_sq += qty[[i, j]] * qty[[i, j]];
        }
    }
    Ok((xhat, tail_sq))
}

/// Least-squares fit X̂ = argmin ‖Y − A_sub X‖_F, computed via Householder QR.
pub fn least_squares_fit(
    a_sub: &Array2<f64>,
    y: &Array2<f64>,
) -> Result<Array2<f64>, LinalgError> {
    qr_least_squares(a_sub, y).map(|(x, _)| x)
}

/// Squared Frobenius norm of the least-squares residual, ‖Π⊥(A_sub) Y‖²_F.
/// An empty design (zero columns) projects onto nothing and returns ‖Y‖²_F.
pub fn residual_sq_norm(a_sub: &Array2<f64>, y: &Array2<f64>) -> Result<f64, LinalgError> {
    qr_least_squares(a_sub, y).map(|(_, r)| r)
}

/// Full least-squares residual matrix Y − A_sub X̂ in the original coordinates.
pub fn residual_matrix(a_sub: &Array2<f64>, y: &Array2<f64>) -> Result<Array2<f64>, LinalgError> {
    if a_sub.ncols() == 0 {
        if y.nrows() != a_sub.nrows() {
            return Err(LinalgError::RowMismatch {
                design_rows: a_sub.nrows(),
                response_rows: y.nrows(),
            });
        }
        return Ok(y.clone());
    }
    let xhat = least_squares_fit(a_sub, y)?;
    Ok(y - &a_sub.dot(&xhat))
}

/// Returns a copy of `a` with every column scaled to unit Euclidean norm.
pub fn normalize_columns(a: &Array2<f64>) -> Result<Array2<f64>, LinalgError> {
    let mut out = a.clone();
    for j in 0..out.ncols() {
        let norm = out.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= COLUMN_NORM_TOL {
            return Err(LinalgError::ZeroColumn { index: j, norm });
        }
        out.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(out)
}

/// Natural log of |det M| for a square matrix via the QR diagonal.
/// Fails with `RankDeficient` when the matrix is numerically singular.
pub fn log_abs_det(m: &Array2<f64>) -> Result<f64, LinalgError> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(LinalgError::RowMismatch {
            design_rows: rows,
            response_rows: cols,
        });
    }
    if rows == 0 {
        return Ok(0.0);
    }
    let mut work = m.clone();
    let mut dummy = Array2::zeros((rows, 0));
    let diag = householder_qr_inplace(&mut work, &mut dummy);
    check_rank(&diag)?;
    Ok(diag.iter().map(|d| d.ln()).sum())
}
