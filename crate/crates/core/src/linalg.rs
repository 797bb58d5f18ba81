//! Minimal dense symmetric-positive-definite kernels.
//!
//! Two consumers, both tiny: the estimation-error variance solves a W×W
//! diagonally loaded Toeplitz system (W is a prediction window, single
//! digits), and trace generation factorizes an N×N slot-correlation matrix
//! (N ≈ 100). At these sizes a textbook Cholesky is exact enough and beats
//! pulling in a linear-algebra dependency for two call sites.

use crate::scalar::Real;

/// Cholesky factorization `A = L·Lᵀ` of a symmetric matrix in row-major
/// order. Returns the lower factor (row-major, upper part zeroed), or `None`
/// if a pivot is nonpositive or non-finite — i.e. the matrix is not
/// numerically positive definite.
pub(crate) fn cholesky_lower<R: Real>(a: &[R], n: usize) -> Option<Vec<R>> {
    assert_eq!(a.len(), n * n, "cholesky_lower: matrix shape mismatch");
    let mut l = vec![R::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > R::zero()) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L·Lᵀ·x = b` given the lower Cholesky factor.
pub(crate) fn solve_with_factor<R: Real>(l: &[R], n: usize, b: &[R]) -> Vec<R> {
    assert_eq!(l.len(), n * n, "solve_with_factor: factor shape mismatch");
    assert_eq!(b.len(), n, "solve_with_factor: rhs length mismatch");
    // Forward: L·y = b.
    let mut y = vec![R::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    // Backward: Lᵀ·x = y.
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

// ---- tests ----
