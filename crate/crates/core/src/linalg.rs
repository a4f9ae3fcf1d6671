//! Dense linear-algebra helpers shared by the algebra modules.
//!
//! Rank and kernel decisions all go through [`null_space`], which thresholds
//! singular values relative to the largest one.

use nalgebra::{DMatrix, DVector};

/// Orthonormal (Euclidean) basis of the kernel of `m`, as columns.
///
/// A right singular vector belongs to the kernel when its singular value is
/// at most `rel_tol * sigma_max`. A zero matrix (or one with no rows) has the
/// whole space as kernel.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    let square = reduce_to_square(m);
    let svd = square.svd(false, true);
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return DMatrix::identity(cols, cols);
    }
    let v_t = svd.v_t.expect("requested V^T");
    let threshold = rel_tol * sigma_max;
    let kernel: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    columns_to_matrix(cols, &kernel)
}

/// Numerical rank with threshold `abs_tol` on the singular values.
pub fn rank_abs(m: &DMatrix<f64>, abs_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let square = reduce_to_square(m);
    square
        .singular_values()
        .iter()
        .filter(|&&s| s > abs_tol)
        .count()
}

/// Largest singular value, 0 for empty matrices.
pub fn sigma_max(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    reduce_to_square(m).singular_values().max()
}

/// Replace `m` by a square `ncols x ncols` matrix with the same singular values
/// and right singular vectors: an R factor for tall input, zero padding for
/// wide input.
fn reduce_to_square(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows > cols {
        m.clone().qr().r()
    } else if rows < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded
    } else {
        m.clone()
    }
}

/// Stack vectors of length `n` as the columns of an `n x k` matrix.
pub fn columns_to_matrix(n: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Modified Gram-Schmidt with one full re-orthogonalization pass. Columns whose
/// residual norm falls below `drop_tol` times their original norm are discarded.
pub fn modified_gram_schmidt(vectors: &DMatrix<f64>, drop_tol: f64) -> DMatrix<f64> {
    let n = vectors.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vectors.ncols());
    for col in vectors.column_iter() {
        let original = col.norm();
        if original == 0.0 {
            continue;
        }
        let mut v = col.clone_owned();
        for _pass in 0..2 {
            for q in &basis {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm > drop_tol * original {
            basis.push(v / norm);
        }
    }
    columns_to_matrix(n, &basis)
}

/// Frobenius norm.
pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Spectral norm (largest singular value).
pub fn spectral(m: &DMatrix<f64>) -> f64 {
    sigma_max(m)
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// 2-norm condition number; infinite for singular or empty input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let s = m.clone().singular_values();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        s.max() / min
    }
}
