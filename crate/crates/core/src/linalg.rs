//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;

/// Maximum absolute row sum.
pub fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Numerical rank from the singular values.
pub fn rank(m: &Matrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    let cutoff = max * RANK_RTOL * (m.nrows().max(m.ncols()) as f64);
    sv.iter().filter(|&&s| s > cutoff).count()
}

pub fn has_full_column_rank(m: &Matrix) -> bool {
    m.ncols() > 0 && rank(m) == m.ncols()
}

pub fn is_identity(m: &Matrix) -> bool {
    m.is_square()
        && m.iter()
            .enumerate()
            .all(|(k, &v)| v == if k % m.nrows() == k / m.nrows() { 1.0 } else { 0.0 })
}

/// Ratio of smallest to largest singular value, `1.0` for empty matrices.
pub fn inverse_condition(m: &Matrix) -> f64 {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    if sv.len() < m.ncols() {
        // more columns than rows: rank deficient
        return 0.0;
    }
    sv.iter().copied().fold(f64::INFINITY, f64::min) / max
}

/// Minimum-norm least-squares solution of `m * x ≈ rhs`.
pub fn least_squares(m: &Matrix, rhs: &Vector) -> Vector {
    if m.ncols() == 0 {
        return Vector::zeros(0);
    }
    let svd = m.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = max * RANK_RTOL * (m.nrows().max(m.ncols()) as f64);
    svd.solve(rhs, eps.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| Vector::zeros(m.ncols()))
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn is_symmetric(m: &Matrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    (m - m.transpose()).iter().all(|v| v.abs() <= 1e-12 * scale)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
}
