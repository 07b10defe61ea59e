//! Builtin objective blocks with analytic value and gradient evaluators.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Result};
use crate::linalg::{is_symmetric, symmetrize, Matrix, Vector};

/// One squared range-residual term `(d2 - ‖u‖²)²`.
#[derive(Debug, Clone, PartialEq)]
pub enum RangeTerm {
    /// `u = p_i - p_j` between two points of the block.
    Pair { i: usize, j: usize, d2: f64 },
    /// `u = p_i - anchor` against a fixed position.
    Anchor { i: usize, anchor: Vec<f64>, d2: f64 },
}

/// A block placed on a subset of coordinates of a `Sum`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumPart {
    pub block: ObjectiveBlock,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockKind {
    Zero,
    /// `vᵀQv + qᵀv + constant`, `Q` symmetric.
    Quadratic {
        q_mat: Matrix,
        q: Vector,
        constant: f64,
    },
    /// Ascending coefficients: `c0 + c1 v + c2 v² + ...`.
    Polynomial1d { coefficients: Vec<f64> },
    /// `amplitude · cos(v + phase)`.
    Cosine1d { amplitude: f64, phase: f64 },
    /// `-v²`.
    NegativeSquare1d,
    /// `Σ h_δ(v_i - center_i)`.
    Huber { delta: f64, center: Vector },
    RangeResidual {
        point_dim: usize,
        terms: Vec<RangeTerm>,
    },
    Sum { parts: Vec<SumPart> },
}

/// A differentiable objective `R^dim → R` from the builtin registry.
///
/// Construct through the associated functions, which validate shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveBlock {
    kind: BlockKind,
    dim: usize,
}

fn huber(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta {
        0.5 * r * r
    } else {
        delta * (r.abs() - 0.5 * delta)
    }
}

impl ObjectiveBlock {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid!("zero block needs a positive dimension"));
        }
        Ok(Self {
            kind: BlockKind::Zero,
            dim,
        })
    }

    /// `vᵀQv + qᵀv + constant`; `Q` is symmetrized.
    pub fn quadratic(q_mat: Matrix, q: Vector, constant: f64) -> Result<Self> {
        let dim = q.len();
        if dim == 0 {
            return Err(invalid!("quadratic block needs a positive dimension"));
        }
        check_dim("quadratic Q rows", dim, q_mat.nrows())?;
        check_dim("quadratic Q cols", dim, q_mat.ncols())?;
        let q_mat = if is_symmetric(&q_mat) {
            q_mat
        } else {
            symmetrize(&q_mat)
        };
        Ok(Self {
            kind: BlockKind::Quadratic { q_mat, q, constant },
            dim,
        })
    }

    /// Scalar `v²`.
    pub fn square() -> Self {
        Self::polynomial(vec![0.0, 0.0, 1.0]).expect("valid coefficients")
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid!("polynomial needs at least one coefficient"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid!("polynomial coefficients must be finite"));
        }
        Ok(Self {
            kind: BlockKind::Polynomial1d { coefficients },
            dim: 1,
        })
    }

    pub fn cosine(amplitude: f64, phase: f64) -> Self {
        Self {
            kind: BlockKind::Cosine1d { amplitude, phase },
            dim: 1,
        }
    }

    /// `sin v`, represented as a cosine with phase `-π/2`.
    pub fn sine() -> Self {
        Self::cosine(1.0, -core::f64::consts::FRAC_PI_2)
    }

    pub fn negative_square() -> Self {
        Self {
            kind: BlockKind::NegativeSquare1d,
            dim: 1,
        }
    }

    pub fn huber(delta: f64, center: Vector) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(invalid!("huber delta must be positive, got {delta}"));
        }
        if center.is_empty() {
            return Err(invalid!("huber block needs a positive dimension"));
        }
        Ok(Self {
            dim: center.len(),
            kind: BlockKind::Huber { delta, center },
        })
    }

    pub fn range_residual(dim: usize, point_dim: usize, terms: Vec<RangeTerm>) -> Result<Self> {
        if dim == 0 || point_dim == 0 || dim % point_dim != 0 {
            return Err(invalid!(
                "range-residual dimension {dim} is not a positive multiple of point dimension {point_dim}"
            ));
        }
        let points = dim / point_dim;
        for term in &terms {
            match term {
                RangeTerm::Pair { i, j, d2 } => {
                    if *i >= points || *j >= points || i == j {
                        return Err(invalid!("range term pair ({i}, {j}) out of range"));
                    }
                    if !d2.is_finite() {
                        return Err(invalid!("range term distance must be finite"));
                    }
                }
                RangeTerm::Anchor { i, anchor, d2 } => {
                    if *i >= points {
                        return Err(invalid!("range term point {i} out of range"));
                    }
                    check_dim("range term anchor", point_dim, anchor.len())?;
                    if !d2.is_finite() {
                        return Err(invalid!("range term distance must be finite"));
                    }
                }
            }
        }
        Ok(Self {
            kind: BlockKind::RangeResidual { point_dim, terms },
            dim,
        })
    }

    pub fn sum(dim: usize, parts: Vec<SumPart>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid!("sum block needs a positive dimension"));
        }
        for part in &parts {
            check_dim("sum part indices", part.block.dim(), part.indices.len())?;
            if let Some(&bad) = part.indices.iter().find(|&&k| k >= dim) {
                return Err(invalid!("sum part index {bad} out of range for dimension {dim}"));
            }
        }
        Ok(Self {
            kind: BlockKind::Sum { parts },
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &BlockKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            BlockKind::Zero => true,
            BlockKind::Quadratic { q_mat, q, constant } => {
                *constant == 0.0 && q.iter().all(|v| *v == 0.0) && q_mat.iter().all(|v| *v == 0.0)
            }
            BlockKind::Polynomial1d { coefficients } => coefficients.iter().all(|c| *c == 0.0),
            BlockKind::Cosine1d { amplitude, .. } => *amplitude == 0.0,
            BlockKind::Sum { parts } => parts.iter().all(|p| p.block.is_zero()),
            BlockKind::RangeResidual { terms, .. } => terms.is_empty(),
            _ => false,
        }
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        match &self.kind {
            BlockKind::Zero => 0.0,
            BlockKind::Quadratic { q_mat, q, constant } => {
                let mut acc = *constant;
                for i in 0..self.dim {
                    let mut row = 0.0;
                    for j in 0..self.dim {
                        row += q_mat[(i, j)] * v[j];
                    }
                    acc += v[i] * row + q[i] * v[i];
                }
                acc
            }
            BlockKind::Polynomial1d { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * v[0] + c)
            }
            BlockKind::Cosine1d { amplitude, phase } => amplitude * libm::cos(v[0] + phase),
            BlockKind::NegativeSquare1d => -v[0] * v[0],
            BlockKind::Huber { delta, center } => v
                .iter()
                .zip(center.iter())
                .map(|(x, c)| huber(x - c, *delta))
                .sum(),
            BlockKind::RangeResidual { point_dim, terms } => terms
                .iter()
                .map(|t| {
                    let e = range_error(v, *point_dim, t);
                    e * e
                })
                .sum(),
            BlockKind::Sum { parts } => {
                let mut buf = Vec::new();
                parts
                    .iter()
                    .map(|part| {
                        gather(v, &part.indices, &mut buf);
                        part.block.value(&buf)
                    })
                    .sum()
            }
        }
    }

    /// Adds the gradient at `v` into `out`.
    pub fn add_gradient(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            BlockKind::Zero => {}
            BlockKind::Quadratic { q_mat, q, .. } => {
                for i in 0..self.dim {
                    let mut row = 0.0;
                    for j in 0..self.dim {
                        row += q_mat[(i, j)] * v[j];
                    }
                    out[i] += 2.0 * row + q[i];
                }
            }
            BlockKind::Polynomial1d { coefficients } => {
                let d = coefficients
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (k, c)| acc * v[0] + k as f64 * c);
                out[0] += d;
            }
            BlockKind::Cosine1d { amplitude, phase } => out[0] -= amplitude * libm::sin(v[0] + phase),
            BlockKind::NegativeSquare1d => out[0] -= 2.0 * v[0],
            BlockKind::Huber { delta, center } => {
                for i in 0..self.dim {
                    out[i] += (v[i] - center[i]).clamp(-*delta, *delta);
                }
            }
            BlockKind::RangeResidual { point_dim, terms } => {
                let pd = *point_dim;
                for t in terms {
                    let e = range_error(v, pd, t);
                    match t {
                        RangeTerm::Pair { i, j, .. } => {
                            for k in 0..pd {
                                let u = v[i * pd + k] - v[j * pd + k];
                                out[i * pd + k] -= 4.0 * e * u;
                                out[j * pd + k] += 4.0 * e * u;
                            }
                        }
                        RangeTerm::Anchor { i, anchor, .. } => {
                            for k in 0..pd {
                                out[i * pd + k] -= 4.0 * e * (v[i * pd + k] - anchor[k]);
                            }
                        }
                    }
                }
            }
            BlockKind::Sum { parts } => {
                let mut buf = Vec::new();
                for part in parts {
                    gather(v, &part.indices, &mut buf);
                    let mut g = vec![0.0; buf.len()];
                    part.block.add_gradient(&buf, &mut g);
                    for (k, &idx) in part.indices.iter().enumerate() {
                        out[idx] += g[k];
                    }
                }
            }
        }
    }

    pub fn gradient(&self, v: &[f64]) -> Vector {
        let mut out = Vector::zeros(self.dim);
        self.add_gradient(v, out.as_mut_slice());
        out
    }

    /// First derivative of a one-dimensional block.
    pub fn derivative_1d(&self, v: f64) -> f64 {
        let mut out = [0.0];
        self.add_gradient(&[v], &mut out);
        out[0]
    }

    /// Second derivative of a one-dimensional block.
    ///
    /// Huber blocks use the right-continuous convention at the kinks.
    pub fn second_derivative_1d(&self, v: f64) -> f64 {
        match &self.kind {
            BlockKind::Zero => 0.0,
            BlockKind::Quadratic { q_mat, .. } => 2.0 * q_mat[(0, 0)],
            BlockKind::Polynomial1d { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * v + (k * (k - 1)) as f64 * c),
            BlockKind::Cosine1d { amplitude, phase } => -amplitude * libm::cos(v + phase),
            BlockKind::NegativeSquare1d => -2.0,
            BlockKind::Huber { delta, center } => {
                if (v - center[0]).abs() < *delta {
                    1.0
                } else {
                    0.0
                }
            }
            BlockKind::Sum { parts } => parts
                .iter()
                .map(|p| p.block.second_derivative_1d(v))
                .sum(),
            BlockKind::RangeResidual { .. } => {
                let h = 1e-6 * (1.0 + v.abs());
                (self.derivative_1d(v + h) - self.derivative_1d(v - h)) / (2.0 * h)
            }
        }
    }

    /// Analytic Lipschitz constant of the derivative of a 1-D block, when one exists.
    pub fn lipschitz_1d(&self) -> Option<f64> {
        if self.dim != 1 {
            return None;
        }
        match &self.kind {
            BlockKind::Zero => Some(0.0),
            BlockKind::Quadratic { q_mat, .. } => Some(2.0 * q_mat[(0, 0)].abs()),
            BlockKind::Polynomial1d { coefficients } => {
                let degree = coefficients.iter().rposition(|c| *c != 0.0).unwrap_or(0);
                match degree {
                    0 | 1 => Some(0.0),
                    2 => Some(2.0 * coefficients[2].abs()),
                    _ => None,
                }
            }
            BlockKind::Cosine1d { amplitude, .. } => Some(amplitude.abs()),
            BlockKind::NegativeSquare1d => Some(2.0),
            BlockKind::Huber { .. } => Some(1.0),
            BlockKind::Sum { parts } => parts
                .iter()
                .try_fold(0.0, |acc, p| p.block.lipschitz_1d().map(|l| acc + l)),
            BlockKind::RangeResidual { .. } => None,
        }
    }

    /// `(Q, q, constant)` with value `vᵀQv + qᵀv + constant` when the block is quadratic.
    pub fn as_quadratic(&self) -> Option<(Matrix, Vector, f64)> {
        let n = self.dim;
        match &self.kind {
            BlockKind::Zero => Some((Matrix::zeros(n, n), Vector::zeros(n), 0.0)),
            BlockKind::Quadratic { q_mat, q, constant } => Some((q_mat.clone(), q.clone(), *constant)),
            BlockKind::Polynomial1d { coefficients } => {
                if coefficients.iter().skip(3).any(|c| *c != 0.0) {
                    return None;
                }
                let c = |k: usize| coefficients.get(k).copied().unwrap_or(0.0);
                Some((
                    Matrix::from_element(1, 1, c(2)),
                    Vector::from_element(1, c(1)),
                    c(0),
                ))
            }
            BlockKind::NegativeSquare1d => {
                Some((Matrix::from_element(1, 1, -1.0), Vector::zeros(1), 0.0))
            }
            BlockKind::Sum { parts } => {
                let mut big_q = Matrix::zeros(n, n);
                let mut big_l = Vector::zeros(n);
                let mut constant = 0.0;
                for part in parts {
                    let (pq, pl, pc) = part.block.as_quadratic()?;
                    for (a, &ia) in part.indices.iter().enumerate() {
                        big_l[ia] += pl[a];
                        for (b, &ib) in part.indices.iter().enumerate() {
                            big_q[(ia, ib)] += pq[(a, b)];
                        }
                    }
                    constant += pc;
                }
                Some((big_q, big_l, constant))
            }
            _ => None,
        }
    }
}

fn gather(v: &[f64], indices: &[usize], buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(indices.iter().map(|&k| v[k]));
}

fn range_error(v: &[f64], pd: usize, term: &RangeTerm) -> f64 {
    match term {
        RangeTerm::Pair { i, j, d2 } => {
            let sq: f64 = (0..pd)
                .map(|k| {
                    let u = v[i * pd + k] - v[j * pd + k];
                    u * u
                })
                .sum();
            d2 - sq
        }
        RangeTerm::Anchor { i, anchor, d2 } => {
            let sq: f64 = (0..pd)
                .map(|k| {
                    let u = v[i * pd + k] - anchor[k];
                    u * u
                })
                .sum();
            d2 - sq
        }
    }
}
