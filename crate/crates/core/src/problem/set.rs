//! Feasible sets: special forms with projections, and functional descriptions.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{dist, dot, symmetrize, Matrix, Vector};

/// A smooth constraint function.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintFn {
    /// `aᵀv - b`.
    Affine { a: Vector, b: f64 },
    /// `vᵀPv + pᵀv + r`, `P` symmetric.
    Quadratic { p_mat: Matrix, p: Vector, r: f64 },
}

impl ConstraintFn {
    pub fn dim(&self) -> usize {
        match self {
            Self::Affine { a, .. } => a.len(),
            Self::Quadratic { p, .. } => p.len(),
        }
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        match self {
            Self::Affine { a, b } => dot(a.as_slice(), v) - b,
            Self::Quadratic { p_mat, p, r } => {
                let x = Vector::from_column_slice(v);
                x.dot(&(p_mat * &x)) + p.dot(&x) + r
            }
        }
    }

    pub fn gradient(&self, v: &[f64]) -> Vector {
        match self {
            Self::Affine { a, .. } => a.clone(),
            Self::Quadratic { p_mat, p, .. } => p_mat * Vector::from_column_slice(v) * 2.0 + p,
        }
    }

    fn is_convex(&self) -> bool {
        match self {
            Self::Affine { .. } => true,
            Self::Quadratic { p_mat, .. } => {
                p_mat.is_empty()
                    || p_mat
                        .clone()
                        .symmetric_eigen()
                        .eigenvalues
                        .iter()
                        .all(|e| *e >= -1e-12)
            }
        }
    }

    /// Embeds a constraint on coordinates `offset..offset+dim` into dimension `total`.
    fn embed(&self, offset: usize, total: usize) -> Self {
        let n = self.dim();
        match self {
            Self::Affine { a, b } => {
                let mut big = Vector::zeros(total);
                big.rows_mut(offset, n).copy_from(a);
                Self::Affine { a: big, b: *b }
            }
            Self::Quadratic { p_mat, p, r } => {
                let mut big_p = Matrix::zeros(total, total);
                big_p.view_mut((offset, offset), (n, n)).copy_from(p_mat);
                let mut big = Vector::zeros(total);
                big.rows_mut(offset, n).copy_from(p);
                Self::Quadratic {
                    p_mat: big_p,
                    p: big,
                    r: *r,
                }
            }
        }
    }
}

/// Equality constraints `ψ(v) = 0` and inequality constraints `φ(v) ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSet {
    pub equalities: Vec<ConstraintFn>,
    pub inequalities: Vec<ConstraintFn>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetForm {
    WholeSpace,
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    /// Sorted, disjoint, closed intervals on the real line.
    IntervalUnion { intervals: Vec<(f64, f64)> },
    Functional(FunctionalSet),
    /// Cartesian product of sets on consecutive coordinate ranges.
    Product(Vec<ConstraintSet>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    form: SetForm,
    dim: usize,
}

impl ConstraintSet {
    pub fn whole_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid!("set dimension must be positive"));
        }
        Ok(Self {
            form: SetForm::WholeSpace,
            dim,
        })
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim("box bounds", lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(invalid!("set dimension must be positive"));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(invalid!("box requires lower <= upper componentwise"));
        }
        Ok(Self {
            dim: lower.len(),
            form: SetForm::Box { lower, upper },
        })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid!("set dimension must be positive"));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(invalid!("ball radius must be finite and nonnegative"));
        }
        Ok(Self {
            dim: center.len(),
            form: SetForm::Ball { center, radius },
        })
    }

    pub fn interval_union(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(invalid!("interval union needs at least one interval"));
        }
        for (k, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(invalid!("interval {k} must be finite with lower <= upper"));
            }
            if k > 0 && !(intervals[k - 1].1 < lo) {
                return Err(invalid!("intervals must be sorted and disjoint"));
            }
        }
        Ok(Self {
            form: SetForm::IntervalUnion { intervals },
            dim: 1,
        })
    }

    pub fn functional(dim: usize, equalities: Vec<ConstraintFn>, inequalities: Vec<ConstraintFn>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid!("set dimension must be positive"));
        }
        let mut symmetric = Vec::with_capacity(equalities.len() + inequalities.len());
        for c in equalities.iter().chain(inequalities.iter()) {
            check_dim("constraint function", dim, c.dim())?;
            symmetric.push(match c {
                ConstraintFn::Quadratic { p_mat, p, r } => {
                    check_dim("constraint matrix", dim, p_mat.nrows())?;
                    check_dim("constraint matrix", dim, p_mat.ncols())?;
                    ConstraintFn::Quadratic {
                        p_mat: symmetrize(p_mat),
                        p: p.clone(),
                        r: *r,
                    }
                }
                other => other.clone(),
            });
        }
        let inequalities = symmetric.split_off(equalities.len());
        Ok(Self {
            form: SetForm::Functional(FunctionalSet {
                equalities: symmetric,
                inequalities,
            }),
            dim,
        })
    }

    pub fn product(parts: Vec<ConstraintSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid!("product needs at least one factor"));
        }
        Ok(Self {
            dim: parts.iter().map(|p| p.dim).sum(),
            form: SetForm::Product(parts),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &SetForm {
        &self.form
    }

    pub fn is_whole_space(&self) -> bool {
        match &self.form {
            SetForm::WholeSpace => true,
            SetForm::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .all(|(l, u)| *l == f64::NEG_INFINITY && *u == f64::INFINITY),
            SetForm::Functional(fs) => fs.equalities.is_empty() && fs.inequalities.is_empty(),
            SetForm::Product(parts) => parts.iter().all(|p| p.is_whole_space()),
            _ => false,
        }
    }

    /// `(q_eq, q_ineq)` counts of the functional description.
    pub fn counts(&self) -> (usize, usize) {
        match &self.form {
            SetForm::Functional(fs) => (fs.equalities.len(), fs.inequalities.len()),
            SetForm::Product(parts) => parts.iter().fold((0, 0), |(e, i), p| {
                let (pe, pi) = p.counts();
                (e + pe, i + pi)
            }),
            SetForm::WholeSpace => (0, 0),
            SetForm::Box { lower, upper } => (
                0,
                lower.iter().filter(|l| l.is_finite()).count() + upper.iter().filter(|u| u.is_finite()).count(),
            ),
            SetForm::Ball { .. } => (0, 1),
            SetForm::IntervalUnion { .. } => (0, 2),
        }
    }

    /// Maximum constraint violation (0 inside the set).
    pub fn violation(&self, v: &[f64]) -> f64 {
        match &self.form {
            SetForm::WholeSpace => 0.0,
            SetForm::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(x, (l, u))| (l - x).max(x - u).max(0.0))
                .fold(0.0, f64::max),
            SetForm::Ball { center, radius } => (dist(v, center.as_slice()) - radius).max(0.0),
            SetForm::IntervalUnion { intervals } => intervals
                .iter()
                .map(|&(lo, hi)| (lo - v[0]).max(v[0] - hi).max(0.0))
                .fold(f64::INFINITY, f64::min),
            SetForm::Functional(fs) => {
                let eq = fs.equalities.iter().map(|c| c.value(v).abs());
                let ineq = fs.inequalities.iter().map(|c| c.value(v).max(0.0));
                eq.chain(ineq).fold(0.0, f64::max)
            }
            SetForm::Product(parts) => {
                let mut offset = 0;
                let mut worst: f64 = 0.0;
                for p in parts {
                    worst = worst.max(p.violation(&v[offset..offset + p.dim]));
                    offset += p.dim;
                }
                worst
            }
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.violation(v) <= tol
    }

    /// Euclidean projection onto a special-form set.
    ///
    /// Interval unions project to the nearest interval; ties go to the
    /// interval with the smaller left endpoint.
    pub fn project(&self, v: &[f64]) -> Result<Vector> {
        check_dim("projection point", self.dim, v.len())?;
        let mut out = Vector::from_column_slice(v);
        self.project_into(out.as_mut_slice())?;
        Ok(out)
    }

    pub(crate) fn project_into(&self, v: &mut [f64]) -> Result<()> {
        match &self.form {
            SetForm::WholeSpace => {}
            SetForm::Box { lower, upper } => {
                for (k, x) in v.iter_mut().enumerate() {
                    *x = x.max(lower[k]).min(upper[k]);
                }
            }
            SetForm::Ball { center, radius } => {
                let d = dist(v, center.as_slice());
                if d > *radius {
                    let scale = radius / d;
                    for (k, x) in v.iter_mut().enumerate() {
                        *x = center[k] + (*x - center[k]) * scale;
                    }
                }
            }
            SetForm::IntervalUnion { intervals } => {
                let x = v[0];
                let mut best = x;
                let mut best_dist = f64::INFINITY;
                for &(lo, hi) in intervals {
                    let p = x.max(lo).min(hi);
                    let d = (p - x).abs();
                    if d < best_dist {
                        best_dist = d;
                        best = p;
                    }
                }
                v[0] = best;
            }
            SetForm::Functional(_) => {
                return Err(Error::Unsupported(
                    "projection onto a functional set".to_string(),
                ))
            }
            SetForm::Product(parts) => {
                let mut offset = 0;
                for p in parts {
                    p.project_into(&mut v[offset..offset + p.dim])?;
                    offset += p.dim;
                }
            }
        }
        Ok(())
    }

    /// Whether `project` is available for this set.
    pub fn is_projectable(&self) -> bool {
        match &self.form {
            SetForm::Functional(_) => false,
            SetForm::Product(parts) => parts.iter().all(|p| p.is_projectable()),
            _ => true,
        }
    }

    /// Bounding box of a bounded special-form set.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.form {
            SetForm::Box { lower, upper } => {
                if lower.iter().chain(upper.iter()).all(|b| b.is_finite()) {
                    Some((lower.iter().copied().collect(), upper.iter().copied().collect()))
                } else {
                    None
                }
            }
            SetForm::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            SetForm::IntervalUnion { intervals } => {
                Some((alloc::vec![intervals[0].0], alloc::vec![intervals[intervals.len() - 1].1]))
            }
            SetForm::Product(parts) => {
                let mut lo = Vec::with_capacity(self.dim);
                let mut hi = Vec::with_capacity(self.dim);
                for p in parts {
                    let (pl, ph) = p.bounding_box()?;
                    lo.extend(pl);
                    hi.extend(ph);
                }
                Some((lo, hi))
            }
            SetForm::WholeSpace | SetForm::Functional(_) => None,
        }
    }

    /// Convexity recognized from the set form; `false` means "not recognized as convex".
    pub fn is_convex(&self) -> bool {
        match &self.form {
            SetForm::WholeSpace | SetForm::Box { .. } | SetForm::Ball { .. } => true,
            SetForm::IntervalUnion { intervals } => intervals.len() == 1,
            SetForm::Functional(fs) => {
                fs.equalities
                    .iter()
                    .all(|c| matches!(c, ConstraintFn::Affine { .. }))
                    && fs.inequalities.iter().all(|c| c.is_convex())
            }
            SetForm::Product(parts) => parts.iter().all(|p| p.is_convex()),
        }
    }

    /// `Some(true)` for compact special forms, `None` when undecided.
    pub fn is_compact(&self) -> Option<bool> {
        match &self.form {
            SetForm::WholeSpace => Some(false),
            SetForm::Box { .. } => Some(self.bounding_box().is_some()),
            SetForm::Ball { .. } | SetForm::IntervalUnion { .. } => Some(true),
            SetForm::Functional(fs) => {
                if fs.equalities.is_empty() && fs.inequalities.is_empty() {
                    Some(false)
                } else {
                    None
                }
            }
            SetForm::Product(parts) => parts.iter().try_fold(true, |acc, p| p.is_compact().map(|c| acc && c)),
        }
    }

    /// Local functional description valid near `v`.
    ///
    /// Interval unions are described by the two bounds of the interval
    /// containing (or nearest to) `v`; infinite box bounds contribute nothing.
    pub fn local_functional(&self, v: &[f64]) -> (Vec<ConstraintFn>, Vec<ConstraintFn>) {
        let n = self.dim;
        let unit = |k: usize, s: f64| {
            let mut a = Vector::zeros(n);
            a[k] = s;
            a
        };
        match &self.form {
            SetForm::WholeSpace => (Vec::new(), Vec::new()),
            SetForm::Box { lower, upper } => {
                let mut ineq = Vec::new();
                for k in 0..n {
                    if lower[k].is_finite() {
                        ineq.push(ConstraintFn::Affine { a: unit(k, -1.0), b: -lower[k] });
                    }
                    if upper[k].is_finite() {
                        ineq.push(ConstraintFn::Affine { a: unit(k, 1.0), b: upper[k] });
                    }
                }
                (Vec::new(), ineq)
            }
            SetForm::Ball { center, radius } => (
                Vec::new(),
                alloc::vec![ConstraintFn::Quadratic {
                    p_mat: Matrix::identity(n, n),
                    p: center * -2.0,
                    r: center.norm_squared() - radius * radius,
                }],
            ),
            SetForm::IntervalUnion { intervals } => {
                let (lo, hi) = intervals
                    .iter()
                    .copied()
                    .min_by(|a, b| {
                        let da = (a.0 - v[0]).max(v[0] - a.1).max(0.0);
                        let db = (b.0 - v[0]).max(v[0] - b.1).max(0.0);
                        da.total_cmp(&db)
                    })
                    .expect("nonempty union");
                (
                    Vec::new(),
                    alloc::vec![
                        ConstraintFn::Affine { a: unit(0, -1.0), b: -lo },
                        ConstraintFn::Affine { a: unit(0, 1.0), b: hi },
                    ],
                )
            }
            SetForm::Functional(fs) => (fs.equalities.clone(), fs.inequalities.clone()),
            SetForm::Product(parts) => {
                let mut eq = Vec::new();
                let mut ineq = Vec::new();
                let mut offset = 0;
                for p in parts {
                    let (pe, pi) = p.local_functional(&v[offset..offset + p.dim]);
                    eq.extend(pe.iter().map(|c| c.embed(offset, n)));
                    ineq.extend(pi.iter().map(|c| c.embed(offset, n)));
                    offset += p.dim;
                }
                (eq, ineq)
            }
        }
    }

    /// Pieces of a one-dimensional special-form set as closed intervals.
    pub(crate) fn pieces_1d(&self) -> Option<Vec<(f64, f64)>> {
        if self.dim != 1 {
            return None;
        }
        match &self.form {
            SetForm::WholeSpace => Some(alloc::vec![(f64::NEG_INFINITY, f64::INFINITY)]),
            SetForm::Box { lower, upper } => Some(alloc::vec![(lower[0], upper[0])]),
            SetForm::Ball { center, radius } => Some(alloc::vec![(center[0] - radius, center[0] + radius)]),
            SetForm::IntervalUnion { intervals } => Some(intervals.clone()),
            SetForm::Product(parts) => parts[0].pieces_1d(),
            SetForm::Functional(_) => None,
        }
    }
}
