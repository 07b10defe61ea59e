//! JSON problem specs: objective blocks, coupling data and feasible sets.

use std::path::Path;

use adlm_core::linalg::{Matrix, Vector};
use adlm_core::problem::{BlockKind, ConstraintFn, ConstraintSet, ObjectiveBlock, RangeTerm, SetForm, StructuredProblem, SumPart};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BlockSpec {
    #[serde(rename = "zero")]
    Zero { dim: usize },
    /// `vᵀQv + qᵀv + constant`.
    #[serde(rename = "quadratic")]
    Quadratic {
        #[serde(rename = "Q")]
        q_mat: Vec<Vec<f64>>,
        q: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
    #[serde(rename = "polynomial-1d")]
    Polynomial1d { coefficients: Vec<f64> },
    #[serde(rename = "cosine-1d")]
    Cosine1d {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    #[serde(rename = "negative-square-1d")]
    NegativeSquare1d,
    #[serde(rename = "huber")]
    Huber { delta: f64, center: Vec<f64> },
    #[serde(rename = "range-residual")]
    RangeResidual {
        dim: usize,
        point_dim: usize,
        terms: Vec<TermSpec>,
    },
    #[serde(rename = "sum")]
    Sum { dim: usize, parts: Vec<PartSpec> },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TermSpec {
    Pair { i: usize, j: usize, d2: f64 },
    Anchor { i: usize, anchor: Vec<f64>, d2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub block: BlockSpec,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SetSpec {
    #[serde(rename = "whole-space")]
    WholeSpace { dim: usize },
    #[serde(rename = "box")]
    Box { lower: Vec<f64>, upper: Vec<f64> },
    #[serde(rename = "ball")]
    Ball { center: Vec<f64>, radius: f64 },
    #[serde(rename = "interval-union-1d")]
    IntervalUnion { intervals: Vec<(f64, f64)> },
    /// Equalities `ψ(v) = 0` and inequalities `φ(v) ≤ 0`.
    #[serde(rename = "functional")]
    Functional {
        dim: usize,
        #[serde(default)]
        equalities: Vec<ConstraintSpec>,
        #[serde(default)]
        inequalities: Vec<ConstraintSpec>,
    },
    #[serde(rename = "product")]
    Product { parts: Vec<SetSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConstraintSpec {
    /// `aᵀv - b`.
    Affine { a: Vec<f64>, b: f64 },
    /// `vᵀPv + pᵀv + r`.
    Quadratic {
        #[serde(rename = "P")]
        p_mat: Vec<Vec<f64>>,
        p: Vec<f64>,
        r: f64,
    },
}

/// Dense row-major rows, or `"identity"` / `"neg-identity"` sized by `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Named(String),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub f: BlockSpec,
    pub g: BlockSpec,
    #[serde(rename = "A")]
    pub a: MatrixSpec,
    #[serde(rename = "B")]
    pub b: MatrixSpec,
    pub c: Vec<f64>,
    #[serde(rename = "X")]
    pub x_set: SetSpec,
    #[serde(rename = "Z")]
    pub z_set: SetSpec,
    /// Starting point; zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<f64>>,
}

/// A field-path error before the file name is known.
type FieldResult<T> = std::result::Result<T, (String, String)>;

fn at<T>(field: &str, r: adlm_core::Result<T>) -> FieldResult<T> {
    r.map_err(|e| (field.to_string(), e.to_string()))
}

fn dense(field: &str, rows: &[Vec<f64>]) -> FieldResult<Matrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(k) = rows.iter().position(|r| r.len() != ncols) {
        return Err((format!("{field}[{k}]"), format!("expected {ncols} entries in every row")));
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl BlockSpec {
    fn build(&self, field: &str) -> FieldResult<ObjectiveBlock> {
        match self {
            Self::Zero { dim } => at(field, ObjectiveBlock::zero(*dim)),
            Self::Quadratic { q_mat, q, constant } => {
                let m = dense(&format!("{field}.Q"), q_mat)?;
                at(field, ObjectiveBlock::quadratic(m, Vector::from_column_slice(q), *constant))
            }
            Self::Polynomial1d { coefficients } => at(field, ObjectiveBlock::polynomial(coefficients.clone())),
            Self::Cosine1d { amplitude, phase } => Ok(ObjectiveBlock::cosine(*amplitude, *phase)),
            Self::NegativeSquare1d => Ok(ObjectiveBlock::negative_square()),
            Self::Huber { delta, center } => at(field, ObjectiveBlock::huber(*delta, Vector::from_column_slice(center))),
            Self::RangeResidual { dim, point_dim, terms } => {
                let terms = terms
                    .iter()
                    .map(|t| match t {
                        TermSpec::Pair { i, j, d2 } => RangeTerm::Pair { i: *i, j: *j, d2: *d2 },
                        TermSpec::Anchor { i, anchor, d2 } => RangeTerm::Anchor { i: *i, anchor: anchor.clone(), d2: *d2 },
                    })
                    .collect();
                at(field, ObjectiveBlock::range_residual(*dim, *point_dim, terms))
            }
            Self::Sum { dim, parts } => {
                let parts = parts
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        Ok(SumPart {
                            block: p.block.build(&format!("{field}.parts[{k}].block"))?,
                            indices: p.indices.clone(),
                        })
                    })
                    .collect::<FieldResult<Vec<_>>>()?;
                at(field, ObjectiveBlock::sum(*dim, parts))
            }
        }
    }

    pub fn from_block(block: &ObjectiveBlock) -> Self {
        match block.kind() {
            BlockKind::Zero => Self::Zero { dim: block.dim() },
            BlockKind::Quadratic { q_mat, q, constant } => Self::Quadratic {
                q_mat: rows_of(q_mat),
                q: q.iter().copied().collect(),
                constant: *constant,
            },
            BlockKind::Polynomial1d { coefficients } => Self::Polynomial1d { coefficients: coefficients.clone() },
            BlockKind::Cosine1d { amplitude, phase } => Self::Cosine1d { amplitude: *amplitude, phase: *phase },
            BlockKind::NegativeSquare1d => Self::NegativeSquare1d,
            BlockKind::Huber { delta, center } => Self::Huber {
                delta: *delta,
                center: center.iter().copied().collect(),
            },
            BlockKind::RangeResidual { point_dim, terms } => Self::RangeResidual {
                dim: block.dim(),
                point_dim: *point_dim,
                terms: terms
                    .iter()
                    .map(|t| match t {
                        RangeTerm::Pair { i, j, d2 } => TermSpec::Pair { i: *i, j: *j, d2: *d2 },
                        RangeTerm::Anchor { i, anchor, d2 } => TermSpec::Anchor { i: *i, anchor: anchor.clone(), d2: *d2 },
                    })
                    .collect(),
            },
            BlockKind::Sum { parts } => Self::Sum {
                dim: block.dim(),
                parts: parts
                    .iter()
                    .map(|p| PartSpec {
                        block: Self::from_block(&p.block),
                        indices: p.indices.clone(),
                    })
                    .collect(),
            },
        }
    }
}

impl ConstraintSpec {
    fn build(&self, field: &str) -> FieldResult<ConstraintFn> {
        Ok(match self {
            Self::Affine { a, b } => ConstraintFn::Affine { a: Vector::from_column_slice(a), b: *b },
            Self::Quadratic { p_mat, p, r } => ConstraintFn::Quadratic {
                p_mat: dense(&format!("{field}.P"), p_mat)?,
                p: Vector::from_column_slice(p),
                r: *r,
            },
        })
    }

    fn from_fn(c: &ConstraintFn) -> Self {
        match c {
            ConstraintFn::Affine { a, b } => Self::Affine { a: a.iter().copied().collect(), b: *b },
            ConstraintFn::Quadratic { p_mat, p, r } => Self::Quadratic {
                p_mat: rows_of(p_mat),
                p: p.iter().copied().collect(),
                r: *r,
            },
        }
    }
}

impl SetSpec {
    fn build(&self, field: &str) -> FieldResult<ConstraintSet> {
        match self {
            Self::WholeSpace { dim } => at(field, ConstraintSet::whole_space(*dim)),
            Self::Box { lower, upper } => at(
                field,
                ConstraintSet::boxed(Vector::from_column_slice(lower), Vector::from_column_slice(upper)),
            ),
            Self::Ball { center, radius } => at(field, ConstraintSet::ball(Vector::from_column_slice(center), *radius)),
            Self::IntervalUnion { intervals } => at(field, ConstraintSet::interval_union(intervals.clone())),
            Self::Functional { dim, equalities, inequalities } => {
                let build_all = |name: &str, list: &[ConstraintSpec]| {
                    list.iter()
                        .enumerate()
                        .map(|(k, c)| c.build(&format!("{field}.{name}[{k}]")))
                        .collect::<FieldResult<Vec<_>>>()
                };
                let eq = build_all("equalities", equalities)?;
                let ineq = build_all("inequalities", inequalities)?;
                at(field, ConstraintSet::functional(*dim, eq, ineq))
            }
            Self::Product { parts } => {
                let parts = parts
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p.build(&format!("{field}.parts[{k}]")))
                    .collect::<FieldResult<Vec<_>>>()?;
                at(field, ConstraintSet::product(parts))
            }
        }
    }

    pub fn from_set(set: &ConstraintSet) -> Self {
        match set.form() {
            SetForm::WholeSpace => Self::WholeSpace { dim: set.dim() },
            SetForm::Box { lower, upper } => Self::Box {
                lower: lower.iter().copied().collect(),
                upper: upper.iter().copied().collect(),
            },
            SetForm::Ball { center, radius } => Self::Ball {
                center: center.iter().copied().collect(),
                radius: *radius,
            },
            SetForm::IntervalUnion { intervals } => Self::IntervalUnion { intervals: intervals.clone() },
            SetForm::Functional(fs) => Self::Functional {
                dim: set.dim(),
                equalities: fs.equalities.iter().map(ConstraintSpec::from_fn).collect(),
                inequalities: fs.inequalities.iter().map(ConstraintSpec::from_fn).collect(),
            },
            SetForm::Product(parts) => Self::Product { parts: parts.iter().map(Self::from_set).collect() },
        }
    }
}

impl MatrixSpec {
    fn build(&self, field: &str, rows: usize) -> FieldResult<Matrix> {
        match self {
            Self::Named(name) if name == "identity" => Ok(Matrix::identity(rows, rows)),
            Self::Named(name) if name == "neg-identity" => Ok(-Matrix::identity(rows, rows)),
            Self::Named(name) => Err((field.to_string(), format!("unknown matrix name {name:?}"))),
            Self::Rows(r) => dense(field, r),
        }
    }

    fn from_matrix(m: &Matrix) -> Self {
        if m.is_square() && *m == Matrix::identity(m.nrows(), m.ncols()) {
            Self::Named("identity".into())
        } else if m.is_square() && *m == -Matrix::identity(m.nrows(), m.ncols()) {
            Self::Named("neg-identity".into())
        } else {
            Self::Rows(rows_of(m))
        }
    }
}

/// A problem with its starting point.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: StructuredProblem,
    pub x0: Option<Vector>,
    pub z0: Vector,
    pub y0: Vector,
}

impl ProblemSpec {
    pub fn from_problem(p: &StructuredProblem) -> Self {
        Self {
            f: BlockSpec::from_block(p.f()),
            g: BlockSpec::from_block(p.g()),
            a: MatrixSpec::from_matrix(p.a()),
            b: MatrixSpec::from_matrix(p.b()),
            c: p.c().iter().copied().collect(),
            x_set: SetSpec::from_set(p.x_set()),
            z_set: SetSpec::from_set(p.z_set()),
            x0: None,
            z0: None,
            y0: None,
        }
    }

    fn build_fields(&self) -> FieldResult<LoadedProblem> {
        let q = self.c.len();
        let problem = at(
            "problem",
            StructuredProblem::new(
                self.f.build("f")?,
                self.g.build("g")?,
                self.a.build("A", q)?,
                self.b.build("B", q)?,
                Vector::from_column_slice(&self.c),
                self.x_set.build("X")?,
                self.z_set.build("Z")?,
            ),
        )?;
        let start = |field: &str, v: &Option<Vec<f64>>, dim: usize| -> FieldResult<Option<Vector>> {
            match v {
                Some(v) if v.len() != dim => Err((field.to_string(), format!("expected {dim} entries, found {}", v.len()))),
                Some(v) => Ok(Some(Vector::from_column_slice(v))),
                None => Ok(None),
            }
        };
        let x0 = start("x0", &self.x0, problem.x_dim())?;
        let z0 = start("z0", &self.z0, problem.z_dim())?.unwrap_or_else(|| Vector::zeros(problem.z_dim()));
        let y0 = start("y0", &self.y0, q)?.unwrap_or_else(|| Vector::zeros(q));
        Ok(LoadedProblem { problem, x0, z0, y0 })
    }

    pub fn build(&self, path: &Path) -> Result<LoadedProblem> {
        self.build_fields().map_err(|(field, msg)| Error::spec(path, field, msg))
    }
}

pub fn read_problem(path: &Path) -> Result<LoadedProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: ProblemSpec = serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })?;
    spec.build(path)
}

pub fn write_problem(path: &Path, spec: &ProblemSpec) -> Result<()> {
    let text = serde_json::to_string_pretty(spec).map_err(|source| Error::Json { path: path.into(), source })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
