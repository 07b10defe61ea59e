//! Small reference instances with known structure.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{Matrix, Vector};
use crate::problem::{ConstraintSet, ObjectiveBlock, RangeTerm, StructuredProblem, SumPart};

fn whole(dim: usize) -> ConstraintSet {
    ConstraintSet::whole_space(dim).expect("positive dimension")
}

/// `min f(x) + g(z)  s.t.  x - z = 0` over the real line.
pub fn scalar_consensus(f: ObjectiveBlock, g: ObjectiveBlock) -> StructuredProblem {
    StructuredProblem::new(
        f,
        g,
        Matrix::from_element(1, 1, 1.0),
        Matrix::from_element(1, 1, -1.0),
        Vector::zeros(1),
        whole(1),
        whole(1),
    )
    .expect("consistent shapes")
}

/// `min (x-1)² + (z-2)²  s.t.  x - z = 0`; KKT point `x = z = 1.5`, `y = -1`.
pub fn quadratic_consensus() -> StructuredProblem {
    scalar_consensus(
        ObjectiveBlock::polynomial(vec![1.0, -2.0, 1.0]).expect("valid"),
        ObjectiveBlock::polynomial(vec![4.0, -4.0, 1.0]).expect("valid"),
    )
}

/// `min x² + z²  s.t.  -2x + z = 0.1,  x ∈ [-1,0] ∪ [1,2],  z ∈ [0,3]`.
///
/// The nonconvex `x`-set breaks the feasibility guarantee of the penalty method.
pub fn interval_union_counterexample() -> StructuredProblem {
    StructuredProblem::new(
        ObjectiveBlock::square(),
        ObjectiveBlock::square(),
        Matrix::from_element(1, 1, -2.0),
        Matrix::from_element(1, 1, 1.0),
        Vector::from_element(1, 0.1),
        ConstraintSet::interval_union(vec![(-1.0, 0.0), (1.0, 2.0)]).expect("valid"),
        ConstraintSet::boxed(Vector::zeros(1), Vector::from_element(1, 3.0)).expect("valid"),
    )
    .expect("consistent shapes")
}

/// Huber centers spread deterministically over `[-1, 1]`.
pub fn huber_centers(agents: usize, dim: usize) -> Vec<f64> {
    (0..agents * dim)
        .map(|k| libm::sin(1.7 * (k / dim + 1) as f64 + 0.9 * (k % dim) as f64))
        .collect()
}

/// Stacked selection `E = [I; I; ...; I]` with `agents` identity blocks of size `dim`.
pub fn consensus_selection(agents: usize, dim: usize) -> Matrix {
    let mut e = Matrix::zeros(agents * dim, dim);
    for a in 0..agents {
        e.view_mut((a * dim, 0), (dim, dim)).fill_with_identity();
    }
    e
}

/// Consensus `x_i = z` of `agents` local copies with huber objectives on each copy.
///
/// `f(x) = Σ_i huber_δ(x_i - c_i)`, `g = 0`, `A = I`, `B = -E`, `c = 0`.
pub fn huber_consensus(agents: usize, dim: usize, delta: f64) -> StructuredProblem {
    let n = agents * dim;
    let centers = Vector::from_vec(huber_centers(agents, dim));
    StructuredProblem::new(
        ObjectiveBlock::huber(delta, centers).expect("positive delta"),
        ObjectiveBlock::zero(dim).expect("positive dimension"),
        Matrix::identity(n, n),
        -consensus_selection(agents, dim),
        Vector::zeros(n),
        whole(n),
        whole(dim),
    )
    .expect("consistent shapes")
}

/// Box-constrained instance with an indefinite quadratic `f`.
///
/// `f(x) = x₁² - x₂² + 0.5x₁ - 0.2x₂`, `g(z) = ‖z - (0.3, -0.2)‖²`,
/// `x - Mz = c` with `M` upper triangular, `x, z ∈ [-1, 1]²`.
pub fn box_constrained_indefinite() -> StructuredProblem {
    let f = ObjectiveBlock::quadratic(
        Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        Vector::from_column_slice(&[0.5, -0.2]),
        0.0,
    )
    .expect("valid");
    let g = ObjectiveBlock::quadratic(
        Matrix::identity(2, 2),
        Vector::from_column_slice(&[-0.6, 0.4]),
        0.13,
    )
    .expect("valid");
    let unit_box = || ConstraintSet::boxed(Vector::from_element(2, -1.0), Vector::from_element(2, 1.0)).expect("valid");
    StructuredProblem::new(
        f,
        g,
        Matrix::identity(2, 2),
        Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -1.0]),
        Vector::from_column_slice(&[0.1, 0.2]),
        unit_box(),
        unit_box(),
    )
    .expect("consistent shapes")
}

/// One representative block of every builtin kind, labeled by kind.
pub fn block_catalog() -> Vec<(&'static str, ObjectiveBlock)> {
    let ok = |b: crate::Result<ObjectiveBlock>| b.expect("valid catalog block");
    let q_mat = Matrix::from_row_slice(3, 3, &[2.0, 0.5, -1.0, 0.5, 1.0, 0.3, -1.0, 0.3, -0.5]);
    let range = ok(ObjectiveBlock::range_residual(
        6,
        2,
        vec![
            RangeTerm::Pair { i: 0, j: 1, d2: 0.5 },
            RangeTerm::Pair { i: 1, j: 2, d2: 0.2 },
            RangeTerm::Anchor { i: 2, anchor: vec![1.0, 0.0], d2: 0.3 },
        ],
    ));
    let sum = ok(ObjectiveBlock::sum(
        4,
        vec![
            SumPart { block: ObjectiveBlock::cosine(1.5, 0.3), indices: vec![2] },
            SumPart { block: ok(ObjectiveBlock::huber(0.5, Vector::from_column_slice(&[0.2, -0.1]))), indices: vec![0, 3] },
            SumPart { block: ObjectiveBlock::negative_square(), indices: vec![1] },
        ],
    ));
    vec![
        ("zero", ok(ObjectiveBlock::zero(2))),
        ("quadratic", ok(ObjectiveBlock::quadratic(q_mat, Vector::from_column_slice(&[1.0, -2.0, 0.5]), 0.7))),
        ("polynomial-1d", ok(ObjectiveBlock::polynomial(vec![0.5, -1.0, 0.25, 0.1, -0.02]))),
        ("cosine-1d", ObjectiveBlock::cosine(2.0, 0.4)),
        ("negative-square-1d", ObjectiveBlock::negative_square()),
        ("huber", ok(ObjectiveBlock::huber(0.3, Vector::from_column_slice(&[0.5, -0.5, 1.0])))),
        ("range-residual", range),
        ("sum", sum),
    ]
}

pub(crate) fn stacked_objective(f: &ObjectiveBlock, g: &ObjectiveBlock) -> ObjectiveBlock {
    let (p1, p2) = (f.dim(), g.dim());
    ObjectiveBlock::sum(
        p1 + p2,
        vec![
            SumPart { block: f.clone(), indices: (0..p1).collect() },
            SumPart { block: g.clone(), indices: (p1..p1 + p2).collect() },
        ],
    )
    .expect("consistent shapes")
}
