//! Structured problems `min f(x) + g(z)  s.t.  Ax + Bz = c, x ∈ X, z ∈ Z`.

mod assumptions;
mod block;
mod fon;
mod set;

pub use assumptions::{AssumptionReport, Check, CheckMethod, CheckOutcome, Profile, SamplingBox};
pub use block::{BlockKind, ObjectiveBlock, RangeTerm, SumPart};
pub use fon::{FonCertificate, Multipliers};
pub use set::{ConstraintFn, ConstraintSet, FunctionalSet, SetForm};

use crate::error::{check_dim, invalid, Result};
use crate::linalg::{Matrix, Vector};

/// Which variable block an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockId {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredProblem {
    f: ObjectiveBlock,
    g: ObjectiveBlock,
    a: Matrix,
    b: Matrix,
    c: Vector,
    x_set: ConstraintSet,
    z_set: ConstraintSet,
}

/// Primal iterates with multiplier and penalty parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    pub x: Vector,
    pub z: Vector,
    pub y: Vector,
    pub rho: f64,
}

impl PrimalDualPoint {
    pub fn new(x: Vector, z: Vector, y: Vector, rho: f64) -> Self {
        Self { x, z, y, rho }
    }
}

impl StructuredProblem {
    /// Validates shapes only; feasibility is not asserted.
    pub fn new(
        f: ObjectiveBlock,
        g: ObjectiveBlock,
        a: Matrix,
        b: Matrix,
        c: Vector,
        x_set: ConstraintSet,
        z_set: ConstraintSet,
    ) -> Result<Self> {
        let q = c.len();
        if q == 0 {
            return Err(invalid!("coupling needs at least one row"));
        }
        check_dim("A rows", q, a.nrows())?;
        check_dim("B rows", q, b.nrows())?;
        check_dim("A cols", f.dim(), a.ncols())?;
        check_dim("B cols", g.dim(), b.ncols())?;
        check_dim("X dimension", f.dim(), x_set.dim())?;
        check_dim("Z dimension", g.dim(), z_set.dim())?;
        if a.iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(invalid!("coupling data must be finite"));
        }
        Ok(Self {
            f,
            g,
            a,
            b,
            c,
            x_set,
            z_set,
        })
    }

    pub fn f(&self) -> &ObjectiveBlock {
        &self.f
    }
    pub fn g(&self) -> &ObjectiveBlock {
        &self.g
    }
    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Vector {
        &self.c
    }
    pub fn x_set(&self) -> &ConstraintSet {
        &self.x_set
    }
    pub fn z_set(&self) -> &ConstraintSet {
        &self.z_set
    }
    pub fn x_dim(&self) -> usize {
        self.f.dim()
    }
    pub fn z_dim(&self) -> usize {
        self.g.dim()
    }
    pub fn coupling_dim(&self) -> usize {
        self.c.len()
    }

    fn check_xz(&self, x: &Vector, z: &Vector) -> Result<()> {
        check_dim("x", self.x_dim(), x.len())?;
        check_dim("z", self.z_dim(), z.len())
    }

    fn check_point(&self, pt: &PrimalDualPoint) -> Result<()> {
        self.check_xz(&pt.x, &pt.z)?;
        check_dim("y", self.coupling_dim(), pt.y.len())?;
        if !(pt.rho > 0.0) {
            return Err(invalid!("penalty parameter must be positive, got {}", pt.rho));
        }
        Ok(())
    }

    /// `Ax + Bz - c` without dimension checks.
    pub(crate) fn residual_unchecked(&self, x: &Vector, z: &Vector) -> Vector {
        &self.a * x + &self.b * z - &self.c
    }

    /// `Ax + Bz - c`.
    pub fn coupling_residual(&self, x: &Vector, z: &Vector) -> Result<Vector> {
        self.check_xz(x, z)?;
        Ok(self.residual_unchecked(x, z))
    }

    /// `f(x) + g(z)`.
    pub fn objective(&self, x: &Vector, z: &Vector) -> Result<f64> {
        self.check_xz(x, z)?;
        Ok(self.f.value(x.as_slice()) + self.g.value(z.as_slice()))
    }

    /// `‖Ax + Bz - c‖`.
    pub fn primal_residual(&self, x: &Vector, z: &Vector) -> Result<f64> {
        Ok(self.coupling_residual(x, z)?.norm())
    }

    /// `f(x) + g(z) + yᵀr + (ρ/2)‖r‖²` with `r = Ax + Bz - c`.
    pub fn augmented_lagrangian(&self, pt: &PrimalDualPoint) -> Result<f64> {
        self.check_point(pt)?;
        let r = self.residual_unchecked(&pt.x, &pt.z);
        Ok(self.f.value(pt.x.as_slice())
            + self.g.value(pt.z.as_slice())
            + pt.y.dot(&r)
            + 0.5 * pt.rho * r.norm_squared())
    }

    /// Gradient of the augmented Lagrangian with respect to one block.
    pub fn augmented_lagrangian_gradient(&self, pt: &PrimalDualPoint, block: BlockId) -> Result<Vector> {
        self.check_point(pt)?;
        let r = self.residual_unchecked(&pt.x, &pt.z);
        let m = &pt.y + r * pt.rho;
        Ok(match block {
            BlockId::X => self.f.gradient(pt.x.as_slice()) + self.a.tr_mul(&m),
            BlockId::Z => self.g.gradient(pt.z.as_slice()) + self.b.tr_mul(&m),
        })
    }
}
