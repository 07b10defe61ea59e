use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    Constant { rho: f64 },
    /// `ρ(t) = rho0 + slope·t`.
    Linear { rho0: f64, slope: f64 },
    /// `ρ(t) = rho0·delta^⌊t/kappa⌋`.
    Geometric { rho0: f64, delta: f64, kappa: usize },
}

/// Penalty parameter sequence `ρ(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySchedule {
    kind: ScheduleKind,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid!("{name} must be positive and finite, got {v}"))
    }
}

impl PenaltySchedule {
    pub fn constant(rho: f64) -> Result<Self> {
        positive("rho", rho)?;
        Ok(Self { kind: ScheduleKind::Constant { rho } })
    }

    pub fn linear(rho0: f64, slope: f64) -> Result<Self> {
        positive("rho0", rho0)?;
        positive("slope", slope)?;
        Ok(Self { kind: ScheduleKind::Linear { rho0, slope } })
    }

    pub fn geometric(rho0: f64, delta: f64, kappa: usize) -> Result<Self> {
        positive("rho0", rho0)?;
        if !(delta > 1.0) || !delta.is_finite() {
            return Err(invalid!("growth factor must exceed 1, got {delta}"));
        }
        if kappa == 0 {
            return Err(invalid!("growth period must be at least 1"));
        }
        Ok(Self { kind: ScheduleKind::Geometric { rho0, delta, kappa } })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ScheduleKind::Constant { .. })
    }

    /// Whether `Σ 1/ρ(t)` diverges.
    pub fn is_non_summable(&self) -> bool {
        !matches!(self.kind, ScheduleKind::Geometric { .. })
    }

    pub fn rho(&self, t: usize) -> f64 {
        match self.kind {
            ScheduleKind::Constant { rho } => rho,
            ScheduleKind::Linear { rho0, slope } => rho0 + slope * t as f64,
            ScheduleKind::Geometric { rho0, delta, kappa } => rho0 * libm::pow(delta, (t / kappa) as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let l = PenaltySchedule::linear(1.0, 1.0).unwrap();
        assert_eq!(l.rho(0), 1.0);
        assert_eq!(l.rho(9), 10.0);
        let g = PenaltySchedule::geometric(2.0, 1.5, 5).unwrap();
        assert_eq!(g.rho(4), 2.0);
        assert_eq!(g.rho(5), 3.0);
        assert_eq!(g.rho(10), 4.5);
    }

    #[test]
    fn validation() {
        assert!(PenaltySchedule::constant(0.0).is_err());
        assert!(PenaltySchedule::linear(1.0, 0.0).is_err());
        assert!(PenaltySchedule::geometric(1.0, 1.0, 5).is_err());
        assert!(PenaltySchedule::geometric(1.0, 2.0, 0).is_err());
    }
}
