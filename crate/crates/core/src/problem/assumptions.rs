//! Assumption checks per guarantee profile.
//!
//! Structural facts are decided exactly. Analytic facts (bounded gradients,
//! Lipschitz constants, sign conditions) are estimated on quasi-random
//! samples and labeled as sampled: they are evidence, not proofs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{ConstraintFn, ObjectiveBlock, SetForm, StructuredProblem};
use crate::linalg::{has_full_column_rank, inf_norm, is_identity, Matrix};
use crate::sampling::Halton;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Prop1Unconstrained,
    Prop2Constrained,
    Prop3Admm,
    Corollary2Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMethod {
    Exact,
    /// Sampled, not proven.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub method: CheckMethod,
    pub outcome: CheckOutcome,
    pub structural: bool,
    pub value: Option<f64>,
    pub detail: String,
}

/// Box `[lower, upper]^dim` and sample count for sampled checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingBox {
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
}

impl Default for SamplingBox {
    fn default() -> Self {
        Self {
            lower: -10.0,
            upper: 10.0,
            samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub profile: Profile,
    pub checks: Vec<Check>,
    /// Lipschitz constant used by the scalar profile.
    pub lipschitz: Option<f64>,
}

impl AssumptionReport {
    /// No check failed (inconclusive checks do not count as failures).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != CheckOutcome::Fail)
    }

    pub fn structural_passed(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.structural)
            .all(|c| c.outcome == CheckOutcome::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn outcome(ok: bool) -> CheckOutcome {
    if ok {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail
    }
}

fn exact(name: &'static str, ok: bool, detail: String) -> Check {
    Check {
        name,
        method: CheckMethod::Exact,
        outcome: outcome(ok),
        structural: true,
        value: None,
        detail,
    }
}

fn max_gradient_norm(block: &ObjectiveBlock, lower: f64, upper: f64, samples: usize) -> f64 {
    let mut h = Halton::new(block.dim(), lower, upper);
    (0..samples)
        .map(|_| block.gradient(&h.next_point()).norm())
        .fold(0.0, f64::max)
}

fn sampled_lipschitz_1d(block: &ObjectiveBlock, sb: &SamplingBox) -> f64 {
    let mut h = Halton::new(2, sb.lower, sb.upper);
    let mut best: f64 = 0.0;
    for _ in 0..sb.samples {
        let p = h.next_point();
        if p[0] != p[1] {
            let slope = (block.derivative_1d(p[0]) - block.derivative_1d(p[1])).abs() / (p[0] - p[1]).abs();
            best = best.max(slope);
        }
    }
    best
}

fn slater(set: &super::ConstraintSet, sb: &SamplingBox) -> Check {
    let name = "slater";
    match set.form() {
        SetForm::Functional(fs) => {
            if !fs.equalities.is_empty() {
                return Check {
                    name,
                    method: CheckMethod::Sampled,
                    outcome: CheckOutcome::Inconclusive,
                    structural: false,
                    value: None,
                    detail: "equality constraints are not sampled".into(),
                };
            }
            let mut h = Halton::new(set.dim(), sb.lower, sb.upper);
            let found = (0..sb.samples).any(|_| {
                let p = h.next_point();
                fs.inequalities.iter().all(|c: &ConstraintFn| c.value(&p) < 0.0)
            });
            Check {
                name,
                method: CheckMethod::Sampled,
                outcome: if found { CheckOutcome::Pass } else { CheckOutcome::Inconclusive },
                structural: false,
                value: None,
                detail: if found {
                    "strictly feasible sample found".into()
                } else {
                    "no strictly feasible sample found".into()
                },
            }
        }
        _ => {
            let interior = match set.bounding_box() {
                Some((lo, hi)) => lo.iter().zip(&hi).all(|(l, u)| l < u),
                None => true,
            };
            Check {
                name,
                method: CheckMethod::Exact,
                outcome: outcome(interior),
                structural: true,
                value: None,
                detail: "special form has nonempty interior".into(),
            }
        }
    }
}

impl StructuredProblem {
    /// Reports which hypotheses of the selected guarantee hold for this instance.
    pub fn validate_assumptions(&self, profile: Profile, sb: &SamplingBox) -> AssumptionReport {
        let checks = match profile {
            Profile::Prop1Unconstrained => self.prop1_checks(sb),
            Profile::Prop2Constrained => self.prop2_checks(sb),
            Profile::Prop3Admm => self.prop3_checks(),
            Profile::Corollary2Scalar => return self.corollary2_report(sb),
        };
        AssumptionReport {
            profile,
            checks,
            lipschitz: None,
        }
    }

    fn prop1_checks(&self, sb: &SamplingBox) -> Vec<Check> {
        let mut checks = Vec::new();
        checks.push(exact("g-zero", self.g().is_zero(), "g is identically zero".into()));
        checks.push(exact("a-identity", is_identity(self.a()), "A is the identity".into()));
        checks.push(exact("c-zero", self.c().iter().all(|v| *v == 0.0), "c is zero".into()));
        checks.push(exact(
            "b-full-column-rank",
            has_full_column_rank(self.b()),
            "B has full column rank (SVD)".into(),
        ));
        checks.push(exact(
            "sets-whole-space",
            self.x_set().is_whole_space() && self.z_set().is_whole_space(),
            "X and Z are the whole space".into(),
        ));

        let m1 = max_gradient_norm(self.f(), sb.lower, sb.upper, sb.samples);
        let m10 = max_gradient_norm(self.f(), 10.0 * sb.lower, 10.0 * sb.upper, sb.samples);
        let bounded = m10 <= 2.0 * m1 + 1e-12;
        checks.push(Check {
            name: "bounded-gradient",
            method: CheckMethod::Sampled,
            outcome: outcome(bounded),
            structural: false,
            value: Some(m10.max(m1)),
            detail: format!("max gradient norm {m1:.6e} on the box, {m10:.6e} on the 10x box"),
        });

        let b = self.b();
        let btb = b.transpose() * b;
        let pinv_norm = btb
            .try_inverse()
            .map(|inv| inf_norm(&(inv * b.transpose())))
            .unwrap_or(f64::INFINITY);
        let norms_ok = inf_norm(b) <= 1.0 + 1e-12 && pinv_norm <= 1.0 + 1e-12;
        checks.push(Check {
            name: "coupling-inf-norms",
            method: CheckMethod::Exact,
            outcome: outcome(norms_ok),
            structural: false,
            value: Some(pinv_norm),
            detail: format!("inf-norms of B and its left inverse: {:.6e}, {pinv_norm:.6e}", inf_norm(b)),
        });

        // smallest c such that every sampled coordinate beyond c has a gradient of matching sign
        let mut h = Halton::new(self.x_dim(), sb.lower, sb.upper);
        let mut c_est: f64 = 0.0;
        for _ in 0..sb.samples {
            let p = h.next_point();
            let g = self.f().gradient(&p);
            for (xi, gi) in p.iter().zip(g.iter()) {
                if (*xi > 0.0 && *gi <= 0.0) || (*xi < 0.0 && *gi >= 0.0) {
                    c_est = c_est.max(xi.abs());
                }
            }
        }
        let width = sb.upper.abs().min(sb.lower.abs());
        let sign_ok = c_est < 0.9 * width;
        checks.push(Check {
            name: "gradient-sign-condition",
            method: CheckMethod::Sampled,
            outcome: outcome(sign_ok),
            structural: false,
            value: Some(c_est),
            detail: format!("sign condition holds beyond c = {c_est:.6e}"),
        });
        checks.push(Check {
            name: "gradient-assumption",
            method: CheckMethod::Sampled,
            outcome: outcome(bounded || (norms_ok && sign_ok)),
            structural: false,
            value: None,
            detail: "bounded gradient, or inf-norm and sign conditions".into(),
        });
        checks
    }

    fn prop2_checks(&self, sb: &SamplingBox) -> Vec<Check> {
        let mut checks = Vec::new();
        for (label, set) in [("x", self.x_set()), ("z", self.z_set())] {
            checks.push(Check {
                name: if label == "x" { "x-set-convex" } else { "z-set-convex" },
                ..exact("", set.is_convex(), format!("{label}-set form is convex"))
            });
            let compact = set.is_compact();
            checks.push(Check {
                name: if label == "x" { "x-set-compact" } else { "z-set-compact" },
                outcome: match compact {
                    Some(true) => CheckOutcome::Pass,
                    Some(false) => CheckOutcome::Fail,
                    None => CheckOutcome::Inconclusive,
                },
                ..exact("", false, format!("{label}-set form is compact"))
            });
            let mut s = slater(set, sb);
            s.name = if label == "x" { "x-set-slater" } else { "z-set-slater" };
            checks.push(s);
        }
        checks.push(exact(
            "a-full-column-rank",
            has_full_column_rank(self.a()),
            "A has full column rank (SVD)".into(),
        ));
        checks.push(exact(
            "b-full-column-rank",
            has_full_column_rank(self.b()),
            "B has full column rank (SVD)".into(),
        ));
        checks
    }

    fn prop3_checks(&self) -> Vec<Check> {
        let finite = |set: &super::ConstraintSet| {
            let (e, i) = set.counts();
            e < usize::MAX && i < usize::MAX
        };
        alloc::vec![
            exact(
                "sets-finitely-described",
                finite(self.x_set()) && finite(self.z_set()),
                "X and Z are closed with finite constraint descriptions".into(),
            ),
            Check {
                name: "subproblem-optimality",
                method: CheckMethod::Exact,
                outcome: CheckOutcome::Inconclusive,
                structural: false,
                value: None,
                detail: "established per iteration by subsolver statuses".into(),
            },
            Check {
                name: "regularity",
                method: CheckMethod::Exact,
                outcome: CheckOutcome::Inconclusive,
                structural: false,
                value: None,
                detail: "evaluated at limit points by the FON certificate".into(),
            },
        ]
    }

    fn corollary2_report(&self, sb: &SamplingBox) -> AssumptionReport {
        let mut checks = Vec::new();
        let scalar = self.x_dim() == 1 && self.z_dim() == 1 && self.coupling_dim() == 1;
        checks.push(exact("scalar", scalar, "f and g are scalar functions".into()));
        checks.push(exact(
            "sets-whole-space",
            self.x_set().is_whole_space() && self.z_set().is_whole_space(),
            "X and Z are the real line".into(),
        ));
        let consensus = scalar
            && self.a() == &Matrix::from_element(1, 1, 1.0)
            && self.b() == &Matrix::from_element(1, 1, -1.0)
            && self.c()[0] == 0.0;
        checks.push(exact("consensus-coupling", consensus, "constraint is x - z = 0".into()));
        let mut lipschitz = None;
        if scalar {
            let analytic = self
                .f()
                .lipschitz_1d()
                .zip(self.g().lipschitz_1d())
                .map(|(a, b)| a.max(b));
            let sampled = sampled_lipschitz_1d(self.f(), sb).max(sampled_lipschitz_1d(self.g(), sb));
            match analytic {
                Some(l) => {
                    lipschitz = Some(l);
                    checks.push(Check {
                        name: "lipschitz-derivatives",
                        method: CheckMethod::Exact,
                        outcome: CheckOutcome::Pass,
                        structural: true,
                        value: Some(l),
                        detail: format!("analytic constant {l}, sampled slope {sampled:.6e}"),
                    });
                }
                None => {
                    lipschitz = Some(sampled);
                    checks.push(Check {
                        name: "lipschitz-derivatives",
                        method: CheckMethod::Sampled,
                        outcome: CheckOutcome::Inconclusive,
                        structural: false,
                        value: Some(sampled),
                        detail: format!("no analytic constant; sampled slope {sampled:.6e}"),
                    });
                }
            }
        }
        AssumptionReport {
            profile: Profile::Corollary2Scalar,
            checks,
            lipschitz,
        }
    }
}
