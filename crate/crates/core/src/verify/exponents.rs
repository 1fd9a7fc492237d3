//! The exponent system behind the coefficient choice `α_i = ε^{x_i} ν^{−2i}`,
//! `β_i = ε^{y_i} ν^{−(2i+1)}`, `γ_i = ε^{z_i} ν^{−2i}`.

use num_traits::ToPrimitive;
use serde::Serialize;

use super::lp::{minimize, q, LpOutcome, Relation, Row, Q};

/// Exponent variables in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Var {
    X0,
    X1,
    X2,
    X3,
    Y0,
    Y1,
    Y2,
    Z1,
    Z2,
}

pub const VARS: [Var; 9] = [
    Var::X0,
    Var::X1,
    Var::X2,
    Var::X3,
    Var::Y0,
    Var::Y1,
    Var::Y2,
    Var::Z1,
    Var::Z2,
];

impl Var {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x0", "x1", "x2", "x3", "y0", "y1", "y2", "z1", "z2"][self.index()]
    }
}

/// Integer exponents `(x₀..x₃, y₀..y₂, z₁, z₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExponentAssignment {
    pub x: [i64; 4],
    pub y: [i64; 3],
    pub z: [i64; 2],
}

impl ExponentAssignment {
    /// The published solution.
    pub const PAPER: Self = Self {
        x: [256, 448, 488, 492],
        y: [384, 480, 493],
        z: [472, 491],
    };

    pub fn zero() -> Self {
        Self { x: [0; 4], y: [0; 3], z: [0; 2] }
    }

    pub fn to_vec(&self) -> [i64; 9] {
        [
            self.x[0], self.x[1], self.x[2], self.x[3], self.y[0], self.y[1], self.y[2], self.z[0], self.z[1],
        ]
    }

    pub fn from_vec(v: [i64; 9]) -> Self {
        Self {
            x: [v[0], v[1], v[2], v[3]],
            y: [v[4], v[5], v[6]],
            z: [v[7], v[8]],
        }
    }

    pub fn get(&self, v: Var) -> i64 {
        self.to_vec()[v.index()]
    }

    pub fn set(&mut self, v: Var, value: i64) {
        let mut all = self.to_vec();
        all[v.index()] = value;
        *self = Self::from_vec(all);
    }

    pub fn max_exponent(&self) -> i64 {
        *self.to_vec().iter().max().expect("nonempty")
    }

    pub fn sum(&self) -> i64 {
        self.to_vec().iter().sum()
    }
}

/// `lhs_coeff · lhs ≥ 1 + Σ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub lhs_coeff: i64,
    pub lhs: Var,
    pub rhs: &'static [Var],
}

impl Constraint {
    const fn new(lhs_coeff: i64, lhs: Var, rhs: &'static [Var]) -> Self {
        Self { lhs_coeff, lhs, rhs }
    }

    pub fn lhs_value(&self, a: &ExponentAssignment) -> i64 {
        self.lhs_coeff * a.get(self.lhs)
    }

    pub fn rhs_value(&self, a: &ExponentAssignment) -> i64 {
        1 + self.rhs.iter().map(|&v| a.get(v)).sum::<i64>()
    }

    pub fn label(&self) -> String {
        let lhs = if self.lhs_coeff == 1 {
            self.lhs.name().to_string()
        } else {
            format!("{}{}", self.lhs_coeff, self.lhs.name())
        };
        let rhs: Vec<&str> = std::iter::once("1").chain(self.rhs.iter().map(|v| v.name())).collect();
        format!("{lhs} >= {}", rhs.join("+"))
    }
}

use Var::*;

/// The nine chain conditions followed by the eleven quadratic conditions.
pub const CONSTRAINTS: [Constraint; 20] = [
    Constraint::new(1, X0, &[]),
    Constraint::new(1, Y0, &[X0]),
    Constraint::new(1, X1, &[Y0]),
    Constraint::new(1, Z1, &[X1]),
    Constraint::new(1, Y1, &[Z1]),
    Constraint::new(1, X2, &[Y1]),
    Constraint::new(1, Z2, &[X2]),
    Constraint::new(1, X3, &[Z2]),
    Constraint::new(1, Y2, &[X3]),
    Constraint::new(2, X0, &[Y0]),
    Constraint::new(2, Y0, &[Y1]),
    Constraint::new(2, X1, &[Y0, Y1]),
    Constraint::new(2, X2, &[Y1, Y2]),
    Constraint::new(2, Y0, &[X0, X1]),
    Constraint::new(2, Y1, &[X1, X2]),
    Constraint::new(2, Y2, &[X2, X3]),
    Constraint::new(2, Y1, &[Y0, Y2]),
    Constraint::new(2, X1, &[Y0, Z1]),
    Constraint::new(2, Z1, &[X1, X2]),
    Constraint::new(2, Z2, &[X2, Y2]),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintStatus {
    pub label: String,
    pub lhs: i64,
    pub rhs: i64,
    pub slack: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub feasible: bool,
    pub violated: Vec<ConstraintStatus>,
    pub tight: Vec<ConstraintStatus>,
    pub all: Vec<ConstraintStatus>,
}

/// Exact verdict for an assignment.
pub fn check_exponent_system(a: &ExponentAssignment) -> CheckReport {
    let all: Vec<ConstraintStatus> = CONSTRAINTS
        .iter()
        .map(|c| {
            let lhs = c.lhs_value(a);
            let rhs = c.rhs_value(a);
            ConstraintStatus { label: c.label(), lhs, rhs, slack: lhs - rhs }
        })
        .collect();
    let nonneg = a.to_vec().iter().all(|&v| v >= 0);
    let violated: Vec<_> = all.iter().filter(|s| s.slack < 0).cloned().collect();
    let tight: Vec<_> = all.iter().filter(|s| s.slack == 0).cloned().collect();
    CheckReport { feasible: nonneg && violated.is_empty(), violated, tight, all }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaxExponent,
    Sum,
}

impl std::str::FromStr for Objective {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "max" | "max-exponent" => Ok(Self::MaxExponent),
            "sum" => Ok(Self::Sum),
            other => Err(crate::Error::Config(format!("unknown objective '{other}'"))),
        }
    }
}

/// Result of the LP relaxation over the rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    pub x: Vec<Q>,
    pub value: Q,
}

/// Solve the LP relaxation; `fixed` pins some variables to given values.
pub fn lp_relaxation(objective: Objective, fixed: &[(Var, i64)]) -> Option<Relaxation> {
    let nv = 9 + usize::from(objective == Objective::MaxExponent);
    let mut rows = Vec::new();
    for c in &CONSTRAINTS {
        let mut coeffs = vec![q(0); nv];
        coeffs[c.lhs.index()] += q(c.lhs_coeff);
        for v in c.rhs {
            coeffs[v.index()] -= q(1);
        }
        rows.push(Row { coeffs, relation: Relation::Ge, rhs: q(1) });
    }
    for &(v, value) in fixed {
        let mut coeffs = vec![q(0); nv];
        coeffs[v.index()] = q(1);
        rows.push(Row { coeffs, relation: Relation::Eq, rhs: q(value) });
    }
    let mut cost = vec![q(0); nv];
    match objective {
        Objective::Sum => cost.iter_mut().for_each(|c| *c = q(1)),
        Objective::MaxExponent => {
            cost[9] = q(1);
            for i in 0..9 {
                let mut coeffs = vec![q(0); nv];
                coeffs[9] = q(1);
                coeffs[i] = q(-1);
                rows.push(Row { coeffs, relation: Relation::Ge, rhs: q(0) });
            }
        }
    }
    match minimize(&cost, &rows) {
        LpOutcome::Optimal { x, value } => Some(Relaxation { x: x[..9].to_vec(), value }),
        _ => None,
    }
}

fn floor_q(v: &Q) -> i64 {
    v.floor().to_integer().to_i64().expect("exponent fits in i64")
}

fn ceil_div(num: i64, den: i64) -> i64 {
    let q = num.div_euclid(den);
    if num.rem_euclid(den) == 0 {
        q
    } else {
        q + 1
    }
}

/// Smallest feasible integer point above `start`: iterate
/// `v ← max(v, ⌈(1 + Σ rhs) / coeff⌉)` over all constraints until stable.
///
/// The right-hand sides are nondecreasing in every variable, so the iteration
/// is monotone; it stops below any feasible point that dominates `start`.
pub fn repair(start: ExponentAssignment, limit: i64) -> Option<ExponentAssignment> {
    let mut v = start.to_vec().map(|x| x.max(0));
    loop {
        let mut changed = false;
        for c in &CONSTRAINTS {
            let a = ExponentAssignment::from_vec(v);
            let need = ceil_div(c.rhs_value(&a), c.lhs_coeff);
            let i = c.lhs.index();
            if v[i] < need {
                v[i] = need;
                changed = true;
                if need > limit {
                    return None;
                }
            }
        }
        if !changed {
            return Some(ExponentAssignment::from_vec(v));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimization {
    pub objective: Objective,
    pub assignment: ExponentAssignment,
    pub objective_value: i64,
    /// Optimal value of the rational relaxation, as `numerator/denominator`.
    pub lp_bound: String,
    pub lp_bound_f64: f64,
    /// The rounded LP point after repair (feasible, possibly above the optimum).
    pub rounded: ExponentAssignment,
    pub report: CheckReport,
}

/// Optimal integer exponents for `objective`.
///
/// The feasible set is closed under componentwise minimum (each constraint
/// bounds one variable below by a nondecreasing function of the others), so
/// it has a least element, which minimises every monotone objective. It is
/// obtained by [`repair`] from the zero vector, with the repaired LP rounding
/// as the cap. The LP value certifies the gap.
pub fn minimize_exponents(objective: Objective) -> Minimization {
    let relax = lp_relaxation(objective, &[]).expect("the published point witnesses feasibility");
    let floor = ExponentAssignment::from_vec(std::array::from_fn(|i| floor_q(&relax.x[i])));
    let cap = ExponentAssignment::PAPER.max_exponent().max(floor.max_exponent()) * 4 + 16;
    let rounded = repair(floor, cap).expect("repair converges below the cap");
    let least = repair(ExponentAssignment::zero(), rounded.max_exponent()).expect("least element exists");
    let value = |a: &ExponentAssignment| match objective {
        Objective::MaxExponent => a.max_exponent(),
        Objective::Sum => a.sum(),
    };
    let best = if value(&least) <= value(&rounded) { least } else { rounded };
    let report = check_exponent_system(&best);
    assert!(report.feasible, "minimiser failed re-verification");
    Minimization {
        objective,
        assignment: best,
        objective_value: value(&best),
        lp_bound: relax.value.to_string(),
        lp_bound_f64: relax.value.to_f64().unwrap_or(f64::NAN),
        rounded,
        report,
    }
}
