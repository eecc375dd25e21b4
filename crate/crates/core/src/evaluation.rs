//! Closed-form evaluation of a fixed deployment.
//!
//! Once the `y` variables are fixed and all demand weights are nonnegative,
//! the optimal `x` variables follow from the r1 coverage counts alone:
//! `x1[i] = c1[i] >= 1` and `x2[i] = c1[i] >= 2`. Evaluating a deployment
//! therefore needs no optimization, which is what lets the solver search
//! over deployments only.

use std::fmt;
use std::str::FromStr;

use crate::coverage::{coverage_counts, CoverageMatrices};
use crate::error::ModelError;
use crate::instance::{Deployment, Instance, PenaltyMatrix};

/// Relative slack applied to the proportional coverage constraint.
pub const PROPORTION_REL_TOL: f64 = 1e-9;
/// Absolute tolerance for objective comparisons.
pub const OBJECTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    /// Double coverage weighted by `d`, proportional constraint on `d`.
    Rp,
    /// Single coverage weighted by `d1` plus double coverage weighted by
    /// `d2`, proportional constraint on `d1`.
    Drp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Rp, ModelKind::Drp];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Rp => "RP",
            ModelKind::Drp => "DRP",
        }
    }

    /// Number of the proportional coverage constraint in this model.
    pub fn proportional_constraint(self) -> u8 {
        match self {
            ModelKind::Rp => 3,
            ModelKind::Drp => 12,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rp" => Ok(ModelKind::Rp),
            "drp" => Ok(ModelKind::Drp),
            other => Err(format!("unknown model '{other}', expected rp or drp")),
        }
    }
}

/// Per-point weights of one model kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    /// Objective weight of `x1[i]`.
    pub single: Vec<f64>,
    /// Objective weight of `x2[i]`.
    pub double: Vec<f64>,
    /// Weights of the proportional coverage constraint.
    pub proportional: Vec<f64>,
}

impl ModelWeights {
    pub fn new(instance: &Instance, kind: ModelKind) -> Self {
        let pts = &instance.points;
        match kind {
            ModelKind::Rp => Self {
                single: vec![0.0; pts.len()],
                double: pts.iter().map(|p| p.d).collect(),
                proportional: pts.iter().map(|p| p.d).collect(),
            },
            ModelKind::Drp => Self {
                single: pts.iter().map(|p| p.d1).collect(),
                double: pts.iter().map(|p| p.d2).collect(),
                proportional: pts.iter().map(|p| p.d1).collect(),
            },
        }
    }

    /// Coverage value when every point is covered twice.
    pub fn full_coverage_value(&self) -> f64 {
        self.single.iter().zip(&self.double).map(|(a, b)| a + b).sum()
    }

    /// Right-hand side `alpha * sum(w)` of the proportional constraint.
    pub fn proportional_rhs(&self, alpha: f64) -> f64 {
        alpha * self.proportional.iter().sum::<f64>()
    }
}

/// `lhs >= rhs` up to [`PROPORTION_REL_TOL`].
#[inline]
pub fn meets_proportion(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - PROPORTION_REL_TOL * rhs.abs()
}

/// What a violation refers to. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Point(usize),
    Station(usize),
    Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Constraint number in the model formulation: 2, 3, 7 or 12.
    pub constraint: u8,
    pub subject: Subject,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint ({})", self.constraint)?;
        match self.subject {
            Subject::Point(i) => write!(f, ", point {}", i + 1)?,
            Subject::Station(j) => write!(f, ", station {}", j + 1)?,
            Subject::Model => {}
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub feasible: bool,
    /// Coverage value minus relocation cost.
    pub objective: f64,
    pub coverage_value: f64,
    pub relocation_cost: f64,
    /// Left side of the proportional constraint.
    pub proportional_lhs: f64,
    pub x1: Vec<bool>,
    pub x2: Vec<bool>,
    pub c1: Vec<u32>,
    pub c2: Vec<u32>,
    pub violations: Vec<Violation>,
}

impl Evaluation {
    pub fn single_covered(&self) -> usize {
        self.x1.iter().filter(|&&b| b).count()
    }

    pub fn double_covered(&self) -> usize {
        self.x2.iter().filter(|&&b| b).count()
    }
}

/// Optimal `x` for fixed r1 coverage counts.
pub fn greedy_coverage_decision(c1: &[u32]) -> (Vec<bool>, Vec<bool>) {
    (
        c1.iter().map(|&c| c >= 1).collect(),
        c1.iter().map(|&c| c >= 2).collect(),
    )
}

fn check_dims(
    instance: &Instance,
    cov: &CoverageMatrices,
    dep: &Deployment,
) -> Result<(), ModelError> {
    let (n, m) = (instance.num_points(), instance.num_stations());
    if cov.num_points() != n || cov.num_stations() != m {
        return Err(ModelError::DimensionMismatch {
            what: "coverage matrices",
            expected: format!("{n}x{m}"),
            found: format!("{}x{}", cov.num_points(), cov.num_stations()),
        });
    }
    if dep.len() != instance.num_ambulances() {
        return Err(ModelError::DimensionMismatch {
            what: "deployment",
            expected: format!("{} ambulances", instance.num_ambulances()),
            found: format!("{} ambulances", dep.len()),
        });
    }
    Ok(())
}

fn violations_for(
    instance: &Instance,
    dep: &Deployment,
    kind: ModelKind,
    c2: &[u32],
    proportional_lhs: f64,
    proportional_rhs: f64,
) -> Vec<Violation> {
    let mut out: Vec<Violation> = c2
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| Violation {
            constraint: 2,
            subject: Subject::Point(i),
            detail: "not reachable within r2 by any deployed ambulance".into(),
        })
        .collect();
    if !meets_proportion(proportional_lhs, proportional_rhs) {
        out.push(Violation {
            constraint: kind.proportional_constraint(),
            subject: Subject::Model,
            detail: format!(
                "covered demand {proportional_lhs:.6} below required {proportional_rhs:.6}"
            ),
        });
    }
    for (j, load) in dep.station_load(instance.num_stations()).into_iter().enumerate() {
        let cap = instance.stations[j].capacity;
        if load > cap {
            out.push(Violation {
                constraint: 7,
                subject: Subject::Station(j),
                detail: format!("{load} ambulances exceed capacity {cap}"),
            });
        }
    }
    out
}

/// Evaluates `dep` under `kind`: implied `x`, feasibility and objective.
///
/// Infeasibility is reported through [`Evaluation::feasible`] and
/// [`Evaluation::violations`]; errors are reserved for inputs whose
/// dimensions disagree.
pub fn evaluate_deployment(
    instance: &Instance,
    cov: &CoverageMatrices,
    dep: &Deployment,
    penalties: &PenaltyMatrix,
    kind: ModelKind,
) -> Result<Evaluation, ModelError> {
    check_dims(instance, cov, dep)?;
    penalties.check_dims(instance.num_stations(), instance.num_ambulances())?;
    let counts = coverage_counts(cov, dep)?;
    let (x1, x2) = greedy_coverage_decision(&counts.c1);
    let weights = ModelWeights::new(instance, kind);

    let mut coverage_value = 0.0;
    let mut proportional_lhs = 0.0;
    for i in 0..instance.num_points() {
        if x1[i] {
            coverage_value += weights.single[i];
            proportional_lhs += weights.proportional[i];
        }
        if x2[i] {
            coverage_value += weights.double[i];
        }
    }
    let relocation_cost = penalties.cost_of(dep);
    let rhs = weights.proportional_rhs(instance.alpha);
    let violations = violations_for(instance, dep, kind, &counts.c2, proportional_lhs, rhs);

    Ok(Evaluation {
        feasible: violations.is_empty(),
        objective: coverage_value - relocation_cost,
        coverage_value,
        relocation_cost,
        proportional_lhs,
        x1,
        x2,
        c1: counts.c1,
        c2: counts.c2,
        violations,
    })
}

/// Violated constraints of `dep`, each naming the constraint number and
/// the offending point or station. Empty iff the deployment is feasible.
pub fn feasibility_certificate(
    instance: &Instance,
    cov: &CoverageMatrices,
    dep: &Deployment,
    kind: ModelKind,
) -> Result<Vec<Violation>, ModelError> {
    check_dims(instance, cov, dep)?;
    let counts = coverage_counts(cov, dep)?;
    let weights = ModelWeights::new(instance, kind);
    let lhs: f64 = counts
        .c1
        .iter()
        .zip(&weights.proportional)
        .filter(|(&c, _)| c >= 1)
        .map(|(_, w)| w)
        .sum();
    let rhs = weights.proportional_rhs(instance.alpha);
    Ok(violations_for(instance, dep, kind, &counts.c2, lhs, rhs))
}
