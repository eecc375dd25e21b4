//! Explicit binary programs for both models and an LP-format writer.
//!
//! The solver never uses this formulation; it exists so that results can be
//! cross-checked against an external MILP solver and so that tests can
//! verify the closed-form evaluation row by row.
//!
//! Variables are ordered `x1_1..x1_n`, `x2_1..x2_n`, then `y_j_k` with the
//! station index outermost. Rows are emitted in constraint-family order:
//! `c2_i`, the proportional row (`c3` or `c12`), `c4_i`, `c5_i`, `c6_k`,
//! `c7_j`. All names use 1-based indices.

use std::fmt::Write as _;
use std::io;

use crate::coverage::{coverage_counts, CoverageMatrices};
use crate::error::ModelError;
use crate::evaluation::{greedy_coverage_decision, ModelKind, ModelWeights};
use crate::instance::{Deployment, Instance, PenaltyMatrix};

const ROW_TOL: f64 = 1e-9;
const TERMS_PER_LINE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Ge,
    Le,
    Eq,
}

impl RowSense {
    fn symbol(self) -> &'static str {
        match self {
            RowSense::Ge => ">=",
            RowSense::Le => "<=",
            RowSense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// `(variable index, coefficient)`.
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64]) -> bool {
        let lhs = self.activity(values);
        let slack = ROW_TOL * self.rhs.abs().max(1.0);
        match self.sense {
            RowSense::Ge => lhs >= self.rhs - slack,
            RowSense::Le => lhs <= self.rhs + slack,
            RowSense::Eq => (lhs - self.rhs).abs() <= slack,
        }
    }
}

/// A maximization problem over binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub kind: ModelKind,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    n: usize,
    m: usize,
    fleet: usize,
}

impl LinearProgram {
    pub fn x1(&self, i: usize) -> usize {
        i
    }

    pub fn x2(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn y(&self, j: usize, k: usize) -> usize {
        2 * self.n + j * self.fleet + k
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.fleet)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective * x)
            .sum()
    }

    /// Names of rows that `values` violate.
    pub fn violated_rows(&self, values: &[f64]) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| !r.is_satisfied(values))
            .map(|r| r.name.as_str())
            .collect()
    }

    /// Variable vector for a deployment with its greedy `x`.
    pub fn solution_vector(
        &self,
        cov: &CoverageMatrices,
        dep: &Deployment,
    ) -> Result<Vec<f64>, ModelError> {
        if dep.len() != self.fleet {
            return Err(ModelError::DimensionMismatch {
                what: "deployment",
                expected: format!("{} ambulances", self.fleet),
                found: format!("{} ambulances", dep.len()),
            });
        }
        let counts = coverage_counts(cov, dep)?;
        let (x1, x2) = greedy_coverage_decision(&counts.c1);
        let mut values = vec![0.0; self.variables.len()];
        for i in 0..self.n {
            values[self.x1(i)] = f64::from(u8::from(x1[i]));
            values[self.x2(i)] = f64::from(u8::from(x2[i]));
        }
        for (k, &j) in dep.station_of().iter().enumerate() {
            values[self.y(j, k)] = 1.0;
        }
        Ok(values)
    }
}

/// Builds the full binary program of `kind` with `alpha` taken from the
/// instance.
pub fn build_milp(
    instance: &Instance,
    cov: &CoverageMatrices,
    penalties: &PenaltyMatrix,
    kind: ModelKind,
) -> Result<LinearProgram, ModelError> {
    let (n, m, fleet) = (
        instance.num_points(),
        instance.num_stations(),
        instance.num_ambulances(),
    );
    if cov.num_points() != n || cov.num_stations() != m {
        return Err(ModelError::DimensionMismatch {
            what: "coverage matrices",
            expected: format!("{n}x{m}"),
            found: format!("{}x{}", cov.num_points(), cov.num_stations()),
        });
    }
    penalties.check_dims(m, fleet)?;
    let w = ModelWeights::new(instance, kind);

    let mut variables = Vec::with_capacity(2 * n + m * fleet);
    for i in 0..n {
        variables.push(binary(format!("x1_{}", i + 1), w.single[i]));
    }
    for i in 0..n {
        variables.push(binary(format!("x2_{}", i + 1), w.double[i]));
    }
    for j in 0..m {
        for k in 0..fleet {
            variables.push(binary(format!("y_{}_{}", j + 1, k + 1), -penalties.get(j, k)));
        }
    }

    let mut lp = LinearProgram {
        kind,
        variables,
        rows: Vec::with_capacity(3 * n + 1 + fleet + m),
        n,
        m,
        fleet,
    };

    let station_terms = |lp: &LinearProgram, covers: &dyn Fn(usize) -> bool| {
        let mut terms = Vec::new();
        for j in (0..m).filter(|&j| covers(j)) {
            terms.extend((0..fleet).map(|k| (lp.y(j, k), 1.0)));
        }
        terms
    };

    for i in 0..n {
        let terms = station_terms(&lp, &|j| cov.delta(i, j));
        lp.rows.push(Row {
            name: format!("c2_{}", i + 1),
            terms,
            sense: RowSense::Ge,
            rhs: 1.0,
        });
    }

    lp.rows.push(Row {
        name: format!("c{}", kind.proportional_constraint()),
        terms: (0..n)
            .filter(|&i| w.proportional[i] != 0.0)
            .map(|i| (lp.x1(i), w.proportional[i]))
            .collect(),
        sense: RowSense::Ge,
        rhs: w.proportional_rhs(instance.alpha),
    });

    for i in 0..n {
        let mut terms = station_terms(&lp, &|j| cov.gamma(i, j));
        terms.push((lp.x1(i), -1.0));
        terms.push((lp.x2(i), -1.0));
        lp.rows.push(Row {
            name: format!("c4_{}", i + 1),
            terms,
            sense: RowSense::Ge,
            rhs: 0.0,
        });
    }

    for i in 0..n {
        lp.rows.push(Row {
            name: format!("c5_{}", i + 1),
            terms: vec![(lp.x1(i), 1.0), (lp.x2(i), -1.0)],
            sense: RowSense::Ge,
            rhs: 0.0,
        });
    }

    for k in 0..fleet {
        lp.rows.push(Row {
            name: format!("c6_{}", k + 1),
            terms: (0..m).map(|j| (lp.y(j, k), 1.0)).collect(),
            sense: RowSense::Eq,
            rhs: 1.0,
        });
    }

    for j in 0..m {
        lp.rows.push(Row {
            name: format!("c7_{}", j + 1),
            terms: (0..fleet).map(|k| (lp.y(j, k), 1.0)).collect(),
            sense: RowSense::Le,
            rhs: f64::from(instance.stations[j].capacity),
        });
    }

    Ok(lp)
}

fn binary(name: String, objective: f64) -> Variable {
    Variable {
        name,
        kind: VarKind::Binary,
        objective,
    }
}

fn push_terms(out: &mut String, lp: &LinearProgram, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        // A row or objective still needs one term to be parseable.
        let _ = write!(out, " 0 {}", lp.variables[0].name);
        return;
    }
    for (pos, &(v, c)) in terms.iter().enumerate() {
        if pos > 0 && pos % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        if pos == 0 && sign == "+" {
            out.push(' ');
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag != 1.0 {
            let _ = write!(out, "{mag} ");
        }
        out.push_str(&lp.variables[v].name);
    }
}

/// Renders the program in LP text format. Output depends only on `lp`.
pub fn to_lp_string(lp: &LinearProgram) -> String {
    let (n, m, fleet) = lp.dims();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ {} model: {n} points, {m} stations, {fleet} ambulances",
        lp.kind
    );
    out.push_str("Maximize\n obj:");
    let objective: Vec<(usize, f64)> = lp
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.objective != 0.0)
        .map(|(i, v)| (i, v.objective))
        .collect();
    push_terms(&mut out, lp, &objective);
    out.push_str("\nSubject To\n");
    for row in &lp.rows {
        let _ = write!(out, " {}:", row.name);
        push_terms(&mut out, lp, &row.terms);
        let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
    }
    out.push_str("Binary\n");
    for chunk in lp.variables.chunks(TERMS_PER_LINE) {
        let names: Vec<&str> = chunk.iter().map(|v| v.name.as_str()).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("End\n");
    out
}

pub fn export_lp<W: io::Write>(lp: &LinearProgram, mut destination: W) -> io::Result<()> {
    destination.write_all(to_lp_string(lp).as_bytes())?;
    destination.flush()
}
