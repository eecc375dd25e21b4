//! α sweeps, model comparison tables and CSV output.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::coverage::build_coverage_matrices;
use crate::error::ModelError;
use crate::evaluation::ModelKind;
use crate::instance::{Deployment, Instance, PenaltyMatrix};
use crate::solver::{solve, Solution, SolverConfig, Status};

pub const CSV_HEADER: [&str; 9] = [
    "period",
    "model",
    "alpha",
    "status",
    "objective",
    "single_covered",
    "double_covered",
    "relocation_cost",
    "wall_ms",
];

/// One solved `(period, model, alpha)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// 1-based period number.
    pub period: usize,
    pub model: ModelKind,
    pub alpha: f64,
    pub status: Status,
    /// `None` when no deployment was found.
    pub objective: Option<f64>,
    /// Points with `x1 = 1`.
    pub single_covered: usize,
    /// Points with `x2 = 1`.
    pub double_covered: usize,
    pub relocation_cost: Option<f64>,
    pub wall_time: Duration,
}

impl SweepRow {
    pub fn from_solution(period: usize, model: ModelKind, alpha: f64, sol: &Solution) -> Self {
        let eval = sol.evaluation.as_ref();
        Self {
            period,
            model,
            alpha,
            status: sol.status,
            objective: eval.map(|e| e.objective),
            single_covered: eval.map_or(0, |e| e.single_covered()),
            double_covered: eval.map_or(0, |e| e.double_covered()),
            relocation_cost: eval.map(|e| e.relocation_cost),
            wall_time: sol.wall_time,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.status == Status::Optimal
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.period
            .cmp(&other.period)
            .then(self.model.cmp(&other.model))
            .then(self.alpha.total_cmp(&other.alpha))
    }
}

/// Sorts rows by `(period, model, alpha)`.
pub fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(SweepRow::key_cmp);
}

/// Per-period record of one model's run through the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub period: usize,
    pub model: ModelKind,
    /// Ambulance ids (0-based) available this period, in solve order.
    pub available: Vec<usize>,
    /// Station of each available ambulance before solving.
    pub positions: Vec<usize>,
    pub penalties: PenaltyMatrix,
    /// `(alpha, deployment)` for every grid value; deployment indices refer
    /// to `available`.
    pub deployments: Vec<(f64, Option<Deployment>)>,
    /// The α whose deployment moved the fleet, if any solve succeeded.
    pub operating_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HorizonTrace {
    pub rows: Vec<SweepRow>,
    pub periods: Vec<PeriodRecord>,
}

impl HorizonTrace {
    /// Combines traces of different models into one, rows sorted by
    /// `(period, model, alpha)`.
    pub fn merge(traces: impl IntoIterator<Item = HorizonTrace>) -> Self {
        let mut out = HorizonTrace::default();
        for t in traces {
            out.rows.extend(t.rows);
            out.periods.extend(t.periods);
        }
        sort_rows(&mut out.rows);
        out.periods
            .sort_by(|a, b| a.period.cmp(&b.period).then(a.model.cmp(&b.model)));
        out
    }
}

/// `from, from + step, ..., to`, each value rounded to 10 decimals so that
/// accumulated steps land exactly on the endpoints.
pub fn alpha_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "alpha step must be positive");
    if to < from {
        return Vec::new();
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((from + i as f64 * step) * 1e10).round() / 1e10)
        .collect()
}

/// `0.90, 0.91, ..., 1.00`.
pub fn default_alpha_grid() -> Vec<f64> {
    alpha_grid(0.90, 1.00, 0.01)
}

/// Solves every `(kind, alpha)` pair for a single period (`period = 1`).
/// Pairs are solved in parallel; the output is sorted.
pub fn alpha_sweep(
    instance: &Instance,
    kinds: &[ModelKind],
    alpha_grid: &[f64],
    penalties: &PenaltyMatrix,
    config: &SolverConfig,
) -> Result<Vec<SweepRow>, ModelError> {
    let cov = build_coverage_matrices(&instance.travel_time, instance.r1, instance.r2)?;
    let jobs: Vec<(ModelKind, f64)> = kinds
        .iter()
        .flat_map(|&k| alpha_grid.iter().map(move |&a| (k, a)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(kind, alpha)| {
            let inst = instance.with_alpha(alpha);
            let sol = solve(&inst, &cov, penalties, kind, config)?;
            Ok(SweepRow::from_solution(1, kind, alpha, &sol))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("period {period}: alpha grids differ between RP and DRP rows")]
    MismatchedGrid { period: usize },
}

/// Side-by-side coverage of both models at one `(period, alpha)`.
/// Counts are `None` for rows without a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub period: usize,
    pub alpha: f64,
    pub rp_single: Option<usize>,
    pub drp_single: Option<usize>,
    pub rp_double: Option<usize>,
    pub drp_double: Option<usize>,
}

impl ComparisonRow {
    /// DRP minus RP single coverage.
    pub fn delta_single(&self) -> Option<i64> {
        Some(self.drp_single? as i64 - self.rp_single? as i64)
    }

    /// DRP minus RP double coverage.
    pub fn delta_double(&self) -> Option<i64> {
        Some(self.drp_double? as i64 - self.rp_double? as i64)
    }
}

fn counts(row: &SweepRow) -> (Option<usize>, Option<usize>) {
    if row.objective.is_some() {
        (Some(row.single_covered), Some(row.double_covered))
    } else {
        (None, None)
    }
}

/// Pairs RP and DRP rows on `(period, alpha)`. Both models must cover the
/// same α values in every period.
pub fn compare_report(rows: &[SweepRow]) -> Result<Vec<ComparisonRow>, ReportError> {
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    let mut periods: Vec<usize> = sorted.iter().map(|r| r.period).collect();
    periods.dedup();

    let mut out = Vec::new();
    for period in periods {
        let pick = |kind| -> Vec<&SweepRow> {
            sorted
                .iter()
                .filter(|r| r.period == period && r.model == kind)
                .collect()
        };
        let rp = pick(ModelKind::Rp);
        let drp = pick(ModelKind::Drp);
        if rp.len() != drp.len() || rp.iter().zip(&drp).any(|(a, b)| a.alpha != b.alpha) {
            return Err(ReportError::MismatchedGrid { period });
        }
        for (a, b) in rp.into_iter().zip(drp) {
            let (rp_single, rp_double) = counts(a);
            let (drp_single, drp_double) = counts(b);
            out.push(ComparisonRow {
                period,
                alpha: a.alpha,
                rp_single,
                drp_single,
                rp_double,
                drp_double,
            });
        }
    }
    Ok(out)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Fixed-width text rendering of a comparison table.
pub fn format_comparison(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6} {:>5} {:>9} {:>10} {:>9} {:>10} {:>8} {:>8}",
        "period", "alpha", "rp_single", "drp_single", "rp_double", "drp_double", "d_single", "d_double"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6} {:>5.2} {:>9} {:>10} {:>9} {:>10} {:>8} {:>8}",
            r.period,
            r.alpha,
            opt(r.rp_single),
            opt(r.drp_single),
            opt(r.rp_double),
            opt(r.drp_double),
            opt(r.delta_single()),
            opt(r.delta_double()),
        );
    }
    out
}

fn fixed6(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

/// Writes rows as CSV with header [`CSV_HEADER`]. Every column except
/// `wall_ms` is a deterministic function of the row.
pub fn write_results_csv<W: io::Write>(rows: &[SweepRow], destination: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(destination);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.period.to_string(),
            r.model.label().to_string(),
            format!("{:.2}", r.alpha),
            r.status.label().to_string(),
            fixed6(r.objective),
            r.single_covered.to_string(),
            r.double_covered.to_string(),
            fixed6(r.relocation_cost),
            format!("{:.3}", r.wall_time.as_secs_f64() * 1e3),
        ])?;
    }
    w.flush()
}

pub fn results_csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_results_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Drops the trailing `wall_ms` column, for comparing runs.
pub fn strip_timing(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::t1;

    fn t1_rows() -> Vec<SweepRow> {
        let inst = t1();
        alpha_sweep(
            &inst,
            &ModelKind::ALL,
            &[0.5],
            &PenaltyMatrix::zeros(2, 1),
            &SolverConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn grid_hits_endpoints() {
        let g = default_alpha_grid();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.9);
        assert_eq!(g[10], 1.0);
        assert_eq!(g[3], 0.93);
        assert!(alpha_grid(1.0, 0.9, 0.01).is_empty());
    }

    #[test]
    fn t1_sweep_rows() {
        let rows = t1_rows();
        assert_eq!(rows.len(), 2);
        let drp = &rows[1];
        assert_eq!(drp.model, ModelKind::Drp);
        assert!((drp.objective.unwrap() - 3.0).abs() < 1e-9);
        assert_eq!((drp.single_covered, drp.double_covered), (1, 0));
    }

    #[test]
    fn unattainable_alpha_is_infeasible() {
        let inst = t1();
        let rows = alpha_sweep(
            &inst,
            &[ModelKind::Drp],
            &[1.0],
            &PenaltyMatrix::zeros(2, 1),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(rows[0].status, Status::Infeasible);
        assert_eq!(rows[0].objective, None);
    }

    #[test]
    fn t1_comparison() {
        let table = compare_report(&t1_rows()).unwrap();
        assert_eq!(table.len(), 1);
        let row = &table[0];
        assert_eq!(row.delta_single(), Some(1 - row.rp_single.unwrap() as i64));
        assert_eq!(row.delta_single(), Some(0));
    }

    #[test]
    fn self_comparison_has_zero_deltas() {
        let rp: Vec<SweepRow> = t1_rows()
            .into_iter()
            .filter(|r| r.model == ModelKind::Rp)
            .collect();
        let mut rows = rp.clone();
        rows.extend(rp.into_iter().map(|r| SweepRow {
            model: ModelKind::Drp,
            ..r
        }));
        for r in compare_report(&rows).unwrap() {
            assert_eq!(r.delta_single(), Some(0));
            assert_eq!(r.delta_double(), Some(0));
        }
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(compare_report(&[]).unwrap().is_empty());
        let mut rows = t1_rows();
        rows[0].alpha = 0.6;
        assert_eq!(
            compare_report(&rows),
            Err(ReportError::MismatchedGrid { period: 1 })
        );
    }

    #[test]
    fn csv_line_format() {
        let rows = t1_rows();
        let text = results_csv_string(&rows[1..]);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "period,model,alpha,status,objective,single_covered,double_covered,relocation_cost,wall_ms"
        );
        assert!(lines
            .next()
            .unwrap()
            .starts_with("1,DRP,0.50,Optimal,3.000000,1,0,0.000000,"));
        assert_eq!(results_csv_string(&[]).lines().count(), 1);
    }

    #[test]
    fn repeated_sweeps_match() {
        assert_eq!(
            strip_timing(&results_csv_string(&t1_rows())),
            strip_timing(&results_csv_string(&t1_rows()))
        );
    }
}
