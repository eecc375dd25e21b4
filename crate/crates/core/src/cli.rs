//! Command-line front end. [`run`] takes the argument vector and two output
//! streams and returns the process exit status, so it can be driven from
//! tests without spawning a process.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `solve`: the model is infeasible |
//! | 2 | usage, schema or validation error |
//! | 3 | a solver limit stopped the search before optimality was proven |
//! | 4 | a file could not be read or written |

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::coverage::build_coverage_matrices;
use crate::dynamics::{run_horizon, HorizonConfig, OperatingAlpha};
use crate::evaluation::{feasibility_certificate, ModelKind};
use crate::generator::generate_case_instance;
use crate::instance::{validate_instance, Deployment, Instance, PenaltyMatrix};
use crate::io::{self as fmtio, FormatError};
use crate::milp::{build_milp, to_lp_string};
use crate::report::{alpha_grid, compare_report, format_comparison, results_csv_string, SweepRow};
use crate::solver::{solve, SolverConfig, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ems-relocation", version, about = "Exact ambulance location and relocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one model at one alpha.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        /// Defaults to the instance's alpha.
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve every model over an alpha range and write a CSV.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_model, default_value = "rp,drp")]
        models: Vec<ModelKind>,
        #[arg(long, default_value_t = 0.90)]
        alpha_from: f64,
        #[arg(long, default_value_t = 1.00)]
        alpha_to: f64,
        #[arg(long, default_value_t = 0.01)]
        alpha_step: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Re-optimize period by period under dispatch/return events.
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        events: PathBuf,
        #[arg(long, alias = "model", value_delimiter = ',', value_parser = parse_model, default_value = "rp,drp")]
        models: Vec<ModelKind>,
        /// Comma-separated alpha values; defaults to 0.90, 0.91, ..., 1.00.
        #[arg(long, value_delimiter = ',')]
        alpha_grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2)]
        periods: usize,
        /// `smallest` (first feasible alpha of the grid) or a grid value.
        #[arg(long, default_value = "smallest", value_parser = parse_operating_alpha)]
        operating_alpha: OperatingAlpha,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Write the binary program in LP format.
    ExportLp {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long)]
        alpha: Option<f64>,
        /// Standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an instance (and optionally a penalty matrix) for errors.
    Validate {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Write a seeded case-scale synthetic instance.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    instance: PathBuf,
    /// m x K relocation penalties; zeros when omitted.
    #[arg(long)]
    penalties: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long)]
    time_limit_secs: Option<f64>,
    #[arg(long)]
    no_symmetry: bool,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, CliError> {
        let time_limit = match self.time_limit_secs {
            Some(s) if !(s.is_finite() && s >= 0.0) => {
                return Err(CliError::Usage(format!("invalid time limit {s}")))
            }
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        Ok(SolverConfig {
            node_limit: self.node_limit,
            time_limit,
            symmetry_breaking: !self.no_symmetry,
            ..SolverConfig::default()
        })
    }
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|_| format!("unknown model `{s}` (expected rp or drp)"))
}

fn parse_operating_alpha(s: &str) -> Result<OperatingAlpha, String> {
    if s.eq_ignore_ascii_case("smallest") {
        return Ok(OperatingAlpha::SmallestFeasible);
    }
    s.parse()
        .map(OperatingAlpha::Fixed)
        .map_err(|_| format!("expected `smallest` or a number, got `{s}`"))
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Solve {
            input,
            model,
            alpha,
            solver,
        } => cmd_solve(&input, model, alpha, &solver.config()?, out),
        Command::Sweep {
            input,
            models,
            alpha_from,
            alpha_to,
            alpha_step,
            out: path,
            solver,
        } => {
            if !(alpha_step > 0.0) {
                return Err(usage("--alpha-step must be positive"));
            }
            let (inst, pen) = load(&input)?;
            let grid = alpha_grid(alpha_from, alpha_to, alpha_step);
            check_grid(&grid)?;
            let rows = crate::report::alpha_sweep(&inst, &models, &grid, &pen, &solver.config()?)
                .map_err(usage)?;
            write_file(&path, &results_csv_string(&rows))?;
            print_comparison(&rows, &models, out)?;
            Ok(rows_code(&rows))
        }
        Command::Simulate {
            input,
            events,
            models,
            alpha_grid: grid,
            periods,
            operating_alpha,
            out: path,
            solver,
        } => {
            let inst = load_instance(&input.instance)?;
            let initial = match &input.penalties {
                Some(p) => Some(load_penalties(p, &inst)?),
                None => None,
            };
            let events = fmtio::parse_events(&fmtio::read_to_string(&events)?)?;
            let grid = grid.unwrap_or_else(|| alpha_grid(0.90, 1.00, 0.01));
            check_grid(&grid)?;
            if periods == 0 {
                return Err(usage("--periods must be at least 1"));
            }
            let config = HorizonConfig {
                periods,
                operating_alpha,
                solver: solver.config()?,
                initial_penalties: initial,
            };
            let mut traces = Vec::new();
            for &kind in &models {
                traces.push(run_horizon(&inst, &events, kind, &grid, &config).map_err(usage)?);
            }
            let trace = crate::report::HorizonTrace::merge(traces);
            write_file(&path, &results_csv_string(&trace.rows))?;
            for rec in &trace.periods {
                let moved = match rec.operating_alpha {
                    Some(a) => format!("operating alpha {a:.2}"),
                    None => "no feasible alpha, fleet stays".to_string(),
                };
                let ids: Vec<String> = rec.available.iter().map(|k| (k + 1).to_string()).collect();
                writeln!(
                    out,
                    "period {} {}: {} available [{}], {moved}",
                    rec.period,
                    rec.model.label(),
                    rec.available.len(),
                    ids.join(", ")
                )
                .map_err(|e| CliError::Io(e.to_string()))?;
            }
            Ok(rows_code(&trace.rows))
        }
        Command::ExportLp {
            input,
            model,
            alpha,
            out: path,
        } => {
            let (inst, pen) = load(&input)?;
            let inst = with_alpha(inst, alpha)?;
            let cov = build_coverage_matrices(&inst.travel_time, inst.r1, inst.r2).map_err(usage)?;
            let lp = build_milp(&inst, &cov, &pen, model).map_err(usage)?;
            emit(path.as_deref(), &to_lp_string(&lp), out)?;
            Ok(EXIT_OK)
        }
        Command::Validate { input } => {
            let text = fmtio::read_to_string(&input.instance)?;
            let inst = fmtio::parse_instance(&text)?;
            let report = validate_instance(&inst);
            for issue in &report.issues {
                writeln!(out, "{issue}").map_err(|e| CliError::Io(e.to_string()))?;
            }
            if !report.is_valid() {
                return Ok(EXIT_USAGE);
            }
            if let Some(p) = &input.penalties {
                load_penalties(p, &inst)?;
            }
            writeln!(
                out,
                "ok: {} points, {} stations, {} ambulances",
                inst.num_points(),
                inst.num_stations(),
                inst.num_ambulances()
            )
            .map_err(|e| CliError::Io(e.to_string()))?;
            Ok(EXIT_OK)
        }
        Command::Generate { seed, out: path } => {
            let inst = generate_case_instance(seed);
            emit(path.as_deref(), &fmtio::write_instance(&inst), out)?;
            if let Some(p) = path {
                let _ = writeln!(err, "wrote {}", p.display());
            }
            Ok(EXIT_OK)
        }
    }
}

fn cmd_solve(
    input: &InputArgs,
    model: ModelKind,
    alpha: Option<f64>,
    config: &SolverConfig,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (inst, pen) = load(input)?;
    let inst = with_alpha(inst, alpha)?;
    let cov = build_coverage_matrices(&inst.travel_time, inst.r1, inst.r2).map_err(usage)?;
    let sol = solve(&inst, &cov, &pen, model, config).map_err(usage)?;

    let mut text = format!("model: {}\nalpha: {}\nstatus: {}\n", model.label(), inst.alpha, sol.status);
    match (&sol.deployment, &sol.evaluation) {
        (Some(dep), Some(ev)) => {
            text += &format!("deployment: {dep}\n");
            text += &format!("objective: {:.6}\n", ev.objective);
            text += &format!("relocation_cost: {:.6}\n", ev.relocation_cost);
            text += &format!("single_covered: {}\n", ev.single_covered());
            text += &format!("double_covered: {}\n", ev.double_covered());
            text += &format!("c1: {:?}\nc2: {:?}\n", ev.c1, ev.c2);
        }
        _ if sol.status == Status::Infeasible => {
            for line in infeasibility_reasons(&inst, &cov, model) {
                text += &format!("violation: {line}\n");
            }
        }
        _ => {}
    }
    text += &format!("nodes: {}\n", sol.nodes_explored);
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(match sol.status {
        Status::Optimal => EXIT_OK,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::LimitReached => EXIT_LIMIT,
    })
}

/// Unreachable points if any; otherwise what the fleet's current
/// positions violate.
fn infeasibility_reasons(inst: &Instance, cov: &crate::CoverageMatrices, model: ModelKind) -> Vec<String> {
    let unreachable = cov.unreachable_points();
    if !unreachable.is_empty() {
        return unreachable
            .iter()
            .map(|i| format!("constraint (2), point {}: no station within r2", i + 1))
            .collect();
    }
    let home: Result<Deployment, _> = inst.home_deployment();
    match home.and_then(|dep| feasibility_certificate(inst, cov, &dep, model)) {
        Ok(v) if !v.is_empty() => v.iter().map(ToString::to_string).collect(),
        _ => vec![format!(
            "constraint ({}): no deployment reaches the required share",
            model.proportional_constraint()
        )],
    }
}

fn rows_code(rows: &[SweepRow]) -> i32 {
    if rows.iter().any(|r| r.status == Status::LimitReached) {
        EXIT_LIMIT
    } else {
        EXIT_OK
    }
}

fn print_comparison(rows: &[SweepRow], models: &[ModelKind], out: &mut dyn Write) -> Result<(), CliError> {
    let text = if models.contains(&ModelKind::Rp) && models.contains(&ModelKind::Drp) {
        format_comparison(&compare_report(rows).map_err(usage)?)
    } else {
        let mut s = String::new();
        for r in rows {
            s += &format!(
                "{} alpha {:.2}: {} single {} double {}\n",
                r.model.label(),
                r.alpha,
                r.status,
                r.single_covered,
                r.double_covered
            );
        }
        s
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(e.to_string()))
}

fn check_grid(grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(usage("alpha grid is empty"));
    }
    if let Some(a) = grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(usage(format!("alpha {a} outside [0, 1]")));
    }
    Ok(())
}

fn with_alpha(inst: Instance, alpha: Option<f64>) -> Result<Instance, CliError> {
    match alpha {
        Some(a) if !(0.0..=1.0).contains(&a) => Err(usage(format!("alpha {a} outside [0, 1]"))),
        Some(a) => Ok(inst.with_alpha(a)),
        None => Ok(inst),
    }
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Ok(fmtio::read_instance(path)?)
}

fn load_penalties(path: &Path, inst: &Instance) -> Result<PenaltyMatrix, CliError> {
    let text = fmtio::read_to_string(path)?;
    Ok(fmtio::parse_penalties(&text, inst.num_stations(), inst.num_ambulances())?)
}

fn load(input: &InputArgs) -> Result<(Instance, PenaltyMatrix), CliError> {
    let inst = load_instance(&input.instance)?;
    let pen = match &input.penalties {
        Some(p) => load_penalties(p, &inst)?,
        None => PenaltyMatrix::zeros(inst.num_stations(), inst.num_ambulances()),
    };
    Ok((inst, pen))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
