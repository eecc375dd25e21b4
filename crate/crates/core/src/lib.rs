//! Exact location and relocation of emergency vehicles.
//!
//! Two binary programs decide where a fleet of ambulances waits between
//! missions. Both require every demand point to be reachable within the
//! long threshold `r2` and a fraction `alpha` of demand to be reachable
//! within the short threshold `r1`:
//!
//! * [`ModelKind::Rp`] maximizes demand covered twice within `r1`;
//! * [`ModelKind::Drp`] rewards single coverage by the intensity of all
//!   calls and double coverage by the intensity of simultaneous calls.
//!
//! Both subtract relocation penalties `M[j][k]`. The [`dynamics`] module
//! runs the period-to-period protocol: zero penalties first, distance-based
//! penalties afterwards, and dispatch/return events that change the fleet.

pub mod cli;
pub mod coverage;
pub mod dynamics;
pub mod error;
pub mod evaluation;
pub mod generator;
pub mod io;
pub mod milp;
pub mod report;
pub mod solver;

pub mod instance;

pub use coverage::{build_coverage_matrices, coverage_counts, CoverageCounts, CoverageMatrices};
pub use error::{ModelError, SolveError};
pub use evaluation::{
    evaluate_deployment, feasibility_certificate, greedy_coverage_decision, Evaluation, ModelKind,
    Violation,
};
pub use instance::{
    validate_instance, Ambulance, DemandPoint, Deployment, Instance, Matrix, PenaltyMatrix,
    Station, ValidationReport,
};
pub use milp::{build_milp, export_lp, LinearProgram};
pub use solver::{brute_force, solve, Solution, SolverConfig, Status};
