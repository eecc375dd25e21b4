//! Sweep α from 0.90 to 1.00 on a generated case-scale instance and print
//! how the two models trade single against double coverage.
//!
//! `cargo run --release --example alpha_sweep -- [seed]`

use ems_relocation::report::{alpha_sweep, compare_report, default_alpha_grid, format_comparison};
use ems_relocation::{generator::generate_case_instance, ModelKind, PenaltyMatrix, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let inst = generate_case_instance(seed);
    let penalties = PenaltyMatrix::zeros(inst.num_stations(), inst.num_ambulances());
    let rows = alpha_sweep(
        &inst,
        &ModelKind::ALL,
        &default_alpha_grid(),
        &penalties,
        &SolverConfig::default(),
    )?;
    print!("{}", format_comparison(&compare_report(&rows)?));
    let slowest = rows.iter().map(|r| r.wall_time).max().unwrap_or_default();
    println!("slowest solve: {slowest:?}");
    Ok(())
}
