//! Write the RP program of a generated instance in LP format, e.g. to hand
//! it to an external MILP solver.

use ems_relocation::{
    build_coverage_matrices, build_milp, export_lp, generator::generate_case_instance, ModelKind,
    PenaltyMatrix,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate_case_instance(1);
    let cov = build_coverage_matrices(&inst.travel_time, inst.r1, inst.r2)?;
    let pen = PenaltyMatrix::zeros(inst.num_stations(), inst.num_ambulances());
    let lp = build_milp(&inst, &cov, &pen, ModelKind::Rp)?;
    eprintln!("{} binaries, {} rows", lp.variables.len(), lp.rows.len());
    export_lp(&lp, std::io::stdout().lock())?;
    Ok(())
}
