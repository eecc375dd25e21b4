//! Two periods on the case-scale instance: the whole fleet first, then one
//! ambulance leaves on a mission and the remaining seven are relocated
//! with distance penalties.

use ems_relocation::dynamics::{run_horizon, Event, HorizonConfig};
use ems_relocation::report::{default_alpha_grid, results_csv_string, strip_timing, HorizonTrace};
use ems_relocation::{generator::generate_case_instance, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = generate_case_instance(1);
    let events = [Event::dispatch(2, 7)];
    let config = HorizonConfig::new(2);
    let grid = default_alpha_grid();

    let traces = ModelKind::ALL
        .iter()
        .map(|&kind| run_horizon(&inst, &events, kind, &grid, &config))
        .collect::<Result<Vec<_>, _>>()?;
    let trace = HorizonTrace::merge(traces);

    for rec in &trace.periods {
        let moved = rec
            .operating_alpha
            .and_then(|a| rec.deployments.iter().find(|(g, _)| *g == a))
            .and_then(|(_, d)| d.as_ref());
        println!(
            "period {} {:>3}: {} ambulances, moved to {}",
            rec.period,
            rec.model.label(),
            rec.available.len(),
            moved.map_or("-".to_string(), |d| d.to_string())
        );
    }
    print!("{}", strip_timing(&results_csv_string(&trace.rows)));
    Ok(())
}
