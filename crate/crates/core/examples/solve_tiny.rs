//! Solve a two-zone, two-station instance with both models and check the
//! answer against exhaustive enumeration.

use ems_relocation::{
    brute_force, build_coverage_matrices, solve, Ambulance, DemandPoint, Instance, Matrix,
    ModelKind, PenaltyMatrix, SolverConfig, Station,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance {
        points: vec![
            DemandPoint { id: 0, d: 3.0, d1: 3.0, d2: 1.0 },
            DemandPoint { id: 1, d: 2.0, d1: 2.0, d2: 1.0 },
        ],
        stations: vec![Station { id: 0, capacity: 2 }, Station { id: 1, capacity: 2 }],
        ambulances: vec![
            Ambulance { id: 0, home_station: 0 },
            Ambulance { id: 1, home_station: 1 },
        ],
        travel_time: Matrix::from_rows(vec![vec![5.0, 20.0], vec![12.0, 5.0]])?,
        station_distance: Matrix::from_rows(vec![vec![0.0, 4.0], vec![4.0, 0.0]])?,
        r1: 7.0,
        r2: 15.0,
        alpha: 0.5,
    };
    let cov = build_coverage_matrices(&inst.travel_time, inst.r1, inst.r2)?;
    let penalties = PenaltyMatrix::zeros(2, 2);

    for kind in ModelKind::ALL {
        let sol = solve(&inst, &cov, &penalties, kind, &SolverConfig::default())?;
        let check = brute_force(&inst, &cov, &penalties, kind)?;
        let ev = sol.evaluation.as_ref().expect("feasible");
        println!(
            "{}: {} stations {} objective {:.3} (single {}, double {}), {} nodes",
            kind.label(),
            sol.status,
            sol.deployment.as_ref().unwrap(),
            ev.objective,
            ev.single_covered(),
            ev.double_covered(),
            sol.nodes_explored
        );
        assert_eq!(sol.objective(), check.objective());
    }
    Ok(())
}
