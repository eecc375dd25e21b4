#![allow(dead_code)]

use ems_relocation::{
    build_coverage_matrices, evaluate_deployment, Ambulance, CoverageMatrices, DemandPoint,
    Deployment, Evaluation, Instance, Matrix, ModelKind, PenaltyMatrix, Station,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHAS: [f64; 4] = [0.0, 0.5, 0.9, 1.0];

/// Small random instance with a penalty matrix. Travel times straddle
/// r1 = 10 and r2 = 20 so that γ and δ are both nontrivial.
pub struct Case {
    pub instance: Instance,
    pub penalties: PenaltyMatrix,
    pub cov: CoverageMatrices,
}

fn r3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

pub fn random_case(seed: u64, max_n: usize, max_m: usize, max_k: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let fleet = rng.gen_range(1..=max_k);

    let mut caps: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=fleet as u32)).collect();
    while caps.iter().sum::<u32>() < fleet as u32 {
        let j = rng.gen_range(0..m);
        caps[j] += 1;
    }

    // Zones are "near" a few stations so most instances stay r2-feasible.
    let travel: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..m).map(|_| r3(rng.gen_range(0.0..35.0))).collect();
            if rng.gen_bool(0.8) {
                let j = rng.gen_range(0..m);
                row[j] = r3(rng.gen_range(0.0..20.0));
            }
            row
        })
        .collect();

    let points = (0..n)
        .map(|i| {
            let d1 = if rng.gen_bool(0.1) { 0.0 } else { r3(rng.gen_range(0.0..5.0)) };
            let d2 = r3(d1 * rng.gen_range(0.0..0.5));
            let d = if rng.gen_bool(0.5) { d1 } else { r3(rng.gen_range(0.0..5.0)) };
            DemandPoint { id: i, d, d1, d2 }
        })
        .collect();

    let mut sd = Matrix::filled(m, m, 0.0);
    for a in 0..m {
        for b in a + 1..m {
            let v = r3(rng.gen_range(0.5..10.0));
            sd.set(a, b, v);
            sd.set(b, a, v);
        }
    }

    let zero_m = rng.gen_bool(0.3);
    let mut pen = Matrix::filled(m, fleet, 0.0);
    if !zero_m {
        for j in 0..m {
            for k in 0..fleet {
                if !rng.gen_bool(0.3) {
                    pen.set(j, k, r3(rng.gen_range(0.0..3.0)));
                }
            }
        }
    }

    let instance = Instance {
        points,
        stations: caps
            .iter()
            .enumerate()
            .map(|(id, &capacity)| Station { id, capacity })
            .collect(),
        ambulances: (0..fleet)
            .map(|id| Ambulance {
                id,
                home_station: rng.gen_range(0..m),
            })
            .collect(),
        travel_time: Matrix::from_rows(travel).unwrap(),
        station_distance: sd,
        r1: 10.0,
        r2: 20.0,
        alpha: ALPHAS[rng.gen_range(0..ALPHAS.len())],
    };
    let cov = build_coverage_matrices(&instance.travel_time, instance.r1, instance.r2).unwrap();
    Case {
        instance,
        penalties: PenaltyMatrix::new(pen).unwrap(),
        cov,
    }
}

/// Every capacity-feasible deployment, in lexicographic order.
pub fn all_deployments(instance: &Instance) -> Vec<Deployment> {
    let m = instance.num_stations();
    let fleet = instance.num_ambulances();
    let caps = instance.capacities();
    let mut out = Vec::new();
    let mut cur = vec![0usize; fleet];
    loop {
        if let Ok(d) = Deployment::new(cur.clone(), &caps) {
            out.push(d);
        }
        let mut k = fleet;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < m {
                break;
            }
            cur[k] = 0;
        }
    }
}

pub fn evaluate_all(case: &Case, kind: ModelKind) -> Vec<(Deployment, Evaluation)> {
    all_deployments(&case.instance)
        .into_iter()
        .map(|d| {
            let e = evaluate_deployment(&case.instance, &case.cov, &d, &case.penalties, kind).unwrap();
            (d, e)
        })
        .collect()
}

/// Feasible deployments attaining the best objective within `tol`.
pub fn argmax_set(evals: &[(Deployment, Evaluation)], tol: f64) -> Vec<Vec<usize>> {
    let best = evals
        .iter()
        .filter(|(_, e)| e.feasible)
        .map(|(_, e)| e.objective)
        .fold(f64::NEG_INFINITY, f64::max);
    evals
        .iter()
        .filter(|(_, e)| e.feasible && e.objective >= best - tol)
        .map(|(d, _)| d.station_of().to_vec())
        .collect()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}
