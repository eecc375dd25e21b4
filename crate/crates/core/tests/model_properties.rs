mod common;

use common::{all_deployments, close, random_case, Case};
use ems_relocation::coverage::coverage_counts;
use ems_relocation::evaluation::ModelWeights;
use ems_relocation::io::{load_instance, write_instance};
use ems_relocation::{
    evaluate_deployment, greedy_coverage_decision, validate_instance, Ambulance, Deployment,
    Matrix, ModelKind, PenaltyMatrix,
};
use proptest::prelude::*;

fn pick(case: &Case, idx: prop::sample::Index) -> Option<Deployment> {
    let deps = all_deployments(&case.instance);
    (!deps.is_empty()).then(|| deps[idx.index(deps.len())].clone())
}

fn kinds() -> impl Strategy<Value = ModelKind> {
    prop_oneof![Just(ModelKind::Rp), Just(ModelKind::Drp)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gamma_implies_delta_and_counts_are_ordered(seed in any::<u64>(), idx in any::<prop::sample::Index>()) {
        let case = random_case(seed, 8, 5, 4);
        let (n, m) = (case.instance.num_points(), case.instance.num_stations());
        for i in 0..n {
            for j in 0..m {
                prop_assert!(!case.cov.gamma(i, j) || case.cov.delta(i, j));
            }
        }
        let dep = pick(&case, idx).unwrap();
        let counts = coverage_counts(&case.cov, &dep).unwrap();
        let fleet = dep.len() as u32;
        for i in 0..n {
            prop_assert!(counts.c1[i] <= counts.c2[i] && counts.c2[i] <= fleet);
        }
    }

    #[test]
    fn counts_ignore_ambulance_order(seed in any::<u64>(), idx in any::<prop::sample::Index>(), rot in 0usize..4) {
        let case = random_case(seed, 8, 5, 4);
        let dep = pick(&case, idx).unwrap();
        let mut stations = dep.station_of().to_vec();
        let r = rot % stations.len();
        stations.rotate_left(r);
        stations.reverse();
        let perm = Deployment::new(stations, &case.instance.capacities()).unwrap();
        prop_assert_eq!(
            coverage_counts(&case.cov, &dep).unwrap(),
            coverage_counts(&case.cov, &perm).unwrap()
        );
    }

    #[test]
    fn accepted_deployments_respect_assignment_and_capacity(seed in any::<u64>(), raw in prop::collection::vec(0usize..5, 1..5)) {
        let case = random_case(seed, 4, 5, 4);
        let m = case.instance.num_stations();
        let caps = case.instance.capacities();
        if let Ok(dep) = Deployment::new(raw.clone(), &caps) {
            let y = dep.to_y(m);
            for k in 0..raw.len() {
                prop_assert_eq!((0..m).filter(|&j| *y.get(j, k)).count(), 1);
            }
            for (j, &cap) in caps.iter().enumerate() {
                prop_assert!((0..raw.len()).filter(|&k| *y.get(j, k)).count() as u32 <= cap);
            }
        }
    }

    #[test]
    fn validation_is_idempotent(seed in any::<u64>()) {
        let case = random_case(seed, 8, 5, 4);
        let snapshot = case.instance.clone();
        let a = validate_instance(&case.instance);
        let b = validate_instance(&case.instance);
        prop_assert_eq!(a, b);
        prop_assert_eq!(&snapshot, &case.instance);
    }

    #[test]
    fn instance_text_round_trips(seed in any::<u64>()) {
        let case = random_case(seed, 8, 5, 4);
        prop_assume!(validate_instance(&case.instance).is_valid());
        let back = load_instance(&write_instance(&case.instance)).unwrap();
        prop_assert_eq!(back, case.instance);
    }

    #[test]
    fn reported_counts_match_coverage(seed in any::<u64>(), idx in any::<prop::sample::Index>(), kind in kinds()) {
        let case = random_case(seed, 8, 5, 4);
        let dep = pick(&case, idx).unwrap();
        let ev = evaluate_deployment(&case.instance, &case.cov, &dep, &case.penalties, kind).unwrap();
        prop_assert_eq!(ev.single_covered(), ev.c1.iter().filter(|&&c| c >= 1).count());
        prop_assert_eq!(ev.double_covered(), ev.c1.iter().filter(|&&c| c >= 2).count());
    }

    #[test]
    fn penalties_separate_from_coverage(seed in any::<u64>(), idx in any::<prop::sample::Index>(), kind in kinds()) {
        let case = random_case(seed, 8, 5, 4);
        let dep = pick(&case, idx).unwrap();
        let zero = PenaltyMatrix::zeros(case.instance.num_stations(), case.instance.num_ambulances());
        let with = evaluate_deployment(&case.instance, &case.cov, &dep, &case.penalties, kind).unwrap();
        let without = evaluate_deployment(&case.instance, &case.cov, &dep, &zero, kind).unwrap();
        let cost: f64 = dep
            .station_of()
            .iter()
            .enumerate()
            .map(|(k, &j)| case.penalties.get(j, k))
            .sum();
        prop_assert!(close(with.objective - without.objective, -cost));
        prop_assert_eq!(with.feasible, without.feasible);
    }

    #[test]
    fn swapping_twin_ambulances_changes_nothing(seed in any::<u64>(), idx in any::<prop::sample::Index>(), kind in kinds()) {
        let mut case = random_case(seed, 8, 5, 4);
        let fleet = case.instance.num_ambulances();
        prop_assume!(fleet >= 2);
        let m = case.instance.num_stations();
        let mut rows = case.penalties.matrix().to_rows();
        for row in rows.iter_mut().take(m) {
            row[1] = row[0];
        }
        case.penalties = PenaltyMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap();
        let dep = pick(&case, idx).unwrap();
        let mut swapped = dep.station_of().to_vec();
        swapped.swap(0, 1);
        let swapped = Deployment::new(swapped, &case.instance.capacities()).unwrap();
        let a = evaluate_deployment(&case.instance, &case.cov, &dep, &case.penalties, kind).unwrap();
        let b = evaluate_deployment(&case.instance, &case.cov, &swapped, &case.penalties, kind).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn adding_an_ambulance_never_hurts(seed in any::<u64>(), idx in any::<prop::sample::Index>(), extra in 0usize..5, kind in kinds()) {
        let case = random_case(seed, 8, 5, 4);
        let inst = &case.instance;
        let m = inst.num_stations();
        let dep = pick(&case, idx).unwrap();
        let j = extra % m;
        let mut grown_stations = dep.station_of().to_vec();
        grown_stations.push(j);
        let Ok(grown) = Deployment::new(grown_stations, &inst.capacities()) else {
            return Ok(());
        };
        let before = coverage_counts(&case.cov, &dep).unwrap();
        let after = coverage_counts(&case.cov, &grown).unwrap();
        for i in 0..inst.num_points() {
            prop_assert!(after.c1[i] >= before.c1[i] && after.c2[i] >= before.c2[i]);
        }

        let mut bigger = inst.clone();
        bigger.ambulances.push(Ambulance { id: inst.num_ambulances(), home_station: j });
        let small = evaluate_deployment(inst, &case.cov, &dep, &PenaltyMatrix::zeros(m, dep.len()), kind).unwrap();
        let large = evaluate_deployment(&bigger, &case.cov, &grown, &PenaltyMatrix::zeros(m, grown.len()), kind).unwrap();
        prop_assert!(large.objective >= small.objective - 1e-12);
    }
}

/// Best coverage value over every binary `(x1, x2)` allowed by the
/// linking rows, by enumeration of all `4^n` pairs.
fn exhaustive_coverage_value(c1: &[u32], w: &ModelWeights) -> f64 {
    let n = c1.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << (2 * n)) {
        let mut value = 0.0;
        let mut ok = true;
        for i in 0..n {
            let x1 = mask >> (2 * i) & 1;
            let x2 = mask >> (2 * i + 1) & 1;
            if x2 > x1 || x1 + x2 > c1[i] {
                ok = false;
                break;
            }
            value += w.single[i] * f64::from(x1) + w.double[i] * f64::from(x2);
        }
        if ok && value > best {
            best = value;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_x_attains_the_exhaustive_maximum(seed in any::<u64>(), idx in any::<prop::sample::Index>(), kind in kinds()) {
        let case = random_case(seed, 8, 5, 4);
        let dep = pick(&case, idx).unwrap();
        let ev = evaluate_deployment(&case.instance, &case.cov, &dep, &case.penalties, kind).unwrap();
        let w = ModelWeights::new(&case.instance, kind);
        let best = exhaustive_coverage_value(&ev.c1, &w);
        prop_assert!(close(ev.coverage_value, best), "{} vs {}", ev.coverage_value, best);
    }
}

#[test]
fn greedy_thresholds_counts() {
    assert_eq!(
        greedy_coverage_decision(&[0, 1, 2, 5]),
        (vec![false, true, true, true], vec![false, false, true, true])
    );
}
