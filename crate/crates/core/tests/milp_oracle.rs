mod common;

use std::collections::HashMap;

use common::{all_deployments, close, random_case};
use ems_relocation::generator::generate_case_instance;
use ems_relocation::milp::{to_lp_string, RowSense};
use ems_relocation::{build_coverage_matrices, build_milp, evaluate_deployment, ModelKind, PenaltyMatrix};
use proptest::prelude::*;

/// Minimal reader for the subset of LP syntax the writer emits.
struct ParsedLp {
    objective: HashMap<String, f64>,
    rows: Vec<(String, HashMap<String, f64>, String, f64)>,
    binaries: Vec<String>,
}

fn parse_terms(tokens: &[&str]) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    let mut sign = 1.0;
    let mut coef = 1.0;
    for &t in tokens {
        match t {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => match t.parse::<f64>() {
                Ok(v) => coef = v,
                Err(_) => {
                    *out.entry(t.to_string()).or_insert(0.0) += sign * coef;
                    sign = 1.0;
                    coef = 1.0;
                }
            },
        }
    }
    out.retain(|_, v| *v != 0.0);
    out
}

fn parse_lp(text: &str) -> ParsedLp {
    let mut section = "";
    let mut statements: Vec<String> = Vec::new();
    let mut objective = String::new();
    let mut binaries = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        match trimmed {
            "Maximize" | "Subject To" | "Binary" | "End" => {
                section = match trimmed {
                    "Maximize" => "obj",
                    "Subject To" => "rows",
                    "Binary" => "bin",
                    _ => "end",
                };
                continue;
            }
            _ if trimmed.starts_with('\\') => continue,
            _ => {}
        }
        let continuation = line.starts_with("   ");
        match section {
            "obj" => {
                objective.push(' ');
                objective.push_str(trimmed);
            }
            "rows" if continuation => {
                let last = statements.last_mut().unwrap();
                last.push(' ');
                last.push_str(trimmed);
            }
            "rows" => statements.push(trimmed.to_string()),
            "bin" => binaries.extend(trimmed.split_whitespace().map(String::from)),
            _ => {}
        }
    }
    let obj_tokens: Vec<&str> = objective.split_whitespace().skip(1).collect();
    let rows = statements
        .iter()
        .map(|s| {
            let (name, body) = s.split_once(':').unwrap();
            let tokens: Vec<&str> = body.split_whitespace().collect();
            let n = tokens.len();
            (
                name.to_string(),
                parse_terms(&tokens[..n - 2]),
                tokens[n - 2].to_string(),
                tokens[n - 1].parse().unwrap(),
            )
        })
        .collect();
    ParsedLp {
        objective: parse_terms(&obj_tokens),
        rows,
        binaries,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feasible_deployments_satisfy_every_row(seed in any::<u64>(), drp in any::<bool>()) {
        let kind = if drp { ModelKind::Drp } else { ModelKind::Rp };
        let case = random_case(seed, 8, 5, 4);
        let lp = build_milp(&case.instance, &case.cov, &case.penalties, kind).unwrap();
        for dep in all_deployments(&case.instance) {
            let ev = evaluate_deployment(&case.instance, &case.cov, &dep, &case.penalties, kind).unwrap();
            let values = lp.solution_vector(&case.cov, &dep).unwrap();
            let violated = lp.violated_rows(&values);
            prop_assert_eq!(ev.feasible, violated.is_empty(), "{:?} {:?}", dep, violated);
            prop_assert!(close(lp.objective_value(&values), ev.objective));
        }
    }

    #[test]
    fn lp_text_round_trips(seed in any::<u64>(), drp in any::<bool>()) {
        let kind = if drp { ModelKind::Drp } else { ModelKind::Rp };
        let case = random_case(seed, 8, 5, 4);
        let lp = build_milp(&case.instance, &case.cov, &case.penalties, kind).unwrap();
        let text = to_lp_string(&lp);
        prop_assert_eq!(&text, &to_lp_string(&lp));
        let parsed = parse_lp(&text);

        let names: Vec<String> = lp.variables.iter().map(|v| v.name.clone()).collect();
        prop_assert_eq!(&parsed.binaries, &names);
        for v in &lp.variables {
            prop_assert_eq!(parsed.objective.get(&v.name).copied().unwrap_or(0.0), v.objective);
        }
        prop_assert_eq!(parsed.rows.len(), lp.rows.len());
        for (row, (name, terms, sense, rhs)) in lp.rows.iter().zip(&parsed.rows) {
            prop_assert_eq!(&row.name, name);
            let expected_sense = match row.sense {
                RowSense::Ge => ">=",
                RowSense::Le => "<=",
                RowSense::Eq => "=",
            };
            prop_assert_eq!(expected_sense, sense.as_str());
            prop_assert_eq!(row.rhs, *rhs);
            let mut want: HashMap<String, f64> = HashMap::new();
            for &(v, c) in &row.terms {
                *want.entry(lp.variables[v].name.clone()).or_insert(0.0) += c;
            }
            want.retain(|_, c| *c != 0.0);
            prop_assert_eq!(&want, terms);
        }
    }
}

#[test]
fn case_scale_program_has_190_binaries() {
    let inst = generate_case_instance(1);
    let cov = build_coverage_matrices(&inst.travel_time, inst.r1, inst.r2).unwrap();
    let lp = build_milp(&inst, &cov, &PenaltyMatrix::zeros(12, 8), ModelKind::Drp).unwrap();
    assert_eq!(lp.variables.len(), 47 * 2 + 12 * 8);
    assert_eq!(lp.rows.len(), 47 * 3 + 1 + 8 + 12);
    // zero penalties leave the y variables out of the objective
    assert!(lp.variables[94..].iter().all(|v| v.objective == 0.0));
}
