//! Exact search over deployments.
//!
//! Ambulances are assigned one at a time in index order; the children of a
//! node are the stations that still have room, in increasing index order.
//! Because children are visited lexicographically and an incumbent is only
//! replaced by a strictly better leaf, the returned optimum is the
//! lexicographically smallest `station_of` among all optimal deployments.
//!
//! Pruning combines two admissible bounds:
//!
//! * [`SearchModel::node_bound`]: full coverage value minus the penalties
//!   already committed and the cheapest possible penalty of every
//!   unassigned ambulance.
//! * a marginal-gain bound: every further ambulance placed at station `j`
//!   raises the coverage value by at most the sum, over points `j` reaches
//!   within `r1`, of the largest single-step gain still open for that point.
//!
//! Subtrees that cannot reach full `r2` coverage or the proportional target
//! with the remaining ambulances are cut as well.

use std::time::{Duration, Instant};

use crate::coverage::CoverageMatrices;
use crate::error::{ModelError, SolveError};
use crate::evaluation::{
    evaluate_deployment, meets_proportion, Evaluation, ModelKind, ModelWeights, OBJECTIVE_TOL,
};
use crate::instance::{Deployment, Instance, PenaltyMatrix};

/// Largest enumeration [`brute_force`] accepts.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

const TIME_CHECK_INTERVAL: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest `station_of` vector among optimal deployments.
    #[default]
    Lexicographic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Force nondecreasing stations among ambulances whose penalty columns
    /// are identical.
    pub symmetry_breaking: bool,
    /// Disable to enumerate every (symmetry-reduced) leaf.
    pub pruning: bool,
    pub tie_break: TieBreak,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            node_limit: None,
            time_limit: None,
            symmetry_breaking: true,
            pruning: true,
            tie_break: TieBreak::Lexicographic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    LimitReached,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Optimal => "Optimal",
            Status::Infeasible => "Infeasible",
            Status::LimitReached => "LimitReached",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    /// Optimal deployment, or the incumbent when a limit was hit.
    pub deployment: Option<Deployment>,
    pub evaluation: Option<Evaluation>,
    pub nodes_explored: u64,
    /// Upper bound on the optimum. Equals the objective when optimal and is
    /// `-inf` when infeasible.
    pub best_bound: f64,
    pub wall_time: Duration,
}

impl Solution {
    pub fn objective(&self) -> Option<f64> {
        self.evaluation.as_ref().map(|e| e.objective)
    }
}

/// Precomputed data for searching one model of one instance.
#[derive(Debug, Clone)]
pub struct SearchModel {
    n: usize,
    m: usize,
    fleet: usize,
    w_single: Vec<f64>,
    w_double: Vec<f64>,
    w_prop: Vec<f64>,
    gamma: Vec<Vec<u32>>,
    delta: Vec<Vec<u32>>,
    /// `penalty[k * m + j]`.
    penalty: Vec<f64>,
    capacity: Vec<u32>,
    full_value: f64,
    rhs: f64,
    /// `sum_{k' >= k} min_j M[j][k']`, length `fleet + 1`.
    min_penalty_suffix: Vec<f64>,
    /// Previous ambulance with the same penalty column.
    twin_of: Vec<Option<usize>>,
}

impl SearchModel {
    pub fn new(
        instance: &Instance,
        cov: &CoverageMatrices,
        penalties: &PenaltyMatrix,
        kind: ModelKind,
    ) -> Result<Self, ModelError> {
        let (n, m, fleet) = (
            instance.num_points(),
            instance.num_stations(),
            instance.num_ambulances(),
        );
        if cov.num_points() != n || cov.num_stations() != m {
            return Err(ModelError::DimensionMismatch {
                what: "coverage matrices",
                expected: format!("{n}x{m}"),
                found: format!("{}x{}", cov.num_points(), cov.num_stations()),
            });
        }
        penalties.check_dims(m, fleet)?;
        let w = ModelWeights::new(instance, kind);

        let mut penalty = Vec::with_capacity(fleet * m);
        for k in 0..fleet {
            penalty.extend(penalties.column(k));
        }
        let mut min_penalty_suffix = vec![0.0; fleet + 1];
        for k in (0..fleet).rev() {
            let col = &penalty[k * m..(k + 1) * m];
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            min_penalty_suffix[k] = min_penalty_suffix[k + 1] + if m == 0 { 0.0 } else { min };
        }
        let twin_of = (0..fleet)
            .map(|k| {
                let col = &penalty[k * m..(k + 1) * m];
                (0..k).rev().find(|&p| &penalty[p * m..(p + 1) * m] == col)
            })
            .collect();

        Ok(Self {
            n,
            m,
            fleet,
            full_value: w.full_coverage_value(),
            rhs: w.proportional_rhs(instance.alpha),
            w_single: w.single,
            w_double: w.double,
            w_prop: w.proportional,
            gamma: (0..m)
                .map(|j| cov.gamma_column(j).ones().map(|i| i as u32).collect())
                .collect(),
            delta: (0..m)
                .map(|j| cov.delta_column(j).ones().map(|i| i as u32).collect())
                .collect(),
            penalty,
            capacity: instance.capacities(),
            min_penalty_suffix,
            twin_of,
        })
    }

    #[inline]
    fn m_jk(&self, j: usize, k: usize) -> f64 {
        self.penalty[k * self.m + j]
    }

    /// Bound for a partial assignment of ambulances `0..assigned.len()`:
    /// full coverage value, minus committed penalties, minus the cheapest
    /// penalty of each unassigned ambulance.
    pub fn node_bound(&self, assigned: &[usize]) -> f64 {
        let committed: f64 = assigned
            .iter()
            .enumerate()
            .map(|(k, &j)| self.m_jk(j, k))
            .sum();
        self.full_value - committed - self.min_penalty_suffix[assigned.len()]
    }

    /// The bound the search actually prunes with at this partial
    /// assignment: the smaller of [`Self::node_bound`] and the
    /// marginal-gain bound. `None` if the feasibility look-ahead already
    /// rules the subtree out.
    pub fn pruning_bound(&self, assigned: &[usize]) -> Option<f64> {
        let mut state = State::new(self);
        for &j in assigned {
            state.push(self, j);
        }
        state.pruning_bound(self)
    }

    /// Whether `twin_of` lets ambulance `k` use station `j` given the
    /// stations already chosen.
    #[inline]
    fn symmetry_allows(&self, assigned: &[usize], k: usize, j: usize) -> bool {
        match self.twin_of[k] {
            Some(p) => j >= assigned[p],
            None => true,
        }
    }
}

/// Incremental search state along the current DFS path.
struct State {
    c1: Vec<u32>,
    c2: Vec<u32>,
    load: Vec<u32>,
    assigned: Vec<usize>,
    uncovered_r2: usize,
    value: Vec<f64>,
    cost: Vec<f64>,
    prop: Vec<f64>,
}

impl State {
    fn new(model: &SearchModel) -> Self {
        let mut value = Vec::with_capacity(model.fleet + 1);
        let mut cost = Vec::with_capacity(model.fleet + 1);
        let mut prop = Vec::with_capacity(model.fleet + 1);
        value.push(0.0);
        cost.push(0.0);
        prop.push(0.0);
        Self {
            c1: vec![0; model.n],
            c2: vec![0; model.n],
            load: vec![0; model.m],
            assigned: Vec::with_capacity(model.fleet),
            uncovered_r2: model.n,
            value,
            cost,
            prop,
        }
    }

    #[inline]
    fn value(&self) -> f64 {
        *self.value.last().unwrap()
    }

    #[inline]
    fn cost(&self) -> f64 {
        *self.cost.last().unwrap()
    }

    #[inline]
    fn prop(&self) -> f64 {
        *self.prop.last().unwrap()
    }

    fn push(&mut self, model: &SearchModel, j: usize) {
        let k = self.assigned.len();
        let mut dv = 0.0;
        let mut dp = 0.0;
        for &i in &model.gamma[j] {
            let i = i as usize;
            self.c1[i] += 1;
            match self.c1[i] {
                1 => {
                    dv += model.w_single[i];
                    dp += model.w_prop[i];
                }
                2 => dv += model.w_double[i],
                _ => {}
            }
        }
        for &i in &model.delta[j] {
            let i = i as usize;
            if self.c2[i] == 0 {
                self.uncovered_r2 -= 1;
            }
            self.c2[i] += 1;
        }
        self.load[j] += 1;
        self.assigned.push(j);
        self.value.push(self.value() + dv);
        self.cost.push(self.cost() + model.m_jk(j, k));
        self.prop.push(self.prop() + dp);
    }

    fn pop(&mut self, model: &SearchModel) {
        let j = self.assigned.pop().expect("pop on empty path");
        self.value.pop();
        self.cost.pop();
        self.prop.pop();
        self.load[j] -= 1;
        for &i in &model.gamma[j] {
            self.c1[i as usize] -= 1;
        }
        for &i in &model.delta[j] {
            let i = i as usize;
            self.c2[i] -= 1;
            if self.c2[i] == 0 {
                self.uncovered_r2 += 1;
            }
        }
    }

    fn is_leaf_feasible(&self, model: &SearchModel) -> bool {
        self.uncovered_r2 == 0 && meets_proportion(self.prop(), model.rhs)
    }

    /// [`SearchModel::node_bound`] computed from the incremental state.
    #[inline]
    fn node_bound(&self, model: &SearchModel) -> f64 {
        model.full_value - self.cost() - model.min_penalty_suffix[self.assigned.len()]
    }

    fn pruning_bound(&self, model: &SearchModel) -> Option<f64> {
        let depth = self.assigned.len();
        let remaining = model.fleet - depth;
        let base = self.node_bound(model);
        if remaining == 0 {
            return Some(base.min(self.value() - self.cost()));
        }

        let mut best_gain = vec![f64::NEG_INFINITY; remaining];
        let mut max_new_r2 = 0usize;
        let mut max_new_prop = 0.0f64;
        for j in 0..model.m {
            if self.load[j] >= model.capacity[j] {
                continue;
            }
            let mut gain = 0.0;
            let mut new_prop = 0.0;
            for &i in &model.gamma[j] {
                let i = i as usize;
                match self.c1[i] {
                    0 => {
                        gain += model.w_single[i].max(model.w_double[i]);
                        new_prop += model.w_prop[i];
                    }
                    1 => gain += model.w_double[i],
                    _ => {}
                }
            }
            if self.uncovered_r2 > 0 {
                let new_r2 = model.delta[j]
                    .iter()
                    .filter(|&&i| self.c2[i as usize] == 0)
                    .count();
                max_new_r2 = max_new_r2.max(new_r2);
            }
            max_new_prop = max_new_prop.max(new_prop);
            for (slot, k) in best_gain.iter_mut().zip(depth..model.fleet) {
                *slot = slot.max(gain - model.m_jk(j, k));
            }
        }

        if self.uncovered_r2 > remaining * max_new_r2 {
            return None;
        }
        if !meets_proportion(self.prop() + remaining as f64 * max_new_prop, model.rhs) {
            return None;
        }
        let gain_bound = self.value() - self.cost() + best_gain.iter().sum::<f64>();
        Some(base.min(gain_bound))
    }
}

struct Search<'a> {
    model: &'a SearchModel,
    config: &'a SolverConfig,
    state: State,
    incumbent: Option<(f64, Vec<usize>)>,
    nodes: u64,
    started: Instant,
    aborted: bool,
    open_bound: f64,
}

impl<'a> Search<'a> {
    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if let Some(limit) = self.config.node_limit {
            if self.nodes >= limit {
                self.aborted = true;
            }
        }
        if let Some(limit) = self.config.time_limit {
            if self.nodes.is_multiple_of(TIME_CHECK_INTERVAL) && self.started.elapsed() >= limit {
                self.aborted = true;
            }
        }
        self.aborted
    }

    fn dive(&mut self) {
        self.nodes += 1;
        let model = self.model;
        let depth = self.state.assigned.len();

        if depth == model.fleet {
            if self.state.is_leaf_feasible(model) {
                let objective = self.state.value() - self.state.cost();
                let better = match &self.incumbent {
                    None => true,
                    Some((best, _)) => objective > best + OBJECTIVE_TOL,
                };
                if better {
                    self.incumbent = Some((objective, self.state.assigned.clone()));
                }
            }
            return;
        }

        let bound = if self.config.pruning {
            match self.state.pruning_bound(model) {
                None => return,
                Some(b) => b,
            }
        } else {
            self.state.node_bound(model)
        };
        if self.config.pruning {
            if let Some((best, _)) = &self.incumbent {
                if bound <= best + OBJECTIVE_TOL {
                    return;
                }
            }
        }

        for j in 0..model.m {
            if self.state.load[j] >= model.capacity[j] {
                continue;
            }
            if self.config.symmetry_breaking && !model.symmetry_allows(&self.state.assigned, depth, j)
            {
                continue;
            }
            if self.out_of_budget() {
                self.open_bound = self.open_bound.max(bound);
                return;
            }
            self.state.push(model, j);
            self.dive();
            self.state.pop(model);
            if self.aborted {
                self.open_bound = self.open_bound.max(bound);
                return;
            }
        }
    }
}

fn finish(
    instance: &Instance,
    cov: &CoverageMatrices,
    penalties: &PenaltyMatrix,
    kind: ModelKind,
    incumbent: Option<Vec<usize>>,
    aborted: bool,
    open_bound: f64,
    nodes: u64,
    started: Instant,
) -> Result<Solution, ModelError> {
    let (deployment, evaluation) = match incumbent {
        Some(station_of) => {
            let dep = Deployment::new(station_of, &instance.capacities())?;
            let eval = evaluate_deployment(instance, cov, &dep, penalties, kind)?;
            (Some(dep), Some(eval))
        }
        None => (None, None),
    };
    let objective = evaluation.as_ref().map(|e| e.objective);
    let (status, best_bound) = match (aborted, objective) {
        (false, Some(obj)) => (Status::Optimal, obj),
        (false, None) => (Status::Infeasible, f64::NEG_INFINITY),
        (true, obj) => (
            Status::LimitReached,
            open_bound.max(obj.unwrap_or(f64::NEG_INFINITY)),
        ),
    };
    Ok(Solution {
        status,
        deployment,
        evaluation,
        nodes_explored: nodes,
        best_bound,
        wall_time: started.elapsed(),
    })
}

/// Solves `kind` exactly by branch-and-bound. `alpha` comes from the
/// instance. Deterministic for identical inputs unless a time limit fires.
pub fn solve(
    instance: &Instance,
    cov: &CoverageMatrices,
    penalties: &PenaltyMatrix,
    kind: ModelKind,
    config: &SolverConfig,
) -> Result<Solution, ModelError> {
    let started = Instant::now();
    let model = SearchModel::new(instance, cov, penalties, kind)?;

    if !cov.unreachable_points().is_empty() {
        return finish(
            instance,
            cov,
            penalties,
            kind,
            None,
            false,
            f64::NEG_INFINITY,
            0,
            started,
        );
    }

    let mut search = Search {
        model: &model,
        config,
        state: State::new(&model),
        incumbent: None,
        nodes: 0,
        started,
        aborted: false,
        open_bound: f64::NEG_INFINITY,
    };
    search.dive();
    let Search {
        incumbent,
        aborted,
        open_bound,
        nodes,
        ..
    } = search;
    finish(
        instance,
        cov,
        penalties,
        kind,
        incumbent.map(|(_, s)| s),
        aborted,
        open_bound,
        nodes,
        started,
    )
}

/// Evaluates every capacity-feasible deployment. Intended as a test
/// oracle; refuses inputs with more than [`BRUTE_FORCE_LIMIT`] candidate
/// assignments.
pub fn brute_force(
    instance: &Instance,
    cov: &CoverageMatrices,
    penalties: &PenaltyMatrix,
    kind: ModelKind,
) -> Result<Solution, SolveError> {
    let started = Instant::now();
    let (m, fleet) = (instance.num_stations(), instance.num_ambulances());
    let leaves = (m as f64).powi(fleet as i32);
    if leaves > BRUTE_FORCE_LIMIT {
        return Err(SolveError::TooLarge {
            leaves,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    penalties.check_dims(m, fleet)?;
    let capacities = instance.capacities();

    let mut best: Option<(f64, Deployment)> = None;
    let mut enumerated = 0u64;
    let mut station_of = vec![0usize; fleet];
    if m > 0 || fleet == 0 {
        'enumerate: loop {
            if let Ok(dep) = Deployment::new(station_of.clone(), &capacities) {
                enumerated += 1;
                let eval = evaluate_deployment(instance, cov, &dep, penalties, kind)?;
                if eval.feasible {
                    let better = match &best {
                        None => true,
                        Some((obj, _)) => eval.objective > obj + OBJECTIVE_TOL,
                    };
                    if better {
                        best = Some((eval.objective, dep));
                    }
                }
            }
            // odometer, last ambulance fastest: lexicographic order
            let mut pos = fleet;
            loop {
                if pos == 0 {
                    break 'enumerate;
                }
                pos -= 1;
                station_of[pos] += 1;
                if station_of[pos] < m {
                    break;
                }
                station_of[pos] = 0;
            }
        }
    }

    Ok(finish(
        instance,
        cov,
        penalties,
        kind,
        best.map(|(_, d)| d.station_of().to_vec()),
        false,
        f64::NEG_INFINITY,
        enumerated,
        started,
    )?)
}
