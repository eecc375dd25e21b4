//! Rolling re-optimization across periods.
//!
//! Period 1 starts from zero penalties with every ambulance at its home
//! station. Each later period derives `M[j][k]` from the stations the fleet
//! occupied at the end of the previous period, applies that period's
//! dispatch and return events, then re-solves for every α of the grid. One
//! "operating" α decides where the fleet actually moves.

use rayon::prelude::*;
use thiserror::Error;

use crate::coverage::build_coverage_matrices;
use crate::error::ModelError;
use crate::evaluation::ModelKind;
use crate::instance::{Ambulance, Instance, Matrix, PenaltyMatrix};
use crate::report::{HorizonTrace, PeriodRecord, SweepRow};
use crate::solver::{solve, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// The ambulance leaves on a mission and is unavailable.
    Dispatch { ambulance: usize },
    /// A busy ambulance becomes available again at `station`.
    Return { ambulance: usize, station: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    /// 1-based period in which the event takes effect.
    pub period: usize,
    pub kind: EventKind,
}

impl Event {
    pub fn dispatch(period: usize, ambulance: usize) -> Self {
        Self {
            period,
            kind: EventKind::Dispatch { ambulance },
        }
    }

    pub fn ret(period: usize, ambulance: usize, station: usize) -> Self {
        Self {
            period,
            kind: EventKind::Return { ambulance, station },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("ambulance {} does not exist", .0 + 1)]
    UnknownAmbulance(usize),
    #[error("ambulance {} is already busy", .0 + 1)]
    AlreadyBusy(usize),
    #[error("ambulance {} is not busy", .0 + 1)]
    NotBusy(usize),
    #[error("station {} does not exist", .0 + 1)]
    UnknownStation(usize),
    #[error("events must be sorted by period")]
    UnsortedEvents,
    #[error("event in period {period} lies beyond the {periods}-period horizon")]
    EventOutOfHorizon { period: usize, periods: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Fleet status at the start of a period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodState {
    /// 1-based.
    pub period: usize,
    /// Available ambulance ids, ascending.
    pub available: Vec<usize>,
    /// Station of each available ambulance.
    pub positions: Vec<usize>,
    /// Busy ambulance ids, ascending.
    pub busy: Vec<usize>,
    /// `m x available.len()`.
    pub penalties: PenaltyMatrix,
}

impl PeriodState {
    /// Period 1: everyone available at home, zero penalties.
    pub fn initial(instance: &Instance) -> Self {
        Self {
            period: 1,
            available: instance.ambulances.iter().map(|a| a.id).collect(),
            positions: instance.ambulances.iter().map(|a| a.home_station).collect(),
            busy: Vec::new(),
            penalties: init_penalties(instance.num_stations(), instance.num_ambulances()),
        }
    }

    /// Copy of `instance` whose fleet is the available ambulances, each
    /// homed at its current position.
    pub fn fleet_instance(&self, instance: &Instance) -> Instance {
        Instance {
            ambulances: self
                .available
                .iter()
                .zip(&self.positions)
                .map(|(&id, &home_station)| Ambulance { id, home_station })
                .collect(),
            ..instance.clone()
        }
    }
}

pub fn init_penalties(m: usize, fleet: usize) -> PenaltyMatrix {
    PenaltyMatrix::zeros(m, fleet)
}

/// Computes next-period penalties from the state's positions.
pub trait PenaltyRule: Sync {
    fn penalties(&self, state: &PeriodState, instance: &Instance)
        -> Result<PenaltyMatrix, DynamicsError>;
}

/// `M[j][k]` = distance from ambulance `k`'s current station to `j`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DistancePenalty;

impl PenaltyRule for DistancePenalty {
    fn penalties(
        &self,
        state: &PeriodState,
        instance: &Instance,
    ) -> Result<PenaltyMatrix, DynamicsError> {
        update_penalties(state, &instance.station_distance)
    }
}

fn distance_column(station_distance: &Matrix<f64>, from: usize) -> Result<Vec<f64>, DynamicsError> {
    if from >= station_distance.rows() {
        return Err(DynamicsError::UnknownStation(from));
    }
    Ok(station_distance.row(from).to_vec())
}

pub fn update_penalties(
    state: &PeriodState,
    station_distance: &Matrix<f64>,
) -> Result<PenaltyMatrix, DynamicsError> {
    let m = station_distance.rows();
    if station_distance.cols() != m {
        return Err(ModelError::DimensionMismatch {
            what: "station distance matrix",
            expected: format!("{m}x{m}"),
            found: format!("{m}x{}", station_distance.cols()),
        }
        .into());
    }
    let mut values = Matrix::filled(m, state.positions.len(), 0.0);
    for (k, &from) in state.positions.iter().enumerate() {
        for (j, v) in distance_column(station_distance, from)?.into_iter().enumerate() {
            values.set(j, k, v);
        }
    }
    Ok(PenaltyMatrix::new(values)?)
}

fn with_column(penalties: &PenaltyMatrix, at: usize, column: Option<&[f64]>) -> PenaltyMatrix {
    let old = penalties.matrix();
    let m = old.rows();
    let mut rows = old.to_rows();
    for (j, row) in rows.iter_mut().enumerate() {
        match column {
            Some(col) => row.insert(at, col[j]),
            None => {
                row.remove(at);
            }
        }
    }
    let values = if m == 0 {
        Matrix::filled(0, 0, 0.0)
    } else {
        Matrix::from_rows(rows).expect("rows stay rectangular")
    };
    PenaltyMatrix::new(values).expect("entries copied from a valid matrix")
}

/// Applies one event. Dispatch drops the ambulance and its penalty column;
/// Return reinserts it at `station` with a distance-based column (zero in
/// period 1, whose penalties are all zero).
pub fn apply_event(
    state: &PeriodState,
    event: &Event,
    station_distance: &Matrix<f64>,
) -> Result<PeriodState, DynamicsError> {
    let mut next = state.clone();
    match event.kind {
        EventKind::Dispatch { ambulance } => {
            let Some(pos) = state.available.iter().position(|&a| a == ambulance) else {
                return Err(if state.busy.contains(&ambulance) {
                    DynamicsError::AlreadyBusy(ambulance)
                } else {
                    DynamicsError::UnknownAmbulance(ambulance)
                });
            };
            next.available.remove(pos);
            next.positions.remove(pos);
            let at = next.busy.partition_point(|&b| b < ambulance);
            next.busy.insert(at, ambulance);
            next.penalties = with_column(&state.penalties, pos, None);
        }
        EventKind::Return { ambulance, station } => {
            let Some(pos) = state.busy.iter().position(|&a| a == ambulance) else {
                return Err(if state.available.contains(&ambulance) {
                    DynamicsError::NotBusy(ambulance)
                } else {
                    DynamicsError::UnknownAmbulance(ambulance)
                });
            };
            let column = if state.period <= 1 {
                if station >= station_distance.rows() {
                    return Err(DynamicsError::UnknownStation(station));
                }
                vec![0.0; station_distance.rows()]
            } else {
                distance_column(station_distance, station)?
            };
            next.busy.remove(pos);
            let at = next.available.partition_point(|&a| a < ambulance);
            next.available.insert(at, ambulance);
            next.positions.insert(at, station);
            next.penalties = with_column(&state.penalties, at, Some(&column));
        }
    }
    Ok(next)
}

/// Which α of the grid moves the fleet between periods.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum OperatingAlpha {
    /// Smallest α of the grid with a solution.
    #[default]
    SmallestFeasible,
    /// A specific grid value; if it has no solution the fleet stays put.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonConfig {
    pub periods: usize,
    pub operating_alpha: OperatingAlpha,
    pub solver: SolverConfig,
    /// Replaces the zero penalties of period 1 when set.
    pub initial_penalties: Option<PenaltyMatrix>,
}

impl HorizonConfig {
    pub fn new(periods: usize) -> Self {
        Self {
            periods,
            operating_alpha: OperatingAlpha::default(),
            solver: SolverConfig::default(),
            initial_penalties: None,
        }
    }
}

/// Runs the horizon with distance-based penalty updates.
pub fn run_horizon(
    instance: &Instance,
    events: &[Event],
    kind: ModelKind,
    alpha_grid: &[f64],
    config: &HorizonConfig,
) -> Result<HorizonTrace, DynamicsError> {
    run_horizon_with(instance, events, kind, alpha_grid, config, &DistancePenalty)
}

pub fn run_horizon_with(
    instance: &Instance,
    events: &[Event],
    kind: ModelKind,
    alpha_grid: &[f64],
    config: &HorizonConfig,
    rule: &dyn PenaltyRule,
) -> Result<HorizonTrace, DynamicsError> {
    if events.windows(2).any(|w| w[0].period > w[1].period) {
        return Err(DynamicsError::UnsortedEvents);
    }
    if let Some(ev) = events.iter().find(|e| e.period == 0 || e.period > config.periods) {
        return Err(DynamicsError::EventOutOfHorizon {
            period: ev.period,
            periods: config.periods,
        });
    }
    let cov = build_coverage_matrices(&instance.travel_time, instance.r1, instance.r2)?;

    let mut trace = HorizonTrace::default();
    let mut state = PeriodState::initial(instance);
    if let Some(p) = &config.initial_penalties {
        p.check_dims(instance.num_stations(), instance.num_ambulances())?;
        state.penalties = p.clone();
    }

    for period in 1..=config.periods {
        state.period = period;
        if period > 1 {
            state.penalties = rule.penalties(&state, instance)?;
        }
        for ev in events.iter().filter(|e| e.period == period) {
            state = apply_event(&state, ev, &instance.station_distance)?;
        }

        let fleet = state.fleet_instance(instance);
        let solutions = alpha_grid
            .par_iter()
            .map(|&alpha| solve(&fleet.with_alpha(alpha), &cov, &state.penalties, kind, &config.solver))
            .collect::<Result<Vec<_>, ModelError>>()?;

        let operating = match config.operating_alpha {
            OperatingAlpha::SmallestFeasible => alpha_grid
                .iter()
                .zip(&solutions)
                .filter(|(_, s)| s.deployment.is_some())
                .min_by(|a, b| a.0.total_cmp(b.0))
                .map(|(&a, s)| (a, s)),
            OperatingAlpha::Fixed(target) => alpha_grid
                .iter()
                .zip(&solutions)
                .find(|(&a, s)| a == target && s.deployment.is_some())
                .map(|(&a, s)| (a, s)),
        };

        trace.rows.extend(
            alpha_grid
                .iter()
                .zip(&solutions)
                .map(|(&alpha, sol)| SweepRow::from_solution(period, kind, alpha, sol)),
        );
        trace.periods.push(PeriodRecord {
            period,
            model: kind,
            available: state.available.clone(),
            positions: state.positions.clone(),
            penalties: state.penalties.clone(),
            deployments: alpha_grid
                .iter()
                .zip(&solutions)
                .map(|(&a, s)| (a, s.deployment.clone()))
                .collect(),
            operating_alpha: operating.map(|(a, _)| a),
        });

        if let Some((_, sol)) = operating {
            let dep = sol.deployment.as_ref().expect("filtered on deployment");
            state.positions = dep.station_of().to_vec();
        }
    }
    crate::report::sort_rows(&mut trace.rows);
    Ok(trace)
}
