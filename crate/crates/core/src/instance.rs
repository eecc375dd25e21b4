//! Problem data: demand points, stations, ambulances, travel times and the
//! thresholds that drive coverage, plus the validated [`Deployment`] and
//! [`PenaltyMatrix`] types shared by every model.
//!
//! Indices are 0-based everywhere in this crate. File formats and
//! human-facing reports add one.

use std::fmt;

use crate::error::ModelError;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a matrix from a list of rows. Every row must have the same
    /// length; an empty list yields a `0 x cols` matrix with `cols = 0`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, ModelError> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(ModelError::RaggedMatrix {
                    row: i,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n,
            cols,
            data,
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T> Matrix<T> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

/// A demand zone with its call intensities.
///
/// `d` weights double coverage in the RP model and drives its proportional
/// constraint; `d1`/`d2` are the simple and simultaneous intensities used
/// by the DRP model.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandPoint {
    pub id: usize,
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: usize,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ambulance {
    pub id: usize,
    /// Station the vehicle occupies at the start of the period.
    pub home_station: usize,
}

/// Complete problem data for one period.
///
/// Fields are public and unchecked; run [`validate_instance`] on anything
/// that did not come out of the loader.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub points: Vec<DemandPoint>,
    pub stations: Vec<Station>,
    pub ambulances: Vec<Ambulance>,
    /// `n x m`, minutes from station `j` to point `i`.
    pub travel_time: Matrix<f64>,
    /// `m x m`, used for distance-based relocation penalties.
    pub station_distance: Matrix<f64>,
    pub r1: f64,
    pub r2: f64,
    pub alpha: f64,
}

impl Instance {
    #[inline]
    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn num_stations(&self) -> usize {
        self.stations.len()
    }

    #[inline]
    pub fn num_ambulances(&self) -> usize {
        self.ambulances.len()
    }

    pub fn capacities(&self) -> Vec<u32> {
        self.stations.iter().map(|s| s.capacity).collect()
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    /// The deployment in which every ambulance stays at its home station.
    pub fn home_deployment(&self) -> Result<Deployment, ModelError> {
        Deployment::new(
            self.ambulances.iter().map(|a| a.home_station).collect(),
            &self.capacities(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Outcome of [`validate_instance`]. Warnings do not make an instance
/// invalid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    fn error(&mut self, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Error,
            message: message.into(),
        });
    }

    fn warning(&mut self, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Warning,
            message: message.into(),
        });
    }
}

fn nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Checks every data invariant of an instance. Never fails: problems are
/// returned as report entries, with 1-based indices in messages.
pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = instance.num_points();
    let m = instance.num_stations();
    let fleet = instance.num_ambulances();

    if n == 0 {
        report.error("at least one demand point is required");
    }
    if m == 0 {
        report.error("at least one station is required");
    }

    for (i, p) in instance.points.iter().enumerate() {
        if p.id != i {
            report.error(format!("point {}: id {} out of sequence", i + 1, p.id + 1));
        }
        for (name, v) in [("d", p.d), ("d1", p.d1), ("d2", p.d2)] {
            if !nonneg(v) {
                report.error(format!("point {}: {name} must be finite and >= 0, got {v}", i + 1));
            }
        }
        if p.d2 > p.d1 {
            report.warning(format!(
                "point {}: simultaneous intensity d2={} exceeds d1={}",
                i + 1,
                p.d2,
                p.d1
            ));
        }
    }

    for (j, s) in instance.stations.iter().enumerate() {
        if s.id != j {
            report.error(format!("station {}: id {} out of sequence", j + 1, s.id + 1));
        }
    }
    let total_capacity: u64 = instance.stations.iter().map(|s| u64::from(s.capacity)).sum();
    if total_capacity < fleet as u64 {
        report.error(format!(
            "insufficient total capacity: stations hold {total_capacity} but the fleet has {fleet} ambulances"
        ));
    }

    for (k, a) in instance.ambulances.iter().enumerate() {
        if a.home_station >= m {
            report.error(format!(
                "ambulance {}: home station {} does not exist",
                k + 1,
                a.home_station + 1
            ));
        }
    }

    let tt = &instance.travel_time;
    if tt.rows() != n || tt.cols() != m {
        report.error(format!(
            "travel_time must be {n}x{m}, got {}x{}",
            tt.rows(),
            tt.cols()
        ));
    } else {
        for i in 0..n {
            for j in 0..m {
                let v = *tt.get(i, j);
                if !nonneg(v) {
                    report.error(format!(
                        "travel_time[{}][{}] must be finite and >= 0, got {v}",
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
    }

    let sd = &instance.station_distance;
    if sd.rows() != m || sd.cols() != m {
        report.error(format!(
            "station_distance must be {m}x{m}, got {}x{}",
            sd.rows(),
            sd.cols()
        ));
    } else {
        for a in 0..m {
            if *sd.get(a, a) != 0.0 {
                report.error(format!("station_distance[{}][{}] must be 0", a + 1, a + 1));
            }
            for b in 0..m {
                let v = *sd.get(a, b);
                if !nonneg(v) {
                    report.error(format!(
                        "station_distance[{}][{}] must be finite and >= 0, got {v}",
                        a + 1,
                        b + 1
                    ));
                } else if b > a && v != *sd.get(b, a) {
                    report.error(format!(
                        "station_distance is not symmetric at ({}, {})",
                        a + 1,
                        b + 1
                    ));
                }
            }
        }
    }

    let (r1, r2) = (instance.r1, instance.r2);
    if !(r1.is_finite() && r1 > 0.0) {
        report.error(format!("r1 must be a positive real, got {r1}"));
    }
    if !(r2.is_finite() && r2 > 0.0) {
        report.error(format!("r2 must be a positive real, got {r2}"));
    }
    if !(r1 < r2) {
        report.error(format!("r1 < r2 required, got r1={r1} r2={r2}"));
    }
    if !(0.0..=1.0).contains(&instance.alpha) {
        report.error(format!("alpha must lie in [0, 1], got {}", instance.alpha));
    }

    report
}

/// Assignment of every ambulance to exactly one station, respecting station
/// capacities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Deployment {
    station_of: Vec<usize>,
}

impl Deployment {
    pub fn new(station_of: Vec<usize>, capacities: &[u32]) -> Result<Self, ModelError> {
        let mut load = vec![0u32; capacities.len()];
        for (k, &j) in station_of.iter().enumerate() {
            if j >= capacities.len() {
                return Err(ModelError::UnknownStation {
                    ambulance: k,
                    station: j,
                });
            }
            load[j] += 1;
        }
        if let Some(j) = (0..capacities.len()).find(|&j| load[j] > capacities[j]) {
            return Err(ModelError::CapacityExceeded {
                station: j,
                load: load[j],
                capacity: capacities[j],
            });
        }
        Ok(Self { station_of })
    }

    #[inline]
    pub fn station_of(&self) -> &[usize] {
        &self.station_of
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.station_of.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.station_of.is_empty()
    }

    /// Number of ambulances at each of `m` stations.
    pub fn station_load(&self, m: usize) -> Vec<u32> {
        let mut load = vec![0; m];
        for &j in &self.station_of {
            load[j] += 1;
        }
        load
    }

    /// The `y` variables as an `m x |K|` 0/1 matrix.
    pub fn to_y(&self, m: usize) -> Matrix<bool> {
        let mut y = Matrix::filled(m, self.station_of.len(), false);
        for (k, &j) in self.station_of.iter().enumerate() {
            y.set(j, k, true);
        }
        y
    }
}

impl fmt::Display for Deployment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, j) in self.station_of.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", j + 1)?;
        }
        write!(f, "]")
    }
}

/// Relocation penalties `M[j][k]`: cost of placing ambulance `k` at
/// station `j` in the current period.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyMatrix {
    values: Matrix<f64>,
}

impl PenaltyMatrix {
    pub fn new(values: Matrix<f64>) -> Result<Self, ModelError> {
        for j in 0..values.rows() {
            for k in 0..values.cols() {
                let v = *values.get(j, k);
                if !nonneg(v) {
                    return Err(ModelError::InvalidPenalty {
                        station: j,
                        ambulance: k,
                        value: v,
                    });
                }
            }
        }
        Ok(Self { values })
    }

    pub fn zeros(m: usize, fleet: usize) -> Self {
        Self {
            values: Matrix::filled(m, fleet, 0.0),
        }
    }

    #[inline]
    pub fn num_stations(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn fleet(&self) -> usize {
        self.values.cols()
    }

    #[inline]
    pub fn get(&self, station: usize, ambulance: usize) -> f64 {
        *self.values.get(station, ambulance)
    }

    pub fn column(&self, ambulance: usize) -> Vec<f64> {
        (0..self.values.rows())
            .map(|j| *self.values.get(j, ambulance))
            .collect()
    }

    pub fn matrix(&self) -> &Matrix<f64> {
        &self.values
    }

    /// `sum_k M[station_of[k]][k]`.
    pub fn cost_of(&self, dep: &Deployment) -> f64 {
        dep.station_of()
            .iter()
            .enumerate()
            .map(|(k, &j)| self.get(j, k))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub(crate) fn check_dims(&self, m: usize, fleet: usize) -> Result<(), ModelError> {
        if self.values.rows() != m || self.values.cols() != fleet {
            return Err(ModelError::DimensionMismatch {
                what: "penalty matrix",
                expected: format!("{m}x{fleet}"),
                found: format!("{}x{}", self.values.rows(), self.values.cols()),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Two points, two stations, one ambulance.
    pub fn t1() -> Instance {
        Instance {
            points: vec![
                DemandPoint {
                    id: 0,
                    d: 3.0,
                    d1: 3.0,
                    d2: 1.0,
                },
                DemandPoint {
                    id: 1,
                    d: 2.0,
                    d1: 2.0,
                    d2: 1.0,
                },
            ],
            stations: vec![
                Station { id: 0, capacity: 1 },
                Station { id: 1, capacity: 1 },
            ],
            ambulances: vec![Ambulance {
                id: 0,
                home_station: 0,
            }],
            travel_time: Matrix::from_rows(vec![vec![5.0, 20.0], vec![12.0, 5.0]]).unwrap(),
            station_distance: Matrix::from_rows(vec![vec![0.0, 4.0], vec![4.0, 0.0]]).unwrap(),
            r1: 7.0,
            r2: 15.0,
            alpha: 0.5,
        }
    }
}
