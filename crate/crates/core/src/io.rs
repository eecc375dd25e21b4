//! JSON documents for instances, event scripts and penalty matrices.
//!
//! All indices in documents are 1-based. Instance layout:
//!
//! ```json
//! {
//!   "points": [{"id": 1, "d": 3.0, "d1": 3.0, "d2": 1.0}, ...],
//!   "stations": [{"id": 1, "capacity": 2}, ...],
//!   "ambulances": [{"id": 1, "home_station": 1}, ...],
//!   "travel_time": [[5.0, 20.0], [12.0, 5.0]],
//!   "station_distance": [[0.0, 4.0], [4.0, 0.0]],
//!   "r1": 7.0,
//!   "r2": 15.0,
//!   "alpha": 0.5
//! }
//! ```
//!
//! `d` defaults to `d1` and `alpha` to [`DEFAULT_ALPHA`] when omitted.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Event, EventKind};
use crate::instance::{
    validate_instance, Ambulance, DemandPoint, Instance, Matrix, PenaltyMatrix, Station,
};

pub const DEFAULT_ALPHA: f64 = 0.9;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid instance:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FormatError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    d1: f64,
    d2: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StationDoc {
    id: usize,
    capacity: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmbulanceDoc {
    id: usize,
    home_station: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    points: Vec<PointDoc>,
    stations: Vec<StationDoc>,
    ambulances: Vec<AmbulanceDoc>,
    travel_time: Vec<Vec<f64>>,
    station_distance: Vec<Vec<f64>>,
    r1: f64,
    r2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    period: usize,
    kind: EventKindDoc,
    ambulance: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    station: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EventKindDoc {
    Dispatch,
    Return,
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        FormatError::schema(path, e.into_inner().to_string())
    })
}

fn one_based(value: usize, path: String) -> Result<usize, FormatError> {
    value
        .checked_sub(1)
        .ok_or_else(|| FormatError::schema(path, "indices are 1-based, got 0"))
}

fn matrix(rows: Vec<Vec<f64>>, field: &str) -> Result<Matrix<f64>, FormatError> {
    Matrix::from_rows(rows).map_err(|e| FormatError::schema(field, e.to_string()))
}

/// Parses an instance document without semantic validation.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let doc: InstanceDoc = from_json(text)?;

    let mut points = Vec::with_capacity(doc.points.len());
    for (i, p) in doc.points.into_iter().enumerate() {
        if p.id != i + 1 {
            return Err(FormatError::schema(
                format!("points[{i}].id"),
                format!("expected id {}, got {}", i + 1, p.id),
            ));
        }
        points.push(DemandPoint {
            id: i,
            d: p.d.unwrap_or(p.d1),
            d1: p.d1,
            d2: p.d2,
        });
    }
    let mut stations = Vec::with_capacity(doc.stations.len());
    for (j, s) in doc.stations.into_iter().enumerate() {
        if s.id != j + 1 {
            return Err(FormatError::schema(
                format!("stations[{j}].id"),
                format!("expected id {}, got {}", j + 1, s.id),
            ));
        }
        stations.push(Station {
            id: j,
            capacity: s.capacity,
        });
    }
    let mut ambulances = Vec::with_capacity(doc.ambulances.len());
    for (k, a) in doc.ambulances.into_iter().enumerate() {
        if a.id != k + 1 {
            return Err(FormatError::schema(
                format!("ambulances[{k}].id"),
                format!("expected id {}, got {}", k + 1, a.id),
            ));
        }
        ambulances.push(Ambulance {
            id: k,
            home_station: one_based(a.home_station, format!("ambulances[{k}].home_station"))?,
        });
    }

    Ok(Instance {
        points,
        stations,
        ambulances,
        travel_time: matrix(doc.travel_time, "travel_time")?,
        station_distance: matrix(doc.station_distance, "station_distance")?,
        r1: doc.r1,
        r2: doc.r2,
        alpha: doc.alpha.unwrap_or(DEFAULT_ALPHA),
    })
}

/// Parses and validates an instance document. Validation warnings are
/// tolerated; errors are returned as [`FormatError::Invalid`].
pub fn load_instance(text: &str) -> Result<Instance, FormatError> {
    let instance = parse_instance(text)?;
    let report = validate_instance(&instance);
    if !report.is_valid() {
        return Err(FormatError::Invalid(
            report.errors().map(|e| e.message.clone()).collect(),
        ));
    }
    Ok(instance)
}

pub fn read_instance(path: &Path) -> Result<Instance, FormatError> {
    load_instance(&read(path)?)
}

/// Serializes an instance; `d` is always written explicitly so that
/// `load_instance(&write_instance(x)) == x`.
pub fn write_instance(instance: &Instance) -> String {
    let doc = InstanceDoc {
        points: instance
            .points
            .iter()
            .map(|p| PointDoc {
                id: p.id + 1,
                d: Some(p.d),
                d1: p.d1,
                d2: p.d2,
            })
            .collect(),
        stations: instance
            .stations
            .iter()
            .map(|s| StationDoc {
                id: s.id + 1,
                capacity: s.capacity,
            })
            .collect(),
        ambulances: instance
            .ambulances
            .iter()
            .map(|a| AmbulanceDoc {
                id: a.id + 1,
                home_station: a.home_station + 1,
            })
            .collect(),
        travel_time: instance.travel_time.to_rows(),
        station_distance: instance.station_distance.to_rows(),
        r1: instance.r1,
        r2: instance.r2,
        alpha: Some(instance.alpha),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("instance serializes");
    text.push('\n');
    text
}

/// Parses an event script: a JSON list of
/// `{"period": 2, "kind": "dispatch", "ambulance": 3}` or
/// `{"period": 3, "kind": "return", "ambulance": 3, "station": 5}`.
pub fn parse_events(text: &str) -> Result<Vec<Event>, FormatError> {
    let docs: Vec<EventDoc> = from_json(text)?;
    docs.into_iter()
        .enumerate()
        .map(|(e, doc)| {
            if doc.period == 0 {
                return Err(FormatError::schema(
                    format!("[{e}].period"),
                    "periods start at 1",
                ));
            }
            let ambulance = one_based(doc.ambulance, format!("[{e}].ambulance"))?;
            let kind = match (doc.kind, doc.station) {
                (EventKindDoc::Dispatch, None) => EventKind::Dispatch { ambulance },
                (EventKindDoc::Dispatch, Some(_)) => {
                    return Err(FormatError::schema(
                        format!("[{e}].station"),
                        "dispatch events take no station",
                    ))
                }
                (EventKindDoc::Return, Some(s)) => EventKind::Return {
                    ambulance,
                    station: one_based(s, format!("[{e}].station"))?,
                },
                (EventKindDoc::Return, None) => {
                    return Err(FormatError::schema(
                        format!("[{e}].station"),
                        "return events require a station",
                    ))
                }
            };
            Ok(Event {
                period: doc.period,
                kind,
            })
        })
        .collect()
}

pub fn write_events(events: &[Event]) -> String {
    let docs: Vec<EventDoc> = events
        .iter()
        .map(|ev| match ev.kind {
            EventKind::Dispatch { ambulance } => EventDoc {
                period: ev.period,
                kind: EventKindDoc::Dispatch,
                ambulance: ambulance + 1,
                station: None,
            },
            EventKind::Return { ambulance, station } => EventDoc {
                period: ev.period,
                kind: EventKindDoc::Return,
                ambulance: ambulance + 1,
                station: Some(station + 1),
            },
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&docs).expect("events serialize");
    text.push('\n');
    text
}

/// Parses an `m x |K|` penalty matrix given as a list of station rows.
pub fn parse_penalties(text: &str, m: usize, fleet: usize) -> Result<PenaltyMatrix, FormatError> {
    let rows: Vec<Vec<f64>> = from_json(text)?;
    let values = matrix(rows, "penalties")?;
    if values.rows() != m || values.cols() != fleet {
        return Err(FormatError::schema(
            "penalties",
            format!(
                "expected {m}x{fleet} (stations x ambulances), got {}x{}",
                values.rows(),
                values.cols()
            ),
        ));
    }
    PenaltyMatrix::new(values).map_err(|e| FormatError::schema("penalties", e.to_string()))
}

pub fn read_to_string(path: &Path) -> Result<String, FormatError> {
    read(path)
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}
