//! Seeded synthetic instances with the dimensions of a county-scale EMS
//! system: 47 demand zones, 12 stations, 8 ambulances, a 10 minute
//! response standard and roughly 25 ambulance calls per day.
//!
//! Zones and stations are scattered over a square region. Travel times are
//! road-factor-inflated straight-line times plus a fixed turnout delay.
//! Every zone is guaranteed to be reachable within `r2` from at least
//! [`GeneratorConfig::min_r2_stations`] stations and within `r1` from at
//! least [`GeneratorConfig::min_r1_stations`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Ambulance, DemandPoint, Instance, Matrix, Station};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub points: usize,
    pub stations: usize,
    pub ambulances: usize,
    pub capacity: u32,
    pub r1: f64,
    pub r2: f64,
    pub alpha: f64,
    /// Side of the square region, km.
    pub side_km: f64,
    /// Average road speed, km/h.
    pub speed_kmh: f64,
    /// Minutes added to every travel time.
    pub turnout_min: f64,
    /// Expected ambulance calls per period over the whole region.
    pub calls_per_period: f64,
    pub min_r2_stations: usize,
    pub min_r1_stations: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            points: 47,
            stations: 12,
            ambulances: 8,
            capacity: 2,
            r1: 10.0,
            r2: 20.0,
            alpha: 0.9,
            side_km: 16.0,
            speed_kmh: 40.0,
            turnout_min: 1.5,
            calls_per_period: 25.0,
            min_r2_stations: 2,
            min_r1_stations: 1,
        }
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Case-scale instance with default settings.
pub fn generate_case_instance(seed: u64) -> Instance {
    generate(&GeneratorConfig::default(), seed)
}

pub fn generate(config: &GeneratorConfig, seed: u64) -> Instance {
    assert!(
        config.min_r2_stations.max(config.min_r1_stations) <= config.stations,
        "cannot require more reachable stations than exist"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = config.side_km;
    let minutes_per_km = 60.0 / config.speed_kmh;

    let stations: Vec<(f64, f64)> = (0..config.stations)
        .map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
        .collect();

    let mut points = Vec::with_capacity(config.points);
    let mut rows = Vec::with_capacity(config.points);
    while points.len() < config.points {
        let at = (rng.gen_range(0.0..side), rng.gen_range(0.0..side));
        let row: Vec<f64> = stations
            .iter()
            .map(|&s| {
                let road_factor = rng.gen_range(1.1..1.4);
                round3(config.turnout_min + dist(at, s) * road_factor * minutes_per_km)
            })
            .collect();
        let within = |r: f64| row.iter().filter(|&&t| t <= r).count();
        if within(config.r2) >= config.min_r2_stations && within(config.r1) >= config.min_r1_stations
        {
            points.push(at);
            rows.push(row);
        }
    }

    let raw: Vec<f64> = (0..config.points).map(|_| rng.gen_range(0.2..1.0)).collect();
    let scale = config.calls_per_period / raw.iter().sum::<f64>();
    let demand: Vec<DemandPoint> = raw
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let d1 = round3(r * scale);
            let d2 = round3(d1 * rng.gen_range(0.05..0.35));
            DemandPoint { id: i, d: d1, d1, d2 }
        })
        .collect();

    let mut station_distance = Matrix::filled(config.stations, config.stations, 0.0);
    for a in 0..config.stations {
        for b in a + 1..config.stations {
            let v = round3(dist(stations[a], stations[b]));
            station_distance.set(a, b, v);
            station_distance.set(b, a, v);
        }
    }

    Instance {
        points: demand,
        stations: (0..config.stations)
            .map(|id| Station {
                id,
                capacity: config.capacity,
            })
            .collect(),
        ambulances: (0..config.ambulances)
            .map(|id| Ambulance {
                id,
                home_station: id % config.stations,
            })
            .collect(),
        travel_time: Matrix::from_rows(rows).expect("rows have equal length"),
        station_distance,
        r1: config.r1,
        r2: config.r2,
        alpha: config.alpha,
    }
}
