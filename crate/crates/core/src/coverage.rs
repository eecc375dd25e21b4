//! Reachability of demand points from stations within the two response
//! thresholds, and per-point coverage counts for a deployment.

use fixedbitset::FixedBitSet;

use crate::error::ModelError;
use crate::instance::{Deployment, Matrix};

/// `gamma[i][j]`: point `i` reachable from station `j` within `r1`.
/// `delta[i][j]`: same within `r2`.
///
/// Stored column-wise: one bitset of points per station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMatrices {
    n: usize,
    gamma: Vec<FixedBitSet>,
    delta: Vec<FixedBitSet>,
}

impl CoverageMatrices {
    /// Builds the matrices directly from boolean rows (`n x m`).
    ///
    /// Fails if the shapes differ or some `gamma` entry is set where `delta`
    /// is not.
    pub fn from_rows(gamma: &Matrix<bool>, delta: &Matrix<bool>) -> Result<Self, ModelError> {
        if gamma.rows() != delta.rows() || gamma.cols() != delta.cols() {
            return Err(ModelError::DimensionMismatch {
                what: "coverage matrices",
                expected: format!("{}x{}", gamma.rows(), gamma.cols()),
                found: format!("{}x{}", delta.rows(), delta.cols()),
            });
        }
        let (n, m) = (gamma.rows(), gamma.cols());
        let mut g = vec![FixedBitSet::with_capacity(n); m];
        let mut d = vec![FixedBitSet::with_capacity(n); m];
        for i in 0..n {
            for j in 0..m {
                if *gamma.get(i, j) && !*delta.get(i, j) {
                    return Err(ModelError::InvalidInstance(format!(
                        "point {} reachable from station {} within r1 but not r2",
                        i + 1,
                        j + 1
                    )));
                }
                g[j].set(i, *gamma.get(i, j));
                d[j].set(i, *delta.get(i, j));
            }
        }
        Ok(Self {
            n,
            gamma: g,
            delta: d,
        })
    }

    #[inline]
    pub fn num_points(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_stations(&self) -> usize {
        self.gamma.len()
    }

    #[inline]
    pub fn gamma(&self, i: usize, j: usize) -> bool {
        self.gamma[j].contains(i)
    }

    #[inline]
    pub fn delta(&self, i: usize, j: usize) -> bool {
        self.delta[j].contains(i)
    }

    /// Points station `j` reaches within `r1`.
    #[inline]
    pub fn gamma_column(&self, j: usize) -> &FixedBitSet {
        &self.gamma[j]
    }

    /// Points station `j` reaches within `r2`.
    #[inline]
    pub fn delta_column(&self, j: usize) -> &FixedBitSet {
        &self.delta[j]
    }

    pub fn gamma_matrix(&self) -> Matrix<bool> {
        self.to_matrix(&self.gamma)
    }

    pub fn delta_matrix(&self) -> Matrix<bool> {
        self.to_matrix(&self.delta)
    }

    fn to_matrix(&self, cols: &[FixedBitSet]) -> Matrix<bool> {
        let mut out = Matrix::filled(self.n, cols.len(), false);
        for (j, col) in cols.iter().enumerate() {
            for i in col.ones() {
                out.set(i, j, true);
            }
        }
        out
    }

    /// Points that no station reaches within `r2`.
    pub fn unreachable_points(&self) -> Vec<usize> {
        let mut any = FixedBitSet::with_capacity(self.n);
        for col in &self.delta {
            any.union_with(col);
        }
        any.toggle_range(..);
        any.ones().collect()
    }
}

/// Thresholds travel times into coverage matrices. Comparison is `<=`.
pub fn build_coverage_matrices(
    travel_time: &Matrix<f64>,
    r1: f64,
    r2: f64,
) -> Result<CoverageMatrices, ModelError> {
    if !(r1 < r2) {
        return Err(ModelError::ThresholdOrder { r1, r2 });
    }
    let (n, m) = (travel_time.rows(), travel_time.cols());
    let mut gamma = vec![FixedBitSet::with_capacity(n); m];
    let mut delta = vec![FixedBitSet::with_capacity(n); m];
    for i in 0..n {
        for j in 0..m {
            let t = *travel_time.get(i, j);
            if !(t.is_finite() && t >= 0.0) {
                return Err(ModelError::InvalidTravelTime {
                    point: i,
                    station: j,
                    value: t,
                });
            }
            gamma[j].set(i, t <= r1);
            delta[j].set(i, t <= r2);
        }
    }
    Ok(CoverageMatrices { n, gamma, delta })
}

/// Number of ambulances within `r1` (`c1`) and `r2` (`c2`) of each point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageCounts {
    pub c1: Vec<u32>,
    pub c2: Vec<u32>,
}

pub fn coverage_counts(
    cov: &CoverageMatrices,
    dep: &Deployment,
) -> Result<CoverageCounts, ModelError> {
    let m = cov.num_stations();
    if let Some((k, &j)) = dep.station_of().iter().enumerate().find(|(_, &j)| j >= m) {
        return Err(ModelError::UnknownStation {
            ambulance: k,
            station: j,
        });
    }
    let mut c1 = vec![0u32; cov.num_points()];
    let mut c2 = vec![0u32; cov.num_points()];
    for (j, load) in dep.station_load(m).into_iter().enumerate() {
        if load == 0 {
            continue;
        }
        for i in cov.gamma_column(j).ones() {
            c1[i] += load;
        }
        for i in cov.delta_column(j).ones() {
            c2[i] += load;
        }
    }
    Ok(CoverageCounts { c1, c2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(rows: Vec<Vec<f64>>) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    fn bools(rows: Vec<Vec<u8>>) -> Matrix<bool> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|v| v == 1).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn thresholds_two_by_two() {
        let cov = build_coverage_matrices(&t(vec![vec![5.0, 20.0], vec![12.0, 5.0]]), 7.0, 15.0)
            .unwrap();
        assert_eq!(cov.gamma_matrix(), bools(vec![vec![1, 0], vec![0, 1]]));
        assert_eq!(cov.delta_matrix(), bools(vec![vec![1, 0], vec![1, 1]]));
    }

    #[test]
    fn zero_times_cover_everything() {
        let cov = build_coverage_matrices(&Matrix::filled(3, 4, 0.0), 1.0, 2.0).unwrap();
        assert!(cov.gamma_matrix().iter().all(|&b| b));
        assert!(cov.delta_matrix().iter().all(|&b| b));
    }

    #[test]
    fn boundary_is_inclusive() {
        let cov = build_coverage_matrices(&t(vec![vec![7.0, 15.0]]), 7.0, 15.0).unwrap();
        assert!(cov.gamma(0, 0));
        assert!(!cov.gamma(0, 1));
        assert!(cov.delta(0, 1));
    }

    #[test]
    fn threshold_order_error() {
        let err = build_coverage_matrices(&Matrix::filled(1, 1, 0.0), 10.0, 10.0).unwrap_err();
        assert!(matches!(err, ModelError::ThresholdOrder { .. }));
    }

    #[test]
    fn single_and_stacked_assignments() {
        let g = bools(vec![vec![1, 0], vec![0, 1]]);
        let cov = CoverageMatrices::from_rows(&g, &g).unwrap();
        let dep = Deployment::new(vec![0], &[1, 1]).unwrap();
        assert_eq!(coverage_counts(&cov, &dep).unwrap().c1, vec![1, 0]);

        let g = bools(vec![vec![1, 0], vec![1, 0]]);
        let cov = CoverageMatrices::from_rows(&g, &g).unwrap();
        let dep = Deployment::new(vec![0, 0], &[2, 2]).unwrap();
        assert_eq!(coverage_counts(&cov, &dep).unwrap().c1, vec![2, 2]);
    }

    #[test]
    fn unknown_station_is_a_dimension_error() {
        let cov = CoverageMatrices::from_rows(&Matrix::filled(1, 1, true), &Matrix::filled(1, 1, true))
            .unwrap();
        let dep = Deployment::new(vec![1], &[1, 1]).unwrap();
        assert!(coverage_counts(&cov, &dep).is_err());
    }

    #[test]
    fn unreachable_points_listed() {
        let cov = build_coverage_matrices(&t(vec![vec![5.0, 20.0], vec![20.0, 30.0]]), 7.0, 15.0)
            .unwrap();
        assert_eq!(cov.unreachable_points(), vec![1]);
    }

    fn brute_counts(g: &Matrix<bool>, station_of: &[usize]) -> Vec<u32> {
        // sum_j sum_k gamma_ij y_jk with y built explicitly
        let m = g.cols();
        (0..g.rows())
            .map(|i| {
                let mut c = 0;
                for j in 0..m {
                    for &s in station_of {
                        if s == j && *g.get(i, j) {
                            c += 1;
                        }
                    }
                }
                c
            })
            .collect()
    }

    proptest! {
        #[test]
        fn counts_match_double_sum(
            times in prop::collection::vec(0.0f64..30.0, 15),
            station_of in prop::collection::vec(0usize..3, 4),
            perm_seed in any::<u64>(),
        ) {
            let tt = Matrix::from_rows(times.chunks(3).map(|c| c.to_vec()).collect()).unwrap();
            let cov = build_coverage_matrices(&tt, 10.0, 20.0).unwrap();
            let dep = Deployment::new(station_of.clone(), &[4, 4, 4]).unwrap();
            let counts = coverage_counts(&cov, &dep).unwrap();
            prop_assert_eq!(&counts.c1, &brute_counts(&cov.gamma_matrix(), &station_of));
            prop_assert_eq!(&counts.c2, &brute_counts(&cov.delta_matrix(), &station_of));
            for i in 0..5 {
                for j in 0..3 {
                    prop_assert!(!cov.gamma(i, j) || cov.delta(i, j));
                }
                prop_assert!(counts.c1[i] <= counts.c2[i]);
                prop_assert!(counts.c2[i] as usize <= station_of.len());
            }
            let mut shuffled = station_of.clone();
            shuffled.rotate_left((perm_seed % 4) as usize);
            shuffled.swap(0, (perm_seed as usize / 4) % 4);
            let dep2 = Deployment::new(shuffled, &[4, 4, 4]).unwrap();
            prop_assert_eq!(coverage_counts(&cov, &dep2).unwrap(), counts);
        }
    }
}
