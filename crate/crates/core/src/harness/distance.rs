//! Two-sample statistical distances for the convergence harness.

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("samples must be nonempty")]
    EmptySample,
    #[error("sample dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
}

/// Classical two-sample Kolmogorov-Smirnov statistic on scalars (merge scan,
/// ties collapsed).
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, DistanceError> {
    if a.is_empty() || b.is_empty() {
        return Err(DistanceError::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.total_cmp(q));
    ys.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut stat = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        stat = stat.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(stat)
}

/// max over coordinates of the two-sample KS statistic.
pub fn ks_per_coordinate(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, DistanceError> {
    let d = check_dims(a, b)?;
    let mut worst = 0.0f64;
    for k in 0..d {
        let ak: Vec<f64> = a.iter().map(|v| v[k]).collect();
        let bk: Vec<f64> = b.iter().map(|v| v[k]).collect();
        worst = worst.max(ks_statistic(&ak, &bk)?);
    }
    Ok(worst)
}

/// Energy distance in V-statistic form:
/// 2 E|X - Y| - E|X - X'| - E|Y - Y'| with all pairs included (nonnegative).
pub fn energy_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, DistanceError> {
    let _ = check_dims(a, b)?;
    let cross = mean_pair_distance(a, b);
    let within_a = mean_pair_distance(a, a);
    let within_b = mean_pair_distance(b, b);
    Ok((2.0 * cross - within_a - within_b).max(0.0))
}

fn check_dims(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<usize, DistanceError> {
    if a.is_empty() || b.is_empty() {
        return Err(DistanceError::EmptySample);
    }
    let d = a[0].len();
    if b[0].len() != d {
        return Err(DistanceError::DimensionMismatch { a: d, b: b[0].len() });
    }
    Ok(d)
}

fn mean_pair_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    // Row sums in parallel, sequential total: reduction order is fixed, so
    // results do not depend on thread scheduling.
    let rows: Vec<f64> = a
        .par_iter()
        .map(|x| {
            let mut s = 0.0;
            for y in b {
                let mut acc = 0.0;
                for (xv, yv) in x.iter().zip(y) {
                    let d = xv - yv;
                    acc += d * d;
                }
                s += acc.sqrt();
            }
            s
        })
        .collect();
    rows.iter().sum::<f64>() / (a.len() as f64 * b.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceKind {
    KsPerCoordinate,
    Energy,
}

pub fn two_sample_distance(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    kind: DistanceKind,
) -> Result<f64, DistanceError> {
    match kind {
        DistanceKind::KsPerCoordinate => ks_per_coordinate(a, b),
        DistanceKind::Energy => energy_distance(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::PathRng;

    #[test]
    fn identical_samples_are_zero() {
        let a: Vec<Vec<f64>> = (0..100).map(|k| vec![k as f64 * 0.01]).collect();
        assert_eq!(ks_per_coordinate(&a, &a).unwrap(), 0.0);
        assert!(energy_distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn disjoint_samples_have_ks_one() {
        let a: Vec<Vec<f64>> = (0..50).map(|k| vec![k as f64]).collect();
        let b: Vec<Vec<f64>> = (0..50).map(|k| vec![100.0 + k as f64]).collect();
        assert_eq!(ks_per_coordinate(&a, &b).unwrap(), 1.0);
        assert!(energy_distance(&a, &b).unwrap() > 10.0);
    }

    #[test]
    fn ks_handles_ties() {
        let a = vec![0.0, 0.0, 1.0, 1.0];
        let b = vec![0.0, 1.0];
        assert!(ks_statistic(&a, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn standard_normal_self_distance_small() {
        // N(0,1) vs independent N(0,1), N = 10^4: below the 1% critical value
        // 1.63 sqrt(2/N) in the large majority of seeds.
        let crit = 1.63 * (2.0 / 1e4f64).sqrt();
        let mut below = 0;
        for seed in 0..20u64 {
            let mut r1 = PathRng::new(1000 + seed);
            let mut r2 = PathRng::new(5000 + seed);
            let a: Vec<f64> = (0..5000).flat_map(|_| { let (x, y) = r1.normal_pair(); [x, y] }).collect();
            let b: Vec<f64> = (0..5000).flat_map(|_| { let (x, y) = r2.normal_pair(); [x, y] }).collect();
            if ks_statistic(&a, &b).unwrap() < crit {
                below += 1;
            }
        }
        assert!(below >= 19, "only {below}/20 below the 1% critical value");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = vec![vec![0.0, 1.0]];
        let b = vec![vec![0.0]];
        assert!(matches!(
            energy_distance(&a, &b),
            Err(DistanceError::DimensionMismatch { .. })
        ));
    }
}
