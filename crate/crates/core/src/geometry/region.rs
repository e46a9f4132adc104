//! Compact probe regions: axis-aligned boxes and closed balls.

use crate::linalg::distance;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub enum Region<F> {
    Box { lo: Vec<F>, hi: Vec<F> },
    Ball { center: Vec<F>, radius: F },
}

impl<F: Scalar> Region<F> {
    pub fn cube(dim: usize, lo: F, hi: F) -> Self {
        Region::Box { lo: vec![lo; dim], hi: vec![hi; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, x: &[F]) -> bool {
        match self {
            Region::Box { lo, hi } => {
                x.iter().zip(lo).all(|(&a, &l)| a >= l) && x.iter().zip(hi).all(|(&a, &h)| a <= h)
            }
            Region::Ball { center, radius } => distance(x, center) <= *radius,
        }
    }

    pub fn enclosing_box(&self) -> (Vec<F>, Vec<F>) {
        match self {
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
            Region::Ball { center, radius } => (
                center.iter().map(|&c| c - *radius).collect(),
                center.iter().map(|&c| c + *radius).collect(),
            ),
        }
    }

    /// Farthest distance from the origin-side scale of the region; used to
    /// size parametric charts.
    pub fn radius_bound(&self) -> F {
        let (lo, hi) = self.enclosing_box();
        lo.iter()
            .zip(&hi)
            .map(|(&l, &h)| l.abs().max(h.abs()))
            .fold(F::zero(), |a, b| a + b * b)
            .sqrt()
    }

    /// Extreme points: box corners, or axis-aligned extremes of a ball.
    pub fn extreme_points(&self) -> Vec<Vec<F>> {
        match self {
            Region::Box { lo, hi } => {
                let d = lo.len();
                let mut out = Vec::with_capacity(1 << d);
                for mask in 0u64..(1u64 << d) {
                    out.push(
                        (0..d)
                            .map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] })
                            .collect(),
                    );
                }
                out
            }
            Region::Ball { center, radius } => {
                let d = center.len();
                let mut out = Vec::with_capacity(2 * d);
                for k in 0..d {
                    for sgn in [F::one(), -F::one()] {
                        let mut p = center.clone();
                        p[k] = p[k] + sgn * *radius;
                        out.push(p);
                    }
                }
                out
            }
        }
    }

    /// Axis-aligned grid of mesh `h` covering the region (clipped to it).
    pub fn grid(&self, h: F) -> Vec<Vec<F>> {
        assert!(h > F::zero(), "grid resolution must be positive");
        let (lo, hi) = self.enclosing_box();
        let d = lo.len();
        let counts: Vec<usize> = (0..d)
            .map(|k| {
                let span = (hi[k] - lo[k]).max(F::zero());
                (span / h).ceil().to_f64_c() as usize + 1
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            let p: Vec<F> = (0..d)
                .map(|k| {
                    let v = lo[k] + F::from_f64_c(idx[k] as f64) * h;
                    v.min(hi[k])
                })
                .collect();
            if self.contains(&p) {
                out.push(p);
            }
            let mut k = 0;
            loop {
                if k == d {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// A probe set: a grid over a compact region plus explicit extra points, at
/// resolution `h`. The 1-Lipschitz property of signed distances bounds the
/// grid-estimation error of any sup by O(h).
#[derive(Clone, Debug)]
pub struct ProbeSet<F> {
    pub region: Region<F>,
    pub resolution: F,
    pub extra: Vec<Vec<F>>,
}

impl<F: Scalar> ProbeSet<F> {
    pub fn new(region: Region<F>, resolution: F) -> Self {
        assert!(resolution > F::zero());
        Self { region, resolution, extra: Vec::new() }
    }

    pub fn with_extra(mut self, points: Vec<Vec<F>>) -> Self {
        self.extra = points;
        self
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    /// Grid points, region extreme points, then the explicit extras.
    pub fn points(&self) -> Vec<Vec<F>> {
        let mut pts = self.region.grid(self.resolution);
        pts.extend(self.region.extreme_points());
        pts.extend(self.extra.iter().cloned());
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_grid_covers_endpoints() {
        let r = Region::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        let g = r.grid(0.4);
        assert!(g.iter().any(|p| p == &vec![0.0, 0.0]));
        assert!(g.iter().any(|p| p == &vec![1.0, 1.0]));
        // 0.0, 0.4, 0.8, 1.0 per axis
        assert_eq!(g.len(), 16);
    }

    #[test]
    fn ball_grid_clipped() {
        let r = Region::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let g = r.grid(0.5);
        assert!(g.iter().all(|p| p[0] * p[0] + p[1] * p[1] <= 1.0 + 1e-12));
        assert!(r.extreme_points().contains(&vec![1.0, 0.0]));
    }
}
