#![allow(dead_code)]

use dimfree_core::FiniteMetricMeasureSpace;
use proptest::prelude::*;
use rand::Rng;

/// Euclidean distances between planar points, so the triangle inequality
/// holds by construction.
pub fn planar_space(points: &[(f64, f64)], weights: &[f64]) -> Option<FiniteMetricMeasureSpace> {
    let k = points.len();
    let dist: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        (points[i].0 - points[j].0).hypot(points[i].1 - points[j].1)
                    }
                })
                .collect()
        })
        .collect();
    if dist.iter().flatten().enumerate().any(|(c, &d)| c / k != c % k && d < 1e-3) {
        return None;
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
    FiniteMetricMeasureSpace::unlabeled(dist, w).ok()
}

/// Random planar space with `k` points in `[0, scale]^2`; about one weight in
/// eight is zero when `allow_massless`.
pub fn random_space(rng: &mut impl Rng, k: usize, scale: f64, allow_massless: bool) -> FiniteMetricMeasureSpace {
    loop {
        let pts: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.gen_range(0.0..scale), rng.gen_range(0.0..scale)))
            .collect();
        let w: Vec<f64> = (0..k)
            .map(|_| {
                if allow_massless && rng.gen_bool(0.125) {
                    0.0
                } else {
                    rng.gen_range(0.05..1.0)
                }
            })
            .collect();
        if let Some(s) = planar_space(&pts, &w) {
            return s;
        }
    }
}

pub fn arb_space(max_points: usize) -> impl Strategy<Value = FiniteMetricMeasureSpace> {
    (1..=max_points)
        .prop_flat_map(|k| {
            (
                prop::collection::vec((0.0..3.0f64, 0.0..3.0f64), k),
                prop::collection::vec(0.05..1.0f64, k),
            )
        })
        .prop_filter_map("points too close", |(p, w)| planar_space(&p, &w))
}

pub fn symmetric_two_point() -> FiniteMetricMeasureSpace {
    FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap()
}
