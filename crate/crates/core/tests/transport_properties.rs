mod common;

use dimfree_core::space::{enlarge, talagrand_enlarge, theta};
use dimfree_core::transport::{check_talagrand, relative_entropy, wasserstein, NuFamily};
use dimfree_core::{FiniteMetricMeasureSpace, PointSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_measure(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
    let s: f64 = w.iter().sum();
    if s == 0.0 {
        let mut d = vec![0.0; k];
        d[rng.gen_range(0..k)] = 1.0;
        return d;
    }
    w.iter().map(|x| x / s).collect()
}

#[test]
fn wasserstein_is_a_metric_on_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let k = rng.gen_range(1..=5);
        let s = common::random_space(&mut rng, k, 3.0, false);
        let v = s.base_view();
        let p = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
        let (a, b, c) = (random_measure(&mut rng, k), random_measure(&mut rng, k), random_measure(&mut rng, k));
        let w = |x: &[f64], y: &[f64]| wasserstein(&v, x, y, p).unwrap().distance;
        assert!(w(&a, &a) <= 1e-9);
        assert!((w(&a, &b) - w(&b, &a)).abs() <= 1e-9);
        assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-9);
        assert!(w(&a, &b) <= s.diameter() + 1e-9);
        let plan = wasserstein(&v, &a, &b, p).unwrap().plan;
        assert!(plan.coupling.marginal_error(&b, &a) <= 1e-12);
    }
}

#[test]
fn two_point_distance_in_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let d = rng.gen_range(0.1..5.0);
        let p0 = rng.gen_range(0.01..0.99);
        let q0 = rng.gen_range(0.0..=1.0);
        let p = rng.gen_range(1.0..4.0);
        let v = FiniteMetricMeasureSpace::two_point(d, p0).unwrap().base_view();
        let w = wasserstein(&v, &[p0, 1.0 - p0], &[q0, 1.0 - q0], p).unwrap();
        let want = d * (p0 - q0).abs().powf(1.0 / p);
        assert!((w.distance - want).abs() <= 1e-9, "{} vs {want}", w.distance);
    }
}

#[test]
fn dirac_records_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let k = rng.gen_range(2..=6);
        let s = common::random_space(&mut rng, k, 2.0, false);
        let v = s.base_view();
        let mu = s.weights().to_vec();
        let p = [1.0, 2.0][rng.gen_range(0..2)];
        let chk = check_talagrand(&v, &mu, 1.0, p, &NuFamily::default()).unwrap();
        for x in 0..k {
            let rec = chk.records.iter().find(|r| r.nu_id == format!("dirac-{x}")).unwrap();
            let cost: f64 = (0..k).map(|y| mu[y] * s.dist(x, y).powf(p)).sum();
            assert!((rec.cost - cost).abs() <= 1e-9);
            assert!((rec.entropy + mu[x].ln()).abs() <= 1e-9);
            assert_eq!(rec.satisfied, cost <= rec.entropy + 1e-12);
        }
    }
}

#[test]
fn entropy_is_nonnegative_and_zero_only_at_mu() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let k = rng.gen_range(1..=6);
        let mu = random_measure(&mut rng, k);
        let nu = random_measure(&mut rng, k);
        let h = relative_entropy(&nu, &mu).unwrap();
        assert!(h >= 0.0);
        assert_eq!(relative_entropy(&mu, &mu).unwrap(), 0.0);
        if nu.iter().zip(&mu).any(|(a, b)| *a > 0.0 && *b == 0.0) {
            assert_eq!(h, f64::INFINITY);
        }
    }
}

proptest! {
    #[test]
    fn theta_between_linear_and_quadratic(t in 0.0..100.0f64) {
        let th = theta(t);
        prop_assert!(th <= t * t + 1e-12);
        prop_assert!(th >= t.min(t * t) - 1e-12);
        // convex: midpoint below chord
        let (a, b) = (0.5 * t, 1.5 * t);
        prop_assert!(theta(t) <= 0.5 * (theta(a) + theta(b)) + 1e-9);
    }

    #[test]
    fn talagrand_enlargement_contains_euclidean_ball(
        space in common::arb_space(3),
        mask in 1u64..512,
        a in 0.2..3.0f64,
        r in 0.0..4.0f64,
    ) {
        let v = space.view(2, 2.0).unwrap();
        let set = PointSet::from_mask(v.len(), mask & ((1u64 << v.len()) - 1));
        prop_assume!(!set.is_empty());
        let ball = enlarge(&v, &set, r.sqrt() / a).unwrap();
        let tal = talagrand_enlarge(&v, &set, a, r).unwrap();
        for x in ball.iter() {
            let margin = (0..v.len())
                .filter(|&y| set.contains(y))
                .map(|y| (v.distance2(x, y) - r.sqrt() / a).abs())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(tal.contains(x) || margin < 1e-9);
        }
        prop_assert!(set.is_subset(&tal));
    }
}

#[test]
fn quadratic_transport_ratio_blows_up_near_mu() {
    let s = FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap();
    let v = s.base_view();
    let mu = [0.5, 0.5];
    let mut prev = 0.0;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let nu = [0.5 + eps, 0.5 - eps];
        let w2 = wasserstein(&v, &mu, &nu, 2.0).unwrap().distance.powi(2);
        let h = relative_entropy(&nu, &mu).unwrap();
        assert!((w2 - eps).abs() < 1e-12);
        let ratio = w2 / h;
        assert!(ratio > 5.0 * prev, "eps={eps}: {ratio}");
        prev = ratio;
    }
    let chk = check_talagrand(&v, &mu, 1.0, 2.0, &NuFamily::default()).unwrap();
    assert!(chk.worst_violation().is_some());
}
