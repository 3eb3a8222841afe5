mod common;

use dimfree_core::concentration::{
    complement_of_enlargement, contraction_point, distinct_distances, exact_profile, heuristic_profile,
    indicator_sweep, median, observable_diameter, random_deviation_checks, self_improve, verify_self_improvement,
    CandidateFamilies,
};
use dimfree_core::space::enlarge;
use dimfree_core::{FiniteMetricMeasureSpace, PointSet, ProductSpace, RealFunction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(view: &ProductSpace) -> Vec<f64> {
    let d = distinct_distances(view);
    let mut r = d.clone();
    r.extend(d.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    r.push(d[d.len() - 1] + 1.0);
    r.sort_by(f64::total_cmp);
    r
}

/// All subsets by bitmask, independently of the library's search.
fn brute_alpha(view: &ProductSpace, r: f64) -> f64 {
    let len = view.len();
    let mut best = 0.0f64;
    for mask in 1u64..1 << len {
        let a = PointSet::from_mask(len, mask);
        if a.measure(view) >= 0.5 - 1e-12 {
            best = best.max(1.0 - enlarge(view, &a, r).unwrap().measure(view));
        }
    }
    best
}

fn test_spaces() -> Vec<(FiniteMetricMeasureSpace, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut out = vec![
        (FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap(), 4),
        (FiniteMetricMeasureSpace::two_point(1.0, 0.3).unwrap(), 4),
        (FiniteMetricMeasureSpace::two_point(2.0, 0.8).unwrap(), 4),
    ];
    for _ in 0..3 {
        out.push((common::random_space(&mut rng, 3, 2.0, false), 2));
    }
    out
}

#[test]
fn profiles_grow_with_dimension_and_match_brute_force() {
    for (s, max_n) in test_spaces() {
        let radii = grid(&s.view(max_n, 2.0).unwrap());
        let mut prev: Option<dimfree_core::ConcentrationProfile> = None;
        for n in 1..=max_n {
            let v = s.view(n, 2.0).unwrap();
            let prof = exact_profile(&v, &radii).unwrap();
            for &r in &radii {
                let a = prof.alpha(r);
                if let Some(p) = &prev {
                    assert!(p.alpha(r) <= a + 1e-12, "n={n} r={r}");
                }
                let w = prof.witness(r).unwrap();
                assert!(w.measure(&v) >= 0.5 - 1e-12);
                assert!((complement_of_enlargement(&v, w, r).unwrap() - a).abs() <= 1e-12);
                if v.len() <= 9 {
                    assert!((brute_alpha(&v, r) - a).abs() <= 1e-12, "n={n} r={r}");
                }
            }
            prev = Some(prof);
        }
    }
}

#[test]
fn profile_at_zero_is_smallest_excess_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let k = rng.gen_range(1..=6);
        let s = common::random_space(&mut rng, k, 1.0, true);
        let v = s.base_view();
        let smallest = (1u64..1 << k)
            .map(|m| PointSet::from_mask(k, m).measure(&v))
            .filter(|&m| m >= 0.5 - 1e-12)
            .fold(f64::INFINITY, f64::min);
        let prof = exact_profile(&v, &[0.0]).unwrap();
        assert!((prof.alpha(0.0) - (1.0 - smallest)).abs() <= 1e-12);
    }
}

#[test]
fn heuristic_never_exceeds_exact() {
    for (s, max_n) in test_spaces() {
        let v = s.view(max_n, 2.0).unwrap();
        let radii = grid(&v);
        let exact = exact_profile(&v, &radii).unwrap();
        let heur = heuristic_profile(&v, &radii, &CandidateFamilies::default()).unwrap();
        for &r in &radii {
            assert!(heur.alpha(r) <= exact.alpha(r) + 1e-12);
        }
    }
}

#[test]
fn exact_profiles_scale_with_the_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let s = common::random_space(&mut rng, 3, 2.0, false);
        let c = 2.5;
        let t = s.rescaled(c).unwrap();
        let v = s.view(2, 2.0).unwrap();
        let radii = grid(&v);
        let scaled: Vec<f64> = radii.iter().map(|r| r * c).collect();
        let a = exact_profile(&v, &radii).unwrap();
        let b = exact_profile(&t.view(2, 2.0).unwrap(), &scaled).unwrap();
        for (r, sr) in radii.iter().zip(&scaled) {
            assert_eq!(a.alpha(*r), b.alpha(*sr));
        }
    }
}

#[test]
fn deviation_inequality_both_directions() {
    for (s, max_n) in test_spaces() {
        let v = s.view(max_n, 2.0).unwrap();
        let prof = exact_profile(&v, &grid(&v)).unwrap();
        for t in [0.25, 1.0, 4.0] {
            let sweep = indicator_sweep(&v, &prof, t).unwrap();
            assert!(sweep.exact(), "gap {}", sweep.max_gap());
        }
        let levels: Vec<f64> = (1..=16).map(|j| j as f64 * 0.125).collect();
        let summary = random_deviation_checks(&v, &prof, 200, 9, &[0.5, 1.0, 2.0], &levels).unwrap();
        assert!(summary.violations.is_empty(), "{:?}", summary.violations.first());
        // a profile at dimension n certifies every lower dimension
        let low = s.view(1, 2.0).unwrap();
        random_deviation_checks(&low, &prof, 50, 1, &[1.0], &levels).unwrap();
    }
}

#[test]
fn observable_diameter_lemma_both_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ts: Vec<f64> = (0..=10).map(|j| j as f64 * 0.05).collect();
    for _ in 0..25 {
        let k = rng.gen_range(1..=5);
        let s = common::random_space(&mut rng, k, 2.0, true);
        let v = s.base_view();
        let radii = grid(&v);
        let prof = exact_profile(&v, &radii).unwrap();
        for &r in &radii {
            let a = prof.alpha(r);
            if a <= 0.5 {
                let od = observable_diameter(&v, 2.0 * a).unwrap();
                assert!(od.exact);
                assert!(od.value <= 2.0 * r + 1e-12, "ObsDiam({}) = {} > 2r = {}", 2.0 * a, od.value, 2.0 * r);
            }
        }
        for &t in &ts {
            let rt = observable_diameter(&v, t).unwrap().value;
            for mask in 1u64..1 << k {
                let a = PointSet::from_mask(k, mask);
                if a.measure(&v) >= 0.5 - 1e-12 {
                    assert!(enlarge(&v, &a, rt).unwrap().measure(&v) >= 1.0 - t - 1e-12);
                }
            }
        }
    }
}

#[test]
fn improved_profile_holds_for_large_sets() {
    for (s, max_n) in test_spaces() {
        let v = s.view(max_n, 2.0).unwrap();
        let radii = grid(&v);
        let prof = exact_profile(&v, &radii).unwrap();
        let Some((r_o, a_o)) = contraction_point(&prof) else { continue };
        let (params, improved) = self_improve(r_o, a_o, None).unwrap();
        for n in 1..=max_n {
            let check = verify_self_improvement(&s.view(n, 2.0).unwrap(), &params, &improved, &radii).unwrap();
            assert_eq!(check.violations(), 0, "n={n}: {:?}", check.rows);
        }
    }
}

proptest! {
    #[test]
    fn median_splits_the_mass(space in common::arb_space(6), vals in prop::collection::vec(-3i32..3, 6)) {
        let v = space.base_view();
        let f = RealFunction::new(v.clone(), vals[..v.len()].iter().map(|&x| x as f64).collect()).unwrap();
        let m = median(&f).unwrap();
        let below: f64 = (0..v.len()).filter(|&x| f.value(x) <= m).map(|x| v.measure(x)).sum();
        let strictly: f64 = (0..v.len()).filter(|&x| f.value(x) < m).map(|x| v.measure(x)).sum();
        prop_assert!(below >= 0.5 - 1e-12);
        prop_assert!(strictly < 0.5 - 1e-12);
    }
}
