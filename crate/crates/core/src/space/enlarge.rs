use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::DIST_TOL;

use super::{PointSet, ProductSpace};

const PAR_THRESHOLD: usize = 1 << 12;

/// The quadratic-then-linear cost `theta(t) = t^2` on `[0,1]`, `2t - 1` beyond.
#[derive(Clone, Copy, Debug, Default)]
pub struct TalagrandCost;

impl TalagrandCost {
    #[inline]
    pub fn eval(self, t: f64) -> f64 {
        theta(t)
    }
}

#[inline]
pub fn theta(t: f64) -> f64 {
    if t <= 1.0 {
        t * t
    } else {
        2.0 * t - 1.0
    }
}

fn membership<F>(len: usize, pred: F) -> PointSet
where
    F: Fn(usize) -> bool + Sync,
{
    let flags: Vec<bool> = if len >= PAR_THRESHOLD {
        (0..len).into_par_iter().map(&pred).collect()
    } else {
        (0..len).map(&pred).collect()
    };
    PointSet::from_indices(len, flags.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
        .expect("indices are in range")
}

fn check_set(view: &ProductSpace, a: &PointSet) -> Result<()> {
    if a.universe() != view.len() {
        return Err(Error::LengthMismatch {
            what: "point set universe",
            got: a.universe(),
            expected: view.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// `d_p(x, A)` for every point `x` of the view.
pub fn distance_to_set(view: &ProductSpace, a: &PointSet) -> Result<Vec<f64>> {
    check_set(view, a)?;
    let members = a.indices();
    let f = |x: usize| members.iter().map(|&y| view.distance(x, y)).fold(f64::INFINITY, f64::min);
    Ok(if view.len() >= PAR_THRESHOLD {
        (0..view.len()).into_par_iter().map(f).collect()
    } else {
        (0..view.len()).map(f).collect()
    })
}

/// The enlargement `A_{r,p} = {x : d_p(x, A) <= r}`.
///
/// Distances within `1e-12` of `r` count as inside.
pub fn enlarge(view: &ProductSpace, a: &PointSet, r: f64) -> Result<PointSet> {
    check_set(view, a)?;
    check_radius(r)?;
    let members = a.indices();
    let thr = r + DIST_TOL;
    Ok(membership(view.len(), |x| members.iter().any(|&y| view.distance(x, y) <= thr)))
}

/// Enlargement of a product set `A_1 x ... x A_n`, using
/// `d_p(x, A)^p = sum_i d(x_i, A_i)^p` instead of a scan over `A`.
pub fn enlarge_product(view: &ProductSpace, factors: &[PointSet], r: f64) -> Result<PointSet> {
    check_radius(r)?;
    let base = view.base();
    let m = base.len();
    if factors.len() != view.n() {
        return Err(Error::LengthMismatch {
            what: "product factors",
            got: factors.len(),
            expected: view.n(),
        });
    }
    let p = view.p();
    let mut per_coord = Vec::with_capacity(factors.len());
    for f in factors {
        if f.universe() != m {
            return Err(Error::LengthMismatch {
                what: "factor universe",
                got: f.universe(),
                expected: m,
            });
        }
        if f.is_empty() {
            return Err(Error::EmptySet);
        }
        let row: Vec<f64> = (0..m)
            .map(|z| f.iter().map(|a| base.dist(z, a).powf(p)).fold(f64::INFINITY, f64::min))
            .collect();
        per_coord.push(row);
    }
    let thr = r + DIST_TOL;
    Ok(membership(view.len(), |x| {
        let s: f64 = (0..view.n()).map(|i| per_coord[i][view.coord(x, i)]).sum();
        s.powf(1.0 / p) <= thr
    }))
}

/// Talagrand enlargement `{x : exists y in A, sum_i theta(a d(x_i, y_i)) <= r}`.
pub fn talagrand_enlarge(view: &ProductSpace, set: &PointSet, a: f64, r: f64) -> Result<PointSet> {
    check_set(view, set)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            reason: "scale must be positive",
        });
    }
    check_radius(r)?;
    let members = set.indices();
    let base = view.base();
    let m = base.len();
    let n = view.n();
    let thr = r + DIST_TOL;
    Ok(membership(view.len(), |x| {
        members.iter().any(|&y| {
            let (mut xa, mut ya) = (x, y);
            let mut cost = 0.0;
            for _ in 0..n {
                cost += theta(a * base.dist(xa % m, ya % m));
                xa /= m;
                ya /= m;
            }
            cost <= thr
        })
    }))
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "radius must be nonnegative",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteMetricMeasureSpace;
    use proptest::prelude::*;

    fn cube3() -> ProductSpace {
        FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap().view(3, 2.0).unwrap()
    }

    fn three_point() -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::unlabeled(
            vec![vec![0.0, 1.0, 1.7], vec![1.0, 0.0, 0.9], vec![1.7, 0.9, 0.0]],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap()
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(0.5), 0.25);
        assert_eq!(theta(2.0), 3.0);
        assert_eq!(theta(1.0), 1.0);
        assert_eq!(TalagrandCost.eval(0.0), 0.0);
    }

    #[test]
    fn enlarge_trivial_radii() {
        let v = cube3();
        let a = PointSet::from_indices(8, [3]).unwrap();
        assert_eq!(enlarge(&v, &a, 0.0).unwrap(), a);
        assert_eq!(enlarge(&v, &a, v.diameter()).unwrap(), PointSet::full(8));
        assert!(matches!(enlarge(&v, &PointSet::empty(8), 1.0), Err(Error::EmptySet)));
    }

    #[test]
    fn unit_ball_in_cube_is_hamming_ball() {
        let v = cube3();
        let a = PointSet::from_indices(8, [0]).unwrap();
        let got = enlarge(&v, &a, 1.0).unwrap();
        let expect: Vec<usize> = (0..8).filter(|&i: &usize| i.count_ones() <= 1).collect();
        assert_eq!(got.indices(), expect);
        // same set by brute-force Hamming distance
        assert_eq!(expect, vec![0, 1, 2, 4]);
    }

    #[test]
    fn talagrand_examples() {
        let v = cube3();
        let a = PointSet::from_indices(8, [0]).unwrap();
        assert_eq!(talagrand_enlarge(&v, &a, 1.0, 0.0).unwrap(), a);
        assert_eq!(talagrand_enlarge(&v, &a, 1.0, 1.0).unwrap().indices(), vec![0, 1, 2, 4]);
    }

    #[test]
    fn product_shortcut_matches_scan() {
        let s = three_point();
        let v = s.view(3, 2.0).unwrap();
        let factors = vec![
            PointSet::from_indices(3, [0]).unwrap(),
            PointSet::from_indices(3, [1, 2]).unwrap(),
            PointSet::from_indices(3, [2]).unwrap(),
        ];
        let a = PointSet::product(&v, &factors).unwrap();
        for r in [0.0, 0.5, 0.9, 1.0, 1.3, 1.7, 2.0, 2.5] {
            assert_eq!(enlarge_product(&v, &factors, r).unwrap(), enlarge(&v, &a, r).unwrap(), "r = {r}");
        }
    }

    fn arb_set(len: usize) -> impl Strategy<Value = PointSet> {
        proptest::collection::vec(any::<bool>(), len).prop_filter_map("nonempty", move |flags| {
            let s = PointSet::from_indices(len, flags.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)).unwrap();
            (!s.is_empty()).then_some(s)
        })
    }

    proptest! {
        #[test]
        fn enlargement_is_subadditive(a in arb_set(27), r1 in 0.0f64..2.0, r2 in 0.0f64..2.0) {
            let v = three_point().view(3, 2.0).unwrap();
            let twice = enlarge(&v, &enlarge(&v, &a, r1).unwrap(), r2).unwrap();
            let once = enlarge(&v, &a, r1 + r2).unwrap();
            prop_assert!(twice.is_subset(&once));
        }

        #[test]
        fn enlargement_is_monotone(a in arb_set(27), r1 in 0.0f64..2.0, dr in 0.0f64..1.0) {
            let v = three_point().view(3, 2.0).unwrap();
            let small = enlarge(&v, &a, r1).unwrap();
            let big = enlarge(&v, &a, r1 + dr).unwrap();
            prop_assert!(a.is_subset(&small));
            prop_assert!(small.is_subset(&big));
            prop_assert!(small.measure(&v) <= big.measure(&v) + 1e-15);
        }

        #[test]
        fn talagrand_inside_euclidean(a in arb_set(27), scale in 0.1f64..3.0, r in 0.0f64..3.0) {
            let v = three_point().view(3, 2.0).unwrap();
            let t = talagrand_enlarge(&v, &a, scale, theta(scale * r)).unwrap();
            let e = enlarge(&v, &a, r).unwrap();
            prop_assert!(t.is_subset(&e));
        }
    }
}
