use crate::calculus::{inf_conv, InfConvParams, RealFunction};
use crate::error::{Error, Result};
use crate::numeric::MASS_TOL;

use super::profile::{ConcentrationProfile, ProfileMode};

/// Slack on the level `m(f) + r` and on `lhs <= rhs`.
pub const DEVIATION_TOL: f64 = 1e-12;

/// `m(f) = inf { m : mu^n(f <= m) >= 1/2 }`, attained at a value of `f`.
///
/// Defined as long as `f` is finite on a set of measure at least 1/2, which
/// includes indicators of sets of measure exactly 1/2.
pub fn median(f: &RealFunction) -> Result<f64> {
    let view = f.view();
    let inf_mass = f.infinite_mass();
    let mut pts: Vec<(f64, f64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(x, v)| v.is_finite() && view.measure(*x) > 0.0)
        .map(|(x, &v)| (v, view.measure(x)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut i = 0;
    while i < pts.len() {
        let v = pts[i].0;
        while i < pts.len() && pts[i].0 == v {
            acc += pts[i].1;
            i += 1;
        }
        if acc >= 0.5 - MASS_TOL {
            return Ok(v);
        }
    }
    Err(Error::TooMuchInfinity { mass: inf_mass })
}

#[derive(Clone, Debug)]
pub struct DeviationRecord {
    pub m: f64,
    pub t: f64,
    pub r: f64,
    pub p: f64,
    /// `mu^n(Q_t f > m(f) + r)`.
    pub lhs: f64,
    /// `alpha(r^(1/p) t^(1-1/p))`.
    pub rhs: f64,
    pub violated: bool,
}

/// Evaluates both sides of the deviation inequality for the inf-convolution
/// at exponent `p` of the profile.
///
/// A step profile computed at dimension `N` certifies functions on any
/// product of dimension at most `N`; dimension-free profiles (`n = 0`)
/// certify every dimension.
pub fn deviation_check(f: &RealFunction, t: f64, r: f64, profile: &ConcentrationProfile) -> Result<DeviationRecord> {
    Ok(deviation_records(f, t, &[r], profile)?.remove(0))
}

/// [`deviation_check`] at several levels `r`, sharing one inf-convolution.
pub fn deviation_records(f: &RealFunction, t: f64, rs: &[f64], profile: &ConcentrationProfile) -> Result<Vec<DeviationRecord>> {
    let fn_n = f.view().n();
    if profile.n() != 0 && profile.n() < fn_n {
        return Err(Error::ProfileDimensionMismatch {
            profile_n: profile.n(),
            function_n: fn_n,
        });
    }
    for &r in rs {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "deviation level must be positive and finite",
            });
        }
    }
    let p = profile.p();
    if profile.mode() != ProfileMode::Analytic && p != f.view().p() {
        return Err(Error::InvalidParameter {
            name: "p",
            value: f.view().p(),
            reason: "function view and profile use different l_p exponents",
        });
    }
    let m = median(f)?;
    let q = inf_conv(f, InfConvParams::new(t, p)?)?;
    Ok(rs
        .iter()
        .map(|&r| {
            let lhs = q.tail_mass(m + r + DEVIATION_TOL);
            let rhs = profile.alpha(r.powf(1.0 / p) * t.powf(1.0 - 1.0 / p));
            DeviationRecord {
                m,
                t,
                r,
                p,
                lhs,
                rhs,
                violated: lhs > rhs + DEVIATION_TOL,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::exact_profile;
    use crate::space::{FiniteMetricMeasureSpace, PointSet};

    #[test]
    fn median_examples() {
        let v = FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap().base_view();
        assert_eq!(median(&RealFunction::constant(v.clone(), 3.0).unwrap()).unwrap(), 3.0);
        assert_eq!(median(&RealFunction::new(v.clone(), vec![0.0, 1.0]).unwrap()).unwrap(), 0.0);
        let w = FiniteMetricMeasureSpace::two_point(1.0, 0.4).unwrap().base_view();
        assert_eq!(median(&RealFunction::new(w.clone(), vec![0.0, 1.0]).unwrap()).unwrap(), 1.0);
        let inf = RealFunction::new(w, vec![0.0, f64::INFINITY]).unwrap();
        assert!(matches!(median(&inf), Err(Error::TooMuchInfinity { .. })));
    }

    #[test]
    fn indicator_on_two_points() {
        let v = FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap().base_view();
        let prof = exact_profile(&v, &[0.0, 0.5f64.sqrt(), 1.0]).unwrap();
        let a = PointSet::from_indices(2, [0]).unwrap();
        let f = RealFunction::indicator(v, &a).unwrap();
        let rec = deviation_check(&f, 1.0, 0.5, &prof).unwrap();
        assert_eq!(rec.m, 0.0);
        assert_eq!(rec.lhs, 0.5);
        assert_eq!(rec.rhs, 0.5);
        assert!(!rec.violated);
    }

    #[test]
    fn constant_function_has_no_deviation() {
        let v = FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap().view(2, 2.0).unwrap();
        let prof = exact_profile(&v, &[0.0, 1.0]).unwrap();
        let f = RealFunction::constant(v, 2.0).unwrap();
        for r in [1e-6, 0.3, 5.0] {
            assert_eq!(deviation_check(&f, 0.7, r, &prof).unwrap().lhs, 0.0);
        }
    }

    #[test]
    fn lower_dimensional_profile_is_rejected() {
        let base = FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap();
        let prof = exact_profile(&base.base_view(), &[0.0, 1.0]).unwrap();
        let f = RealFunction::constant(base.view(2, 2.0).unwrap(), 0.0).unwrap();
        assert!(matches!(
            deviation_check(&f, 1.0, 1.0, &prof),
            Err(Error::ProfileDimensionMismatch { profile_n: 1, function_n: 2 })
        ));
    }
}
