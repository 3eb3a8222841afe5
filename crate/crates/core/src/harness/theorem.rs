use std::f64::consts::{LN_2, PI};

use crate::concentration::{AnalyticForm, ConcentrationProfile, ProfileShape};
use crate::error::{Error, Result};
use crate::numeric::golden_section_max;

use super::gaussian::gaussian_tail_inverse_log;

const GRID_POINTS: usize = 2000;
const GRID_LO: f64 = 1e-6;
const GRID_HI: f64 = 1e3;
/// The sup is followed past the grid while the ratio still grows by this
/// factor per decade.
const TAIL_GROWTH: f64 = 1.0 + 1e-6;
const TAIL_DECADES_UP: i32 = 100;
const TAIL_DECADES_DOWN: i32 = 9;

/// `Phi^{-1}(alpha) / r` from `log alpha`; `None` where `alpha > 1/2`.
fn ratio(log_alpha: f64, r: f64) -> Option<f64> {
    if log_alpha.is_nan() || log_alpha > -LN_2 {
        return None;
    }
    let x = gaussian_tail_inverse_log(log_alpha).ok()?;
    Some(x / r)
}

/// `lambda` with `sqrt(lambda) = sup { Phi^{-1}(alpha(r)) / r : r > 0, alpha(r) <= 1/2 }`.
///
/// The sup over an empty set, or over nonpositive values only, is taken as 0.
/// Step profiles are evaluated at their breakpoints, where each step attains
/// its largest ratio. Formula profiles are scanned on a log-spaced grid and
/// the best cell is refined by golden-section search; when the ratio is still
/// growing at either end of the grid the scan continues decade by decade,
/// and unbounded growth gives `+inf`.
pub fn main_theorem_lambda(profile: &ConcentrationProfile) -> f64 {
    let sup = match profile.shape() {
        ProfileShape::Steps(bps) => {
            let mut sup = 0.0f64;
            for bp in bps {
                let la = if bp.alpha > 0.0 { bp.alpha.ln() } else { f64::NEG_INFINITY };
                if la > -LN_2 {
                    continue;
                }
                if bp.r == 0.0 {
                    // the step extends to r -> 0+, where any positive quantile blows up
                    if la < -LN_2 {
                        return f64::INFINITY;
                    }
                    continue;
                }
                if let Some(v) = ratio(la, bp.r) {
                    sup = sup.max(v);
                }
            }
            sup
        }
        ProfileShape::Formula(form) => formula_sup(form),
    };
    if sup == f64::INFINITY {
        return f64::INFINITY;
    }
    sup.max(0.0).powi(2)
}

fn formula_sup(form: &AnalyticForm) -> f64 {
    if form.log_alpha(0.0) < -LN_2 {
        return f64::INFINITY;
    }
    let scale = form.scale();
    let g = |r: f64| ratio(form.log_alpha(r), r);
    let (lo, hi) = (GRID_LO * scale, GRID_HI * scale);
    let step = (hi / lo).ln() / (GRID_POINTS - 1) as f64;
    let rs: Vec<f64> = (0..GRID_POINTS).map(|k| lo * (step * k as f64).exp()).collect();
    let mut vals = Vec::with_capacity(GRID_POINTS);
    for &r in &rs {
        if form.log_alpha(r) == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        vals.push(g(r).unwrap_or(f64::NEG_INFINITY));
    }
    let (best_k, mut sup) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    if sup == f64::NEG_INFINITY {
        return 0.0;
    }
    if best_k == GRID_POINTS - 1 {
        let mut prev = sup;
        let mut r = hi;
        let mut settled = false;
        for _ in 0..TAIL_DECADES_UP {
            r *= 10.0;
            if form.log_alpha(r) == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            let v = g(r).unwrap_or(f64::NEG_INFINITY);
            sup = sup.max(v);
            if v <= prev * TAIL_GROWTH {
                settled = true;
                break;
            }
            prev = v;
        }
        if !settled {
            return f64::INFINITY;
        }
    } else if best_k == 0 {
        let mut prev = sup;
        let mut r = lo;
        for _ in 0..TAIL_DECADES_DOWN {
            r /= 10.0;
            let v = g(r).unwrap_or(f64::NEG_INFINITY);
            sup = sup.max(v);
            if v <= prev * TAIL_GROWTH {
                break;
            }
            prev = v;
        }
    }
    if best_k > 0 && best_k < GRID_POINTS - 1 {
        let (u0, u1) = (rs[best_k - 1].ln(), rs[best_k + 1].ln());
        let (_, v) = golden_section_max(|u| g(u.exp()).unwrap_or(f64::NEG_INFINITY), u0, u1, 100);
        sup = sup.max(v);
    }
    sup
}

/// `2 pi alpha'_+(0)^2` for a convex decreasing profile with `alpha(0) = 1/2`.
pub fn convex_profile_lambda(right_derivative: f64) -> Result<f64> {
    if right_derivative.is_nan() || right_derivative >= 0.0 {
        return Err(Error::NonnegativeDerivative(right_derivative));
    }
    if right_derivative == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * PI * right_derivative * right_derivative)
}

pub const DEFAULT_KAPPA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaniculeDirection {
    /// Talagrand exponential constants `(a, b)` to profile constants `(a', b')`.
    TalagrandToProfile,
    /// Profile constants `(a', b')` to Talagrand exponential constants `(a, b)`.
    ProfileToTalagrand,
}

/// Constant translation between the Talagrand exponential inequality with
/// `(a, b)` and the exponential profile `b' e^{-a' u}`.
///
/// Forward: `a' = 2a`, `b' = e b`. Backward: `a = kappa a' / sqrt(log(2 b'))`,
/// `b = 1`, where `kappa` is an unspecified universal constant.
pub fn canicule_translate(x: f64, y: f64, direction: CaniculeDirection, kappa: f64) -> Result<(f64, f64)> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::DomainError(format!("constants must be positive, got ({x}, {y})")));
    }
    match direction {
        CaniculeDirection::TalagrandToProfile => Ok((2.0 * x, std::f64::consts::E * y)),
        CaniculeDirection::ProfileToTalagrand => {
            let l = (2.0 * y).ln();
            if !(l > 0.0) {
                return Err(Error::DomainError(format!("log(2 b') = {l} must be positive")));
            }
            Ok((kappa * x / l.sqrt(), 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gaussian::gaussian_tail_inverse;

    #[test]
    fn minimal_profile() {
        for (a, r) in [(0.1, 1.0), (0.25, 0.3), (1e-6, 4.0)] {
            let p = ConcentrationProfile::minimal(a, r).unwrap();
            let want = (gaussian_tail_inverse(a).unwrap() / r).powi(2);
            assert!((main_theorem_lambda(&p) - want).abs() < 1e-12 * want);
        }
        assert_eq!(main_theorem_lambda(&ConcentrationProfile::minimal(0.5, 1.0).unwrap()), 0.0);
        assert_eq!(main_theorem_lambda(&ConcentrationProfile::minimal(0.0, 1.0).unwrap()), f64::INFINITY);
    }

    #[test]
    fn gaussian_profile_gives_one() {
        let p = ConcentrationProfile::analytic(AnalyticForm::GaussianTail { scale: 1.0 });
        assert!((main_theorem_lambda(&p) - 1.0).abs() < 1e-9);
        let p = ConcentrationProfile::analytic(AnalyticForm::GaussianTail { scale: 2.0 });
        assert!((main_theorem_lambda(&p) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn convex_exponential_matches_derivative_formula() {
        let p = ConcentrationProfile::analytic(AnalyticForm::Exponential { b: 0.5, rate: 1.0 });
        let want = convex_profile_lambda(-0.5).unwrap();
        assert!((want - PI / 2.0).abs() < 1e-15);
        assert!((main_theorem_lambda(&p) - want).abs() < 1e-4);
        assert_eq!(convex_profile_lambda(f64::NEG_INFINITY).unwrap(), f64::INFINITY);
        assert!(matches!(convex_profile_lambda(0.0), Err(Error::NonnegativeDerivative(_))));
    }

    #[test]
    fn super_gaussian_tails_are_infinite() {
        for k in [2.5, 3.0, 4.0] {
            let p = ConcentrationProfile::analytic(AnalyticForm::StretchedExponential { b: 0.5, a: 1.0, k });
            assert_eq!(main_theorem_lambda(&p), f64::INFINITY, "k = {k}");
        }
        // k = 2 is the Gaussian borderline: finite, close to 2a
        let p = ConcentrationProfile::analytic(AnalyticForm::StretchedExponential { b: 0.5, a: 1.0, k: 2.0 });
        let l = main_theorem_lambda(&p);
        assert!(l.is_finite() && l <= 2.0 + 1e-9 && l > 1.9, "{l}");
        // slower tails stay finite
        let p = ConcentrationProfile::analytic(AnalyticForm::StretchedExponential { b: 0.5, a: 1.0, k: 1.5 });
        assert!(main_theorem_lambda(&p).is_finite());
    }

    #[test]
    fn profiles_below_half_at_zero_are_infinite() {
        let p = ConcentrationProfile::analytic(AnalyticForm::Exponential { b: 0.4, rate: 1.0 });
        assert_eq!(main_theorem_lambda(&p), f64::INFINITY);
    }

    #[test]
    fn translation_arithmetic() {
        let (a, b) = canicule_translate(1.0, 1.0, CaniculeDirection::TalagrandToProfile, DEFAULT_KAPPA).unwrap();
        assert_eq!((a, b), (2.0, std::f64::consts::E));
        assert!(canicule_translate(1.0, 0.5, CaniculeDirection::ProfileToTalagrand, 1.0).is_err());
        let (a, b) = canicule_translate(2.0, std::f64::consts::E, CaniculeDirection::ProfileToTalagrand, 1.0).unwrap();
        assert_eq!(b, 1.0);
        assert!((a - 2.0 / (1.0 + LN_2).sqrt()).abs() < 1e-15);
    }
}
