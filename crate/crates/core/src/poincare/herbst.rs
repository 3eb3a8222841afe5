use std::sync::OnceLock;

use crate::calculus::{gradient_sum_sq, GradientKind, RealFunction};
use crate::concentration::{median, AnalyticForm, ConcentrationProfile};
use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

/// `-log(1 - v^2) / v^2`, equal to 1 at `v = 0`.
fn integrand(v: f64) -> f64 {
    if v == 0.0 {
        1.0
    } else {
        -(-v * v).ln_1p() / (v * v)
    }
}

/// `b = exp(1/2 int_0^{1/2} -log(1 - v^2) / v^2 dv)`.
pub fn herbst_b() -> f64 {
    static B: OnceLock<f64> = OnceLock::new();
    *B.get_or_init(|| (0.5 * adaptive_simpson(integrand, 0.0, 0.5, 1e-10)).exp())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HerbstConstants {
    pub b: f64,
    /// `sqrt(2 / lambda)`, the gap between median and mean.
    pub shift: f64,
    /// `sqrt(lambda) / 2`.
    pub rate: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::NonpositiveLambda(lambda))
    }
}

impl HerbstConstants {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            b: herbst_b(),
            shift: (2.0 / lambda).sqrt(),
            rate: lambda.sqrt() / 2.0,
        })
    }

    pub fn bound(&self, r: f64) -> f64 {
        if r == 0.0 {
            self.b
        } else {
            self.b * (-self.rate * r).exp()
        }
    }
}

/// `b exp(-(sqrt(lambda)/2) r)`, bounding `mu^n(f > m(f) + sqrt(2/lambda) + r)`.
pub fn herbst_bound(lambda: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "must be nonnegative",
        });
    }
    Ok(HerbstConstants::new(lambda)?.bound(r))
}

/// Constant in front of the dimension-free exponential profile:
/// `max(b, 1/2) e^{sqrt(2)/2}`.
pub fn gromov_milman_constant() -> f64 {
    herbst_b().max(0.5) * (std::f64::consts::SQRT_2 * 0.5).exp()
}

/// Dimension-free profile `r -> b' exp(-(sqrt(lambda)/2) r)` implied by a
/// Poincaré constant `lambda`.
pub fn gromov_milman_profile(lambda: f64) -> Result<ConcentrationProfile> {
    check_lambda(lambda)?;
    Ok(ConcentrationProfile::analytic(AnalyticForm::Exponential {
        b: gromov_milman_constant(),
        rate: lambda.sqrt() / 2.0,
    }))
}

/// `f` divided by `sqrt(max_x sum_i |grad_i f|^2(x))`, so the coordinate
/// gradient sum is at most 1 everywhere. Functions with zero gradient sum
/// are returned unchanged.
pub fn scale_to_unit_gradient(f: &RealFunction, kind: GradientKind) -> Result<RealFunction> {
    let g = gradient_sum_sq(f, kind)?;
    let top = g.values().iter().fold(0.0f64, |a, &v| a.max(v));
    if top == 0.0 {
        return Ok(f.clone());
    }
    let s = top.sqrt();
    f.map(|v| v / s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HerbstRow {
    pub r: f64,
    /// `mu^n(f > m(f) + sqrt(2/lambda) + r)`.
    pub tail: f64,
    pub bound: f64,
}

/// Exact tails of `f` beyond `m(f) + sqrt(2/lambda) + r` next to
/// [`herbst_bound`], one row per radius.
pub fn herbst_tail_check(f: &RealFunction, lambda: f64, radii: &[f64]) -> Result<Vec<HerbstRow>> {
    let c = HerbstConstants::new(lambda)?;
    let m = median(f)?;
    radii
        .iter()
        .map(|&r| {
            Ok(HerbstRow {
                r,
                tail: f.tail_mass(m + c.shift + r),
                bound: herbst_bound(lambda, r)?,
            })
        })
        .collect()
}
