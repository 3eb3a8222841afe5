use std::f64::consts::LN_2;

use crate::error::{Error, Result};

use super::profile::{AnalyticForm, ConcentrationProfile};

/// Number of grid cells used to locate the threshold `c`.
pub const PHI_GRID: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelfImprovementParams {
    pub r_o: f64,
    pub a_o: f64,
    pub gamma: f64,
    /// `c` in `[1/2, 1)`: sets of measure at least `c` contract geometrically.
    pub c: f64,
    /// Lower end `-log(1 - a_o) / log 2` of the admissible `gamma` interval.
    pub gamma_lower: f64,
}

/// `-log(1 - a_o) / log 2`.
pub fn gamma_lower_bound(a_o: f64) -> f64 {
    -(-a_o).ln_1p() / LN_2
}

/// `1 - phi(u)` with `phi(u) = exp(log(1-a_o) log(1/u) / (log 2 - log(1/u)))`,
/// for `u` in `[1/2, 1]`.
pub fn one_minus_phi(a_o: f64, u: f64) -> f64 {
    if u >= 1.0 || a_o == 0.0 {
        return 0.0;
    }
    let l = -u.ln();
    let denom = LN_2 - l;
    if denom <= 0.0 {
        return 1.0;
    }
    -((-a_o).ln_1p() * l / denom).exp_m1()
}

/// `1 - phi(u) - gamma (1 - u)`; the threshold needs this `<= 0` on `[c, 1]`.
pub fn phi_excess(a_o: f64, gamma: f64, u: f64) -> f64 {
    one_minus_phi(a_o, u) - gamma * (1.0 - u)
}

/// Computes `(gamma, c)` and the geometric profile `((1-c)/gamma) gamma^(r/r_o)`.
///
/// `gamma` defaults to the midpoint of `(-log(1-a_o)/log 2, 1)`. The
/// threshold `c` is the right end of a bisection on the last sign change of
/// [`phi_excess`] found on a uniform grid of `[1/2, 1)`; next to `u = 1`
/// the excess is `(gamma_lower - gamma)(1 - u) + o(1 - u) < 0`.
pub fn self_improve(r_o: f64, a_o: f64, gamma: Option<f64>) -> Result<(SelfImprovementParams, ConcentrationProfile)> {
    if !(r_o > 0.0 && r_o.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "r_o",
            value: r_o,
            reason: "must be positive and finite",
        });
    }
    if !(0.0..0.5).contains(&a_o) {
        return Err(Error::InvalidParameter {
            name: "a_o",
            value: a_o,
            reason: "must lie in [0, 1/2)",
        });
    }
    let lower = gamma_lower_bound(a_o);
    let gamma = gamma.unwrap_or(0.5 * (lower + 1.0));
    if !(gamma > lower && gamma < 1.0) {
        return Err(Error::GammaOutOfRange { gamma, lower });
    }
    let grid = |j: usize| 0.5 + 0.5 * j as f64 / PHI_GRID as f64;
    let last_bad = (0..PHI_GRID).rev().find(|&j| phi_excess(a_o, gamma, grid(j)) > 0.0);
    let c = match last_bad {
        None => 0.5,
        Some(j) => {
            let (mut lo, mut hi) = (grid(j), grid(j + 1));
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if phi_excess(a_o, gamma, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        }
    };
    let params = SelfImprovementParams {
        r_o,
        a_o,
        gamma,
        c,
        gamma_lower: lower,
    };
    let profile = ConcentrationProfile::analytic(AnalyticForm::Geometric {
        c0: (1.0 - c) / gamma,
        gamma,
        r_o,
    });
    Ok((params, profile))
}

/// Largest value of [`phi_excess`] on `points` equally spaced points of
/// `[c, 1]`.
pub fn max_phi_excess(params: &SelfImprovementParams, points: usize) -> f64 {
    (0..=points)
        .map(|j| {
            let u = params.c + (1.0 - params.c) * j as f64 / points as f64;
            phi_excess(params.a_o, params.gamma, u)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
