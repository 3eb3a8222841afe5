use libm::erfc;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// Above this argument `erfc` underflows, so the tail is taken from the
/// Mills-ratio continued fraction in the log domain.
const CF_THRESHOLD: f64 = 30.0;

/// Standard Gaussian tail `P(Z > x)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct StandardGaussianTail;

impl StandardGaussianTail {
    pub fn eval(self, x: f64) -> f64 {
        gaussian_tail(x)
    }

    pub fn inverse(self, q: f64) -> Result<f64> {
        gaussian_tail_inverse(q)
    }
}

pub fn gaussian_tail(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `log P(Z > x)`, accurate far into the tail.
pub fn log_gaussian_tail(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if x < CF_THRESHOLD {
        return gaussian_tail(x).ln();
    }
    -0.5 * x * x - LN_SQRT_2PI + mills_ratio_cf(x).ln()
}

/// `P(Z > x) / phi(x)` by the continued fraction
/// `1/(x + 1/(x + 2/(x + 3/(x + ...))))`, evaluated with Lentz's method.
fn mills_ratio_cf(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

fn log_density(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `x` with `P(Z > x) = q`.
pub fn gaussian_tail_inverse(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DomainError(format!("tail probability {q} outside (0,1)")));
    }
    if q == 0.5 {
        return Ok(0.0);
    }
    if q > 0.5 {
        return Ok(-solve_upper(q.ln_1p_neg()));
    }
    Ok(solve_upper(q.ln()))
}

/// `x` with `log P(Z > x) = log_q`, for `log_q <= log(1/2)`; accepts
/// probabilities far below the smallest positive double.
pub fn gaussian_tail_inverse_log(log_q: f64) -> Result<f64> {
    let half = -std::f64::consts::LN_2;
    if log_q.is_nan() || log_q > half + 1e-15 {
        return Err(Error::DomainError(format!("log tail probability {log_q} above log(1/2)")));
    }
    if log_q >= half {
        return Ok(0.0);
    }
    if log_q == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(solve_upper(log_q))
}

trait Ln1pNeg {
    fn ln_1p_neg(self) -> f64;
}

impl Ln1pNeg for f64 {
    /// `log(1 - self)`.
    fn ln_1p_neg(self) -> f64 {
        (-self).ln_1p()
    }
}

/// Root of `log_tail(x) = log_q` on `x >= 0`, safeguarded Newton inside a
/// shrinking bisection bracket.
fn solve_upper(log_q: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = (-2.0 * log_q).sqrt().max(1.0) + 1.0;
    let g = |x: f64| log_gaussian_tail(x) - log_q;
    let mut x = (-2.0 * log_q - (-2.0 * log_q).max(1.0).ln()).max(0.0).sqrt().clamp(lo, hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx log tail = -phi / tail
        let slope = -(log_density(x) - log_gaussian_tail(x)).exp();
        let mut next = x - gx / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.abs().max(1e-300) || hi - lo <= 1e-16 * hi {
            return next;
        }
        x = next;
    }
    x
}
