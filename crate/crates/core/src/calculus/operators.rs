use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::RealFunction;

const PAR_THRESHOLD: usize = 256;

/// Which part of the difference `f(y) - f(x)` enters the slope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientKind {
    /// `[f(y) - f(x)]_-`, the descending slope.
    Minus,
    /// `[f(y) - f(x)]_+`.
    Plus,
    /// `|f(y) - f(x)|`.
    Abs,
}

impl GradientKind {
    pub const ALL: [GradientKind; 3] = [GradientKind::Minus, GradientKind::Plus, GradientKind::Abs];

    /// The bracketed numerator for a difference `delta = f(y) - f(x)`.
    #[inline]
    pub fn bracket(self, delta: f64) -> f64 {
        match self {
            GradientKind::Minus => (-delta).max(0.0),
            GradientKind::Plus => delta.max(0.0),
            GradientKind::Abs => delta.abs(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GradientKind::Minus => "minus",
            GradientKind::Plus => "plus",
            GradientKind::Abs => "abs",
        }
    }
}

impl fmt::Display for GradientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GradientKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minus" => Ok(GradientKind::Minus),
            "plus" => Ok(GradientKind::Plus),
            "abs" => Ok(GradientKind::Abs),
            other => Err(Error::Parse(format!("unknown gradient kind {other:?} (expected minus, plus or abs)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfConvParams {
    t: f64,
    p: f64,
}

impl InfConvParams {
    pub fn new(t: f64, p: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                reason: "time must be positive and finite",
            });
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "exponent must be a finite real >= 1",
            });
        }
        Ok(Self { t, p })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupConvParams {
    eps: f64,
}

impl SupConvParams {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eps",
                value: eps,
                reason: "regularization must be positive and finite",
            });
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

fn pointwise<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if len >= PAR_THRESHOLD {
        (0..len).into_par_iter().map(f).collect()
    } else {
        (0..len).map(f).collect()
    }
}

/// Maximal slope `max_{y != x} bracket(f(y) - f(x)) / d_p(x, y)`, with the
/// view's own `l_p` distance. Zero on a one-point space.
pub fn gradient(f: &RealFunction, kind: GradientKind) -> Result<RealFunction> {
    f.require_finite()?;
    let view = f.view();
    let vals = f.values();
    let out = pointwise(f.len(), |x| {
        let fx = vals[x];
        let mut best = 0.0f64;
        for (y, &fy) in vals.iter().enumerate() {
            if y != x {
                let s = kind.bracket(fy - fx) / view.distance(x, y);
                if s > best {
                    best = s;
                }
            }
        }
        best
    });
    f.with_values(out)
}

/// Slope in coordinate `i` only, all other coordinates frozen.
pub fn coordinate_gradient(f: &RealFunction, i: usize, kind: GradientKind) -> Result<RealFunction> {
    f.require_finite()?;
    let view = f.view();
    if i >= view.n() {
        return Err(Error::IndexOutOfRange { index: i, len: view.n() });
    }
    let out = pointwise(f.len(), |x| coord_slope(f, x, i, kind));
    f.with_values(out)
}

#[inline]
fn coord_slope(f: &RealFunction, x: usize, i: usize, kind: GradientKind) -> f64 {
    let view = f.view();
    let base = view.base();
    let xi = view.coord(x, i);
    let fx = f.value(x);
    let mut best = 0.0f64;
    for z in 0..base.len() {
        if z != xi {
            let y = view.replace_coord(x, i, z);
            let s = kind.bracket(f.value(y) - fx) / base.dist(xi, z);
            if s > best {
                best = s;
            }
        }
    }
    best
}

/// `sum_i |grad_i f|^2` at every point.
pub fn gradient_sum_sq(f: &RealFunction, kind: GradientKind) -> Result<RealFunction> {
    f.require_finite()?;
    let n = f.view().n();
    let out = pointwise(f.len(), |x| {
        (0..n)
            .map(|i| {
                let s = coord_slope(f, x, i, kind);
                s * s
            })
            .sum()
    });
    f.with_values(out)
}

fn check_measure_finite(f: &RealFunction) -> Result<()> {
    let view = f.view();
    for (x, v) in f.values().iter().enumerate() {
        if !v.is_finite() && view.measure(x) > 0.0 {
            return Err(Error::InfiniteValueAtPoint { index: x });
        }
    }
    Ok(())
}

/// `int f dmu^n`; points without mass are ignored.
pub fn mean(f: &RealFunction) -> Result<f64> {
    check_measure_finite(f)?;
    let view = f.view();
    Ok(f.values()
        .iter()
        .enumerate()
        .filter(|(x, _)| view.measure(*x) > 0.0)
        .map(|(x, v)| view.measure(x) * v)
        .sum())
}

/// `Var_{mu^n}(f)`, computed around the mean to limit cancellation.
pub fn variance(f: &RealFunction) -> Result<f64> {
    let m = mean(f)?;
    let view = f.view();
    let v: f64 = f
        .values()
        .iter()
        .enumerate()
        .filter(|(x, _)| view.measure(*x) > 0.0)
        .map(|(x, v)| view.measure(x) * (v - m) * (v - m))
        .sum();
    Ok(v.max(0.0))
}

/// `int g dmu^n` for a nonnegative function given by its values.
pub fn integrate(f: &RealFunction, g: &[f64]) -> f64 {
    let view = f.view();
    g.iter()
        .enumerate()
        .filter(|(x, _)| view.measure(*x) > 0.0)
        .map(|(x, v)| view.measure(x) * v)
        .sum()
}

/// `Q_t f(x) = min_y f(y) + d_p(x,y)^p / t^(p-1)`, where `p` comes from
/// `params` (the view's own exponent is not used).
pub fn inf_conv(f: &RealFunction, params: InfConvParams) -> Result<RealFunction> {
    if let Some(index) = f.values().iter().position(|&v| v == f64::NEG_INFINITY) {
        return Err(Error::NegativeInfinity { index });
    }
    if f.values().iter().all(|v| *v == f64::INFINITY) {
        return Err(Error::AllInfinite);
    }
    let view = f.view();
    let vals = f.values();
    let scale = params.t.powf(params.p - 1.0);
    let finite: Vec<usize> = (0..vals.len()).filter(|&y| vals[y].is_finite()).collect();
    let out = pointwise(f.len(), |x| {
        finite
            .iter()
            .map(|&y| vals[y] + view.distance_pow_with(x, y, params.p) / scale)
            .fold(f64::INFINITY, f64::min)
    });
    f.with_values(out)
}

/// `R_eps f(x) = max_y f(y) - sqrt(eps + d_2(x,y)^2)`, always with the
/// Euclidean product distance.
pub fn sup_conv(f: &RealFunction, params: SupConvParams) -> Result<RealFunction> {
    if let Some(index) = f.values().iter().position(|&v| v == f64::INFINITY) {
        return Err(Error::InfiniteValueAtPoint { index });
    }
    if f.values().iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::AllNegInfinite);
    }
    let view = f.view();
    let vals = f.values();
    let finite: Vec<usize> = (0..vals.len()).filter(|&y| vals[y].is_finite()).collect();
    let out = pointwise(f.len(), |x| {
        finite
            .iter()
            .map(|&y| vals[y] - (params.eps + view.distance_pow_with(x, y, 2.0)).sqrt())
            .fold(f64::NEG_INFINITY, f64::max)
    });
    f.with_values(out)
}

/// `(h - Q_t h) / t` at `p = 2`.
pub fn hopf_lax_rate(h: &RealFunction, t: f64) -> Result<RealFunction> {
    h.require_finite()?;
    let q = inf_conv(h, InfConvParams::new(t, 2.0)?)?;
    let out = h.values().iter().zip(q.values()).map(|(a, b)| (a - b) / t).collect();
    h.with_values(out)
}

/// `max_{x != y} |f(x) - f(y)| / d(x, y)` for the view's distance.
pub fn lipschitz_constant(f: &RealFunction) -> Result<f64> {
    lipschitz_with(f, |x, y| f.view().distance(x, y))
}

/// Lipschitz constant with respect to the Euclidean product distance.
pub fn lipschitz_constant_d2(f: &RealFunction) -> Result<f64> {
    lipschitz_with(f, |x, y| f.view().distance2(x, y))
}

fn lipschitz_with(f: &RealFunction, d: impl Fn(usize, usize) -> f64 + Sync) -> Result<f64> {
    f.require_finite()?;
    let vals = f.values();
    let per_x = pointwise(vals.len(), |x| {
        (x + 1..vals.len())
            .map(|y| (vals[x] - vals[y]).abs() / d(x, y))
            .fold(0.0, f64::max)
    });
    Ok(per_x.into_iter().fold(0.0, f64::max))
}
