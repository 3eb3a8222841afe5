//! Small numerical utilities shared across modules: tolerances, adaptive
//! Simpson quadrature, golden-section search and serde helpers for extended
//! reals.

pub mod simplex;

/// Absolute tolerance used when comparing a distance against a radius.
pub const DIST_TOL: f64 = 1e-12;

/// Absolute tolerance on "measure >= 1/2" style comparisons.
pub const MASS_TOL: f64 = 1e-12;

/// Tolerance on the total mass of a probability vector.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Returns `(argmax, max)`. Assumes `f` is unimodal on the bracket; on
/// non-unimodal input the result is a local maximum inside the bracket.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
        if (hi - lo).abs() <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"` (plain JSON has no representation for them).
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::format_ext(*v))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => super::parse_ext(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Same as [`ext_real`] for `Vec<f64>`.
pub mod ext_real_vec {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Wrapped(*x))?;
        }
        seq.end()
    }

    struct Wrapped(f64);

    impl serde::Serialize for Wrapped {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::ext_real::serialize(&self.0, s)
        }
    }

    #[derive(Deserialize)]
    struct Unwrapped(#[serde(with = "super::ext_real")] f64);

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Unwrapped> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|u| u.0).collect())
    }
}

/// Formats an extended real; infinities become `inf` / `-inf`.
pub fn format_ext(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Parses an extended real written by [`format_ext`].
pub fn parse_ext(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
        "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
        "nan" | "NaN" => Ok(f64::NAN),
        t => t.parse::<f64>().map_err(|e| format!("cannot parse {t:?} as a number: {e}")),
    }
}

/// Difference `rhs - lhs` with the convention that equal infinities give 0.
pub fn ext_margin(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        0.0
    } else {
        rhs - lhs
    }
}

/// Parses a radii grid `start:stop:step` (or a single radius). Grid points
/// are `start + j * step` for integer `j`, so no rounding accumulates; `stop`
/// is included when it lies on the grid up to a relative `1e-9`.
pub fn parse_radii(spec: &str) -> crate::error::Result<Vec<f64>> {
    use crate::error::Error;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("radii spec {spec:?}: cannot parse {t:?}: {e}")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let (start, stop, step) = match parts.as_slice() {
        [r] => {
            let r = num(r)?;
            (r, r, 1.0)
        }
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(Error::Parse(format!("radii spec {spec:?} is not start:stop:step"))),
    };
    if !(start >= 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "radii",
            value: start,
            reason: "start and stop must be finite and nonnegative",
        });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "radii step must be positive",
        });
    }
    if stop < start {
        return Err(Error::InvalidParameter {
            name: "stop",
            value: stop,
            reason: "radii stop must be at least start",
        });
    }
    let count = ((stop - start) / step * (1.0 + 1e-9)).floor();
    if count > 1e6 {
        return Err(Error::InvalidParameter {
            name: "radii",
            value: count,
            reason: "radii grid has more than a million points",
        });
    }
    Ok((0..=count as usize).map(|j| start + j as f64 * step).collect())
}
