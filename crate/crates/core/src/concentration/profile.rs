use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::gaussian::log_gaussian_tail;
use crate::numeric::{format_ext, DIST_TOL};
use crate::space::PointSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileMode {
    /// Maximum over all sets of measure at least 1/2.
    Exact,
    /// Maximum over a family of candidate sets: a lower bound on the exact profile.
    HeuristicLowerBound,
    /// Given by a formula (or a hand-built step function).
    Analytic,
}

impl ProfileMode {
    pub fn name(self) -> &'static str {
        match self {
            ProfileMode::Exact => "exact",
            ProfileMode::HeuristicLowerBound => "heuristic-lower-bound",
            ProfileMode::Analytic => "analytic",
        }
    }
}

impl fmt::Display for ProfileMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Breakpoint {
    pub r: f64,
    pub alpha: f64,
    pub witness: Option<PointSet>,
}

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form profiles. `log_alpha` is evaluated directly so that tails far
/// below the double range stay usable.
#[derive(Clone)]
pub enum AnalyticForm {
    /// `b exp(-rate r)`.
    Exponential { b: f64, rate: f64 },
    /// `b exp(-a r^k)`.
    StretchedExponential { b: f64, a: f64, k: f64 },
    /// `P(Z > r / scale)` for a standard Gaussian `Z`.
    GaussianTail { scale: f64 },
    /// `c0 gamma^(r / r_o)`.
    Geometric { c0: f64, gamma: f64, r_o: f64 },
    /// Any nonincreasing function; `scale` sets the search window of
    /// grid-based consumers.
    Custom { alpha: ProfileFn, scale: f64, label: String },
}

impl fmt::Debug for AnalyticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticForm::Exponential { b, rate } => write!(f, "Exponential {{ b: {b}, rate: {rate} }}"),
            AnalyticForm::StretchedExponential { b, a, k } => {
                write!(f, "StretchedExponential {{ b: {b}, a: {a}, k: {k} }}")
            }
            AnalyticForm::GaussianTail { scale } => write!(f, "GaussianTail {{ scale: {scale} }}"),
            AnalyticForm::Geometric { c0, gamma, r_o } => {
                write!(f, "Geometric {{ c0: {c0}, gamma: {gamma}, r_o: {r_o} }}")
            }
            AnalyticForm::Custom { scale, label, .. } => write!(f, "Custom {{ label: {label:?}, scale: {scale} }}"),
        }
    }
}

impl AnalyticForm {
    pub fn log_alpha(&self, r: f64) -> f64 {
        match *self {
            AnalyticForm::Exponential { b, rate } => {
                if r == 0.0 {
                    b.ln()
                } else {
                    b.ln() - rate * r
                }
            }
            AnalyticForm::StretchedExponential { b, a, k } => {
                if r == 0.0 {
                    b.ln()
                } else {
                    b.ln() - a * r.powf(k)
                }
            }
            AnalyticForm::GaussianTail { scale } => log_gaussian_tail(r / scale),
            AnalyticForm::Geometric { c0, gamma, r_o } => c0.ln() + (r / r_o) * gamma.ln(),
            AnalyticForm::Custom { ref alpha, .. } => alpha(r).ln(),
        }
    }

    /// Length scale on which the profile decays.
    pub fn scale(&self) -> f64 {
        match *self {
            AnalyticForm::Exponential { rate, .. } => 1.0 / rate,
            AnalyticForm::StretchedExponential { a, k, .. } => a.powf(-1.0 / k),
            AnalyticForm::GaussianTail { scale } => scale,
            AnalyticForm::Geometric { r_o, .. } => r_o,
            AnalyticForm::Custom { scale, .. } => scale,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            AnalyticForm::Exponential { b, rate } => format!("{b} exp(-{rate} r)"),
            AnalyticForm::StretchedExponential { b, a, k } => format!("{b} exp(-{a} r^{k})"),
            AnalyticForm::GaussianTail { scale } => format!("gaussian tail at r/{scale}"),
            AnalyticForm::Geometric { c0, gamma, r_o } => format!("{c0} * {gamma}^(r/{r_o})"),
            AnalyticForm::Custom { label, .. } => label.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ProfileShape {
    Steps(Vec<Breakpoint>),
    Formula(AnalyticForm),
}

/// A nonincreasing function `r -> alpha(r)` bounding `1 - mu^n(A_{r,p})`
/// over sets of measure at least 1/2.
///
/// Step profiles are right-continuous: a query returns the value at the
/// largest breakpoint `<= r` (within `1e-12`), and `1/2` before the first
/// breakpoint.
#[derive(Clone, Debug)]
pub struct ConcentrationProfile {
    mode: ProfileMode,
    n: usize,
    p: f64,
    shape: ProfileShape,
}

const ALPHA_TOL: f64 = 1e-12;

impl ConcentrationProfile {
    /// Step profile. Breakpoints must have strictly increasing `r >= 0` and
    /// nonincreasing `alpha` in `[0,1]`.
    pub fn steps(mode: ProfileMode, n: usize, p: f64, breakpoints: Vec<Breakpoint>) -> Result<Self> {
        for (i, bp) in breakpoints.iter().enumerate() {
            if !(bp.r >= 0.0 && bp.r.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "r",
                    value: bp.r,
                    reason: "breakpoints must be finite and nonnegative",
                });
            }
            if !(0.0..=1.0).contains(&bp.alpha) {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    value: bp.alpha,
                    reason: "profile values must lie in [0,1]",
                });
            }
            if i > 0 {
                let prev = &breakpoints[i - 1];
                if bp.r <= prev.r {
                    return Err(Error::InvalidParameter {
                        name: "r",
                        value: bp.r,
                        reason: "breakpoints must be strictly increasing",
                    });
                }
                if bp.alpha > prev.alpha + ALPHA_TOL {
                    return Err(Error::InvalidParameter {
                        name: "alpha",
                        value: bp.alpha,
                        reason: "profile must be nonincreasing",
                    });
                }
            }
        }
        Ok(Self {
            mode,
            n,
            p,
            shape: ProfileShape::Steps(breakpoints),
        })
    }

    /// Dimension-free profile given by a formula.
    pub fn analytic(form: AnalyticForm) -> Self {
        Self {
            mode: ProfileMode::Analytic,
            n: 0,
            p: 2.0,
            shape: ProfileShape::Formula(form),
        }
    }

    /// The two-level profile equal to `1/2` on `[0, r_o)` and `a_o` from `r_o` on.
    pub fn minimal(a_o: f64, r_o: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&a_o) {
            return Err(Error::InvalidParameter {
                name: "a_o",
                value: a_o,
                reason: "must lie in [0, 1/2]",
            });
        }
        if !(r_o > 0.0 && r_o.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r_o",
                value: r_o,
                reason: "must be positive and finite",
            });
        }
        Self::steps(
            ProfileMode::Analytic,
            0,
            2.0,
            vec![
                Breakpoint {
                    r: 0.0,
                    alpha: 0.5,
                    witness: None,
                },
                Breakpoint {
                    r: r_o,
                    alpha: a_o,
                    witness: None,
                },
            ],
        )
    }

    /// Same profile, read as a bound on `l_p` enlargements.
    pub fn with_p(mut self, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "exponent must be finite and at least 1",
            });
        }
        self.p = p;
        Ok(self)
    }

    pub fn mode(&self) -> ProfileMode {
        self.mode
    }

    /// Dimension the profile was computed at; 0 for dimension-free profiles.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    pub fn breakpoints(&self) -> Option<&[Breakpoint]> {
        match &self.shape {
            ProfileShape::Steps(b) => Some(b),
            ProfileShape::Formula(_) => None,
        }
    }

    pub fn form(&self) -> Option<&AnalyticForm> {
        match &self.shape {
            ProfileShape::Formula(f) => Some(f),
            ProfileShape::Steps(_) => None,
        }
    }

    fn step_index(&self, r: f64) -> Option<usize> {
        let b = self.breakpoints()?;
        let k = b.partition_point(|bp| bp.r <= r + DIST_TOL);
        k.checked_sub(1)
    }

    /// `alpha(r)`. Formula profiles are returned unclipped and may exceed 1
    /// near `r = 0`.
    pub fn alpha(&self, r: f64) -> f64 {
        match &self.shape {
            ProfileShape::Steps(b) => self.step_index(r).map_or(0.5, |k| b[k].alpha),
            ProfileShape::Formula(f) => f.log_alpha(r).exp(),
        }
    }

    /// `log alpha(r)`, exact in the log domain for formula profiles.
    pub fn log_alpha(&self, r: f64) -> f64 {
        match &self.shape {
            ProfileShape::Steps(_) => self.alpha(r).ln(),
            ProfileShape::Formula(f) => f.log_alpha(r),
        }
    }

    /// `min(alpha(r), 1/2)`.
    pub fn alpha_clipped(&self, r: f64) -> f64 {
        self.alpha(r).min(0.5)
    }

    pub fn witness(&self, r: f64) -> Option<&PointSet> {
        let k = self.step_index(r)?;
        self.breakpoints()?[k].witness.as_ref()
    }

    /// Writes `r,alpha,mode,witness_id,n` rows: the breakpoints of a step
    /// profile, or the formula sampled at `radii`. Witness ids index the
    /// list returned by [`Self::witness_sets`].
    pub fn write_csv<W: Write>(&self, w: W, radii: &[f64]) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "alpha", "mode", "witness_id", "n"])?;
        match &self.shape {
            ProfileShape::Steps(b) => {
                let mut next_id = 0;
                for bp in b {
                    let id = match bp.witness {
                        Some(_) => {
                            next_id += 1;
                            format!("w{}", next_id - 1)
                        }
                        None => String::new(),
                    };
                    out.write_record([
                        format_ext(bp.r),
                        format_ext(bp.alpha),
                        self.mode.name().to_string(),
                        id,
                        self.n.to_string(),
                    ])?;
                }
            }
            ProfileShape::Formula(_) => {
                for &r in radii {
                    out.write_record([
                        format_ext(r),
                        format_ext(self.alpha(r)),
                        self.mode.name().to_string(),
                        String::new(),
                        self.n.to_string(),
                    ])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, radii: &[f64]) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, radii).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// `(witness_id, indices)` for every breakpoint carrying a witness, in
    /// breakpoint order.
    pub fn witness_sets(&self) -> Vec<(String, Vec<usize>)> {
        self.breakpoints()
            .unwrap_or(&[])
            .iter()
            .filter_map(|bp| bp.witness.as_ref())
            .enumerate()
            .map(|(i, w)| (format!("w{i}"), w.indices()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(points: &[(f64, f64)]) -> ConcentrationProfile {
        let b = points
            .iter()
            .map(|&(r, alpha)| Breakpoint { r, alpha, witness: None })
            .collect();
        ConcentrationProfile::steps(ProfileMode::Exact, 1, 2.0, b).unwrap()
    }

    #[test]
    fn step_lookup_is_right_continuous() {
        let p = step(&[(0.0, 0.5), (1.0, 0.25), (2.0, 0.0)]);
        assert_eq!(p.alpha(0.0), 0.5);
        assert_eq!(p.alpha(0.999), 0.5);
        assert_eq!(p.alpha(1.0), 0.25);
        assert_eq!(p.alpha(1.0 - 1e-13), 0.25);
        assert_eq!(p.alpha(1.5), 0.25);
        assert_eq!(p.alpha(7.0), 0.0);
        let late = step(&[(1.0, 0.1)]);
        assert_eq!(late.alpha(0.5), 0.5);
    }

    #[test]
    fn rejects_malformed_steps() {
        let b = |r, alpha| Breakpoint { r, alpha, witness: None };
        assert!(ConcentrationProfile::steps(ProfileMode::Exact, 1, 2.0, vec![b(0.0, 0.1), b(1.0, 0.2)]).is_err());
        assert!(ConcentrationProfile::steps(ProfileMode::Exact, 1, 2.0, vec![b(1.0, 0.1), b(1.0, 0.0)]).is_err());
        assert!(ConcentrationProfile::steps(ProfileMode::Exact, 1, 2.0, vec![b(0.0, 1.5)]).is_err());
        assert!(ConcentrationProfile::minimal(0.6, 1.0).is_err());
    }

    #[test]
    fn formula_profiles_evaluate_in_log_domain() {
        let p = ConcentrationProfile::analytic(AnalyticForm::Exponential { b: 2.0, rate: 0.5 });
        assert!((p.alpha(2.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(p.alpha(0.0), 2.0);
        assert_eq!(p.alpha_clipped(0.0), 0.5);
        let inf_rate = ConcentrationProfile::analytic(AnalyticForm::Exponential { b: 2.0, rate: f64::INFINITY });
        assert_eq!(inf_rate.alpha(0.0), 2.0);
        assert_eq!(inf_rate.alpha(0.1), 0.0);
        let g = ConcentrationProfile::analytic(AnalyticForm::GaussianTail { scale: 1.0 });
        assert!((g.log_alpha(40.0) + 804.608_442_013_753_8).abs() < 1e-9);
        let m = ConcentrationProfile::minimal(0.2, 1.5).unwrap();
        assert_eq!(m.alpha(1.4), 0.5);
        assert_eq!(m.alpha(1.5), 0.2);
    }

    #[test]
    fn csv_lists_breakpoints_and_witnesses() {
        let w = PointSet::from_indices(4, [0, 2]).unwrap();
        let p = ConcentrationProfile::steps(
            ProfileMode::Exact,
            2,
            2.0,
            vec![
                Breakpoint {
                    r: 0.0,
                    alpha: 0.5,
                    witness: Some(w.clone()),
                },
                Breakpoint {
                    r: 1.0,
                    alpha: 0.25,
                    witness: Some(w),
                },
            ],
        )
        .unwrap();
        let text = p.to_csv_string(&[]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,alpha,mode,witness_id,n");
        assert_eq!(lines[2], "1,0.25,exact,w1,2");
        assert_eq!(p.witness_sets()[1], ("w1".to_string(), vec![0, 2]));
    }
}
