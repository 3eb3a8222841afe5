//! Exhaustive and randomized re-verification of concentration profiles:
//! indicator sweeps through the deviation inequality, random deviation
//! checks, and the geometric self-improvement bound on every large set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::calculus::RealFunction;
use crate::error::{Error, Result};
use crate::numeric::{DIST_TOL, MASS_TOL};
use crate::space::{PointSet, ProductSpace};

use super::deviation::{deviation_records, DeviationRecord, DEVIATION_TOL};
use super::exact::EXACT_CAP;
use super::profile::{ConcentrationProfile, ProfileShape};
use super::self_improve::SelfImprovementParams;

/// Largest product handled by [`indicator_sweep`]; every subset costs one
/// inf-convolution.
pub const SWEEP_CAP: usize = 16;

fn subset_masses(view: &ProductSpace) -> impl Fn(u64) -> f64 + '_ {
    let w = view.measures();
    move |mask: u64| (0..w.len()).filter(|b| mask >> b & 1 == 1).map(|b| w[b]).sum()
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    /// Enlargement radius `r^(1/p) t^(1-1/p)`, a breakpoint of the profile.
    pub rho: f64,
    /// Deviation level `rho^p / t^(p-1)`.
    pub r: f64,
    /// Largest `mu^n(Q_t i_A > m(i_A) + r)` over sets with `mu^n(A) >= 1/2`.
    pub regenerated: f64,
    pub alpha: f64,
    pub witness: PointSet,
}

#[derive(Clone, Debug)]
pub struct IndicatorSweep {
    pub t: f64,
    pub sets: usize,
    pub rows: Vec<SweepRow>,
}

impl IndicatorSweep {
    pub fn max_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.regenerated - row.alpha).abs())
            .fold(0.0, f64::max)
    }

    pub fn exact(&self) -> bool {
        self.max_gap() <= DEVIATION_TOL
    }
}

/// Rebuilds a step profile from the deviation inequality applied to the
/// indicators `i_A` (0 on `A`, `+inf` off `A`) of every set of measure at
/// least 1/2, at each positive breakpoint radius.
pub fn indicator_sweep(view: &ProductSpace, profile: &ConcentrationProfile, t: f64) -> Result<IndicatorSweep> {
    let len = view.len();
    if len > SWEEP_CAP {
        return Err(Error::TooLarge {
            points: len,
            cap: SWEEP_CAP,
        });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "must be positive and finite",
        });
    }
    let ProfileShape::Steps(bps) = profile.shape() else {
        return Err(Error::DomainError("indicator sweep needs a step profile".into()));
    };
    let p = profile.p();
    let rhos: Vec<f64> = bps.iter().map(|b| b.r).filter(|&r| r > 0.0).collect();
    let rs: Vec<f64> = rhos.iter().map(|&rho| rho.powf(p) / t.powf(p - 1.0)).collect();
    let mass = subset_masses(view);
    let masks: Vec<u64> = (1u64..1 << len).filter(|&m| mass(m) >= 0.5 - MASS_TOL).collect();
    let k = rs.len();
    let per_set: Vec<(u64, Vec<f64>)> = masks
        .par_iter()
        .map(|&mask| {
            let a = PointSet::from_mask(len, mask);
            let f = RealFunction::indicator(view.clone(), &a)?;
            let recs = deviation_records(&f, t, &rs, profile)?;
            Ok((mask, recs.into_iter().map(|r| r.lhs).collect()))
        })
        .collect::<Result<_>>()?;
    let mut best = vec![(f64::NEG_INFINITY, 0u64); k];
    for (mask, lhs) in &per_set {
        for (b, &v) in best.iter_mut().zip(lhs) {
            if v > b.0 {
                *b = (v, *mask);
            }
        }
    }
    let rows = (0..k)
        .map(|j| SweepRow {
            rho: rhos[j],
            r: rs[j],
            regenerated: best[j].0.max(0.0),
            alpha: profile.alpha(rhos[j]),
            witness: PointSet::from_mask(len, best[j].1),
        })
        .collect();
    Ok(IndicatorSweep {
        t,
        sets: masks.len(),
        rows,
    })
}

/// A bounded-below function with values in `[0, scale]` and, with
/// probability 1/3, some `+inf` entries of total mass below 1/2.
pub fn random_bounded_below(view: &ProductSpace, scale: f64, rng: &mut impl Rng) -> Result<RealFunction> {
    let len = view.len();
    let mut values: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..=scale)).collect();
    if rng.gen_bool(1.0 / 3.0) {
        let mut inf_mass = 0.0;
        let tries = rng.gen_range(1..=len);
        for _ in 0..tries {
            let x = rng.gen_range(0..len);
            if values[x].is_finite() && inf_mass + view.measure(x) < 0.5 - 1e-9 {
                inf_mass += view.measure(x);
                values[x] = f64::INFINITY;
            }
        }
    }
    RealFunction::new_extended(view.clone(), values)
}

#[derive(Clone, Debug)]
pub struct DeviationSummary {
    pub functions: usize,
    pub records: usize,
    pub violations: Vec<DeviationRecord>,
    /// Record with the largest `lhs - rhs`.
    pub tightest: Option<DeviationRecord>,
}

/// Deviation records for `count` random bounded-below functions at every
/// `(t, r)` pair. Function `j` is drawn from a generator seeded with
/// `seed + j`.
pub fn random_deviation_checks(
    view: &ProductSpace,
    profile: &ConcentrationProfile,
    count: usize,
    seed: u64,
    ts: &[f64],
    rs: &[f64],
) -> Result<DeviationSummary> {
    let scale = view.diameter().powf(profile.p()).max(1.0);
    let all: Vec<Vec<DeviationRecord>> = (0..count)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(j as u64));
            let f = random_bounded_below(view, scale, &mut rng)?;
            let mut out = Vec::with_capacity(ts.len() * rs.len());
            for &t in ts {
                out.extend(deviation_records(&f, t, rs, profile)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut summary = DeviationSummary {
        functions: count,
        records: 0,
        violations: Vec::new(),
        tightest: None,
    };
    for rec in all.into_iter().flatten() {
        summary.records += 1;
        if rec.violated {
            summary.violations.push(rec.clone());
        }
        let gap = rec.lhs - rec.rhs;
        if summary.tightest.as_ref().map_or(true, |t| gap > t.lhs - t.rhs) {
            summary.tightest = Some(rec);
        }
    }
    Ok(summary)
}

/// `(r_o, a_o)`: the first radius where a step profile drops strictly below
/// both 1/2 and its value at 0, with the value there. The level at 0 only
/// records how evenly atoms split and tends to 1/2 as `n` grows, so it is
/// never read as a contraction.
pub fn contraction_point(profile: &ConcentrationProfile) -> Option<(f64, f64)> {
    let bps = profile.breakpoints()?;
    let level = bps.first().map_or(0.5, |b| b.alpha).min(0.5);
    bps.iter()
        .find(|b| b.r > 0.0 && b.alpha < level - MASS_TOL)
        .map(|b| (b.r, b.alpha))
}

#[derive(Clone, Debug)]
pub struct ImprovementRow {
    pub r: f64,
    /// Largest `1 - mu^n(A_{r,p})` over sets with `mu^n(A) >= c`.
    pub worst: f64,
    pub bound: f64,
    pub witness: PointSet,
}

#[derive(Clone, Debug)]
pub struct SelfImprovementCheck {
    pub params: SelfImprovementParams,
    pub sets: usize,
    pub rows: Vec<ImprovementRow>,
}

impl SelfImprovementCheck {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.worst > r.bound + DEVIATION_TOL).count()
    }
}

/// Checks `mu^n(A_{r,p}) >= 1 - improved(r)` for every set with
/// `mu^n(A) >= c` at each radius.
pub fn verify_self_improvement(
    view: &ProductSpace,
    params: &SelfImprovementParams,
    improved: &ConcentrationProfile,
    radii: &[f64],
) -> Result<SelfImprovementCheck> {
    let len = view.len();
    if len > EXACT_CAP {
        return Err(Error::TooLarge {
            points: len,
            cap: EXACT_CAP,
        });
    }
    let nbr: Vec<Vec<u64>> = radii
        .iter()
        .map(|&r| {
            (0..len)
                .map(|x| {
                    (0..len)
                        .filter(|&y| view.distance(x, y) <= r + DIST_TOL)
                        .fold(0u64, |m, y| m | 1 << y)
                })
                .collect()
        })
        .collect();
    let mass = subset_masses(view);
    let k = radii.len();
    let full: u64 = (1u64 << len) - 1;
    let (sets, best) = (1u64..=full)
        .into_par_iter()
        .filter(|&m| mass(m) >= params.c - MASS_TOL)
        .map(|mask| {
            let worst: Vec<(f64, u64)> = nbr
                .iter()
                .map(|nb| {
                    let enl = (0..len).filter(|&x| mask >> x & 1 == 1).fold(0u64, |e, x| e | nb[x]);
                    (1.0 - mass(enl), mask)
                })
                .collect();
            (1usize, worst)
        })
        .reduce(
            || (0, vec![(f64::NEG_INFINITY, u64::MAX); k]),
            |a, b| {
                let merged = a
                    .1
                    .iter()
                    .zip(&b.1)
                    .map(|(x, y)| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { *y } else { *x })
                    .collect();
                (a.0 + b.0, merged)
            },
        );
    let rows = radii
        .iter()
        .zip(best)
        .map(|(&r, (worst, mask))| ImprovementRow {
            r,
            worst: worst.max(0.0),
            bound: improved.alpha(r),
            witness: PointSet::from_mask(len, if mask == u64::MAX { 0 } else { mask }),
        })
        .collect();
    Ok(SelfImprovementCheck {
        params: *params,
        sets,
        rows,
    })
}
