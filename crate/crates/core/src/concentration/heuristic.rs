use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::numeric::{DIST_TOL, MASS_TOL};
use crate::space::{distance_to_set, PointSet, ProductSpace};

use super::exact::normalize_radii;
use super::profile::{Breakpoint, ConcentrationProfile, ProfileMode};

/// Candidate set generators for [`heuristic_profile`].
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateFamilies {
    /// Nearest-point prefixes (balls completed greedily) around centers.
    pub balls: bool,
    /// Sub-level sets of `x -> sum_i d(x_i, z)` for base points `z`, from
    /// both ends.
    pub half_spaces: bool,
    /// Number of random greedy growths.
    pub random_growths: usize,
    /// Ball centers are all points when the product has at most this many
    /// points, a seeded sample of this size otherwise.
    pub max_centers: usize,
    pub seed: u64,
}

impl Default for CandidateFamilies {
    fn default() -> Self {
        Self {
            balls: true,
            half_spaces: true,
            random_growths: 32,
            max_centers: 256,
            seed: 0,
        }
    }
}

impl CandidateFamilies {
    pub fn balls_only() -> Self {
        Self {
            balls: true,
            half_spaces: false,
            random_growths: 0,
            ..Self::default()
        }
    }
}

/// Adds points in the given order until the set carries mass 1/2.
fn prefix_to_half(view: &ProductSpace, order: &[usize]) -> PointSet {
    let mut set = PointSet::empty(view.len());
    let mut mass = 0.0;
    for &x in order {
        if mass >= 0.5 - MASS_TOL {
            break;
        }
        set.insert(x);
        mass += view.measure(x);
    }
    set
}

fn sorted_by_key(len: usize, key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    idx
}

fn candidates(view: &ProductSpace, fam: &CandidateFamilies) -> Vec<PointSet> {
    let len = view.len();
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(fam.seed);
    if fam.balls {
        let centers: Vec<usize> = if len <= fam.max_centers {
            (0..len).collect()
        } else {
            (0..fam.max_centers).map(|_| rng.gen_range(0..len)).collect()
        };
        for c in centers {
            out.push(prefix_to_half(view, &sorted_by_key(len, |x| view.distance(c, x))));
        }
    }
    if fam.half_spaces {
        let base = view.base();
        for z in 0..base.len() {
            let score = |x: usize| (0..view.n()).map(|i| base.dist(view.coord(x, i), z)).sum::<f64>();
            let asc = sorted_by_key(len, score);
            out.push(prefix_to_half(view, &asc));
            let desc: Vec<usize> = sorted_by_key(len, |x| -score(x));
            out.push(prefix_to_half(view, &desc));
        }
    }
    for _ in 0..fam.random_growths {
        let start = rng.gen_range(0..len);
        let mut set = PointSet::empty(len);
        set.insert(start);
        let mut mass = view.measure(start);
        let mut dist: Vec<f64> = (0..len).map(|x| view.distance(start, x)).collect();
        while mass < 0.5 - MASS_TOL {
            let closest = (0..len)
                .filter(|&x| !set.contains(x))
                .map(|x| dist[x])
                .fold(f64::INFINITY, f64::min);
            let mut ties: Vec<usize> = (0..len)
                .filter(|&x| !set.contains(x) && dist[x] <= closest + DIST_TOL)
                .collect();
            ties.shuffle(&mut rng);
            let x = ties[0];
            set.insert(x);
            mass += view.measure(x);
            for (y, d) in dist.iter_mut().enumerate() {
                *d = d.min(view.distance(x, y));
            }
        }
        out.push(set);
    }
    out
}

/// Lower bound on the exact profile: the maximum of `1 - mu^n(A_{r,p})` over
/// generated candidate sets of measure at least 1/2.
pub fn heuristic_profile(view: &ProductSpace, radii: &[f64], families: &CandidateFamilies) -> Result<ConcentrationProfile> {
    let radii = normalize_radii(radii)?;
    let cands = candidates(view, families);
    let scored: Vec<Vec<f64>> = cands
        .par_iter()
        .map(|a| {
            let d = distance_to_set(view, a).expect("candidates are nonempty");
            radii
                .iter()
                .map(|&r| {
                    let inside: f64 = (0..view.len())
                        .filter(|&x| d[x] <= r + DIST_TOL)
                        .map(|x| view.measure(x))
                        .sum();
                    (1.0 - inside).clamp(0.0, 0.5)
                })
                .collect()
        })
        .collect();
    let mut breakpoints = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        let mut best = 0.0;
        let mut witness = None;
        for (c, s) in scored.iter().enumerate() {
            if witness.is_none() || s[k] > best {
                best = s[k];
                witness = Some(c);
            }
        }
        breakpoints.push(Breakpoint {
            r,
            alpha: best,
            witness: witness.map(|c| cands[c].clone()),
        });
    }
    ConcentrationProfile::steps(ProfileMode::HeuristicLowerBound, view.n(), view.p(), breakpoints)
}
