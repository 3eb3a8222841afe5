use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{DIST_TOL, MASS_TOL};
use crate::space::{PointSet, ProductSpace};

use super::profile::{Breakpoint, ConcentrationProfile, ProfileMode};

/// Largest number of product points whose subsets are enumerated.
pub const EXACT_CAP: usize = 22;

const SPLIT_DEPTH: usize = 6;

/// Sorted, deduplicated, validated radii.
pub fn normalize_radii(radii: &[f64]) -> Result<Vec<f64>> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter {
            name: "radii",
            value: 0.0,
            reason: "at least one radius is required",
        });
    }
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "radii must be finite and nonnegative",
            });
        }
        out.push(r);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Subset masses by table lookup, 8 bits at a time.
struct MassTable {
    chunks: Vec<[f64; 256]>,
}

impl MassTable {
    fn new(weights: &[f64]) -> Self {
        let chunks = weights
            .chunks(8)
            .map(|w| {
                let mut t = [0.0; 256];
                for (mask, slot) in t.iter_mut().enumerate() {
                    *slot = (0..w.len()).filter(|b| mask >> b & 1 == 1).map(|b| w[b]).sum();
                }
                t
            })
            .collect();
        Self { chunks }
    }

    #[inline]
    fn mass(&self, mask: u32) -> f64 {
        let mut s = 0.0;
        for (c, t) in self.chunks.iter().enumerate() {
            s += t[((mask >> (8 * c)) & 0xff) as usize];
        }
        s
    }
}

struct Problem<'a> {
    len: usize,
    weights: &'a [f64],
    suffix: Vec<f64>,
    /// `nbr[k][x]`: points within radius `k` of `x`.
    nbr: Vec<Vec<u32>>,
    table: MassTable,
}

#[derive(Clone)]
struct Best {
    alpha: Vec<f64>,
    witness: Vec<u32>,
}

impl Best {
    fn empty(k: usize) -> Self {
        Self {
            alpha: vec![f64::NEG_INFINITY; k],
            witness: vec![0; k],
        }
    }

    /// Keeps the earlier entry on ties, so the merge order decides witnesses.
    fn absorb(&mut self, other: &Best) {
        for k in 0..self.alpha.len() {
            if other.alpha[k] > self.alpha[k] {
                self.alpha[k] = other.alpha[k];
                self.witness[k] = other.witness[k];
            }
        }
    }
}

impl Problem<'_> {
    /// Include-first depth-first search below position `i`.
    fn dfs(&self, i: usize, set: u32, mass: f64, enl: &mut Vec<u32>, best: &mut Best) {
        if mass + self.suffix[i] < 0.5 - MASS_TOL {
            return;
        }
        // enlargements only grow along a branch: stop once no radius can improve
        if enl
            .iter()
            .zip(&best.alpha)
            .all(|(&m, &b)| 1.0 - self.table.mass(m) <= b)
        {
            return;
        }
        if i == self.len {
            if mass >= 0.5 - MASS_TOL {
                for (k, &m) in enl.iter().enumerate() {
                    let a = (1.0 - self.table.mass(m)).clamp(0.0, 0.5);
                    if a > best.alpha[k] {
                        best.alpha[k] = a;
                        best.witness[k] = set;
                    }
                }
            }
            return;
        }
        let saved: Vec<u32> = enl.clone();
        for (k, m) in enl.iter_mut().enumerate() {
            *m |= self.nbr[k][i];
        }
        self.dfs(i + 1, set | 1 << i, mass + self.weights[i], enl, best);
        enl.copy_from_slice(&saved);
        self.dfs(i + 1, set, mass, enl, best);
    }
}

/// `alpha(r) = max { 1 - mu^n(A_{r,p}) : mu^n(A) >= 1/2 }` by enumeration of
/// every subset of the product, with one witness per radius.
///
/// Witnesses are the first maximizers in include-first lexicographic order
/// over point indices, independently of the number of worker threads.
pub fn exact_profile(view: &ProductSpace, radii: &[f64]) -> Result<ConcentrationProfile> {
    let radii = normalize_radii(radii)?;
    let len = view.len();
    if len > EXACT_CAP {
        return Err(Error::TooLarge {
            points: len,
            cap: EXACT_CAP,
        });
    }
    let weights = view.measures();
    let mut suffix = vec![0.0; len + 1];
    for i in (0..len).rev() {
        suffix[i] = suffix[i + 1] + weights[i];
    }
    let nbr: Vec<Vec<u32>> = radii
        .iter()
        .map(|&r| {
            (0..len)
                .map(|x| {
                    (0..len)
                        .filter(|&y| view.distance(x, y) <= r + DIST_TOL)
                        .fold(0u32, |m, y| m | 1 << y)
                })
                .collect()
        })
        .collect();
    let problem = Problem {
        len,
        weights,
        suffix,
        nbr,
        table: MassTable::new(weights),
    };
    let depth = SPLIT_DEPTH.min(len);
    // prefixes in include-first order: bit (depth-1-j) of the counter set means "exclude j"
    let prefixes: Vec<u32> = (0..1u32 << depth)
        .map(|c| {
            (0..depth)
                .filter(|&j| c >> (depth - 1 - j) & 1 == 0)
                .fold(0u32, |m, j| m | 1 << j)
        })
        .collect();
    let k = radii.len();
    let results: Vec<Best> = prefixes
        .par_iter()
        .map(|&set| {
            let mut best = Best::empty(k);
            let mass: f64 = (0..depth).filter(|&j| set >> j & 1 == 1).map(|j| weights[j]).sum();
            let mut enl: Vec<u32> = (0..k)
                .map(|kk| {
                    (0..depth)
                        .filter(|&j| set >> j & 1 == 1)
                        .fold(0u32, |m, j| m | problem.nbr[kk][j])
                })
                .collect();
            problem.dfs(depth, set, mass, &mut enl, &mut best);
            best
        })
        .collect();
    let mut best = Best::empty(k);
    for r in &results {
        best.absorb(r);
    }
    let mut breakpoints: Vec<Breakpoint> = Vec::with_capacity(k);
    for (kk, &r) in radii.iter().enumerate() {
        let witness = (0..len).filter(|&x| best.witness[kk] >> x & 1 == 1);
        breakpoints.push(Breakpoint {
            r,
            alpha: best.alpha[kk].max(0.0),
            witness: Some(PointSet::from_indices(len, witness)?),
        });
    }
    ConcentrationProfile::steps(ProfileMode::Exact, view.n(), view.p(), breakpoints)
}

/// `1 - mu^n(A_{r,p})` for a given set.
pub fn complement_of_enlargement(view: &ProductSpace, a: &PointSet, r: f64) -> Result<f64> {
    let e = crate::space::enlarge(view, a, r)?;
    Ok(1.0 - e.measure(view))
}

/// `0` and every distinct product distance, merged within `DIST_TOL`. An
/// exact profile only changes value at these radii.
pub fn distinct_distances(view: &ProductSpace) -> Vec<f64> {
    let len = view.len();
    let mut d: Vec<f64> = (0..len)
        .flat_map(|x| (x + 1..len).map(move |y| (x, y)))
        .map(|(x, y)| view.distance(x, y))
        .collect();
    d.push(0.0);
    d.sort_by(f64::total_cmp);
    d.dedup_by(|b, a| *b - *a <= DIST_TOL);
    d
}
