use crate::error::{Error, Result};

/// A probability measure on the real line.
#[derive(Clone, Debug, PartialEq)]
pub enum RealLineMeasure {
    /// `(x, mass)` pairs.
    Atoms(Vec<(f64, f64)>),
    /// `(lo, hi, mass)` pieces with uniform density on `[lo, hi]`.
    PiecewiseUniform(Vec<(f64, f64, f64)>),
}

/// Normalized pieces sorted by position; atoms are pieces with `lo == hi`.
struct Cdf {
    pieces: Vec<(f64, f64, f64)>,
    cum: Vec<f64>,
}

impl Cdf {
    fn new(measure: &RealLineMeasure) -> Result<Self> {
        let mut pieces: Vec<(f64, f64, f64)> = match measure {
            RealLineMeasure::Atoms(a) => a.iter().map(|&(x, m)| (x, x, m)).collect(),
            RealLineMeasure::PiecewiseUniform(p) => p.clone(),
        };
        for (i, &(lo, hi, m)) in pieces.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::NonFiniteEntry { what: "measure support", index: i });
            }
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::NegativeWeight { i, value: m });
            }
        }
        pieces.retain(|p| p.2 > 0.0);
        if pieces.is_empty() {
            return Err(Error::EmptySpace);
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for w in pieces.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::DomainError(format!(
                    "pieces [{}, {}] and [{}, {}] overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let mut cum = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in pieces.iter_mut() {
            p.2 /= total;
            acc += p.2;
            cum.push(acc);
        }
        Ok(Self { pieces, cum })
    }

    /// `F^{-1}(p) = inf { x : F(x) >= p }`.
    fn quantile(&self, p: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c < p).min(self.pieces.len() - 1);
        let (lo, hi, m) = self.pieces[k];
        if lo == hi {
            return lo;
        }
        let before = if k == 0 { 0.0 } else { self.cum[k - 1] };
        let frac = ((p - before) / m).clamp(0.0, 1.0);
        lo + frac * (hi - lo)
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `U(x) = F^{-1}(1 / (1 + e^{-x}))` on a grid, with the smallest `(a, b)`
/// such that `|U(x) - U(y)| <= a + b |x - y|` on the grid pairs.
#[derive(Clone, Debug)]
pub struct QuantileMap {
    pub grid: Vec<f64>,
    pub u_values: Vec<f64>,
    pub a: f64,
    pub b: f64,
    /// Pairs closer than this do not enter the slope `b`.
    pub min_separation: f64,
}

pub const DEFAULT_MIN_SEPARATION: f64 = 1.0;

pub fn bobkov_houdre_check(measure: &RealLineMeasure, grid: &[f64]) -> Result<QuantileMap> {
    bobkov_houdre_check_with(measure, grid, DEFAULT_MIN_SEPARATION)
}

/// `b` is the largest slope over grid pairs at least `min_separation` apart
/// (a quantile map of atoms jumps, so close pairs would only measure the
/// jumps), and `a` the largest excess `|U(x) - U(y)| - b |x - y|` over all pairs.
pub fn bobkov_houdre_check_with(measure: &RealLineMeasure, grid: &[f64], min_separation: f64) -> Result<QuantileMap> {
    let cdf = Cdf::new(measure)?;
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "grid",
            value: f64::NAN,
            reason: "grid points must be finite",
        });
    }
    if !(min_separation >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "min_separation",
            value: min_separation,
            reason: "must be nonnegative",
        });
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let u: Vec<f64> = grid.iter().map(|&x| cdf.quantile(logistic(x))).collect();
    let m = grid.len();
    let mut b = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            let dx = grid[j] - grid[i];
            if dx >= min_separation && dx > 0.0 {
                b = b.max((u[j] - u[i]).abs() / dx);
            }
        }
    }
    let mut a = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            a = a.max((u[j] - u[i]).abs() - b * (grid[j] - grid[i]));
        }
    }
    Ok(QuantileMap {
        grid,
        u_values: u,
        a,
        b,
        min_separation,
    })
}

/// The logistic law as `k` equal atoms at its quantiles `(j - 1/2) / k`.
pub fn logistic_atoms(k: usize) -> RealLineMeasure {
    RealLineMeasure::Atoms(
        (1..=k)
            .map(|j| {
                let q = (j as f64 - 0.5) / k as f64;
                ((q / (1.0 - q)).ln(), 1.0 / k as f64)
            })
            .collect(),
    )
}
