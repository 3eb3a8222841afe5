use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::calculus::{GradientKind, RealFunction};
use crate::error::{Error, Result};
use crate::numeric::{format_ext, golden_section_max};
use crate::space::ProductSpace;

use super::quotient::rayleigh_quotient;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoincareMethod {
    ClosedForm,
    GridSearch,
    MultiStartDescent,
}

impl PoincareMethod {
    pub fn name(self) -> &'static str {
        match self {
            PoincareMethod::ClosedForm => "closed-form",
            PoincareMethod::GridSearch => "grid-search",
            PoincareMethod::MultiStartDescent => "multi-start-descent",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Angles sampled on the circle of normalized functions (three support points).
    pub grid_resolution: usize,
    pub iterations: usize,
}

impl Default for PoincareOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            grid_resolution: 20_000,
            iterations: 500,
        }
    }
}

impl PoincareOptions {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter {
                name: "restarts",
                value: 0.0,
                reason: "at least one restart is required",
            });
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "iterations",
                value: 0.0,
                reason: "at least one iteration is required",
            });
        }
        if self.grid_resolution < 8 {
            return Err(Error::InvalidParameter {
                name: "grid_resolution",
                value: self.grid_resolution as f64,
                reason: "at least 8 grid points are required",
            });
        }
        Ok(())
    }
}

/// Smallest Rayleigh quotient found, with the function attaining it.
///
/// `lambda` is an upper bound on the Poincaré constant, exact for closed
/// forms and up to the grid refinement for three support points. It is
/// `+inf` exactly when the measure is a Dirac mass, in which case there is no
/// witness.
#[derive(Clone, Debug)]
pub struct PoincareEstimate {
    pub lambda: f64,
    pub witness: Option<RealFunction>,
    pub kind: GradientKind,
    pub method: PoincareMethod,
    pub restarts: usize,
    pub seed: u64,
}

impl PoincareEstimate {
    pub fn to_json(&self) -> Value {
        let witness = self.witness.as_ref().map(|w| {
            let view = w.view();
            w.values()
                .iter()
                .enumerate()
                .map(|(x, &v)| json!({ "point_index": x, "label_tuple": view.label(x), "value": v }))
                .collect::<Vec<_>>()
        });
        let lambda = if self.lambda.is_finite() {
            json!(self.lambda)
        } else {
            json!(format_ext(self.lambda))
        };
        json!({
            "lambda": lambda,
            "kind": self.kind.name(),
            "method": self.method.name(),
            "restarts": self.restarts,
            "seed": self.seed,
            "witness": witness,
        })
    }
}

/// The quotient restricted to a list of points of the view.
struct Reduced {
    pts: Vec<usize>,
    w: Vec<f64>,
    d: Vec<f64>,
    kind: GradientKind,
}

impl Reduced {
    fn new(view: &ProductSpace, pts: Vec<usize>, kind: GradientKind) -> Self {
        let m = pts.len();
        let w = pts.iter().map(|&x| view.measure(x)).collect();
        let mut d = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    d[a * m + b] = view.distance(pts[a], pts[b]);
                }
            }
        }
        Self { pts, w, d, kind }
    }

    fn m(&self) -> usize {
        self.pts.len()
    }

    /// Slope at `x` and the lowest-index point realizing it.
    #[inline]
    fn slope(&self, f: &[f64], x: usize) -> (f64, usize) {
        let m = self.m();
        let mut best = 0.0;
        let mut arg = x;
        for y in 0..m {
            if y != x {
                let s = self.kind.bracket(f[y] - f[x]) / self.d[x * m + y];
                if s > best {
                    best = s;
                    arg = y;
                }
            }
        }
        (best, arg)
    }

    fn moments(&self, f: &[f64]) -> (f64, f64) {
        let mean: f64 = self.w.iter().zip(f).map(|(w, v)| w * v).sum();
        let var: f64 = self
            .w
            .iter()
            .zip(f)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, v)| w * (v - mean) * (v - mean))
            .sum();
        (mean, var)
    }

    fn quotient(&self, f: &[f64]) -> f64 {
        let (_, var) = self.moments(f);
        if !(var > 0.0) {
            return f64::INFINITY;
        }
        let num: f64 = (0..self.m())
            .filter(|&x| self.w[x] > 0.0)
            .map(|x| {
                let s = self.slope(f, x).0;
                self.w[x] * s * s
            })
            .sum();
        num / var
    }

    /// Quotient and one subgradient at a function of unit variance.
    fn subgradient(&self, f: &[f64], g: &mut [f64]) -> f64 {
        let m = self.m();
        let (mean, var) = self.moments(f);
        g.iter_mut().for_each(|v| *v = 0.0);
        let mut num = 0.0;
        for x in 0..m {
            if self.w[x] == 0.0 {
                continue;
            }
            let (s, y) = self.slope(f, x);
            if s == 0.0 {
                continue;
            }
            num += self.w[x] * s * s;
            let dxy = self.d[x * m + y];
            // s = bracket(f(y) - f(x)) / d; the sign of the active branch
            let sign = match self.kind {
                GradientKind::Minus => -1.0,
                GradientKind::Plus => 1.0,
                GradientKind::Abs => (f[y] - f[x]).signum(),
            };
            let c = 2.0 * self.w[x] * s * sign / dxy;
            g[y] += c;
            g[x] -= c;
        }
        let q = num / var;
        for x in 0..m {
            g[x] = (g[x] - q * 2.0 * self.w[x] * (f[x] - mean)) / var;
        }
        q
    }

    /// Zero mean and unit variance; `false` when the variance vanishes.
    fn normalize(&self, f: &mut [f64]) -> bool {
        let (mean, var) = self.moments(f);
        if !(var > 1e-300) {
            return false;
        }
        let sd = var.sqrt();
        f.iter_mut().for_each(|v| *v = (*v - mean) / sd);
        true
    }

    fn descend(&self, mut f: Vec<f64>, iterations: usize) -> (f64, Vec<f64>) {
        if !self.normalize(&mut f) {
            return (f64::INFINITY, f);
        }
        let mut best = (self.quotient(&f), f.clone());
        let mut g = vec![0.0; self.m()];
        for k in 1..=iterations {
            let q = self.subgradient(&f, &mut g);
            if q < best.0 {
                best = (q, f.clone());
            }
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                break;
            }
            let step = 1.0 / (k as f64).sqrt();
            for (v, gv) in f.iter_mut().zip(&g) {
                *v -= step * gv / norm;
            }
            if !self.normalize(&mut f) {
                break;
            }
        }
        let q = self.quotient(&f);
        if q < best.0 {
            best = (q, f);
        }
        best
    }

    /// Coordinate pattern search with halving steps.
    fn polish(&self, mut f: Vec<f64>) -> (f64, Vec<f64>) {
        let mut q = self.quotient(&f);
        let mut h = 0.25;
        while h > 1e-10 {
            for _ in 0..50 {
                let mut improved = false;
                for i in 0..self.m() {
                    for s in [h, -h] {
                        f[i] += s;
                        let cand = self.quotient(&f);
                        if cand < q * (1.0 - 1e-15) {
                            q = cand;
                            improved = true;
                            break;
                        }
                        f[i] -= s;
                    }
                }
                if !improved {
                    break;
                }
            }
            h *= 0.5;
        }
        self.normalize(&mut f);
        (self.quotient(&f), f)
    }

    fn start(&self, restart: usize, seed: u64) -> Vec<f64> {
        let m = self.m();
        if restart < 2 * m {
            let j = restart / 2;
            let sign = if restart % 2 == 0 { 1.0 } else { -1.0 };
            let f: Vec<f64> = (0..m).map(|x| sign * if x == j { 0.0 } else { self.d[x * m + j] }).collect();
            if self.moments(&f).1 > 1e-300 {
                return f;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
}

/// Minimizes the Rayleigh quotient over nonconstant functions on the view.
///
/// Two support points use the closed form, three a dense grid over the circle
/// of normalized functions with golden-section refinement, and larger
/// supports multi-start projected subgradient descent followed by a pattern
/// search. For one-sided gradients, points without mass are pinned to the
/// extreme support value that keeps their slopes silent, which reduces the
/// problem to the support.
pub fn poincare_constant(view: &ProductSpace, kind: GradientKind, options: &PoincareOptions) -> Result<PoincareEstimate> {
    options.validate()?;
    let support: Vec<usize> = (0..view.len()).filter(|&x| view.measure(x) > 0.0).collect();
    let estimate = |lambda, witness, method| PoincareEstimate {
        lambda,
        witness,
        kind,
        method,
        restarts: options.restarts,
        seed: options.seed,
    };
    if support.len() <= 1 {
        return Ok(estimate(f64::INFINITY, None, PoincareMethod::ClosedForm));
    }
    let pts = if kind == GradientKind::Abs {
        (0..view.len()).collect()
    } else {
        support.clone()
    };
    let red = Reduced::new(view, pts, kind);
    let all_positive = red.w.iter().all(|&w| w > 0.0);
    let (lambda_hint, f, method) = match red.m() {
        2 if all_positive => {
            let (w0, w1) = (red.w[0], red.w[1]);
            let d2 = red.d[1] * red.d[1];
            match kind {
                GradientKind::Minus | GradientKind::Plus => {
                    let heavy_low = w0 >= w1;
                    let f = match (kind, heavy_low) {
                        (GradientKind::Minus, true) | (GradientKind::Plus, false) => vec![0.0, 1.0],
                        _ => vec![1.0, 0.0],
                    };
                    (Some(1.0 / (w0.max(w1) * d2)), f, PoincareMethod::ClosedForm)
                }
                GradientKind::Abs => (Some(1.0 / (w0 * w1 * d2)), vec![0.0, 1.0], PoincareMethod::ClosedForm),
            }
        }
        3 if all_positive => {
            let circle = |th: f64| vec![0.0, th.cos(), th.sin()];
            let res = options.grid_resolution;
            let qs: Vec<f64> = (0..res).map(|k| red.quotient(&circle(TAU * k as f64 / res as f64))).collect();
            let mut cells: Vec<usize> = (0..res)
                .filter(|&k| qs[k] <= qs[(k + res - 1) % res] && qs[k] <= qs[(k + 1) % res])
                .collect();
            cells.sort_by(|&a, &b| qs[a].total_cmp(&qs[b]).then(a.cmp(&b)));
            cells.truncate(8);
            let h = TAU / res as f64;
            let mut best = (qs[cells[0]], TAU * cells[0] as f64 / res as f64);
            for &k in &cells {
                let c = TAU * k as f64 / res as f64;
                let (th, neg) = golden_section_max(|t| -red.quotient(&circle(t)), c - h, c + h, 120);
                if -neg < best.0 {
                    best = (-neg, th);
                }
            }
            (None, circle(best.1), PoincareMethod::GridSearch)
        }
        _ => {
            let runs: Vec<(f64, usize, Vec<f64>)> = (0..options.restarts)
                .into_par_iter()
                .map(|r| {
                    let (q, f) = red.descend(red.start(r, options.seed), options.iterations);
                    (q, r, f)
                })
                .collect();
            let mut order: Vec<usize> = (0..runs.len()).collect();
            order.sort_by(|&a, &b| runs[a].0.total_cmp(&runs[b].0).then(a.cmp(&b)));
            let polished: Vec<(f64, usize, Vec<f64>)> = order
                .iter()
                .take(4)
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|&i| {
                    let (q, f) = red.polish(runs[i].2.clone());
                    (q, runs[i].1, f)
                })
                .collect();
            let best = polished
                .into_iter()
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .expect("at least one restart");
            (None, best.2, PoincareMethod::MultiStartDescent)
        }
    };
    let witness = extend(view, &red, &f, kind)?;
    let lambda = match lambda_hint {
        Some(l) => l,
        None => rayleigh_quotient(&witness, kind)?,
    };
    Ok(estimate(lambda, Some(witness), method))
}

/// Values on the whole view; massless points sit at the support extreme that
/// keeps their one-sided slopes at zero.
fn extend(view: &ProductSpace, red: &Reduced, f: &[f64], kind: GradientKind) -> Result<RealFunction> {
    let fill = match kind {
        GradientKind::Minus => f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        _ => f.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let mut values = vec![fill; view.len()];
    for (k, &x) in red.pts.iter().enumerate() {
        values[x] = f[k];
    }
    RealFunction::new(view.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteMetricMeasureSpace;

    fn opts() -> PoincareOptions {
        PoincareOptions::default()
    }

    #[test]
    fn dirac_is_infinite() {
        let v = FiniteMetricMeasureSpace::dirac().base_view();
        let e = poincare_constant(&v, GradientKind::Minus, &opts()).unwrap();
        assert_eq!(e.lambda, f64::INFINITY);
        assert!(e.witness.is_none());
        // a massless extra point does not change that
        let s = FiniteMetricMeasureSpace::unlabeled(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 0.0]).unwrap();
        assert_eq!(poincare_constant(&s.base_view(), GradientKind::Abs, &opts()).unwrap().lambda, f64::INFINITY);
    }

    #[test]
    fn two_point_closed_forms() {
        let v = FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap().base_view();
        let e = poincare_constant(&v, GradientKind::Minus, &opts()).unwrap();
        assert_eq!(e.lambda, 2.0);
        assert_eq!(e.method, PoincareMethod::ClosedForm);
        let v = FiniteMetricMeasureSpace::two_point(2.0, 0.75).unwrap().base_view();
        for kind in [GradientKind::Minus, GradientKind::Plus] {
            let e = poincare_constant(&v, kind, &opts()).unwrap();
            assert!((e.lambda - 1.0 / 3.0).abs() < 1e-15);
            let q = rayleigh_quotient(e.witness.as_ref().unwrap(), kind).unwrap();
            assert!((q - e.lambda).abs() < 1e-12);
        }
        let e = poincare_constant(&v, GradientKind::Abs, &opts()).unwrap();
        assert!((e.lambda - 1.0 / (0.75 * 0.25 * 4.0)).abs() < 1e-12);
    }

    #[test]
    fn two_point_by_dense_grid_over_f() {
        // independent check: scan f = (0, s)
        for (d, p0) in [(1.0, 0.5), (2.0, 0.75), (0.3, 0.1)] {
            let v = FiniteMetricMeasureSpace::two_point(d, p0).unwrap().base_view();
            let mut best = f64::INFINITY;
            for k in -2000..=2000 {
                if k == 0 {
                    continue;
                }
                let f = RealFunction::new(v.clone(), vec![0.0, k as f64 / 100.0]).unwrap();
                best = best.min(rayleigh_quotient(&f, GradientKind::Minus).unwrap());
            }
            let e = poincare_constant(&v, GradientKind::Minus, &opts()).unwrap();
            assert!((best - e.lambda).abs() < 1e-12 * best);
        }
    }

    #[test]
    fn massless_points_are_pinned() {
        let s = FiniteMetricMeasureSpace::unlabeled(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
            vec![0.5, 0.0, 0.5],
        )
        .unwrap();
        let v = s.base_view();
        for kind in [GradientKind::Minus, GradientKind::Plus] {
            let e = poincare_constant(&v, kind, &opts()).unwrap();
            // support {0, 2} at distance 2
            assert!((e.lambda - 0.5).abs() < 1e-12, "{kind:?}");
            let q = rayleigh_quotient(e.witness.as_ref().unwrap(), kind).unwrap();
            assert!((q - e.lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn three_points_grid_beats_sampled_functions() {
        let s = FiniteMetricMeasureSpace::unlabeled(
            vec![vec![0.0, 1.0, 1.7], vec![1.0, 0.0, 0.9], vec![1.7, 0.9, 0.0]],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let v = s.base_view();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in GradientKind::ALL {
            let e = poincare_constant(&v, kind, &opts()).unwrap();
            assert_eq!(e.method, PoincareMethod::GridSearch);
            for _ in 0..2000 {
                let vals: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = RealFunction::new(v.clone(), vals).unwrap();
                assert!(rayleigh_quotient(&f, kind).unwrap() >= e.lambda - 1e-9);
            }
        }
    }

    #[test]
    fn descent_recovers_product_of_two_points() {
        // {0,1}^2 with l_2: dense enough for descent, and tensorization gives
        // the base constant as a lower bound.
        let v = FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap().view(2, 2.0).unwrap();
        let e = poincare_constant(&v, GradientKind::Minus, &opts()).unwrap();
        assert_eq!(e.method, PoincareMethod::MultiStartDescent);
        let q = rayleigh_quotient(e.witness.as_ref().unwrap(), GradientKind::Minus).unwrap();
        assert!((q - e.lambda).abs() <= 1e-9 * q);
        let again = poincare_constant(&v, GradientKind::Minus, &opts()).unwrap();
        assert_eq!(again.lambda, e.lambda);
        assert_eq!(again.witness.unwrap().values(), e.witness.unwrap().values());
    }

    #[test]
    fn json_has_the_fields() {
        let v = FiniteMetricMeasureSpace::dirac().base_view();
        let j = poincare_constant(&v, GradientKind::Plus, &opts()).unwrap().to_json();
        assert_eq!(j["lambda"], "inf");
        assert_eq!(j["kind"], "plus");
        assert!(j["witness"].is_null());
    }
}
