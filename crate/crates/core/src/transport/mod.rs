//! Exact optimal transport between measures on a finite space, relative
//! entropy, and transport-entropy inequalities checked over sampled measures.

mod lp;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{ext_margin, format_ext, WEIGHT_SUM_TOL};
use crate::space::{theta, ProductSpace};

pub use lp::{solve_transport, TransportSolution};

/// Slack on `cost <= C * entropy`.
pub const TRANSPORT_TOL: f64 = 1e-12;

/// Optimal coupling between `nu` (rows) and `mu` (columns), restricted to
/// the supports.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// `pi[a][b]` is the mass sent from `rows[a]` to `cols[b]`.
    pub pi: Vec<Vec<f64>>,
}

impl CouplingMatrix {
    /// Largest deviation of the marginals from `nu` and `mu`.
    pub fn marginal_error(&self, nu: &[f64], mu: &[f64]) -> f64 {
        let mut err = 0.0f64;
        for (a, &x) in self.rows.iter().enumerate() {
            err = err.max((self.pi[a].iter().sum::<f64>() - nu[x]).abs());
        }
        for (b, &y) in self.cols.iter().enumerate() {
            err = err.max((self.pi.iter().map(|r| r[b]).sum::<f64>() - mu[y]).abs());
        }
        err
    }

    /// `sum pi(x, y) c(x, y)`.
    pub fn cost_with(&self, c: impl Fn(usize, usize) -> f64) -> f64 {
        let mut s = 0.0;
        for (a, &x) in self.rows.iter().enumerate() {
            for (b, &y) in self.cols.iter().enumerate() {
                s += self.pi[a][b] * c(x, y);
            }
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct TransportPlan {
    /// Optimal value of the cost.
    pub cost: f64,
    pub coupling: CouplingMatrix,
    /// Dual potentials certifying optimality.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Wasserstein {
    /// `W_p`.
    pub distance: f64,
    /// `W_p^p`.
    pub cost: f64,
    pub plan: TransportPlan,
}

fn check_measure(view: &ProductSpace, m: &[f64], what: &'static str) -> Result<()> {
    if m.len() != view.len() {
        return Err(Error::LengthMismatch {
            what,
            got: m.len(),
            expected: view.len(),
        });
    }
    for (i, &w) in m.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFiniteEntry { what, index: i });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight { i, value: w });
        }
    }
    let s: f64 = m.iter().sum();
    if (s - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::WeightSumMismatch { sum: s });
    }
    Ok(())
}

fn check_pair(view: &ProductSpace, mu: &[f64], nu: &[f64]) -> Result<()> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch {
            left: mu.len(),
            right: nu.len(),
        });
    }
    check_measure(view, mu, "mu")?;
    check_measure(view, nu, "nu")
}

/// Optimal transport from `nu` to `mu` for the ground cost `c(x, y)`.
pub fn optimal_plan(
    view: &ProductSpace,
    mu: &[f64],
    nu: &[f64],
    c: impl Fn(usize, usize) -> f64,
) -> Result<TransportPlan> {
    check_pair(view, mu, nu)?;
    let rows: Vec<usize> = (0..nu.len()).filter(|&x| nu[x] > 0.0).collect();
    let cols: Vec<usize> = (0..mu.len()).filter(|&y| mu[y] > 0.0).collect();
    let supply: Vec<f64> = rows.iter().map(|&x| nu[x]).collect();
    let demand: Vec<f64> = cols.iter().map(|&y| mu[y]).collect();
    let mut cost = Vec::with_capacity(rows.len() * cols.len());
    for &x in &rows {
        for &y in &cols {
            cost.push(c(x, y));
        }
    }
    let sol = solve_transport(&supply, &demand, &cost)?;
    let k = cols.len();
    let pi = (0..rows.len()).map(|a| sol.flow[a * k..(a + 1) * k].to_vec()).collect();
    Ok(TransportPlan {
        cost: sol.cost,
        coupling: CouplingMatrix { rows, cols, pi },
        u: sol.u,
        v: sol.v,
    })
}

/// `W_p(nu, mu)` for the view's own distance.
pub fn wasserstein(view: &ProductSpace, mu: &[f64], nu: &[f64], p: f64) -> Result<Wasserstein> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "transport exponent must be finite and at least 1",
        });
    }
    let plan = optimal_plan(view, mu, nu, |x, y| view.distance(x, y).powf(p))?;
    let cost = plan.cost.max(0.0);
    Ok(Wasserstein {
        distance: cost.powf(1.0 / p),
        cost,
        plan,
    })
}

/// `H(nu | mu) = sum nu log(nu / mu)`, `+inf` when `nu` charges a point `mu` does not.
pub fn relative_entropy(nu: &[f64], mu: &[f64]) -> Result<f64> {
    if nu.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            left: nu.len(),
            right: mu.len(),
        });
    }
    let mut h = 0.0;
    for (&a, &b) in nu.iter().zip(mu) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            h += a * (a / b).ln();
        }
    }
    Ok(h.max(0.0))
}

/// Composition of the sampled family of test measures.
#[derive(Clone, Debug, PartialEq)]
pub struct NuFamily {
    /// `mu` moved along `delta_x - delta_y` for random pairs.
    pub two_point_tilts: usize,
    /// `nu ∝ mu e^{beta g}` for random `beta` and distance-based `g`.
    pub exponential_tilts: usize,
    /// Uniform random points of the simplex over the support of `mu`.
    pub dirichlet: usize,
    /// `(1 - w) mu + w delta_x`.
    pub dirac_mixtures: usize,
    /// Every Dirac mass `delta_x` in addition to the samples.
    pub diracs: bool,
    pub seed: u64,
}

impl Default for NuFamily {
    fn default() -> Self {
        Self {
            two_point_tilts: 16,
            exponential_tilts: 16,
            dirichlet: 16,
            dirac_mixtures: 16,
            diracs: true,
            seed: 0,
        }
    }
}

impl NuFamily {
    /// `(id, nu)` pairs; the identity `nu = mu` comes first.
    pub fn sample(&self, view: &ProductSpace, mu: &[f64]) -> Vec<(String, Vec<f64>)> {
        let len = mu.len();
        let support: Vec<usize> = (0..len).filter(|&x| mu[x] > 0.0).collect();
        let mut out = vec![("mu".to_string(), mu.to_vec())];
        if self.diracs {
            for x in 0..len {
                let mut d = vec![0.0; len];
                d[x] = 1.0;
                out.push((format!("dirac-{x}"), d));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        if support.len() >= 2 {
            for k in 0..self.two_point_tilts {
                let a = support[rng.gen_range(0..support.len())];
                let mut b = support[rng.gen_range(0..support.len() - 1)];
                if b >= a {
                    b = support[(support.iter().position(|&s| s == b).unwrap() + 1) % support.len()];
                }
                if a == b {
                    continue;
                }
                // move mass s from b to a, s in (0, mu(b)]
                let s = mu[b] * rng.gen_range(0.0..1.0f64).max(1e-3);
                let mut nu = mu.to_vec();
                nu[a] += s;
                nu[b] -= s;
                nu[b] = nu[b].max(0.0);
                out.push((format!("two-point-{k}"), normalized(nu)));
            }
        }
        for k in 0..self.exponential_tilts {
            let x0 = support[rng.gen_range(0..support.len())];
            let beta: f64 = rng.gen_range(-3.0..3.0);
            let nu: Vec<f64> = (0..len).map(|x| mu[x] * (beta * view.distance(x0, x)).exp()).collect();
            out.push((format!("exp-tilt-{k}"), normalized(nu)));
        }
        for k in 0..self.dirichlet {
            let mut nu = vec![0.0; len];
            for &x in &support {
                nu[x] = -(1.0 - rng.gen_range(0.0..1.0f64)).ln();
            }
            out.push((format!("dirichlet-{k}"), normalized(nu)));
        }
        for k in 0..self.dirac_mixtures {
            let x = rng.gen_range(0..len);
            let w: f64 = rng.gen_range(0.0..1.0);
            let mut nu: Vec<f64> = mu.iter().map(|m| (1.0 - w) * m).collect();
            nu[x] += w;
            out.push((format!("dirac-mix-{k}"), normalized(nu)));
        }
        out
    }
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportCheckRecord {
    pub nu_id: String,
    pub nu: Vec<f64>,
    pub cost: f64,
    pub entropy: f64,
    pub constant: f64,
    pub satisfied: bool,
    /// `bound - cost`, where the bound is `C H` or `H`.
    pub margin: f64,
}

fn record(nu_id: String, nu: Vec<f64>, cost: f64, entropy: f64, constant: f64, bound: f64) -> TransportCheckRecord {
    let margin = ext_margin(cost, bound);
    TransportCheckRecord {
        nu_id,
        nu,
        cost,
        entropy,
        constant,
        satisfied: margin >= -TRANSPORT_TOL,
        margin,
    }
}

fn sort_records(records: &mut [TransportCheckRecord]) {
    records.sort_by(|a, b| a.margin.total_cmp(&b.margin).then_with(|| a.nu_id.cmp(&b.nu_id)));
}

#[derive(Clone, Debug)]
pub struct TalagrandCheck {
    /// Sorted by margin, tightest first.
    pub records: Vec<TransportCheckRecord>,
    /// `max W_p^p / H` over the family with `0 < H < inf`, a lower bound on
    /// the best constant.
    pub observed_constant: f64,
}

impl TalagrandCheck {
    pub fn worst_violation(&self) -> Option<&TransportCheckRecord> {
        self.records.iter().find(|r| !r.satisfied)
    }
}

/// `W_p^p(nu, mu) <= C H(nu | mu)` over the sampled family.
pub fn check_talagrand(view: &ProductSpace, mu: &[f64], c: f64, p: f64, family: &NuFamily) -> Result<TalagrandCheck> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "C",
            value: c,
            reason: "must be positive",
        });
    }
    check_measure(view, mu, "mu")?;
    let nus = family.sample(view, mu);
    let mut records: Vec<TransportCheckRecord> = nus
        .into_par_iter()
        .map(|(id, nu)| {
            let w = wasserstein(view, mu, &nu, p)?;
            let h = relative_entropy(&nu, mu)?;
            Ok(record(id, nu, w.cost, h, c, c * h))
        })
        .collect::<Result<_>>()?;
    let observed_constant = records
        .iter()
        .filter(|r| r.entropy > 0.0 && r.entropy.is_finite())
        .map(|r| r.cost / r.entropy)
        .fold(0.0, f64::max);
    sort_records(&mut records);
    Ok(TalagrandCheck {
        records,
        observed_constant,
    })
}

/// `sum_i theta(C d(x_i, y_i))`, the coordinate-wise cost on the product.
pub fn theta_cost(view: &ProductSpace, c: f64, x: usize, y: usize) -> f64 {
    let base = view.base();
    (0..view.n())
        .map(|i| theta(c * base.dist(view.coord(x, i), view.coord(y, i))))
        .sum()
}

#[derive(Clone, Debug)]
pub struct ThetaCheck {
    pub records: Vec<TransportCheckRecord>,
    /// Largest `C` for which every sampled measure satisfies the inequality.
    pub tightest_constant: f64,
    /// `2 C^2` at the tightest constant, comparable with a Poincaré constant.
    pub companion_lambda: f64,
}

fn theta_records(view: &ProductSpace, mu: &[f64], c: f64, nus: &[(String, Vec<f64>)]) -> Result<Vec<TransportCheckRecord>> {
    nus.par_iter()
        .map(|(id, nu)| {
            let plan = optimal_plan(view, mu, nu, |x, y| theta_cost(view, c, x, y))?;
            let h = relative_entropy(nu, mu)?;
            Ok(record(id.clone(), nu.clone(), plan.cost, h, c, h))
        })
        .collect()
}

/// `inf E[theta(C d(X, Y))] <= H(nu | mu)` over the sampled family, with the
/// largest admissible `C` found by bisection (the cost grows with `C`).
pub fn check_theta_transport(view: &ProductSpace, mu: &[f64], c: f64, family: &NuFamily) -> Result<ThetaCheck> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "C",
            value: c,
            reason: "must be positive",
        });
    }
    check_measure(view, mu, "mu")?;
    let nus = family.sample(view, mu);
    let mut records = theta_records(view, mu, c, &nus)?;
    sort_records(&mut records);
    let holds = |cc: f64| -> Result<bool> { Ok(theta_records(view, mu, cc, &nus)?.iter().all(|r| r.satisfied)) };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut unbounded = false;
    while holds(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            unbounded = true;
            break;
        }
    }
    let tightest_constant = if unbounded {
        f64::INFINITY
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if holds(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(ThetaCheck {
        records,
        tightest_constant,
        companion_lambda: 2.0 * tightest_constant * tightest_constant,
    })
}

/// Records as CSV with columns `nu_id,cost,entropy,C,satisfied,margin`.
pub fn write_records_csv<W: Write>(w: W, records: &[TransportCheckRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["nu_id", "cost", "entropy", "C", "satisfied", "margin"])?;
    for r in records {
        out.write_record([
            r.nu_id.clone(),
            format_ext(r.cost),
            format_ext(r.entropy),
            format_ext(r.constant),
            r.satisfied.to_string(),
            format_ext(r.margin),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteMetricMeasureSpace;

    fn two_point(d: f64) -> ProductSpace {
        FiniteMetricMeasureSpace::two_point(d, 0.5).unwrap().base_view()
    }

    #[test]
    fn identity_and_diracs() {
        let v = two_point(1.5);
        let mu = [0.5, 0.5];
        let w = wasserstein(&v, &mu, &mu, 2.0).unwrap();
        assert_eq!(w.cost, 0.0);
        assert_eq!(w.plan.coupling.pi, vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        for p in [1.0, 2.0, 3.5] {
            let w = wasserstein(&v, &[1.0, 0.0], &[0.0, 1.0], p).unwrap();
            assert!((w.distance - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_closed_form() {
        let v = two_point(2.0);
        for (p0, q0) in [(0.3, 0.8), (0.5, 0.5), (0.9, 0.1)] {
            for p in [1.0, 2.0, 3.0] {
                let w = wasserstein(&v, &[p0, 1.0 - p0], &[q0, 1.0 - q0], p).unwrap();
                let want = (p0 - q0).abs() * 2f64.powf(p);
                assert!((w.cost - want).abs() < 1e-12);
                // brute force along the one-parameter segment of couplings
                let mut best = f64::INFINITY;
                for k in 0..=10_000 {
                    let x = q0.min(p0) * k as f64 / 10_000.0;
                    let off = (q0 - x) + (p0 - x);
                    if q0 - x >= -1e-15 && p0 - x >= -1e-15 && 1.0 - q0 - (p0 - x) >= -1e-15 {
                        best = best.min(off.abs() * 2f64.powf(p));
                    }
                }
                assert!(w.cost <= best + 1e-9);
            }
        }
        assert!(matches!(
            wasserstein(&v, &[0.5, 0.5], &[1.0], 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(relative_entropy(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(relative_entropy(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        let h = relative_entropy(&[0.75, 0.25], &[0.5, 0.5]).unwrap();
        assert!((h - (0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln())).abs() < 1e-15);
        assert!((h - 0.130_812).abs() < 1e-6);
    }

    #[test]
    fn dirac_records_in_closed_form() {
        let s = FiniteMetricMeasureSpace::unlabeled(
            vec![vec![0.0, 1.0, 1.7], vec![1.0, 0.0, 0.9], vec![1.7, 0.9, 0.0]],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let v = s.base_view();
        let mu = s.weights().to_vec();
        let chk = check_talagrand(&v, &mu, 1.0, 2.0, &NuFamily::default()).unwrap();
        for x in 0..3 {
            let r = chk.records.iter().find(|r| r.nu_id == format!("dirac-{x}")).unwrap();
            let cost: f64 = (0..3).map(|y| mu[y] * v.distance(x, y).powi(2)).sum();
            assert!((r.cost - cost).abs() < 1e-12);
            assert!((r.entropy - (1.0 / mu[x]).ln()).abs() < 1e-12);
        }
        let id = chk.records.iter().find(|r| r.nu_id == "mu").unwrap();
        assert_eq!((id.cost, id.entropy, id.margin), (0.0, 0.0, 0.0));
        assert!(chk.records.windows(2).all(|w| w[0].margin <= w[1].margin));
        assert!(chk.observed_constant > 0.0);
        // a constant at the observed ratio satisfies every record
        let at = check_talagrand(&v, &mu, chk.observed_constant * (1.0 + 1e-9), 2.0, &NuFamily::default()).unwrap();
        assert!(at.worst_violation().is_none());
    }

    #[test]
    fn theta_constant_and_companion() {
        let v = two_point(1.0);
        let mu = [0.5, 0.5];
        let chk = check_theta_transport(&v, &mu, 0.5, &NuFamily::default()).unwrap();
        assert!(chk.tightest_constant.is_finite() && chk.tightest_constant > 0.0);
        assert_eq!(chk.companion_lambda, 2.0 * chk.tightest_constant.powi(2));
        // the Dirac record at C: theta(C d) against log 2
        let r = chk.records.iter().find(|r| r.nu_id == "dirac-0").unwrap();
        assert!((r.cost - 0.5 * theta(0.5)).abs() < 1e-12);
        assert!((r.entropy - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn csv_columns() {
        let v = two_point(1.0);
        let chk = check_talagrand(&v, &[0.5, 0.5], 1.0, 2.0, &NuFamily::default()).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &chk.records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("nu_id,cost,entropy,C,satisfied,margin\n"));
    }
}
