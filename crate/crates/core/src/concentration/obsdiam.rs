use crate::calculus::RealFunction;
use crate::error::{Error, Result};
use crate::numeric::simplex::maximize;
use crate::numeric::MASS_TOL;
use crate::space::ProductSpace;

/// Spaces up to this size get the exact observable diameter.
pub const EXACT_OBSDIAM_POINTS: usize = 5;
/// Largest space on which the heuristic polishes orderings by linear programs.
const LP_POLISH_POINTS: usize = 32;
const POLISH_ROUNDS: usize = 20;

#[derive(Clone, Debug)]
pub struct ObservableDiameterResult {
    pub value: f64,
    /// 1-Lipschitz function whose pushforward attains `value`.
    pub witness: RealFunction,
    pub t: f64,
    pub exact: bool,
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "must lie in [0,1]",
        })
    }
}

/// Smallest width of a value window carrying mass at least `1 - t`.
pub fn partial_diameter(pushforward: &[(f64, f64)], t: f64) -> Result<f64> {
    check_t(t)?;
    let need = 1.0 - t - MASS_TOL;
    if need <= 0.0 {
        return Ok(0.0);
    }
    let mut atoms: Vec<(f64, f64)> = pushforward.iter().copied().filter(|a| a.1 > 0.0).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    let mut mass = 0.0;
    let mut j = 0;
    for i in 0..atoms.len() {
        while j < atoms.len() && mass < need {
            mass += atoms[j].1;
            j += 1;
        }
        if mass < need {
            break;
        }
        best = best.min(atoms[j - 1].0 - atoms[i].0);
        mass -= atoms[i].1;
    }
    if best.is_infinite() {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "pushforward carries less mass than 1 - t",
        });
    }
    Ok(best)
}

fn pushforward(f: &RealFunction) -> Vec<(f64, f64)> {
    let view = f.view();
    f.values().iter().enumerate().map(|(x, &v)| (v, view.measure(x))).collect()
}

/// Best 1-Lipschitz function nondecreasing along `order`, by a linear program
/// over the consecutive gaps. Returns `(width, values)`.
fn best_along(view: &ProductSpace, order: &[usize], t: f64) -> (f64, Vec<f64>) {
    let need = 1.0 - t - MASS_TOL;
    let m = order.len();
    let gaps = m - 1;
    let z = gaps;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let mut row = vec![0.0; gaps + 1];
            for g in row.iter_mut().take(b).skip(a) {
                *g = 1.0;
            }
            rows.push(row);
            rhs.push(view.distance(order[a], order[b]));
        }
    }
    let mass: Vec<f64> = order.iter().map(|&x| view.measure(x)).collect();
    for a in 0..m {
        let mut acc = 0.0;
        for b in a..m {
            acc += mass[b];
            if acc >= need {
                // only the shortest qualifying block starting at a matters
                let mut row = vec![0.0; gaps + 1];
                row[z] = 1.0;
                for g in row.iter_mut().take(b).skip(a) {
                    *g = -1.0;
                }
                rows.push(row);
                rhs.push(0.0);
                break;
            }
        }
    }
    let mut c = vec![0.0; gaps + 1];
    c[z] = 1.0;
    let (_, sol) = maximize(&c, &rows, &rhs).expect("the Lipschitz constraints bound every gap");
    let mut vals = vec![0.0; view.len()];
    let mut acc = 0.0;
    for (k, &x) in order.iter().enumerate() {
        if k > 0 {
            acc += sol[k - 1];
        }
        vals[x] = acc;
    }
    let width = partial_diameter(
        &order.iter().map(|&x| (vals[x], view.measure(x))).collect::<Vec<_>>(),
        t,
    )
    .unwrap_or(0.0);
    (width, vals)
}

/// Lexicographic successor of a permutation; `false` after the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `ObsDiam(X, d, mu, t)`: the largest partial diameter of a pushforward by a
/// 1-Lipschitz function.
///
/// Up to five points every ordering of the points is solved as a linear
/// program, which is exact. Beyond that, distance functions seed a local
/// search over orderings and the result is a lower bound (`exact = false`).
pub fn observable_diameter(view: &ProductSpace, t: f64) -> Result<ObservableDiameterResult> {
    check_t(t)?;
    let len = view.len();
    let need = 1.0 - t - MASS_TOL;
    let zero = RealFunction::constant(view.clone(), 0.0)?;
    if need <= 0.0 || len == 1 {
        return Ok(ObservableDiameterResult {
            value: 0.0,
            witness: zero,
            t,
            exact: true,
        });
    }
    let mut best = (0.0, vec![0.0; len]);
    let exact = len <= EXACT_OBSDIAM_POINTS;
    if exact {
        let mut order: Vec<usize> = (0..len).collect();
        loop {
            // an ordering and its reverse give the same widths
            if order[0] < order[len - 1] {
                let cand = best_along(view, &order, t);
                if cand.0 > best.0 {
                    best = cand;
                }
            }
            if !next_permutation(&mut order) {
                break;
            }
        }
    } else {
        for x0 in 0..len {
            let vals: Vec<f64> = (0..len).map(|x| view.distance(x0, x)).collect();
            let f = zero.with_values(vals.clone())?;
            let w = partial_diameter(&pushforward(&f), t)?;
            if w > best.0 {
                best = (w, vals);
            }
        }
        if len <= LP_POLISH_POINTS {
            let mut order: Vec<usize> = (0..len).collect();
            order.sort_by(|&a, &b| best.1[a].total_cmp(&best.1[b]).then(a.cmp(&b)));
            let cand = best_along(view, &order, t);
            if cand.0 > best.0 {
                best = cand;
            }
            for _ in 0..POLISH_ROUNDS {
                let mut improved = false;
                for k in 0..len - 1 {
                    order.swap(k, k + 1);
                    let cand = best_along(view, &order, t);
                    if cand.0 > best.0 + 1e-12 {
                        best = cand;
                        improved = true;
                    } else {
                        order.swap(k, k + 1);
                    }
                }
                if !improved {
                    break;
                }
            }
        }
    }
    let witness = zero.with_values(best.1)?;
    let value = partial_diameter(&pushforward(&witness), t)?;
    Ok(ObservableDiameterResult {
        value,
        witness,
        t,
        exact,
    })
}
