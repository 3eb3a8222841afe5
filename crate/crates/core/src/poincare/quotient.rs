use crate::calculus::{gradient, gradient_sum_sq, variance, GradientKind, RealFunction};
use crate::error::{Error, Result};

fn spread_on_support(f: &RealFunction) -> f64 {
    let view = f.view();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (x, &v) in f.values().iter().enumerate() {
        if view.measure(x) > 0.0 {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    hi - lo
}

fn quotient_with(f: &RealFunction, sq: impl Fn(usize) -> f64) -> Result<f64> {
    f.require_finite()?;
    if spread_on_support(f) == 0.0 {
        return Err(Error::ConstantFunction);
    }
    let var = variance(f)?;
    if var <= 0.0 {
        return Err(Error::ConstantFunction);
    }
    let view = f.view();
    let num: f64 = (0..f.len())
        .filter(|&x| view.measure(x) > 0.0)
        .map(|x| view.measure(x) * sq(x))
        .sum();
    Ok(num / var)
}

/// `int |grad f|^2 dmu / Var_mu(f)` with the max-slope gradient of the view's
/// own distance.
pub fn rayleigh_quotient(f: &RealFunction, kind: GradientKind) -> Result<f64> {
    f.require_finite()?;
    let g = gradient(f, kind)?;
    quotient_with(f, |x| g.value(x) * g.value(x))
}

/// `int sum_i |grad_i f|^2 dmu^n / Var_{mu^n}(f)` with coordinate gradients.
pub fn tensorized_quotient(f: &RealFunction, kind: GradientKind) -> Result<f64> {
    f.require_finite()?;
    let g = gradient_sum_sq(f, kind)?;
    quotient_with(f, |x| g.value(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteMetricMeasureSpace;

    #[test]
    fn two_point_quotients() {
        let v = FiniteMetricMeasureSpace::two_point(1.0, 0.5).unwrap().base_view();
        let f = RealFunction::new(v.clone(), vec![0.0, 1.0]).unwrap();
        assert!((rayleigh_quotient(&f, GradientKind::Minus).unwrap() - 2.0).abs() < 1e-15);
        assert!((rayleigh_quotient(&f, GradientKind::Abs).unwrap() - 4.0).abs() < 1e-15);
        let c = RealFunction::constant(v, 1.0).unwrap();
        assert_eq!(rayleigh_quotient(&c, GradientKind::Minus), Err(Error::ConstantFunction));
    }

    #[test]
    fn scale_and_shift_invariance() {
        let s = FiniteMetricMeasureSpace::unlabeled(
            vec![vec![0.0, 1.0, 1.7], vec![1.0, 0.0, 0.9], vec![1.7, 0.9, 0.0]],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let f = RealFunction::new(s.base_view(), vec![0.3, -1.2, 2.0]).unwrap();
        for kind in GradientKind::ALL {
            let q = rayleigh_quotient(&f, kind).unwrap();
            for c in [3.0, 0.01] {
                let g = f.map(|v| c * v + 7.0).unwrap();
                assert!((rayleigh_quotient(&g, kind).unwrap() - q).abs() < 1e-12 * q);
            }
        }
        // a negative factor swaps the one-sided gradients
        let neg = f.map(|v| -v).unwrap();
        let qm = rayleigh_quotient(&f, GradientKind::Minus).unwrap();
        assert!((rayleigh_quotient(&neg, GradientKind::Plus).unwrap() - qm).abs() < 1e-12 * qm);
    }

    #[test]
    fn tensorized_agrees_with_plain_for_one_factor() {
        let s = FiniteMetricMeasureSpace::unlabeled(
            vec![vec![0.0, 1.0, 1.7], vec![1.0, 0.0, 0.9], vec![1.7, 0.9, 0.0]],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let f = RealFunction::new(s.base_view(), vec![0.3, -1.2, 2.0]).unwrap();
        for kind in GradientKind::ALL {
            let a = rayleigh_quotient(&f, kind).unwrap();
            let b = tensorized_quotient(&f, kind).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn separable_function_keeps_the_base_quotient() {
        let s = FiniteMetricMeasureSpace::unlabeled(
            vec![vec![0.0, 1.0, 1.7], vec![1.0, 0.0, 0.9], vec![1.7, 0.9, 0.0]],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let h = [0.3, -1.2, 2.0];
        let base = rayleigh_quotient(&RealFunction::new(s.base_view(), h.to_vec()).unwrap(), GradientKind::Minus).unwrap();
        for n in [2, 3] {
            let f = RealFunction::separable(s.view(n, 2.0).unwrap(), &h).unwrap();
            let q = tensorized_quotient(&f, GradientKind::Minus).unwrap();
            assert!((q - base).abs() < 1e-12 * base, "n = {n}");
        }
    }
}
