use std::sync::Arc;

use crate::error::{Error, Result};

use super::FiniteMetricMeasureSpace;

/// Largest number of product points a view may address (the product
/// measure is cached per point).
pub const MAX_PRODUCT_POINTS: usize = 1 << 24;

/// Lazy view of `X^n` with the `l_p` product distance.
///
/// Points are addressed by a mixed-radix index: coordinate `i` of point
/// `idx` is `(idx / m^i) % m` where `m = |X|`, so coordinate 0 is the least
/// significant digit. Distances are computed on demand; only the product
/// measure is cached.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    base: FiniteMetricMeasureSpace,
    n: usize,
    p: f64,
    len: usize,
    measure: Arc<[f64]>,
}

impl ProductSpace {
    pub fn new(base: FiniteMetricMeasureSpace, n: usize, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "dimension must be positive",
            });
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "l_p index must be a finite real >= 1",
            });
        }
        let m = base.len();
        let len = checked_pow(m, n).filter(|&l| l <= MAX_PRODUCT_POINTS).ok_or(Error::TooLarge {
            points: checked_pow(m, n).unwrap_or(usize::MAX),
            cap: MAX_PRODUCT_POINTS,
        })?;
        let mut measure = vec![0.0; len];
        for (idx, slot) in measure.iter_mut().enumerate() {
            let mut rest = idx;
            let mut w = 1.0;
            for _ in 0..n {
                w *= base.weight(rest % m);
                rest /= m;
            }
            *slot = w;
        }
        Ok(Self {
            base,
            n,
            p,
            len,
            measure: measure.into(),
        })
    }

    /// The same product with a different `l_p` exponent.
    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "l_p index must be a finite real >= 1",
            });
        }
        Ok(Self { p, ..self.clone() })
    }

    pub fn base(&self) -> &FiniteMetricMeasureSpace {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Number of product points, `|X|^n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Product measure of a single point.
    #[inline]
    pub fn measure(&self, idx: usize) -> f64 {
        self.measure[idx]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    /// Coordinate `i` of point `idx`.
    #[inline]
    pub fn coord(&self, idx: usize, i: usize) -> usize {
        let m = self.base.len();
        let mut rest = idx;
        for _ in 0..i {
            rest /= m;
        }
        rest % m
    }

    /// Decodes a point index into its coordinate tuple.
    pub fn decode(&self, idx: usize) -> Vec<usize> {
        let m = self.base.len();
        let mut rest = idx;
        (0..self.n)
            .map(|_| {
                let c = rest % m;
                rest /= m;
                c
            })
            .collect()
    }

    /// Encodes a coordinate tuple; inverse of [`Self::decode`].
    pub fn encode(&self, coords: &[usize]) -> Result<usize> {
        let m = self.base.len();
        if coords.len() != self.n {
            return Err(Error::LengthMismatch {
                what: "coordinate tuple",
                got: coords.len(),
                expected: self.n,
            });
        }
        let mut idx = 0usize;
        for &c in coords.iter().rev() {
            if c >= m {
                return Err(Error::IndexOutOfRange { index: c, len: m });
            }
            idx = idx * m + c;
        }
        Ok(idx)
    }

    /// Index of the point obtained by replacing coordinate `i` of `idx` by `z`.
    #[inline]
    pub fn replace_coord(&self, idx: usize, i: usize, z: usize) -> usize {
        let m = self.base.len();
        let stride = m.pow(i as u32);
        let cur = (idx / stride) % m;
        idx - cur * stride + z * stride
    }

    pub fn check_index(&self, idx: usize) -> Result<()> {
        if idx < self.len {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: idx, len: self.len })
        }
    }

    /// `sum_i d(x_i, y_i)^q` for an arbitrary exponent `q`.
    #[inline]
    pub fn distance_pow_with(&self, x: usize, y: usize, q: f64) -> f64 {
        let m = self.base.len();
        let (mut a, mut b) = (x, y);
        let mut acc = 0.0;
        for _ in 0..self.n {
            let d = self.base.dist(a % m, b % m);
            if d != 0.0 {
                acc += if q == 2.0 {
                    d * d
                } else if q == 1.0 {
                    d
                } else {
                    d.powf(q)
                };
            }
            a /= m;
            b /= m;
        }
        acc
    }

    /// `d_p(x, y)^p`.
    #[inline]
    pub fn distance_pow(&self, x: usize, y: usize) -> f64 {
        self.distance_pow_with(x, y, self.p)
    }

    /// The `l_p` product distance `d_p(x, y)`.
    #[inline]
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        let s = self.distance_pow(x, y);
        if self.p == 1.0 {
            s
        } else if self.p == 2.0 {
            s.sqrt()
        } else {
            s.powf(1.0 / self.p)
        }
    }

    /// Euclidean product distance `d_2(x, y)` regardless of the view's `p`.
    #[inline]
    pub fn distance2(&self, x: usize, y: usize) -> f64 {
        self.distance_pow_with(x, y, 2.0).sqrt()
    }

    /// Checked version of [`Self::distance`].
    pub fn product_distance(&self, x: usize, y: usize) -> Result<f64> {
        self.check_index(x)?;
        self.check_index(y)?;
        Ok(self.distance(x, y))
    }

    /// Largest product distance: `n^{1/p}` times the base diameter.
    pub fn diameter(&self) -> f64 {
        (self.n as f64).powf(1.0 / self.p) * self.base.diameter()
    }

    /// Point label such as `(a,b,a)`.
    pub fn label(&self, idx: usize) -> String {
        let labels = self.base.labels();
        let parts: Vec<&str> = self.decode(idx).into_iter().map(|c| labels[c].as_str()).collect();
        format!("({})", parts.join(","))
    }
}

fn checked_pow(m: usize, n: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = acc.checked_mul(m)?;
    }
    Some(acc)
}
