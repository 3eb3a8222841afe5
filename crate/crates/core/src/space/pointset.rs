use crate::error::{Error, Result};

use super::ProductSpace;

/// A subset of the points of a (product) space, stored as a bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointSet {
    universe: usize,
    bits: Vec<u64>,
}

impl PointSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            universe,
            bits: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    /// Builds a set from indices; duplicates collapse, out-of-range indices
    /// are rejected.
    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = Self::empty(universe);
        for i in indices {
            if i >= universe {
                return Err(Error::IndexOutOfRange { index: i, len: universe });
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Set whose membership is the low `universe` bits of `mask`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= 64);
        let mut s = Self::empty(universe);
        if universe > 0 {
            let keep = if universe == 64 { u64::MAX } else { (1u64 << universe) - 1 };
            s.bits[0] = mask & keep;
        }
        s
    }

    /// Product set `A_1 x ... x A_n` inside `view`.
    pub fn product(view: &ProductSpace, factors: &[PointSet]) -> Result<Self> {
        if factors.len() != view.n() {
            return Err(Error::LengthMismatch {
                what: "product factors",
                got: factors.len(),
                expected: view.n(),
            });
        }
        let mut s = Self::empty(view.len());
        for idx in 0..view.len() {
            if factors.iter().enumerate().all(|(i, f)| f.contains(view.coord(idx, i))) {
                s.insert(idx);
            }
        }
        Ok(s)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && (self.bits[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.universe {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let t = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.universe == other.universe && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        assert_eq!(self.universe, other.universe);
        PointSet {
            universe: self.universe,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn complement(&self) -> PointSet {
        let mut out = PointSet::full(self.universe);
        for (o, b) in out.bits.iter_mut().zip(&self.bits) {
            *o &= !b;
        }
        out
    }

    /// Product measure of the set.
    pub fn measure(&self, view: &ProductSpace) -> f64 {
        self.iter().map(|i| view.measure(i)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteMetricMeasureSpace;

    #[test]
    fn basic_set_operations() {
        let a = PointSet::from_indices(70, [1, 65, 1, 3]).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.indices(), vec![1, 3, 65]);
        assert!(a.contains(65) && !a.contains(2));
        let b = PointSet::from_indices(70, [2]).unwrap();
        assert!(a.is_subset(&a.union(&b)));
        assert_eq!(a.complement().len(), 67);
        assert!(PointSet::from_indices(4, [4]).is_err());
    }

    #[test]
    fn product_set_measure_factorizes() {
        let s = FiniteMetricMeasureSpace::two_point(1.0, 0.3).unwrap();
        let v = s.view(2, 2.0).unwrap();
        let f0 = PointSet::from_indices(2, [0]).unwrap();
        let f1 = PointSet::full(2);
        let a = PointSet::product(&v, &[f0, f1]).unwrap();
        assert!((a.measure(&v) - 0.3).abs() < 1e-15);
    }
}
