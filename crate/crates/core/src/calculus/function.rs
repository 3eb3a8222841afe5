use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{format_ext, parse_ext};
use crate::space::{PointSet, ProductSpace};

/// A function on the points of a product view with values in the extended
/// reals.
///
/// `+inf` is allowed everywhere (indicator functions). `-inf` is only
/// accepted through [`RealFunction::new_extended`], for the sup-convolution.
#[derive(Clone, Debug)]
pub struct RealFunction {
    view: ProductSpace,
    values: Vec<f64>,
}

impl RealFunction {
    pub fn new(view: ProductSpace, values: Vec<f64>) -> Result<Self> {
        let f = Self::new_extended(view, values)?;
        if let Some(index) = f.values.iter().position(|&v| v == f64::NEG_INFINITY) {
            return Err(Error::NegativeInfinity { index });
        }
        Ok(f)
    }

    /// Like [`Self::new`] but also accepts `-inf`.
    pub fn new_extended(view: ProductSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != view.len() {
            return Err(Error::LengthMismatch {
                what: "function values",
                got: values.len(),
                expected: view.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::NonFiniteEntry {
                what: "function values",
                index,
            });
        }
        Ok(Self { view, values })
    }

    pub fn from_fn(view: ProductSpace, f: impl Fn(usize) -> f64) -> Result<Self> {
        let values = (0..view.len()).map(f).collect();
        Self::new(view, values)
    }

    pub fn constant(view: ProductSpace, c: f64) -> Result<Self> {
        let len = view.len();
        Self::new(view, vec![c; len])
    }

    /// `i_A`: zero on `A`, `+inf` elsewhere.
    pub fn indicator(view: ProductSpace, a: &PointSet) -> Result<Self> {
        check_universe(&view, a)?;
        Self::from_fn(view, |x| if a.contains(x) { 0.0 } else { f64::INFINITY })
    }

    /// Zero on `A`, `-inf` elsewhere.
    pub fn neg_indicator(view: ProductSpace, a: &PointSet) -> Result<Self> {
        check_universe(&view, a)?;
        let values = (0..view.len())
            .map(|x| if a.contains(x) { 0.0 } else { f64::NEG_INFINITY })
            .collect();
        Self::new_extended(view, values)
    }

    /// `f(x) = sum_i h(x_i)` for a function `h` on the base space.
    pub fn separable(view: ProductSpace, h: &[f64]) -> Result<Self> {
        if h.len() != view.base().len() {
            return Err(Error::LengthMismatch {
                what: "base function",
                got: h.len(),
                expected: view.base().len(),
            });
        }
        let n = view.n();
        let values = (0..view.len())
            .map(|x| (0..n).map(|i| h[view.coord(x, i)]).sum())
            .collect();
        Self::new(view, values)
    }

    pub fn view(&self) -> &ProductSpace {
        &self.view
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same view, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new_extended(self.view.clone(), values)
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| g(v)).collect())
    }

    /// First point with a non-finite value, if any.
    pub fn first_infinite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn require_finite(&self) -> Result<()> {
        match self.first_infinite() {
            Some(index) => Err(Error::InfiniteValueAtPoint { index }),
            None => Ok(()),
        }
    }

    /// `mu^n(f = +inf)`.
    pub fn infinite_mass(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == f64::INFINITY)
            .map(|(x, _)| self.view.measure(x))
            .sum()
    }

    /// `mu^n(f > level)`; `+inf` values count as above every level.
    pub fn tail_mass(&self, level: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > level)
            .map(|(x, _)| self.view.measure(x))
            .sum()
    }

    /// Writes `point_index,label_tuple,value` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["point_index", "label_tuple", "value"])?;
        for (x, &v) in self.values.iter().enumerate() {
            out.write_record([x.to_string(), self.view.label(x), format_ext(v)])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a CSV written by [`Self::write_csv`]. Every point must appear
    /// exactly once; the label column is ignored.
    pub fn read_csv<R: Read>(view: ProductSpace, r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut values = vec![f64::NAN; view.len()];
        let mut seen = vec![false; view.len()];
        for rec in rdr.deserialize::<CsvRow>() {
            let row = rec?;
            view.check_index(row.point_index)?;
            if seen[row.point_index] {
                return Err(Error::Parse(format!("point {} listed twice", row.point_index)));
            }
            seen[row.point_index] = true;
            values[row.point_index] = parse_ext(&row.value).map_err(Error::Parse)?;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Parse(format!("no value for point {missing}")));
        }
        Self::new_extended(view, values)
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    point_index: usize,
    #[allow(dead_code)]
    label_tuple: String,
    value: String,
}

fn check_universe(view: &ProductSpace, a: &PointSet) -> Result<()> {
    if a.universe() == view.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what: "point set universe",
            got: a.universe(),
            expected: view.len(),
        })
    }
}
