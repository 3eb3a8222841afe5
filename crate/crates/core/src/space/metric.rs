use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::WEIGHT_SUM_TOL;

use super::ProductSpace;

/// Tolerance applied to the triangle inequality and to symmetry checks.
pub const METRIC_TOL: f64 = 1e-12;

/// A finite metric space equipped with a probability measure.
///
/// Cloning is cheap: the point data is shared behind an `Arc`.
#[derive(Clone, Debug)]
pub struct FiniteMetricMeasureSpace {
    inner: Arc<SpaceData>,
}

#[derive(Debug)]
struct SpaceData {
    labels: Vec<String>,
    dist: Vec<f64>,
    weights: Vec<f64>,
    support: Vec<usize>,
}

/// Degenerate features of a validated space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpaceFlags {
    /// The measure is carried by a single point.
    pub dirac: bool,
    /// Points that belong to the metric but carry no mass.
    pub zero_weight_points: Vec<usize>,
}

/// On-disk form of a space: `{"labels": [...], "dist": [[...]], "weights": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl FiniteMetricMeasureSpace {
    /// Validates the metric and the weights and builds the space.
    ///
    /// The first violated invariant is reported, with the indices that
    /// witness it.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return Err(Error::EmptySpace);
        }
        if dist.len() != m {
            return Err(Error::LengthMismatch {
                what: "dist",
                got: dist.len(),
                expected: m,
            });
        }
        if weights.len() != m {
            return Err(Error::LengthMismatch {
                what: "weights",
                got: weights.len(),
                expected: m,
            });
        }
        for (row, r) in dist.iter().enumerate() {
            if r.len() != m {
                return Err(Error::NotSquare {
                    row,
                    len: r.len(),
                    expected: m,
                });
            }
        }
        for i in 0..m {
            for j in 0..m {
                let v = dist[i][j];
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry {
                        what: "dist",
                        index: i * m + j,
                    });
                }
            }
        }
        for i in 0..m {
            if dist[i][i] != 0.0 {
                return Err(Error::NonzeroDiagonal { i, value: dist[i][i] });
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let (dij, dji) = (dist[i][j], dist[j][i]);
                if (dij - dji).abs() > METRIC_TOL {
                    return Err(Error::AsymmetricMetric { i, j, dij, dji });
                }
                if dij <= 0.0 {
                    return Err(Error::NonPositiveDistance { i, j, value: dij });
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let via = dist[i][j] + dist[j][k];
                    if dist[i][k] > via + METRIC_TOL {
                        return Err(Error::TriangleViolation {
                            i,
                            j,
                            k,
                            dik: dist[i][k],
                            via,
                        });
                    }
                }
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFiniteEntry {
                    what: "weights",
                    index: i,
                });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { i, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSumMismatch { sum });
        }
        let support = (0..m).filter(|&i| weights[i] > 0.0).collect();
        Ok(Self {
            inner: Arc::new(SpaceData {
                labels,
                dist: dist.into_iter().flatten().collect(),
                weights,
                support,
            }),
        })
    }

    /// Convenience constructor labelling points `0, 1, ...`.
    pub fn unlabeled(dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, dist, weights)
    }

    /// Two points at distance `d` with masses `(p0, 1 - p0)`.
    pub fn two_point(d: f64, p0: f64) -> Result<Self> {
        Self::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, d], vec![d, 0.0]],
            vec![p0, 1.0 - p0],
        )
    }

    /// A single point of mass one.
    pub fn dirac() -> Self {
        Self::new(vec!["x".into()], vec![vec![0.0]], vec![1.0]).expect("dirac space is valid")
    }

    /// Uniform measure on the given distance matrix.
    pub fn uniform(dist: Vec<Vec<f64>>) -> Result<Self> {
        let m = dist.len();
        Self::unlabeled(dist, vec![1.0 / m as f64; m])
    }

    pub fn from_file(file: SpaceFile) -> Result<Self> {
        Self::new(file.labels, file.dist, file.weights)
    }

    /// Reads and validates a JSON space file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpaceFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> SpaceFile {
        let m = self.len();
        SpaceFile {
            labels: self.inner.labels.clone(),
            dist: (0..m).map(|i| self.inner.dist[i * m..(i + 1) * m].to_vec()).collect(),
            weights: self.inner.weights.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("space serializes")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.inner.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.inner.dist[i * self.len() + j]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.inner.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.inner.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    /// Indices of points with positive mass.
    pub fn support(&self) -> &[usize] {
        &self.inner.support
    }

    pub fn is_dirac(&self) -> bool {
        self.inner.support.len() == 1
    }

    pub fn flags(&self) -> SpaceFlags {
        SpaceFlags {
            dirac: self.is_dirac(),
            zero_weight_points: (0..self.len()).filter(|&i| self.weight(i) == 0.0).collect(),
        }
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.inner.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Same points and weights, distances multiplied by `s > 0`.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: s,
                reason: "must be positive and finite",
            });
        }
        let mut file = self.to_file();
        for row in &mut file.dist {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        Self::from_file(file)
    }

    /// Lazy view of the `n`-fold product with the `l_p` product metric.
    pub fn view(&self, n: usize, p: f64) -> Result<ProductSpace> {
        ProductSpace::new(self.clone(), n, p)
    }

    /// The space itself as a one-dimensional view (`p` is irrelevant there).
    pub fn base_view(&self) -> ProductSpace {
        ProductSpace::new(self.clone(), 1, 2.0).expect("a one-fold view always fits")
    }
}
