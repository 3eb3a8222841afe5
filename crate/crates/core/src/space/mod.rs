//! Finite metric measure spaces, their `l_p` products, point sets and
//! enlargements.

mod enlarge;
mod metric;
mod pointset;
mod product;

pub use enlarge::{distance_to_set, enlarge, enlarge_product, talagrand_enlarge, theta, TalagrandCost};
pub use metric::{FiniteMetricMeasureSpace, SpaceFile, SpaceFlags, METRIC_TOL};
pub use pointset::PointSet;
pub use product::{ProductSpace, MAX_PRODUCT_POINTS};
