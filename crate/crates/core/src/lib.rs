pub mod calculus;
pub mod concentration;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod poincare;
pub mod space;
pub mod transport;

pub use calculus::{GradientKind, RealFunction};
pub use concentration::ConcentrationProfile;
pub use error::{Error, Result};
pub use space::{FiniteMetricMeasureSpace, PointSet, ProductSpace};
