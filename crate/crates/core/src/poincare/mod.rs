//! Poincaré constants as minimal Rayleigh quotients, and the exponential
//! deviation bounds they imply.

mod constant;
mod herbst;
mod quotient;

pub use constant::{poincare_constant, PoincareEstimate, PoincareMethod, PoincareOptions};
pub use herbst::{
    gromov_milman_constant, gromov_milman_profile, herbst_b, herbst_bound, herbst_tail_check, scale_to_unit_gradient,
    HerbstConstants, HerbstRow,
};
pub use quotient::{rayleigh_quotient, tensorized_quotient};
