//! Functions on product spaces and the metric operators acting on them:
//! discrete slopes, variance, the inf-convolution `Q_t` and the regularized
//! sup-convolution `R_eps`.

mod function;
mod operators;

pub use function::RealFunction;
pub use operators::{
    coordinate_gradient, gradient, gradient_sum_sq, hopf_lax_rate, inf_conv, integrate, lipschitz_constant,
    lipschitz_constant_d2, mean, sup_conv, variance, GradientKind, InfConvParams, SupConvParams,
};
