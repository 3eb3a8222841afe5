//! Theorem-level checks tying the modules together: Gaussian tails, the
//! Poincaré constant implied by a concentration profile, the quantile map of
//! a law on the line, and verification reports.

mod bobkov_houdre;
pub mod gaussian;
mod report;
mod theorem;

pub use bobkov_houdre::{
    bobkov_houdre_check, bobkov_houdre_check_with, logistic_atoms, QuantileMap, RealLineMeasure, DEFAULT_MIN_SEPARATION,
};
pub use gaussian::{gaussian_tail, gaussian_tail_inverse, gaussian_tail_inverse_log, log_gaussian_tail, StandardGaussianTail};
pub use report::{verify_main_theorem, CheckClass, InequalityRow, RowStatus, VerificationReport, LAMBDA_REL_TOL, TREND_TOL};
pub use theorem::{
    canicule_translate, convex_profile_lambda, main_theorem_lambda, CaniculeDirection, DEFAULT_KAPPA,
};
