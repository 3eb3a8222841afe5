//! Concentration profiles: medians, exact and heuristic profiles, the
//! inf-convolution deviation inequality, geometric self-improvement and
//! observable diameters.

mod deviation;
mod exact;
mod heuristic;
mod obsdiam;
mod profile;
mod self_improve;
mod suite;

pub use deviation::{deviation_check, deviation_records, median, DeviationRecord, DEVIATION_TOL};
pub use exact::{complement_of_enlargement, distinct_distances, exact_profile, normalize_radii, EXACT_CAP};
pub use heuristic::{heuristic_profile, CandidateFamilies};
pub use obsdiam::{observable_diameter, partial_diameter, ObservableDiameterResult, EXACT_OBSDIAM_POINTS};
pub use profile::{AnalyticForm, Breakpoint, ConcentrationProfile, ProfileMode, ProfileShape};
pub use self_improve::{
    gamma_lower_bound, max_phi_excess, one_minus_phi, phi_excess, self_improve, SelfImprovementParams, PHI_GRID,
};
pub use suite::{
    contraction_point, indicator_sweep, random_bounded_below, random_deviation_checks, verify_self_improvement,
    DeviationSummary, ImprovementRow, IndicatorSweep, SelfImprovementCheck, SweepRow, SWEEP_CAP,
};
