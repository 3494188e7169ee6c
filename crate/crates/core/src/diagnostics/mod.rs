//! Covariation estimates and their transport, the rotation/stretching split of `∇V`, and
//! perturbation experiments on the solution map.

mod covariation;
mod lipschitz;
mod stretching;

pub use covariation::{
    covariation_estimate, covariation_predicted, covariation_shift_estimate, CovariationSeries,
};
pub use lipschitz::{lipschitz_experiment, LipschitzRow, LipschitzTable, Ratio, EXACT_MATCH_FLOOR};
pub use stretching::{stretching_decomposition, stretching_from_trajectory, StretchFrame, StretchSeries};
