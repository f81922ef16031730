//! Temporal statistics, predicted main terms and identity checks.

pub mod checks;
pub mod diophantine;
pub mod distribution;
pub mod fourier;
pub mod moments;

pub use checks::{
    beck_centering_check, bounded_remainder_length, bu_variance_check, diophantine_product_gap,
    extreme_check, pq_square_sum_check, running_range, symmetry_check, BandReport,
    ExtremeReport, SquareSumReport, SymmetryReport,
};
pub use diophantine::{
    diophantine_sum, diophantine_sum_grid, dyadic_grid, predicted_mean_variance,
    sigma2_closed_form, sigma2_estimate, ClosedFormAlpha, MeanVariancePrediction, Sigma2Estimate,
};
pub use distribution::{
    ae_experiment, clt_report, ks_distance, levy_cdf, normal_cdf, AeReport, DistributionReport,
    Reference,
};
pub use fourier::{predicted_birkhoff_moments, FourierModel, PredictedMoments};
pub use moments::{cross_moment, temporal_moments, welford, CrossMomentReport, MomentReport};
