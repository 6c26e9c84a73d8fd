//! Kernelized correlation-filter tracking core.

mod config;
mod filter;
mod fourier;
mod projection;
mod tracker;

pub use config::TrackerConfig;
pub use filter::{
    detect, gaussian_kernel_correlation, gaussian_label, label_sigma, micro_shift, parabolic_offset, train,
    ResponseMap,
};
pub use fourier::{dft2, idft2, Fft2, Spectrum};
pub use projection::{
    compute_covariance, covariance_of_channels, leading_eigenpairs, project_features, update_projection,
    ProjectionState,
};
pub use tracker::{estimate_padding, update_model, StepReport, Tracker};
