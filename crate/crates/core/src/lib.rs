//! Nonparametric estimation of the lifetime density, its derivatives, and
//! the hazard function from right-censored data.
//!
//! Each observation is weighted by the jump of the Kaplan-Meier survival
//! estimate and smoothed with an infinite-order flat-top kernel, whose
//! Fourier transform equals 1 near the origin; that flatness removes every
//! polynomial bias term, so accuracy is limited only by how fast the
//! characteristic function of the lifetime density decays. The bandwidth is
//! chosen by locating the frequency beyond which the empirical
//! characteristic function drops into the sampling noise.
//!
//! Modules:
//! - [`km`]: censored samples, Kaplan-Meier curves and jump weights
//! - [`kernel`]: the trapezoidal flat-top kernel and a Gaussian comparator
//! - [`ecf`]: empirical characteristic function and bandwidth selection
//! - [`estimate`]: density / derivative / hazard estimators with boundary
//!   reflection and nonnegativity post-processing
//! - [`plugin`]: plug-in bandwidths for second-order kernels from flat-top
//!   pilots
//! - [`simbench`]: seeded Monte Carlo benchmark harness
//! - [`io`]: CSV ingestion
//! - [`quad`]: Simpson quadrature

pub mod ecf;
pub mod error;
pub mod estimate;
pub mod io;
pub mod kernel;
pub mod km;
pub mod plugin;
pub mod quad;
pub mod simbench;

pub use ecf::{
    crossing_index, ecf, ecf_magnitude, pilot_bandwidth, select_bandwidth, BandwidthConfig,
    EcfCurve, WindowRule,
};
pub use error::{Error, Result};
pub use estimate::{
    default_grid, density, density_derivative, density_frequency_domain, hazard, mirrored_grid,
    reflect, smoothed_survival, truncate_renormalize, Corrections, EstimateGrid, EstimateKind,
    HazardConfig,
};
pub use kernel::{gaussian_kernel_constants, FlatTopKernel, GaussianKernel, Kernel};
pub use km::{CensoredObservation, CensoredSample, SurvivalCurve};
pub use plugin::{
    h_mise, h_mse, mise_bandwidth_from_integrals, mse_bandwidth_from_pilots, plugin_bandwidth,
    KernelConstants, PluginConfig, PluginDiagnostics, PluginMode, PluginResult,
};
pub use simbench::{MseReport, SimDesign};
