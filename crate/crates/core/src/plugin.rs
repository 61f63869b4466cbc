//! Plug-in bandwidth selection for second-order kernels, with flat-top pilot
//! estimates of the density and its curvature and the censoring-distribution
//! Kaplan-Meier estimate of `1 - G`.
//!
//! Pointwise:
//!
//! ```text
//! h_MSE = ( (f(x)/(1-G(x))) R / (f''(x) mu2)^2 )^{1/5} n^{-1/5}
//! ```
//!
//! and globally, with an interval weight `omega`,
//!
//! ```text
//! h_MISE = ( int f/(1-G) omega * R / (int f''^2 omega * mu2^2) )^{1/5} n^{-1/5},
//! ```
//!
//! where `R` and `mu2` are the roughness and second moment of the comparator
//! kernel (standard Gaussian by default). The pilots `f` and `f''` are the
//! flat-top estimates at the bandwidth chosen by the ECF rule, evaluated with
//! reflection off: the plug-in is interior-point machinery.

use crate::ecf::{pilot_bandwidth, BandwidthConfig};
use crate::error::{Error, Result};
use crate::estimate::{density, density_derivative};
use crate::kernel::{gaussian_kernel_constants, FlatTopKernel};
use crate::km::CensoredSample;
use crate::quad;
use serde::Serialize;

/// Roughness and second moment of the comparator kernel.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelConstants {
    pub roughness: f64,
    pub second_moment: f64,
}

impl Default for KernelConstants {
    fn default() -> Self {
        let (roughness, second_moment) = gaussian_kernel_constants();
        Self {
            roughness,
            second_moment,
        }
    }
}

/// Pointwise or weighted-global bandwidth target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PluginMode {
    PointwiseMse { x: f64 },
    GlobalMise { lo: f64, hi: f64 },
}

#[derive(Debug, Clone)]
pub struct PluginConfig {
    pub mode: PluginMode,
    pub comparator: KernelConstants,
    pub pilot: BandwidthConfig,
}

impl PluginConfig {
    pub fn mse_at(x: f64) -> Self {
        Self {
            mode: PluginMode::PointwiseMse { x },
            comparator: KernelConstants::default(),
            pilot: BandwidthConfig::default(),
        }
    }

    pub fn mise_on(lo: f64, hi: f64) -> Self {
        Self {
            mode: PluginMode::GlobalMise { lo, hi },
            comparator: KernelConstants::default(),
            pilot: BandwidthConfig::default(),
        }
    }

    /// Global mode with the default weight: the indicator of the 5th-95th
    /// weighted-percentile interval of the sample (tail control).
    pub fn mise_default(sample: &CensoredSample) -> Self {
        let (lo, hi) = default_mise_window(sample);
        Self::mise_on(lo, hi)
    }
}

/// `[5th, 95th]` weighted-percentile interval used as the default `omega`.
pub fn default_mise_window(sample: &CensoredSample) -> (f64, f64) {
    (
        sample.weighted_percentile(0.05),
        sample.weighted_percentile(0.95),
    )
}

/// Pilot values (pointwise) or pilot integrals (global) behind a plug-in
/// bandwidth.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PluginDiagnostics {
    Pointwise {
        density: f64,
        second_derivative: f64,
        censoring_survival: f64,
    },
    Global {
        weighted_density_integral: f64,
        curvature_integral: f64,
    },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PluginResult {
    pub bandwidth: f64,
    pub pilot_bandwidth: f64,
    pub diagnostics: PluginDiagnostics,
}

/// Evaluate the pointwise formula for given pilot values.
pub fn mse_bandwidth_from_pilots(
    density: f64,
    censoring_survival: f64,
    curvature: f64,
    constants: &KernelConstants,
    n: usize,
) -> Result<f64> {
    if censoring_survival <= 0.0 {
        return Err(Error::InvalidConfig(
            "censoring survival must be positive".into(),
        ));
    }
    if curvature == 0.0 {
        return Err(Error::FlatCurvature);
    }
    let num = density / censoring_survival * constants.roughness;
    let den = (curvature * constants.second_moment).powi(2);
    let ratio = num / den;
    if ratio.is_nan() || ratio <= 0.0 || ratio.is_infinite() {
        return Err(Error::NonpositivePilot { value: density });
    }
    Ok(ratio.powf(0.2) * (n as f64).powf(-0.2))
}

/// Evaluate the global formula for given pilot integrals.
pub fn mise_bandwidth_from_integrals(
    weighted_density_integral: f64,
    curvature_integral: f64,
    constants: &KernelConstants,
    n: usize,
) -> Result<f64> {
    if curvature_integral == 0.0 {
        return Err(Error::FlatCurvature);
    }
    let num = weighted_density_integral * constants.roughness;
    let den = curvature_integral * constants.second_moment * constants.second_moment;
    let ratio = num / den;
    if ratio.is_nan() || ratio <= 0.0 || ratio.is_infinite() {
        return Err(Error::NonpositivePilot {
            value: weighted_density_integral,
        });
    }
    Ok(ratio.powf(0.2) * (n as f64).powf(-0.2))
}

/// Run the plug-in rule in the configured mode.
pub fn plugin_bandwidth(
    sample: &CensoredSample,
    kernel: &FlatTopKernel,
    config: &PluginConfig,
) -> Result<PluginResult> {
    match config.mode {
        PluginMode::PointwiseMse { x } => h_mse(sample, kernel, config, x),
        PluginMode::GlobalMise { lo, hi } => h_mise(sample, kernel, config, lo, hi),
    }
}

/// Pointwise plug-in bandwidth at `x`.
pub fn h_mse(
    sample: &CensoredSample,
    kernel: &FlatTopKernel,
    config: &PluginConfig,
    x: f64,
) -> Result<PluginResult> {
    if !x.is_finite() {
        return Err(Error::InvalidConfig(
            "evaluation point must be finite".into(),
        ));
    }
    let pilot_h = pilot_bandwidth(sample, &config.pilot)?;
    let f = density(sample, kernel, pilot_h, &[x])?.value[0];
    let f2 = density_derivative(sample, kernel, pilot_h, 2, &[x])?.value[0];
    let g = sample.censoring_survival().eval(x);
    if g <= 0.0 {
        return Err(Error::NoRiskMass { x });
    }
    if f2 == 0.0 {
        return Err(Error::FlatCurvature);
    }
    let bandwidth = mse_bandwidth_from_pilots(f, g, f2, &config.comparator, sample.n())?;
    Ok(PluginResult {
        bandwidth,
        pilot_bandwidth: pilot_h,
        diagnostics: PluginDiagnostics::Pointwise {
            density: f,
            second_derivative: f2,
            censoring_survival: g,
        },
    })
}

/// Global plug-in bandwidth with `omega = 1[lo, hi]`, integrals by 201-point
/// composite Simpson.
pub fn h_mise(
    sample: &CensoredSample,
    kernel: &FlatTopKernel,
    config: &PluginConfig,
    lo: f64,
    hi: f64,
) -> Result<PluginResult> {
    let interval_ok = lo < hi && lo.is_finite() && hi.is_finite();
    if !interval_ok {
        return Err(Error::InvalidConfig(format!(
            "weight interval must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let pilot_h = pilot_bandwidth(sample, &config.pilot)?;
    let xs = quad::linspace(lo, hi, 201);
    let f = density(sample, kernel, pilot_h, &xs)?;
    let f2 = density_derivative(sample, kernel, pilot_h, 2, &xs)?;
    let censoring = sample.censoring_survival();
    let mut ratio = Vec::with_capacity(xs.len());
    for (x, fv) in xs.iter().zip(&f.value) {
        let g = censoring.eval(*x);
        if g <= 0.0 {
            return Err(Error::NoRiskMass { x: *x });
        }
        ratio.push(fv / g);
    }
    let curvature_sq: Vec<f64> = f2.value.iter().map(|v| v * v).collect();
    let num = quad::grid_mass(&xs, &ratio);
    let den = quad::grid_mass(&xs, &curvature_sq);
    let bandwidth = mise_bandwidth_from_integrals(num, den, &config.comparator, sample.n())?;
    Ok(PluginResult {
        bandwidth,
        pilot_bandwidth: pilot_h,
        diagnostics: PluginDiagnostics::Global {
            weighted_density_integral: num,
            curvature_integral: den,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn normal_sample(n: usize, seed: u64) -> CensoredSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        CensoredSample::ingest((0..n).map(|_| (normal.sample(&mut rng), true))).unwrap()
    }

    #[test]
    fn synthetic_pilots_match_the_display() {
        // f = 0.2, 1 - G = 0.5, f'' = 1, Gaussian constants
        let k = KernelConstants::default();
        let h1 = mse_bandwidth_from_pilots(0.2, 0.5, 1.0, &k, 1).unwrap();
        let expected = (0.4 * 0.2820948_f64).powf(0.2);
        assert_abs_diff_eq!(h1, expected, epsilon = 1e-7);
        assert_abs_diff_eq!(h1, 0.6463, epsilon = 1e-4);
        let h100 = mse_bandwidth_from_pilots(0.2, 0.5, 1.0, &k, 100).unwrap();
        assert_relative_eq!(h100, h1 * 100f64.powf(-0.2), epsilon = 1e-12);
    }

    #[test]
    fn thirty_two_fold_n_halves_the_bandwidth() {
        let k = KernelConstants::default();
        for n in [10usize, 100, 1000] {
            let a = mse_bandwidth_from_pilots(0.3, 0.8, -1.7, &k, n).unwrap();
            let b = mse_bandwidth_from_pilots(0.3, 0.8, -1.7, &k, 32 * n).unwrap();
            assert_relative_eq!(b / a, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn doubling_roughness_scales_by_two_to_the_fifth_root() {
        let base = KernelConstants::default();
        let doubled = KernelConstants {
            roughness: 2.0 * base.roughness,
            second_moment: base.second_moment,
        };
        let a = mse_bandwidth_from_pilots(0.2, 0.5, 1.0, &base, 50).unwrap();
        let b = mse_bandwidth_from_pilots(0.2, 0.5, 1.0, &doubled, 50).unwrap();
        assert_relative_eq!(b / a, 2f64.powf(0.2), epsilon = 1e-12);
    }

    #[test]
    fn uncensored_sample_reduces_to_the_plain_plugin() {
        let s = normal_sample(150, 4);
        let kernel = FlatTopKernel::default();
        let config = PluginConfig::mse_at(0.25);
        let result = h_mse(&s, &kernel, &config, 0.25).unwrap();
        match result.diagnostics {
            PluginDiagnostics::Pointwise {
                density,
                second_derivative,
                censoring_survival,
            } => {
                assert_eq!(censoring_survival, 1.0);
                let plain = mse_bandwidth_from_pilots(
                    density,
                    1.0,
                    second_derivative,
                    &config.comparator,
                    s.n(),
                )
                .unwrap();
                assert_eq!(result.bandwidth, plain);
            }
            _ => panic!("expected pointwise diagnostics"),
        }
        assert!(result.bandwidth > 0.0);
    }

    #[test]
    fn constant_pilots_collapse_mise_to_mse() {
        let k = KernelConstants::default();
        let (c1, c2, len) = (0.37, 1.9, 2.4);
        let mise = mise_bandwidth_from_integrals(c1 * len, c2 * len, &k, 77).unwrap();
        let mse = mse_bandwidth_from_pilots(c1, 1.0, c2.sqrt(), &k, 77).unwrap();
        assert_relative_eq!(mise, mse, epsilon = 1e-12);
    }

    #[test]
    fn shrinking_the_weight_interval_recovers_the_pointwise_rule() {
        let s = normal_sample(120, 9);
        let kernel = FlatTopKernel::default();
        let config = PluginConfig::mse_at(0.0);
        let pointwise = h_mse(&s, &kernel, &config, 0.0).unwrap();
        let narrow = h_mise(&s, &kernel, &config, -1e-4, 1e-4).unwrap();
        assert_relative_eq!(narrow.bandwidth, pointwise.bandwidth, max_relative = 1e-3);
    }

    #[test]
    fn mise_on_normal_data_is_positive_and_sane() {
        let s = normal_sample(200, 12);
        let kernel = FlatTopKernel::default();
        let config = PluginConfig::mise_default(&s);
        let result = plugin_bandwidth(&s, &kernel, &config).unwrap();
        assert!(result.bandwidth > 0.0 && result.bandwidth < 5.0);
        assert!(result.pilot_bandwidth > 0.0);
    }

    #[test]
    fn default_window_uses_weighted_percentiles() {
        let s = CensoredSample::ingest((1..=100).map(|i| (i as f64, true))).unwrap();
        let (lo, hi) = default_mise_window(&s);
        assert_eq!(lo, 5.0);
        assert_eq!(hi, 95.0);
    }

    #[test]
    fn flat_curvature_errors() {
        let k = KernelConstants::default();
        assert!(matches!(
            mse_bandwidth_from_pilots(0.2, 0.5, 0.0, &k, 10),
            Err(Error::FlatCurvature)
        ));
        assert!(matches!(
            mise_bandwidth_from_integrals(0.3, 0.0, &k, 10),
            Err(Error::FlatCurvature)
        ));
    }

    #[test]
    fn no_risk_mass_errors_past_the_censoring_support() {
        // flipped sample puts all censoring mass at 2, so 1-G vanishes beyond
        let s = CensoredSample::ingest([(1.0, true), (2.0, false)]).unwrap();
        let kernel = FlatTopKernel::default();
        let config = PluginConfig::mse_at(2.5);
        assert!(matches!(
            h_mse(&s, &kernel, &config, 2.5),
            Err(Error::NoRiskMass { .. })
        ));
    }

    #[test]
    fn nonpositive_pilot_errors() {
        let k = KernelConstants::default();
        assert!(matches!(
            mse_bandwidth_from_pilots(-0.2, 0.5, 1.0, &k, 10),
            Err(Error::NonpositivePilot { .. })
        ));
    }

    #[test]
    fn invalid_weight_interval_errors() {
        let s = normal_sample(50, 2);
        let kernel = FlatTopKernel::default();
        let config = PluginConfig::mse_at(0.0);
        assert!(h_mise(&s, &kernel, &config, 1.0, 1.0).is_err());
        assert!(h_mise(&s, &kernel, &config, 2.0, -2.0).is_err());
    }
}
