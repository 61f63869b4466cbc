//! The flat-top estimators: lifetime density, its derivatives, and the hazard
//! function, together with boundary reflection, nonnegativity
//! post-processing, the smoothed Kaplan-Meier survival curve, and an
//! independent frequency-domain evaluation path.
//!
//! The density estimate is the jump-weighted kernel sum
//!
//! ```text
//! f(x) = (1/h) sum_j s_j K((x - X_j)/h),
//! ```
//!
//! and the p-th derivative estimate replaces `K` by `K^(p)` and `1/h` by
//! `1/h^{p+1}`. Because the kernel is the Fourier transform of a compactly
//! supported `kappa`, the same estimate can be written as
//! `(1/2pi) int phi(t) kappa(t h) e^{-itx} dt` over `|t| <= (1+1/c)/h`;
//! [`density_frequency_domain`] computes that integral by quadrature and is
//! used as the master correctness oracle for the spatial sum.

use crate::error::{Error, Result};
use crate::kernel::{FlatTopKernel, Kernel};
use crate::km::CensoredSample;
use crate::quad;
use serde::{Deserialize, Serialize, Serializer};
use std::f64::consts::{PI, SQRT_2};

/// What an [`EstimateGrid`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    Density,
    /// Derivative of the given order (1 or 2).
    Derivative(usize),
    Hazard,
    SurvivalSmoothed,
}

impl EstimateKind {
    pub fn label(&self) -> String {
        match self {
            EstimateKind::Density => "density".into(),
            EstimateKind::Derivative(p) => format!("derivative-{p}"),
            EstimateKind::Hazard => "hazard".into(),
            EstimateKind::SurvivalSmoothed => "survival-smoothed".into(),
        }
    }
}

impl Serialize for EstimateKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

/// Post-processing flags carried alongside an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Corrections {
    pub reflected: bool,
    pub truncated_renormalized: bool,
}

/// An estimate tabulated on strictly ascending abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateGrid {
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    pub bandwidth: f64,
    pub kind: EstimateKind,
    pub corrections: Corrections,
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidBandwidth { value: h });
    }
    Ok(())
}

fn check_grid(x: &[f64]) -> Result<()> {
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid);
    }
    if x.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// `(1/h^{p+1}) sum_j s_j eval((x - X_j)/h)` with a fixed summation order.
fn kernel_sum<F: Fn(f64) -> f64>(
    sample: &CensoredSample,
    eval: &F,
    h: f64,
    p: usize,
    x: f64,
) -> f64 {
    let mut acc = 0.0;
    for (t, w) in sample.times().iter().zip(sample.weights()) {
        acc += w * eval((x - t) / h);
    }
    acc / h.powi(p as i32 + 1)
}

/// Kernel density estimate with Kaplan-Meier jump weights. Negative dips are
/// kept; apply [`truncate_renormalize`] to get a proper density.
pub fn density(
    sample: &CensoredSample,
    kernel: &dyn Kernel,
    h: f64,
    x_grid: &[f64],
) -> Result<EstimateGrid> {
    check_bandwidth(h)?;
    check_grid(x_grid)?;
    let value = x_grid
        .iter()
        .map(|&x| kernel_sum(sample, &|u| kernel.value(u), h, 0, x))
        .collect();
    Ok(EstimateGrid {
        x: x_grid.to_vec(),
        value,
        bandwidth: h,
        kind: EstimateKind::Density,
        corrections: Corrections::default(),
    })
}

/// Estimate of the p-th density derivative, `p` in `{1, 2}`.
pub fn density_derivative(
    sample: &CensoredSample,
    kernel: &dyn Kernel,
    h: f64,
    p: usize,
    x_grid: &[f64],
) -> Result<EstimateGrid> {
    check_bandwidth(h)?;
    check_grid(x_grid)?;
    let eval: Box<dyn Fn(f64) -> f64> = match p {
        1 => Box::new(|u| kernel.deriv1(u)),
        2 => Box::new(|u| kernel.deriv2(u)),
        _ => return Err(Error::DerivativeOrder { p }),
    };
    let value = x_grid
        .iter()
        .map(|&x| kernel_sum(sample, &eval, h, p, x))
        .collect();
    Ok(EstimateGrid {
        x: x_grid.to_vec(),
        value,
        bandwidth: h,
        kind: EstimateKind::Derivative(p),
        corrections: Corrections::default(),
    })
}

/// The density estimate computed on the Fourier side:
/// `(1/pi) int_0^{b/h} Re(phi(t) e^{-itx}) kappa(t h) dt`, integrated
/// piecewise so the trapezoid corner at `t = 1/h` never crosses a panel.
///
/// Agrees with [`density`] to quadrature accuracy; kept as an independent
/// computation path.
pub fn density_frequency_domain(
    sample: &CensoredSample,
    kernel: &FlatTopKernel,
    h: f64,
    x: f64,
) -> Result<f64> {
    check_bandwidth(h)?;
    let b = kernel.support_edge();
    let phi_re = |t: f64| {
        let mut acc = 0.0;
        for (xj, w) in sample.times().iter().zip(sample.weights()) {
            acc += w * (t * (xj - x)).cos();
        }
        acc
    };
    let tol = 1e-12 * (1.0 + b / h);
    let flat = quad::adaptive_simpson(phi_re, 0.0, 1.0 / h, tol);
    let flank = quad::adaptive_simpson(|t| kernel.kappa(t * h) * phi_re(t), 1.0 / h, b / h, tol);
    Ok((flat + flank) / PI)
}

/// Boundary reflection: fold a density or derivative grid about 0, replacing
/// `value(x)` by `value(x) + value(-x)` and keeping only `x >= 0`.
///
/// Every nonnegative abscissa must have its mirror image on the grid; use
/// [`mirrored_grid`] to build a suitable evaluation grid.
pub fn reflect(grid: &EstimateGrid) -> Result<EstimateGrid> {
    match grid.kind {
        EstimateKind::Density | EstimateKind::Derivative(_) => {}
        _ => return Err(Error::ReflectKind),
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, &x) in grid.x.iter().enumerate() {
        if x < 0.0 {
            continue;
        }
        let tol = 1e-9 * x.abs().max(1.0);
        let j = find_abscissa(&grid.x, -x, tol).ok_or(Error::ReflectAsymmetric { missing: -x })?;
        xs.push(x);
        vs.push(grid.value[i] + grid.value[j]);
    }
    if xs.is_empty() {
        return Err(Error::InvalidGrid);
    }
    Ok(EstimateGrid {
        x: xs,
        value: vs,
        bandwidth: grid.bandwidth,
        kind: grid.kind,
        corrections: Corrections {
            reflected: true,
            ..grid.corrections
        },
    })
}

fn find_abscissa(xs: &[f64], target: f64, tol: f64) -> Option<usize> {
    let i = xs.partition_point(|&v| v < target);
    [i.checked_sub(1), Some(i)]
        .into_iter()
        .flatten()
        .find(|&cand| cand < xs.len() && (xs[cand] - target).abs() <= tol)
}

/// Extend a nonnegative ascending grid with its mirror image, so the result
/// can be folded by [`reflect`].
pub fn mirrored_grid(xs: &[f64]) -> Result<Vec<f64>> {
    check_grid(xs)?;
    if xs[0] < 0.0 {
        return Err(Error::InvalidConfig(
            "mirrored grid requires nonnegative abscissae".into(),
        ));
    }
    let mut full: Vec<f64> = xs.iter().rev().map(|&x| -x).collect();
    if xs[0] == 0.0 {
        full.pop();
    }
    full.extend_from_slice(xs);
    Ok(full)
}

/// Clip negative values to zero and renormalize so the curve integrates to
/// one over its grid.
pub fn truncate_renormalize(grid: &EstimateGrid) -> Result<EstimateGrid> {
    if grid.kind != EstimateKind::Density {
        return Err(Error::TruncateKind);
    }
    let clipped: Vec<f64> = grid.value.iter().map(|v| v.max(0.0)).collect();
    let mass = quad::grid_mass(&grid.x, &clipped);
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::DegenerateEstimate);
    }
    Ok(EstimateGrid {
        x: grid.x.clone(),
        value: clipped.iter().map(|v| v / mass).collect(),
        bandwidth: grid.bandwidth,
        kind: grid.kind,
        corrections: Corrections {
            truncated_renormalized: true,
            ..grid.corrections
        },
    })
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Gaussian smoothing of the Kaplan-Meier survival step function.
///
/// The step function is `S(u) = sum_j s_j 1[u <= X_j]`, so local-constant
/// smoothing with a Gaussian window is the exact convolution
/// `S~(x) = sum_j s_j Phi((X_j - x)/bandwidth)`, which is automatically
/// nonincreasing and in `[0, 1]`; a clamp and isotonic pass keep those
/// postconditions under any rounding.
pub fn smoothed_survival(
    sample: &CensoredSample,
    bandwidth: f64,
    x_grid: &[f64],
) -> Result<EstimateGrid> {
    check_bandwidth(bandwidth)?;
    check_grid(x_grid)?;
    let mut value: Vec<f64> = x_grid
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for (xj, w) in sample.times().iter().zip(sample.weights()) {
                acc += w * normal_cdf((xj - x) / bandwidth);
            }
            acc.clamp(0.0, 1.0)
        })
        .collect();
    for i in 1..value.len() {
        value[i] = value[i].min(value[i - 1]);
    }
    Ok(EstimateGrid {
        x: x_grid.to_vec(),
        value,
        bandwidth,
        kind: EstimateKind::SurvivalSmoothed,
        corrections: Corrections::default(),
    })
}

/// Hazard estimation knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HazardConfig {
    /// Bandwidth for smoothing the Kaplan-Meier curve; `None` reuses the
    /// density bandwidth.
    pub survival_bandwidth: Option<f64>,
    /// Lower clip for the smoothed survival denominator, in `(0, 0.5)`. The
    /// hazard blows up where the survival estimate vanishes, so evaluation
    /// past the data is clamped rather than divergent.
    pub survival_floor: f64,
    /// Fold the density numerator about 0 (for lifetimes supported on
    /// `[0, inf)` with positive density at the boundary).
    pub reflect_density: bool,
}

impl Default for HazardConfig {
    fn default() -> Self {
        Self {
            survival_bandwidth: None,
            survival_floor: 0.05,
            reflect_density: false,
        }
    }
}

impl HazardConfig {
    fn validate(&self) -> Result<()> {
        let floor_ok = self.survival_floor > 0.0 && self.survival_floor < 0.5;
        if !floor_ok {
            return Err(Error::InvalidConfig(format!(
                "survival floor must lie in (0, 0.5), got {}",
                self.survival_floor
            )));
        }
        if let Some(sb) = self.survival_bandwidth {
            check_bandwidth(sb)?;
        }
        Ok(())
    }
}

/// Hazard estimate `H(x) = f(x) / max(S~(x), floor)` from the kernel density
/// and the smoothed Kaplan-Meier survival.
pub fn hazard(
    sample: &CensoredSample,
    kernel: &dyn Kernel,
    h: f64,
    config: &HazardConfig,
    x_grid: &[f64],
) -> Result<EstimateGrid> {
    check_bandwidth(h)?;
    check_grid(x_grid)?;
    config.validate()?;
    let numerator = if config.reflect_density {
        if x_grid[0] < 0.0 {
            return Err(Error::InvalidConfig(
                "reflection requires nonnegative evaluation points".into(),
            ));
        }
        let full = mirrored_grid(x_grid)?;
        let dens = density(sample, kernel, h, &full)?;
        reflect(&dens)?.value
    } else {
        density(sample, kernel, h, x_grid)?.value
    };
    let sb = config.survival_bandwidth.unwrap_or(h);
    let surv = smoothed_survival(sample, sb, x_grid)?;
    let value = numerator
        .iter()
        .zip(&surv.value)
        .map(|(f, s)| f / s.max(config.survival_floor))
        .collect();
    Ok(EstimateGrid {
        x: x_grid.to_vec(),
        value,
        bandwidth: h,
        kind: EstimateKind::Hazard,
        corrections: Corrections {
            reflected: config.reflect_density,
            truncated_renormalized: false,
        },
    })
}

/// Default evaluation abscissae: 101 equispaced points on
/// `[X_1 - 3h, X_n + 3h]`.
pub fn default_grid(sample: &CensoredSample, h: f64) -> Vec<f64> {
    let times = sample.times();
    let lo = times[0] - 3.0 * h;
    let hi = times[times.len() - 1] + 3.0 * h;
    quad::linspace(lo, hi, 101)
}
