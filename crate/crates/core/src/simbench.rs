//! Seeded Monte Carlo harness: generate censored datasets from a design,
//! run an estimator, and aggregate pointwise and grid-averaged MSE.
//!
//! Designs are plain JSON (see the repository README for the schema).
//! Replication `r` draws from an independent ChaCha stream `(seed, r)`, so
//! reports are byte-identical regardless of thread count or evaluation
//! order; aggregation always reduces in replication order.

use crate::ecf::{pilot_bandwidth, BandwidthConfig};
use crate::error::{Error, Result};
use crate::estimate::{density, hazard, mirrored_grid, reflect, HazardConfig};
use crate::kernel::{FlatTopKernel, GaussianKernel, Kernel};
use crate::km::CensoredSample;
use crate::quad;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use std::f64::consts::SQRT_2;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Lifetime or censoring distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase")]
pub enum DistributionSpec {
    Normal { mean: f64, sd: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Exponential { mean: f64 },
}

enum Sampler {
    Normal(Normal<f64>),
    Lognormal(LogNormal<f64>),
    Exponential(Exp<f64>),
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Lognormal(d) => d.sample(rng),
            Sampler::Exponential(d) => d.sample(rng),
        }
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

fn normal_survival(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

impl DistributionSpec {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            DistributionSpec::Normal { mean, sd } => {
                mean.is_finite() && sd.is_finite() && *sd > 0.0
            }
            DistributionSpec::Lognormal { mu, sigma } => {
                mu.is_finite() && sigma.is_finite() && *sigma > 0.0
            }
            DistributionSpec::Exponential { mean } => mean.is_finite() && *mean > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid distribution parameters: {self:?}"
            )))
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Normal { mean, sd } => Sampler::Normal(
                Normal::new(mean, sd).map_err(|e| Error::InvalidConfig(e.to_string()))?,
            ),
            DistributionSpec::Lognormal { mu, sigma } => Sampler::Lognormal(
                LogNormal::new(mu, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?,
            ),
            DistributionSpec::Exponential { mean } => Sampler::Exponential(
                Exp::new(1.0 / mean).map_err(|e| Error::InvalidConfig(e.to_string()))?,
            ),
        })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        const INV_SQRT_2PI: f64 = 0.3989422804014327;
        match *self {
            DistributionSpec::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() * INV_SQRT_2PI / sd
            }
            DistributionSpec::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (-0.5 * z * z).exp() * INV_SQRT_2PI / (x * sigma)
                }
            }
            DistributionSpec::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            DistributionSpec::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - mu) / sigma)
                }
            }
            DistributionSpec::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
        }
    }

    /// `f(x) / (1 - F(x))`; constant `1/mean` for the exponential.
    pub fn hazard(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0 / mean
                }
            }
            DistributionSpec::Normal { mean, sd } => self.pdf(x) / normal_survival((x - mean) / sd),
            DistributionSpec::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    self.pdf(x) / normal_survival((x.ln() - mu) / sigma)
                }
            }
        }
    }
}

/// Equispaced evaluation grid `[lo, hi, count]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec(pub f64, pub f64, pub usize);

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        quad::linspace(self.0, self.1, self.2)
    }

    fn validate(&self) -> Result<()> {
        let shape_ok = self.0 < self.1 && self.2 >= 2;
        if !shape_ok {
            return Err(Error::InvalidConfig(format!(
                "grid must satisfy lo < hi and count >= 2, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Kernel choice for a benchmark run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "kebab-case")]
pub enum KernelSpec {
    FlatTop {
        #[serde(default = "default_slope")]
        c: f64,
    },
    Gaussian,
}

fn default_slope() -> f64 {
    FlatTopKernel::DEFAULT_SLOPE
}

/// Automatic (ECF rule) or fixed bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthSpec {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub kernel: KernelSpec,
    pub bandwidth: BandwidthSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Density,
    Hazard,
}

/// One benchmark design: data-generating pair, sample size, replication
/// count, seed, evaluation points, estimator, and target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub lifetime: DistributionSpec,
    /// Censoring distribution; JSON accepts an object, `null`, or `"none"`.
    #[serde(default, deserialize_with = "deserialize_censoring")]
    pub censoring: Option<DistributionSpec>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub eval_points: Vec<f64>,
    #[serde(default)]
    pub eval_grid: Option<GridSpec>,
    pub estimator: EstimatorSpec,
    pub target: Target,
    /// Fold the density about 0 (supports on `[0, inf)`).
    #[serde(default)]
    pub reflect: bool,
    /// Smoothing bandwidth for the hazard denominator; defaults to the
    /// density bandwidth.
    #[serde(default)]
    pub survival_bandwidth: Option<f64>,
    #[serde(default = "default_survival_floor")]
    pub survival_floor: f64,
    /// Threshold constant of the automatic bandwidth rule.
    #[serde(default = "default_threshold_constant")]
    pub threshold_constant: f64,
}

fn default_survival_floor() -> f64 {
    0.05
}

fn default_threshold_constant() -> f64 {
    2.0
}

fn deserialize_censoring<'de, D: Deserializer<'de>>(
    de: D,
) -> std::result::Result<Option<DistributionSpec>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Spec(DistributionSpec),
        Keyword(String),
    }
    match Option::<Raw>::deserialize(de)? {
        None => Ok(None),
        Some(Raw::Spec(s)) => Ok(Some(s)),
        Some(Raw::Keyword(k)) if k == "none" => Ok(None),
        Some(Raw::Keyword(k)) => Err(D::Error::custom(format!(
            "unknown censoring spec {k:?} (expected \"none\" or a distribution)"
        ))),
    }
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        self.lifetime.validate()?;
        if let Some(c) = &self.censoring {
            c.validate()?;
        }
        if self.n < 2 || self.reps < 1 {
            return Err(Error::InvalidConfig(
                "design needs n >= 2 and reps >= 1".into(),
            ));
        }
        if let Some(g) = &self.eval_grid {
            g.validate()?;
        }
        if self.eval_points.is_empty() && self.eval_grid.is_none() {
            return Err(Error::InvalidConfig(
                "design needs eval_points or eval_grid".into(),
            ));
        }
        if matches!(self.estimator.kernel, KernelSpec::Gaussian)
            && matches!(self.estimator.bandwidth, BandwidthSpec::Auto)
        {
            return Err(Error::InvalidConfig(
                "the automatic bandwidth rule applies to the flat-top kernel; use a fixed bandwidth with the gaussian kernel".into(),
            ));
        }
        if self.reflect && self.all_eval_points().iter().any(|x| *x < 0.0) {
            return Err(Error::InvalidConfig(
                "reflection requires nonnegative evaluation points".into(),
            ));
        }
        Ok(())
    }

    fn all_eval_points(&self) -> Vec<f64> {
        let mut xs = self.eval_points.clone();
        if let Some(g) = &self.eval_grid {
            xs.extend(g.points());
        }
        xs
    }
}

/// Draw `n` censored observations from independent streams `(seed, stream)`.
pub fn draw_censored(
    lifetime: &DistributionSpec,
    censoring: Option<&DistributionSpec>,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<(f64, bool)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let life = lifetime.sampler()?;
    let cens = censoring.map(|c| c.sampler()).transpose()?;
    Ok((0..n)
        .map(|_| {
            let x0 = life.draw(&mut rng);
            match &cens {
                Some(c) => {
                    let u = c.draw(&mut rng);
                    if x0 <= u {
                        (x0, true)
                    } else {
                        (u, false)
                    }
                }
                None => (x0, true),
            }
        })
        .collect())
}

/// Raw dataset of replication `rep_index`, reproducible from
/// `(design.seed, rep_index)`.
pub fn generate(design: &SimDesign, rep_index: usize) -> Result<Vec<(f64, bool)>> {
    draw_censored(
        &design.lifetime,
        design.censoring.as_ref(),
        design.n,
        design.seed,
        rep_index as u64,
    )
}

/// Exact target value for the MSE computation.
pub fn true_curve(design: &SimDesign, x: f64) -> f64 {
    match design.target {
        Target::Density => design.lifetime.pdf(x),
        Target::Hazard => design.lifetime.hazard(x),
    }
}

/// Run the design's own estimator on a sample at the given (sorted) points.
pub fn estimate_with_spec(
    design: &SimDesign,
    sample: &CensoredSample,
    xs: &[f64],
) -> Result<Vec<f64>> {
    let h = match design.estimator.bandwidth {
        BandwidthSpec::Auto => pilot_bandwidth(
            sample,
            &BandwidthConfig::with_threshold_constant(design.threshold_constant),
        )?,
        BandwidthSpec::Fixed(h) => h,
    };
    let flat_top;
    let gaussian;
    let kernel: &dyn Kernel = match design.estimator.kernel {
        KernelSpec::FlatTop { c } => {
            flat_top = FlatTopKernel::new(c)?;
            &flat_top
        }
        KernelSpec::Gaussian => {
            gaussian = GaussianKernel;
            &gaussian
        }
    };
    match design.target {
        Target::Density => {
            if design.reflect {
                let full = mirrored_grid(xs)?;
                let est = density(sample, kernel, h, &full)?;
                Ok(reflect(&est)?.value)
            } else {
                Ok(density(sample, kernel, h, xs)?.value)
            }
        }
        Target::Hazard => {
            let config = HazardConfig {
                survival_bandwidth: design.survival_bandwidth,
                survival_floor: design.survival_floor,
                reflect_density: design.reflect,
            };
            Ok(hazard(sample, kernel, h, &config, xs)?.value)
        }
    }
}

/// Pointwise MSE at one evaluation point, raw and scaled by 10^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointMse {
    pub x: f64,
    pub mse: f64,
    pub mse_x1000: f64,
}

/// Aggregated benchmark result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseReport {
    pub design: SimDesign,
    pub points: Vec<PointMse>,
    pub grid_average_mse: Option<f64>,
    pub grid_average_mse_x1000: Option<f64>,
    /// Observed fraction of censored observations across replications.
    pub censoring_fraction: f64,
    /// Replications whose estimator failed; they are excluded from the MSE.
    pub failed_reps: usize,
}

/// Run the design with its own estimator.
pub fn run(design: &SimDesign) -> Result<MseReport> {
    run_with(design, |sample, xs| estimate_with_spec(design, sample, xs))
}

/// Run the design with a caller-supplied estimator (used for oracle stubs
/// and custom comparisons). The estimator receives sorted, deduplicated
/// evaluation points.
pub fn run_with<F>(design: &SimDesign, estimator: F) -> Result<MseReport>
where
    F: Fn(&CensoredSample, &[f64]) -> Result<Vec<f64>> + Sync,
{
    design.validate()?;
    let grid_points = design
        .eval_grid
        .as_ref()
        .map(|g| g.points())
        .unwrap_or_default();
    let mut order = design.all_eval_points();
    order.sort_by(f64::total_cmp);
    order.dedup();

    let rep_run = |rep: usize| -> Result<(Vec<f64>, usize)> {
        let data = generate(design, rep)?;
        let censored = data.iter().filter(|(_, event)| !event).count();
        let sample = CensoredSample::ingest(data)?;
        let values = estimator(&sample, &order)?;
        Ok((values, censored))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Result<(Vec<f64>, usize)>> =
        (0..design.reps).into_par_iter().map(rep_run).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(Vec<f64>, usize)>> = (0..design.reps).map(rep_run).collect();

    let truth: Vec<f64> = order.iter().map(|&x| true_curve(design, x)).collect();
    let mut sq = vec![0.0; order.len()];
    let mut ok = 0usize;
    let mut censored_total = 0usize;
    let mut failed_reps = 0usize;
    let mut first_error: Option<Error> = None;
    for result in results {
        match result {
            Ok((values, censored)) => {
                ok += 1;
                censored_total += censored;
                for (acc, (v, t)) in sq.iter_mut().zip(values.iter().zip(&truth)) {
                    let d = v - t;
                    *acc += d * d;
                }
            }
            Err(e) => {
                failed_reps += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if ok == 0 {
        return Err(Error::AllReplicationsFailed(
            first_error.map(|e| e.to_string()).unwrap_or_default(),
        ));
    }

    let mse_at = |x: f64| -> f64 {
        let idx = order
            .binary_search_by(|v| v.total_cmp(&x))
            .expect("evaluation point is on the ordered grid");
        sq[idx] / ok as f64
    };
    let points = design
        .eval_points
        .iter()
        .map(|&x| {
            let mse = mse_at(x);
            PointMse {
                x,
                mse,
                mse_x1000: mse * 1e3,
            }
        })
        .collect();
    let grid_average_mse = if grid_points.is_empty() {
        None
    } else {
        Some(grid_points.iter().map(|&x| mse_at(x)).sum::<f64>() / grid_points.len() as f64)
    };
    Ok(MseReport {
        design: design.clone(),
        points,
        grid_average_mse,
        grid_average_mse_x1000: grid_average_mse.map(|m| m * 1e3),
        censoring_fraction: censored_total as f64 / (ok * design.n) as f64,
        failed_reps,
    })
}
