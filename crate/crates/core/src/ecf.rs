//! Empirical characteristic function and bandwidth selection.
//!
//! The ECF of a censored sample is the jump-weighted complex exponential sum
//! `phi(t) = sum_j s_j e^{i t X_j}`. The bandwidth rule picks the smallest
//! `t*` such that `|phi(t)|` stays below the threshold `C sqrt(log10 n / n)`
//! over the whole look-ahead window `(t*, t* + eps_n]`, and returns
//! `h = 1/t*`. The trapezoidal transform is not flat past 1, so the flat-top
//! radius adds nothing to `h`.

use crate::error::{Error, Result};
use crate::km::CensoredSample;
use num_complex::Complex64;

/// Weighted complex exponential sum at frequency `t`.
pub fn ecf(sample: &CensoredSample, t: f64) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, w) in sample.times().iter().zip(sample.weights()) {
        let (s, c) = (t * x).sin_cos();
        re += w * c;
        im += w * s;
    }
    Complex64::new(re, im)
}

/// `|phi(t)|`; at most 1 since the weights are a unit mass.
pub fn ecf_magnitude(sample: &CensoredSample, t: f64) -> f64 {
    ecf(sample, t).norm()
}

/// Look-ahead window length `eps_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowRule {
    /// `max(1, sqrt(log10 n))`: nondecreasing, divergent, o(log n).
    Adaptive,
    Fixed(f64),
}

/// Knobs of the bandwidth-selection rule. `t_step` and `t_max` default to
/// `0.25 / sigma` (weighted standard deviation) and `400 * t_step`, so the
/// search resolution follows the scale of the data.
#[derive(Debug, Clone)]
pub struct BandwidthConfig {
    /// Threshold constant `C` (irrelevant asymptotically, matters at finite n).
    pub threshold_constant: f64,
    pub window: WindowRule,
    pub t_step: Option<f64>,
    pub t_max: Option<f64>,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        Self {
            threshold_constant: 2.0,
            window: WindowRule::Adaptive,
            t_step: None,
            t_max: None,
        }
    }
}

impl BandwidthConfig {
    pub fn with_threshold_constant(c: f64) -> Self {
        Self {
            threshold_constant: c,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.threshold_constant.is_finite() || self.threshold_constant <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "threshold constant must be positive, got {}",
                self.threshold_constant
            )));
        }
        if let WindowRule::Fixed(eps) = self.window {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "window width must be positive, got {eps}"
                )));
            }
        }
        if let Some(step) = self.t_step {
            if !step.is_finite() || step <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "t_step must be positive, got {step}"
                )));
            }
        }
        Ok(())
    }

    /// Window width `eps_n` for a sample of size `n`.
    pub fn window_width(&self, n: usize) -> f64 {
        match self.window {
            WindowRule::Adaptive => (n as f64).log10().sqrt().max(1.0),
            WindowRule::Fixed(eps) => eps,
        }
    }
}

/// ECF magnitude curve with the selected crossing point.
///
/// The grid runs past `t_max` by one window so every candidate has a full
/// look-ahead window.
#[derive(Debug, Clone, PartialEq)]
pub struct EcfCurve {
    pub t_grid: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub threshold: f64,
    pub t_star: f64,
    pub bandwidth: f64,
    /// True when no qualifying crossing exists at or below `t_max`; the
    /// bandwidth then falls back to `1 / t_max`.
    pub ceiling_hit: bool,
}

struct ResolvedGrid {
    t_step: f64,
    i_max: usize,
    window: usize,
    threshold: f64,
}

fn resolve(sample: &CensoredSample, config: &BandwidthConfig) -> Result<ResolvedGrid> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::DegenerateSample(
            "bandwidth selection needs at least two observations".into(),
        ));
    }
    config.validate()?;
    let mut sigma = sample.weighted_sd();
    if sigma.is_nan() || sigma <= f64::MIN_POSITIVE {
        // all jump mass on one atom; fall back to the raw spread
        sigma = sample.unweighted_sd();
    }
    if sigma.is_nan() || sigma <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateSample("times have zero spread".into()));
    }
    let t_step = config.t_step.unwrap_or(0.25 / sigma);
    let t_max = config.t_max.unwrap_or(400.0 * t_step);
    if !t_max.is_finite() || t_max <= t_step {
        return Err(Error::InvalidConfig(format!(
            "t_max must exceed t_step, got t_max = {t_max}, t_step = {t_step}"
        )));
    }
    let eps = config.window_width(n);
    let window = ((eps / t_step + 1e-9).floor() as usize).max(1);
    let i_max = ((t_max / t_step + 1e-9).floor() as usize).max(1);
    let nf = n as f64;
    let threshold = config.threshold_constant * (nf.log10() / nf).sqrt();
    Ok(ResolvedGrid {
        t_step,
        i_max,
        window,
        threshold,
    })
}

/// Smallest index `i >= 1` whose look-ahead window (grid points
/// `i+1..=i+window`, the half-open interval `(t_i, t_i + eps]`) lies strictly
/// below `threshold`. The window always contains at least one grid point.
pub fn crossing_index(magnitude: &[f64], window: usize, threshold: f64) -> Option<usize> {
    let w = window.max(1);
    if magnitude.len() < w + 2 {
        return None;
    }
    (1..magnitude.len() - w).find(|&i| magnitude[i + 1..=i + w].iter().all(|&m| m < threshold))
}

/// Evaluates the ECF magnitudes lazily while scanning candidates, so the
/// common case stops shortly past the crossing.
fn search(sample: &CensoredSample, grid: &ResolvedGrid) -> (Vec<f64>, Option<usize>) {
    let mut mag: Vec<f64> = vec![1.0]; // |phi(0)| = sum of weights
    let fill_to = |mag: &mut Vec<f64>, upto: usize| {
        while mag.len() <= upto {
            let t = mag.len() as f64 * grid.t_step;
            mag.push(ecf_magnitude(sample, t));
        }
    };
    for i in 1..=grid.i_max {
        fill_to(&mut mag, i + grid.window);
        if mag[i + 1..=i + grid.window]
            .iter()
            .all(|&m| m < grid.threshold)
        {
            return (mag, Some(i));
        }
    }
    (mag, None)
}

/// Run the bandwidth-selection rule and return the full ECF curve.
pub fn select_bandwidth(sample: &CensoredSample, config: &BandwidthConfig) -> Result<EcfCurve> {
    let grid = resolve(sample, config)?;
    let (mut mag, hit) = search(sample, &grid);
    let len = grid.i_max + grid.window + 1;
    while mag.len() < len {
        let t = mag.len() as f64 * grid.t_step;
        mag.push(ecf_magnitude(sample, t));
    }
    let (index, ceiling_hit) = match hit {
        Some(i) => (i, false),
        None => (grid.i_max, true),
    };
    let t_star = index as f64 * grid.t_step;
    Ok(EcfCurve {
        t_grid: (0..len).map(|i| i as f64 * grid.t_step).collect(),
        magnitude: mag,
        threshold: grid.threshold,
        t_star,
        bandwidth: 1.0 / t_star,
        ceiling_hit,
    })
}

/// Bandwidth for the pilot estimates: the same rule, stopping as soon as the
/// crossing is found. Identical to `select_bandwidth(..).bandwidth`.
pub fn pilot_bandwidth(sample: &CensoredSample, config: &BandwidthConfig) -> Result<f64> {
    let grid = resolve(sample, config)?;
    let (_, hit) = search(sample, &grid);
    let index = hit.unwrap_or(grid.i_max);
    Ok(1.0 / (index as f64 * grid.t_step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sample(records: &[(f64, bool)]) -> CensoredSample {
        CensoredSample::ingest(records.iter().copied()).unwrap()
    }

    fn normal_sample(n: usize, seed: u64) -> CensoredSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        CensoredSample::ingest((0..n).map(|_| (normal.sample(&mut rng), true))).unwrap()
    }

    #[test]
    fn ecf_at_zero_is_one() {
        let s = sample(&[(1.0, true), (2.0, false), (3.0, true)]);
        let v = ecf(&s, 0.0);
        assert_eq!(v.re, 1.0);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn single_atom_at_origin_is_constant_one() {
        let s = sample(&[(0.0, true)]);
        for &t in &[0.0, 0.5, 3.0, 100.0] {
            assert_eq!(ecf(&s, t), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn symmetric_two_atoms_give_cosine() {
        let s = sample(&[(-1.0, true), (1.0, true)]);
        for &t in &[0.1, 0.9, 2.5, 7.0] {
            let v = ecf(&s, t);
            assert_abs_diff_eq!(v.re, t.cos(), epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn conjugate_symmetry_is_exact() {
        let s = sample(&[(0.3, true), (1.7, false), (2.9, true), (4.1, true)]);
        for &t in &[0.17, 1.3, 6.4] {
            assert_eq!(ecf(&s, -t), ecf(&s, t).conj());
        }
    }

    #[test]
    fn magnitude_never_exceeds_one() {
        let s = normal_sample(200, 7);
        let curve = select_bandwidth(&s, &BandwidthConfig::default()).unwrap();
        assert!(curve.magnitude.iter().all(|&m| m <= 1.0 + 1e-12));
        assert_eq!(curve.magnitude[0], 1.0);
    }

    #[test]
    fn crossing_on_exponential_decay() {
        // |phi| = e^{-t} crosses 0.5 at ln 2; a tiny window checks only the
        // next grid point.
        let step = 1e-3;
        let mag: Vec<f64> = (0..2000).map(|i| (-(i as f64) * step).exp()).collect();
        let i = crossing_index(&mag, 1, 0.5).unwrap();
        let t_star = i as f64 * step;
        assert_abs_diff_eq!(t_star, std::f64::consts::LN_2, epsilon = 2.0 * step);
        // 1/ln 2 = 1.4427...
        assert_abs_diff_eq!(1.0 / t_star, std::f64::consts::LOG2_E, epsilon = 5e-3);
    }

    #[test]
    fn crossing_on_hard_zero_tail() {
        // 1 up to t = 2 inclusive, 0 beyond: smallest qualifying point is 2.
        let step = 0.01;
        let mag: Vec<f64> = (0..400)
            .map(|i| if i as f64 * step <= 2.0 { 1.0 } else { 0.0 })
            .collect();
        let i = crossing_index(&mag, 120, 0.3).unwrap();
        assert_eq!(i, 200);
        assert_abs_diff_eq!(1.0 / (i as f64 * step), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn crossing_requires_full_window() {
        let mag = vec![1.0, 0.1, 0.1];
        // window of 2 never fits after index 1
        assert_eq!(crossing_index(&mag, 2, 0.5), None);
        assert_eq!(crossing_index(&mag, 1, 0.5), Some(1));
    }

    #[test]
    fn select_bandwidth_on_normal_data_is_reasonable() {
        let s = normal_sample(1000, 42);
        let curve = select_bandwidth(&s, &BandwidthConfig::default()).unwrap();
        assert!(!curve.ceiling_hit);
        // population cf e^{-t^2/2} crosses the n=1000 threshold near t = 1.9
        assert!(
            curve.t_star > 1.0 && curve.t_star < 3.5,
            "t* = {}",
            curve.t_star
        );
        assert_relative_eq!(curve.bandwidth, 1.0 / curve.t_star, epsilon = 1e-15);
    }

    #[test]
    fn pilot_equals_select() {
        let s = normal_sample(300, 9);
        let config = BandwidthConfig::default();
        let curve = select_bandwidth(&s, &config).unwrap();
        let pilot = pilot_bandwidth(&s, &config).unwrap();
        assert_eq!(curve.bandwidth, pilot);
    }

    #[test]
    fn shift_leaves_selection_unchanged() {
        let s = normal_sample(400, 11);
        let shifted = CensoredSample::ingest(
            s.times()
                .iter()
                .map(|t| t + 500.0)
                .zip(s.events().iter().copied()),
        )
        .unwrap();
        let config = BandwidthConfig::default();
        let a = select_bandwidth(&s, &config).unwrap();
        let b = select_bandwidth(&shifted, &config).unwrap();
        assert_eq!(a.t_grid.len(), b.t_grid.len());
        assert_relative_eq!(a.t_star, b.t_star, epsilon = 1e-12);
        assert_relative_eq!(a.bandwidth, b.bandwidth, epsilon = 1e-12);
    }

    #[test]
    fn scaling_times_scales_bandwidth() {
        let s = normal_sample(400, 13);
        let scaled = CensoredSample::ingest(
            s.times()
                .iter()
                .map(|t| t * 2.0)
                .zip(s.events().iter().copied()),
        )
        .unwrap();
        let config = BandwidthConfig::default();
        let a = select_bandwidth(&s, &config).unwrap();
        let b = select_bandwidth(&scaled, &config).unwrap();
        let step_b = b.t_grid[1] - b.t_grid[0];
        assert!((b.t_star - a.t_star / 2.0).abs() <= step_b + 1e-12);
    }

    #[test]
    fn ceiling_is_flagged_when_threshold_is_unreachable() {
        let s = normal_sample(50, 3);
        let config = BandwidthConfig {
            threshold_constant: 1e-9,
            ..BandwidthConfig::default()
        };
        let curve = select_bandwidth(&s, &config).unwrap();
        assert!(curve.ceiling_hit);
        assert_relative_eq!(curve.bandwidth, 1.0 / curve.t_star, epsilon = 1e-15);
        let pilot = pilot_bandwidth(&s, &config).unwrap();
        assert_eq!(curve.bandwidth, pilot);
    }

    #[test]
    fn selection_is_permutation_invariant() {
        let recs = vec![
            (0.4, true),
            (-1.2, false),
            (2.2, true),
            (0.9, true),
            (-0.3, false),
        ];
        let mut reversed = recs.clone();
        reversed.reverse();
        let a = select_bandwidth(&sample(&recs), &BandwidthConfig::default()).unwrap();
        let b = select_bandwidth(&sample(&reversed), &BandwidthConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_samples_are_rejected() {
        let s = sample(&[(1.0, true)]);
        assert!(matches!(
            select_bandwidth(&s, &BandwidthConfig::default()),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn zero_weighted_spread_falls_back_to_raw_spread() {
        // all jump mass lands on the last atom, but the raw times still spread
        let s = sample(&[(1.0, false), (2.0, true)]);
        assert_eq!(s.weighted_sd(), 0.0);
        let curve = select_bandwidth(&s, &BandwidthConfig::default()).unwrap();
        assert!(curve.bandwidth.is_finite());
    }

    #[test]
    fn invalid_config_is_rejected() {
        let s = normal_sample(10, 1);
        let bad = BandwidthConfig {
            threshold_constant: -1.0,
            ..BandwidthConfig::default()
        };
        assert!(select_bandwidth(&s, &bad).is_err());
        let bad_step = BandwidthConfig {
            t_step: Some(0.0),
            ..BandwidthConfig::default()
        };
        assert!(select_bandwidth(&s, &bad_step).is_err());
    }
}
