//! Browser demo bindings. Three operations, each taking a JSON parameter
//! string and returning a JSON curve ready for canvas plotting:
//!
//! - [`density_curve`]: flat-top density estimate vs. the true density
//! - [`ecf_curve`]: ECF magnitude with the selection threshold and crossing
//! - [`hazard_curve`]: hazard estimate vs. the true hazard
//!
//! Data are drawn from a named design (seeded, reproducible) so the page can
//! explore sample size, censoring, the kernel slope `c`, the threshold
//! constant `C`, and fixed vs. automatic bandwidths.

use censored_density::simbench::{draw_censored, DistributionSpec};
use censored_density::{
    density, hazard, mirrored_grid, pilot_bandwidth, reflect, select_bandwidth,
    truncate_renormalize, BandwidthConfig, CensoredSample, FlatTopKernel, HazardConfig,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Deserialize)]
#[serde(default)]
struct DemoParams {
    /// "normal" | "lognormal" | "exponential"
    design: String,
    censoring: bool,
    n: usize,
    seed: u64,
    c: f64,
    threshold_c: f64,
    /// fixed bandwidth; null = automatic
    bandwidth: Option<f64>,
    reflect: bool,
    truncate: bool,
    points: usize,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            design: "normal".into(),
            censoring: true,
            n: 200,
            seed: 1,
            c: 4.0,
            threshold_c: 2.0,
            bandwidth: None,
            reflect: false,
            truncate: false,
            points: 161,
        }
    }
}

struct Scenario {
    lifetime: DistributionSpec,
    censoring: Option<DistributionSpec>,
    x_lo: f64,
    x_hi: f64,
}

fn scenario(params: &DemoParams) -> Result<Scenario, String> {
    let (lifetime, censoring, x_lo, x_hi) = match params.design.as_str() {
        "normal" => (
            DistributionSpec::Normal { mean: 0.0, sd: 1.0 },
            DistributionSpec::Normal { mean: 0.0, sd: 1.0 },
            -3.0,
            3.0,
        ),
        "lognormal" => (
            DistributionSpec::Lognormal {
                mu: 0.0,
                sigma: 0.5,
            },
            DistributionSpec::Lognormal {
                mu: 0.5,
                sigma: 0.5,
            },
            0.0,
            3.0,
        ),
        "exponential" => (
            DistributionSpec::Exponential { mean: 1.0 },
            DistributionSpec::Exponential { mean: 4.0 },
            0.0,
            3.0,
        ),
        other => return Err(format!("unknown design {other:?}")),
    };
    Ok(Scenario {
        lifetime,
        censoring: params.censoring.then_some(censoring),
        x_lo,
        x_hi,
    })
}

struct Prepared {
    sample: CensoredSample,
    kernel: FlatTopKernel,
    bandwidth: f64,
    auto_bandwidth: bool,
    scenario: Scenario,
    censored_fraction: f64,
}

fn prepare(params: &DemoParams) -> Result<Prepared, String> {
    let scenario = scenario(params)?;
    if params.n < 2 || params.n > 100_000 {
        return Err("n must be between 2 and 100000".into());
    }
    let data = draw_censored(
        &scenario.lifetime,
        scenario.censoring.as_ref(),
        params.n,
        params.seed,
        0,
    )
    .map_err(|e| e.to_string())?;
    let censored = data.iter().filter(|(_, event)| !event).count();
    let sample = CensoredSample::ingest(data).map_err(|e| e.to_string())?;
    let kernel = FlatTopKernel::new(params.c).map_err(|e| e.to_string())?;
    let config = BandwidthConfig::with_threshold_constant(params.threshold_c);
    let (bandwidth, auto_bandwidth) = match params.bandwidth {
        Some(h) if h > 0.0 => (h, false),
        _ => (
            pilot_bandwidth(&sample, &config).map_err(|e| e.to_string())?,
            true,
        ),
    };
    Ok(Prepared {
        censored_fraction: censored as f64 / params.n as f64,
        sample,
        kernel,
        bandwidth,
        auto_bandwidth,
        scenario,
    })
}

#[derive(Serialize)]
struct CurveOut {
    x: Vec<f64>,
    estimate: Vec<f64>,
    truth: Vec<f64>,
    bandwidth: f64,
    auto_bandwidth: bool,
    censored_fraction: f64,
    n: usize,
}

fn parse_params(json: &str) -> Result<DemoParams, String> {
    serde_json::from_str(json).map_err(|e| format!("bad parameters: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn density_curve_impl(params_json: &str) -> Result<String, String> {
    let params = parse_params(params_json)?;
    let p = prepare(&params)?;
    let xs = censored_density::quad::linspace(
        p.scenario.x_lo,
        p.scenario.x_hi,
        params.points.clamp(11, 2001),
    );
    let mut grid = if params.reflect && p.scenario.x_lo >= 0.0 {
        let full = mirrored_grid(&xs).map_err(|e| e.to_string())?;
        let est = density(&p.sample, &p.kernel, p.bandwidth, &full).map_err(|e| e.to_string())?;
        reflect(&est).map_err(|e| e.to_string())?
    } else {
        density(&p.sample, &p.kernel, p.bandwidth, &xs).map_err(|e| e.to_string())?
    };
    if params.truncate {
        grid = truncate_renormalize(&grid).map_err(|e| e.to_string())?;
    }
    let truth = grid.x.iter().map(|&x| p.scenario.lifetime.pdf(x)).collect();
    to_json(&CurveOut {
        x: grid.x,
        estimate: grid.value,
        truth,
        bandwidth: p.bandwidth,
        auto_bandwidth: p.auto_bandwidth,
        censored_fraction: p.censored_fraction,
        n: params.n,
    })
}

#[derive(Serialize)]
struct EcfOut {
    t: Vec<f64>,
    magnitude: Vec<f64>,
    threshold: f64,
    t_star: f64,
    bandwidth: f64,
    ceiling_hit: bool,
    censored_fraction: f64,
    n: usize,
}

fn ecf_curve_impl(params_json: &str) -> Result<String, String> {
    let params = parse_params(params_json)?;
    let p = prepare(&params)?;
    let config = BandwidthConfig::with_threshold_constant(params.threshold_c);
    let curve = select_bandwidth(&p.sample, &config).map_err(|e| e.to_string())?;
    // the page only plots a little past the crossing
    let keep = curve
        .t_grid
        .iter()
        .position(|&t| t > 3.0 * curve.t_star.max(1.0))
        .unwrap_or(curve.t_grid.len());
    to_json(&EcfOut {
        t: curve.t_grid[..keep].to_vec(),
        magnitude: curve.magnitude[..keep].to_vec(),
        threshold: curve.threshold,
        t_star: curve.t_star,
        bandwidth: curve.bandwidth,
        ceiling_hit: curve.ceiling_hit,
        censored_fraction: p.censored_fraction,
        n: params.n,
    })
}

fn hazard_curve_impl(params_json: &str) -> Result<String, String> {
    let params = parse_params(params_json)?;
    let p = prepare(&params)?;
    let lo = if p.scenario.x_lo < 0.0 && params.reflect {
        0.0
    } else {
        p.scenario.x_lo
    };
    let xs = censored_density::quad::linspace(lo, p.scenario.x_hi, params.points.clamp(11, 2001));
    let config = HazardConfig {
        survival_bandwidth: None,
        survival_floor: 0.05,
        reflect_density: params.reflect && lo >= 0.0,
    };
    let grid =
        hazard(&p.sample, &p.kernel, p.bandwidth, &config, &xs).map_err(|e| e.to_string())?;
    let truth = grid
        .x
        .iter()
        .map(|&x| p.scenario.lifetime.hazard(x))
        .collect();
    to_json(&CurveOut {
        x: grid.x,
        estimate: grid.value,
        truth,
        bandwidth: p.bandwidth,
        auto_bandwidth: p.auto_bandwidth,
        censored_fraction: p.censored_fraction,
        n: params.n,
    })
}

/// Density estimate plus the true lifetime density on a shared grid.
#[wasm_bindgen]
pub fn density_curve(params_json: &str) -> Result<String, JsValue> {
    density_curve_impl(params_json).map_err(|e| JsValue::from_str(&e))
}

/// ECF magnitude curve with the threshold line and selected crossing.
#[wasm_bindgen]
pub fn ecf_curve(params_json: &str) -> Result<String, JsValue> {
    ecf_curve_impl(params_json).map_err(|e| JsValue::from_str(&e))
}

/// Hazard estimate plus the true hazard on a shared grid.
#[wasm_bindgen]
pub fn hazard_curve(params_json: &str) -> Result<String, JsValue> {
    hazard_curve_impl(params_json).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_curve_returns_plot_ready_json() {
        let out = density_curve_impl(r#"{"design":"normal","n":100,"seed":3}"#).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(parsed["n"], 100);
        assert!(parsed["bandwidth"].as_f64().unwrap() > 0.0);
        assert_eq!(
            parsed["x"].as_array().unwrap().len(),
            parsed["estimate"].as_array().unwrap().len()
        );
    }

    #[test]
    fn hazard_curve_supports_reflection() {
        let out = hazard_curve_impl(r#"{"design":"exponential","n":200,"seed":5,"reflect":true}"#)
            .unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        let truth = parsed["truth"].as_array().unwrap();
        assert!(truth
            .iter()
            .all(|v| (v.as_f64().unwrap() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ecf_curve_reports_the_crossing() {
        let out = ecf_curve_impl(r#"{"design":"normal","n":500,"seed":11}"#).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(parsed["t_star"].as_f64().unwrap() > 0.0);
        assert_eq!(parsed["ceiling_hit"], false);
    }

    #[test]
    fn unknown_design_is_rejected() {
        assert!(density_curve_impl(r#"{"design":"cauchy"}"#).is_err());
    }

    #[test]
    fn truncation_makes_the_curve_nonnegative() {
        let out = density_curve_impl(
            r#"{"design":"normal","n":60,"seed":9,"truncate":true,"bandwidth":0.4}"#,
        )
        .unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(parsed["estimate"]
            .as_array()
            .unwrap()
            .iter()
            .all(|v| v.as_f64().unwrap() >= 0.0));
        assert_eq!(parsed["auto_bandwidth"], false);
    }
}
