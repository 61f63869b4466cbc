//! CLI front door: reads `time,status` CSV files, writes plot-ready CSV
//! curves plus JSON metadata. Data goes to files, a one-line JSON summary
//! goes to standard output, errors go to standard error.

use anyhow::{bail, Context};
use censored_density::{
    density, density_derivative, hazard, mirrored_grid, plugin_bandwidth, reflect,
    select_bandwidth, simbench, truncate_renormalize, BandwidthConfig, CensoredSample,
    EstimateGrid, FlatTopKernel, HazardConfig, PluginConfig, PluginMode,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "censored-density",
    version,
    about = "Density, derivative, and hazard estimation from right-censored data with flat-top infinite-order kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// `lo,hi,count` evaluation grid.
#[derive(Clone, Copy, Debug)]
struct GridArg {
    lo: f64,
    hi: f64,
    count: usize,
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo,hi,count, got {s:?}"));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| format!("invalid lo {:?}", parts[0]))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| format!("invalid hi {:?}", parts[1]))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("invalid count {:?}", parts[2]))?;
        let shape_ok = lo < hi && count >= 2;
        if !shape_ok {
            return Err(format!("grid needs lo < hi and count >= 2, got {s:?}"));
        }
        Ok(GridArg { lo, hi, count })
    }
}

#[derive(Args, Clone)]
struct EstimateArgs {
    /// Input CSV with a `time,status` header (status 1 = event, 0 = censored)
    #[arg(long)]
    input: PathBuf,
    /// Output CSV path (`x,value`); metadata lands in `<out>.meta.json`
    #[arg(long)]
    out: PathBuf,
    /// Slope of the trapezoidal flat-top transform
    #[arg(long, default_value_t = 4.0)]
    kernel_c: f64,
    /// Threshold constant of the automatic bandwidth rule
    #[arg(long, default_value_t = 2.0)]
    threshold_c: f64,
    /// Fixed bandwidth; omitted = automatic selection
    #[arg(long)]
    h: Option<f64>,
    /// Evaluation grid `lo,hi,count`; omitted = 101 points spanning the data
    /// padded by three bandwidths
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<GridArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Kaplan-Meier survival curve and jump weights
    Km {
        #[arg(long)]
        input: PathBuf,
        /// Output CSV (`time,event,weight,survival`)
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical characteristic function magnitude with the selection threshold
    Ecf {
        #[arg(long)]
        input: PathBuf,
        /// Output CSV (`t,magnitude,threshold`)
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        threshold_c: f64,
    },
    /// Bandwidth selection by thresholding the empirical characteristic function
    Bandwidth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        threshold_c: f64,
    },
    /// Lifetime density estimate
    Density {
        #[command(flatten)]
        args: EstimateArgs,
        /// Fold the estimate about 0 (support on [0, inf))
        #[arg(long)]
        reflect: bool,
        /// Clip negative values and renormalize to unit mass
        #[arg(long)]
        truncate_renormalize: bool,
    },
    /// Density derivative estimate
    Derivative {
        #[command(flatten)]
        args: EstimateArgs,
        /// Derivative order (1 or 2)
        #[arg(long)]
        p: usize,
        /// Fold the estimate about 0
        #[arg(long)]
        reflect: bool,
    },
    /// Hazard function estimate (density over smoothed Kaplan-Meier survival)
    Hazard {
        #[command(flatten)]
        args: EstimateArgs,
        /// Fold the density numerator about 0
        #[arg(long)]
        reflect: bool,
        /// Bandwidth for smoothing the survival curve; omitted = density bandwidth
        #[arg(long)]
        survival_bandwidth: Option<f64>,
        /// Lower clip for the survival denominator
        #[arg(long, default_value_t = 0.05)]
        survival_floor: f64,
    },
    /// Plug-in bandwidth for second-order kernels from flat-top pilots
    PluginBandwidth {
        #[arg(long)]
        input: PathBuf,
        /// `mse` (pointwise, needs --x) or `mise` (global, needs --lo/--hi or defaults
        /// to the 5th-95th weighted percentile window)
        #[arg(long)]
        mode: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        kernel_c: f64,
        #[arg(long, default_value_t = 2.0)]
        threshold_c: f64,
    },
    /// Seeded Monte Carlo benchmark from a JSON design file
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Report JSON path; omitted = stdout only
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the design file's seed
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

/// 17 significant digits, enough to round-trip an f64.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn load_sample(path: &Path) -> anyhow::Result<CensoredSample> {
    let records = censored_density::io::read_censored_csv_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(CensoredSample::ingest(records)?)
}

fn write_curve_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> anyhow::Result<()> {
    let mut text = String::with_capacity(rows.len() * 48 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                text.push(',');
            }
            first = false;
            let _ = write!(text, "{}", fmt_float(*v));
        }
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn meta_sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn emit_estimate(out: &Path, grid: &EstimateGrid, kernel_c: f64) -> anyhow::Result<()> {
    let rows: Vec<Vec<f64>> = grid
        .x
        .iter()
        .zip(&grid.value)
        .map(|(x, v)| vec![*x, *v])
        .collect();
    write_curve_csv(out, "x,value", &rows)?;
    let meta = json!({
        "kind": grid.kind.label(),
        "bandwidth": grid.bandwidth,
        "kernel_c": kernel_c,
        "corrections": grid.corrections,
        "points": grid.x.len(),
        "out": out.display().to_string(),
    });
    std::fs::write(meta_sidecar_path(out), serde_json::to_string_pretty(&meta)?)?;
    println!("{}", serde_json::to_string(&meta)?);
    Ok(())
}

struct Resolved {
    sample: CensoredSample,
    kernel: FlatTopKernel,
    bandwidth: f64,
    grid: Vec<f64>,
}

fn resolve_estimate(args: &EstimateArgs) -> anyhow::Result<Resolved> {
    let sample = load_sample(&args.input)?;
    let kernel = FlatTopKernel::new(args.kernel_c)?;
    let bandwidth = match args.h {
        Some(h) => h,
        None => censored_density::pilot_bandwidth(
            &sample,
            &BandwidthConfig::with_threshold_constant(args.threshold_c),
        )?,
    };
    let grid = match args.grid {
        Some(g) => censored_density::quad::linspace(g.lo, g.hi, g.count),
        None => censored_density::default_grid(&sample, bandwidth),
    };
    Ok(Resolved {
        sample,
        kernel,
        bandwidth,
        grid,
    })
}

fn warn_if_reflecting_negative_times(sample: &CensoredSample) {
    if sample.times()[0] < 0.0 {
        eprintln!(
            "warning: --reflect folds the estimate about 0 but the data contain negative times"
        );
    }
}

fn nonnegative_grid(grid: &[f64]) -> anyhow::Result<Vec<f64>> {
    let g: Vec<f64> = grid.iter().copied().filter(|x| *x >= 0.0).collect();
    if g.is_empty() {
        bail!("reflection leaves no nonnegative evaluation points; pass --grid with lo >= 0");
    }
    Ok(g)
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Km { input, out } => {
            let sample = load_sample(&input)?;
            let survival = sample.survival();
            let rows: Vec<Vec<f64>> = sample
                .times()
                .iter()
                .zip(sample.events())
                .zip(sample.weights().iter().zip(survival.values()))
                .map(|((t, e), (w, s))| vec![*t, f64::from(u8::from(*e)), *w, *s])
                .collect();
            write_curve_csv(&out, "time,event,weight,survival", &rows)?;
            let events = sample.events().iter().filter(|e| **e).count();
            println!(
                "{}",
                serde_json::to_string(&json!({
                    "n": sample.n(),
                    "events": events,
                    "censored": sample.n() - events,
                    "out": out.display().to_string(),
                }))?
            );
        }
        Command::Ecf {
            input,
            out,
            threshold_c,
        } => {
            let sample = load_sample(&input)?;
            let curve = select_bandwidth(
                &sample,
                &BandwidthConfig::with_threshold_constant(threshold_c),
            )?;
            let rows: Vec<Vec<f64>> = curve
                .t_grid
                .iter()
                .zip(&curve.magnitude)
                .map(|(t, m)| vec![*t, *m, curve.threshold])
                .collect();
            write_curve_csv(&out, "t,magnitude,threshold", &rows)?;
            println!(
                "{}",
                serde_json::to_string(&json!({
                    "t_star": curve.t_star,
                    "bandwidth": curve.bandwidth,
                    "ceiling_hit": curve.ceiling_hit,
                    "out": out.display().to_string(),
                }))?
            );
        }
        Command::Bandwidth { input, threshold_c } => {
            let sample = load_sample(&input)?;
            let curve = select_bandwidth(
                &sample,
                &BandwidthConfig::with_threshold_constant(threshold_c),
            )?;
            println!(
                "{}",
                serde_json::to_string(&json!({
                    "t_star": curve.t_star,
                    "bandwidth": curve.bandwidth,
                    "ceiling_hit": curve.ceiling_hit,
                }))?
            );
        }
        Command::Density {
            args,
            reflect: do_reflect,
            truncate_renormalize: do_truncate,
        } => {
            let r = resolve_estimate(&args)?;
            let mut grid = if do_reflect {
                warn_if_reflecting_negative_times(&r.sample);
                let xs = nonnegative_grid(&r.grid)?;
                let full = mirrored_grid(&xs)?;
                reflect(&density(&r.sample, &r.kernel, r.bandwidth, &full)?)?
            } else {
                density(&r.sample, &r.kernel, r.bandwidth, &r.grid)?
            };
            if do_truncate {
                grid = truncate_renormalize(&grid)?;
            }
            emit_estimate(&args.out, &grid, args.kernel_c)?;
        }
        Command::Derivative {
            args,
            p,
            reflect: do_reflect,
        } => {
            let r = resolve_estimate(&args)?;
            let grid = if do_reflect {
                warn_if_reflecting_negative_times(&r.sample);
                let xs = nonnegative_grid(&r.grid)?;
                let full = mirrored_grid(&xs)?;
                reflect(&density_derivative(
                    &r.sample,
                    &r.kernel,
                    r.bandwidth,
                    p,
                    &full,
                )?)?
            } else {
                density_derivative(&r.sample, &r.kernel, r.bandwidth, p, &r.grid)?
            };
            emit_estimate(&args.out, &grid, args.kernel_c)?;
        }
        Command::Hazard {
            args,
            reflect: do_reflect,
            survival_bandwidth,
            survival_floor,
        } => {
            let r = resolve_estimate(&args)?;
            if do_reflect {
                warn_if_reflecting_negative_times(&r.sample);
            }
            let config = HazardConfig {
                survival_bandwidth,
                survival_floor,
                reflect_density: do_reflect,
            };
            let grid = if do_reflect {
                let xs = nonnegative_grid(&r.grid)?;
                hazard(&r.sample, &r.kernel, r.bandwidth, &config, &xs)?
            } else {
                hazard(&r.sample, &r.kernel, r.bandwidth, &config, &r.grid)?
            };
            emit_estimate(&args.out, &grid, args.kernel_c)?;
        }
        Command::PluginBandwidth {
            input,
            mode,
            x,
            lo,
            hi,
            kernel_c,
            threshold_c,
        } => {
            let sample = load_sample(&input)?;
            let kernel = FlatTopKernel::new(kernel_c)?;
            let plugin_mode = match mode.as_str() {
                "mse" => PluginMode::PointwiseMse {
                    x: x.context("--mode mse needs --x")?,
                },
                "mise" => match (lo, hi) {
                    (Some(lo), Some(hi)) => PluginMode::GlobalMise { lo, hi },
                    (None, None) => {
                        let (lo, hi) = censored_density::plugin::default_mise_window(&sample);
                        PluginMode::GlobalMise { lo, hi }
                    }
                    _ => bail!("--mode mise needs both --lo and --hi (or neither)"),
                },
                other => bail!("unknown mode {other:?} (expected mse or mise)"),
            };
            let config = PluginConfig {
                mode: plugin_mode,
                pilot: BandwidthConfig::with_threshold_constant(threshold_c),
                ..PluginConfig::mse_at(0.0)
            };
            let result = plugin_bandwidth(&sample, &kernel, &config)?;
            println!("{}", serde_json::to_string(&result)?);
        }
        Command::Simulate { config, out, seed } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut design: simbench::SimDesign =
                serde_json::from_str(&text).context("parsing design JSON")?;
            if let Some(seed) = seed {
                design.seed = seed;
            }
            let report = simbench::run(&design)?;
            let rendered = serde_json::to_string_pretty(&report)?;
            if let Some(out) = &out {
                std::fs::write(out, &rendered)
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            println!("{}", serde_json::to_string(&report)?);
        }
    }
    Ok(())
}
