//! `primgen` command line.
//!
//! Every subcommand prints its fully resolved settings as one JSON line
//! prefixed `CONFIG:` on stderr before doing any work. Exit status is 0 on
//! success, 1 for invalid input, 2 for I/O failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::analysis::{
    dataset_spectrum, fit_power_slope, model_report_dir, quantization_floor, spectrum_distance, MagnitudeScale, SSIM_K1, SSIM_K2, SSIM_WINDOW,
};
use crate::generator::{generate_dataset, GeneratorConfig};
use crate::image::write_gray_png;
use crate::shapes::{SaliencyConfig, ShapeKind, SizePolicy, Variant};
use crate::spectrum::{ExponentRange, Normalize};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "primgen", version, about = "Procedural pretraining images and their spectral statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a dataset of PNG images plus manifest.json
    Generate(GenerateArgs),
    /// Compare the average magnitude spectra of two datasets
    AnalyzeSpectrum(SpectrumArgs),
    /// Estimate the spectral falloff exponent of a dataset
    AnalyzeSlope(SlopeArgs),
    /// Filter-diversity report over a directory of WT01 layer files
    AnalyzeFilters(FiltersArgs),
    /// Render a dataset's average log-magnitude spectrum as grayscale PNG
    RenderSpectrum(RenderArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value = "primitives-ps")]
    variant: Variant,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of primitives per image
    #[arg(long, default_value_t = 100)]
    shapes: usize,
    /// fix:<ratio> | rand | decay
    #[arg(long, default_value = "decay")]
    size_policy: SizePolicy,
    #[arg(long, default_value_t = 0.5)]
    a_min: f64,
    #[arg(long, default_value_t = 3.5)]
    a_max: f64,
    /// Assign a uniformly random class in [0, K) to each image
    #[arg(long, value_name = "K")]
    labels: Option<u32>,
    #[arg(long, default_value = "minmax")]
    normalize: Normalize,
    /// Comma-separated subset of ellipse,rectangle,line
    #[arg(long, value_delimiter = ',', default_value = "ellipse,rectangle,line")]
    shape_kinds: Vec<ShapeKind>,
    /// Salient shape extent range, as fractions of the resolution
    #[arg(long, default_value_t = 1.0 / 3.0)]
    saliency_size_min: f64,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    saliency_size_max: f64,
    /// Salient shape center range (both axes), as fractions of the resolution
    #[arg(long, default_value_t = 1.0 / 3.0)]
    saliency_center_min: f64,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    saliency_center_max: f64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: logical core count)
    #[arg(long, env = "PRIMGEN_WORKERS")]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long = "a", value_name = "DIR")]
    dataset_a: PathBuf,
    #[arg(long = "b", value_name = "DIR")]
    dataset_b: PathBuf,
    /// Compare |F| instead of ln(1 + |F|)
    #[arg(long)]
    linear_magnitude: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SlopeArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FiltersArgs {
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    linear_magnitude: bool,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn scale(linear: bool) -> MagnitudeScale {
    if linear {
        MagnitudeScale::Linear
    } else {
        MagnitudeScale::Log1p
    }
}

fn echo_config(value: &serde_json::Value) {
    eprintln!("CONFIG: {value}");
}

fn emit(report: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

impl GenerateArgs {
    fn config(&self) -> GeneratorConfig {
        GeneratorConfig {
            variant: self.variant,
            resolution: self.resolution,
            count: self.count,
            seed: self.seed,
            shapes: self.shapes,
            size_policy: self.size_policy,
            a_range: ExponentRange {
                lo: self.a_min,
                hi: self.a_max,
            },
            labels: self.labels,
            normalize: self.normalize,
            saliency: SaliencyConfig {
                size: [self.saliency_size_min, self.saliency_size_max],
                center: [self.saliency_center_min, self.saliency_center_max],
            },
            shape_kinds: self.shape_kinds.clone(),
        }
    }
}

fn generate(args: GenerateArgs) -> Result<i32> {
    let config = args.config();
    let workers = args.workers.unwrap_or_else(default_workers);
    echo_config(&json!({
        "command": "generate",
        "config": config,
        "out": args.out,
        "workers": workers,
    }));
    config.validate()?;
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    match generate_dataset(&config, &args.out, workers) {
        Ok(manifest) => {
            eprintln!("wrote {} images to {}", manifest.images.len(), args.out.display());
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!(
                "warning: generation aborted; {} may hold partial output and has no manifest",
                args.out.display()
            );
            Err(e)
        }
    }
}

fn analyze_spectrum(args: SpectrumArgs) -> Result<i32> {
    let scale = scale(args.linear_magnitude);
    let header = json!({
        "command": "analyze-spectrum",
        "a": args.dataset_a,
        "b": args.dataset_b,
        "magnitude": scale,
        "ssim": { "k1": SSIM_K1, "k2": SSIM_K2, "window": SSIM_WINDOW },
        "out": args.out,
    });
    echo_config(&header);
    let a = dataset_spectrum(&args.dataset_a, scale)?;
    let b = dataset_spectrum(&args.dataset_b, scale)?;
    let d = spectrum_distance(&a, &b)?;
    let report = json!({
        "settings": header,
        "resolution": a.resolution,
        "images_a": a.sample_count,
        "images_b": b.sample_count,
        "ssim": d.ssim,
        "l1": d.l1,
        "l2": d.l2,
    });
    emit(&report, args.out.as_deref())?;
    Ok(EXIT_OK)
}

fn analyze_slope(args: SlopeArgs) -> Result<i32> {
    echo_config(&json!({
        "command": "analyze-slope",
        "dataset": args.dataset,
        "magnitude": MagnitudeScale::Power,
        "band": "[2, H/4]",
        "out": args.out,
    }));
    let stats = dataset_spectrum(&args.dataset, MagnitudeScale::Power)?;
    // PNG channels hold 256 levels; their rounding noise sits under the
    // high-frequency tail of steep spectra.
    let floor = quantization_floor(stats.resolution, 256);
    let fit = fit_power_slope(&stats, floor)?;
    let report = json!({
        "dataset": args.dataset,
        "images": stats.sample_count,
        "resolution": stats.resolution,
        "exponent": fit.exponent,
        "noise_floor": floor,
        "fit": fit,
        "radial_profile": stats.radial_profile,
    });
    emit(&report, args.out.as_deref())?;
    Ok(EXIT_OK)
}

fn analyze_filters(args: FiltersArgs) -> Result<i32> {
    echo_config(&json!({
        "command": "analyze-filters",
        "weights": args.weights,
        "out": args.out,
    }));
    let report = model_report_dir(&args.weights)?;
    emit(&serde_json::to_value(&report).expect("report serializes"), args.out.as_deref())?;
    if report.is_complete() {
        Ok(EXIT_OK)
    } else {
        eprintln!("{} layer(s) could not be analyzed", report.failed_layers);
        Ok(EXIT_INVALID)
    }
}

fn render_spectrum(args: RenderArgs) -> Result<i32> {
    let scale = scale(args.linear_magnitude);
    echo_config(&json!({
        "command": "render-spectrum",
        "dataset": args.dataset,
        "magnitude": scale,
        "out": args.out,
    }));
    let stats = dataset_spectrum(&args.dataset, scale)?;
    let (lo, hi) = stats.mean_field.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let plane: Vec<f64> = stats.mean_field.data().iter().map(|v| (v - lo) / span).collect();
    write_gray_png(&args.out, stats.resolution, stats.resolution, &plane)?;
    Ok(EXIT_OK)
}

/// Parses `argv` (program name first) and runs the subcommand; returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::AnalyzeSpectrum(a) => analyze_spectrum(a),
        Command::AnalyzeSlope(a) => analyze_slope(a),
        Command::AnalyzeFilters(a) => analyze_filters(a),
        Command::RenderSpectrum(a) => render_spectrum(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}
