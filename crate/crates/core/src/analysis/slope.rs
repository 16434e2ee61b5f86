use serde::{Deserialize, Serialize};

use super::stats::{MagnitudeScale, RingMean, SpectrumStats};
use crate::{Error, Result};

/// Least-squares line through `(ln f, profile(f))` over the mid band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Estimated falloff exponent, the negated regression slope.
    pub exponent: f64,
    pub intercept: f64,
    pub rings_used: usize,
    pub min_frequency: f64,
    pub max_frequency: f64,
}

/// Fits rings with frequency in `[2, H/4]`. The profile should hold mean
/// `ln |F|` values ([`MagnitudeScale::Log`]); `ln(1 + |F|)` flattens the
/// tail wherever `|F|` drops below one.
pub fn fit_slope(stats: &SpectrumStats) -> Result<SlopeFit> {
    fit_slope_profile(&stats.radial_profile, stats.resolution)
}

pub fn fit_slope_profile(profile: &[RingMean], resolution: usize) -> Result<SlopeFit> {
    let (lo, hi) = band(resolution);
    let points: Vec<(f64, f64)> = profile
        .iter()
        .filter(|r| (lo..=hi).contains(&r.frequency))
        .map(|r| (r.frequency.ln(), r.mean))
        .collect();
    regress(&points, lo, hi)
}

/// Expected `|F|²` per bin of white rounding noise from storing an `H×H`
/// channel with `levels` evenly spaced values over `[0, 1]`.
pub fn quantization_floor(resolution: usize, levels: u32) -> f64 {
    let step = 1.0 / f64::from(levels - 1);
    (resolution * resolution) as f64 * step * step / 12.0
}

/// Slope of a mean power spectrum ([`MagnitudeScale::Power`]) after
/// removing an additive white floor. Fits `½ ln(P − floor)` against `ln f`
/// over `[2, H/4]`; rings at or below the floor carry no signal and are
/// skipped.
pub fn fit_power_slope(stats: &SpectrumStats, floor: f64) -> Result<SlopeFit> {
    if stats.scale != MagnitudeScale::Power {
        return Err(Error::Analysis(format!(
            "power slope needs a power spectrum, got {:?}",
            stats.scale
        )));
    }
    let (lo, hi) = band(stats.resolution);
    let points: Vec<(f64, f64)> = stats
        .radial_profile
        .iter()
        .filter(|r| (lo..=hi).contains(&r.frequency) && r.mean > floor)
        .map(|r| (r.frequency.ln(), 0.5 * (r.mean - floor).ln()))
        .collect();
    regress(&points, lo, hi)
}

fn band(resolution: usize) -> (f64, f64) {
    (2.0, resolution as f64 / 4.0)
}

fn regress(points: &[(f64, f64)], lo: f64, hi: f64) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(Error::Analysis(format!(
            "slope fit needs at least 4 rings in [{lo}, {hi}], found {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit {
        exponent: -slope,
        intercept: my - slope * mx,
        rings_used: points.len(),
        min_frequency: lo,
        max_frequency: hi,
    })
}
