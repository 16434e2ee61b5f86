//! Square power-of-two 2D FFT and pink-noise synthesis.
//!
//! Pink noise is white Gaussian noise whose spectrum is reweighted by
//! `1 / (|fx|^a + |fy|^a)` (signed, centered frequency indices) and brought
//! back to the pixel domain. The DC bin is zeroed because the weight is
//! singular there; the per-channel rescale afterwards restores a usable
//! brightness range.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::image::ImageBuffer;
use crate::rng::Stream;
use crate::{Error, Result};

/// Smallest field edge accepted.
pub const MIN_SIZE: usize = 8;

/// Attempts at drawing a non-degenerate noise channel before giving up.
const MAX_RESAMPLES: usize = 8;

fn check_size(size: usize) -> Result<()> {
    if size < MIN_SIZE || !size.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "field size {size} must be a power of two >= {MIN_SIZE}"
        )));
    }
    Ok(())
}

/// One real-valued channel, `size × size`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    size: usize,
    data: Vec<f64>,
}

impl RealField {
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self> {
        check_size(size)?;
        if data.len() != size * size {
            return Err(Error::Dimension(format!(
                "expected {} samples for a {size}x{size} field, got {}",
                size * size,
                data.len()
            )));
        }
        Ok(RealField { size, data })
    }

    pub fn zeros(size: usize) -> Result<Self> {
        Self::new(size, vec![0.0; size * size])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.size + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Complex spectrum in unshifted FFT layout: bin `(ky, kx)` holds signed
/// frequency `(signed_frequency(ky), signed_frequency(kx))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    size: usize,
    data: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(size: usize, data: Vec<Complex64>) -> Result<Self> {
        check_size(size)?;
        if data.len() != size * size {
            return Err(Error::Dimension(format!(
                "expected {} bins for a {size}x{size} spectrum, got {}",
                size * size,
                data.len()
            )));
        }
        Ok(ComplexField { size, data })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, kx: usize, ky: usize) -> Complex64 {
        self.data[ky * self.size + kx]
    }
}

/// Maps an unsigned FFT bin index to its signed frequency in `[-n/2, n/2)`.
#[inline]
pub fn signed_frequency(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Spectral falloff exponent `a` of the `1/(|fx|^a + |fy|^a)` law.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralExponent(f64);

impl SpectralExponent {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Config(format!(
                "spectral exponent must be positive and finite, got {a}"
            )));
        }
        Ok(SpectralExponent(a))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `1 / (|fx|^a + |fy|^a)`; undefined at DC.
pub fn magnitude_weight(fx: i64, fy: i64, a: SpectralExponent) -> Result<f64> {
    if fx == 0 && fy == 0 {
        return Err(Error::Singularity);
    }
    Ok(weight_unchecked(fx, fy, a.0))
}

#[inline]
fn weight_unchecked(fx: i64, fy: i64, a: f64) -> f64 {
    1.0 / ((fx.unsigned_abs() as f64).powf(a) + (fy.unsigned_abs() as f64).powf(a))
}

// ---------------------------------------------------------------------------
// FFT

struct Plan {
    n: usize,
    bitrev: Vec<usize>,
    // twiddles[k] = exp(-2πik/n), k < n/2
    twiddles: Vec<Complex64>,
}

impl Plan {
    fn new(n: usize) -> Plan {
        debug_assert!(n.is_power_of_two());
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| {
                let theta = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Plan {
            n,
            bitrev,
            twiddles,
        }
    }

    /// In-place unnormalized transform; `inverse` conjugates the twiddles.
    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for y in 0..n {
        for x in y + 1..n {
            data.swap(y * n + x, x * n + y);
        }
    }
}

fn fft2_in_place(data: &mut [Complex64], n: usize, inverse: bool) {
    let plan = Plan::new(n);
    for _ in 0..2 {
        for row in data.chunks_exact_mut(n) {
            plan.run(row, inverse);
        }
        transpose(data, n);
    }
}

/// Unnormalized forward 2D DFT.
pub fn forward_fft2(field: &RealField) -> ComplexField {
    let n = field.size;
    let mut data: Vec<Complex64> = field.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(&mut data, n, false);
    ComplexField { size: n, data }
}

/// Unnormalized forward 2D DFT of a complex field.
pub fn forward_fft2_complex(field: &ComplexField) -> ComplexField {
    let mut out = field.clone();
    fft2_in_place(&mut out.data, out.size, false);
    out
}

/// Real part of an inverse transform together with the discarded imaginary part.
#[derive(Clone, Debug)]
pub struct InverseOutput {
    pub field: RealField,
    /// Largest `|Im|` over all pixels; tiny for conjugate-symmetric input.
    pub max_imag: f64,
}

/// Normalized (`1/(H·W)`) inverse 2D DFT, keeping the real part.
pub fn inverse_fft2(field: &ComplexField) -> InverseOutput {
    let n = field.size;
    let mut data = field.data.clone();
    fft2_in_place(&mut data, n, true);
    let scale = 1.0 / (n * n) as f64;
    let mut max_imag = 0.0f64;
    let real = data
        .iter()
        .map(|c| {
            max_imag = max_imag.max((c.im * scale).abs());
            c.re * scale
        })
        .collect();
    InverseOutput {
        field: RealField {
            size: n,
            data: real,
        },
        max_imag,
    }
}

// ---------------------------------------------------------------------------
// Pink noise

/// How an inverse-transformed channel is mapped onto `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalize {
    /// Per-channel min-max; 0 and 1 are both attained.
    #[default]
    MinMax,
    /// Clip to mean ± 3σ, then map that interval linearly onto `[0, 1]`.
    StdClip3,
}

impl Normalize {
    pub fn apply(self, field: &mut RealField) -> Result<()> {
        match self {
            Normalize::MinMax => {
                let (lo, hi) = field.min_max();
                let span = hi - lo;
                if span <= 0.0 || !span.is_finite() {
                    return Err(Error::DegenerateField(lo));
                }
                for v in &mut field.data {
                    *v = (*v - lo) / span;
                }
            }
            Normalize::StdClip3 => {
                let n = field.data.len() as f64;
                let mean = field.data.iter().sum::<f64>() / n;
                let var = field.data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                if sd <= 0.0 || !sd.is_finite() {
                    return Err(Error::DegenerateField(mean));
                }
                let lo = mean - 3.0 * sd;
                for v in &mut field.data {
                    *v = ((*v - lo) / (6.0 * sd)).clamp(0.0, 1.0);
                }
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Normalize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minmax" => Ok(Normalize::MinMax),
            "stdclip3" => Ok(Normalize::StdClip3),
            other => Err(Error::Config(format!(
                "unknown normalization '{other}' (expected minmax or stdclip3)"
            ))),
        }
    }
}

/// Weight grid in FFT layout with the DC bin set to zero.
fn weight_grid(n: usize, a: f64) -> Vec<f64> {
    let mut grid = Vec::with_capacity(n * n);
    for ky in 0..n {
        let fy = signed_frequency(ky, n);
        for kx in 0..n {
            let fx = signed_frequency(kx, n);
            grid.push(if fx == 0 && fy == 0 {
                0.0
            } else {
                weight_unchecked(fx, fy, a)
            });
        }
    }
    grid
}

fn shaped_noise(n: usize, weights: &[f64], rng: &mut Stream) -> RealField {
    let mut data: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(rng.standard_normal(), 0.0))
        .collect();
    fft2_in_place(&mut data, n, false);
    for (bin, &w) in data.iter_mut().zip(weights) {
        *bin *= w;
    }
    inverse_fft2(&ComplexField { size: n, data }).field
}

fn pink_channel_with_grid(
    n: usize,
    weights: &[f64],
    normalize: Normalize,
    rng: &mut Stream,
) -> Result<RealField> {
    let mut last = None;
    for _ in 0..MAX_RESAMPLES {
        let mut field = shaped_noise(n, weights, rng);
        match normalize.apply(&mut field) {
            Ok(()) => return Ok(field),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// One pink-noise channel: Gaussian white noise, spectrum weighted by
/// [`magnitude_weight`] (DC zeroed), inverse transform, then `normalize`.
pub fn pink_noise_channel(
    resolution: usize,
    a: SpectralExponent,
    normalize: Normalize,
    rng: &mut Stream,
) -> Result<RealField> {
    check_size(resolution)?;
    let weights = weight_grid(resolution, a.0);
    let mut field = shaped_noise(resolution, &weights, rng);
    normalize.apply(&mut field)?;
    Ok(field)
}

/// Three channels sharing one exponent, each from independent white noise.
pub fn pink_noise_planes(
    resolution: usize,
    a: SpectralExponent,
    normalize: Normalize,
    rng: &mut Stream,
) -> Result<[RealField; 3]> {
    check_size(resolution)?;
    let weights = weight_grid(resolution, a.0);
    Ok([
        pink_channel_with_grid(resolution, &weights, normalize, rng)?,
        pink_channel_with_grid(resolution, &weights, normalize, rng)?,
        pink_channel_with_grid(resolution, &weights, normalize, rng)?,
    ])
}

/// Closed exponent interval `[lo, hi]` with `0 < lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRange {
    #[serde(with = "crate::generator::real17")]
    pub lo: f64,
    #[serde(with = "crate::generator::real17")]
    pub hi: f64,
}

impl Default for ExponentRange {
    fn default() -> Self {
        ExponentRange { lo: 0.5, hi: 3.5 }
    }
}

impl ExponentRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let range = ExponentRange { lo, hi };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::Config(format!(
                "exponent interval [{}, {}] is empty",
                self.lo, self.hi
            )));
        }
        if self.lo <= 0.0 {
            return Err(Error::Config(format!(
                "exponent interval must lie in (0, inf), got lower bound {}",
                self.lo
            )));
        }
        Ok(())
    }

    pub fn contains(&self, a: f64) -> bool {
        (self.lo..=self.hi).contains(&a)
    }

    pub fn sample(&self, rng: &mut Stream) -> SpectralExponent {
        SpectralExponent(rng.uniform(self.lo, self.hi))
    }
}

/// The PinkNoise image: one exponent drawn from `range` for all three
/// channels. Returns the image and the drawn exponent.
pub fn pink_noise_image(
    resolution: usize,
    range: ExponentRange,
    normalize: Normalize,
    rng: &mut Stream,
) -> Result<(ImageBuffer, SpectralExponent)> {
    range.validate()?;
    let a = range.sample(rng);
    let [r, g, b] = pink_noise_planes(resolution, a, normalize, rng)?;
    let img = ImageBuffer::from_planes(resolution, resolution, [r.data(), g.data(), b.data()]);
    Ok((img, a))
}
