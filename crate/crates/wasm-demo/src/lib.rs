//! wasm-bindgen surface for the static demo page in `www/`.
//!
//! Every function returns RGBA bytes ready for `ImageData`, row-major,
//! `resolution × resolution`.

use primgen::analysis::{fit_power_slope, spectrum_of_images, MagnitudeScale};
use primgen::generator::{render_image, GeneratorConfig};
use primgen::spectrum::{ExponentRange, RealField};
use primgen::{ImageBuffer, Variant};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn config(variant: &str, resolution: usize, seed: u64, shapes: usize) -> Result<GeneratorConfig, JsError> {
    let config = GeneratorConfig {
        variant: variant.parse::<Variant>().map_err(js_err)?,
        resolution,
        seed,
        shapes,
        ..Default::default()
    };
    config.validate().map_err(js_err)?;
    Ok(config)
}

fn rgba(image: &ImageBuffer) -> Vec<u8> {
    image.to_rgb8().chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
}

fn gray_rgba(field: &RealField) -> Vec<u8> {
    let (lo, hi) = field.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    field
        .data()
        .iter()
        .flat_map(|v| {
            let g = ((v - lo) / span * 255.0).round() as u8;
            [g, g, g, 255]
        })
        .collect()
}

/// Image `index` of the dataset described by `(variant, resolution, seed, shapes)`.
#[wasm_bindgen]
pub fn render_variant(variant: &str, resolution: usize, seed: u64, index: usize, shapes: usize) -> Result<Vec<u8>, JsError> {
    let config = config(variant, resolution, seed, shapes)?;
    let rendered = render_image(&config, index).map_err(js_err)?;
    Ok(rgba(&rendered.synthesis.image))
}

/// Pink noise with a fixed exponent `a`.
#[wasm_bindgen]
pub fn render_pink_noise(resolution: usize, a: f64, seed: u64) -> Result<Vec<u8>, JsError> {
    let mut config = config("pink-noise", resolution, seed, 0)?;
    config.a_range = ExponentRange::new(a, a).map_err(js_err)?;
    let rendered = render_image(&config, 0).map_err(js_err)?;
    Ok(rgba(&rendered.synthesis.image))
}

/// Mean log-magnitude spectrum of the first `count` images, plus the
/// exponent fitted to their power spectrum.
#[wasm_bindgen]
pub struct SpectrumView {
    pixels: Vec<u8>,
    exponent: f64,
}

#[wasm_bindgen]
impl SpectrumView {
    #[wasm_bindgen(getter)]
    pub fn pixels(&self) -> Vec<u8> {
        self.pixels.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn exponent(&self) -> f64 {
        self.exponent
    }
}

#[wasm_bindgen]
pub fn mean_spectrum(variant: &str, resolution: usize, seed: u64, shapes: usize, count: usize) -> Result<SpectrumView, JsError> {
    let config = config(variant, resolution, seed, shapes)?;
    let images = (0..count.max(1))
        .map(|i| render_image(&config, i).map(|r| r.synthesis.image))
        .collect::<Result<Vec<_>, _>>()
        .map_err(js_err)?;
    let shown = spectrum_of_images(&images, MagnitudeScale::Log1p).map_err(js_err)?;
    // In-memory images are unquantized, so there is no rounding floor.
    let power = spectrum_of_images(&images, MagnitudeScale::Power).map_err(js_err)?;
    let exponent = fit_power_slope(&power, 0.0).map_or(f64::NAN, |f| f.exponent);
    Ok(SpectrumView {
        pixels: gray_rgba(&shown.mean_field),
        exponent,
    })
}
