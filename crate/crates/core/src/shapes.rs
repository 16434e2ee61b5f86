//! Elementary shapes and the Primitives family of compositions.
//!
//! A pixel belongs to a shape iff its center `(x + 0.5, y + 0.5)` satisfies
//! the shape's analytic inequality. No anti-aliasing: later shapes overwrite
//! earlier ones outright.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::generator::{real17, GeneratorConfig};
use crate::image::{ImageBuffer, Rgb};
use crate::rng::Stream;
use crate::spectrum::{pink_noise_image, pink_noise_planes, RealField, SpectralExponent};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Ellipse,
    Rectangle,
    /// A rotated thin rectangle: `size.0` is the length, `size.1` the thickness.
    Line,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Ellipse, ShapeKind::Rectangle, ShapeKind::Line];
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ellipse" => Ok(ShapeKind::Ellipse),
            "rectangle" => Ok(ShapeKind::Rectangle),
            "line" => Ok(ShapeKind::Line),
            other => Err(Error::Config(format!("unknown shape kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum FillMode {
    Monotone {
        #[serde(with = "real17::array")]
        color: Rgb,
    },
    /// Screen-space pink-noise texture with exponent `a`.
    PinkTexture { a: SpectralExponent },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    /// Pixel coordinates; `(0, 0)` is the top-left corner of the canvas.
    #[serde(with = "real17::array")]
    pub center: [f64; 2],
    /// Full extents in pixels (diameters for ellipses).
    #[serde(with = "real17::array")]
    pub size: [f64; 2],
    /// Radians in `[0, π)`.
    #[serde(with = "real17")]
    pub orientation: f64,
    pub fill: FillMode,
}

/// Half-open pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PixelRect {
    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn intersects(&self, other: &PixelRect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    /// The middle cell of a 3×3 grid over a `resolution`-sized canvas.
    pub fn central_cell(resolution: usize) -> PixelRect {
        let lo = resolution / 3;
        let hi = (2 * resolution).div_ceil(3);
        PixelRect {
            x0: lo,
            y0: lo,
            x1: hi,
            y1: hi,
        }
    }
}

impl ShapeSpec {
    fn half_extents(&self) -> (f64, f64) {
        let (c, s) = (self.orientation.cos().abs(), self.orientation.sin().abs());
        let (hw, hh) = (self.size[0] / 2.0, self.size[1] / 2.0);
        match self.kind {
            ShapeKind::Ellipse => (
                ((hw * c).powi(2) + (hh * s).powi(2)).sqrt(),
                ((hw * s).powi(2) + (hh * c).powi(2)).sqrt(),
            ),
            ShapeKind::Rectangle | ShapeKind::Line => (hw * c + hh * s, hw * s + hh * c),
        }
    }

    /// Pixel range that can contain covered pixels, clipped to the canvas.
    pub fn bounding_box(&self, width: usize, height: usize) -> PixelRect {
        let (ex, ey) = self.half_extents();
        let clip = |lo: f64, hi: f64, limit: usize| {
            // pixel p is a candidate iff its center p + 0.5 lies in [lo, hi]
            let a = (lo - 0.5).ceil().max(0.0);
            let b = ((hi - 0.5).floor() + 1.0).min(limit as f64);
            if b <= a {
                (0, 0)
            } else {
                (a as usize, b as usize)
            }
        };
        let (x0, x1) = clip(self.center[0] - ex, self.center[0] + ex, width);
        let (y0, y1) = clip(self.center[1] - ey, self.center[1] + ey, height);
        PixelRect { x0, y0, x1, y1 }
    }

    /// Calls `f(x, y)` for every canvas pixel whose center lies inside the shape.
    pub fn for_each_pixel(&self, width: usize, height: usize, mut f: impl FnMut(usize, usize)) {
        let bb = self.bounding_box(width, height);
        let (sin, cos) = self.orientation.sin_cos();
        let (hw, hh) = (self.size[0] / 2.0, self.size[1] / 2.0);
        for y in bb.y0..bb.y1 {
            let dy = y as f64 + 0.5 - self.center[1];
            for x in bb.x0..bb.x1 {
                let dx = x as f64 + 0.5 - self.center[0];
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                let inside = match self.kind {
                    ShapeKind::Ellipse => (u / hw).powi(2) + (v / hh).powi(2) <= 1.0,
                    ShapeKind::Rectangle | ShapeKind::Line => u.abs() <= hw && v.abs() <= hh,
                };
                if inside {
                    f(x, y);
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            ShapeKind::Ellipse => PI * self.size[0] * self.size[1] / 4.0,
            ShapeKind::Rectangle | ShapeKind::Line => self.size[0] * self.size[1],
        }
    }
}

/// Paints `shape` onto `image` and returns the number of pixels written.
/// `texture` must be given exactly when the fill is [`FillMode::PinkTexture`].
pub fn rasterize(
    shape: &ShapeSpec,
    image: &mut ImageBuffer,
    texture: Option<&[RealField; 3]>,
) -> Result<usize> {
    let (w, h) = (image.width(), image.height());
    let mut painted = 0;
    match (shape.fill, texture) {
        (FillMode::Monotone { color }, None) => shape.for_each_pixel(w, h, |x, y| {
            image.set_pixel(x, y, color);
            painted += 1;
        }),
        (FillMode::PinkTexture { .. }, Some(tex)) => {
            if tex.iter().any(|t| t.size() != w || t.size() != h) {
                return Err(Error::Dimension(format!(
                    "texture of size {} does not cover a {w}x{h} canvas",
                    tex[0].size()
                )));
            }
            shape.for_each_pixel(w, h, |x, y| {
                image.set_pixel(x, y, [tex[0].get(x, y), tex[1].get(x, y), tex[2].get(x, y)]);
                painted += 1;
            })
        }
        (FillMode::Monotone { .. }, Some(_)) => {
            return Err(Error::Config("monotone fill takes no texture".into()))
        }
        (FillMode::PinkTexture { .. }, None) => {
            return Err(Error::Config("pink texture fill requires a texture".into()))
        }
    }
    Ok(painted)
}

// ---------------------------------------------------------------------------
// Sampling

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum SizePolicy {
    /// Every shape has extent `ratio · H`.
    Fix {
        #[serde(with = "real17")]
        ratio: f64,
    },
    /// Extents uniform in `[1, H/5]`.
    Rand,
    /// Extents uniform in `[1, max(1, cap(n))]` with `cap(n) = H/5 · (N − n)/N`.
    #[default]
    Decay,
}

impl SizePolicy {
    pub fn validate(&self) -> Result<()> {
        if let SizePolicy::Fix { ratio } = *self {
            if !(ratio > 0.0 && ratio <= 1.0) {
                return Err(Error::Config(format!(
                    "fix ratio must lie in (0, 1], got {ratio}"
                )));
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for SizePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let policy = match s {
            "rand" => SizePolicy::Rand,
            "decay" => SizePolicy::Decay,
            _ => match s.strip_prefix("fix:") {
                Some(r) => {
                    let ratio = parse_ratio(r).ok_or_else(|| {
                        Error::Config(format!("invalid fix ratio '{r}'"))
                    })?;
                    SizePolicy::Fix { ratio }
                }
                None => {
                    return Err(Error::Config(format!(
                        "unknown size policy '{s}' (expected fix:<r>, rand or decay)"
                    )))
                }
            },
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Accepts decimals (`0.2`) and simple fractions (`1/5`).
fn parse_ratio(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((n, d)) => Some(n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

/// Upper size bound for the `n`-th of `total` shapes under the decay schedule.
pub fn decay_cap(n: usize, total: usize, resolution: usize) -> f64 {
    resolution as f64 / 5.0 * ((total - n) as f64 / total as f64)
}

/// Smallest extent any sampled shape may have.
pub const MIN_EXTENT: f64 = 1.0;

fn sample_extent(n: usize, total: usize, policy: SizePolicy, resolution: usize, rng: &mut Stream) -> f64 {
    let h = resolution as f64;
    let raw = match policy {
        SizePolicy::Fix { ratio } => ratio * h,
        SizePolicy::Rand => rng.uniform(MIN_EXTENT, h / 5.0),
        SizePolicy::Decay => {
            let cap = decay_cap(n, total, resolution).max(MIN_EXTENT);
            rng.uniform(MIN_EXTENT, cap)
        }
    };
    raw.clamp(MIN_EXTENT, h)
}

pub fn random_color(rng: &mut Stream) -> Rgb {
    [rng.unit(), rng.unit(), rng.unit()]
}

/// Draws the `n`-th of `total` primitives: kind uniform over `kinds`, center
/// uniform over the canvas, orientation uniform in `[0, π)`, monotone fill
/// with a uniform RGB color, and extents per `policy`.
pub fn sample_shape(
    n: usize,
    total: usize,
    policy: SizePolicy,
    resolution: usize,
    kinds: &[ShapeKind],
    rng: &mut Stream,
) -> ShapeSpec {
    debug_assert!(n < total);
    let kind = kinds[rng.below(kinds.len())];
    let h = resolution as f64;
    let center = [rng.uniform(0.0, h), rng.uniform(0.0, h)];
    let mut size = [
        sample_extent(n, total, policy, resolution, rng),
        sample_extent(n, total, policy, resolution, rng),
    ];
    if kind == ShapeKind::Line && size[0] < size[1] {
        size.swap(0, 1);
    }
    let orientation = rng.uniform(0.0, PI);
    let color = random_color(rng);
    ShapeSpec {
        kind,
        center,
        size,
        orientation,
        fill: FillMode::Monotone { color },
    }
}

/// Paints `total` primitives onto `image` in order `n = 0..total`.
pub fn inject_primitives(
    image: &mut ImageBuffer,
    total: usize,
    policy: SizePolicy,
    kinds: &[ShapeKind],
    rng: &mut Stream,
) {
    let res = image.width();
    for n in 0..total {
        let shape = sample_shape(n, total, policy, res, kinds, rng);
        rasterize(&shape, image, None).expect("monotone fill needs no texture");
    }
}

/// The Primitives image: a random flat background with `total` shapes on top.
pub fn compose_primitives(
    resolution: usize,
    total: usize,
    policy: SizePolicy,
    kinds: &[ShapeKind],
    rng: &mut Stream,
) -> ImageBuffer {
    let background = random_color(rng);
    let mut image = ImageBuffer::filled(resolution, resolution, background);
    inject_primitives(&mut image, total, policy, kinds, rng);
    image
}

// ---------------------------------------------------------------------------
// Saliency

/// Where and how large the salient shape may be, as fractions of `H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaliencyConfig {
    #[serde(with = "real17::array")]
    pub size: [f64; 2],
    #[serde(with = "real17::array")]
    pub center: [f64; 2],
}

impl Default for SaliencyConfig {
    fn default() -> Self {
        SaliencyConfig {
            size: [1.0 / 3.0, 2.0 / 3.0],
            center: [1.0 / 3.0, 2.0 / 3.0],
        }
    }
}

impl SaliencyConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |[lo, hi]: [f64; 2], max: f64| lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= max;
        if !ok(self.size, 1.0) || self.size[0] <= 0.0 {
            return Err(Error::Config(format!(
                "saliency size range {:?} must satisfy 0 < lo <= hi <= 1",
                self.size
            )));
        }
        if !ok(self.center, 1.0) {
            return Err(Error::Config(format!(
                "saliency center range {:?} must satisfy 0 <= lo <= hi <= 1",
                self.center
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaliencyRecord {
    pub shape: ShapeSpec,
    pub bounding_box: PixelRect,
}

/// How the salient shape is filled.
#[derive(Clone, Copy, Debug)]
pub enum SalientFill {
    Monotone,
    Textured {
        range: crate::spectrum::ExponentRange,
        normalize: crate::spectrum::Normalize,
    },
}

/// Inserts one large ellipse or rectangle near the middle of `image`.
pub fn add_saliency(
    image: &mut ImageBuffer,
    fill: SalientFill,
    config: &SaliencyConfig,
    rng: &mut Stream,
) -> Result<SaliencyRecord> {
    let res = image.width();
    let h = res as f64;
    let kind = [ShapeKind::Ellipse, ShapeKind::Rectangle][rng.below(2)];
    let size = [
        rng.uniform(config.size[0] * h, config.size[1] * h),
        rng.uniform(config.size[0] * h, config.size[1] * h),
    ];
    let center = [
        rng.uniform(config.center[0] * h, config.center[1] * h),
        rng.uniform(config.center[0] * h, config.center[1] * h),
    ];
    let orientation = rng.uniform(0.0, PI);
    let (fill, texture) = match fill {
        SalientFill::Monotone => (FillMode::Monotone { color: random_color(rng) }, None),
        SalientFill::Textured { range, normalize } => {
            let a = range.sample(rng);
            let tex = pink_noise_planes(res, a, normalize, rng)?;
            (FillMode::PinkTexture { a }, Some(tex))
        }
    };
    let shape = ShapeSpec {
        kind,
        center,
        size,
        orientation,
        fill,
    };
    rasterize(&shape, image, texture.as_ref())?;
    Ok(SaliencyRecord {
        shape,
        bounding_box: shape.bounding_box(res, res),
    })
}

// ---------------------------------------------------------------------------
// Variants

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "pink-noise")]
    PinkNoise,
    #[serde(rename = "primitives")]
    Primitives,
    #[serde(rename = "primitives-s")]
    PrimitivesS,
    #[default]
    #[serde(rename = "primitives-ps")]
    PrimitivesPS,
    #[serde(rename = "pinknoise-ps")]
    PinkNoisePS,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::PinkNoise,
        Variant::Primitives,
        Variant::PrimitivesS,
        Variant::PrimitivesPS,
        Variant::PinkNoisePS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::PinkNoise => "pink-noise",
            Variant::Primitives => "primitives",
            Variant::PrimitivesS => "primitives-s",
            Variant::PrimitivesPS => "primitives-ps",
            Variant::PinkNoisePS => "pinknoise-ps",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}'")))
    }
}

/// One synthesized image plus what was drawn to make it.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub image: ImageBuffer,
    /// Exponents in draw order: background/image first, salient texture last.
    pub exponents: Vec<f64>,
    pub shape_count: usize,
    pub saliency: Option<SaliencyRecord>,
    /// Flat canvas color, for the variants that start from one.
    pub background: Option<Rgb>,
}

pub fn generate_variant(variant: Variant, config: &GeneratorConfig, rng: &mut Stream) -> Result<Synthesis> {
    let res = config.resolution;
    let kinds = &config.shape_kinds;
    let textured = SalientFill::Textured {
        range: config.a_range,
        normalize: config.normalize,
    };
    match variant {
        Variant::PinkNoise => {
            let (image, a) = pink_noise_image(res, config.a_range, config.normalize, rng)?;
            Ok(Synthesis {
                image,
                exponents: vec![a.value()],
                shape_count: 0,
                saliency: None,
                background: None,
            })
        }
        Variant::Primitives | Variant::PrimitivesS => {
            let background = random_color(rng);
            let mut image = ImageBuffer::filled(res, res, background);
            inject_primitives(&mut image, config.shapes, config.size_policy, kinds, rng);
            let saliency = if variant == Variant::PrimitivesS {
                Some(add_saliency(&mut image, SalientFill::Monotone, &config.saliency, rng)?)
            } else {
                None
            };
            Ok(Synthesis {
                image,
                exponents: vec![],
                shape_count: config.shapes,
                saliency,
                background: Some(background),
            })
        }
        Variant::PrimitivesPS | Variant::PinkNoisePS => {
            let shapes = if variant == Variant::PinkNoisePS { 0 } else { config.shapes };
            let (mut image, a_bg) = pink_noise_image(res, config.a_range, config.normalize, rng)?;
            inject_primitives(&mut image, shapes, config.size_policy, kinds, rng);
            let record = add_saliency(&mut image, textured, &config.saliency, rng)?;
            let mut exponents = vec![a_bg.value()];
            if let FillMode::PinkTexture { a } = record.shape.fill {
                exponents.push(a.value());
            }
            Ok(Synthesis {
                image,
                exponents,
                shape_count: shapes,
                saliency: Some(record),
                background: None,
            })
        }
    }
}
