//! Dataset orchestration: configuration, per-image streams, labels, and the
//! parallel batch writer.
//!
//! Image `i` is rendered from `derive_stream(seed, i)` alone, so the set of
//! files is identical for any worker count. `manifest.json` is written after
//! every image has been flushed and serves as the completion marker.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_stream, Stream};
use crate::shapes::{generate_variant, SaliencyConfig, SaliencyRecord, ShapeKind, SizePolicy, Synthesis};
use crate::spectrum::{ExponentRange, Normalize};
use crate::{Error, Result};

pub use crate::shapes::Variant;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MIN_RESOLUTION: usize = 8;
pub const MAX_RESOLUTION: usize = 4096;

/// Reals are written with 17 significant digits so that every `f64`
/// survives a text roundtrip bit-exactly.
pub mod real17 {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn format(v: f64) -> String {
        if v.is_finite() {
            format!("{v:.16e}")
        } else {
            "null".to_string()
        }
    }

    fn raw(v: f64) -> Box<RawValue> {
        RawValue::from_string(format(v)).expect("formatted real is valid JSON")
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        raw(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }

    pub mod array {
        use super::*;

        pub fn serialize<S: Serializer, const N: usize>(v: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|&x| raw(x)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[f64; N], D::Error> {
            let v = Vec::<f64>::deserialize(d)?;
            let len = v.len();
            v.try_into()
                .map_err(|_| D::Error::custom(format!("expected {N} reals, got {len}")))
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|&x| raw(x)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<f64>::deserialize(d)
        }
    }
}

/// Full recipe for one dataset. Defaults are the PrimitivesPS recipe:
/// 100 shapes, decay sizing, `a ∈ [0.5, 3.5]`, 256×256.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub variant: Variant,
    pub resolution: usize,
    pub count: usize,
    pub seed: u64,
    pub shapes: usize,
    pub size_policy: SizePolicy,
    pub a_range: ExponentRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<u32>,
    pub normalize: Normalize,
    pub saliency: SaliencyConfig,
    pub shape_kinds: Vec<ShapeKind>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            variant: Variant::PrimitivesPS,
            resolution: 256,
            count: 1000,
            seed: 0,
            shapes: 100,
            size_policy: SizePolicy::Decay,
            a_range: ExponentRange::default(),
            labels: None,
            normalize: Normalize::MinMax,
            saliency: SaliencyConfig::default(),
            shape_kinds: ShapeKind::ALL.to_vec(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let r = self.resolution;
        if !r.is_power_of_two() {
            return Err(Error::Config(format!("resolution must be a power of two, got {r}")));
        }
        if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&r) {
            return Err(Error::Config(format!(
                "resolution must lie in [{MIN_RESOLUTION}, {MAX_RESOLUTION}], got {r}"
            )));
        }
        if self.count == 0 {
            return Err(Error::Config("count must be at least 1".into()));
        }
        if self.labels == Some(0) {
            return Err(Error::Config("label count must be at least 1".into()));
        }
        if self.shape_kinds.is_empty() {
            return Err(Error::Config("at least one shape kind is required".into()));
        }
        self.a_range.validate()?;
        self.size_policy.validate()?;
        self.saliency.validate()
    }
}

/// Uniform class in `[0, classes)`.
pub fn assign_label(stream: &mut Stream, classes: u32) -> Result<u32> {
    if classes == 0 {
        return Err(Error::Config("label count must be at least 1".into()));
    }
    Ok(stream.below(classes as usize) as u32)
}

pub fn image_filename(index: usize) -> String {
    format!("img_{index:08}.png")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub filename: String,
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u32>,
    pub variant: Variant,
    #[serde(with = "real17::vec")]
    pub exponents: Vec<f64>,
    pub shape_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saliency: Option<SaliencyRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool: String,
    pub version: String,
    /// Distribution of the white noise fed to the spectral filter.
    pub white_noise: String,
    pub config: GeneratorConfig,
    pub images: Vec<ImageRecord>,
}

impl DatasetManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Dataset {
            path,
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// A rendered image together with its manifest record.
pub struct RenderedImage {
    pub synthesis: Synthesis,
    pub record: ImageRecord,
}

/// Renders image `index` of the dataset described by `config`.
pub fn render_image(config: &GeneratorConfig, index: usize) -> Result<RenderedImage> {
    let mut stream = derive_stream(config.seed, index as u64);
    // The label stream is forked unconditionally so image content does not
    // depend on whether labels were requested.
    let mut label_stream = stream.split();
    let label = config
        .labels
        .map(|k| assign_label(&mut label_stream, k))
        .transpose()?;
    let synthesis = generate_variant(config.variant, config, &mut stream)?;
    let record = ImageRecord {
        filename: image_filename(index),
        index,
        label,
        variant: config.variant,
        exponents: synthesis.exponents.clone(),
        shape_count: synthesis.shape_count,
        saliency: synthesis.saliency,
    };
    Ok(RenderedImage { synthesis, record })
}

/// Writes `config.count` PNGs into `out_dir` using `workers` threads, then
/// the manifest.
pub fn generate_dataset(config: &GeneratorConfig, out_dir: &Path, workers: usize) -> Result<DatasetManifest> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    match fs::remove_file(&manifest_path) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(Error::io(&manifest_path, e)),
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let images = pool.install(|| {
        (0..config.count)
            .into_par_iter()
            .map(|index| {
                let rendered = render_image(config, index)?;
                let path = out_dir.join(&rendered.record.filename);
                rendered.synthesis.image.write_png(&path)?;
                Ok(rendered.record)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let manifest = DatasetManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        white_noise: "standard-normal".to_string(),
        config: config.clone(),
        images,
    };
    let tmp = out_dir.join(format!("{MANIFEST_FILE}.tmp"));
    fs::write(&tmp, manifest.to_json()).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(variant: Variant) -> GeneratorConfig {
        GeneratorConfig {
            variant,
            resolution: 32,
            count: 3,
            seed: 9,
            shapes: 20,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_are_the_final_recipe() {
        let c = GeneratorConfig::default();
        assert_eq!(c.variant, Variant::PrimitivesPS);
        assert_eq!(c.shapes, 100);
        assert_eq!(c.size_policy, SizePolicy::Decay);
        assert_eq!(c.a_range, ExponentRange { lo: 0.5, hi: 3.5 });
        assert_eq!(c.resolution, 256);
        c.validate().unwrap();
    }

    #[test]
    fn validation_messages() {
        let bad = GeneratorConfig { resolution: 100, ..Default::default() };
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("resolution must be a power of two"), "{msg}");
        assert!(GeneratorConfig { resolution: 4, ..Default::default() }.validate().is_err());
        assert!(GeneratorConfig { resolution: 8192, ..Default::default() }.validate().is_err());
        assert!(GeneratorConfig { count: 0, ..Default::default() }.validate().is_err());
        assert!(GeneratorConfig { labels: Some(0), ..Default::default() }.validate().is_err());
        assert!(GeneratorConfig { shape_kinds: vec![], ..Default::default() }.validate().is_err());
    }

    #[test]
    fn single_class_label_is_zero() {
        let mut s = Stream::from_seed(0);
        for _ in 0..100 {
            assert_eq!(assign_label(&mut s, 1).unwrap(), 0);
        }
        assert!(assign_label(&mut s, 0).is_err());
    }

    #[test]
    fn label_frequencies_are_balanced() {
        // 10 classes, 10^4 draws: each count ~ Bin(10^4, 0.1), sd 30, so
        // [800, 1200] is a 6.6-sigma band.
        let mut counts = [0usize; 10];
        let mut s = Stream::from_seed(77);
        for _ in 0..10_000 {
            counts[assign_label(&mut s, 10).unwrap() as usize] += 1;
        }
        assert!(counts.iter().all(|c| (800..=1200).contains(c)), "{counts:?}");
    }

    #[test]
    fn labels_are_reproducible_and_do_not_change_pixels() {
        let plain = small(Variant::Primitives);
        let labelled = GeneratorConfig { labels: Some(10), ..plain.clone() };
        let a = render_image(&labelled, 2).unwrap();
        let b = render_image(&labelled, 2).unwrap();
        assert_eq!(a.record.label, b.record.label);
        assert!(a.record.label.unwrap() < 10);
        let c = render_image(&plain, 2).unwrap();
        assert_eq!(a.synthesis.image, c.synthesis.image);
        assert_eq!(c.record.label, None);
    }

    #[test]
    fn every_variant_is_deterministic() {
        for v in Variant::ALL {
            let cfg = small(v);
            let a = render_image(&cfg, 1).unwrap();
            let b = render_image(&cfg, 1).unwrap();
            assert_eq!(a.synthesis.image.to_rgb8(), b.synthesis.image.to_rgb8(), "{v}");
            assert_eq!(a.record, b.record);
        }
    }

    #[test]
    fn primitives_ps_without_shapes_is_pinknoise_ps() {
        let ps = GeneratorConfig { shapes: 0, ..small(Variant::PrimitivesPS) };
        let pnps = GeneratorConfig { shapes: 0, ..small(Variant::PinkNoisePS) };
        let a = render_image(&ps, 0).unwrap().synthesis;
        let b = render_image(&pnps, 0).unwrap().synthesis;
        assert_eq!(a.image, b.image);
        assert_eq!(a.exponents, b.exponents);
        // PinkNoisePS ignores the shape budget entirely.
        let c = render_image(&small(Variant::PinkNoisePS), 0).unwrap().synthesis;
        assert_eq!(c.image, b.image);
    }

    #[test]
    fn recorded_exponents_lie_in_range() {
        let cfg = GeneratorConfig { a_range: ExponentRange { lo: 1.0, hi: 2.0 }, ..small(Variant::PrimitivesPS) };
        for i in 0..5 {
            let r = render_image(&cfg, i).unwrap().record;
            assert_eq!(r.exponents.len(), 2);
            assert!(r.exponents.iter().all(|&a| cfg.a_range.contains(a)));
        }
    }

    #[test]
    fn real17_roundtrips_exactly() {
        for v in [0.1, 1.0 / 3.0, 51.2, 1e-300, -2.5e17, 0.0] {
            let s = real17::format(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(real17::format(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn manifest_json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GeneratorConfig { labels: Some(4), ..small(Variant::PrimitivesS) };
        let m = generate_dataset(&cfg, dir.path(), 2).unwrap();
        let back = DatasetManifest::read(dir.path()).unwrap();
        assert_eq!(m, back);
        assert_eq!(back.images.len(), 3);
        assert!(back.images.iter().all(|r| r.saliency.is_some()));
    }
}
