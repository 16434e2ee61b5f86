use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::image::ImageBuffer;
use crate::spectrum::{forward_fft2, RealField};
use crate::{Error, Result};

/// How a spectral magnitude `|F|` enters the averaged field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MagnitudeScale {
    /// `ln(1 + |F|)`.
    #[default]
    Log1p,
    /// `|F|` itself.
    Linear,
    /// `ln |F|`; exact zeros map to `ln(f64::MIN_POSITIVE)`.
    Log,
    /// `|F|²`.
    Power,
}

impl MagnitudeScale {
    #[inline]
    fn apply(self, magnitude: f64) -> f64 {
        match self {
            MagnitudeScale::Log1p => magnitude.ln_1p(),
            MagnitudeScale::Linear => magnitude,
            MagnitudeScale::Log => magnitude.max(f64::MIN_POSITIVE).ln(),
            MagnitudeScale::Power => magnitude * magnitude,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingMean {
    /// Integer ring radius in frequency bins.
    pub frequency: f64,
    pub mean: f64,
    pub bins: usize,
}

/// Average (log-)magnitude spectrum of a set of images, DC at the center
/// `(H/2, H/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumStats {
    pub resolution: usize,
    pub scale: MagnitudeScale,
    pub sample_count: usize,
    pub mean_field: RealField,
    /// Rings `1..H/2`; DC and the Nyquist ring are excluded.
    pub radial_profile: Vec<RingMean>,
}

/// Ring mean over integer-rounded radii of a centered field.
pub fn radial_profile(field: &RealField) -> Vec<RingMean> {
    let n = field.size();
    let half = n / 2;
    let mut sums = vec![0.0; half];
    let mut counts = vec![0usize; half];
    for cy in 0..n {
        let fy = cy as f64 - half as f64;
        for cx in 0..n {
            let fx = cx as f64 - half as f64;
            let r = (fx * fx + fy * fy).sqrt().round() as usize;
            if (1..half).contains(&r) {
                sums[r] += field.get(cx, cy);
                counts[r] += 1;
            }
        }
    }
    (1..half)
        .map(|r| RingMean {
            frequency: r as f64,
            mean: sums[r] / counts[r] as f64,
            bins: counts[r],
        })
        .collect()
}

/// Streaming sum of per-channel centered magnitude fields.
#[derive(Clone, Debug)]
pub struct SpectrumAccumulator {
    resolution: usize,
    scale: MagnitudeScale,
    sum: Vec<f64>,
    images: usize,
}

impl SpectrumAccumulator {
    pub fn new(resolution: usize, scale: MagnitudeScale) -> Result<Self> {
        RealField::zeros(resolution)?;
        Ok(SpectrumAccumulator {
            resolution,
            scale,
            sum: vec![0.0; resolution * resolution],
            images: 0,
        })
    }

    /// Sum over the three channels of one image's centered magnitude field.
    fn image_field(&self, image: &ImageBuffer) -> Result<Vec<f64>> {
        let n = self.resolution;
        if image.width() != n || image.height() != n {
            return Err(Error::Dimension(format!(
                "image is {}x{}, expected {n}x{n}",
                image.width(),
                image.height()
            )));
        }
        let mut out = vec![0.0; n * n];
        let half = n / 2;
        for c in 0..3 {
            let spectrum = forward_fft2(&RealField::new(n, image.channel(c))?);
            for ky in 0..n {
                let cy = (ky + half) % n;
                for kx in 0..n {
                    let cx = (kx + half) % n;
                    out[cy * n + cx] += self.scale.apply(spectrum.get(kx, ky).norm());
                }
            }
        }
        Ok(out)
    }

    fn add_field(&mut self, field: &[f64]) {
        for (s, v) in self.sum.iter_mut().zip(field) {
            *s += v;
        }
        self.images += 1;
    }

    pub fn add_image(&mut self, image: &ImageBuffer) -> Result<()> {
        let field = self.image_field(image)?;
        self.add_field(&field);
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        self.images
    }

    pub fn finish(self) -> Result<SpectrumStats> {
        if self.images == 0 {
            return Err(Error::Analysis("no images to average".into()));
        }
        let denom = 3.0 * self.images as f64;
        let mean = self.sum.into_iter().map(|v| v / denom).collect();
        let mean_field = RealField::new(self.resolution, mean)?;
        Ok(SpectrumStats {
            resolution: self.resolution,
            scale: self.scale,
            sample_count: self.images,
            radial_profile: radial_profile(&mean_field),
            mean_field,
        })
    }
}

/// Averages in-memory images (all the same power-of-two square size).
pub fn spectrum_of_images<'a>(
    images: impl IntoIterator<Item = &'a ImageBuffer>,
    scale: MagnitudeScale,
) -> Result<SpectrumStats> {
    let mut acc: Option<SpectrumAccumulator> = None;
    for img in images {
        let acc = match &mut acc {
            Some(a) => a,
            None => acc.insert(SpectrumAccumulator::new(img.width(), scale)?),
        };
        acc.add_image(img)?;
    }
    acc.ok_or_else(|| Error::Analysis("no images to average".into()))?.finish()
}

/// PNG files in `dir`, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Images decoded concurrently per batch; batches are summed in file order
/// so the result does not depend on scheduling.
const BATCH: usize = 64;

/// Average spectrum of every PNG in `dir`.
pub fn dataset_spectrum(dir: &Path, scale: MagnitudeScale) -> Result<SpectrumStats> {
    let files = list_images(dir)?;
    let Some(first) = files.first() else {
        return Err(Error::Dataset {
            path: dir.to_path_buf(),
            message: "dataset contains no PNG images".into(),
        });
    };
    let probe = ImageBuffer::read_png(first)?;
    let res = probe.width();
    let check = |path: &Path, img: &ImageBuffer| -> Result<()> {
        if img.width() != res || img.height() != res {
            return Err(Error::Dataset {
                path: path.to_path_buf(),
                message: format!(
                    "image is {}x{} but the dataset is {res}x{res}",
                    img.width(),
                    img.height()
                ),
            });
        }
        Ok(())
    };
    check(first, &probe)?;
    if !res.is_power_of_two() || res < crate::spectrum::MIN_SIZE {
        return Err(Error::Dataset {
            path: first.clone(),
            message: format!("resolution {res} is not a power of two >= 8"),
        });
    }
    let mut acc = SpectrumAccumulator::new(res, scale)?;
    for batch in files.chunks(BATCH) {
        let fields = batch
            .par_iter()
            .map(|path| {
                let img = ImageBuffer::read_png(path)?;
                check(path, &img)?;
                acc.image_field(&img)
            })
            .collect::<Result<Vec<_>>>()?;
        for f in &fields {
            acc.add_field(f);
        }
    }
    acc.finish()
}
