//! RGB raster in `[0, 1]` and its 8-bit PNG form.

use std::io::Cursor;
use std::path::Path;

use ::image::codecs::png::PngEncoder;
use ::image::{ExtendedColorType, ImageEncoder, ImageReader};

use crate::{Error, Result};

pub type Rgb = [f64; 3];

/// `width × height × 3` real-valued raster, row-major, channels interleaved.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&color);
        }
        ImageBuffer {
            width,
            height,
            data,
        }
    }

    /// Stacks three single-channel planes (row-major, equal length).
    pub fn from_planes(width: usize, height: usize, planes: [&[f64]; 3]) -> Self {
        let n = width * height;
        assert!(planes.iter().all(|p| p.len() == n), "plane size mismatch");
        let mut data = Vec::with_capacity(n * 3);
        for i in 0..n {
            data.extend(planes.iter().map(|p| p[i]));
        }
        ImageBuffer {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: Rgb) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// One channel as a row-major plane.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    /// Quantizes to 8 bits per channel: `round(clamp(v, 0, 1) · 255)`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Self {
        assert_eq!(bytes.len(), width * height * 3);
        ImageBuffer {
            width,
            height,
            data: bytes.iter().map(|&b| f64::from(b) / 255.0).collect(),
        }
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        PngEncoder::new(&mut out)
            .write_image(
                &self.to_rgb8(),
                self.width as u32,
                self.height as u32,
                ExtendedColorType::Rgb8,
            )
            .expect("in-memory PNG encoding cannot fail for a consistent buffer");
        out
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode_png()).map_err(|e| Error::io(path, e))
    }

    /// Decodes any PNG and converts it to RGB.
    pub fn read_png(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let decoded = ImageReader::new(Cursor::new(bytes))
            .with_guessed_format()
            .map_err(|e| Error::io(path, e))?
            .decode()
            .map_err(|source| Error::Codec {
                path: path.to_path_buf(),
                source,
            })?
            .to_rgb8();
        let (w, h) = decoded.dimensions();
        Ok(Self::from_rgb8(w as usize, h as usize, decoded.as_raw()))
    }
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a single-channel plane in `[0, 1]` as an 8-bit grayscale PNG.
pub fn write_gray_png(path: &Path, width: usize, height: usize, plane: &[f64]) -> Result<()> {
    let bytes: Vec<u8> = plane.iter().map(|&v| quantize(v)).collect();
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&bytes, width as u32, height as u32, ExtendedColorType::L8)
        .map_err(|source| Error::Codec {
            path: path.to_path_buf(),
            source,
        })?;
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounds_and_clamps() {
        assert_eq!(quantize(-0.3), 0);
        assert_eq!(quantize(1.7), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(1.0 / 255.0), 1);
    }

    #[test]
    fn png_roundtrip_preserves_quantized_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let mut img = ImageBuffer::filled(8, 4, [0.1, 0.2, 0.3]);
        img.set_pixel(3, 2, [1.0, 0.0, 0.5]);
        img.write_png(&path).unwrap();
        let back = ImageBuffer::read_png(&path).unwrap();
        assert_eq!(back.width(), 8);
        assert_eq!(back.height(), 4);
        assert_eq!(back.to_rgb8(), img.to_rgb8());
    }

    #[test]
    fn planes_interleave() {
        let r = [1.0, 2.0];
        let g = [3.0, 4.0];
        let b = [5.0, 6.0];
        let img = ImageBuffer::from_planes(2, 1, [&r, &g, &b]);
        assert_eq!(img.data(), &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
        assert_eq!(img.channel(1), vec![3.0, 4.0]);
    }
}
