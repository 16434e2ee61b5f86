use serde::{Deserialize, Serialize};

use super::stats::SpectrumStats;
use crate::spectrum::RealField;
use crate::{Error, Result};

pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_WINDOW: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDistance {
    pub ssim: f64,
    /// Mean absolute difference.
    pub l1: f64,
    /// Root-mean-square difference.
    pub l2: f64,
}

/// Mean SSIM over all valid 7×7 uniform windows. The dynamic range is the
/// joint `max − min` of both fields; windows use population moments.
pub fn ssim(a: &RealField, b: &RealField) -> Result<f64> {
    let n = a.size();
    if b.size() != n {
        return Err(Error::Dimension(format!(
            "cannot compare a {n}x{n} field with a {0}x{0} field",
            b.size()
        )));
    }
    let (alo, ahi) = a.min_max();
    let (blo, bhi) = b.min_max();
    let range = ahi.max(bhi) - alo.min(blo);
    if range == 0.0 {
        // Both fields are the same constant.
        return Ok(1.0);
    }
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let w = SSIM_WINDOW;
    let inv = 1.0 / (w * w) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for y0 in 0..=n - w {
        for x0 in 0..=n - w {
            let (mut sa, mut sb) = (0.0, 0.0);
            for y in y0..y0 + w {
                for x in x0..x0 + w {
                    sa += a.get(x, y);
                    sb += b.get(x, y);
                }
            }
            let (ma, mb) = (sa * inv, sb * inv);
            let (mut vaa, mut vbb, mut vab) = (0.0, 0.0, 0.0);
            for y in y0..y0 + w {
                for x in x0..x0 + w {
                    let da = a.get(x, y) - ma;
                    let db = b.get(x, y) - mb;
                    vaa += da * da;
                    vbb += db * db;
                    vab += da * db;
                }
            }
            let (vaa, vbb, vab) = (vaa * inv, vbb * inv, vab * inv);
            total += ((2.0 * ma * mb + c1) * (2.0 * vab + c2))
                / ((ma * ma + mb * mb + c1) * (vaa + vbb + c2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// SSIM, L1 and L2 between two averaged spectra.
pub fn spectrum_distance(a: &SpectrumStats, b: &SpectrumStats) -> Result<SpectrumDistance> {
    if a.resolution != b.resolution {
        return Err(Error::Analysis(format!(
            "resolution mismatch: {} vs {}",
            a.resolution, b.resolution
        )));
    }
    if a.scale != b.scale {
        return Err(Error::Analysis("spectra use different magnitude scales".into()));
    }
    let (fa, fb) = (&a.mean_field, &b.mean_field);
    let count = fa.data().len() as f64;
    let l1 = fa.data().iter().zip(fb.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() / count;
    let l2 = (fa.data().iter().zip(fb.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / count).sqrt();
    Ok(SpectrumDistance {
        ssim: ssim(fa, fb)?,
        l1,
        l2,
    })
}
