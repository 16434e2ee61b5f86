//! WT01 weight-tensor files.
//!
//! ```text
//! offset  size          field
//! 0       4             magic "WT01"
//! 4       4             rank, u32 LE, must be 4
//! 8       16            dims [O, I, h, w], u32 LE each
//! 24      4·O·I·h·w     f32 LE, row-major
//! ```

use std::path::Path;

use crate::{Error, Result};

pub const WT01_MAGIC: &[u8; 4] = b"WT01";
const HEADER_LEN: usize = 24;

/// Rank-4 filter bank `[O, I, h, w]`. Weights are stored as `f32` on disk
/// and widened to `f64` in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTensor {
    dims: [usize; 4],
    data: Vec<f64>,
}

impl WeightTensor {
    pub fn new(dims: [usize; 4], data: Vec<f64>) -> Result<Self> {
        let expected = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if expected != Some(data.len()) {
            return Err(Error::Dimension(format!(
                "dims {dims:?} do not match {} weights",
                data.len()
            )));
        }
        Ok(WeightTensor { dims, data })
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn filter_count(&self) -> usize {
        self.dims[0]
    }

    pub fn filter_len(&self) -> usize {
        self.dims[1] * self.dims[2] * self.dims[3]
    }

    /// Each filter flattened to an `I·h·w` slice.
    pub fn filters(&self) -> impl Iterator<Item = &[f64]> {
        let len = self.filter_len();
        (0..self.dims[0]).map(move |o| &self.data[o * len..(o + 1) * len])
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// WT01 encoding; weights are rounded to `f32`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(WT01_MAGIC);
        out.extend_from_slice(&4u32.to_le_bytes());
        for d in self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out
    }
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| format_err(offset, format!("truncated header: missing {what}")))
}

pub fn parse_weight_tensor(bytes: &[u8]) -> Result<WeightTensor> {
    match bytes.get(..4) {
        Some(m) if m == WT01_MAGIC => {}
        Some(m) => return Err(format_err(0, format!("bad magic {m:02x?}, expected \"WT01\""))),
        None => return Err(format_err(0, "truncated header: missing magic")),
    }
    let rank = read_u32(bytes, 4, "rank")?;
    if rank != 4 {
        return Err(format_err(4, format!("rank must be 4, got {rank}")));
    }
    let mut dims = [0usize; 4];
    for (i, d) in dims.iter_mut().enumerate() {
        *d = read_u32(bytes, 8 + 4 * i, "dimension")? as usize;
    }
    let payload = dims
        .iter()
        .try_fold(4usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| format_err(8, format!("dims {dims:?} overflow the addressable payload")))?;
    let actual = bytes.len() - HEADER_LEN;
    if actual != payload {
        let what = if actual < payload { "truncated payload" } else { "trailing bytes after payload" };
        return Err(format_err(
            HEADER_LEN + actual.min(payload),
            format!("{what}: dims {dims:?} need {payload} bytes, found {actual}"),
        ));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Ok(WeightTensor { dims, data })
}

pub fn read_weight_tensor(path: &Path) -> Result<WeightTensor> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_weight_tensor(&bytes)
}

pub fn write_weight_tensor(path: &Path, tensor: &WeightTensor) -> Result<()> {
    std::fs::write(path, tensor.to_bytes()).map_err(|e| Error::io(path, e))
}
