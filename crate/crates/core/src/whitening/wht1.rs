//! WHT1 whitening files.
//!
//! ```text
//! "WHT1" | D: u32 LE | d_out: u32 LE | mean: D f32 LE
//!        | projection: d_out*D f32 LE, row-major
//! ```

use std::path::Path;

use nalgebra::DMatrix;

use super::WhiteningTransform;
use crate::error::{Error, Result};

pub const WHT1_MAGIC: &[u8; 4] = b"WHT1";
const HEADER_LEN: usize = 12;

/// Values are stored as `f32`; see [`WhiteningTransform::to_f32_precision`].
pub fn encode_whitening(t: &WhiteningTransform) -> Result<Vec<u8>> {
    let d = u32::try_from(t.input_dim()).map_err(|_| Error::invalid("dimension too large for WHT1"))?;
    let k = u32::try_from(t.output_dim()).map_err(|_| Error::invalid("dimension too large for WHT1"))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * t.input_dim() * (1 + t.output_dim()));
    out.extend_from_slice(WHT1_MAGIC);
    out.extend_from_slice(&d.to_le_bytes());
    out.extend_from_slice(&k.to_le_bytes());
    for &m in t.mean() {
        out.extend_from_slice(&(m as f32).to_le_bytes());
    }
    let p = t.projection();
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            out.extend_from_slice(&(p[(r, c)] as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_whitening(bytes: &[u8]) -> Result<WhiteningTransform> {
    if bytes.len() < 4 || &bytes[..4] != WHT1_MAGIC {
        return Err(Error::format(0, "bad magic, expected \"WHT1\""));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            bytes.len() as u64,
            format!("header truncated: expected {HEADER_LEN} bytes, found {}", bytes.len()),
        ));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
    let (d, k) = (word(4), word(8));
    if k == 0 || k > d {
        return Err(Error::format(8, format!("d_out {k} must lie in 1..={d}")));
    }
    let floats = d
        .checked_mul(k + 1)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format(4, "dimensions overflow"))?;
    let available = bytes.len() - HEADER_LEN;
    if available != floats {
        let what = if available < floats { "truncated" } else { "has trailing bytes" };
        return Err(Error::format(
            (HEADER_LEN + available.min(floats)) as u64,
            format!("payload {what}: expected {floats} bytes, found {available}"),
        ));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::format((HEADER_LEN + 4 * i) as u64, "non-finite value"));
    }
    let (mean, proj) = values.split_at(d);
    WhiteningTransform::new(mean.to_vec(), DMatrix::from_row_slice(k, d, proj))
}

pub fn write_whitening(t: &WhiteningTransform, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_whitening(t)?).map_err(|e| Error::io(path, e))
}

pub fn read_whitening(path: impl AsRef<Path>) -> Result<WhiteningTransform> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_whitening(&bytes)
}
