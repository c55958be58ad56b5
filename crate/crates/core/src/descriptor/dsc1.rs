//! DSC1 descriptor files.
//!
//! ```text
//! "DSC1" | count: u32 LE | dim: u32 LE | count*dim f32 LE, row-major
//!        | ids: UTF-8, each followed by '\n', in row order
//! ```

use std::path::Path;

use super::{check_id, Descriptor, DescriptorSet};
use crate::error::{Error, Result};

pub const DSC1_MAGIC: &[u8; 4] = b"DSC1";
const HEADER_LEN: usize = 12;

pub fn encode_descriptors(set: &DescriptorSet) -> Result<Vec<u8>> {
    let count = u32::try_from(set.len()).map_err(|_| Error::invalid("too many descriptors for DSC1"))?;
    let dim = u32::try_from(set.dim()).map_err(|_| Error::invalid("dimension too large for DSC1"))?;
    let mut out = Vec::with_capacity(HEADER_LEN + set.len() * set.dim() * 4);
    out.extend_from_slice(DSC1_MAGIC);
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&dim.to_le_bytes());
    for d in set {
        for v in d.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for d in set {
        check_id(d.id())?;
        out.extend_from_slice(d.id().as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode_descriptors(bytes: &[u8]) -> Result<DescriptorSet> {
    if bytes.len() < 4 || &bytes[..4] != DSC1_MAGIC {
        return Err(Error::format(0, "bad magic, expected \"DSC1\""));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            bytes.len() as u64,
            format!("header truncated: expected {HEADER_LEN} bytes, found {}", bytes.len()),
        ));
    }
    let count = read_u32(bytes, 4) as usize;
    let dim = read_u32(bytes, 8) as usize;
    let payload = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format(4, "count x dim overflows"))?;
    let available = bytes.len() - HEADER_LEN;
    if available < payload {
        return Err(Error::format(
            HEADER_LEN as u64,
            format!("float payload truncated: expected {payload} bytes, found {available}"),
        ));
    }
    let table_at = HEADER_LEN + payload;
    let table = std::str::from_utf8(&bytes[table_at..]).map_err(|e| {
        Error::format((table_at + e.valid_up_to()) as u64, "id table is not valid UTF-8")
    })?;
    let ids: Vec<&str> = match table.strip_suffix('\n') {
        Some(body) => body.split('\n').collect(),
        None if table.is_empty() => Vec::new(),
        None => {
            return Err(Error::format(
                bytes.len() as u64,
                "id table must end with a newline",
            ))
        }
    };
    if ids.len() != count {
        return Err(Error::format(
            table_at as u64,
            format!("id table holds {} ids, header declares {count}", ids.len()),
        ));
    }

    let mut set = DescriptorSet::new(dim);
    let mut id_offset = table_at;
    for (row, id) in ids.into_iter().enumerate() {
        let start = HEADER_LEN + row * dim * 4;
        let values: Vec<f32> = bytes[start..start + dim * 4]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::format(
                (start + i * 4) as u64,
                format!("non-finite value in row {row}"),
            ));
        }
        let d = Descriptor::new(id, values).map_err(|e| Error::format(id_offset as u64, e.to_string()))?;
        set.push(d).map_err(|e| Error::format(id_offset as u64, e.to_string()))?;
        id_offset += id.len() + 1;
    }
    Ok(set)
}

pub fn write_descriptors(set: &DescriptorSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_descriptors(set)?).map_err(|e| Error::io(path, e))
}

pub fn read_descriptors(path: impl AsRef<Path>) -> Result<DescriptorSet> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_descriptors(&bytes)
}
