//! Field file formats.
//!
//! `KWF1` layout (all little-endian):
//!
//! | bytes          | content                          |
//! |----------------|----------------------------------|
//! | 0..4           | magic `KWF1`                     |
//! | 4..8           | rank as `u32`                    |
//! | 8..8+4·rank    | dims as `u32`                    |
//! | rest           | values as `f64`, last axis fastest |
//!
//! CSV is supported for rank ≤ 2 with one row per first-axis index.

use std::fs;
use std::path::Path;

use crate::error::{KwError, Result};
use crate::grid::{GridSpec, ScalarField, MAX_RANK};

pub const MAGIC: &[u8; 4] = b"KWF1";

pub fn encode_field(field: &ScalarField) -> Vec<u8> {
    let spec = field.spec();
    let mut out = Vec::with_capacity(8 + 4 * spec.rank() + 8 * field.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(spec.rank() as u32).to_le_bytes());
    for &n in spec.dims() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| KwError::Format("truncated header".into()))
}

pub fn decode_field(bytes: &[u8]) -> Result<ScalarField> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(KwError::Format("bad magic, expected KWF1".into()));
    }
    let rank = read_u32(bytes, 4)? as usize;
    if rank == 0 || rank > MAX_RANK {
        return Err(KwError::Format(format!("unsupported rank {rank}")));
    }
    let dims = (0..rank)
        .map(|i| read_u32(bytes, 8 + 4 * i).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let spec = GridSpec::new(&dims)?;
    let payload = &bytes[8 + 4 * rank..];
    if payload.len() != 8 * spec.len() {
        return Err(KwError::SizeMismatch {
            expected: spec.len(),
            found: payload.len() / 8,
        });
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ScalarField::from_values(&spec, values)
}

pub fn write_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_field(field))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    decode_field(&fs::read(path)?)
}

pub fn field_to_csv(field: &ScalarField) -> Result<String> {
    let spec = field.spec();
    let row_len = match spec.rank() {
        1 => 1,
        2 => spec.dims()[1],
        r => {
            return Err(KwError::Format(format!(
                "CSV export needs rank <= 2, got {r}"
            )))
        }
    };
    let mut out = String::new();
    for row in field.values().chunks(row_len) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn field_from_csv(text: &str) -> Result<ScalarField> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| {
                    KwError::Format(format!("line {}: bad number '{}'", lineno + 1, cell.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let width = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != width) {
        return Err(KwError::Format("ragged CSV rows".into()));
    }
    let spec = if width == 1 {
        GridSpec::new(&[rows.len()])?
    } else {
        GridSpec::new(&[rows.len(), width])?
    };
    ScalarField::from_values(&spec, rows.concat())
}
