//! Binary field files with a JSON sidecar.
//!
//! The payload is `n_x · n_y` complex values as little-endian `f64` pairs
//! `(re, im)`, row-major with y as the outer index. The sidecar lives at
//! `<path>.json` and records `n_x`, `n_y`, `h` and the layout tag.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::C64;

/// Layout tag written to every sidecar.
pub const LAYOUT: &str = "c64-le-interleaved-y-outer";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub n_x: usize,
    pub n_y: usize,
    pub h: f64,
    pub layout: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_field(u: &Field, h: f64, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 * u.values.len());
    for v in &u.values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let header = FieldHeader { n_x: u.n_x, n_y: u.n_y, h, layout: LAYOUT.to_string() };
    let json = serde_json::to_string_pretty(&header).map_err(|e| Error::FieldFormat(e.to_string()))?;
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn read_header(path: &Path) -> Result<FieldHeader> {
    let text = fs::read_to_string(sidecar_path(path))?;
    let header: FieldHeader = serde_json::from_str(&text).map_err(|e| Error::FieldFormat(e.to_string()))?;
    if header.layout != LAYOUT {
        return Err(Error::FieldFormat(format!("unknown layout {:?}", header.layout)));
    }
    Ok(header)
}

pub fn read_field(path: &Path) -> Result<(Field, FieldHeader)> {
    let header = read_header(path)?;
    let bytes = fs::read(path)?;
    let expected = 16 * header.n_x * header.n_y;
    if bytes.len() != expected {
        return Err(Error::FieldFormat(format!("payload has {} bytes, header implies {expected}", bytes.len())));
    }
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8-byte slice"));
    let values = (0..header.n_x * header.n_y).map(|p| C64::new(f64_at(16 * p), f64_at(16 * p + 8))).collect();
    Ok((Field::from_values(header.n_x, header.n_y, values)?, header))
}
