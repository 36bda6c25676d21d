//! Coefficient snapshots: a little-endian binary layout and a JSON twin.
//!
//! Binary layout: 8-byte magic `SPHFLOW1`, `u32` version, `u32` lmax, `u8` real flag,
//! `f64` time, then `(lmax+1)^2` pairs `(re, im)` as `f64`, degree ascending and order
//! from `-l` to `l`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{field_len, SpectralField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SPHFLOW1";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: SpectralField,
}

#[derive(Serialize, Deserialize)]
struct JsonSnapshot {
    version: u32,
    lmax: usize,
    real_valued: bool,
    time: f64,
    coeffs: Vec<[f64; 2]>,
}

impl Snapshot {
    pub fn new(time: f64, field: SpectralField) -> Self {
        Self { time, field }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(25 + 16 * self.field.coeffs().len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.field.lmax() as u32).to_le_bytes());
        out.push(self.field.is_real_valued() as u8);
        out.extend_from_slice(&self.time.to_le_bytes());
        for c in self.field.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 25 || &bytes[..8] != MAGIC {
            return Err(Error::Format("not a snapshot file".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let lmax = u32_at(12) as usize;
        let real = match bytes[16] {
            0 => false,
            1 => true,
            b => return Err(Error::Format(format!("bad real flag {b}"))),
        };
        let time = f64_at(17);
        let n = field_len(lmax);
        if bytes.len() != 25 + 16 * n {
            return Err(Error::Dimension { expected: 25 + 16 * n, got: bytes.len() });
        }
        let coeffs = (0..n).map(|k| Complex64::new(f64_at(25 + 16 * k), f64_at(33 + 16 * k))).collect();
        Ok(Self { time, field: SpectralField::from_coeffs(lmax, coeffs, real)? })
    }

    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    pub fn to_json(&self) -> Result<String> {
        let js = JsonSnapshot {
            version: VERSION,
            lmax: self.field.lmax(),
            real_valued: self.field.is_real_valued(),
            time: self.time,
            coeffs: self.field.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        };
        Ok(serde_json::to_string_pretty(&js)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let js: JsonSnapshot = serde_json::from_str(text)?;
        if js.version != VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {}", js.version)));
        }
        let coeffs = js.coeffs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        Ok(Self { time: js.time, field: SpectralField::from_coeffs(js.lmax, coeffs, js.real_valued)? })
    }
}
