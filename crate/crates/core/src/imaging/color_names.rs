use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Rows in the quantized 32x32x32 color cube.
pub const CN_ROWS: usize = 32768;
/// Color-name probabilities per row.
pub const CN_CHANNELS: usize = 10;

const ROW_SUM_TOLERANCE: f64 = 1e-3;

/// Lookup row for an RGB triplet: `r/8 + 32*(g/8) + 1024*(b/8)`.
#[inline]
pub fn cn_index(r: u8, g: u8, b: u8) -> usize {
    (r as usize >> 3) + 32 * (g as usize >> 3) + 1024 * (b as usize >> 3)
}

/// RGB to color-name distribution mapping, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CnTable {
    rows: Vec<[f64; CN_CHANNELS]>,
}

impl CnTable {
    pub fn from_rows(rows: Vec<[f64; CN_CHANNELS]>) -> Result<Self> {
        if rows.len() != CN_ROWS {
            return Err(Error::CnTable(format!(
                "row count mismatch: expected {CN_ROWS}, found {}",
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            validate_row(i, row)?;
        }
        Ok(Self { rows })
    }

    /// Reads a CSV table (32768 lines of 10 decimals) or, for a `.bin`
    /// extension, raw little-endian `f64` values in row order.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let is_bin = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("bin"));
        if is_bin {
            Self::parse_bin(&bytes)
        } else {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::CnTable("table is not valid UTF-8".into()))?;
            Self::parse_csv(&text)
        }
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::with_capacity(CN_ROWS);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut row = [0.0; CN_CHANNELS];
            let mut n = 0;
            for field in line.split(',') {
                if n == CN_CHANNELS {
                    return Err(malformed(lineno, "more than 10 columns"));
                }
                row[n] = field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| malformed(lineno, &format!("unparsable value {field:?}")))?;
                n += 1;
            }
            if n != CN_CHANNELS {
                return Err(malformed(lineno, &format!("{n} columns, expected 10")));
            }
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn parse_bin(bytes: &[u8]) -> Result<Self> {
        const ROW_BYTES: usize = CN_CHANNELS * 8;
        if !bytes.len().is_multiple_of(ROW_BYTES) {
            return Err(Error::CnTable(format!(
                "binary table length {} is not a multiple of {ROW_BYTES}",
                bytes.len()
            )));
        }
        let rows = bytes
            .chunks_exact(ROW_BYTES)
            .map(|chunk| {
                let mut row = [0.0; CN_CHANNELS];
                for (v, b) in row.iter_mut().zip(chunk.chunks_exact(8)) {
                    *v = f64::from_le_bytes(b.try_into().expect("8-byte chunk"));
                }
                row
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(CN_ROWS * 80);
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.9}")).collect();
            writeln!(out, "{}", line.join(",")).expect("write to Vec");
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn write_bin(&self, path: &Path) -> Result<()> {
        let out: Vec<u8> = self
            .rows
            .iter()
            .flat_map(|r| r.iter().flat_map(|v| v.to_le_bytes()))
            .collect();
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Built-in approximation: a soft assignment of each quantized color to
    /// ten prototype colors (black, blue, brown, grey, green, orange, purple,
    /// red, white, yellow). Use [`CnTable::load`] with the published learned
    /// table for faithful color names.
    pub fn prototype() -> Self {
        const PROTOTYPES: [[f64; 3]; CN_CHANNELS] = [
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 255.0],
            [139.0, 90.0, 43.0],
            [128.0, 128.0, 128.0],
            [0.0, 160.0, 0.0],
            [255.0, 140.0, 0.0],
            [128.0, 0.0, 160.0],
            [220.0, 0.0, 0.0],
            [255.0, 255.0, 255.0],
            [255.0, 230.0, 0.0],
        ];
        const TEMPERATURE: f64 = 2.0 * 45.0 * 45.0;
        let mut rows = Vec::with_capacity(CN_ROWS);
        for idx in 0..CN_ROWS {
            // bin centers of the quantized cube
            let r = ((idx % 32) * 8 + 4) as f64;
            let g = (((idx / 32) % 32) * 8 + 4) as f64;
            let b = ((idx / 1024) * 8 + 4) as f64;
            let d2: Vec<f64> = PROTOTYPES
                .iter()
                .map(|p| (r - p[0]).powi(2) + (g - p[1]).powi(2) + (b - p[2]).powi(2))
                .collect();
            let min = d2.iter().copied().fold(f64::INFINITY, f64::min);
            let mut row = [0.0; CN_CHANNELS];
            let mut total = 0.0;
            for (v, d) in row.iter_mut().zip(&d2) {
                *v = (-(d - min) / TEMPERATURE).exp();
                total += *v;
            }
            row.iter_mut().for_each(|v| *v /= total);
            rows.push(row);
        }
        Self { rows }
    }

    #[inline]
    pub fn row(&self, index: usize) -> &[f64; CN_CHANNELS] {
        &self.rows[index]
    }

    #[inline]
    pub fn lookup(&self, rgb: [u8; 3]) -> &[f64; CN_CHANNELS] {
        &self.rows[cn_index(rgb[0], rgb[1], rgb[2])]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn malformed(lineno: usize, what: &str) -> Error {
    Error::CnTable(format!("malformed row at line {}: {what}", lineno + 1))
}

fn validate_row(i: usize, row: &[f64; CN_CHANNELS]) -> Result<()> {
    if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::CnTable(format!(
            "probability {v} out of [0,1] in row {i}"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::CnTable(format!(
            "row not a distribution: row {i} sums to {sum}"
        )));
    }
    Ok(())
}
