//! PGM images and CSV tables of 2D complex arrays.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::sidecar_path;

/// Row-major complex array with named axes, as exported.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub rows: usize,
    pub cols: usize,
    pub row_axis: String,
    pub col_axis: String,
    pub values: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Pgm,
    Csv,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(ExportFormat::Pgm),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown export format '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgmScale {
    pub width: usize,
    pub height: usize,
    /// Modulus mapped to gray level 0.
    pub min: f64,
    /// Modulus mapped to gray level 255.
    pub max: f64,
}

/// 8-bit binary PGM of `|values|`, one image row per table row. A constant
/// table maps to black.
pub fn pgm_bytes(t: &Table) -> (Vec<u8>, PgmScale) {
    let m: Vec<f64> = t.values.iter().map(|z| z.norm()).collect();
    let min = m.iter().copied().fold(f64::INFINITY, f64::min);
    let max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut out = format!("P5\n{} {}\n255\n", t.cols, t.rows).into_bytes();
    out.extend(m.iter().map(|&x| {
        if span > 0.0 {
            ((x - min) / span * 255.0).round() as u8
        } else {
            0
        }
    }));
    let scale = PgmScale {
        width: t.cols,
        height: t.rows,
        min: if min.is_finite() { min } else { 0.0 },
        max: if max.is_finite() { max } else { 0.0 },
    };
    (out, scale)
}

pub fn write_pgm(path: &Path, t: &Table) -> Result<PgmScale> {
    let (bytes, scale) = pgm_bytes(t);
    fs::write(path, bytes)?;
    let mut json = serde_json::to_string_pretty(&scale)?;
    json.push('\n');
    fs::write(sidecar_path(path), json)?;
    Ok(scale)
}

/// Header `<row_axis>,<col_axis>,re,im`, one line per entry, shortest
/// round-trip float formatting.
pub fn csv_string(t: &Table) -> String {
    let mut s = format!("{},{},re,im\n", t.row_axis, t.col_axis);
    for r in 0..t.rows {
        for c in 0..t.cols {
            let z = t.values[r * t.cols + c];
            s.push_str(&format!("{r},{c},{:?},{:?}\n", z.re, z.im));
        }
    }
    s
}

pub fn write_csv(path: &Path, t: &Table) -> Result<()> {
    fs::write(path, csv_string(t))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Table> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?;
    let cols: Vec<&str> = head.split(',').collect();
    if cols.len() != 4 || cols[2] != "re" || cols[3] != "im" {
        return Err(Error::Format(format!("unexpected CSV header '{head}'")));
    }
    let mut entries = Vec::new();
    let (mut nr, mut nc) = (0usize, 0usize);
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Format(format!("CSV line {}: '{line}'", i + 2));
        if f.len() != 4 {
            return Err(bad());
        }
        let r: usize = f[0].parse().map_err(|_| bad())?;
        let c: usize = f[1].parse().map_err(|_| bad())?;
        let re: f64 = f[2].parse().map_err(|_| bad())?;
        let im: f64 = f[3].parse().map_err(|_| bad())?;
        nr = nr.max(r + 1);
        nc = nc.max(c + 1);
        entries.push((r, c, Complex64::new(re, im)));
    }
    if entries.len() != nr * nc {
        return Err(Error::Format("CSV does not fill a rectangle".into()));
    }
    let mut values = vec![Complex64::default(); nr * nc];
    for (r, c, z) in entries {
        values[r * nc + c] = z;
    }
    Ok(Table {
        rows: nr,
        cols: nc,
        row_axis: cols[0].into(),
        col_axis: cols[1].into(),
        values,
    })
}

pub fn read_csv(path: &Path) -> Result<Table> {
    parse_csv(&fs::read_to_string(path)?)
}
