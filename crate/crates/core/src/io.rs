//! On-disk formats SRG1 (signals and real spectra), SRS1 (sinograms) and
//! SRC1 (coefficient tensors).
//!
//! Each artifact is a raw payload of little-endian `(re, im)` f64 pairs at
//! `path` plus a JSON sidecar at `path.json`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, QuadratureRule, SampledSignal2D};
use crate::radon::{Orientation, Sinogram};
use crate::shearlet::{CoefficientTensor, Route};

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn encode(values: impl Iterator<Item = Complex64>) -> Vec<u8> {
    let mut out = Vec::new();
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8], expected: usize) -> Result<Vec<Complex64>> {
    if bytes.len() != expected * 16 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, expected {}",
            bytes.len(),
            expected * 16
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

fn write_pair<T: Serialize>(path: &Path, header: &T, payload: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, payload)?;
    let mut json = serde_json::to_string_pretty(header)?;
    json.push('\n');
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

fn read_header<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(sidecar_path(path))?;
    Ok(serde_json::from_str(&text)?)
}

fn expect_format(found: &str, wanted: &str) -> Result<()> {
    if found != wanted {
        return Err(Error::Format(format!(
            "format '{found}', expected '{wanted}'"
        )));
    }
    Ok(())
}

/// Whether an SRG1 payload holds samples in space or in frequency.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    #[default]
    Space,
    Frequency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalHeader {
    pub format: String,
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub dtype: String,
    pub order: String,
    #[serde(default)]
    pub domain: Domain,
}

/// Signal samples (or spectrum samples with `Domain::Frequency`, indexed on
/// the dual grids of `grid_x`, `grid_y`).
pub fn write_srg1(path: &Path, f: &SampledSignal2D, domain: Domain) -> Result<()> {
    let h = SignalHeader {
        format: "SRG1".into(),
        nx: f.grid_x().n(),
        ny: f.grid_y().n(),
        lx: f.grid_x().extent(),
        ly: f.grid_y().extent(),
        dtype: "c128".into(),
        order: "row-major".into(),
        domain,
    };
    write_pair(path, &h, &encode(f.values().iter().copied()))
}

pub fn read_srg1(path: &Path) -> Result<(SampledSignal2D, Domain)> {
    let h: SignalHeader = read_header(path)?;
    expect_format(&h.format, "SRG1")?;
    if h.dtype != "c128" || h.order != "row-major" {
        return Err(Error::Format(format!(
            "unsupported dtype/order {}/{}",
            h.dtype, h.order
        )));
    }
    let gx = Grid1D::new(h.nx, h.lx)?;
    let gy = Grid1D::new(h.ny, h.ly)?;
    let values = decode(&fs::read(path)?, h.nx * h.ny)?;
    Ok((SampledSignal2D::new(gx, gy, values)?, h.domain))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinogramHeader {
    pub format: String,
    pub orientation: Orientation,
    pub nv: usize,
    pub nt: usize,
    pub v_min: f64,
    pub v_max: f64,
    #[serde(rename = "Lt")]
    pub lt: f64,
    pub dtype: String,
}

/// Sinograms on trapezoid `v` grids, rows `v`-major.
pub fn write_srs1(path: &Path, s: &Sinogram) -> Result<()> {
    let v = s.v();
    let h = SinogramHeader {
        format: "SRS1".into(),
        orientation: s.orientation(),
        nv: v.len(),
        nt: s.t().n(),
        v_min: v.lo,
        v_max: v.hi,
        lt: s.t().extent(),
        dtype: "c128".into(),
    };
    write_pair(path, &h, &encode(s.values().iter().copied()))
}

pub fn read_srs1(path: &Path) -> Result<Sinogram> {
    let h: SinogramHeader = read_header(path)?;
    expect_format(&h.format, "SRS1")?;
    if h.dtype != "c128" {
        return Err(Error::Format(format!("unsupported dtype {}", h.dtype)));
    }
    let v = QuadratureRule::trapezoid(h.v_min, h.v_max, h.nv)?;
    let t = Grid1D::new(h.nt, h.lt)?;
    let values = decode(&fs::read(path)?, h.nv * h.nt)?;
    Sinogram::new(h.orientation, v, t, values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub format: String,
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub s_nodes: Vec<f64>,
    pub a_nodes: Vec<f64>,
    pub route: Route,
    pub variant: Orientation,
    pub dtype: String,
    pub order: String,
}

const TENSOR_ORDER: &str = "a,s,b_y,b_x";

/// Payload ordered `(a, s, b_y, b_x)` from slowest to fastest.
pub fn write_src1(path: &Path, c: &CoefficientTensor) -> Result<()> {
    let (nx, ny) = (c.grid_x.n(), c.grid_y.n());
    let h = TensorHeader {
        format: "SRC1".into(),
        nx,
        ny,
        lx: c.grid_x.extent(),
        ly: c.grid_y.extent(),
        s_nodes: c.s_nodes.clone(),
        a_nodes: c.a_nodes.clone(),
        route: c.route,
        variant: c.variant,
        dtype: "c128".into(),
        order: TENSOR_ORDER.into(),
    };
    let n = nx * ny;
    let values = c
        .values
        .chunks(n)
        .flat_map(|slice| (0..ny).flat_map(move |k| (0..nx).map(move |j| slice[j * ny + k])));
    write_pair(path, &h, &encode(values))
}

pub fn read_src1(path: &Path) -> Result<CoefficientTensor> {
    let h: TensorHeader = read_header(path)?;
    expect_format(&h.format, "SRC1")?;
    if h.dtype != "c128" || h.order != TENSOR_ORDER {
        return Err(Error::Format(format!(
            "unsupported dtype/order {}/{}",
            h.dtype, h.order
        )));
    }
    let (nx, ny) = (h.nx, h.ny);
    let slices = h.s_nodes.len() * h.a_nodes.len();
    let raw = decode(&fs::read(path)?, nx * ny * slices)?;
    let mut values = vec![Complex64::default(); raw.len()];
    for (src, dst) in raw.chunks(nx * ny).zip(values.chunks_mut(nx * ny)) {
        for k in 0..ny {
            for j in 0..nx {
                dst[j * ny + k] = src[k * nx + j];
            }
        }
    }
    if values
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::NonFinite("tensor payload"));
    }
    Ok(CoefficientTensor {
        grid_x: Grid1D::new(nx, h.lx)?,
        grid_y: Grid1D::new(ny, h.ly)?,
        s_nodes: h.s_nodes,
        a_nodes: h.a_nodes,
        route: h.route,
        variant: h.variant,
        values,
    })
}

/// Artifact kind named by a sidecar's `format` field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArtifactKind {
    Signal,
    Sinogram,
    Tensor,
}

pub fn artifact_kind(path: &Path) -> Result<ArtifactKind> {
    #[derive(Deserialize)]
    struct Probe {
        format: String,
    }
    let p: Probe = read_header(path)?;
    match p.format.as_str() {
        "SRG1" => Ok(ArtifactKind::Signal),
        "SRS1" => Ok(ArtifactKind::Sinogram),
        "SRC1" => Ok(ArtifactKind::Tensor),
        other => Err(Error::Format(format!("unknown format '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shearlet::ShearScaleGrid;

    fn signal() -> SampledSignal2D {
        let gx = Grid1D::new(8, 2.0).unwrap();
        let gy = Grid1D::new(16, 4.0).unwrap();
        SampledSignal2D::from_fn(gx, gy, |x, y| Complex64::new(x.sin() * 1e-300, y / 3.0))
    }

    #[test]
    fn srg1_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.srg");
        let f = signal();
        write_srg1(&p, &f, Domain::Space).unwrap();
        let (g, d) = read_srg1(&p).unwrap();
        assert_eq!(d, Domain::Space);
        for (a, b) in f.values().iter().zip(g.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let side: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(sidecar_path(&p)).unwrap()).unwrap();
        assert_eq!(side["format"], "SRG1");
        assert_eq!(side["Lx"], 2.0);
        assert_eq!(side["order"], "row-major");
        assert_eq!(fs::metadata(&p).unwrap().len(), 8 * 16 * 16);
    }

    #[test]
    fn srs1_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.srs");
        let v = QuadratureRule::trapezoid(-1.0, 1.0, 5).unwrap();
        let t = Grid1D::new(8, 4.0).unwrap();
        let vals = (0..40)
            .map(|i| Complex64::new(i as f64 / 7.0, -(i as f64)))
            .collect();
        let s = Sinogram::new(Orientation::Vertical, v, t, vals).unwrap();
        write_srs1(&p, &s).unwrap();
        assert_eq!(read_srs1(&p).unwrap(), s);
        assert_eq!(artifact_kind(&p).unwrap(), ArtifactKind::Sinogram);
    }

    #[test]
    fn src1_order_is_b_x_fastest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.src");
        let gx = Grid1D::new(8, 2.0).unwrap();
        let gy = Grid1D::new(16, 2.0).unwrap();
        let grid = ShearScaleGrid::new(3, 0.25, 2).unwrap();
        let mut c = CoefficientTensor::zeros(gx, gy, &grid, Route::Direct, Orientation::Horizontal);
        for (i, z) in c.values.iter_mut().enumerate() {
            *z = Complex64::new(i as f64, 0.5);
        }
        write_src1(&p, &c).unwrap();
        let bytes = fs::read(&p).unwrap();
        let second = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        // Element (b_x = 1, b_y = 0) of the first slice sits at x-major index ny.
        assert_eq!(second, 16.0);
        assert_eq!(read_src1(&p).unwrap(), c);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.srg");
        write_srg1(&p, &signal(), Domain::Space).unwrap();
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 16]).unwrap();
        assert!(matches!(read_srg1(&p), Err(Error::Format(_))));
        assert!(read_srs1(&p).is_err());
    }
}
