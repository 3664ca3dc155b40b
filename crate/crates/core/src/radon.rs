//! Horizontal and vertical affine Radon transforms.
//!
//! The horizontal transform integrates over the lines `x + v y = t`,
//! `R f(v, t) = int f(t - v y, y) dy`; the vertical one over `v x + y = t`.
//! The vertical transform of `f` is the horizontal transform of the
//! transposed signal, and that is how it is computed here.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::grid::{
    dft1_forward, dft1_inverse, same_spacing, Grid1D, QuadratureRule, SampledSignal2D,
};
use crate::par::{map_range, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
        }
    }
}

/// Interpolation along the integration direction in [`radon_spatial`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    Linear,
    /// Keys cubic convolution with `a = -1/2`.
    Cubic,
    /// Interpolating cubic B-spline of the zero-extended samples.
    #[default]
    Spline,
}

/// Radon data on a `(v, t)` grid, row-major with `t` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    orientation: Orientation,
    v: QuadratureRule,
    t: Grid1D,
    values: Vec<Complex64>,
}

impl Sinogram {
    pub fn new(
        orientation: Orientation,
        v: QuadratureRule,
        t: Grid1D,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Empty("v grid"));
        }
        if values.len() != v.len() * t.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} sinogram",
                values.len(),
                v.len(),
                t.n()
            )));
        }
        if values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("sinogram"));
        }
        Ok(Self {
            orientation,
            v,
            t,
            values,
        })
    }

    pub fn zeros(orientation: Orientation, v: QuadratureRule, t: Grid1D) -> Self {
        let len = v.len() * t.n();
        Self {
            orientation,
            v,
            t,
            values: vec![Complex64::default(); len],
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn v(&self) -> &QuadratureRule {
        &self.v
    }

    pub fn t(&self) -> &Grid1D {
        &self.t
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.t.n();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.values[i * self.t.n() + k]
    }

    /// One-dimensional transforms of every row, samples on the dual `t` grid.
    pub fn row_spectra(&self, exec: Execution) -> Vec<Complex64> {
        map_range(exec, self.v.len(), |i| dft1_forward(&self.t, self.row(i))).concat()
    }

    /// Build a sinogram from row spectra by inverse transforms.
    pub fn from_row_spectra(
        orientation: Orientation,
        v: QuadratureRule,
        t: Grid1D,
        spectra: &[Complex64],
        exec: Execution,
    ) -> Result<Self> {
        let n = t.n();
        let rows = map_range(exec, v.len(), |i| {
            dft1_inverse(&t, &spectra[i * n..(i + 1) * n])
        });
        Self::new(orientation, v, t, rows.concat())
    }

    /// Apply a `|tau|^p` multiplier along `t` on every row.
    pub fn apply_multiplier(&self, m: HalfOrderMultiplier, exec: Execution) -> Sinogram {
        let n = self.t.n();
        let rows = map_range(exec, self.v.len(), |i| {
            apply_multiplier_1d(&self.t, &self.values[i * n..(i + 1) * n], m)
        });
        Sinogram {
            orientation: self.orientation,
            v: self.v.clone(),
            t: self.t,
            values: rows.concat(),
        }
    }
}

/// Fourier multiplier `|tau|^p` with `p` in `{1/2, 1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfOrderMultiplier {
    Half,
    One,
    Two,
}

impl HalfOrderMultiplier {
    pub fn exponent(self) -> f64 {
        match self {
            HalfOrderMultiplier::Half => 0.5,
            HalfOrderMultiplier::One => 1.0,
            HalfOrderMultiplier::Two => 2.0,
        }
    }

    pub fn symbol(self, tau: f64) -> f64 {
        if tau == 0.0 {
            0.0
        } else {
            tau.abs().powf(self.exponent())
        }
    }
}

pub fn apply_multiplier_1d(
    grid: &Grid1D,
    values: &[Complex64],
    m: HalfOrderMultiplier,
) -> Vec<Complex64> {
    let mut spec = dft1_forward(grid, values);
    for (k, z) in spec.iter_mut().enumerate() {
        *z *= m.symbol(grid.dual_node(k));
    }
    dft1_inverse(grid, &spec)
}

fn keys(x: f64) -> f64 {
    const A: f64 = -0.5;
    let x = x.abs();
    if x <= 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
    } else {
        0.0
    }
}

/// Read `row` at fractional index `u`, zero outside the samples.
pub(crate) fn interp_at(row: &[Complex64], u: f64, interp: Interp) -> Complex64 {
    let n = row.len() as isize;
    let i0 = u.floor();
    let fr = u - i0;
    let i0 = i0 as isize;
    let at = |i: isize| {
        if i >= 0 && i < n {
            row[i as usize]
        } else {
            Complex64::default()
        }
    };
    match interp {
        Interp::Linear => at(i0) * (1.0 - fr) + at(i0 + 1) * fr,
        Interp::Cubic => {
            at(i0 - 1) * keys(fr + 1.0)
                + at(i0) * keys(fr)
                + at(i0 + 1) * keys(1.0 - fr)
                + at(i0 + 2) * keys(2.0 - fr)
        }
        // Slow path: one prefilter per read.
        Interp::Spline => {
            let c = SplineRow::new(row);
            c.at(u)
        }
    }
}

fn bspline3(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        2.0 / 3.0 - x * x + 0.5 * x * x * x
    } else if x < 2.0 {
        let y = 2.0 - x;
        y * y * y / 6.0
    } else {
        0.0
    }
}

/// Cubic B-spline coefficients of a zero-extended row, kept on a margin of
/// [`SplineRow::PAD`] nodes each side; coefficients further out are below
/// `(2 - sqrt 3)^PAD` of the edge values and dropped.
pub(crate) struct SplineRow {
    coef: Vec<Complex64>,
}

impl SplineRow {
    const PAD: usize = 16;

    pub(crate) fn new(row: &[Complex64]) -> Self {
        let z = 3f64.sqrt() - 2.0;
        let n = row.len() + 2 * Self::PAD;
        let mut c = vec![Complex64::default(); n];
        c[Self::PAD..Self::PAD + row.len()].copy_from_slice(row);
        // Causal pass; zeros on the left start it exactly.
        for k in 1..n {
            let prev = c[k - 1];
            c[k] += prev * z;
        }
        // Anti-causal pass, started from the geometric tail of the zeros on
        // the right.
        c[n - 1] *= -z / (1.0 - z * z);
        for k in (0..n - 1).rev() {
            c[k] = (c[k + 1] - c[k]) * z;
        }
        for v in &mut c {
            *v *= 6.0;
        }
        Self { coef: c }
    }

    /// Value at fractional sample index `u` of the original row.
    pub(crate) fn at(&self, u: f64) -> Complex64 {
        let u = u + Self::PAD as f64;
        let i0 = u.floor();
        let fr = u - i0;
        let i0 = i0 as isize;
        let n = self.coef.len() as isize;
        let mut acc = Complex64::default();
        for (d, w) in [
            (-1, bspline3(fr + 1.0)),
            (0, bspline3(fr)),
            (1, bspline3(1.0 - fr)),
            (2, bspline3(2.0 - fr)),
        ] {
            let i = i0 + d;
            if i >= 0 && i < n {
                acc += self.coef[i as usize] * w;
            }
        }
        acc
    }
}

/// Rows indexed by the line coordinate `q`, entries along `p`, so that the
/// transform is `sum_r dq * f(t - v q_r, q_r)` in both orientations.
fn line_major(f: &SampledSignal2D, orientation: Orientation) -> SampledSignal2D {
    match orientation {
        Orientation::Horizontal => f.transpose(),
        Orientation::Vertical => f.clone(),
    }
}

/// Line-integral quadrature: rows of the grid as nodes, interpolation along
/// the other axis, zero extension outside the signal window.
pub fn radon_spatial(
    f: &SampledSignal2D,
    orientation: Orientation,
    v: &QuadratureRule,
    t: &Grid1D,
    interp: Interp,
    exec: Execution,
) -> Result<Sinogram> {
    if v.is_empty() {
        return Err(Error::Empty("v grid"));
    }
    let src = line_major(f, orientation);
    let (gq, gp) = (*src.grid_x(), *src.grid_y());
    let np = gp.n();
    let (p0, dp, dq) = (gp.node(0), gp.spacing(), gq.spacing());
    let splines: Vec<Option<SplineRow>> = match interp {
        Interp::Spline => (0..gq.n())
            .map(|r| Some(SplineRow::new(&src.values()[r * np..(r + 1) * np])))
            .collect(),
        _ => Vec::new(),
    };
    let rows = map_range(exec, v.len(), |i| {
        let vi = v.nodes[i];
        let mut out = vec![Complex64::default(); t.n()];
        for r in 0..gq.n() {
            let row = &src.values()[r * np..(r + 1) * np];
            if row.iter().all(|z| *z == Complex64::default()) {
                continue;
            }
            let shift = vi * gq.node(r);
            for (k, o) in out.iter_mut().enumerate() {
                let u = (t.node(k) - shift - p0) / dp;
                *o += match splines.get(r) {
                    Some(Some(sp)) => sp.at(u),
                    _ => interp_at(row, u, interp),
                };
            }
        }
        for o in &mut out {
            *o *= dq;
        }
        out
    });
    Sinogram::new(orientation, v.clone(), *t, rows.concat())
}

/// Row spectra `F(R f(v_i, .))(tau_m)` evaluated as exact slices
/// `F f(tau, tau v)` of the band-limited interpolant of the samples.
///
/// The signal is zero-padded to the `t` grid along the integration-normal
/// axis and transformed; the transform along the other axis is a direct
/// trigonometric sum at the off-grid frequencies `tau v`. Frequencies with
/// `|tau v|` above that axis' Nyquist limit are set to zero.
pub fn slice_spectra(
    f: &SampledSignal2D,
    orientation: Orientation,
    v: &QuadratureRule,
    t: &Grid1D,
    exec: Execution,
) -> Result<Vec<Complex64>> {
    if v.is_empty() {
        return Err(Error::Empty("v grid"));
    }
    let src = line_major(f, orientation);
    let (gq, gp) = (*src.grid_x(), *src.grid_y());
    if !same_spacing(&gp, t) || t.n() < gp.n() {
        return Err(Error::GridMismatch(format!(
            "t grid (n={}, L={}) must share the signal spacing and be at least as long",
            t.n(),
            t.extent()
        )));
    }
    let off = gp.offset_in(t)?;
    let (nt, nq, np) = (t.n(), gq.n(), gp.n());
    // g[m][r]: transform along p of row r, at tau_m.
    let cols = map_range(exec, nq, |r| {
        let mut buf = vec![Complex64::default(); nt];
        buf[off..off + np].copy_from_slice(&src.values()[r * np..(r + 1) * np]);
        dft::centered_in_place(&mut buf, false);
        buf
    });
    let mut g = vec![Complex64::default(); nt * nq];
    for (r, col) in cols.iter().enumerate() {
        for (m, z) in col.iter().enumerate() {
            g[m * nq + r] = *z * gp.spacing();
        }
    }
    let (dq, q0, nyq) = (gq.spacing(), gq.node(0), gq.nyquist() * (1.0 + 1e-12));
    let rows = map_range(exec, v.len(), |i| {
        let vi = v.nodes[i];
        (0..nt)
            .map(|m| {
                let w = t.dual_node(m) * vi;
                if w.abs() > nyq {
                    return Complex64::default();
                }
                let step = Complex64::from_polar(1.0, -2.0 * PI * w * dq);
                let mut ph = Complex64::from_polar(1.0, -2.0 * PI * w * q0);
                let mut acc = Complex64::default();
                for z in &g[m * nq..(m + 1) * nq] {
                    acc += z * ph;
                    ph *= step;
                }
                acc * dq
            })
            .collect::<Vec<_>>()
    });
    Ok(rows.concat())
}

/// Radon transform through the slice identity.
pub fn radon_slice(
    f: &SampledSignal2D,
    orientation: Orientation,
    v: &QuadratureRule,
    t: &Grid1D,
    exec: Execution,
) -> Result<Sinogram> {
    let spec = slice_spectra(f, orientation, v, t, exec)?;
    Sinogram::from_row_spectra(orientation, v.clone(), *t, &spec, exec)
}

/// `Q f`: slice spectra times `|tau|^(1/2)`, then one inverse transform.
pub fn unitary_radon(
    f: &SampledSignal2D,
    orientation: Orientation,
    v: &QuadratureRule,
    t: &Grid1D,
    exec: Execution,
) -> Result<Sinogram> {
    let mut spec = slice_spectra(f, orientation, v, t, exec)?;
    let nt = t.n();
    for row in spec.chunks_mut(nt) {
        for (m, z) in row.iter_mut().enumerate() {
            *z *= HalfOrderMultiplier::Half.symbol(t.dual_node(m));
        }
    }
    Sinogram::from_row_spectra(orientation, v.clone(), *t, &spec, exec)
}

/// `T_b f` for a shift `b` that is a whole number of samples on each axis.
pub fn translate(f: &SampledSignal2D, b: [f64; 2]) -> Result<SampledSignal2D> {
    let steps = |b: f64, g: &Grid1D| -> Result<isize> {
        let s = b / g.spacing();
        if (s - s.round()).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "shift {b} is not grid-aligned"
            )));
        }
        Ok(s.round() as isize)
    };
    let (sx, sy) = (steps(b[0], f.grid_x())?, steps(b[1], f.grid_y())?);
    let (nx, ny) = (f.grid_x().n() as isize, f.grid_y().n() as isize);
    let mut out = SampledSignal2D::zeros(*f.grid_x(), *f.grid_y());
    for j in 0..nx {
        for k in 0..ny {
            let (sj, sk) = (j - sx, k - sy);
            if sj >= 0 && sj < nx && sk >= 0 && sk < ny {
                out.values_mut()[(j * ny + k) as usize] = f.get(sj as usize, sk as usize);
            }
        }
    }
    Ok(out)
}

/// `max |R(T_b f)(v, t) - R f(v, t - (b_1 + v b_2))|` over the grid, the
/// shifted read done by cubic spline interpolation in `t`.
pub fn radon_translation_covariance_check(
    f: &SampledSignal2D,
    b: [f64; 2],
    orientation: Orientation,
    v: &QuadratureRule,
    t: &Grid1D,
    exec: Execution,
) -> Result<f64> {
    let shifted = translate(f, b)?;
    let r0 = radon_slice(f, orientation, v, t, exec)?;
    let r1 = radon_slice(&shifted, orientation, v, t, exec)?;
    let (b1, b2) = match orientation {
        Orientation::Horizontal => (b[0], b[1]),
        Orientation::Vertical => (b[1], b[0]),
    };
    let mut worst = 0.0f64;
    for (i, &vi) in v.nodes.iter().enumerate() {
        let shift = b1 + vi * b2;
        let row = SplineRow::new(r0.row(i));
        for k in 0..t.n() {
            let u = (t.node(k) - shift - t.node(0)) / t.spacing();
            let d = (r1.get(i, k) - row.at(u)).norm();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}
