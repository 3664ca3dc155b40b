//! Centered sampling grids, sampled signals and their Fourier samples.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};

/// Uniform centered grid `x_k = (k - n/2) * extent / n`.
///
/// The dual grid has the same length with nodes `(m - n/2) / extent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    extent: f64,
}

impl Grid1D {
    /// `n` must be a power of two with `n >= 8`; `extent` finite and positive.
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "length {n} is not a power of two >= 8"
            )));
        }
        if !extent.is_finite() || extent <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "extent {extent} must be positive"
            )));
        }
        Ok(Self { n, extent })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    pub fn dual_spacing(&self) -> f64 {
        1.0 / self.extent
    }

    pub fn dual_node(&self, m: usize) -> f64 {
        (m as f64 - (self.n / 2) as f64) / self.extent
    }

    pub fn dual_nodes(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.dual_node(m)).collect()
    }

    /// Largest frequency represented on the dual grid, `n / (2 extent)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.extent)
    }

    /// Same spacing, `factor` times as many nodes.
    pub fn padded(&self, factor: usize) -> Result<Self> {
        Self::new(self.n * factor, self.extent * factor as f64)
    }

    /// Index offset of this grid inside a larger grid with the same spacing.
    pub fn offset_in(&self, outer: &Grid1D) -> Result<usize> {
        if !same_spacing(self, outer) || outer.n < self.n {
            return Err(Error::GridMismatch(format!(
                "grid (n={}, L={}) does not embed in (n={}, L={})",
                self.n, self.extent, outer.n, outer.extent
            )));
        }
        Ok((outer.n - self.n) / 2)
    }
}

pub(crate) fn same_spacing(a: &Grid1D, b: &Grid1D) -> bool {
    (a.spacing() - b.spacing()).abs() <= 1e-12 * a.spacing()
}

/// Complex samples `f(x_j, y_k)` stored row-major with `y` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal2D {
    grid_x: Grid1D,
    grid_y: Grid1D,
    values: Vec<Complex64>,
}

impl SampledSignal2D {
    pub fn new(grid_x: Grid1D, grid_y: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid_x.n() * grid_y.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}x{} grid",
                values.len(),
                grid_x.n(),
                grid_y.n()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NonFinite("signal samples"));
        }
        Ok(Self {
            grid_x,
            grid_y,
            values,
        })
    }

    pub fn zeros(grid_x: Grid1D, grid_y: Grid1D) -> Self {
        Self {
            grid_x,
            grid_y,
            values: vec![Complex64::default(); grid_x.n() * grid_y.n()],
        }
    }

    pub fn from_fn(grid_x: Grid1D, grid_y: Grid1D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid_x.n() * grid_y.n());
        for j in 0..grid_x.n() {
            let x = grid_x.node(j);
            for k in 0..grid_y.n() {
                values.push(f(x, grid_y.node(k)));
            }
        }
        Self {
            grid_x,
            grid_y,
            values,
        }
    }

    pub fn grid_x(&self) -> &Grid1D {
        &self.grid_x
    }

    pub fn grid_y(&self) -> &Grid1D {
        &self.grid_y
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.grid_y.n() + k]
    }

    /// Signal with the axes swapped, `g(x, y) = f(y, x)`.
    pub fn transpose(&self) -> Self {
        let (nx, ny) = (self.grid_x.n(), self.grid_y.n());
        let mut values = vec![Complex64::default(); nx * ny];
        for j in 0..nx {
            for k in 0..ny {
                values[k * nx + j] = self.values[j * ny + k];
            }
        }
        Self {
            grid_x: self.grid_y,
            grid_y: self.grid_x,
            values,
        }
    }

    /// Zero-extend onto grids with the same spacing and more nodes.
    pub fn zero_pad(&self, gx: Grid1D, gy: Grid1D) -> Result<Self> {
        let ox = self.grid_x.offset_in(&gx)?;
        let oy = self.grid_y.offset_in(&gy)?;
        let mut out = Self::zeros(gx, gy);
        let ny = self.grid_y.n();
        for j in 0..self.grid_x.n() {
            let dst = (j + ox) * gy.n() + oy;
            out.values[dst..dst + ny].copy_from_slice(&self.values[j * ny..(j + 1) * ny]);
        }
        Ok(out)
    }

    /// Central window of a larger signal onto smaller grids.
    pub fn crop(&self, gx: Grid1D, gy: Grid1D) -> Result<Self> {
        let ox = gx.offset_in(&self.grid_x)?;
        let oy = gy.offset_in(&self.grid_y)?;
        let mut values = Vec::with_capacity(gx.n() * gy.n());
        for j in 0..gx.n() {
            let src = (j + ox) * self.grid_y.n() + oy;
            values.extend_from_slice(&self.values[src..src + gy.n()]);
        }
        Ok(Self {
            grid_x: gx,
            grid_y: gy,
            values,
        })
    }

    /// `sum |f|^2 dx dy`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * self.grid_x.spacing()
            * self.grid_y.spacing()
    }
}

/// Samples of the continuous Fourier transform on the dual grid of
/// `grid_x x grid_y`, row-major with `xi_2` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2D {
    grid_x: Grid1D,
    grid_y: Grid1D,
    values: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn new(grid_x: Grid1D, grid_y: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid_x.n() * grid_y.n() {
            return Err(Error::GridMismatch("spectrum size".into()));
        }
        Ok(Self {
            grid_x,
            grid_y,
            values,
        })
    }

    pub fn from_fn(grid_x: Grid1D, grid_y: Grid1D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid_x.n() * grid_y.n());
        for j in 0..grid_x.n() {
            let xi1 = grid_x.dual_node(j);
            for k in 0..grid_y.n() {
                values.push(f(xi1, grid_y.dual_node(k)));
            }
        }
        Self {
            grid_x,
            grid_y,
            values,
        }
    }

    pub fn grid_x(&self) -> &Grid1D {
        &self.grid_x
    }

    pub fn grid_y(&self) -> &Grid1D {
        &self.grid_y
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.grid_y.n() + k]
    }

    /// Multiply each sample by `w(xi_1, xi_2)`.
    pub fn apply_weight(&mut self, w: impl Fn(f64, f64) -> f64) {
        let ny = self.grid_y.n();
        for j in 0..self.grid_x.n() {
            let xi1 = self.grid_x.dual_node(j);
            for k in 0..ny {
                self.values[j * ny + k] *= w(xi1, self.grid_y.dual_node(k));
            }
        }
    }

    /// `sum |F|^2 dxi_1 dxi_2`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * self.grid_x.dual_spacing()
            * self.grid_y.dual_spacing()
    }
}

/// One-dimensional complex samples on a centered grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal1D {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
}

impl Signal1D {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch("signal length".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            grid,
            values: (0..grid.n()).map(|k| f(grid.node(k))).collect(),
        }
    }
}

/// Forward continuous-FT approximation: `F_m = dx sum_k f_k e^{-2 pi i x_k tau_m}`.
pub fn dft1_forward(grid: &Grid1D, values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    dft::centered_in_place(&mut buf, false);
    dft::scale(&mut buf, grid.spacing());
    buf
}

/// Inverse of [`dft1_forward`]: `f_k = (1/L) sum_m F_m e^{2 pi i x_k tau_m}`.
pub fn dft1_inverse(grid: &Grid1D, values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    dft::centered_in_place(&mut buf, true);
    dft::scale(&mut buf, 1.0 / grid.extent());
    buf
}

pub fn dft2_forward(f: &SampledSignal2D) -> Spectrum2D {
    let (gx, gy) = (*f.grid_x(), *f.grid_y());
    let mut values = f.values.clone();
    dft::centered_2d(&mut values, gx.n(), gy.n(), false);
    dft::scale(&mut values, gx.spacing() * gy.spacing());
    Spectrum2D {
        grid_x: gx,
        grid_y: gy,
        values,
    }
}

pub fn dft2_inverse(s: &Spectrum2D) -> SampledSignal2D {
    let (gx, gy) = (*s.grid_x(), *s.grid_y());
    let mut values = s.values.clone();
    dft::centered_2d(&mut values, gx.n(), gy.n(), true);
    dft::scale(&mut values, 1.0 / (gx.extent() * gy.extent()));
    SampledSignal2D {
        grid_x: gx,
        grid_y: gy,
        values,
    }
}

/// Riemann sum `sum f conj(h) dx dy`.
pub fn inner_product(f: &SampledSignal2D, h: &SampledSignal2D) -> Result<Complex64> {
    if f.grid_x != h.grid_x || f.grid_y != h.grid_y {
        return Err(Error::GridMismatch(
            "inner product of signals on different grids".into(),
        ));
    }
    let s: Complex64 = f
        .values
        .iter()
        .zip(&h.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * f.grid_x.spacing() * f.grid_y.spacing())
}

/// `||a - b|| / ||b||` over equal-length sample vectors.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    Trapezoid,
    Midpoint,
}

/// Nodes and weights for a one-dimensional integral over `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Trapezoid rule with `n >= 2` equispaced nodes including both ends.
    pub fn trapezoid(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_interval(lo, hi)?;
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "trapezoid needs >= 2 nodes, got {n}"
            )));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let nodes = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + i as f64 * h })
            .collect();
        let mut weights = vec![h; n];
        weights[0] = h / 2.0;
        weights[n - 1] = h / 2.0;
        Ok(Self {
            kind: QuadratureKind::Trapezoid,
            lo,
            hi,
            nodes,
            weights,
        })
    }

    pub fn midpoint(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_interval(lo, hi)?;
        if n == 0 {
            return Err(Error::Empty("quadrature rule"));
        }
        let h = (hi - lo) / n as f64;
        Ok(Self {
            kind: QuadratureKind::Midpoint,
            lo,
            hi,
            nodes: (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node spacing of an equispaced rule.
    pub fn step(&self) -> f64 {
        match self.kind {
            QuadratureKind::Trapezoid => (self.hi - self.lo) / (self.len() - 1) as f64,
            QuadratureKind::Midpoint => (self.hi - self.lo) / self.len() as f64,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Trapezoid weights for the sub-interval `[lo, hi]` of a trapezoid rule.
    /// Both ends must coincide with nodes.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Vec<(usize, f64)>> {
        let h = self.step();
        let tol = 1e-9 * h;
        let find = |x: f64| self.nodes.iter().position(|&v| (v - x).abs() <= tol);
        let (Some(i0), Some(i1)) = (find(lo), find(hi)) else {
            return Err(Error::Truncation(format!(
                "v-grid [{}, {}] step {h} has no nodes at {lo} and {hi}",
                self.lo, self.hi
            )));
        };
        Ok((i0..=i1)
            .map(|i| {
                let w = if i == i0 || i == i1 { h / 2.0 } else { h };
                (i, w)
            })
            .collect())
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Error::InvalidParameter(format!("interval [{lo}, {hi}]")));
    }
    Ok(())
}
