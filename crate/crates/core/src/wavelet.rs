//! One-dimensional frequency profiles and the continuous wavelet transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dft1_forward, dft1_inverse, Grid1D, Signal1D};
use crate::par::{map_range, Execution};

/// Closed-form shape of a profile before amplitude and ramp are applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Shape {
    /// Smooth band on `tau_lo <= |tau| <= tau_hi`, blended in `ln |tau|`.
    MeyerBand {
        tau_lo: f64,
        tau_hi: f64,
        smoothness: u32,
    },
    /// Raised cosine `(1 + cos(pi u / h)) / 2` on `|u| <= h`.
    Bump { half_width: f64 },
    /// `exp(-pi tau^2)`; not admissible, kept as a negative control.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    None,
}

/// `p(tau) = amplitude * |tau|^ramp * shape(tau)`, real and even.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqProfile1D {
    #[serde(flatten)]
    pub shape: Shape,
    pub amplitude: f64,
    pub ramp: f64,
}

/// Polynomial blends with `nu(0) = 0`, `nu(1) = 1`, `nu(x) + nu(1 - x) = 1`.
fn blend(x: f64, smoothness: u32) -> f64 {
    let x = x.clamp(0.0, 1.0);
    match smoothness {
        0 => x,
        1 => x * x * (3.0 - 2.0 * x),
        2 => x * x * x * (10.0 - 15.0 * x + 6.0 * x * x),
        _ => x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3)),
    }
}

impl Shape {
    pub fn eval(&self, tau: f64) -> f64 {
        match *self {
            Shape::MeyerBand {
                tau_lo,
                tau_hi,
                smoothness,
            } => {
                let t = tau.abs();
                if t <= tau_lo || t >= tau_hi {
                    return 0.0;
                }
                let lambda = (tau_hi / tau_lo).ln() / 2.0;
                let w = (t / (tau_lo * tau_hi).sqrt()).ln();
                if w < 0.0 {
                    (PI / 2.0 * blend((w + lambda) / lambda, smoothness)).sin()
                } else {
                    (PI / 2.0 * blend(w / lambda, smoothness)).cos()
                }
            }
            Shape::Bump { half_width } => {
                if tau.abs() >= half_width {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * tau / half_width).cos())
                }
            }
            Shape::Gaussian => (-PI * tau * tau).exp(),
        }
    }

    /// `(inner, outer)` radii of the support of `|tau|`; outer is infinite
    /// for unbounded shapes.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Shape::MeyerBand { tau_lo, tau_hi, .. } => (tau_lo, tau_hi),
            Shape::Bump { half_width } => (0.0, half_width),
            Shape::Gaussian => (0.0, f64::INFINITY),
        }
    }
}

/// Integrals of `|p|^2` against `1/|tau|`, `|tau|` and `|tau|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub calderon_integral: f64,
    pub moment_1: f64,
    pub moment_2: f64,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.calderon_integral.is_finite()
            && self.calderon_integral > 0.0
            && self.moment_1.is_finite()
            && self.moment_2.is_finite()
    }
}

const QUAD_INTERVALS: usize = 1 << 14;

impl FreqProfile1D {
    pub fn eval(&self, tau: f64) -> f64 {
        let s = self.shape.eval(tau);
        if s == 0.0 {
            return 0.0;
        }
        if self.ramp == 0.0 {
            self.amplitude * s
        } else {
            self.amplitude * tau.abs().powf(self.ramp) * s
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.shape.support()
    }

    pub fn parity(&self) -> Parity {
        Parity::Even
    }

    /// Samples on the dual grid of `grid`.
    pub fn sample_dual(&self, grid: &Grid1D) -> Vec<f64> {
        (0..grid.n())
            .map(|m| self.eval(grid.dual_node(m)))
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitude: self.amplitude * factor,
            ..self.clone()
        }
    }

    /// `int |p(tau)|^2 w(|tau|) dtau` by the trapezoid rule on the support.
    /// Band shapes are integrated in `ln |tau|`.
    pub fn integrate_sq(&self, w: impl Fn(f64) -> f64) -> f64 {
        let n = QUAD_INTERVALS;
        match self.shape {
            Shape::MeyerBand { tau_lo, tau_hi, .. } => {
                let (u0, u1) = (tau_lo.ln(), tau_hi.ln());
                let h = (u1 - u0) / n as f64;
                let s: f64 = (1..n)
                    .map(|i| {
                        let t = (u0 + i as f64 * h).exp();
                        self.eval(t).powi(2) * w(t) * t
                    })
                    .sum();
                2.0 * h * s
            }
            _ => {
                let hi = match self.shape {
                    Shape::Bump { half_width } => half_width,
                    _ => 8.0,
                };
                let h = hi / n as f64;
                let s: f64 = (1..n)
                    .map(|i| {
                        let t = i as f64 * h;
                        self.eval(t).powi(2) * w(t)
                    })
                    .sum();
                let end = 0.5 * self.eval(0.0).powi(2) * w(0.0);
                2.0 * h * (s + if end.is_finite() { end } else { 0.0 })
            }
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.integrate_sq(|_| 1.0)
    }

    pub fn admissibility(&self) -> AdmissibilityReport {
        let (inner, _) = self.support();
        let touches_zero = inner == 0.0 && self.shape.eval(0.0) != 0.0;
        let calderon = if touches_zero && self.ramp <= 0.0 {
            f64::INFINITY
        } else {
            self.integrate_sq(|t| if t == 0.0 { 0.0 } else { 1.0 / t })
        };
        AdmissibilityReport {
            calderon_integral: calderon,
            moment_1: self.integrate_sq(|t| t),
            moment_2: self.integrate_sq(|t| t * t),
        }
    }
}

/// Band profile with unit Calderon integral.
pub fn build_meyer_band_profile(
    tau_lo: f64,
    tau_hi: f64,
    smoothness: u32,
) -> Result<FreqProfile1D> {
    if !(tau_lo > 0.0 && tau_hi > tau_lo && tau_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "band needs 0 < tau_lo < tau_hi, got [{tau_lo}, {tau_hi}]"
        )));
    }
    if smoothness > 3 {
        return Err(Error::InvalidParameter(format!(
            "smoothness {smoothness} > 3"
        )));
    }
    let raw = FreqProfile1D {
        shape: Shape::MeyerBand {
            tau_lo,
            tau_hi,
            smoothness,
        },
        amplitude: 1.0,
        ramp: 0.0,
    };
    let c = raw.admissibility().calderon_integral;
    Ok(raw.scaled(1.0 / c.sqrt()))
}

/// Raised-cosine bump with unit L2 norm.
pub fn build_bump_profile(half_width: f64) -> Result<FreqProfile1D> {
    if !(half_width > 0.0 && half_width <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "half_width {half_width} outside (0, 1]"
        )));
    }
    Ok(FreqProfile1D {
        shape: Shape::Bump { half_width },
        amplitude: (4.0 / (3.0 * half_width)).sqrt(),
        ramp: 0.0,
    })
}

pub fn gaussian_control_profile() -> FreqProfile1D {
    FreqProfile1D {
        shape: Shape::Gaussian,
        amplitude: 1.0,
        ramp: 0.0,
    }
}

/// `(phi1, chi1)` with `phi1 = |tau|^(1/2) psi1` and `chi1 = |tau| psi1`.
pub fn derive_profiles(psi1: &FreqProfile1D) -> (FreqProfile1D, FreqProfile1D) {
    let phi1 = FreqProfile1D {
        ramp: psi1.ramp + 0.5,
        ..psi1.clone()
    };
    let chi1 = FreqProfile1D {
        ramp: psi1.ramp + 1.0,
        ..psi1.clone()
    };
    (phi1, chi1)
}

/// Signed scales with `|a|` log-uniform on `[a_min, 1]`.
///
/// Positive scales come first in ascending order, followed by their
/// negatives. Weights are trapezoid weights in `u = ln |a|`, so
/// `int h(a) da/|a| ~ sum_i w_i h(a_i)` over both signs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    pub a_min: f64,
    pub per_sign: usize,
    pub scales: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl ScaleGrid {
    pub fn new(a_min: f64, per_sign: usize) -> Result<Self> {
        if !(a_min > 0.0 && a_min < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "a_min {a_min} outside (0, 1)"
            )));
        }
        if per_sign < 2 {
            return Err(Error::InvalidParameter(format!(
                "need >= 2 scales per sign, got {per_sign}"
            )));
        }
        let u0 = a_min.ln();
        let du = -u0 / (per_sign - 1) as f64;
        let mut pos: Vec<f64> = (0..per_sign)
            .map(|i| {
                if i == per_sign - 1 {
                    1.0
                } else {
                    (u0 + i as f64 * du).exp()
                }
            })
            .collect();
        pos[0] = a_min;
        let mut w = vec![du; per_sign];
        w[0] = du / 2.0;
        w[per_sign - 1] = du / 2.0;
        let scales = pos.iter().copied().chain(pos.iter().map(|a| -a)).collect();
        let log_weights = w.iter().copied().chain(w.iter().copied()).collect();
        Ok(Self {
            a_min,
            per_sign,
            scales,
            log_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn log_step(&self) -> f64 {
        -self.a_min.ln() / (self.per_sign - 1) as f64
    }

    /// Weight of node `i` for the measure `da / |a|^p`.
    pub fn weight(&self, i: usize, p: f64) -> f64 {
        self.log_weights[i] * self.scales[i].abs().powf(1.0 - p)
    }
}

/// Wavelet coefficients `W_phi g(b, a)` for every scale, positions on `g`'s grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletCoefficients {
    pub grid: Grid1D,
    pub scales: Vec<f64>,
    /// Row-major `(n_scales, n)`.
    pub values: Vec<Complex64>,
}

impl WaveletCoefficients {
    pub fn row(&self, ia: usize) -> &[Complex64] {
        let n = self.grid.n();
        &self.values[ia * n..(ia + 1) * n]
    }
}

/// `<g, W_{b,a} phi>` with `W_{b,a}phi(x) = |a|^(-1/2) phi((x - b)/a)`,
/// evaluated per scale as the inverse transform of
/// `F g(tau) |a|^(1/2) conj(F phi(a tau))`.
pub fn wavelet_transform(
    g: &Signal1D,
    phi: &FreqProfile1D,
    scales: &[f64],
    exec: Execution,
) -> Result<WaveletCoefficients> {
    if scales.iter().any(|&a| a == 0.0 || !a.is_finite()) {
        return Err(Error::InvalidParameter("scale a = 0 in grid".into()));
    }
    let grid = g.grid;
    let spec = dft1_forward(&grid, &g.values);
    let rows = map_range(exec, scales.len(), |ia| {
        let a = scales[ia];
        let r = a.abs().sqrt();
        let prod: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(m, v)| v * (r * phi.eval(a * grid.dual_node(m))))
            .collect();
        dft1_inverse(&grid, &prod)
    });
    Ok(WaveletCoefficients {
        grid,
        scales: scales.to_vec(),
        values: rows.concat(),
    })
}
