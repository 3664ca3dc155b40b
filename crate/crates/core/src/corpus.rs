//! Test signals with closed-form spectra and Radon transforms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, SampledSignal2D};
use crate::radon::Orientation;

/// `A exp(-pi ((x - c_x)^2 / w_x^2 + (y - c_y)^2 / w_y^2)) e^{2 pi i k.x}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianAtom {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub width: [f64; 2],
    pub frequency: [f64; 2],
}

impl GaussianAtom {
    pub fn isotropic(amplitude: f64, center: [f64; 2], width: f64) -> Self {
        Self {
            amplitude,
            center,
            width: [width, width],
            frequency: [0.0, 0.0],
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let [cx, cy] = self.center;
        let [wx, wy] = self.width;
        let [kx, ky] = self.frequency;
        let e = -PI * (((x - cx) / wx).powi(2) + ((y - cy) / wy).powi(2));
        Complex64::from_polar(self.amplitude * e.exp(), 2.0 * PI * (kx * x + ky * y))
    }

    pub fn spectrum(&self, xi1: f64, xi2: f64) -> Complex64 {
        let [cx, cy] = self.center;
        let [wx, wy] = self.width;
        let [kx, ky] = self.frequency;
        let (u1, u2) = (xi1 - kx, xi2 - ky);
        let mag = self.amplitude * wx * wy * (-PI * ((wx * u1).powi(2) + (wy * u2).powi(2))).exp();
        Complex64::from_polar(mag, -2.0 * PI * (u1 * cx + u2 * cy))
    }

    fn swapped(&self) -> Self {
        Self {
            amplitude: self.amplitude,
            center: [self.center[1], self.center[0]],
            width: [self.width[1], self.width[0]],
            frequency: [self.frequency[1], self.frequency[0]],
        }
    }

    /// `R f(v, t) = int f(t - v y, y) dy`.
    fn radon_h(&self, v: f64, t: f64) -> Complex64 {
        let [cx, cy] = self.center;
        let [wx, wy] = self.width;
        let [kx, ky] = self.frequency;
        let (a2, b2) = (wx * wx, wy * wy);
        let alpha = a2 + b2 * v * v;
        let beta = a2 * kx + b2 * v * ky;
        let gamma = a2 * kx * kx + b2 * ky * ky;
        let z = Complex64::new(beta, t - (cx + v * cy));
        let pre = self.amplitude * wx * wy / alpha.sqrt() * (-PI * gamma).exp();
        (z * z * (PI / alpha)).exp() * Complex64::from_polar(pre, 2.0 * PI * (kx * cx + ky * cy))
    }

    pub fn radon(&self, o: Orientation, v: f64, t: f64) -> Complex64 {
        match o {
            Orientation::Horizontal => self.radon_h(v, t),
            Orientation::Vertical => self.swapped().radon_h(v, t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    Gaussian,
    Box,
    Ridge,
    TwoBumps,
    RandomBandlimited,
}

impl SignalKind {
    pub const ALL: [SignalKind; 5] = [
        SignalKind::Gaussian,
        SignalKind::Box,
        SignalKind::Ridge,
        SignalKind::TwoBumps,
        SignalKind::RandomBandlimited,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::Gaussian => "gaussian",
            SignalKind::Box => "box",
            SignalKind::Ridge => "ridge",
            SignalKind::TwoBumps => "two-bumps",
            SignalKind::RandomBandlimited => "random-bandlimited",
        }
    }

    /// Smooth and effectively band-limited on the default grids.
    pub fn is_smooth(self) -> bool {
        self != SignalKind::Box
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SignalKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown signal kind '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Analytic {
    Atoms {
        atoms: Vec<GaussianAtom>,
    },
    /// Indicator of `[-h, h]^2`, `1/2` on edges and `1/4` at corners.
    Square {
        half: f64,
    },
}

/// A corpus signal with its closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSignal {
    pub kind: SignalKind,
    pub analytic: Analytic,
}

fn edge(d: f64) -> f64 {
    if d < 0.0 {
        1.0
    } else if d == 0.0 {
        0.5
    } else {
        0.0
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

impl TestSignal {
    pub fn new(kind: SignalKind, seed: u64) -> Self {
        let analytic = match kind {
            SignalKind::Gaussian => Analytic::Atoms {
                atoms: vec![GaussianAtom::isotropic(1.0, [0.0, 0.0], 1.0)],
            },
            SignalKind::Box => Analytic::Square { half: 0.5 },
            SignalKind::Ridge => Analytic::Atoms {
                atoms: vec![GaussianAtom {
                    amplitude: 1.0,
                    center: [0.0, 0.0],
                    width: [3.5, 0.5],
                    frequency: [0.0, 0.0],
                }],
            },
            SignalKind::TwoBumps => Analytic::Atoms {
                atoms: vec![
                    GaussianAtom::isotropic(1.0, [-2.0, 1.0], 0.8),
                    GaussianAtom {
                        amplitude: 0.7,
                        center: [2.0, -1.5],
                        width: [0.6, 1.0],
                        frequency: [0.5, 0.0],
                    },
                ],
            },
            SignalKind::RandomBandlimited => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let atoms = (0..6)
                    .map(|_| GaussianAtom {
                        amplitude: rng.gen_range(0.3..1.0),
                        center: [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                        width: [rng.gen_range(0.6..1.2), rng.gen_range(0.6..1.2)],
                        frequency: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                    })
                    .collect();
                Analytic::Atoms { atoms }
            }
        };
        Self { kind, analytic }
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        match &self.analytic {
            Analytic::Atoms { atoms } => atoms.iter().map(|a| a.eval(x, y)).sum(),
            Analytic::Square { half } => {
                Complex64::new(edge(x.abs() - half) * edge(y.abs() - half), 0.0)
            }
        }
    }

    pub fn spectrum(&self, xi1: f64, xi2: f64) -> Complex64 {
        match &self.analytic {
            Analytic::Atoms { atoms } => atoms.iter().map(|a| a.spectrum(xi1, xi2)).sum(),
            Analytic::Square { half } => {
                let w = 2.0 * half;
                Complex64::new(w * w * sinc(w * xi1) * sinc(w * xi2), 0.0)
            }
        }
    }

    pub fn radon(&self, o: Orientation, v: f64, t: f64) -> Complex64 {
        match &self.analytic {
            Analytic::Atoms { atoms } => atoms.iter().map(|a| a.radon(o, v, t)).sum(),
            // Length of {y in [-h, h] : |t - v y| <= h}; symmetric in the roles.
            Analytic::Square { half } => {
                let h = *half;
                let len = if v == 0.0 {
                    if t.abs() < h {
                        2.0 * h
                    } else {
                        0.0
                    }
                } else {
                    let (p, q) = ((t - h) / v, (t + h) / v);
                    let (lo, hi) = (p.min(q).max(-h), p.max(q).min(h));
                    (hi - lo).max(0.0)
                };
                Complex64::new(len, 0.0)
            }
        }
    }

    pub fn sample(&self, gx: Grid1D, gy: Grid1D) -> SampledSignal2D {
        SampledSignal2D::from_fn(gx, gy, |x, y| self.eval(x, y))
    }

    pub fn norm_sq(&self) -> Option<f64> {
        match &self.analytic {
            Analytic::Atoms { atoms } if atoms.len() == 1 => {
                let a = atoms[0];
                Some(a.amplitude.powi(2) * a.width[0] * a.width[1] / 2.0)
            }
            Analytic::Square { half } => Some((2.0 * half).powi(2)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dft2_forward, Grid1D};

    #[test]
    fn spectra_match_dft() {
        let g = Grid1D::new(256, 16.0).unwrap();
        for kind in [
            SignalKind::Gaussian,
            SignalKind::Ridge,
            SignalKind::TwoBumps,
            SignalKind::RandomBandlimited,
        ] {
            let s = TestSignal::new(kind, 7);
            let spec = dft2_forward(&s.sample(g, g));
            let mut worst = 0.0f64;
            for j in 0..256 {
                for k in 0..256 {
                    let e = spec.get(j, k) - s.spectrum(g.dual_node(j), g.dual_node(k));
                    worst = worst.max(e.norm());
                }
            }
            assert!(worst < 1e-6, "{kind}: {worst}");
        }
    }

    #[test]
    fn radon_matches_line_quadrature() {
        let s = TestSignal::new(SignalKind::TwoBumps, 0);
        for o in [Orientation::Horizontal, Orientation::Vertical] {
            for &(v, t) in &[(0.0, -2.0), (0.5, 1.0), (-0.8, 0.3), (1.3, -2.5)] {
                let n = 20_000;
                let h = 24.0 / n as f64;
                let mut acc = Complex64::default();
                for i in 0..=n {
                    let u = -12.0 + i as f64 * h;
                    let z = match o {
                        Orientation::Horizontal => s.eval(t - v * u, u),
                        Orientation::Vertical => s.eval(u, t - v * u),
                    };
                    acc += z * h;
                }
                assert!((acc - s.radon(o, v, t)).norm() < 1e-10, "{o:?} {v} {t}");
            }
        }
    }

    #[test]
    fn square_radon_and_edges() {
        let s = TestSignal::new(SignalKind::Box, 0);
        assert_eq!(s.eval(0.5, 0.0).re, 0.5);
        assert_eq!(s.eval(0.5, -0.5).re, 0.25);
        assert_eq!(s.radon(Orientation::Horizontal, 0.0, 0.2).re, 1.0);
        assert_eq!(s.radon(Orientation::Horizontal, 0.0, 0.7).re, 0.0);
        // Diagonal lines through the center cross the square over sqrt(2)
        // in arclength, i.e. over the full y range.
        assert!((s.radon(Orientation::Horizontal, 1.0, 0.0).re - 1.0).abs() < 1e-15);
        assert_eq!(s.spectrum(0.0, 0.0).re, 1.0);
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = TestSignal::new(SignalKind::RandomBandlimited, 42);
        let b = TestSignal::new(SignalKind::RandomBandlimited, 42);
        let c = TestSignal::new(SignalKind::RandomBandlimited, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn kinds_round_trip_names() {
        for k in SignalKind::ALL {
            assert_eq!(k.as_str().parse::<SignalKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.as_str())
            );
        }
        assert!("disk".parse::<SignalKind>().is_err());
    }
}
