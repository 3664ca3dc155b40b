//! Angular partition, cone weights, the shearlet energy kernel and the
//! low-pass window that completes the cone-adapted system.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    dft1_inverse, dft2_forward, dft2_inverse, Grid1D, QuadratureRule, SampledSignal2D, Spectrum2D,
};
use crate::par::{map_range, Execution};
use crate::radon::Orientation;
use crate::shearlet::{cone_indicator, DiagonalRule, ShearScaleGrid, ShearletSystem};

/// Even partition `phi^2 + phi_v^2 = 1` on the circle, switching over the
/// arcs `|theta'| in (pi/4 - eps, pi/4 + eps)` where `theta'` is the angle
/// folded into `[0, pi/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularPartition {
    pub epsilon: f64,
}

fn smoothstep5(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

impl AngularPartition {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < PI / 4.0) {
            return Err(Error::InvalidParameter(format!(
                "partition margin {epsilon} outside (0, pi/4)"
            )));
        }
        Ok(Self { epsilon })
    }

    fn step(&self, theta: f64) -> f64 {
        let t = theta.abs() % PI;
        let d = t.min(PI - t);
        smoothstep5((d - (PI / 4.0 - self.epsilon)) / (2.0 * self.epsilon))
    }

    pub fn phi(&self, theta: f64) -> f64 {
        let s = self.step(theta);
        if s >= 1.0 {
            0.0
        } else if s <= 0.0 {
            1.0
        } else {
            (PI / 2.0 * s).cos()
        }
    }

    pub fn phi_v(&self, theta: f64) -> f64 {
        let s = self.step(theta);
        if s >= 1.0 {
            1.0
        } else if s <= 0.0 {
            0.0
        } else {
            (PI / 2.0 * s).sin()
        }
    }

    /// `tan(pi/4 + eps)`, the largest `|v|` where the horizontal weight lives.
    pub fn reach(&self) -> f64 {
        (PI / 4.0 + self.epsilon).tan()
    }

    /// `Phi(xi)` or `Phi^v(xi)`; zero at the origin.
    pub fn cone_weight(&self, cone: Orientation, xi1: f64, xi2: f64) -> f64 {
        if xi1 == 0.0 && xi2 == 0.0 {
            return 0.0;
        }
        let th = xi2.atan2(xi1);
        match cone {
            Orientation::Horizontal => self.phi(th),
            Orientation::Vertical => self.phi_v(th),
        }
    }
}

pub fn build_partition(epsilon: f64) -> Result<AngularPartition> {
    AngularPartition::new(epsilon)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sharp,
    Smooth,
}

/// Frequency weights attached to each cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeWeight {
    Sharp { rule: DiagonalRule },
    Smooth { partition: AngularPartition },
}

impl ConeWeight {
    pub fn mode(&self) -> Mode {
        match self {
            ConeWeight::Sharp { .. } => Mode::Sharp,
            ConeWeight::Smooth { .. } => Mode::Smooth,
        }
    }

    /// Multiplier applied to `F f` before analysis: `chi_C` or `Phi`.
    pub fn analysis(&self, cone: Orientation, xi1: f64, xi2: f64) -> f64 {
        match self {
            ConeWeight::Sharp { rule } => cone_indicator(cone, xi1, xi2, *rule),
            ConeWeight::Smooth { partition } => partition.cone_weight(cone, xi1, xi2),
        }
    }

    /// Weight of the cone kernel in the window identity: `chi_C` or `Phi^2`.
    pub fn window(&self, cone: Orientation, xi1: f64, xi2: f64) -> f64 {
        match self {
            ConeWeight::Sharp { rule } => cone_indicator(cone, xi1, xi2, *rule),
            ConeWeight::Smooth { partition } => partition.cone_weight(cone, xi1, xi2).powi(2),
        }
    }

    /// Multiplier applied to the synthesized cone part: the closed cone
    /// indicator or `Phi`.
    pub fn synthesis(&self, cone: Orientation, xi1: f64, xi2: f64) -> f64 {
        match self {
            ConeWeight::Sharp { .. } => cone_indicator(cone, xi1, xi2, DiagonalRule::Both),
            ConeWeight::Smooth { partition } => partition.cone_weight(cone, xi1, xi2),
        }
    }

    /// Largest `|v|` the cone's sinogram rows must reach.
    pub fn v_reach(&self) -> f64 {
        match self {
            ConeWeight::Sharp { .. } => 1.0,
            ConeWeight::Smooth { partition } => partition.reach(),
        }
    }
}

/// `sum_{s,a} w_s w_a |F psi(M_{s,a}^t xi)|^2` for the measure
/// `ds da / |a|^(3/2)`.
pub fn shearlet_energy_kernel(
    sys: &ShearletSystem,
    grid: &ShearScaleGrid,
    xi1: f64,
    xi2: f64,
    variant: Orientation,
) -> f64 {
    let (u, w) = match variant {
        Orientation::Horizontal => (xi1, xi2),
        Orientation::Vertical => (xi2, xi1),
    };
    if u == 0.0 {
        return 0.0;
    }
    let ratio = w / u;
    let mut total = 0.0;
    for (ia, &a) in grid.a.scales.iter().enumerate() {
        let p = sys.psi1.eval(a * u);
        if p == 0.0 {
            continue;
        }
        let r = a.abs().sqrt();
        let mut inner = 0.0;
        for (&s, &ws) in grid.s.nodes.iter().zip(&grid.s.weights) {
            let q = sys.phi2.eval((ratio - s) / r);
            inner += ws * q * q;
        }
        total += grid.a.weight(ia, 1.5) * p * p * inner;
    }
    total
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClampStats {
    /// Grid nodes where `z < 0`.
    pub count: usize,
    /// Largest `-z` over those nodes.
    pub depth: f64,
}

pub const CLAMP_LIMIT: f64 = 1e-2;

/// `F g = sqrt(max(z, 0))` with
/// `z = 1 - W_C K_h - W_{C^v} K_v`, sampled on a dual grid and evaluable
/// anywhere.
#[derive(Clone, Debug)]
pub struct LowpassWindow {
    pub weights: ConeWeight,
    pub system: ShearletSystem,
    pub grid: ShearScaleGrid,
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    pub g_hat: Vec<f64>,
    pub z: Vec<f64>,
    pub clamp: ClampStats,
}

impl LowpassWindow {
    pub fn z_at(&self, xi1: f64, xi2: f64) -> f64 {
        z_value(&self.system, &self.grid, &self.weights, xi1, xi2)
    }

    pub fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        self.z_at(xi1, xi2).max(0.0).sqrt()
    }

    pub fn mode(&self) -> Mode {
        self.weights.mode()
    }

    pub fn spectrum(&self) -> Spectrum2D {
        Spectrum2D::new(
            self.grid_x,
            self.grid_y,
            self.g_hat.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
        .expect("window shape")
    }

    /// Largest `|g^2 + W_C K_h + W_{C^v} K_v - 1|` over non-clamped nodes,
    /// with the kernels integrated on a shear-scale grid refined `refine`
    /// times in both `s` and `log |a|`.
    pub fn residual_max(&self, refine: usize) -> Result<f64> {
        let r = refine.max(1);
        let fine = ShearScaleGrid::new(
            r * (self.grid.s.len() - 1) + 1,
            self.grid.a.a_min,
            r * (self.grid.a.per_sign - 1) + 1,
        )?;
        let ny = self.grid_y.n();
        let rows = map_range(Execution::Parallel, self.grid_x.n(), |j| {
            let x1 = self.grid_x.dual_node(j);
            let mut worst = 0.0f64;
            for k in 0..ny {
                let idx = j * ny + k;
                if self.z[idx] < 0.0 {
                    continue;
                }
                let x2 = self.grid_y.dual_node(k);
                let mut covered = 0.0;
                if x1 != 0.0 || x2 != 0.0 {
                    for cone in [Orientation::Horizontal, Orientation::Vertical] {
                        let w = self.weights.window(cone, x1, x2);
                        if w != 0.0 {
                            covered +=
                                w * shearlet_energy_kernel(&self.system, &fine, x1, x2, cone);
                        }
                    }
                }
                worst = worst.max((self.g_hat[idx].powi(2) + covered - 1.0).abs());
            }
            worst
        });
        Ok(rows.into_iter().fold(0.0, f64::max))
    }
}

fn z_value(sys: &ShearletSystem, grid: &ShearScaleGrid, w: &ConeWeight, xi1: f64, xi2: f64) -> f64 {
    if xi1 == 0.0 && xi2 == 0.0 {
        return 1.0;
    }
    let mut z = 1.0;
    for cone in [Orientation::Horizontal, Orientation::Vertical] {
        let wc = w.window(cone, xi1, xi2);
        if wc != 0.0 {
            z -= wc * shearlet_energy_kernel(sys, grid, xi1, xi2, cone);
        }
    }
    z
}

/// Sample the window on the dual grid of `grid_x x grid_y`. Fails when any
/// node needs clamping deeper than [`CLAMP_LIMIT`].
pub fn build_lowpass(
    sys: &ShearletSystem,
    grid: &ShearScaleGrid,
    weights: ConeWeight,
    grid_x: Grid1D,
    grid_y: Grid1D,
    exec: Execution,
) -> Result<LowpassWindow> {
    let ny = grid_y.n();
    let rows = map_range(exec, grid_x.n(), |j| {
        let x1 = grid_x.dual_node(j);
        (0..ny)
            .map(|k| z_value(sys, grid, &weights, x1, grid_y.dual_node(k)))
            .collect::<Vec<_>>()
    });
    let z: Vec<f64> = rows.concat();
    let mut clamp = ClampStats::default();
    for &v in &z {
        if v < 0.0 {
            clamp.count += 1;
            clamp.depth = clamp.depth.max(-v);
        }
    }
    if clamp.depth > CLAMP_LIMIT {
        return Err(Error::ClampTooDeep {
            depth: clamp.depth,
            count: clamp.count,
            limit: CLAMP_LIMIT,
        });
    }
    let g_hat = z.iter().map(|&v| v.max(0.0).sqrt()).collect();
    Ok(LowpassWindow {
        weights,
        system: sys.clone(),
        grid: grid.clone(),
        grid_x,
        grid_y,
        g_hat,
        z,
        clamp,
    })
}

/// `L f` (`F(Lf) = Phi F f`) or `L^v f`.
pub fn apply_l(
    f: &SampledSignal2D,
    partition: &AngularPartition,
    which: Orientation,
) -> SampledSignal2D {
    let mut s = dft2_forward(f);
    s.apply_weight(|a, b| partition.cone_weight(which, a, b));
    dft2_inverse(&s)
}

/// Rows `F zeta(v, .)(tau) = |tau| F g(tau, tau v)` (horizontal) or
/// `|tau| F g(tau v, tau)` (vertical) on the dual `t` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationKernel {
    pub orientation: Orientation,
    pub v: QuadratureRule,
    pub t: Grid1D,
    pub spectra: Vec<f64>,
    /// `F g(0, 0)`, shared by every row at `tau = 0`.
    pub origin: f64,
}

impl TranslationKernel {
    pub fn spectrum_row(&self, i: usize) -> &[f64] {
        let n = self.t.n();
        &self.spectra[i * n..(i + 1) * n]
    }

    /// `zeta(v_i, .)` on the `t` grid.
    pub fn row_spatial(&self, i: usize) -> Vec<Complex64> {
        let s: Vec<Complex64> = self
            .spectrum_row(i)
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        dft1_inverse(&self.t, &s)
    }
}

pub fn build_translation_kernel(
    g: &LowpassWindow,
    v: &QuadratureRule,
    t: &Grid1D,
    orientation: Orientation,
    exec: Execution,
) -> TranslationKernel {
    let nt = t.n();
    let rows = map_range(exec, v.len(), |i| {
        let vi = v.nodes[i];
        (0..nt)
            .map(|m| {
                let tau = t.dual_node(m);
                if tau == 0.0 {
                    return 0.0;
                }
                let gv = match orientation {
                    Orientation::Horizontal => g.eval(tau, tau * vi),
                    Orientation::Vertical => g.eval(tau * vi, tau),
                };
                tau.abs() * gv
            })
            .collect::<Vec<_>>()
    });
    TranslationKernel {
        orientation,
        v: v.clone(),
        t: *t,
        spectra: rows.concat(),
        origin: g.eval(0.0, 0.0),
    }
}
