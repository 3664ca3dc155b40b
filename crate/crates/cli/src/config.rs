//! Run configuration and its validation.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shearad::cone_frame::{build_partition, ConeWeight, Mode};
use shearad::corpus::SignalKind;
use shearad::export::ExportFormat;
use shearad::shearlet::{DiagonalRule, Route, ShearScaleGrid, ShearletParams, ShearletSystem};
use shearad::{Error, Grid1D, PositionRead, Result};

/// Published JSON schema of [`RunConfig`].
#[cfg(test)]
pub const SCHEMA: &str = include_str!("../schema/run_config.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Samples per axis.
    pub n: usize,
    /// Physical side length.
    pub extent: f64,
    /// Nodes on `v in [-1, 1]`; wider grids keep the same step.
    pub n_v: usize,
    pub n_s: usize,
    /// Scales per sign.
    pub n_a: usize,
    pub a_min: f64,
    /// `V` for the horizontal-only low-pass integral.
    pub v_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 128,
            extent: 16.0,
            n_v: 129,
            n_s: 33,
            n_a: 11,
            a_min: 1.0 / 32.0,
            v_max: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub smoothness: u32,
    pub half_width: f64,
    /// Angular overlap of the smooth partition.
    pub epsilon: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let p = ShearletParams::default();
        Self {
            tau_lo: p.tau_lo,
            tau_hi: p.tau_hi,
            smoothness: p.smoothness,
            half_width: p.half_width,
            epsilon: PI / 16.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowpassChoice {
    #[default]
    Cones,
    Horizontal,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// SRG1 signal used instead of a generated one; for `export`, the
    /// artifact to export.
    pub input: Option<PathBuf>,
    /// SRS1 sinograms for `synth`.
    pub sinogram_h: Option<PathBuf>,
    pub sinogram_v: Option<PathBuf>,
    pub export_format: Option<ExportFormat>,
    /// `[a index, s index]` of the exported tensor slice.
    pub export_slice: Option<[usize; 2]>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub system: SystemConfig,
    pub mode: Mode,
    pub diagonal: DiagonalRule,
    pub signal: SignalKind,
    pub seed: u64,
    pub read: PositionRead,
    pub lowpass: LowpassChoice,
    /// Route of the `shearlet` command.
    pub route: Route,
    /// Also compare the unitary-Radon route in `compare`.
    pub include_q_route: bool,
    pub io: IoConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            system: SystemConfig::default(),
            mode: Mode::Smooth,
            diagonal: DiagonalRule::Split,
            signal: SignalKind::Gaussian,
            seed: 0,
            read: PositionRead::Spectral,
            lowpass: LowpassChoice::Cones,
            route: Route::Direct,
            include_q_route: false,
            io: IoConfig::default(),
        }
    }
}

fn bad(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks matching the published schema.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(8..=4096).contains(&g.n) || !g.n.is_power_of_two() {
            return Err(bad(format!("grid.n = {} must be a power of two in [8, 4096]", g.n)));
        }
        if !(g.extent.is_finite() && g.extent > 0.0) {
            return Err(bad(format!("grid.extent = {} must be positive", g.extent)));
        }
        if g.n_v < 3 || g.n_v.is_multiple_of(2) {
            return Err(bad(format!("grid.n_v = {} must be odd and >= 3", g.n_v)));
        }
        if g.n_s < 3 || g.n_s.is_multiple_of(2) {
            return Err(bad(format!("grid.n_s = {} must be odd and >= 3", g.n_s)));
        }
        if !(2..=64).contains(&g.n_a) {
            return Err(bad(format!("grid.n_a = {} must lie in [2, 64]", g.n_a)));
        }
        if !(g.a_min > 0.0 && g.a_min < 1.0) {
            return Err(bad(format!("grid.a_min = {} must lie in (0, 1)", g.a_min)));
        }
        if !(g.v_max.is_finite() && g.v_max >= 1.0) {
            return Err(bad(format!("grid.v_max = {} must be >= 1", g.v_max)));
        }
        let s = &self.system;
        if !(s.tau_lo > 0.0 && s.tau_hi > s.tau_lo && s.tau_hi.is_finite()) {
            return Err(bad(format!("system band [{}, {}] invalid", s.tau_lo, s.tau_hi)));
        }
        if s.smoothness > 3 {
            return Err(bad(format!("system.smoothness = {} must be <= 3", s.smoothness)));
        }
        if !(s.half_width > 0.0 && s.half_width <= 1.0) {
            return Err(bad(format!("system.half_width = {} must lie in (0, 1]", s.half_width)));
        }
        if !(s.epsilon > 0.0 && s.epsilon < PI / 4.0) {
            return Err(bad(format!("system.epsilon = {} must lie in (0, pi/4)", s.epsilon)));
        }
        if let PositionRead::Linear { oversample } = self.read {
            if oversample == 0 {
                return Err(bad("read.oversample must be >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn signal_grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.n, self.grid.extent)
    }

    pub fn system(&self) -> Result<ShearletSystem> {
        ShearletSystem::build(&ShearletParams {
            tau_lo: self.system.tau_lo,
            tau_hi: self.system.tau_hi,
            smoothness: self.system.smoothness,
            half_width: self.system.half_width,
        })
    }

    pub fn shear_grid(&self) -> Result<ShearScaleGrid> {
        ShearScaleGrid::new(self.grid.n_s, self.grid.a_min, self.grid.n_a)
    }

    pub fn weights(&self) -> Result<ConeWeight> {
        Ok(match self.mode {
            Mode::Sharp => ConeWeight::Sharp { rule: self.diagonal },
            Mode::Smooth => ConeWeight::Smooth {
                partition: build_partition(self.system.epsilon)?,
            },
        })
    }

    pub fn dv(&self) -> f64 {
        2.0 / (self.grid.n_v - 1) as f64
    }

    pub fn out_dir(&self) -> PathBuf {
        self.io.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
