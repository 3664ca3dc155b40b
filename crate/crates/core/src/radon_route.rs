//! Shearlet and low-pass coefficients from sinograms alone, the energy
//! identities of the cone-adapted system, and synthesis from sinogram data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cone_frame::{
    build_translation_kernel, shearlet_energy_kernel, ClampStats, ConeWeight, LowpassWindow, Mode,
    TranslationKernel,
};
use crate::error::{Error, Result};
use crate::grid::{
    dft2_forward, dft2_inverse, same_spacing, Grid1D, QuadratureRule, SampledSignal2D, Spectrum2D,
};
use crate::par::{map_range, Execution};
use crate::radon::{radon_slice, Orientation, Sinogram};
use crate::shearlet::{
    BankRoute, CoefficientTensor, Route, RouteStats, ShearScaleGrid, ShearletSystem,
};
use crate::vquad::{self, PositionRead, RowBank};

/// Everything the sinogram route needs. Holds no 2D signal.
#[derive(Clone, Debug)]
pub struct RadonRouteInputs {
    pub sinogram_h: Sinogram,
    pub sinogram_v: Sinogram,
    pub system: ShearletSystem,
    pub grid: ShearScaleGrid,
    pub window: LowpassWindow,
    pub kernel_h: TranslationKernel,
    pub kernel_v: TranslationKernel,
    /// Translation grids of the output coefficients.
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    pub read: PositionRead,
}

impl RadonRouteInputs {
    /// Checks slot orientations and builds the translation kernels on each
    /// sinogram's own `(v, t)` grid.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sinogram_h: Sinogram,
        sinogram_v: Sinogram,
        system: ShearletSystem,
        grid: ShearScaleGrid,
        window: LowpassWindow,
        grid_x: Grid1D,
        grid_y: Grid1D,
        read: PositionRead,
        exec: Execution,
    ) -> Result<Self> {
        if sinogram_h.orientation() != Orientation::Horizontal {
            return Err(Error::InvalidParameter(
                "horizontal slot holds a vertical sinogram".into(),
            ));
        }
        if sinogram_v.orientation() != Orientation::Vertical {
            return Err(Error::InvalidParameter(
                "vertical slot holds a horizontal sinogram".into(),
            ));
        }
        let kernel_h = build_translation_kernel(
            &window,
            sinogram_h.v(),
            sinogram_h.t(),
            Orientation::Horizontal,
            exec,
        );
        let kernel_v = build_translation_kernel(
            &window,
            sinogram_v.v(),
            sinogram_v.t(),
            Orientation::Vertical,
            exec,
        );
        Ok(Self {
            sinogram_h,
            sinogram_v,
            system,
            grid,
            window,
            kernel_h,
            kernel_v,
            grid_x,
            grid_y,
            read,
        })
    }

    pub fn weights(&self) -> ConeWeight {
        self.window.weights
    }

    pub fn sinogram(&self, o: Orientation) -> &Sinogram {
        match o {
            Orientation::Horizontal => &self.sinogram_h,
            Orientation::Vertical => &self.sinogram_v,
        }
    }

    pub fn kernel(&self, o: Orientation) -> &TranslationKernel {
        match o {
            Orientation::Horizontal => &self.kernel_h,
            Orientation::Vertical => &self.kernel_v,
        }
    }
}

/// `v` grid with step `dv` covering `[-reach, reach]`, with `+-1` on nodes.
pub fn default_v_grid(reach: f64, dv: f64) -> Result<QuadratureRule> {
    if !(dv > 0.0 && reach >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "v grid reach {reach}, step {dv}"
        )));
    }
    let half = (reach / dv).ceil() as usize;
    QuadratureRule::trapezoid(-(half as f64) * dv, half as f64 * dv, 2 * half + 1)
}

/// Both sinograms of `f` on a common `v` grid; the `t` grid is the signal
/// grid along the line-normal axis, padded twice.
pub fn sinograms_of(
    f: &SampledSignal2D,
    v: &QuadratureRule,
    exec: Execution,
) -> Result<(Sinogram, Sinogram)> {
    let th = f.grid_x().padded(2)?;
    let tv = f.grid_y().padded(2)?;
    Ok((
        radon_slice(f, Orientation::Horizontal, v, &th, exec)?,
        radon_slice(f, Orientation::Vertical, v, &tv, exec)?,
    ))
}

fn route<'a>(
    inputs: &'a RadonRouteInputs,
    variant: Orientation,
    spectra: &'a [Complex64],
    nodes: &'a [(usize, f64)],
    extra: &'a (dyn Fn(f64) -> f64 + Sync),
) -> BankRoute<'a> {
    let sino = inputs.sinogram(variant);
    BankRoute {
        bank: RowBank {
            v: &sino.v().nodes,
            t: *sino.t(),
            spectra,
        },
        sys: &inputs.system,
        grid: &inputs.grid,
        variant,
        gx: inputs.grid_x,
        gy: inputs.grid_y,
        nodes,
        extra,
        profile: &inputs.system.chi1,
        power: -0.75,
        read: inputs.read,
    }
}

/// v-nodes and angular weight of one cone for the configured weights.
struct ConePlan {
    nodes: Vec<(usize, f64)>,
    extra: Box<dyn Fn(f64) -> f64 + Sync>,
}

fn cone_plan(inputs: &RadonRouteInputs, variant: Orientation) -> Result<ConePlan> {
    let v = inputs.sinogram(variant).v();
    match inputs.weights() {
        ConeWeight::Sharp { .. } => Ok(ConePlan {
            nodes: v.restrict(-1.0, 1.0)?,
            extra: Box::new(|_| 1.0),
        }),
        ConeWeight::Smooth { partition } => {
            let reach = partition.reach();
            if v.lo > -reach || v.hi < reach {
                return Err(Error::Truncation(format!(
                    "v grid [{}, {}] narrower than the angular weight support [-{reach}, {reach}]",
                    v.lo, v.hi
                )));
            }
            let extra: Box<dyn Fn(f64) -> f64 + Sync> = match variant {
                Orientation::Horizontal => Box::new(move |v: f64| partition.phi(v.atan())),
                Orientation::Vertical => Box::new(move |v: f64| {
                    if v == 0.0 {
                        1.0
                    } else {
                        partition.phi_v((1.0 / v).atan())
                    }
                }),
            };
            Ok(ConePlan {
                nodes: v.weights.iter().copied().enumerate().collect(),
                extra,
            })
        }
    }
}

fn check_sinogram(inputs: &RadonRouteInputs, variant: Orientation) -> Result<()> {
    let sino = inputs.sinogram(variant);
    if sino.orientation() != variant {
        return Err(Error::InvalidParameter(format!(
            "{} coefficients need a {} sinogram",
            variant.as_str(),
            variant.as_str()
        )));
    }
    Ok(())
}

/// Sharp-cone coefficients
/// `|a|^(-3/4) int_{-1}^{1} W_{chi1}(R f(v, .))(p + v q, a) phi2((v - s)/|a|^(1/2)) dv`.
pub fn cone_coeffs_from_radon(
    inputs: &RadonRouteInputs,
    variant: Orientation,
    exec: Execution,
) -> Result<(CoefficientTensor, RouteStats)> {
    check_sinogram(inputs, variant)?;
    let sino = inputs.sinogram(variant);
    let nodes = sino.v().restrict(-1.0, 1.0)?;
    let spectra = sino.row_spectra(exec);
    route(inputs, variant, &spectra, &nodes, &|_| 1.0).tensor(Route::RadonRoute, exec)
}

/// Smooth-cone coefficients: the same integrand over the whole `v` grid,
/// weighted by `phi(arctan v)` (horizontal) or `phi^v(arctan(1/v))`.
pub fn smooth_cone_coeffs_from_radon(
    inputs: &RadonRouteInputs,
    variant: Orientation,
    exec: Execution,
) -> Result<(CoefficientTensor, RouteStats)> {
    check_sinogram(inputs, variant)?;
    if inputs.weights().mode() != Mode::Smooth {
        return Err(Error::ModeMismatch(
            "smooth coefficients need smooth cone weights".into(),
        ));
    }
    let plan = cone_plan(inputs, variant)?;
    let spectra = inputs.sinogram(variant).row_spectra(exec);
    route(inputs, variant, &spectra, &plan.nodes, plan.extra.as_ref())
        .tensor(Route::RadonRoute, exec)
}

/// Coefficients of whichever cone system the window was built for.
pub fn mode_coeffs_from_radon(
    inputs: &RadonRouteInputs,
    variant: Orientation,
    exec: Execution,
) -> Result<(CoefficientTensor, RouteStats)> {
    match inputs.weights().mode() {
        Mode::Sharp => cone_coeffs_from_radon(inputs, variant, exec),
        Mode::Smooth => smooth_cone_coeffs_from_radon(inputs, variant, exec),
    }
}

/// How the `v` integral of the low-pass coefficients is discretized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowpassSplit {
    /// Horizontal rows on `[-1, 1]` plus vertical rows on `[-1, 1]`.
    #[default]
    Cones,
    /// Horizontal rows only, on `[-v_max, v_max]`; misses the directions
    /// steeper than `arctan(v_max)`.
    Horizontal { v_max: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowpassCoefficients {
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    /// `<f, T_b g>` with `b` x-major.
    pub values: Vec<Complex64>,
    pub escaped_reads: u64,
}

impl LowpassCoefficients {
    /// `sum_b |c_b|^2 db`.
    pub fn energy(&self) -> f64 {
        let db = self.grid_x.spacing() * self.grid_y.spacing();
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * db
    }
}

/// `int_{lo}^{hi} <R f(v, .), T_{b_p + v b_q} zeta(v, .)> dv` from one
/// sinogram and its kernel.
pub fn lowpass_coeffs_from_radon(
    sinogram: &Sinogram,
    kernel: &TranslationKernel,
    range: (f64, f64),
    grid_x: Grid1D,
    grid_y: Grid1D,
    read: PositionRead,
    exec: Execution,
) -> Result<LowpassCoefficients> {
    if kernel.orientation != sinogram.orientation()
        || kernel.v != *sinogram.v()
        || kernel.t != *sinogram.t()
    {
        return Err(Error::GridMismatch(
            "translation kernel and sinogram grids differ".into(),
        ));
    }
    let nodes = sinogram.v().restrict(range.0, range.1)?;
    let spectra = sinogram.row_spectra(exec);
    let t = *sinogram.t();
    let (nt, ext) = (t.n() as f64, t.extent());
    // Trapezoid sums of `|tau| h(tau)` miss `dtau^2 h(0) / 6` at the kink;
    // the correction enters as a weight on the zero bin.
    let kink = kernel.origin * t.dual_spacing() / 6.0;
    let filter = |i: usize, tau: f64| {
        let m = (tau * ext).round() + nt / 2.0;
        if tau == 0.0 {
            kink
        } else {
            kernel.spectrum_row(i)[m as usize]
        }
    };
    let bank = RowBank {
        v: &sinogram.v().nodes,
        t,
        spectra: &spectra,
    };
    let fo = vquad::field(
        &bank,
        &nodes,
        &filter,
        sinogram.orientation(),
        &grid_x,
        &grid_y,
        read,
    )?;
    Ok(LowpassCoefficients {
        grid_x,
        grid_y,
        values: fo.values,
        escaped_reads: fo.escaped,
    })
}

/// Low-pass coefficients from the route inputs.
pub fn lowpass_from_inputs(
    inputs: &RadonRouteInputs,
    split: LowpassSplit,
    exec: Execution,
) -> Result<LowpassCoefficients> {
    let one = |o: Orientation, range| {
        lowpass_coeffs_from_radon(
            inputs.sinogram(o),
            inputs.kernel(o),
            range,
            inputs.grid_x,
            inputs.grid_y,
            inputs.read,
            exec,
        )
    };
    match split {
        LowpassSplit::Cones => {
            let mut h = one(Orientation::Horizontal, (-1.0, 1.0))?;
            let v = one(Orientation::Vertical, (-1.0, 1.0))?;
            h.values
                .iter_mut()
                .zip(&v.values)
                .for_each(|(a, b)| *a += b);
            h.escaped_reads += v.escaped_reads;
            Ok(h)
        }
        LowpassSplit::Horizontal { v_max } => one(Orientation::Horizontal, (-v_max, v_max)),
    }
}

/// `<f, T_b g>` on `f`'s grid through the spectrum, on a twice padded grid.
pub fn lowpass_coeffs_direct(
    f: &SampledSignal2D,
    window: &LowpassWindow,
) -> Result<LowpassCoefficients> {
    let (gx, gy) = (*f.grid_x(), *f.grid_y());
    let (px, py) = (gx.padded(2)?, gy.padded(2)?);
    let mut spec = dft2_forward(&f.zero_pad(px, py)?);
    spec.apply_weight(|a, b| window.eval(a, b));
    let out = dft2_inverse(&spec).crop(gx, gy)?;
    Ok(LowpassCoefficients {
        grid_x: gx,
        grid_y: gy,
        values: out.into_values(),
        escaped_reads: 0,
    })
}

/// Plancherel forms of the three energy terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyOracles {
    /// `int |F f|^2 (F g)^2`
    pub lowpass: f64,
    /// `int |F f|^2 m_C^2 K_h`
    pub horizontal: f64,
    /// `int |F f|^2 m_{C^v}^2 K_v`
    pub vertical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationInfo {
    pub a_min: f64,
    pub n_a_per_sign: usize,
    pub n_s: usize,
    pub n_v_horizontal: usize,
    pub n_v_vertical: usize,
    pub v_range_horizontal: (f64, f64),
    pub v_range_vertical: (f64, f64),
    pub lowpass_split: LowpassSplit,
    pub escaped_reads: u64,
    pub clamp: ClampStats,
}

/// Terms below this fraction of `|f|^2` are compared in absolute terms.
pub const NEGLIGIBLE_TERM: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub mode: Mode,
    pub term_lowpass: f64,
    pub term_horizontal: f64,
    pub term_vertical: f64,
    pub total: f64,
    pub f_norm_sq: f64,
    pub ratio: f64,
    pub oracles: EnergyOracles,
    pub truncation: TruncationInfo,
}

impl EnergyReport {
    /// Gaps `|term - oracle| / max(oracle, NEGLIGIBLE_TERM * |f|^2)` in the
    /// order lowpass, horizontal, vertical.
    pub fn oracle_gaps(&self) -> [f64; 3] {
        let floor = NEGLIGIBLE_TERM * self.f_norm_sq;
        let gap = |t: f64, o: f64| {
            let d = o.max(floor);
            if d == 0.0 {
                if t == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (t - o).abs() / d
            }
        };
        [
            gap(self.term_lowpass, self.oracles.lowpass),
            gap(self.term_horizontal, self.oracles.horizontal),
            gap(self.term_vertical, self.oracles.vertical),
        ]
    }

    pub fn max_oracle_gap(&self) -> f64 {
        self.oracle_gaps().into_iter().fold(0.0, f64::max)
    }
}

/// `sum |c|^2 db ds da/|a|^3` for one cone, slice by slice.
fn cone_energy(
    inputs: &RadonRouteInputs,
    variant: Orientation,
    exec: Execution,
) -> Result<(f64, u64)> {
    check_sinogram(inputs, variant)?;
    let plan = cone_plan(inputs, variant)?;
    let spectra = inputs.sinogram(variant).row_spectra(exec);
    let r = route(inputs, variant, &spectra, &plan.nodes, plan.extra.as_ref());
    let grid = &inputs.grid;
    let ns = grid.s.len();
    let parts = map_range(exec, grid.n_slices(), |k| {
        r.slice(k).map(|fo| match fo {
            Some(fo) => {
                let e: f64 = fo.values.iter().map(|z| z.norm_sqr()).sum();
                (e * grid.energy_weight(k / ns, k % ns), fo.escaped)
            }
            None => (0.0, 0),
        })
    });
    let db = inputs.grid_x.spacing() * inputs.grid_y.spacing();
    let (mut e, mut esc) = (0.0, 0u64);
    for p in parts {
        let (pe, pesc) = p?;
        e += pe;
        esc += pesc;
    }
    Ok((e * db, esc))
}

fn oracles(f: &SampledSignal2D, inputs: &RadonRouteInputs, exec: Execution) -> EnergyOracles {
    let spec = dft2_forward(f);
    let (gx, gy) = (*spec.grid_x(), *spec.grid_y());
    let ny = gy.n();
    let w = inputs.weights();
    let rows = map_range(exec, gx.n(), |j| {
        let x1 = gx.dual_node(j);
        let mut acc = [0.0; 3];
        for k in 0..ny {
            let x2 = gy.dual_node(k);
            let p = spec.get(j, k).norm_sqr();
            if p == 0.0 {
                continue;
            }
            acc[0] += p * inputs.window.eval(x1, x2).powi(2);
            for (slot, cone) in [(1, Orientation::Horizontal), (2, Orientation::Vertical)] {
                let m = w.analysis(cone, x1, x2);
                if m != 0.0 {
                    acc[slot] += p
                        * m
                        * m
                        * shearlet_energy_kernel(&inputs.system, &inputs.grid, x1, x2, cone);
                }
            }
        }
        acc
    });
    let dxi = gx.dual_spacing() * gy.dual_spacing();
    let mut total = [0.0; 3];
    for r in rows {
        for i in 0..3 {
            total[i] += r[i];
        }
    }
    EnergyOracles {
        lowpass: total[0] * dxi,
        horizontal: total[1] * dxi,
        vertical: total[2] * dxi,
    }
}

/// Three-term energy decomposition of `||f||^2` from the sinograms in
/// `inputs`, with Plancherel oracles computed from `f`.
pub fn energy_identity(
    f: &SampledSignal2D,
    inputs: &RadonRouteInputs,
    mode: Mode,
    split: LowpassSplit,
    exec: Execution,
) -> Result<EnergyReport> {
    if inputs.window.mode() != mode {
        return Err(Error::ModeMismatch(format!(
            "window built for {:?} weights, identity requested for {:?}",
            inputs.window.mode(),
            mode
        )));
    }
    let low = lowpass_from_inputs(inputs, split, exec)?;
    let (eh, xh) = cone_energy(inputs, Orientation::Horizontal, exec)?;
    let (ev, xv) = cone_energy(inputs, Orientation::Vertical, exec)?;
    let term_lowpass = low.energy();
    let total = term_lowpass + eh + ev;
    let f_norm_sq = f.norm_sq();
    let (vh, vv) = (inputs.sinogram_h.v(), inputs.sinogram_v.v());
    Ok(EnergyReport {
        mode,
        term_lowpass,
        term_horizontal: eh,
        term_vertical: ev,
        total,
        f_norm_sq,
        ratio: if f_norm_sq > 0.0 {
            total / f_norm_sq
        } else {
            0.0
        },
        oracles: oracles(f, inputs, exec),
        truncation: TruncationInfo {
            a_min: inputs.grid.a.a_min,
            n_a_per_sign: inputs.grid.a.per_sign,
            n_s: inputs.grid.s.len(),
            n_v_horizontal: vh.len(),
            n_v_vertical: vv.len(),
            v_range_horizontal: (vh.lo, vh.hi),
            v_range_vertical: (vv.lo, vv.hi),
            lowpass_split: split,
            escaped_reads: low.escaped_reads + xh + xv,
            clamp: inputs.window.clamp,
        },
    })
}

/// Reconstruction assembled from radon-route coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub signal: SampledSignal2D,
    pub escaped_reads: u64,
}

const SYNTH_BATCH: usize = 16;

/// `sum_b c_b T_b g db + sum c S_{b,s,a} psi db ds da/|a|^3` over both cones,
/// each cone part multiplied by its synthesis weight, assembled on the
/// dual grid of the translation grids.
pub fn synthesize_from_radon(
    inputs: &RadonRouteInputs,
    split: LowpassSplit,
    exec: Execution,
) -> Result<Synthesis> {
    let (gx, gy) = (inputs.grid_x, inputs.grid_y);
    let (nx, ny) = (gx.n(), gy.n());
    let xi1 = gx.dual_nodes();
    let xi2 = gy.dual_nodes();
    let to_spec = |values: Vec<Complex64>| -> Spectrum2D {
        dft2_forward(&SampledSignal2D::new(gx, gy, values).expect("coefficient slice shape"))
    };

    let low = lowpass_from_inputs(inputs, split, exec)?;
    let mut escaped = low.escaped_reads;
    let lowspec = to_spec(low.values);
    let sampled = same_spacing(&inputs.window.grid_x, &gx)
        && same_spacing(&inputs.window.grid_y, &gy)
        && inputs.window.grid_x.n() == nx
        && inputs.window.grid_y.n() == ny;
    let mut acc: Vec<Complex64> = (0..nx * ny)
        .map(|idx| {
            let g = if sampled {
                inputs.window.g_hat[idx]
            } else {
                inputs.window.eval(xi1[idx / ny], xi2[idx % ny])
            };
            lowspec.values()[idx] * g
        })
        .collect();

    let grid = &inputs.grid;
    let ns = grid.s.len();
    for variant in [Orientation::Horizontal, Orientation::Vertical] {
        check_sinogram(inputs, variant)?;
        let plan = cone_plan(inputs, variant)?;
        let spectra = inputs.sinogram(variant).row_spectra(exec);
        let r = route(inputs, variant, &spectra, &plan.nodes, plan.extra.as_ref());
        let mut cone = vec![Complex64::default(); nx * ny];
        let n_slices = grid.n_slices();
        let mut start = 0;
        while start < n_slices {
            let len = SYNTH_BATCH.min(n_slices - start);
            let parts = map_range(exec, len, |off| -> Result<Option<(Vec<Complex64>, u64)>> {
                let k = start + off;
                let Some(fo) = r.slice(k)? else {
                    return Ok(None);
                };
                let (ia, is) = (k / ns, k % ns);
                let (a, s) = (grid.a.scales[ia], grid.s.nodes[is]);
                let scale = a.abs().powf(0.75) * grid.energy_weight(ia, is);
                let mut spec = to_spec(fo.values).into_values();
                for (idx, z) in spec.iter_mut().enumerate() {
                    let w = inputs
                        .system
                        .window(variant, xi1[idx / ny], xi2[idx % ny], s, a);
                    *z = if w == 0.0 {
                        Complex64::default()
                    } else {
                        *z * (w * scale)
                    };
                }
                Ok(Some((spec, fo.escaped)))
            });
            for p in parts {
                if let Some((spec, e)) = p? {
                    cone.iter_mut().zip(&spec).for_each(|(c, z)| *c += z);
                    escaped += e;
                }
            }
            start += len;
        }
        let w = inputs.weights();
        for (idx, (a, c)) in acc.iter_mut().zip(&cone).enumerate() {
            let m = w.synthesis(variant, xi1[idx / ny], xi2[idx % ny]);
            if m != 0.0 {
                *a += c * m;
            }
        }
    }
    let signal = dft2_inverse(&Spectrum2D::new(gx, gy, acc)?);
    Ok(Synthesis {
        signal,
        escaped_reads: escaped,
    })
}
