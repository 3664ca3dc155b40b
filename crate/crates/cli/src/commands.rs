//! Subcommand bodies. Each returns a report; artifacts land in `ctx.out`.

use std::path::{Path, PathBuf};

use shearad::cone_frame::{build_lowpass, ConeWeight, LowpassWindow, CLAMP_LIMIT};
use shearad::corpus::TestSignal;
use shearad::export::{read_csv, write_csv, write_pgm, ExportFormat, Table};
use shearad::io::{
    artifact_kind, read_src1, read_srg1, read_srs1, write_src1, write_srg1, write_srs1, ArtifactKind, Domain,
};
use shearad::radon::{radon_spatial, Interp, Orientation, Sinogram};
use shearad::radon_route::{
    default_v_grid, energy_identity, lowpass_coeffs_direct, lowpass_from_inputs, mode_coeffs_from_radon,
    sinograms_of, synthesize_from_radon, LowpassSplit, RadonRouteInputs,
};
use shearad::shearlet::{
    admissibility_constant, cone_indicator, shearlet_direct, shearlet_direct_weighted, shearlet_via_unitary_radon,
    vanishing_moments_check, CoefficientTensor, DirectOptions, Route,
};
use shearad::{relative_l2, Complex64, Error, Execution, Grid1D, Result, SampledSignal2D};

use crate::config::{LowpassChoice, RunConfig};
use crate::report::{Check, Report};

pub const SLICE_ROUTE_TOL: f64 = 1e-3;
pub const CLOSED_FORM_TOL: f64 = 1e-3;
pub const ROUTE_TOL: f64 = 1e-2;
pub const RATIO_BAND: (f64, f64) = (0.95, 1.05);
pub const ORACLE_TOL: f64 = 1e-3;
pub const PARTITION_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-3;
pub const C_PSI_TOL: f64 = 1e-6;
pub const C_PSI_GAP_TOL: f64 = 1e-3;
pub const MOMENT_TOL: f64 = 1e-8;
pub const MOMENT_ORDER: usize = 8;
pub const SYNTH_TOL: f64 = 0.05;

const HV: [Orientation; 2] = [Orientation::Horizontal, Orientation::Vertical];

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub exec: Execution,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn split(&self) -> LowpassSplit {
        match self.cfg.lowpass {
            LowpassChoice::Cones => LowpassSplit::Cones,
            LowpassChoice::Horizontal => LowpassSplit::Horizontal { v_max: self.cfg.grid.v_max },
        }
    }
}

fn suffix(o: Orientation) -> &'static str {
    match o {
        Orientation::Horizontal => "h",
        Orientation::Vertical => "v",
    }
}

struct Source {
    signal: SampledSignal2D,
    analytic: Option<TestSignal>,
}

/// The configured input file, or the configured corpus signal.
fn source(ctx: &Ctx) -> Result<Source> {
    match &ctx.cfg.io.input {
        Some(p) => Ok(Source {
            signal: read_space_signal(p)?,
            analytic: None,
        }),
        None => {
            let g = ctx.cfg.signal_grid()?;
            let t = TestSignal::new(ctx.cfg.signal, ctx.cfg.seed);
            Ok(Source {
                signal: t.sample(g, g),
                analytic: Some(t),
            })
        }
    }
}

fn read_space_signal(p: &Path) -> Result<SampledSignal2D> {
    let (f, domain) = read_srg1(p)?;
    if domain != Domain::Space {
        return Err(Error::InvalidParameter(format!("{} holds a frequency-domain array", p.display())));
    }
    Ok(f)
}

fn window(ctx: &Ctx, gx: Grid1D, gy: Grid1D) -> Result<LowpassWindow> {
    let cfg = &ctx.cfg;
    build_lowpass(&cfg.system()?, &cfg.shear_grid()?, cfg.weights()?, gx, gy, ctx.exec)
}

/// `v` grid wide enough for the cone weights and the low-pass split.
fn sinogram_v_grid(ctx: &Ctx, weights: &ConeWeight) -> Result<shearad::QuadratureRule> {
    let mut reach = weights.v_reach();
    if ctx.cfg.lowpass == LowpassChoice::Horizontal {
        reach = reach.max(ctx.cfg.grid.v_max);
    }
    default_v_grid(reach, ctx.cfg.dv())
}

fn route_inputs(ctx: &Ctx, sh: Sinogram, sv: Sinogram, gx: Grid1D, gy: Grid1D) -> Result<RadonRouteInputs> {
    let cfg = &ctx.cfg;
    let win = window(ctx, gx, gy)?;
    RadonRouteInputs::new(sh, sv, cfg.system()?, cfg.shear_grid()?, win, gx, gy, cfg.read, ctx.exec)
}

fn inputs_from_signal(ctx: &Ctx, f: &SampledSignal2D) -> Result<RadonRouteInputs> {
    let v = sinogram_v_grid(ctx, &ctx.cfg.weights()?)?;
    let (sh, sv) = sinograms_of(f, &v, ctx.exec)?;
    route_inputs(ctx, sh, sv, *f.grid_x(), *f.grid_y())
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn gen(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("gen");
    let g = ctx.cfg.signal_grid()?;
    let t = TestSignal::new(ctx.cfg.signal, ctx.cfg.seed);
    let f = t.sample(g, g);
    let mut worst = 0.0f64;
    for j in 0..g.n() {
        for k in 0..g.n() {
            worst = worst.max((f.get(j, k) - t.eval(g.node(j), g.node(k))).norm());
        }
    }
    r.check(Check::below("closed_form_max_abs", worst, 1e-15));
    write_srg1(&ctx.path("signal.srg"), &f, Domain::Space)?;
    r.artifacts.push("signal.srg".into());
    r.detail("kind", ctx.cfg.signal);
    r.detail("seed", ctx.cfg.seed);
    r.detail("n", g.n());
    r.detail("extent", g.extent());
    r.detail("norm_sq_sampled", f.norm_sq());
    r.detail("norm_sq_closed_form", t.norm_sq());
    Ok(r)
}

pub fn radon(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("radon");
    let src = source(ctx)?;
    let f = &src.signal;
    let v = sinogram_v_grid(ctx, &ctx.cfg.weights()?)?;
    let (sh, sv) = sinograms_of(f, &v, ctx.exec)?;
    // Jump discontinuities defeat the interpolated line sums.
    let compare_spatial = src.analytic.as_ref().is_none_or(|t| t.kind.is_smooth());
    for s in [&sh, &sv] {
        let o = s.orientation();
        let name = format!("sinogram_{}.srs", suffix(o));
        write_srs1(&ctx.path(&name), s)?;
        r.artifacts.push(name);
        if compare_spatial {
            let sp = radon_spatial(f, o, s.v(), s.t(), Interp::default(), ctx.exec)?;
            let d = max_abs_diff(sp.values(), s.values());
            r.check(Check::below(format!("spatial_vs_slice_max_abs_{}", suffix(o)), d, SLICE_ROUTE_TOL));
        }
        if let Some(t) = src.analytic.as_ref().filter(|t| t.kind.is_smooth()) {
            let mut worst = 0.0f64;
            for (i, &vi) in s.v().nodes.iter().enumerate() {
                for k in 0..s.t().n() {
                    worst = worst.max((s.get(i, k) - t.radon(o, vi, s.t().node(k))).norm());
                }
            }
            r.check(Check::below(format!("closed_form_max_abs_{}", suffix(o)), worst, CLOSED_FORM_TOL));
        }
    }
    r.detail("spatial_comparison", if compare_spatial { "checked" } else { "skipped: discontinuous signal" });
    r.detail("n_v", v.len());
    r.detail("v_range", (v.lo, v.hi));
    r.detail("n_t", sh.t().n());
    r.detail("t_extent", sh.t().extent());
    r.detail("max_abs_h", sh.values().iter().map(|z| z.norm()).fold(0.0, f64::max));
    r.detail("max_abs_v", sv.values().iter().map(|z| z.norm()).fold(0.0, f64::max));
    Ok(r)
}

fn tensor_details(r: &mut Report, c: &CoefficientTensor, ctx: &Ctx) -> Result<()> {
    let key = format!("energy_{}", suffix(c.variant));
    r.detail(&key, c.energy(&ctx.cfg.shear_grid()?));
    Ok(())
}

pub fn shearlet(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("shearlet");
    let cfg = &ctx.cfg;
    let sys = cfg.system()?;
    let grid = cfg.shear_grid()?;

    let adm = admissibility_constant(&sys)?;
    r.check(Check::below("c_psi_deviation", (sys.c_psi - 1.0).abs(), C_PSI_TOL));
    r.check(Check::below("c_psi_factorized_vs_quadrature", adm.relative_gap(), C_PSI_GAP_TOL));
    let mom = vanishing_moments_check(&sys, MOMENT_ORDER)?;
    r.check(Check::below("vanishing_moments_max", mom.max, MOMENT_TOL));
    let wav = sys.psi1.admissibility();
    r.detail("psi1_admissibility", wav);
    r.detail("psi1_admissible", wav.is_admissible());
    r.detail("c_psi", adm);

    let f = source(ctx)?.signal;
    let inputs = match cfg.route {
        Route::RadonRoute => Some(inputs_from_signal(ctx, &f)?),
        _ => None,
    };
    let mut escaped = 0u64;
    for o in HV {
        let c = match cfg.route {
            Route::Direct => shearlet_direct(&f, &sys, &grid, o, DirectOptions::default(), ctx.exec)?,
            Route::QRoute => {
                let hw = sys.phi2.support().1;
                let amax = grid.a.scales.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                let reach = grid.s.hi.max(-grid.s.lo) + amax.sqrt() * hw;
                let v = default_v_grid(reach, cfg.dv())?;
                let t = match o {
                    Orientation::Horizontal => f.grid_x().padded(2)?,
                    Orientation::Vertical => f.grid_y().padded(2)?,
                };
                let (c, st) = shearlet_via_unitary_radon(&f, &sys, &grid, o, &v, &t, cfg.read, ctx.exec)?;
                escaped += st.escaped_reads;
                c
            }
            Route::RadonRoute => {
                let (c, st) = mode_coeffs_from_radon(inputs.as_ref().expect("inputs"), o, ctx.exec)?;
                escaped += st.escaped_reads;
                c
            }
        };
        tensor_details(&mut r, &c, ctx)?;
        let name = format!("coeff_{}.src", suffix(o));
        write_src1(&ctx.path(&name), &c)?;
        r.artifacts.push(name);
    }
    r.detail("route", cfg.route);
    r.detail("escaped_reads", escaped);
    Ok(r)
}

pub fn compare(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("compare");
    let cfg = &ctx.cfg;
    let f = source(ctx)?.signal;
    let inputs = inputs_from_signal(ctx, &f)?;
    let weights = inputs.weights();
    let mut worst = 0.0f64;
    let mut escaped = 0u64;
    for o in HV {
        let (route, st) = mode_coeffs_from_radon(&inputs, o, ctx.exec)?;
        escaped += st.escaped_reads;
        let direct = shearlet_direct_weighted(
            &f,
            &inputs.system,
            &inputs.grid,
            o,
            &|a, b| weights.analysis(o, a, b),
            DirectOptions::default(),
            ctx.exec,
        )?;
        let rel = route.relative_l2(&direct);
        worst = worst.max(rel);
        r.check(Check::below(format!("cone_{}_relative_l2", suffix(o)), rel, ROUTE_TOL));
    }
    let lr = lowpass_from_inputs(&inputs, ctx.split(), ctx.exec)?;
    let ld = lowpass_coeffs_direct(&f, &inputs.window)?;
    let rel = relative_l2(&lr.values, &ld.values);
    worst = worst.max(rel);
    r.check(Check::below("lowpass_relative_l2", rel, ROUTE_TOL));
    escaped += lr.escaped_reads;
    if cfg.include_q_route {
        let hw = inputs.system.phi2.support().1;
        let grid = &inputs.grid;
        let amax = grid.a.scales.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let v = default_v_grid(grid.s.hi.max(-grid.s.lo) + amax.sqrt() * hw, cfg.dv())?;
        for o in HV {
            let t = match o {
                Orientation::Horizontal => f.grid_x().padded(2)?,
                Orientation::Vertical => f.grid_y().padded(2)?,
            };
            let (q, st) = shearlet_via_unitary_radon(&f, &inputs.system, grid, o, &v, &t, cfg.read, ctx.exec)?;
            escaped += st.escaped_reads;
            let d = shearlet_direct(&f, &inputs.system, grid, o, DirectOptions::default(), ctx.exec)?;
            let rel = q.relative_l2(&d);
            worst = worst.max(rel);
            r.check(Check::below(format!("q_route_{}_relative_l2", suffix(o)), rel, ROUTE_TOL));
        }
    }
    r.detail("relative_l2", worst);
    r.detail("mode", cfg.mode);
    r.detail("lowpass_split", ctx.split());
    r.detail("escaped_reads", escaped);
    r.detail("clamp", inputs.window.clamp);
    Ok(r)
}

pub fn energy(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("energy");
    let f = source(ctx)?.signal;
    let inputs = inputs_from_signal(ctx, &f)?;
    let e = energy_identity(&f, &inputs, ctx.cfg.mode, ctx.split(), ctx.exec)?;
    r.check(Check::within("ratio", e.ratio, RATIO_BAND.0, RATIO_BAND.1));
    for (name, gap) in ["lowpass", "horizontal", "vertical"].iter().zip(e.oracle_gaps()) {
        r.check(Check::below(format!("oracle_gap_{name}"), gap, ORACLE_TOL));
    }
    r.check(Check::below("clamp_depth", e.truncation.clamp.depth, CLAMP_LIMIT));
    r.detail("ratio", e.ratio);
    r.detail("energy", &e);
    Ok(r)
}

/// Largest `|w_h + w_v - 1|` of the analysis weights squared over a fine
/// circle of directions.
fn partition_defect(w: &ConeWeight) -> f64 {
    let n = 4096;
    (0..n)
        .map(|i| {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            let (c, s) = (th.cos(), th.sin());
            let sum = match w {
                ConeWeight::Smooth { partition } => partition.phi(th).powi(2) + partition.phi_v(th).powi(2),
                ConeWeight::Sharp { rule } => {
                    cone_indicator(Orientation::Horizontal, c, s, *rule)
                        + cone_indicator(Orientation::Vertical, c, s, *rule)
                }
            };
            (sum - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

pub fn window_cmd(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("window");
    let g = ctx.cfg.signal_grid()?;
    let w = ctx.cfg.weights()?;
    r.check(Check::below("partition_identity_max", partition_defect(&w), PARTITION_TOL));
    let win = window(ctx, g, g)?;
    r.check(Check::below("window_residual_max", win.residual_max(1)?, RESIDUAL_TOL));
    r.check(Check::below("clamp_depth", win.clamp.depth, CLAMP_LIMIT));
    let values: Vec<Complex64> = win.g_hat.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    write_srg1(&ctx.path("window.srg"), &SampledSignal2D::new(g, g, values)?, Domain::Frequency)?;
    r.artifacts.push("window.srg".into());
    let part = serde_json::json!({
        "mode": w.mode(),
        "weights": w,
        "v_reach": w.v_reach(),
        "clamp": win.clamp,
    });
    let mut text = serde_json::to_string_pretty(&part)?;
    text.push('\n');
    std::fs::write(ctx.path("partition.json"), text)?;
    r.artifacts.push("partition.json".into());
    r.detail("clamp", win.clamp);
    r.detail("g_hat_origin", win.eval(0.0, 0.0));
    r.detail("residual_max_refined_4x", win.residual_max(4)?);
    Ok(r)
}

pub fn synth(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("synth");
    let cfg = &ctx.cfg;
    let (inputs, truth) = match (&cfg.io.sinogram_h, &cfg.io.sinogram_v) {
        (Some(ph), Some(pv)) => {
            let g = cfg.signal_grid()?;
            let inputs = route_inputs(ctx, read_srs1(ph)?, read_srs1(pv)?, g, g)?;
            let truth = match &cfg.io.input {
                Some(p) => Some(read_space_signal(p)?),
                None => None,
            };
            (inputs, truth)
        }
        (None, None) => {
            let f = source(ctx)?.signal;
            (inputs_from_signal(ctx, &f)?, Some(f))
        }
        _ => {
            return Err(Error::InvalidParameter(
                "io.sinogram_h and io.sinogram_v must be given together".into(),
            ))
        }
    };
    let s = synthesize_from_radon(&inputs, ctx.split(), ctx.exec)?;
    if let Some(f) = truth {
        if f.grid_x() != s.signal.grid_x() || f.grid_y() != s.signal.grid_y() {
            return Err(Error::GridMismatch("ground truth and reconstruction grids differ".into()));
        }
        let rel = relative_l2(s.signal.values(), f.values());
        r.check(Check::below("reconstruction_relative_l2", rel, SYNTH_TOL));
    } else {
        r.detail("ground_truth", "none");
    }
    write_srg1(&ctx.path("reconstruction.srg"), &s.signal, Domain::Space)?;
    r.artifacts.push("reconstruction.srg".into());
    r.detail("escaped_reads", s.escaped_reads);
    r.detail("clamp", inputs.window.clamp);
    r.detail("reconstruction_norm_sq", s.signal.norm_sq());
    Ok(r)
}

fn table_of(path: &Path, slice: Option<[usize; 2]>) -> Result<Table> {
    Ok(match artifact_kind(path)? {
        ArtifactKind::Signal => {
            let (f, domain) = read_srg1(path)?;
            let (ra, ca) = match domain {
                Domain::Space => ("x", "y"),
                Domain::Frequency => ("xi1", "xi2"),
            };
            Table {
                rows: f.grid_x().n(),
                cols: f.grid_y().n(),
                row_axis: ra.into(),
                col_axis: ca.into(),
                values: f.into_values(),
            }
        }
        ArtifactKind::Sinogram => {
            let s = read_srs1(path)?;
            Table {
                rows: s.v().len(),
                cols: s.t().n(),
                row_axis: "v".into(),
                col_axis: "t".into(),
                values: s.values().to_vec(),
            }
        }
        ArtifactKind::Tensor => {
            let c = read_src1(path)?;
            let [ia, is] = slice.unwrap_or([0, c.s_nodes.len() / 2]);
            if ia >= c.a_nodes.len() || is >= c.s_nodes.len() {
                return Err(Error::InvalidParameter(format!(
                    "slice [{ia}, {is}] outside {} scales x {} shears",
                    c.a_nodes.len(),
                    c.s_nodes.len()
                )));
            }
            Table {
                rows: c.grid_x.n(),
                cols: c.grid_y.n(),
                row_axis: "b_x".into(),
                col_axis: "b_y".into(),
                values: c.slice(ia, is).to_vec(),
            }
        }
    })
}

pub fn export(ctx: &Ctx) -> Result<Report> {
    let mut r = Report::new("export");
    let input = ctx
        .cfg
        .io
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("export needs io.input".into()))?;
    let t = table_of(input, ctx.cfg.io.export_slice)?;
    match ctx.cfg.io.export_format.unwrap_or(ExportFormat::Pgm) {
        ExportFormat::Pgm => {
            let scale = write_pgm(&ctx.path("export.pgm"), &t)?;
            r.artifacts.push("export.pgm".into());
            r.artifacts.push("export.pgm.json".into());
            r.detail("scale", scale);
        }
        ExportFormat::Csv => {
            let p = ctx.path("export.csv");
            write_csv(&p, &t)?;
            let back = read_csv(&p)?;
            let d = if back.rows == t.rows && back.cols == t.cols {
                max_abs_diff(&back.values, &t.values)
            } else {
                f64::INFINITY
            };
            r.check(Check::below("csv_round_trip_max_abs", d, f64::MIN_POSITIVE));
            r.artifacts.push("export.csv".into());
        }
    }
    r.detail("rows", t.rows);
    r.detail("cols", t.cols);
    r.detail("axes", [&t.row_axis, &t.col_axis]);
    Ok(r)
}

