//! Sinogram routes against direct transforms on small grids.

use std::f64::consts::PI;

use shearad::cone_frame::{build_lowpass, build_partition, ConeWeight};
use shearad::corpus::{SignalKind, TestSignal};
use shearad::radon::{translate, Orientation};
use shearad::radon_route::{
    default_v_grid, lowpass_coeffs_direct, lowpass_from_inputs, mode_coeffs_from_radon,
    sinograms_of, synthesize_from_radon, LowpassSplit, RadonRouteInputs,
};
use shearad::shearlet::{
    cone_indicator, shearlet_direct_weighted, DiagonalRule, DirectOptions, ShearScaleGrid,
    ShearletParams, ShearletSystem,
};
use shearad::{relative_l2, Complex64, Execution, Grid1D, PositionRead, SampledSignal2D};

const HV: [Orientation; 2] = [Orientation::Horizontal, Orientation::Vertical];
const DV: f64 = 1.0 / 64.0;

fn small_grid() -> ShearScaleGrid {
    ShearScaleGrid::new(17, 0.25, 5).unwrap()
}

fn sharp() -> ConeWeight {
    ConeWeight::Sharp {
        rule: DiagonalRule::Split,
    }
}

fn smooth() -> ConeWeight {
    ConeWeight::Smooth {
        partition: build_partition(PI / 16.0).unwrap(),
    }
}

fn sample(kind: SignalKind, n: usize) -> SampledSignal2D {
    let g = Grid1D::new(n, 16.0).unwrap();
    TestSignal::new(kind, 7).sample(g, g)
}

fn inputs(f: &SampledSignal2D, w: ConeWeight, exec: Execution) -> RadonRouteInputs {
    let sys = ShearletSystem::build(&ShearletParams::default()).unwrap();
    let (gx, gy) = (*f.grid_x(), *f.grid_y());
    let g = small_grid();
    let win = build_lowpass(&sys, &g, w, gx, gy, exec).unwrap();
    let v = default_v_grid(w.v_reach(), DV).unwrap();
    let (sh, sv) = sinograms_of(f, &v, exec).unwrap();
    RadonRouteInputs::new(sh, sv, sys, g, win, gx, gy, PositionRead::Spectral, exec).unwrap()
}

/// Window of `values` with its corner at `(margin + ox, margin + oy)`,
/// clear of the edges for shifts up to `shift` samples.
fn interior(
    values: &[Complex64],
    n: usize,
    (ox, oy): (usize, usize),
    shift: (usize, usize),
    margin: usize,
) -> Vec<Complex64> {
    let mut out = Vec::new();
    for j in margin..n - margin - shift.0 {
        for k in margin..n - margin - shift.1 {
            out.push(values[(j + ox) * n + k + oy]);
        }
    }
    out
}

#[test]
fn lowpass_coefficients_follow_grid_aligned_shifts() {
    let n = 64;
    let f = sample(SignalKind::Gaussian, n);
    let sh = (3usize, 5usize);
    let h = f.grid_x().spacing();
    let shifted = translate(&f, [sh.0 as f64 * h, sh.1 as f64 * h]).unwrap();
    for w in [sharp(), smooth()] {
        let (a, b) = (
            inputs(&f, w, Execution::Sequential),
            inputs(&shifted, w, Execution::Sequential),
        );
        let d0 = lowpass_coeffs_direct(&f, &a.window).unwrap();
        let d1 = lowpass_coeffs_direct(&shifted, &b.window).unwrap();
        let e = relative_l2(
            &interior(&d1.values, n, sh, sh, 8),
            &interior(&d0.values, n, (0, 0), sh, 8),
        );
        assert!(e < 1e-10, "direct {e}");

        let r0 = lowpass_from_inputs(&a, LowpassSplit::Cones, Execution::Sequential).unwrap();
        let r1 = lowpass_from_inputs(&b, LowpassSplit::Cones, Execution::Sequential).unwrap();
        let e = relative_l2(
            &interior(&r1.values, n, sh, sh, 8),
            &interior(&r0.values, n, (0, 0), sh, 8),
        );
        assert!(e < 1e-3, "route {e}");
    }
}

#[test]
fn sharp_route_matches_direct_for_each_smooth_signal() {
    for kind in [
        SignalKind::Gaussian,
        SignalKind::Ridge,
        SignalKind::TwoBumps,
        SignalKind::RandomBandlimited,
    ] {
        let f = sample(kind, 64);
        let inp = inputs(&f, sharp(), Execution::Parallel);
        for o in HV {
            let (c, _) = mode_coeffs_from_radon(&inp, o, Execution::Parallel).unwrap();
            let d = shearlet_direct_weighted(
                &f,
                &inp.system,
                &inp.grid,
                o,
                &|a, b| cone_indicator(o, a, b, DiagonalRule::Split),
                DirectOptions::default(),
                Execution::Parallel,
            )
            .unwrap();
            let e = c.relative_l2(&d);
            assert!(e < 2e-2, "{kind} {o:?} {e}");
        }
    }
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    let f = sample(SignalKind::TwoBumps, 32);
    let (p, s) = (
        inputs(&f, smooth(), Execution::Parallel),
        inputs(&f, smooth(), Execution::Sequential),
    );
    assert_eq!(p.sinogram_h, s.sinogram_h);
    assert_eq!(p.sinogram_v, s.sinogram_v);
    assert_eq!(p.window.spectrum(), s.window.spectrum());
    for o in HV {
        let (a, _) = mode_coeffs_from_radon(&p, o, Execution::Parallel).unwrap();
        let (b, _) = mode_coeffs_from_radon(&s, o, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }
    let a = lowpass_from_inputs(&p, LowpassSplit::Cones, Execution::Parallel).unwrap();
    let b = lowpass_from_inputs(&s, LowpassSplit::Cones, Execution::Sequential).unwrap();
    assert_eq!(a, b);
    let a = synthesize_from_radon(&p, LowpassSplit::Cones, Execution::Parallel).unwrap();
    let b = synthesize_from_radon(&s, LowpassSplit::Cones, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ridge_energy_sits_in_the_vertical_cone() {
    let f = sample(SignalKind::Ridge, 64);
    let inp = inputs(&f, sharp(), Execution::Parallel);
    let energy = |o| {
        mode_coeffs_from_radon(&inp, o, Execution::Parallel)
            .unwrap()
            .0
            .energy(&inp.grid)
    };
    let (h, v) = (
        energy(Orientation::Horizontal),
        energy(Orientation::Vertical),
    );
    assert!(v / (h + v) > 0.9, "vertical fraction {}", v / (h + v));
}
