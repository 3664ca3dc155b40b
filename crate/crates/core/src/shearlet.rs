//! Separable mother shearlet, cone projections and the direct and
//! unitary-Radon routes to shearlet coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::grid::{
    dft2_forward, dft2_inverse, relative_l2, Grid1D, QuadratureRule, SampledSignal2D,
};
use crate::group::Mat2;
use crate::par::{for_each_chunk_mut, Execution};
use crate::radon::{slice_spectra, HalfOrderMultiplier, Orientation};
use crate::vquad::{self, PositionRead, RowBank};
use crate::wavelet::{
    build_bump_profile, build_meyer_band_profile, derive_profiles, FreqProfile1D, ScaleGrid,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearletParams {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub smoothness: u32,
    pub half_width: f64,
}

impl Default for ShearletParams {
    fn default() -> Self {
        Self {
            tau_lo: 0.5,
            tau_hi: 2.0,
            smoothness: 3,
            half_width: 1.0,
        }
    }
}

/// `F psi(xi) = F psi1(xi_1) phi2(xi_2 / xi_1)` with derived profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearletSystem {
    pub psi1: FreqProfile1D,
    pub phi2: FreqProfile1D,
    pub phi1: FreqProfile1D,
    pub chi1: FreqProfile1D,
    /// Admissibility constant of the stored (normalized) system.
    pub c_psi: f64,
    /// Factor applied to `psi1` to reach `c_psi = 1`.
    pub normalization: f64,
}

impl ShearletSystem {
    pub fn build(p: &ShearletParams) -> Result<Self> {
        let psi1 = build_meyer_band_profile(p.tau_lo, p.tau_hi, p.smoothness)?;
        let phi2 = build_bump_profile(p.half_width)?;
        Self::normalized(psi1, phi2)
    }

    /// Rescale `psi1` so that the factorized constant equals one.
    pub fn normalized(psi1: FreqProfile1D, phi2: FreqProfile1D) -> Result<Self> {
        let raw = factorized_constant(&psi1, &phi2);
        if !raw.is_finite() || raw <= 0.0 {
            return Err(Error::Divergent(format!("admissibility constant {raw}")));
        }
        let k = 1.0 / raw.sqrt();
        let mut sys = Self::unnormalized(psi1.scaled(k), phi2);
        sys.normalization = k;
        Ok(sys)
    }

    /// Keep the profiles as given; `c_psi` may be infinite.
    pub fn unnormalized(psi1: FreqProfile1D, phi2: FreqProfile1D) -> Self {
        let (phi1, chi1) = derive_profiles(&psi1);
        let c_psi = factorized_constant(&psi1, &phi2);
        Self {
            psi1,
            phi2,
            phi1,
            chi1,
            c_psi,
            normalization: 1.0,
        }
    }

    /// `F psi(eta)`, zero on the `eta_1 = 0` line.
    pub fn psi_hat(&self, eta: [f64; 2]) -> f64 {
        if eta[0] == 0.0 {
            return 0.0;
        }
        let a = self.psi1.eval(eta[0]);
        if a == 0.0 {
            return 0.0;
        }
        a * self.phi2.eval(eta[1] / eta[0])
    }

    /// `F psi(A_a^t N_s xi)` in closed form.
    pub fn window_h(&self, xi1: f64, xi2: f64, s: f64, a: f64) -> f64 {
        if xi1 == 0.0 {
            return 0.0;
        }
        let p = self.psi1.eval(a * xi1);
        if p == 0.0 {
            return 0.0;
        }
        p * self.phi2.eval((xi2 / xi1 - s) / a.abs().sqrt())
    }

    /// `F psi^v(A~_a N_s xi)`, the horizontal window at swapped arguments.
    pub fn window_v(&self, xi1: f64, xi2: f64, s: f64, a: f64) -> f64 {
        self.window_h(xi2, xi1, s, a)
    }

    pub fn window(&self, o: Orientation, xi1: f64, xi2: f64, s: f64, a: f64) -> f64 {
        match o {
            Orientation::Horizontal => self.window_h(xi1, xi2, s, a),
            Orientation::Vertical => self.window_v(xi1, xi2, s, a),
        }
    }

    /// Window through the group matrices, for cross-checking the closed forms.
    pub fn window_by_matrix(&self, o: Orientation, xi: [f64; 2], s: f64, a: f64) -> f64 {
        match o {
            Orientation::Horizontal => {
                let m = Mat2::dilation(a) * Mat2::shear(s).transpose();
                self.psi_hat(m.apply(xi))
            }
            Orientation::Vertical => {
                let eta = (Mat2::dilation_v(a) * Mat2::shear(s)).apply(xi);
                self.psi_hat([eta[1], eta[0]])
            }
        }
    }

    fn band_inner(&self) -> f64 {
        self.psi1.support().0
    }
}

fn factorized_constant(psi1: &FreqProfile1D, phi2: &FreqProfile1D) -> f64 {
    psi1.admissibility().calderon_integral * phi2.norm_sq()
}

/// Shear nodes on `[-2, 2]` and the signed scale grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearScaleGrid {
    pub s: QuadratureRule,
    pub a: ScaleGrid,
}

impl ShearScaleGrid {
    pub fn new(n_s: usize, a_min: f64, n_a: usize) -> Result<Self> {
        Ok(Self {
            s: QuadratureRule::trapezoid(-2.0, 2.0, n_s)?,
            a: ScaleGrid::new(a_min, n_a)?,
        })
    }

    pub fn n_slices(&self) -> usize {
        self.s.len() * self.a.len()
    }

    /// Weight of slice `(ia, is)` for `ds da / |a|^3`.
    pub fn energy_weight(&self, ia: usize, is: usize) -> f64 {
        self.s.weights[is] * self.a.weight(ia, 3.0)
    }
}

impl Default for ShearScaleGrid {
    fn default() -> Self {
        Self::new(33, 1.0 / 32.0, 11).expect("default grid")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Direct,
    QRoute,
    RadonRoute,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::QRoute => "q_route",
            Route::RadonRoute => "radon_route",
        }
    }
}

/// Coefficients over `(b_x, b_y, s, a)`: one `(n_x, n_y)` slice per `(a, s)`
/// pair, slices ordered with `s` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTensor {
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    pub s_nodes: Vec<f64>,
    pub a_nodes: Vec<f64>,
    pub route: Route,
    pub variant: Orientation,
    pub values: Vec<Complex64>,
}

impl CoefficientTensor {
    pub fn zeros(
        grid_x: Grid1D,
        grid_y: Grid1D,
        grid: &ShearScaleGrid,
        route: Route,
        variant: Orientation,
    ) -> Self {
        let len = grid_x.n() * grid_y.n() * grid.n_slices();
        Self {
            grid_x,
            grid_y,
            s_nodes: grid.s.nodes.clone(),
            a_nodes: grid.a.scales.clone(),
            route,
            variant,
            values: vec![Complex64::default(); len],
        }
    }

    pub fn slice_len(&self) -> usize {
        self.grid_x.n() * self.grid_y.n()
    }

    pub fn slice(&self, ia: usize, is: usize) -> &[Complex64] {
        let n = self.slice_len();
        let k = ia * self.s_nodes.len() + is;
        &self.values[k * n..(k + 1) * n]
    }

    pub fn get(&self, jx: usize, ky: usize, is: usize, ia: usize) -> Complex64 {
        self.slice(ia, is)[jx * self.grid_y.n() + ky]
    }

    pub fn relative_l2(&self, reference: &CoefficientTensor) -> f64 {
        relative_l2(&self.values, &reference.values)
    }

    /// `sum |c|^2 db ds da / |a|^3` over the grid.
    pub fn energy(&self, grid: &ShearScaleGrid) -> f64 {
        let db = self.grid_x.spacing() * self.grid_y.spacing();
        let mut total = 0.0;
        for ia in 0..self.a_nodes.len() {
            for is in 0..self.s_nodes.len() {
                let e: f64 = self.slice(ia, is).iter().map(|z| z.norm_sqr()).sum();
                total += e * grid.energy_weight(ia, is);
            }
        }
        total * db
    }
}

/// Weight given to the rays `|xi_1| = |xi_2|` by the sharp cone indicators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalRule {
    /// Half to each cone, so the two indicators sum to one.
    #[default]
    Split,
    /// Full weight to both cones.
    Both,
}

/// Sharp indicator of the horizontal (`|xi_2| <= |xi_1|`) or vertical cone;
/// zero at the origin.
pub fn cone_indicator(cone: Orientation, xi1: f64, xi2: f64, rule: DiagonalRule) -> f64 {
    let (major, minor) = match cone {
        Orientation::Horizontal => (xi1.abs(), xi2.abs()),
        Orientation::Vertical => (xi2.abs(), xi1.abs()),
    };
    if major == 0.0 && minor == 0.0 {
        0.0
    } else if minor < major {
        1.0
    } else if minor == major {
        match rule {
            DiagonalRule::Split => 0.5,
            DiagonalRule::Both => 1.0,
        }
    } else {
        0.0
    }
}

/// `P_C f` or `P_{C^v} f` by spectrum multiplication on the signal's grid.
pub fn cone_project(f: &SampledSignal2D, cone: Orientation, rule: DiagonalRule) -> SampledSignal2D {
    let mut s = dft2_forward(f);
    s.apply_weight(|a, b| cone_indicator(cone, a, b, rule));
    dft2_inverse(&s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectOptions {
    /// Zero-padding factor of the frequency grid (power of two).
    pub oversample: usize,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self { oversample: 2 }
    }
}

/// Direct coefficients of `f` with an optional frequency pre-weight.
///
/// Per `(s, a)`: inverse transform of `w(xi) F f(xi) |a|^(3/4) F psi(M^t xi)`
/// on a grid refined by `opts.oversample`, cropped to the signal window.
/// With `w` a cone indicator this is the transform of the cone projection,
/// evaluated at the refined frequency resolution.
pub fn shearlet_direct_weighted(
    f: &SampledSignal2D,
    sys: &ShearletSystem,
    grid: &ShearScaleGrid,
    variant: Orientation,
    weight: &(dyn Fn(f64, f64) -> f64 + Sync),
    opts: DirectOptions,
    exec: Execution,
) -> Result<CoefficientTensor> {
    if grid.a.scales.contains(&0.0) {
        return Err(Error::InvalidParameter("scale a = 0".into()));
    }
    let (gx, gy) = (*f.grid_x(), *f.grid_y());
    let os = opts.oversample.max(1);
    let (px, py) = (gx.padded(os)?, gy.padded(os)?);
    let mut spec = dft2_forward(&f.zero_pad(px, py)?);
    spec.apply_weight(weight);
    let (ox, oy) = (gx.offset_in(&px)?, gy.offset_in(&py)?);
    let (nx, ny, nfx, nfy) = (gx.n(), gy.n(), px.n(), py.n());
    let xi1: Vec<f64> = px.dual_nodes();
    let xi2: Vec<f64> = py.dual_nodes();
    let major_nyq = match variant {
        Orientation::Horizontal => px.nyquist(),
        Orientation::Vertical => py.nyquist(),
    };
    let inv_area = 1.0 / (px.extent() * py.extent());
    let ns = grid.s.len();

    let mut out = CoefficientTensor::zeros(gx, gy, grid, Route::Direct, variant);
    let slice_len = nx * ny;
    for_each_chunk_mut(exec, &mut out.values, slice_len, |k, dst| {
        let (ia, is) = (k / ns, k % ns);
        let (a, s) = (grid.a.scales[ia], grid.s.nodes[is]);
        if a.abs() * major_nyq <= sys.band_inner() {
            return;
        }
        let amp = a.abs().powf(0.75);
        let mut buf = vec![Complex64::default(); nfx * nfy];
        let mut any = false;
        for j in 0..nfx {
            for l in 0..nfy {
                let w = sys.window(variant, xi1[j], xi2[l], s, a);
                if w != 0.0 {
                    buf[j * nfy + l] = spec.get(j, l) * (amp * w);
                    any = true;
                }
            }
        }
        if !any {
            return;
        }
        dft::centered_2d(&mut buf, nfx, nfy, true);
        for j in 0..nx {
            let src = (j + ox) * nfy + oy;
            for l in 0..ny {
                dst[j * ny + l] = buf[src + l] * inv_area;
            }
        }
    });
    Ok(out)
}

pub fn shearlet_direct(
    f: &SampledSignal2D,
    sys: &ShearletSystem,
    grid: &ShearScaleGrid,
    variant: Orientation,
    opts: DirectOptions,
    exec: Execution,
) -> Result<CoefficientTensor> {
    shearlet_direct_weighted(f, sys, grid, variant, &|_, _| 1.0, opts, exec)
}

/// Factorized and directly integrated admissibility constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityConstant {
    pub factorized: f64,
    pub direct_quadrature: f64,
}

impl AdmissibilityConstant {
    pub fn relative_gap(&self) -> f64 {
        (self.factorized - self.direct_quadrature).abs() / self.factorized
    }
}

/// `int |F psi(xi)|^2 / xi_1^2 dxi`, both in factorized form and by a
/// two-dimensional trapezoid rule over the support box.
pub fn admissibility_constant(sys: &ShearletSystem) -> Result<AdmissibilityConstant> {
    let (inner, outer) = sys.psi1.support();
    if inner == 0.0 && sys.psi1.shape.eval(0.0) != 0.0 {
        return Err(Error::Divergent("psi1 support touches xi_1 = 0".into()));
    }
    let hw = sys.phi2.support().1;
    if !outer.is_finite() || !hw.is_finite() {
        return Err(Error::Divergent("unbounded profile support".into()));
    }
    let n1 = 2400;
    let n2 = 2400;
    let h1 = outer / n1 as f64;
    let x2max = outer * hw;
    let h2 = 2.0 * x2max / n2 as f64;
    let mut total = 0.0;
    for i in 1..n1 {
        let xi1 = i as f64 * h1;
        let p = sys.psi1.eval(xi1);
        if p == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for k in 1..n2 {
            let xi2 = -x2max + k as f64 * h2;
            row += sys.phi2.eval(xi2 / xi1).powi(2);
        }
        total += p * p * row / (xi1 * xi1);
    }
    // Even in xi_1: double the positive half.
    Ok(AdmissibilityConstant {
        factorized: factorized_constant(&sys.psi1, &sys.phi2),
        direct_quadrature: 2.0 * total * h1 * h2,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingMoments {
    /// Largest finite-difference moment estimate per order `0..=n_max`.
    pub per_order: Vec<f64>,
    pub max: f64,
    pub step: f64,
}

/// Directional moments `int x_1^N psi(x_1, x_2) dx_1` at a few `x_2`,
/// from finite differences in `xi_1` of the partial inverse transform
/// `H(xi_1; x_2) = int F psi(xi_1, xi_2) e^{2 pi i x_2 xi_2} dxi_2` at 0.
pub fn vanishing_moments_check(sys: &ShearletSystem, n_max: usize) -> Result<VanishingMoments> {
    if n_max > 8 {
        return Err(Error::InvalidParameter(format!("moment order {n_max} > 8")));
    }
    let step = 1.0 / 32.0;
    let hw = sys.phi2.support().1;
    let nu = 400;
    let du = 2.0 * hw / nu as f64;
    let h = |xi1: f64, x2: f64| -> Complex64 {
        if xi1 == 0.0 {
            return Complex64::default();
        }
        let p = sys.psi1.eval(xi1);
        if p == 0.0 {
            return Complex64::default();
        }
        let mut acc = Complex64::default();
        for k in 1..nu {
            let u = -hw + k as f64 * du;
            acc += Complex64::from_polar(sys.phi2.eval(u), 2.0 * PI * xi1 * u * x2);
        }
        acc * (p * xi1.abs() * du)
    };
    let mut per_order = Vec::with_capacity(n_max + 1);
    for order in 0..=n_max {
        let mut worst = 0.0f64;
        for &x2 in &[0.0, 0.5, 1.0] {
            let mut acc = Complex64::default();
            let mut binom = 1.0f64;
            for j in 0..=order {
                let sign = if (order - j) % 2 == 0 { 1.0 } else { -1.0 };
                let xi = (j as f64 - order as f64 / 2.0) * step;
                acc += h(xi, x2) * (sign * binom);
                binom = binom * (order - j) as f64 / (j + 1) as f64;
            }
            worst = worst.max(acc.norm() / step.powi(order as i32));
        }
        per_order.push(worst);
    }
    let max = per_order.iter().copied().fold(0.0, f64::max);
    Ok(VanishingMoments {
        per_order,
        max,
        step,
    })
}

/// Row weights and filters shared by the sinogram-based routes.
pub(crate) struct SliceTerms {
    pub terms: Vec<(usize, f64)>,
}

/// Trapezoid terms `w_i phi2((v_i - s)/|a|^(1/2)) * extra(v_i)` over the
/// nodes listed in `nodes`.
pub(crate) fn slice_terms(
    sys: &ShearletSystem,
    v: &[f64],
    nodes: &[(usize, f64)],
    s: f64,
    a: f64,
    extra: &dyn Fn(f64) -> f64,
) -> SliceTerms {
    let r = a.abs().sqrt();
    let terms = nodes
        .iter()
        .filter_map(|&(i, w)| {
            let c = sys.phi2.eval((v[i] - s) / r);
            if c == 0.0 {
                return None;
            }
            let e = extra(v[i]);
            if e == 0.0 {
                None
            } else {
                Some((i, w * c * e))
            }
        })
        .collect();
    SliceTerms { terms }
}

/// Escaped position reads accumulated over all slices of a route run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteStats {
    pub escaped_reads: u64,
}

/// Coefficients through the unitary Radon transform:
/// `|a|^(-1/4) int W_{phi1}(Q f(v, .))(x + v y, a) phi2((v - s)/|a|^(1/2)) dv`.
#[allow(clippy::too_many_arguments)]
pub fn shearlet_via_unitary_radon(
    f: &SampledSignal2D,
    sys: &ShearletSystem,
    grid: &ShearScaleGrid,
    variant: Orientation,
    v: &QuadratureRule,
    t: &Grid1D,
    read: PositionRead,
    exec: Execution,
) -> Result<(CoefficientTensor, RouteStats)> {
    let hw = sys.phi2.support().1;
    let amax = grid.a.scales.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let reach = amax.sqrt() * hw;
    let (smin, smax) = (grid.s.lo, grid.s.hi);
    if v.lo > smin - reach + 1e-12 || v.hi < smax + reach - 1e-12 {
        return Err(Error::Truncation(format!(
            "v grid [{}, {}] must cover [{}, {}]",
            v.lo,
            v.hi,
            smin - reach,
            smax + reach
        )));
    }
    let mut spec = slice_spectra(f, variant, v, t, exec)?;
    let nt = t.n();
    for row in spec.chunks_mut(nt) {
        for (m, z) in row.iter_mut().enumerate() {
            *z *= HalfOrderMultiplier::Half.symbol(t.dual_node(m));
        }
    }
    let nodes: Vec<(usize, f64)> = v.weights.iter().copied().enumerate().collect();
    let bank = RowBank {
        v: &v.nodes,
        t: *t,
        spectra: &spec,
    };
    BankRoute {
        bank,
        sys,
        grid,
        variant,
        gx: *f.grid_x(),
        gy: *f.grid_y(),
        nodes: &nodes,
        extra: &|_| 1.0,
        profile: &sys.phi1,
        power: -0.25,
        read,
    }
    .tensor(Route::QRoute, exec)
}

/// Sinogram-side description of a coefficient route: per `(s, a)` slice, the
/// v-quadrature of `W_profile(rows)(p + v q, a)` with prefactor `|a|^power`.
pub(crate) struct BankRoute<'a> {
    pub bank: RowBank<'a>,
    pub sys: &'a ShearletSystem,
    pub grid: &'a ShearScaleGrid,
    pub variant: Orientation,
    pub gx: Grid1D,
    pub gy: Grid1D,
    pub nodes: &'a [(usize, f64)],
    pub extra: &'a (dyn Fn(f64) -> f64 + Sync),
    pub profile: &'a FreqProfile1D,
    pub power: f64,
    pub read: PositionRead,
}

impl BankRoute<'_> {
    /// Coefficients of slice `k = ia * n_s + is`; `None` when no v-node
    /// contributes.
    pub fn slice(&self, k: usize) -> Result<Option<vquad::FieldOut>> {
        let ns = self.grid.s.len();
        let (a, s) = (self.grid.a.scales[k / ns], self.grid.s.nodes[k % ns]);
        let st = slice_terms(self.sys, self.bank.v, self.nodes, s, a, self.extra);
        if st.terms.is_empty() {
            return Ok(None);
        }
        let r = a.abs().sqrt();
        let profile = self.profile;
        let filter = |_: usize, tau: f64| r * profile.eval(a * tau);
        let mut fo = vquad::field(
            &self.bank,
            &st.terms,
            &filter,
            self.variant,
            &self.gx,
            &self.gy,
            self.read,
        )?;
        let pre = a.abs().powf(self.power);
        fo.values.iter_mut().for_each(|z| *z *= pre);
        Ok(Some(fo))
    }

    pub fn tensor(&self, route: Route, exec: Execution) -> Result<(CoefficientTensor, RouteStats)> {
        let mut out = CoefficientTensor::zeros(self.gx, self.gy, self.grid, route, self.variant);
        let slice_len = out.slice_len();
        let escaped = std::sync::atomic::AtomicU64::new(0);
        let failure = std::sync::Mutex::new(None);
        for_each_chunk_mut(exec, &mut out.values, slice_len, |k, dst| {
            match self.slice(k) {
                Ok(Some(fo)) => {
                    dst.copy_from_slice(&fo.values);
                    escaped.fetch_add(fo.escaped, std::sync::atomic::Ordering::Relaxed);
                }
                Ok(None) => {}
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                }
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        Ok((
            out,
            RouteStats {
                escaped_reads: escaped.into_inner(),
            },
        ))
    }
}
