//! Shared v-quadrature over filtered sinogram rows.
//!
//! Evaluates fields of the form
//! `F(x, y) = sum_i c_i W_i(p + v_i q)` where `W_i` is the inverse transform
//! of `filter(i, tau) * S_i(tau)` and `(p, q) = (x, y)` for horizontal rows,
//! `(y, x)` for vertical ones.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::Result;
use crate::grid::Grid1D;
use crate::radon::{interp_at, Interp, Orientation};

/// How `W_i` is read at the off-grid positions `p + v_i q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositionRead {
    /// Exact band-limited shift, applied as a phase before one inverse
    /// transform per output line. Periodic in `t` with the `t` extent.
    #[default]
    Spectral,
    /// Linear interpolation on rows refined `oversample` times, zero outside
    /// the `t` extent.
    Linear { oversample: usize },
}

/// Row spectra on the dual grid of `t`, one row per v-node.
pub(crate) struct RowBank<'a> {
    pub v: &'a [f64],
    pub t: Grid1D,
    pub spectra: &'a [Complex64],
}

pub(crate) struct FieldOut {
    pub values: Vec<Complex64>,
    /// Position reads that fell outside the `t` extent.
    pub escaped: u64,
}

/// `filter(i, tau)` is real; zero entries are skipped.
pub(crate) fn field(
    bank: &RowBank,
    terms: &[(usize, f64)],
    filter: &(dyn Fn(usize, f64) -> f64 + Sync),
    orientation: Orientation,
    gx: &Grid1D,
    gy: &Grid1D,
    read: PositionRead,
) -> Result<FieldOut> {
    let (gp, gq) = match orientation {
        Orientation::Horizontal => (*gx, *gy),
        Orientation::Vertical => (*gy, *gx),
    };
    let t = bank.t;
    let off = gp.offset_in(&t)?;
    let (nt, np, nq) = (t.n(), gp.n(), gq.n());
    let ny = gy.n();
    let mut out = vec![Complex64::default(); gx.n() * ny];

    let mut rows: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(terms.len());
    let (mut m0, mut m1) = (usize::MAX, 0usize);
    for &(i, c) in terms {
        if c == 0.0 {
            continue;
        }
        let s = &bank.spectra[i * nt..(i + 1) * nt];
        let p: Vec<Complex64> = (0..nt)
            .map(|m| {
                let w = filter(i, t.dual_node(m));
                if w == 0.0 {
                    Complex64::default()
                } else {
                    s[m] * (c * w)
                }
            })
            .collect();
        if let Some(a) = p.iter().position(|z| *z != Complex64::default()) {
            let b = p.iter().rposition(|z| *z != Complex64::default()).unwrap();
            m0 = m0.min(a);
            m1 = m1.max(b);
            rows.push((bank.v[i], p));
        }
    }
    if rows.is_empty() {
        return Ok(FieldOut {
            values: out,
            escaped: 0,
        });
    }

    let half = t.extent() / 2.0;
    let escaped = {
        let (p0, dp) = (gp.node(0), gp.spacing());
        let mut e = 0u64;
        for (v, _) in &rows {
            for kq in 0..nq {
                let shift = v * gq.node(kq);
                let lo = ((-half - shift - p0) / dp).ceil().max(0.0);
                let hi = ((half - shift - p0) / dp).floor().min((np - 1) as f64);
                let inside = if hi >= lo { (hi - lo) as u64 + 1 } else { 0 };
                e += np as u64 - inside;
            }
        }
        e
    };

    let mut put = |kq: usize, jp: usize, z: Complex64| match orientation {
        Orientation::Horizontal => out[jp * ny + kq] = z,
        Orientation::Vertical => out[kq * ny + jp] = z,
    };

    match read {
        PositionRead::Spectral => {
            let rows: Vec<(f64, Vec<Complex64>)> = rows
                .into_iter()
                .map(|(v, p)| (v, p[m0..=m1].to_vec()))
                .collect();
            let tau0 = t.dual_node(m0);
            let mut buf = vec![Complex64::default(); nt];
            for kq in 0..nq {
                let q = gq.node(kq);
                buf.iter_mut().for_each(|z| *z = Complex64::default());
                let acc = &mut buf[m0..=m1];
                for (v, p) in &rows {
                    let vq = v * q;
                    let mut ph = Complex64::from_polar(1.0, 2.0 * PI * tau0 * vq);
                    let step = Complex64::from_polar(1.0, 2.0 * PI * vq / t.extent());
                    for (a, z) in acc.iter_mut().zip(p) {
                        *a += z * ph;
                        ph *= step;
                    }
                }
                dft::centered_in_place(&mut buf, true);
                let sc = 1.0 / t.extent();
                for jp in 0..np {
                    put(kq, jp, buf[off + jp] * sc);
                }
            }
        }
        PositionRead::Linear { oversample } => {
            let u = oversample.max(1);
            let fine = nt * u;
            let foff = (fine - nt) / 2;
            let dt = t.spacing() / u as f64;
            let t0 = -t.extent() / 2.0;
            let fine_rows: Vec<(f64, Vec<Complex64>)> = rows
                .into_iter()
                .map(|(v, p)| {
                    let mut b = vec![Complex64::default(); fine];
                    b[foff..foff + nt].copy_from_slice(&p);
                    dft::centered_in_place(&mut b, true);
                    dft::scale(&mut b, 1.0 / t.extent());
                    (v, b)
                })
                .collect();
            for kq in 0..nq {
                let q = gq.node(kq);
                for jp in 0..np {
                    let pos = gp.node(jp);
                    let mut acc = Complex64::default();
                    for (v, row) in &fine_rows {
                        let x = pos + v * q;
                        if x.abs() <= half {
                            acc += interp_at(row, (x - t0) / dt, Interp::Linear);
                        }
                    }
                    put(kq, jp, acc);
                }
            }
        }
    }
    Ok(FieldOut {
        values: out,
        escaped,
    })
}
