//! Centered discrete Fourier transforms on top of rustfft.
//!
//! For a length `n` (multiple of four) and centered indices the kernel
//! `exp(-2 pi i (k - n/2)(m - n/2) / n)` factors as
//! `(-1)^k (-1)^m exp(-2 pi i k m / n)`, so a centered transform is a plain
//! FFT with sign flips on input and output.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plans() -> &'static PlanCache {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = plans().lock().expect("fft plan cache poisoned");
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn flip_odd(buf: &mut [Complex64]) {
    for v in buf.iter_mut().skip(1).step_by(2) {
        *v = -*v;
    }
}

/// Unscaled centered transform in place. `inverse` selects the `+i` kernel.
pub(crate) fn centered_in_place(buf: &mut [Complex64], inverse: bool) {
    debug_assert!(buf.len().is_multiple_of(4));
    flip_odd(buf);
    plan(buf.len(), inverse).process(buf);
    flip_odd(buf);
}

/// Centered transform along both axes of a row-major `(nx, ny)` array.
pub(crate) fn centered_2d(values: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    let row = plan(ny, inverse);
    let mut scratch = vec![Complex64::default(); row.get_inplace_scratch_len()];
    for r in values.chunks_mut(ny) {
        flip_odd(r);
        row.process_with_scratch(r, &mut scratch);
        flip_odd(r);
    }
    let mut col = vec![Complex64::default(); nx];
    for k in 0..ny {
        for j in 0..nx {
            col[j] = values[j * ny + k];
        }
        centered_in_place(&mut col, inverse);
        for j in 0..nx {
            values[j * ny + k] = col[j];
        }
    }
}

/// Multiply every element by a real factor.
pub(crate) fn scale(values: &mut [Complex64], factor: f64) {
    for v in values {
        *v *= factor;
    }
}
