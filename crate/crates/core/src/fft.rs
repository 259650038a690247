//! Multi-dimensional complex FFT over row-major arrays, one axis at a time.
//!
//! Lines are transformed independently, so splitting them across threads
//! leaves every output bit unchanged.

use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let mut planner = PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner());
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

fn process_lines(data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
    let len = fft.len();
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(len).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, line| fft.process_with_scratch(line, scratch),
    );
}

/// Unnormalized transform: forward uses `exp(-i...)`, inverse `exp(+i...)`.
pub(crate) fn transform(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    let mut buffer = Vec::new();
    for (axis, &len) in shape.iter().enumerate() {
        let fft = plan(len, inverse);
        let inner: usize = shape[axis + 1..].iter().product();
        if inner == 1 {
            process_lines(data, &fft);
            continue;
        }
        buffer.resize(len * inner, Complex64::new(0.0, 0.0));
        for block in data.chunks_mut(len * inner) {
            // [len][inner] -> [inner][len]
            for (q, row) in block.chunks(inner).enumerate() {
                for (i, &z) in row.iter().enumerate() {
                    buffer[i * len + q] = z;
                }
            }
            process_lines(&mut buffer, &fft);
            for (q, row) in block.chunks_mut(inner).enumerate() {
                for (i, z) in row.iter_mut().enumerate() {
                    *z = buffer[i * len + q];
                }
            }
        }
    }
}
