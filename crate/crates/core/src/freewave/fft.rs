use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalized inverse DFT along every axis of an Nⁿ row-major array.
pub(crate) fn inverse_nd(data: &mut [Complex64], n: usize, size: usize) {
    let plan: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(size);
    transform_nd(data, n, size, &plan);
}

fn transform_nd(data: &mut [Complex64], n: usize, size: usize, plan: &Arc<dyn Fft<f64>>) {
    let total = data.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let mut line = vec![Complex64::new(0.0, 0.0); size];
    for axis in 0..n {
        let stride = size.pow((n - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_exact_mut(size) {
                plan.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * size;
        for start in (0..total).step_by(block) {
            for s in 0..stride {
                for i in 0..size {
                    line[i] = data[start + i * stride + s];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for i in 0..size {
                    data[start + i * stride + s] = line[i];
                }
            }
        }
    }
}
