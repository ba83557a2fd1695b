//! Two-dimensional DFT over row-major real images.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

fn transform(data: &mut [Complex64], height: usize, width: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (row, col) = if inverse {
        (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
    } else {
        (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
    };
    for r in data.chunks_exact_mut(width) {
        row.process(r);
    }
    let mut column = vec![Complex64::default(); height];
    for c in 0..width {
        for (r, v) in column.iter_mut().enumerate() {
            *v = data[r * width + c];
        }
        col.process(&mut column);
        for (r, v) in column.iter().enumerate() {
            data[r * width + c] = *v;
        }
    }
}

/// Unnormalized forward 2-D DFT of a real image.
pub fn fft2_real(values: &[f64], height: usize, width: usize) -> Vec<Complex64> {
    assert_eq!(values.len(), height * width);
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut data, height, width, false);
    data
}

/// Inverse 2-D DFT, scaled by 1/(HW) so that `ifft2(fft2(x)) == x`.
pub fn ifft2(spectrum: &[Complex64], height: usize, width: usize) -> Vec<Complex64> {
    let mut data = spectrum.to_vec();
    transform(&mut data, height, width, true);
    let scale = 1.0 / (height * width) as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// Signed frequency in cycles per sample for DFT bin `k` of length `n`.
pub fn signed_frequency(k: usize, n: usize) -> f64 {
    let k = k as f64;
    let n_f = n as f64;
    if k <= n_f / 2.0 {
        k / n_f
    } else {
        (k - n_f) / n_f
    }
}

/// Radial frequency (cycles/pixel) of bin `(ky, kx)`.
pub fn radial_frequency(ky: usize, kx: usize, height: usize, width: usize) -> f64 {
    signed_frequency(ky, height).hypot(signed_frequency(kx, width))
}
