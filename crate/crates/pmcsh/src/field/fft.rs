//! FFT convention used throughout the crate.
//!
//! Forward transform uses the e^{-j2*pi*f*t} kernel and is unnormalized;
//! the inverse is scaled by 1/N. Bin `k` of an N-point transform at sample
//! rate `fs` corresponds to frequency `k*fs/N` for `k < N/2` and
//! `(k-N)*fs/N` otherwise.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn fft_in_place(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

pub fn ifft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Baseband frequency offset of each FFT bin, in Hz, in storage order.
pub fn bin_frequencies(n: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / n as f64;
    (0..n)
        .map(|k| {
            if k < n.div_ceil(2) {
                k as f64 * df
            } else {
                (k as f64 - n as f64) * df
            }
        })
        .collect()
}

/// Linear convolution via zero-padded FFTs; output length `a.len() + b.len() - 1`.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len() + b.len() - 1;
    let mut fa = vec![Complex64::default(); n];
    let mut fb = vec![Complex64::default(); n];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    fft_in_place(&mut fa);
    fft_in_place(&mut fb);
    for (va, vb) in fa.iter_mut().zip(&fb) {
        *va *= vb;
    }
    ifft_in_place(&mut fa);
    fa
}
