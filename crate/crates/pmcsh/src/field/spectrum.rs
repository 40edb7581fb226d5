//! Welch power spectral density estimation.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::signal::{DualPolSignal, Polarization};
use crate::error::{Error, Result};

/// One PSD sample: baseband frequency offset in Hz and density in mW/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdPoint {
    pub frequency: f64,
    pub density: f64,
}

/// Welch-averaged periodogram of one polarization component.
///
/// Hann window, 50% overlap. The result is ordered from -fs/2 to +fs/2 and
/// normalized so that the integral over frequency recovers the component's
/// mean power.
pub fn psd(sig: &DualPolSignal, segment_len: usize, which: Polarization) -> Result<Vec<PsdPoint>> {
    psd_of_stream(sig.component(which), sig.sample_rate(), segment_len)
}

/// Welch PSD of a raw complex sample block.
pub fn psd_of_stream(
    samples: &[Complex64],
    sample_rate: f64,
    segment_len: usize,
) -> Result<Vec<PsdPoint>> {
    if !segment_len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "segment length {segment_len} is not a power of two"
        )));
    }
    if segment_len > samples.len() {
        return Err(Error::InvalidParameter(format!(
            "segment length {segment_len} exceeds signal length {}",
            samples.len()
        )));
    }

    let window: Vec<f64> = (0..segment_len)
        .map(|k| {
            let phase = std::f64::consts::TAU * k as f64 / segment_len as f64;
            0.5 * (1.0 - phase.cos())
        })
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();

    let hop = segment_len / 2;
    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let mut acc = vec![0.0f64; segment_len];
    let mut buf = vec![Complex64::default(); segment_len];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + segment_len <= samples.len() {
        for (b, (s, w)) in buf
            .iter_mut()
            .zip(samples[start..start + segment_len].iter().zip(&window))
        {
            *b = s * *w;
        }
        fft.process(&mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v.norm_sqr();
        }
        segments += 1;
        start += hop;
    }

    let scale = 1.0 / (sample_rate * window_energy * segments as f64);
    let df = sample_rate / segment_len as f64;
    // fftshift to ascending frequency order
    let half = segment_len.div_ceil(2);
    let mut out = Vec::with_capacity(segment_len);
    for k in 0..segment_len {
        let bin = (k + half) % segment_len;
        let freq = (k as f64 - (segment_len - half) as f64) * df;
        out.push(PsdPoint {
            frequency: freq,
            density: acc[bin] * scale,
        });
    }
    Ok(out)
}

/// Trapezoid-free integral of a PSD table: sum of density times bin width.
pub fn integrate_psd(points: &[PsdPoint]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let df = points[1].frequency - points[0].frequency;
    points.iter().map(|p| p.density).sum::<f64>() * df
}

/// Integral of the PSD restricted to `[f_lo, f_hi]`.
pub fn integrate_band(points: &[PsdPoint], f_lo: f64, f_hi: f64) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let df = points[1].frequency - points[0].frequency;
    points
        .iter()
        .filter(|p| p.frequency >= f_lo && p.frequency <= f_hi)
        .map(|p| p.density)
        .sum::<f64>()
        * df
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rng::Rng;
    use crate::field::signal::C_BAND_WAVELENGTH;

    #[test]
    fn tone_concentrates_and_integrates_to_unit_power() {
        let fs = 40.0e9;
        let n = 1 << 14;
        let f0 = 5.0e9;
        let x: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * f0 * k as f64 / fs))
            .collect();
        let y = vec![Complex64::default(); n];
        let sig = DualPolSignal::new(x, y, fs, C_BAND_WAVELENGTH).unwrap();
        let table = psd(&sig, 1024, Polarization::X).unwrap();

        let peak = table
            .iter()
            .max_by(|a, b| a.density.total_cmp(&b.density))
            .unwrap();
        assert!(
            (peak.frequency - f0).abs() <= fs / 1024.0,
            "peak at {} Hz",
            peak.frequency
        );
        let total = integrate_psd(&table);
        assert!((total - 1.0).abs() < 0.01, "integrated power {total}");
    }

    #[test]
    fn white_noise_density_is_flat() {
        let fs = 10.0e9;
        let seg = 256;
        let power: f64 = 2.0;
        // Average over several seeds for a tight per-bin bound.
        let mut mean = vec![0.0f64; seg];
        let seeds = 6;
        for seed in 0..seeds {
            let mut rng = Rng::new(seed).stream("white");
            let n = seg * 400;
            let x: Vec<Complex64> = (0..n)
                .map(|_| rng.complex_normal() * power.sqrt())
                .collect();
            let table = psd_of_stream(&x, fs, seg).unwrap();
            for (m, p) in mean.iter_mut().zip(&table) {
                *m += p.density / seeds as f64;
            }
        }
        let expected = power / fs;
        for (k, d) in mean.iter().enumerate() {
            let rel = (d - expected).abs() / expected;
            assert!(rel < 0.10, "bin {k}: density {d}, expected {expected}");
        }
    }

    #[test]
    fn zero_signal_gives_zero_density() {
        let x = vec![Complex64::default(); 4096];
        let sig = DualPolSignal::new(x.clone(), x, 1.0e9, C_BAND_WAVELENGTH).unwrap();
        let table = psd(&sig, 512, Polarization::Y).unwrap();
        assert!(table.iter().all(|p| p.density == 0.0));
    }

    #[test]
    fn oversized_segment_rejected() {
        let x = vec![Complex64::default(); 128];
        let sig = DualPolSignal::new(x.clone(), x, 1.0e9, C_BAND_WAVELENGTH).unwrap();
        assert!(psd(&sig, 256, Polarization::X).is_err());
        assert!(psd(&sig, 100, Polarization::X).is_err()); // not a power of two
    }
}
