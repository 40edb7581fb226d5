//! Polyphase rational-rate resampling.

use num_complex::Complex64;

use super::signal::DualPolSignal;
use crate::error::{Error, Result};

const MAX_DENOMINATOR: u64 = 64;
const STOPBAND_DB: f64 = 70.0;

/// Best rational approximation p/q of `ratio` with q bounded, via continued
/// fractions.
fn rational_approx(ratio: f64, max_den: u64) -> (u64, u64) {
    let mut a = ratio.floor();
    let mut rem = ratio - a;
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, a as u64, 1u64);
    while rem > 1e-12 {
        let inv = 1.0 / rem;
        a = inv.floor();
        rem = inv - a;
        let p2 = (a as u64).saturating_mul(p1).saturating_add(p0);
        let q2 = (a as u64).saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    (p1.max(1), q1.max(1))
}

fn bessel_i0(x: f64) -> f64 {
    // Power series; converges quickly for the beta values used here.
    let mut term = 1.0;
    let mut sum = 1.0;
    let half_x_sq = 0.25 * x * x;
    for k in 1..64 {
        term *= half_x_sq / (k as f64 * k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc low-pass; `cutoff` and `transition` are normalized
/// to the design sample rate (cycles/sample).
fn kaiser_lowpass(cutoff: f64, transition: f64, atten_db: f64) -> Vec<f64> {
    let beta = if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db > 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    };
    let n_taps = {
        let n = ((atten_db - 7.95) / (2.285 * std::f64::consts::TAU * transition)).ceil() as usize;
        n | 1 // odd length keeps the group delay at an integer sample
    };
    let mid = (n_taps / 2) as isize;
    let denom = bessel_i0(beta);
    (0..n_taps)
        .map(|i| {
            let k = i as isize - mid;
            let t = k as f64;
            let sinc = if k == 0 {
                2.0 * cutoff
            } else {
                (std::f64::consts::TAU * cutoff * t).sin() / (std::f64::consts::PI * t)
            };
            let r = t / mid as f64;
            let w = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom;
            sinc * w
        })
        .collect()
}

/// Rational-rate conversion of both polarization components.
///
/// Content below 0.45 times the smaller of the two rates is preserved with
/// sub-0.1 dB ripple. The new rate must relate to the old one by a ratio
/// p/q with q <= 64.
pub fn resample(sig: &DualPolSignal, new_rate: f64) -> Result<DualPolSignal> {
    if !(new_rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "new_rate must be positive, got {new_rate}"
        )));
    }
    let old_rate = sig.sample_rate();
    if new_rate == old_rate {
        return DualPolSignal::new(
            sig.x().to_vec(),
            sig.y().to_vec(),
            new_rate,
            sig.center_wavelength(),
        );
    }
    let ratio = new_rate / old_rate;
    let (up, down) = rational_approx(ratio, MAX_DENOMINATOR);
    let achieved = up as f64 / down as f64;
    if ((achieved - ratio) / ratio).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "rate ratio {ratio} has no rational approximation with denominator <= {MAX_DENOMINATOR}"
        )));
    }

    let fs_up = old_rate * up as f64;
    let f_min = old_rate.min(new_rate);
    let cutoff = 0.475 * f_min / fs_up;
    let transition = 0.05 * f_min / fs_up;
    let mut taps = kaiser_lowpass(cutoff, transition, STOPBAND_DB);
    for t in taps.iter_mut() {
        *t *= up as f64; // zero-insertion gain compensation
    }

    let out_len = (sig.len() as u64 * up / down) as usize;
    let x = polyphase_apply(sig.x(), &taps, up as usize, down as usize, out_len);
    let y = polyphase_apply(sig.y(), &taps, up as usize, down as usize, out_len);
    DualPolSignal::new(x, y, old_rate * up as f64 / down as f64, sig.center_wavelength())
}

fn polyphase_apply(
    input: &[Complex64],
    taps: &[f64],
    up: usize,
    down: usize,
    out_len: usize,
) -> Vec<Complex64> {
    let delay = taps.len() / 2;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        // Center-aligned index on the upsampled grid.
        let c = n * down + delay;
        let phase = c % up;
        let base = c / up;
        let mut acc = Complex64::default();
        let mut j = phase;
        let mut i = base as isize;
        while j < taps.len() {
            if i < 0 {
                break;
            }
            if (i as usize) < input.len() {
                acc += input[i as usize] * taps[j];
            }
            j += up;
            i -= 1;
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rng::Rng;
    use crate::field::signal::C_BAND_WAVELENGTH;

    fn tone(f0: f64, fs: f64, n: usize) -> DualPolSignal {
        let x: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * f0 * k as f64 / fs))
            .collect();
        let y = vec![Complex64::default(); n];
        DualPolSignal::new(x, y, fs, C_BAND_WAVELENGTH).unwrap()
    }

    #[test]
    fn same_rate_is_identity() {
        let sig = tone(1.0e9, 10.0e9, 256);
        let out = resample(&sig, 10.0e9).unwrap();
        assert_eq!(sig.x(), out.x());
        assert_eq!(sig.y(), out.y());
    }

    #[test]
    fn rational_approx_finds_simple_ratios() {
        assert_eq!(rational_approx(2.0, 64), (2, 1));
        assert_eq!(rational_approx(0.5, 64), (1, 2));
        assert_eq!(rational_approx(3.0 / 7.0, 64), (3, 7));
    }

    #[test]
    fn irrational_ratio_rejected() {
        let sig = tone(1.0e9, 10.0e9, 256);
        assert!(resample(&sig, 10.0e9 * std::f64::consts::SQRT_2).is_err());
    }

    #[test]
    fn upsampled_tone_keeps_frequency_and_power() {
        let fs = 10.0e9;
        let f0 = 1.0e9;
        let n = 4096;
        let sig = tone(f0, fs, n);
        let out = resample(&sig, 2.0 * fs).unwrap();
        assert_eq!(out.sample_rate(), 2.0 * fs);

        // Skip filter edges when measuring.
        let m = out.len();
        let body = &out.x()[m / 8..m - m / 8];
        let p: f64 = body.iter().map(|v| v.norm_sqr()).sum::<f64>() / body.len() as f64;
        let ripple_db = 10.0 * (p / 1.0).log10();
        assert!(ripple_db.abs() < 0.1, "power ripple {ripple_db} dB");

        // Frequency via phase increment.
        let dphi = (body[1] * body[0].conj()).arg();
        let f_est = dphi * 2.0 * fs / std::f64::consts::TAU;
        assert!((f_est - f0).abs() / f0 < 1e-3, "estimated {f_est} Hz");
    }

    #[test]
    fn down_up_round_trip_is_transparent() {
        // Band-limited signal at 16 samples/symbol survives 2x down + 2x up.
        let fs = 16.0e9;
        let n = 8192;
        let mut rng = Rng::new(9).stream("payload");
        let taps = crate::txchain::rrc_taps(0.1, 16);
        let symbols: Vec<Complex64> = (0..n / 16).map(|_| rng.complex_normal()).collect();
        let wave = crate::txchain::shape_stream(&symbols, &taps, 16);
        let y = vec![Complex64::default(); wave.len()];
        let sig = DualPolSignal::new(wave, y, fs, C_BAND_WAVELENGTH).unwrap();

        let down = resample(&sig, fs / 2.0).unwrap();
        let back = resample(&down, fs).unwrap();

        let lo = sig.len() / 8;
        let hi = sig.len().min(back.len()) - sig.len() / 8;
        let mut err = 0.0;
        let mut pwr = 0.0;
        for k in lo..hi {
            err += (back.x()[k] - sig.x()[k]).norm_sqr();
            pwr += sig.x()[k].norm_sqr();
        }
        let evm_db = 10.0 * (err / pwr).log10();
        assert!(evm_db < -40.0, "round-trip EVM {evm_db} dB");
    }
}
