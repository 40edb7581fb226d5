//! Offline receive processing: matched filtering with preamble timing
//! search, static phase alignment, radius-directed and decision-feedback
//! equalization, demapping, and BER/EVM metrology.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::fft::convolve;
use crate::field::{integrate_band, integrate_psd, psd, DualPolSignal, Polarization, PsdPoint};
use crate::rxfront::IqWaveforms;
use crate::txchain::{
    demap_symbol, map_symbols, nearest_point, preamble_symbols, rrc_taps, Format, TxConfig,
};

/// Adaptive equalizer configuration.
#[derive(Debug, Clone)]
pub struct EqualizerConfig {
    /// Feedforward tap count, odd.
    pub ff_taps: usize,
    /// Feedback (decision) tap count; zero reduces the DFE to linear LMS.
    pub fb_taps: usize,
    pub mu_rde: f64,
    pub mu_dfe: f64,
    /// Squared ring radii of the target constellation.
    pub rde_radii_sq: Vec<f64>,
    /// Data-aided symbols before decision-directed operation.
    pub train_len: usize,
}

impl EqualizerConfig {
    pub fn for_format(format: Format) -> Self {
        EqualizerConfig {
            ff_taps: 15,
            fb_taps: 5,
            mu_rde: 1e-3,
            mu_dfe: 1e-3,
            rde_radii_sq: format.ring_radii_sq(),
            train_len: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ff_taps == 0 || self.ff_taps % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "ff_taps must be odd and >= 1, got {}",
                self.ff_taps
            )));
        }
        if !(self.mu_rde > 0.0 && self.mu_dfe > 0.0) {
            return Err(Error::InvalidParameter("equalizer steps must be positive".into()));
        }
        Ok(())
    }
}

/// Demodulation quality counters.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Metrics {
    pub ber: f64,
    pub evm_db: f64,
    pub snr_est_db: f64,
    pub counted_bits: usize,
    pub error_bits: usize,
}

const TAP_DIVERGENCE_LIMIT: f64 = 1e3;

/// Result of the timing search.
#[derive(Debug, Clone)]
pub struct SyncedSymbols {
    /// Symbol-rate sequence starting at the first preamble symbol.
    pub symbols: Vec<Complex64>,
    /// Sub-symbol sampling phase that maximized the preamble correlation.
    pub timing_phase: usize,
    /// Whole-symbol delay of the preamble in the filtered stream.
    pub symbol_delay: usize,
}

/// Matched-filter the received IQ waveform and decimate at the timing
/// phase that maximizes the preamble correlation.
///
/// Both the direct and the conjugated preamble hypotheses are searched so
/// that a polarization-flipped stream still synchronizes; the flip itself
/// is resolved later by [`phase_align`]. The peak must exceed three times
/// the background (the 95th percentile of off-peak correlations) or the
/// search fails.
pub fn matched_filter_downsample(iq: &IqWaveforms, cfg: &TxConfig) -> Result<SyncedSymbols> {
    let sps = cfg.samples_per_symbol;
    if (iq.rate - cfg.sample_rate()).abs() > 1e-6 * cfg.sample_rate() {
        return Err(Error::InvalidParameter(format!(
            "waveform rate {} Hz does not match {} samples/symbol at {} baud",
            iq.rate, sps, cfg.baud
        )));
    }
    if iq.len() < cfg.preamble_len * sps {
        return Err(Error::SyncFailed);
    }
    let r = iq.to_complex();
    let taps: Vec<Complex64> = rrc_taps(cfg.rolloff, sps)
        .into_iter()
        .map(|h| Complex64::new(h / sps as f64, 0.0))
        .collect();
    let full = convolve(&r, &taps);
    let delay = taps.len() / 2;
    let filtered = &full[delay..delay + r.len()];

    let preamble = preamble_symbols(cfg.preamble_len);
    let pre_len = preamble.len();
    if pre_len == 0 {
        return Err(Error::SyncFailed);
    }

    // Correlate against both hypotheses on every sampling phase. The
    // preamble always leads the frame, so the delay search is capped; the
    // capped range still gives plenty of off-peak background samples.
    let n_symbols = filtered.len() / sps;
    if n_symbols <= pre_len {
        return Err(Error::SyncFailed);
    }
    let max_delay = 4096usize;
    let mut best = (0usize, 0usize, 0.0f64);
    let mut metrics: Vec<(usize, usize, f64)> = Vec::new();
    for phase in 0..sps {
        let stream: Vec<Complex64> = (0..n_symbols)
            .filter_map(|m| filtered.get(phase + m * sps).copied())
            .collect();
        for d in 0..stream.len().saturating_sub(pre_len).min(max_delay) {
            let mut c_id = Complex64::default();
            let mut c_conj = Complex64::default();
            for (m, p) in preamble.iter().enumerate() {
                let y = stream[d + m];
                c_id += y * p.conj();
                c_conj += y * p;
            }
            let metric = c_id.norm().max(c_conj.norm());
            metrics.push((phase, d, metric));
            if metric > best.2 {
                best = (phase, d, metric);
            }
        }
    }

    // Background: 95th percentile of correlations away from the peak.
    let peak_time = (best.0 + best.1 * sps) as isize;
    let guard = (pre_len * sps) as isize;
    let mut off_peak: Vec<f64> = metrics
        .iter()
        .filter(|(p, d, _)| ((p + d * sps) as isize - peak_time).abs() > guard)
        .map(|(_, _, m)| *m)
        .collect();
    if off_peak.is_empty() {
        return Err(Error::SyncFailed);
    }
    off_peak.sort_by(f64::total_cmp);
    let background = off_peak[(off_peak.len() as f64 * 0.95) as usize % off_peak.len()];
    if best.2 < 3.0 * background {
        return Err(Error::SyncFailed);
    }

    let (phase, d, _) = best;
    let symbols: Vec<Complex64> = (d..n_symbols)
        .filter_map(|m| filtered.get(phase + m * sps).copied())
        .collect();
    Ok(SyncedSymbols {
        symbols,
        timing_phase: phase,
        symbol_delay: d,
    })
}

/// Outcome of the static phase/conjugation alignment.
#[derive(Debug, Clone, Copy)]
pub struct AlignInfo {
    /// True when the conjugated hypothesis fit better (polarization flip).
    pub conjugated: bool,
    /// Removed constant phase, rad.
    pub phase: f64,
}

/// Estimate one constant phase (and the conjugation ambiguity) from the
/// preamble by least squares and apply it globally. No per-symbol carrier
/// tracking is performed; the self-homodyne link does not need any.
pub fn phase_align(
    symbols: &[Complex64],
    preamble: &[Complex64],
) -> Result<(Vec<Complex64>, AlignInfo)> {
    if symbols.len() < preamble.len() || preamble.is_empty() {
        return Err(Error::LengthMismatch {
            left: symbols.len(),
            right: preamble.len(),
        });
    }
    let energy: f64 = preamble.iter().map(|p| p.norm_sqr()).sum();
    let mut a_id = Complex64::default();
    let mut a_conj = Complex64::default();
    for (p, y) in preamble.iter().zip(symbols) {
        a_id += y * p.conj();
        a_conj += y.conj() * p.conj();
    }
    a_id /= energy;
    a_conj /= energy;

    let conjugated = a_conj.norm() > a_id.norm();
    let a = if conjugated { a_conj } else { a_id };
    let rot = Complex64::from_polar(1.0, -a.arg());
    let out = symbols
        .iter()
        .map(|y| if conjugated { y.conj() * rot } else { y * rot })
        .collect();
    Ok((
        out,
        AlignInfo {
            conjugated,
            phase: a.arg(),
        },
    ))
}

fn tap_norm_sq(taps: &[Complex64]) -> f64 {
    taps.iter().map(|t| t.norm_sqr()).sum()
}

fn nearest_radius_sq(radii_sq: &[f64], power: f64) -> f64 {
    radii_sq
        .iter()
        .copied()
        .min_by(|a, b| (a - power).abs().total_cmp(&(b - power).abs()))
        .unwrap_or(1.0)
}

/// Radius-directed feedforward equalizer.
///
/// `input_sps` of 1 equalizes a symbol-rate stream; 2 accepts a
/// fractionally-spaced input and emits one output per symbol. The update
/// is e = (R^2_nearest - |y|^2), taps += mu * e * y * conj(window), with
/// the center tap initialized to one.
pub fn rde_equalize(
    input: &[Complex64],
    cfg: &EqualizerConfig,
    input_sps: usize,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let n = cfg.ff_taps;
    if input.len() <= n + cfg.train_len {
        return Err(Error::InvalidParameter(format!(
            "input of {} symbols too short for {} taps and train_len {}",
            input.len(),
            n,
            cfg.train_len
        )));
    }
    let sps = input_sps.max(1);
    let mut taps = vec![Complex64::default(); n];
    taps[n / 2] = Complex64::new(1.0, 0.0);
    let half = n / 2; // taps are spaced at the input rate
    let mut out = Vec::with_capacity(input.len() / sps);
    for k in (0..input.len()).step_by(sps) {
        let center = k as isize;
        let mut y = Complex64::default();
        for (i, t) in taps.iter().enumerate() {
            let idx = center + half as isize - i as isize;
            if idx >= 0 && (idx as usize) < input.len() {
                y += t * input[idx as usize];
            }
        }
        let e = nearest_radius_sq(&cfg.rde_radii_sq, y.norm_sqr()) - y.norm_sqr();
        for (i, t) in taps.iter_mut().enumerate() {
            let idx = center + half as isize - i as isize;
            if idx >= 0 && (idx as usize) < input.len() {
                *t += cfg.mu_rde * e * y * input[idx as usize].conj();
            }
        }
        if tap_norm_sq(&taps) > TAP_DIVERGENCE_LIMIT * TAP_DIVERGENCE_LIMIT {
            return Err(Error::EqualizerDiverged);
        }
        out.push(y);
    }
    Ok(out)
}

/// Decision-feedback equalizer with LMS adaptation.
///
/// The first `train_len` symbols are data-aided against `reference`
/// (preamble-extended training); afterwards the error is decision-directed.
/// The feedback filter runs on past hard decisions. Zero feedback taps
/// reduce the structure to a linear LMS equalizer.
pub fn dfe_equalize(
    input: &[Complex64],
    reference: &[Complex64],
    cfg: &EqualizerConfig,
    format: Format,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let nf = cfg.ff_taps;
    if input.len() <= nf + cfg.train_len {
        return Err(Error::InvalidParameter(format!(
            "input of {} symbols too short for {} taps and train_len {}",
            input.len(),
            nf,
            cfg.train_len
        )));
    }
    let nb = cfg.fb_taps;
    let mut ff = vec![Complex64::default(); nf];
    ff[nf / 2] = Complex64::new(1.0, 0.0);
    let mut fb = vec![Complex64::default(); nb];
    let mut decisions: Vec<Complex64> = Vec::with_capacity(input.len());
    let half = nf / 2;
    let mut out = Vec::with_capacity(input.len());
    for k in 0..input.len() {
        let mut y = Complex64::default();
        for (i, t) in ff.iter().enumerate() {
            let idx = k as isize + half as isize - i as isize;
            if idx >= 0 && (idx as usize) < input.len() {
                y += t * input[idx as usize];
            }
        }
        for (j, b) in fb.iter().enumerate() {
            if k > j {
                y -= b * decisions[k - 1 - j];
            }
        }
        let desired = if k < cfg.train_len && k < reference.len() {
            reference[k]
        } else {
            nearest_point(y, format)
        };
        let err = desired - y;
        for (i, t) in ff.iter_mut().enumerate() {
            let idx = k as isize + half as isize - i as isize;
            if idx >= 0 && (idx as usize) < input.len() {
                *t += cfg.mu_dfe * err * input[idx as usize].conj();
            }
        }
        for (j, b) in fb.iter_mut().enumerate() {
            if k > j {
                *b -= cfg.mu_dfe * err * decisions[k - 1 - j].conj();
            }
        }
        if tap_norm_sq(&ff) + tap_norm_sq(&fb) > TAP_DIVERGENCE_LIMIT * TAP_DIVERGENCE_LIMIT {
            return Err(Error::EqualizerDiverged);
        }
        decisions.push(desired);
        out.push(y);
    }
    Ok(out)
}

/// Hard-decision demap against the known reference bits.
///
/// Symbols are normalized by a real scalar gain before slicing (phase and
/// conjugation must already be aligned); EVM and the SNR estimate come
/// from the residual against the ideal reference constellation.
pub fn demap_count(symbols: &[Complex64], reference_bits: &[u8], format: Format) -> Result<Metrics> {
    let bps = format.bits_per_symbol();
    if symbols.len() * bps != reference_bits.len() {
        return Err(Error::LengthMismatch {
            left: symbols.len() * bps,
            right: reference_bits.len(),
        });
    }
    let reference = map_symbols(reference_bits, format)?;

    let p_in: f64 = symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / symbols.len() as f64;
    let p_ref: f64 =
        reference.iter().map(|s| s.norm_sqr()).sum::<f64>() / reference.len() as f64;
    if !(p_in > 0.0) {
        return Err(Error::ZeroPower);
    }
    let gain = (p_in / p_ref).sqrt();

    let mut error_bits = 0usize;
    let mut mse = 0.0f64;
    for (k, (s, r)) in symbols.iter().zip(&reference).enumerate() {
        let y = s / gain;
        mse += (y - r).norm_sqr();
        let decided = demap_symbol(y, format);
        for (db, rb) in decided.iter().zip(&reference_bits[k * bps..(k + 1) * bps]) {
            if db != rb {
                error_bits += 1;
            }
        }
    }
    let counted_bits = reference_bits.len();
    let evm_sq = mse / symbols.len() as f64 / p_ref;
    Ok(Metrics {
        ber: error_bits as f64 / counted_bits as f64,
        evm_db: 10.0 * evm_sq.log10(),
        snr_est_db: -10.0 * evm_sq.log10(),
        counted_bits,
        error_bits,
    })
}

/// Per-branch spectral summary.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BranchSpectrum {
    /// Power in the carrier line (a few bins around zero offset), mW.
    pub line_power_mw: f64,
    /// Power across the occupied band excluding the line window, mW.
    pub wideband_power_mw: f64,
    pub line_to_wideband_db: f64,
}

/// PSD tables of both polarizations plus line/wideband summaries.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub psd_x: Vec<PsdPoint>,
    pub psd_y: Vec<PsdPoint>,
    pub x: BranchSpectrum,
    pub y: BranchSpectrum,
}

/// Width of the carrier-line window in PSD bins on each side of zero.
const LINE_BINS: f64 = 2.0;

fn branch_summary(table: &[PsdPoint], signal_band: Option<f64>) -> BranchSpectrum {
    let df = if table.len() > 1 {
        table[1].frequency - table[0].frequency
    } else {
        1.0
    };
    let line_halfwidth = LINE_BINS * df + df / 2.0;
    let line = integrate_band(table, -line_halfwidth, line_halfwidth);
    let total = match signal_band {
        Some(b) => integrate_band(table, -b / 2.0, b / 2.0),
        None => integrate_psd(table),
    };
    let wideband = (total - line).max(0.0);
    BranchSpectrum {
        line_power_mw: line,
        wideband_power_mw: wideband,
        line_to_wideband_db: if wideband > 0.0 {
            10.0 * (line / wideband).log10()
        } else {
            f64::INFINITY
        },
    }
}

/// Welch PSDs of both polarizations with carrier-line and wideband power
/// summaries. `signal_band` restricts the wideband integral to the
/// occupied bandwidth (for example baud times 1+rolloff); `None` uses the
/// whole simulated band.
pub fn spectrum_report(
    sig: &DualPolSignal,
    segment_len: usize,
    signal_band: Option<f64>,
) -> Result<SpectrumReport> {
    let psd_x = psd(sig, segment_len, Polarization::X)?;
    let psd_y = psd(sig, segment_len, Polarization::Y)?;
    let x = branch_summary(&psd_x, signal_band);
    let y = branch_summary(&psd_y, signal_band);
    Ok(SpectrumReport { psd_x, psd_y, x, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rng;
    use crate::txchain::gen_bits;

    fn qpsk_frame(seed: u64, n_payload: usize) -> (Vec<Complex64>, Vec<u8>) {
        let mut rng = Rng::new(seed).stream("bits");
        let bits = gen_bits(&mut rng, 15, 2 * n_payload).unwrap();
        let payload = map_symbols(&bits, Format::Qpsk).unwrap();
        let mut frame = preamble_symbols(256);
        frame.extend_from_slice(&payload);
        (frame, bits)
    }

    #[test]
    fn demap_identical_bits_is_error_free() {
        let (frame, bits) = qpsk_frame(1, 512);
        let payload = &frame[256..];
        let m = demap_count(payload, &bits, Format::Qpsk).unwrap();
        assert_eq!(m.error_bits, 0);
        assert_eq!(m.ber, 0.0);
        assert!(m.evm_db < -100.0);
    }

    #[test]
    fn quarter_turn_gives_half_ber() {
        let (frame, bits) = qpsk_frame(2, 20_000);
        let rotated: Vec<Complex64> = frame[256..]
            .iter()
            .map(|s| s * Complex64::new(0.0, 1.0))
            .collect();
        let m = demap_count(&rotated, &bits, Format::Qpsk).unwrap();
        assert!((m.ber - 0.5).abs() < 0.01, "ber {}", m.ber);
    }

    #[test]
    fn demap_length_mismatch_rejected() {
        let (frame, bits) = qpsk_frame(3, 128);
        assert!(demap_count(&frame[256..300], &bits, Format::Qpsk).is_err());
    }

    #[test]
    fn qpsk_awgn_matches_q_function() {
        // Eb/N0 = 6.8 dB -> BER about 1e-3.
        let ebn0_db = 6.8;
        let n_symbols = 600_000;
        let mut rng = Rng::new(4).stream("bits");
        let bits = gen_bits(&mut rng, 23, 2 * n_symbols).unwrap();
        let symbols = map_symbols(&bits, Format::Qpsk).unwrap();
        let ebn0 = 10.0f64.powf(ebn0_db / 10.0);
        let sigma = (1.0 / (2.0 * ebn0)).sqrt(); // complex noise std, Es = 1
        let mut nrng = Rng::new(5).stream("awgn");
        let noisy: Vec<Complex64> = symbols
            .iter()
            .map(|s| s + nrng.complex_normal() * sigma)
            .collect();
        let m = demap_count(&noisy, &bits, Format::Qpsk).unwrap();

        let q = |x: f64| 0.5 * erfc_approx(x / std::f64::consts::SQRT_2);
        let p_theory = q((2.0 * ebn0).sqrt());
        let n_bits = m.counted_bits as f64;
        let sigma3 = 3.0 * (p_theory * (1.0 - p_theory) / n_bits).sqrt();
        assert!(
            (m.ber - p_theory).abs() < sigma3,
            "ber {} vs theory {} (3 sigma {})",
            m.ber,
            p_theory,
            sigma3
        );
    }

    // Abramowitz-Stegun 7.1.26 style erfc; 1e-7 absolute accuracy.
    pub(crate) fn erfc_approx(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.3275911 * x.abs());
        let poly = t
            * (0.254829592
                + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        let v = poly * (-x * x).exp();
        if x >= 0.0 {
            v
        } else {
            2.0 - v
        }
    }

    #[test]
    fn phase_align_undoes_static_rotation() {
        let (frame, _) = qpsk_frame(6, 1024);
        let rot = Complex64::from_polar(1.0, 17.0f64.to_radians());
        let rotated: Vec<Complex64> = frame.iter().map(|s| s * rot).collect();
        let (aligned, info) = phase_align(&rotated, &preamble_symbols(256)).unwrap();
        assert!(!info.conjugated);
        for (a, b) in aligned.iter().zip(&frame) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn phase_align_zero_rotation_is_identity() {
        let (frame, _) = qpsk_frame(7, 256);
        let (aligned, info) = phase_align(&frame, &preamble_symbols(256)).unwrap();
        assert!(info.phase.abs() < 1e-9);
        for (a, b) in aligned.iter().zip(&frame) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_align_resolves_conjugation() {
        let (frame, _) = qpsk_frame(8, 1024);
        let rot = Complex64::from_polar(1.0, 0.6);
        let flipped: Vec<Complex64> = frame.iter().map(|s| s.conj() * rot).collect();
        let (aligned, info) = phase_align(&flipped, &preamble_symbols(256)).unwrap();
        assert!(info.conjugated);
        for (a, b) in aligned.iter().zip(&frame) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn rde_identity_channel_is_stable() {
        let (frame, _) = qpsk_frame(9, 4000);
        let cfg = EqualizerConfig::for_format(Format::Qpsk);
        let out = rde_equalize(&frame, &cfg, 1).unwrap();
        // Constant-modulus input at the unit radius is a fixed point.
        let tail = &out[2000..];
        let err: f64 = tail
            .iter()
            .zip(&frame[2000..])
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / tail.len() as f64;
        assert!(err < 1e-4, "residual {err}");
    }

    #[test]
    fn rde_reduces_radius_variance_on_isi_channel() {
        let (frame, _) = qpsk_frame(10, 30_000);
        // Two-tap ISI channel 1 + 0.3 z^-1.
        let mut distorted = vec![Complex64::default(); frame.len()];
        for k in 0..frame.len() {
            distorted[k] = frame[k];
            if k > 0 {
                distorted[k] += 0.3 * frame[k - 1];
            }
        }
        let cfg = EqualizerConfig::for_format(Format::Qpsk);
        let out = rde_equalize(&distorted, &cfg, 1).unwrap();

        let radius_var = |v: &[Complex64]| -> f64 {
            v.iter().map(|s| (s.norm_sqr() - 1.0).powi(2)).sum::<f64>() / v.len() as f64
        };
        let before = radius_var(&distorted[20_000..]);
        let after = radius_var(&out[20_000..]);
        let gain_db = 10.0 * (before / after).log10();
        assert!(gain_db >= 6.0, "radius variance gain {gain_db} dB");
    }

    #[test]
    fn rde_divergence_is_reported() {
        // An absurd step size on a hot input blows the taps up.
        let (frame, _) = qpsk_frame(14, 4000);
        let hot: Vec<Complex64> = frame.iter().map(|s| s * 50.0).collect();
        let mut cfg = EqualizerConfig::for_format(Format::Qpsk);
        cfg.mu_rde = 10.0;
        let err = rde_equalize(&hot, &cfg, 1).unwrap_err();
        assert_eq!(err.to_string(), "equalizer diverged");
    }

    #[test]
    fn qam16_radius_set() {
        let cfg = EqualizerConfig::for_format(Format::Qam16);
        assert_eq!(cfg.rde_radii_sq, vec![0.2, 1.0, 1.8]);
    }

    #[test]
    fn dfe_without_feedback_is_linear_lms() {
        let (frame, _) = qpsk_frame(11, 8000);
        let mut cfg = EqualizerConfig::for_format(Format::Qpsk);
        cfg.fb_taps = 0;
        let out = dfe_equalize(&frame, &frame, &cfg, Format::Qpsk).unwrap();
        let err: f64 = out[4000..]
            .iter()
            .zip(&frame[4000..])
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / 4000.0;
        assert!(err < 1e-3, "residual {err}");
    }

    #[test]
    fn dfe_clean_input_feedback_stays_idle() {
        let (frame, _) = qpsk_frame(12, 6000);
        let cfg = EqualizerConfig::for_format(Format::Qpsk);
        let out = dfe_equalize(&frame, &frame, &cfg, Format::Qpsk).unwrap();
        let err: f64 = out[3000..]
            .iter()
            .zip(&frame[3000..])
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / 3000.0;
        assert!(err < 1e-4, "residual {err}");
    }

    #[test]
    fn dfe_beats_linear_on_post_cursor_isi() {
        let (frame, _) = qpsk_frame(13, 40_000);
        // Post-cursor channel (1, 0, 0.4).
        let mut distorted = vec![Complex64::default(); frame.len()];
        for k in 0..frame.len() {
            distorted[k] = frame[k];
            if k >= 2 {
                distorted[k] += 0.4 * frame[k - 2];
            }
        }
        let mut linear_cfg = EqualizerConfig::for_format(Format::Qpsk);
        linear_cfg.fb_taps = 0;
        linear_cfg.train_len = 4000;
        let mut dfe_cfg = linear_cfg.clone();
        dfe_cfg.fb_taps = 5;

        let lin = dfe_equalize(&distorted, &frame, &linear_cfg, Format::Qpsk).unwrap();
        let dfe = dfe_equalize(&distorted, &frame, &dfe_cfg, Format::Qpsk).unwrap();

        let evm = |v: &[Complex64]| -> f64 {
            let e: f64 = v[20_000..]
                .iter()
                .zip(&frame[20_000..])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                / (v.len() - 20_000) as f64;
            10.0 * e.log10()
        };
        let gain = evm(&lin) - evm(&dfe);
        assert!(gain >= 3.0, "DFE gain over linear {gain} dB");
    }

    #[test]
    fn pure_carrier_spectrum_has_no_wideband_power() {
        let n = 1 << 14;
        let x = vec![Complex64::new(1.0, 0.0); n];
        let y = vec![Complex64::default(); n];
        let sig = DualPolSignal::new(x, y, 10.0e9, crate::field::C_BAND_WAVELENGTH).unwrap();
        let rep = spectrum_report(&sig, 1024, None).unwrap();
        assert!(rep.x.wideband_power_mw < 1e-6 * rep.x.line_power_mw);
        assert!(rep.x.line_to_wideband_db > 60.0);
    }
}
