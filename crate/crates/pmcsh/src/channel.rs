//! Standard single-mode fiber model: chromatic dispersion with slope,
//! attenuation, a random static polarization rotation with slow
//! time-varying drift, first-order PMD, and OSNR loading.
//!
//! The channel is linear, so it is applied as a single frequency-domain
//! operator rather than split-step propagation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::fft::bin_frequencies;
use crate::field::{DualPolSignal, JonesMatrix, JonesOperator, Rng};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reference optical bandwidth for OSNR (0.1 nm at 1550 nm).
pub const OSNR_REF_BANDWIDTH: f64 = 12.5e9;

/// Fiber parameters.
///
/// `slope_s` is in ps/(nm^2 km); the equivalent SI figure is
/// 1 ps/(nm^2 km) = 1e3 s/m^3, so the common SSMF slope of 0.08 ps/(nm^2 km)
/// is 80 s/m^3.
#[derive(Debug, Clone, Copy)]
pub struct FiberParams {
    pub length_km: f64,
    /// Dispersion coefficient D, ps/(nm km).
    pub dispersion_d: f64,
    /// Dispersion slope S, ps/(nm^2 km).
    pub slope_s: f64,
    /// Attenuation, dB/km.
    pub atten_db_km: f64,
    /// Mean differential group delay, ps.
    pub dgd_mean_ps: f64,
    /// SOP drift rate, rad/s.
    pub sop_drift_rate: f64,
    /// Reference wavelength, m.
    pub ref_wavelength: f64,
}

impl Default for FiberParams {
    fn default() -> Self {
        let length_km = 20.0;
        FiberParams {
            length_km,
            dispersion_d: 16.0,
            slope_s: 0.08,
            atten_db_km: 0.2,
            // Typical modern SSMF PMD coefficient of 0.1 ps/sqrt(km).
            dgd_mean_ps: 0.1 * length_km.sqrt(),
            sop_drift_rate: 1.0,
            ref_wavelength: 1550.0e-9,
        }
    }
}

impl FiberParams {
    pub fn validate(&self) -> Result<()> {
        if self.length_km < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "fiber length must be non-negative, got {}",
                self.length_km
            )));
        }
        if self.atten_db_km < 0.0 || self.dgd_mean_ps < 0.0 || self.sop_drift_rate < 0.0 {
            return Err(Error::InvalidParameter(
                "attenuation, DGD and drift rate must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Group velocity dispersion beta2 in s^2/m, from D.
    pub fn beta2(&self) -> f64 {
        // D [ps/(nm km)] -> s/m^2 is a factor 1e-6.
        let d_si = self.dispersion_d * 1.0e-6;
        let lambda = self.ref_wavelength;
        -d_si * lambda * lambda / (std::f64::consts::TAU * SPEED_OF_LIGHT)
    }

    /// Third-order dispersion beta3 in s^3/m, from D and S.
    pub fn beta3(&self) -> f64 {
        // S [ps/(nm^2 km)] -> s/m^3 is a factor 1e3.
        let s_si = self.slope_s * 1.0e3;
        let d_si = self.dispersion_d * 1.0e-6;
        let lambda = self.ref_wavelength;
        let c2 = lambda * lambda / (std::f64::consts::TAU * SPEED_OF_LIGHT);
        c2 * c2 * (s_si + 2.0 * d_si / lambda)
    }
}

/// All-pass chromatic dispersion transfer at baseband offset `f` Hz:
/// exp(j (beta2/2) w^2 L + j (beta3/6) w^3 L) with w = 2 pi f.
pub fn cd_transfer(f: f64, p: &FiberParams) -> Complex64 {
    let w = std::f64::consts::TAU * f;
    let l_m = p.length_km * 1.0e3;
    let phase = 0.5 * p.beta2() * w * w * l_m + p.beta3() / 6.0 * w * w * w * l_m;
    Complex64::from_polar(1.0, phase)
}

/// Static per-run channel realization: the SOP rotation, the PMD principal
/// axes, and the drawn DGD value.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub static_rotation: JonesMatrix,
    pub pmd_axes: JonesMatrix,
    pub dgd_ps: f64,
}

impl ChannelRealization {
    /// Identity channel: no rotation, no PMD.
    pub fn identity() -> Self {
        ChannelRealization {
            static_rotation: JonesMatrix::IDENTITY,
            pmd_axes: JonesMatrix::IDENTITY,
            dgd_ps: 0.0,
        }
    }

    /// Draw rotation, PMD axes and DGD from named streams of `rng`.
    pub fn draw(p: &FiberParams, rng: &Rng) -> Self {
        let mut sop = rng.stream("channel_sop");
        let mut pmd = rng.stream("channel_pmd");
        // Maxwellian DGD would need three draws; first-order model uses the
        // mean scaled by a chi-distributed factor. One Gaussian triple keeps
        // the statistics right.
        let (g1, g2, g3) = (pmd.normal(), pmd.normal(), pmd.normal());
        let chi = ((g1 * g1 + g2 * g2 + g3 * g3) / 3.0).sqrt();
        ChannelRealization {
            static_rotation: JonesMatrix::random_unitary(&mut sop),
            pmd_axes: JonesMatrix::random_unitary(&mut pmd),
            dgd_ps: p.dgd_mean_ps * chi,
        }
    }

    pub fn with_rotation(rotation: JonesMatrix) -> Self {
        ChannelRealization {
            static_rotation: rotation,
            ..ChannelRealization::identity()
        }
    }
}

/// Build the frequency-domain fiber operator for a signal of length `n`
/// sampled at `sample_rate`.
pub fn fiber_operator(
    n: usize,
    sample_rate: f64,
    p: &FiberParams,
    realization: &ChannelRealization,
) -> Result<JonesOperator> {
    if !realization.static_rotation.is_unitary(1e-9) {
        return Err(Error::NonUnitary {
            residual: realization.static_rotation.unitarity_residual(),
        });
    }
    let loss = Complex64::new(
        10.0f64.powf(-p.atten_db_km * p.length_km / 20.0),
        0.0,
    );
    let tau_s = realization.dgd_ps * 1.0e-12;
    let r1 = realization.pmd_axes;
    let r1h = r1.adjoint();
    let rot = realization.static_rotation;

    let bins = bin_frequencies(n, sample_rate);
    let matrices = bins
        .iter()
        .map(|&f| {
            let cd = cd_transfer(f, p);
            // First-order PMD: +/- tau/2 group delay on the principal states.
            let d = JonesMatrix::new(
                Complex64::from_polar(1.0, std::f64::consts::PI * f * tau_s),
                Complex64::default(),
                Complex64::default(),
                Complex64::from_polar(1.0, -std::f64::consts::PI * f * tau_s),
            );
            let pmd = r1 * d * r1h;
            (rot * pmd).scale(cd * loss)
        })
        .collect();
    Ok(JonesOperator::PerBin(matrices))
}

/// Propagate through the fiber: chromatic dispersion, first-order PMD, the
/// static SOP rotation, then scalar loss.
pub fn propagate(
    sig: &DualPolSignal,
    p: &FiberParams,
    realization: &ChannelRealization,
) -> Result<DualPolSignal> {
    p.validate()?;
    if !realization.static_rotation.is_unitary(1e-9) {
        return Err(Error::NonUnitary {
            residual: realization.static_rotation.unitarity_residual(),
        });
    }
    if p.length_km == 0.0 {
        // Degenerate length: only the static rotation applies.
        return JonesOperator::Flat(realization.static_rotation).apply(sig);
    }
    let op = fiber_operator(sig.len(), sig.sample_rate(), p, realization)?;
    op.apply(sig)
}

/// Add circular complex white Gaussian noise to both polarizations so that
/// total signal power over noise density times 12.5 GHz equals the
/// requested OSNR. Noise occupies the full simulation bandwidth. An
/// infinite `osnr_db` disables loading.
pub fn load_osnr(sig: &DualPolSignal, osnr_db: f64, rng: &Rng) -> Result<DualPolSignal> {
    if osnr_db.is_infinite() && osnr_db > 0.0 {
        return Ok(sig.clone());
    }
    let p_sig = sig.total_power();
    if !(p_sig > 0.0) {
        return Err(Error::ZeroPower);
    }
    // Density per polarization, mW/Hz.
    let n0 = p_sig * 10.0f64.powf(-osnr_db / 10.0) / OSNR_REF_BANDWIDTH;
    let sigma = (n0 * sig.sample_rate()).sqrt();
    let mut rx = rng.stream("osnr_x");
    let mut ry = rng.stream("osnr_y");
    let x: Vec<Complex64> = sig
        .x()
        .iter()
        .map(|v| v + rx.complex_normal() * sigma)
        .collect();
    let y: Vec<Complex64> = sig
        .y()
        .iter()
        .map(|v| v + ry.complex_normal() * sigma)
        .collect();
    sig.with_components(x, y)
}

/// Slowly varying SOP rotation sampled at the control-loop cadence.
///
/// Angles evolve as Gaussian random walks with per-step standard deviation
/// `sop_drift_rate * dt` and are interpolated linearly between steps.
#[derive(Debug, Clone)]
pub struct SopTrajectory {
    angles: Vec<[f64; 3]>,
    dt: f64,
}

impl SopTrajectory {
    /// Constant identity trajectory (no drift).
    pub fn frozen(horizon_s: f64) -> Self {
        SopTrajectory {
            angles: vec![[0.0; 3]; 2],
            dt: horizon_s.max(f64::EPSILON),
        }
    }

    /// Random-walk drift at `rate` rad/s, sampled every `dt` seconds.
    pub fn random_walk(rate: f64, dt: f64, steps: usize, rng: &Rng) -> Self {
        let mut r = rng.stream("sop_drift");
        let sigma = rate * dt;
        let mut angles = Vec::with_capacity(steps + 1);
        let mut cur = [0.0f64; 3];
        angles.push(cur);
        for _ in 0..steps {
            for a in cur.iter_mut() {
                *a += sigma * r.normal();
            }
            angles.push(cur);
        }
        SopTrajectory { angles, dt }
    }

    /// Deterministic continuous winding about the 45-degree retarder axis at
    /// `rate` rad/s; exercises endless tracking through full revolutions.
    pub fn winding(rate: f64, dt: f64, steps: usize) -> Self {
        let angles = (0..=steps)
            .map(|k| [0.0, rate * dt * k as f64, 0.0])
            .collect();
        SopTrajectory { angles, dt }
    }

    pub fn horizon(&self) -> f64 {
        (self.angles.len() - 1) as f64 * self.dt
    }

    /// Interpolated drift angles at time `t`.
    pub fn angles_at(&self, t: f64) -> Result<[f64; 3]> {
        if t < 0.0 || t > self.horizon() + 1e-12 {
            return Err(Error::BeyondHorizon {
                t,
                horizon: self.horizon(),
            });
        }
        let pos = (t / self.dt).min((self.angles.len() - 1) as f64);
        let idx = pos.floor() as usize;
        let frac = pos - idx as f64;
        if idx + 1 >= self.angles.len() {
            return Ok(self.angles[self.angles.len() - 1]);
        }
        let a = self.angles[idx];
        let b = self.angles[idx + 1];
        Ok([
            a[0] + (b[0] - a[0]) * frac,
            a[1] + (b[1] - a[1]) * frac,
            a[2] + (b[2] - a[2]) * frac,
        ])
    }

    /// Mean increment magnitude per step, for statistics checks.
    pub fn increments(&self) -> Vec<[f64; 3]> {
        self.angles
            .windows(2)
            .map(|w| {
                [
                    w[1][0] - w[0][0],
                    w[1][1] - w[0][1],
                    w[1][2] - w[0][2],
                ]
            })
            .collect()
    }
}

/// Unitary drift rotation at time `t`, continuous in `t`.
pub fn drift_step(traj: &SopTrajectory, t: f64) -> Result<JonesMatrix> {
    let [a1, a2, a3] = traj.angles_at(t)?;
    Ok(JonesMatrix::from_euler(a1, a2, a3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::signal::C_BAND_WAVELENGTH;
    use crate::field::{apply_jones, Polarization};

    fn fiber_20km() -> FiberParams {
        FiberParams::default()
    }

    fn random_signal(seed: u64, n: usize, fs: f64) -> DualPolSignal {
        let mut rng = Rng::new(seed).stream("sig");
        let x: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
        let y: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
        DualPolSignal::new(x, y, fs, C_BAND_WAVELENGTH).unwrap()
    }

    #[test]
    fn cd_at_zero_frequency_is_unity() {
        let h = cd_transfer(0.0, &fiber_20km());
        assert!((h - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cd_is_all_pass() {
        let p = fiber_20km();
        let mut rng = Rng::new(1).stream("freqs");
        for _ in 0..1000 {
            let f = (rng.uniform() - 0.5) * 100.0e9;
            assert!((cd_transfer(f, &p).norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn cd_group_delay_matches_dispersion_coefficient() {
        // D = 16 ps/(nm km), L = 20 km, f = +/-12.5 GHz. The group-delay
        // difference across 25 GHz equals D * L * dlambda with
        // dlambda = lambda^2 * 25 GHz / c, about 64 ps.
        let p = fiber_20km();
        let df = 1.0e6; // finite-difference step
        let group_delay = |f: f64| -> f64 {
            let h1 = cd_transfer(f + df, &p);
            let h0 = cd_transfer(f - df, &p);
            // tau_g = d(phase)/d(omega)
            (h1 * h0.conj()).arg() / (std::f64::consts::TAU * 2.0 * df)
        };
        let delta = group_delay(12.5e9) - group_delay(-12.5e9);
        let dlambda = p.ref_wavelength * p.ref_wavelength * 25.0e9 / SPEED_OF_LIGHT;
        let expected = p.dispersion_d * 1.0e-6 * p.length_km * 1.0e3 * dlambda;
        assert!(
            (delta.abs() - expected).abs() / expected < 0.01,
            "group delay difference {} ps vs {} ps",
            delta.abs() * 1e12,
            expected * 1e12
        );
        assert!((expected * 1e12 - 64.0).abs() < 1.0);
    }

    #[test]
    fn zero_length_applies_rotation_only() {
        let sig = random_signal(2, 256, 100.0e9);
        let mut rng = Rng::new(3).stream("u");
        let rot = JonesMatrix::random_unitary(&mut rng);
        let p = FiberParams {
            length_km: 0.0,
            dgd_mean_ps: 0.0,
            ..fiber_20km()
        };
        let out = propagate(&sig, &p, &ChannelRealization::with_rotation(rot)).unwrap();
        let direct = apply_jones(&sig, &JonesOperator::Flat(rot)).unwrap();
        for (a, b) in out.x().iter().zip(direct.x()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn attenuation_scales_power() {
        let sig = random_signal(4, 4096, 100.0e9);
        let p = FiberParams {
            length_km: 10.0,
            atten_db_km: 0.2,
            ..fiber_20km()
        };
        let mut rng = Rng::new(5).stream("u");
        let realization = ChannelRealization {
            static_rotation: JonesMatrix::random_unitary(&mut rng),
            pmd_axes: JonesMatrix::IDENTITY,
            dgd_ps: 0.0,
        };
        let out = propagate(&sig, &p, &realization).unwrap();
        let ratio = out.total_power() / sig.total_power();
        assert!((ratio - 10.0f64.powf(-0.2)).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn identity_channel_reduces_to_rotation() {
        let sig = random_signal(6, 512, 100.0e9);
        let p = FiberParams {
            length_km: 5.0,
            dispersion_d: 0.0,
            slope_s: 0.0,
            atten_db_km: 0.0,
            ..fiber_20km()
        };
        let mut rng = Rng::new(7).stream("u");
        let rot = JonesMatrix::random_unitary(&mut rng);
        let realization = ChannelRealization {
            static_rotation: rot,
            pmd_axes: JonesMatrix::IDENTITY,
            dgd_ps: 0.0,
        };
        let out = propagate(&sig, &p, &realization).unwrap();
        let direct = apply_jones(&sig, &JonesOperator::Flat(rot)).unwrap();
        for (a, b) in out.x().iter().zip(direct.x()) {
            assert!((a - b).norm() < 1e-10);
        }
        for (a, b) in out.y().iter().zip(direct.y()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn non_unitary_rotation_rejected() {
        let sig = random_signal(19, 64, 100.0e9);
        let scaled = JonesMatrix::IDENTITY.scale(Complex64::new(1.5, 0.0));
        let realization = ChannelRealization::with_rotation(scaled);
        assert!(propagate(&sig, &fiber_20km(), &realization).is_err());
        let zero_len = FiberParams {
            length_km: 0.0,
            ..fiber_20km()
        };
        assert!(propagate(&sig, &zero_len, &realization).is_err());
    }

    #[test]
    fn lossless_fiber_preserves_power() {
        let sig = random_signal(8, 2048, 100.0e9);
        let p = FiberParams {
            atten_db_km: 0.0,
            ..fiber_20km()
        };
        let realization = ChannelRealization::draw(&p, &Rng::new(9));
        let out = propagate(&sig, &p, &realization).unwrap();
        let rel = (out.total_power() - sig.total_power()).abs() / sig.total_power();
        assert!(rel < 1e-9, "relative power change {rel}");
    }

    #[test]
    fn cd_commutes_with_flat_rotation() {
        let sig = random_signal(10, 1024, 100.0e9);
        let p = FiberParams {
            atten_db_km: 0.0,
            dgd_mean_ps: 0.0,
            ..fiber_20km()
        };
        let mut rng = Rng::new(11).stream("u");
        let rot = JonesMatrix::random_unitary(&mut rng);
        let cd_only = ChannelRealization::identity();
        let cd_out = propagate(&sig, &p, &cd_only).unwrap();
        let a = apply_jones(&cd_out, &JonesOperator::Flat(rot)).unwrap();
        let rot_first = apply_jones(&sig, &JonesOperator::Flat(rot)).unwrap();
        let b = propagate(&rot_first, &p, &cd_only).unwrap();
        for (u, v) in a.x().iter().zip(b.x()) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn pmd_operator_is_unitary_and_splits_group_delay() {
        let p = FiberParams {
            atten_db_km: 0.0,
            ..fiber_20km()
        };
        let tau_ps = 5.0;
        let mut rng = Rng::new(12).stream("axes");
        let axes = JonesMatrix::random_unitary(&mut rng);
        let realization = ChannelRealization {
            static_rotation: JonesMatrix::IDENTITY,
            pmd_axes: axes,
            dgd_ps: tau_ps,
        };
        let n = 1024;
        let fs = 100.0e9;
        let op = fiber_operator(n, fs, &p, &realization).unwrap();
        assert!(op.unitarity_residual() < 1e-10);

        // Measure DGD from the phase slope difference of the two principal
        // states, with the common CD phase cancelling in the difference.
        let mats = match &op {
            JonesOperator::PerBin(m) => m,
            _ => unreachable!(),
        };
        let freqs = bin_frequencies(n, fs);
        let proj = |m: &JonesMatrix, col: usize| -> Complex64 {
            // diag entry of R1^H J R1
            let j = axes.adjoint() * *m * axes;
            if col == 0 {
                j.m00
            } else {
                j.m11
            }
        };
        let k0 = 3usize;
        let k1 = 4usize;
        let dphi0 = (proj(&mats[k1], 0) * proj(&mats[k0], 0).conj()).arg();
        let dphi1 = (proj(&mats[k1], 1) * proj(&mats[k0], 1).conj()).arg();
        let df = freqs[k1] - freqs[k0];
        let tau_est = (dphi0 - dphi1) / (std::f64::consts::TAU * df);
        assert!(
            (tau_est * 1e12 - tau_ps).abs() / tau_ps < 0.01,
            "measured DGD {} ps",
            tau_est * 1e12
        );
    }

    #[test]
    fn osnr_arithmetic() {
        // 1 mW signal at 25 dB OSNR puts 3.162 uW of noise in 12.5 GHz.
        let n0 = 1.0 * 10.0f64.powf(-2.5) / OSNR_REF_BANDWIDTH;
        let p_ref = n0 * OSNR_REF_BANDWIDTH;
        assert!((p_ref - 3.162e-3).abs() < 1e-5);
    }

    #[test]
    fn infinite_osnr_is_identity() {
        let sig = random_signal(13, 128, 10.0e9);
        let out = load_osnr(&sig, f64::INFINITY, &Rng::new(1)).unwrap();
        assert_eq!(sig.x(), out.x());
        assert_eq!(sig.y(), out.y());
    }

    #[test]
    fn loaded_osnr_measured_from_spectrum() {
        // Band-limited signal so an out-of-band region exists to estimate
        // the noise density from.
        let fs = 200.0e9;
        let sps = 8;
        let mut rng = Rng::new(14).stream("syms");
        let bits = crate::txchain::gen_bits(&mut rng, 15, 2 * 8192).unwrap();
        let symbols = crate::txchain::map_symbols(&bits, crate::txchain::Format::Qpsk).unwrap();
        let taps = crate::txchain::rrc_taps(0.1, sps);
        let x = crate::txchain::shape_stream(&symbols, &taps, sps);
        let y = vec![Complex64::default(); x.len()];
        let sig = DualPolSignal::new(x, y, fs, C_BAND_WAVELENGTH).unwrap();

        let target = 20.0;
        let noisy = load_osnr(&sig, target, &Rng::new(15)).unwrap();

        let table = crate::field::psd(&noisy, 1024, Polarization::X).unwrap();
        // Signal occupies |f| < 13.75 GHz; estimate density beyond 40 GHz.
        let noise_band: Vec<f64> = table
            .iter()
            .filter(|p| p.frequency.abs() > 40.0e9 && p.frequency.abs() < 90.0e9)
            .map(|p| p.density)
            .collect();
        let n0_est: f64 = noise_band.iter().sum::<f64>() / noise_band.len() as f64;
        let p_total = noisy.total_power();
        let p_noise = 2.0 * n0_est * fs; // both polarizations
        let p_sig = p_total - p_noise;
        let osnr_est = 10.0 * (p_sig / (n0_est * OSNR_REF_BANDWIDTH)).log10();
        assert!(
            (osnr_est - target).abs() < 0.2,
            "estimated OSNR {osnr_est} dB"
        );
    }

    #[test]
    fn drift_zero_walk_is_identity() {
        let traj = SopTrajectory::frozen(1.0);
        let m = drift_step(&traj, 0.0).unwrap();
        assert!((m.m00 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(m.m01.norm() < 1e-15);
    }

    #[test]
    fn drift_is_unitary_everywhere() {
        let traj = SopTrajectory::random_walk(5.0, 1e-3, 200, &Rng::new(16));
        for k in 0..200 {
            let t = k as f64 * 1e-3;
            assert!(drift_step(&traj, t).unwrap().is_unitary(1e-12));
        }
    }

    #[test]
    fn drift_beyond_horizon_rejected() {
        let traj = SopTrajectory::random_walk(1.0, 1e-3, 10, &Rng::new(17));
        assert!(drift_step(&traj, 0.5).is_err());
    }

    #[test]
    fn drift_increment_statistics() {
        let rate = 2.0;
        let dt = 1e-3;
        let traj = SopTrajectory::random_walk(rate, dt, 20_000, &Rng::new(18));
        for axis in 0..3 {
            let incs: Vec<f64> = traj.increments().iter().map(|i| i[axis]).collect();
            let mean: f64 = incs.iter().sum::<f64>() / incs.len() as f64;
            let var: f64 =
                incs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / incs.len() as f64;
            let std = var.sqrt();
            let expected = rate * dt;
            assert!(
                (std - expected).abs() / expected < 0.10,
                "axis {axis}: std {std}, expected {expected}"
            );
        }
    }
}
