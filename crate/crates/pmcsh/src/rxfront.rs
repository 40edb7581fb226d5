//! Receiver optical front-end: endless polarization controller, PBS,
//! monitor tap, low-bandwidth monitor photodetector, and the 90-degree
//! hybrid with balanced photodetectors.
//!
//! Powers are in mW and responsivity in A/W, so photocurrents come out in
//! mA; all downstream metrology is scale-invariant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{DualPolSignal, JonesMatrix, Rng};

/// Electron charge, C.
const Q_E: f64 = 1.602e-19;

/// Retardance state of the endless polarization controller.
///
/// Retardances are unbounded accumulators; the optics only see them modulo
/// 2 pi, which is what makes endless tracking possible without resets.
#[derive(Debug, Clone, PartialEq)]
pub struct EpcState {
    pub retardances: Vec<f64>,
    /// Fixed waveplate axis orientations, rad.
    pub axes: Vec<f64>,
    /// Drive-voltage scale, V/rad; bookkeeping only.
    pub volts_per_rad: f64,
}

impl EpcState {
    /// Standard four-plate controller at axes [0, 45, 0, 45] degrees.
    pub fn four_plate() -> Self {
        EpcState {
            retardances: vec![0.0; 4],
            axes: vec![
                0.0,
                std::f64::consts::FRAC_PI_4,
                0.0,
                std::f64::consts::FRAC_PI_4,
            ],
            volts_per_rad: 1.0,
        }
    }

    /// Reduced two-plate instance at axes [0, 45] degrees.
    pub fn two_plate() -> Self {
        EpcState {
            retardances: vec![0.0; 2],
            axes: vec![0.0, std::f64::consts::FRAC_PI_4],
            volts_per_rad: 1.0,
        }
    }

    pub fn n_plates(&self) -> usize {
        self.retardances.len()
    }

    pub fn with_retardances(&self, retardances: Vec<f64>) -> Self {
        assert_eq!(retardances.len(), self.axes.len());
        EpcState {
            retardances,
            axes: self.axes.clone(),
            volts_per_rad: self.volts_per_rad,
        }
    }

    /// Drive voltages corresponding to the retardance accumulators.
    pub fn voltages(&self) -> Vec<f64> {
        self.retardances
            .iter()
            .map(|r| r * self.volts_per_rad)
            .collect()
    }
}

/// Jones matrix of the EPC: the cascade of its waveplates, first plate
/// applied first.
pub fn epc_jones(state: &EpcState) -> JonesMatrix {
    state
        .axes
        .iter()
        .zip(&state.retardances)
        .fold(JonesMatrix::IDENTITY, |acc, (axis, phi)| {
            JonesMatrix::waveplate(*axis, *phi) * acc
        })
}

/// Receiver parameters.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverParams {
    /// Fraction of the signal-branch power routed to the monitor PD.
    pub tap_ratio: f64,
    /// Photodiode responsivity, A/W.
    pub responsivity: f64,
    /// Thermal noise current density, A/sqrt(Hz).
    pub thermal_noise_density: f64,
    pub shot_noise: bool,
    /// Monitor photodetector bandwidth, Hz.
    pub monitor_bw: f64,
    /// Signal photodetector bandwidth, Hz; infinite disables the low-pass.
    pub pd_bw: f64,
}

impl Default for ReceiverParams {
    fn default() -> Self {
        ReceiverParams {
            tap_ratio: 0.10,
            responsivity: 0.8,
            thermal_noise_density: 15.0e-12,
            shot_noise: true,
            monitor_bw: 100.0e3,
            pd_bw: f64::INFINITY,
        }
    }
}

impl ReceiverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tap_ratio > 0.0 && self.tap_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tap_ratio must lie in (0, 1), got {}",
                self.tap_ratio
            )));
        }
        if !(self.responsivity > 0.0) {
            return Err(Error::InvalidParameter(
                "responsivity must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Thermal-noise std of one monitor power reading, mW.
    pub fn monitor_noise_std_mw(&self) -> f64 {
        // Current noise over the monitor bandwidth, referred back to
        // optical power through the responsivity. A/(A/W) = W -> mW.
        self.thermal_noise_density * self.monitor_bw.sqrt() / self.responsivity * 1.0e3
    }
}

/// Split into the two linear polarization branches. Branch powers sum to
/// the input total power exactly.
pub fn pbs_split(sig: &DualPolSignal) -> (Vec<Complex64>, Vec<Complex64>) {
    (sig.x().to_vec(), sig.y().to_vec())
}

/// Power tap: amplitude sqrt(1-ratio) to the main port, sqrt(ratio) to the
/// monitor port.
pub fn tap(branch: &[Complex64], ratio: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tap ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let main_gain = (1.0 - ratio).sqrt();
    let mon_gain = ratio.sqrt();
    Ok((
        branch.iter().map(|v| v * main_gain).collect(),
        branch.iter().map(|v| v * mon_gain).collect(),
    ))
}

/// Monitor photodetector reading over one control interval, in mW.
///
/// The detector bandwidth sits far below the symbol rate, so the optical
/// power is averaged over the whole interval; thermal noise enters with
/// the monitor bandwidth and the reading clamps at zero.
pub fn monitor_pd(monitor: &[Complex64], p: &ReceiverParams, rng: &mut Rng) -> f64 {
    let mean: f64 = if monitor.is_empty() {
        0.0
    } else {
        monitor.iter().map(|v| v.norm_sqr()).sum::<f64>() / monitor.len() as f64
    };
    let noisy = mean + p.monitor_noise_std_mw() * rng.normal();
    noisy.max(0.0)
}

/// Noiseless monitor reading for a known mean optical power, mW.
pub fn monitor_reading_from_power(power_mw: f64, p: &ReceiverParams, rng: &mut Rng) -> f64 {
    (power_mw + p.monitor_noise_std_mw() * rng.normal()).max(0.0)
}

/// Baseband electrical output of the hybrid/BPD pair.
#[derive(Debug, Clone)]
pub struct IqWaveforms {
    /// In-phase photocurrent, mA.
    pub i: Vec<f64>,
    /// Quadrature photocurrent, mA.
    pub q: Vec<f64>,
    /// Sample rate, Hz.
    pub rate: f64,
}

impl IqWaveforms {
    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    /// Complex view i + j q.
    pub fn to_complex(&self) -> Vec<Complex64> {
        self.i
            .iter()
            .zip(&self.q)
            .map(|(i, q)| Complex64::new(*i, *q))
            .collect()
    }
}

/// Ideal 90-degree hybrid with balanced photodetection:
/// i = R Re(s conj(c)), q = R Im(s conj(c)), plus shot and thermal noise,
/// then an optional single-pole low-pass at the detector bandwidth.
pub fn hybrid_bpd(
    signal: &[Complex64],
    carrier: &[Complex64],
    rate: f64,
    p: &ReceiverParams,
    rng: &Rng,
) -> Result<IqWaveforms> {
    if signal.len() != carrier.len() {
        return Err(Error::LengthMismatch {
            left: signal.len(),
            right: carrier.len(),
        });
    }
    let bandwidth = rate / 2.0;
    let thermal_ma = p.thermal_noise_density * bandwidth.sqrt() * 1.0e3;
    let mut shot_i = rng.stream("shot_i");
    let mut shot_q = rng.stream("shot_q");
    let mut th_i = rng.stream("thermal_i");
    let mut th_q = rng.stream("thermal_q");

    let mut i = Vec::with_capacity(signal.len());
    let mut q = Vec::with_capacity(signal.len());
    for (s, c) in signal.iter().zip(carrier) {
        let beat = s * c.conj() * p.responsivity;
        let (mut vi, mut vq) = (beat.re, beat.im);
        if p.shot_noise {
            // 2 q R P B with P the mean incident power per balanced pair,
            // converted W -> mW and A -> mA.
            let p_w = (s.norm_sqr() + c.norm_sqr()) * 0.5 * 1.0e-3;
            let var_a2 = 2.0 * Q_E * p.responsivity * p_w * bandwidth;
            let sigma_ma = var_a2.sqrt() * 1.0e3;
            vi += sigma_ma * shot_i.normal();
            vq += sigma_ma * shot_q.normal();
        }
        if thermal_ma > 0.0 {
            vi += thermal_ma * th_i.normal();
            vq += thermal_ma * th_q.normal();
        }
        i.push(vi);
        q.push(vq);
    }

    if p.pd_bw.is_finite() && p.pd_bw < bandwidth {
        let alpha = 1.0 - (-std::f64::consts::TAU * p.pd_bw / rate).exp();
        single_pole(&mut i, alpha);
        single_pole(&mut q, alpha);
    }
    Ok(IqWaveforms { i, q, rate })
}

fn single_pole(v: &mut [f64], alpha: f64) {
    let mut state = v[0];
    for s in v.iter_mut() {
        state += alpha * (*s - state);
        *s = state;
    }
}

/// Noiseless receiver for loopback tests.
pub fn noiseless_receiver() -> ReceiverParams {
    ReceiverParams {
        thermal_noise_density: 0.0,
        shot_noise: false,
        ..ReceiverParams::default()
    }
}
