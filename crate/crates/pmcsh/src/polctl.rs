//! Adaptive polarization control: gradient descent on the monitor
//! photodetector power, demultiplexing the carrier from the signal under
//! state-of-polarization drift.
//!
//! The loop is strictly sequential; the probe order (plus/minus dither on
//! each plate in turn) is part of the determinism contract.

use num_complex::Complex64;

use crate::channel::{drift_step, SopTrajectory};
use crate::error::{Error, Result};
use crate::field::{DualPolSignal, JonesMatrix, Rng};
use crate::rxfront::{epc_jones, EpcState, ReceiverParams};

/// Control-loop tuning.
#[derive(Debug, Clone, Copy)]
pub struct ControllerParams {
    /// Step along the normalized gradient, rad.
    pub step_mu: f64,
    /// Dither amplitude for finite differences, rad.
    pub dither_delta: f64,
    /// Iterations per second.
    pub loop_rate: f64,
    pub max_iters: usize,
    /// Convergence declared when the monitor power span over `window`
    /// iterations stays below this many dB (static channel only).
    pub converge_tol_db: f64,
    pub window: usize,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            step_mu: 0.05,
            dither_delta: 0.02,
            loop_rate: 1000.0,
            max_iters: 400,
            converge_tol_db: 0.05,
            window: 50,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_mu > 0.0 && self.dither_delta > 0.0 && self.loop_rate > 0.0) {
            return Err(Error::InvalidParameter(
                "step_mu, dither_delta and loop_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One recorded control iteration.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub time_s: f64,
    pub monitor_mw: f64,
    pub retardances: Vec<f64>,
    pub extinction_db: f64,
}

/// Full loop history plus summary flags.
#[derive(Debug, Clone, Default)]
pub struct ControllerTrace {
    pub entries: Vec<TraceEntry>,
    pub converged: bool,
    pub diverged: bool,
}

impl ControllerTrace {
    pub fn iterations(&self) -> usize {
        self.entries.len()
    }

    pub fn final_extinction_db(&self) -> Option<f64> {
        self.entries.last().map(|e| e.extinction_db)
    }

    /// Fraction of post-convergence iterations holding at least
    /// `threshold_db` of extinction, where convergence is the first
    /// iteration reaching the threshold. `None` for an empty trace or one
    /// that never reached it.
    pub fn extinction_duty(&self, threshold_db: f64) -> Option<f64> {
        let first = self
            .entries
            .iter()
            .position(|e| e.extinction_db >= threshold_db)?;
        let tail = &self.entries[first..];
        let good = tail
            .iter()
            .filter(|e| e.extinction_db >= threshold_db)
            .count();
        Some(good as f64 / tail.len() as f64)
    }
}

/// Extinction ratio between the two PBS branches, dB:
/// 10 log10(P_lo / P_signal).
pub fn extinction(p_lo_branch: f64, p_signal_branch: f64) -> Result<f64> {
    if !(p_lo_branch > 0.0 && p_signal_branch > 0.0) {
        return Err(Error::ZeroPower);
    }
    Ok(10.0 * (p_lo_branch / p_signal_branch).log10())
}

/// Central-difference gradient of the probe function with respect to each
/// retardance, restoring the state between probes. Two probes per plate.
pub fn estimate_gradient<F>(
    state: &EpcState,
    mut probe: F,
    delta: f64,
) -> Result<Vec<f64>>
where
    F: FnMut(&EpcState) -> Result<f64>,
{
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("dither delta must be positive".into()));
    }
    let mut gradient = Vec::with_capacity(state.n_plates());
    for plate in 0..state.n_plates() {
        let mut plus = state.retardances.clone();
        plus[plate] += delta;
        let p_plus = probe(&state.with_retardances(plus))?;
        let mut minus = state.retardances.clone();
        minus[plate] -= delta;
        let p_minus = probe(&state.with_retardances(minus))?;
        gradient.push((p_plus - p_minus) / (2.0 * delta));
    }
    Ok(gradient)
}

/// Normalized gradient-descent update:
/// phi <- phi - step_mu * g / (||g|| + eps). Accumulators are not wrapped.
pub fn control_step(state: &EpcState, gradient: &[f64], p: &ControllerParams) -> EpcState {
    let norm: f64 = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    let scale = p.step_mu / (norm + 1e-12);
    let retardances = state
        .retardances
        .iter()
        .zip(gradient)
        .map(|(r, g)| r - scale * g)
        .collect();
    state.with_retardances(retardances)
}

/// 2x2 Hermitian field covariance, mean of the outer product r r^H over a
/// sample block. Mean branch powers after any flat operator T follow as
/// the diagonal of T C T^H, which is what the control loop monitors.
#[derive(Debug, Clone, Copy)]
pub struct FieldCovariance {
    pub cxx: f64,
    pub cyy: f64,
    pub cxy: Complex64,
}

impl FieldCovariance {
    pub fn of(sig: &DualPolSignal) -> Self {
        let n = sig.len() as f64;
        let mut cxx = 0.0;
        let mut cyy = 0.0;
        let mut cxy = Complex64::default();
        for (x, y) in sig.x().iter().zip(sig.y()) {
            cxx += x.norm_sqr();
            cyy += y.norm_sqr();
            cxy += x * y.conj();
        }
        FieldCovariance {
            cxx: cxx / n,
            cyy: cyy / n,
            cxy: cxy / n,
        }
    }

    /// Covariance of the field after applying `m`: m C m^H.
    pub fn transformed(&self, m: &JonesMatrix) -> FieldCovariance {
        let c00 = Complex64::new(self.cxx, 0.0);
        let c11 = Complex64::new(self.cyy, 0.0);
        let c01 = self.cxy;
        let c10 = self.cxy.conj();
        // rows of m C
        let r00 = m.m00 * c00 + m.m01 * c10;
        let r01 = m.m00 * c01 + m.m01 * c11;
        let r10 = m.m10 * c00 + m.m11 * c10;
        let r11 = m.m10 * c01 + m.m11 * c11;
        FieldCovariance {
            cxx: (r00 * m.m00.conj() + r01 * m.m01.conj()).re,
            cyy: (r10 * m.m10.conj() + r11 * m.m11.conj()).re,
            cxy: r00 * m.m10.conj() + r01 * m.m11.conj(),
        }
    }

    /// Branch powers (x, y) after applying `t`.
    pub fn branch_powers(&self, t: &JonesMatrix) -> (f64, f64) {
        let px = t.m00.norm_sqr() * self.cxx
            + t.m01.norm_sqr() * self.cyy
            + 2.0 * (t.m00 * self.cxy * t.m01.conj()).re;
        let py = t.m10.norm_sqr() * self.cxx
            + t.m11.norm_sqr() * self.cyy
            + 2.0 * (t.m10 * self.cxy * t.m11.conj()).re;
        (px.max(0.0), py.max(0.0))
    }

    pub fn total(&self) -> f64 {
        self.cxx + self.cyy
    }
}

/// Everything the control loop needs to evaluate one monitor probe: field
/// covariances of the fiber output, the drift trajectory, and receiver
/// parameters.
///
/// The monitored reading uses the physical (noise-loaded) covariance; the
/// recorded extinction uses the coherent carrier+signal covariance, since
/// wideband channel noise outside the signal band would otherwise mask the
/// separation quality the ratio is meant to express.
#[derive(Debug, Clone)]
pub struct ControlLink {
    /// Covariance of the received field including loaded channel noise.
    pub physical: FieldCovariance,
    /// Covariance of the propagated carrier+signal field, noise excluded.
    pub coherent: FieldCovariance,
    /// Covariance of the propagated carrier alone, for diagnostics.
    pub carrier: Option<FieldCovariance>,
    pub receiver: ReceiverParams,
    /// Monitor samples averaged per probe.
    pub probe_avg: usize,
    monitor_rng: Rng,
}

impl ControlLink {
    pub fn new(
        physical: FieldCovariance,
        coherent: FieldCovariance,
        receiver: ReceiverParams,
        rng: &Rng,
    ) -> Self {
        ControlLink {
            physical,
            coherent,
            carrier: None,
            receiver,
            probe_avg: 32,
            monitor_rng: rng.stream("monitor_pd"),
        }
    }

    /// Link with no noise sources, for oracles.
    pub fn noiseless(coherent: FieldCovariance, receiver: ReceiverParams) -> Self {
        ControlLink {
            physical: coherent,
            coherent,
            carrier: None,
            receiver: ReceiverParams {
                thermal_noise_density: 0.0,
                ..receiver
            },
            probe_avg: 32,
            monitor_rng: Rng::new(0).stream("monitor_pd"),
        }
    }

    /// Noiseless mean optical power at the monitor PD for a given EPC state
    /// and drift rotation.
    pub fn monitor_power(&self, state: &EpcState, drift: &JonesMatrix) -> f64 {
        let t = epc_jones(state) * *drift;
        let (px, _) = self.physical.branch_powers(&t);
        self.receiver.tap_ratio * px
    }

    /// Monitor probe: mean power plus thermal noise averaged over
    /// `probe_avg` detector samples, clamped at zero.
    pub fn probe(&mut self, state: &EpcState, drift: &JonesMatrix) -> f64 {
        let power = self.monitor_power(state, drift);
        let sigma = self.receiver.monitor_noise_std_mw();
        if sigma == 0.0 {
            return power;
        }
        let mut acc = 0.0;
        for _ in 0..self.probe_avg {
            acc += (power + sigma * self.monitor_rng.normal()).max(0.0);
        }
        acc / self.probe_avg as f64
    }

    /// Extinction from the coherent covariance: LO branch over signal
    /// branch after the given operators.
    pub fn extinction_db(&self, state: &EpcState, drift: &JonesMatrix) -> Result<f64> {
        let t = epc_jones(state) * *drift;
        let (px, py) = self.coherent.branch_powers(&t);
        extinction(py, px)
    }

    /// Fraction of carrier power landing in the LO branch, if the carrier
    /// covariance was provided.
    pub fn carrier_fraction_lo(&self, state: &EpcState, drift: &JonesMatrix) -> Option<f64> {
        self.carrier.map(|c| {
            let t = epc_jones(state) * *drift;
            let (px, py) = c.branch_powers(&t);
            py / (px + py)
        })
    }
}

/// Run the control loop against a drifting channel.
///
/// Each iteration probes the monitor with plus/minus dithers on every
/// plate, steps along the normalized gradient, and records the trace.
/// Terminates at `max_iters`, or earlier on convergence when the
/// trajectory is static. Divergence (monitor power above its initial value
/// for more than `window` iterations) is flagged in the trace, not fatal.
pub fn run_loop(
    link: &mut ControlLink,
    initial: EpcState,
    p: &ControllerParams,
    traj: &SopTrajectory,
) -> Result<ControllerTrace> {
    p.validate()?;
    let drift_disabled = traj.horizon() <= 0.0
        || traj
            .increments()
            .iter()
            .all(|i| i.iter().all(|a| *a == 0.0));

    let mut state = initial;
    let mut trace = ControllerTrace::default();
    let mut initial_power = None;
    let mut above_initial = 0usize;

    for iter in 0..p.max_iters {
        let t = iter as f64 / p.loop_rate;
        let drift = drift_step(traj, t.min(traj.horizon()))?;

        let gradient = estimate_gradient(&state, |s| Ok(link.probe(s, &drift)), p.dither_delta)?;
        state = control_step(&state, &gradient, p);

        let monitor_mw = link.probe(&state, &drift);
        let extinction_db = link.extinction_db(&state, &drift)?;
        trace.entries.push(TraceEntry {
            time_s: t,
            monitor_mw,
            retardances: state.retardances.clone(),
            extinction_db,
        });

        let p0 = *initial_power.get_or_insert(monitor_mw);
        if monitor_mw > p0 {
            above_initial += 1;
            if above_initial > p.window {
                trace.diverged = true;
            }
        } else {
            above_initial = 0;
        }

        if drift_disabled && trace.entries.len() >= p.window {
            let tail = &trace.entries[trace.entries.len() - p.window..];
            let lo = tail
                .iter()
                .map(|e| e.monitor_mw)
                .fold(f64::INFINITY, f64::min);
            let hi = tail
                .iter()
                .map(|e| e.monitor_mw)
                .fold(f64::NEG_INFINITY, f64::max);
            if lo > 0.0 && 10.0 * (hi / lo).log10() < p.converge_tol_db {
                trace.converged = true;
                break;
            }
        }
    }
    if !drift_disabled {
        // A drifting channel never "converges"; completing the schedule
        // while tracking counts as success unless divergence was flagged.
        trace.converged = !trace.diverged;
    }
    Ok(trace)
}

/// Final EPC state recorded in a trace, reconstructed onto `template`.
pub fn final_state(template: &EpcState, trace: &ControllerTrace) -> EpcState {
    match trace.entries.last() {
        Some(e) => template.with_retardances(e.retardances.clone()),
        None => template.clone(),
    }
}
