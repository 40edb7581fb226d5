//! Scenario execution: wires the full pipeline, runs the control loop,
//! demodulates, and writes the report artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use super::config::{ControlMode, Scenario};
use crate::channel::{drift_step, load_osnr, propagate, ChannelRealization, SopTrajectory};
use crate::dsp::{
    dfe_equalize, demap_count, matched_filter_downsample, phase_align, rde_equalize,
    spectrum_report, Metrics, SpectrumReport,
};
use crate::error::{Error, Result};
use crate::field::{apply_jones, JonesMatrix, JonesOperator, Rng};
use crate::polctl::{final_state, run_loop, ControlLink, ControllerTrace, FieldCovariance};
use crate::rxfront::{epc_jones, hybrid_bpd, pbs_split, tap, EpcState};
use crate::txchain::{build_tx, preamble_symbols, TxFrame};

/// Fixed CSV float format: 17 significant digits, '.' decimal separator.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Controller summary lines of the report.
#[derive(Debug, Clone, Serialize)]
pub struct ControllerSummary {
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
}

/// Emitted artifact paths.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFiles {
    pub constellation: PathBuf,
    pub spectra: PathBuf,
    pub ctl_trace: PathBuf,
    pub report: PathBuf,
}

/// Outcome of one scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct LinkReport {
    pub metrics: Metrics,
    /// Bypass-path metrics (matched filter + static alignment only); equals
    /// `metrics` when the scenario itself runs in bypass mode.
    pub metrics_bypass: Metrics,
    pub extinction_final_db: f64,
    /// Fraction of carrier power in the LO branch at the final state.
    pub carrier_fraction_lo: f64,
    /// Fraction of post-convergence control iterations holding >= 10 dB
    /// extinction; absent when the controller did not run.
    pub extinction_duty_10db: Option<f64>,
    pub controller: ControllerSummary,
    pub files: ReportFiles,
}

/// Full pipeline products, for callers that need more than the report.
pub struct RunOutput {
    pub metrics: Metrics,
    pub metrics_bypass: Metrics,
    pub extinction_final_db: f64,
    pub carrier_fraction_lo: f64,
    pub trace: ControllerTrace,
    /// Payload symbols after matched filter and static alignment.
    pub payload_pre_eq: Vec<Complex64>,
    /// Payload symbols at the pipeline output (equalized unless bypassed).
    pub payload_post_eq: Vec<Complex64>,
    pub spectra_before: SpectrumReport,
    pub spectra_after: SpectrumReport,
    pub frame: TxFrame,
}

/// Run the scenario pipeline without touching the filesystem.
pub fn execute_scenario(scenario: &Scenario) -> Result<RunOutput> {
    scenario
        .validate()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let cfg = scenario
        .tx_config()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let format = cfg.format;
    let laser = scenario.laser_params();
    let modulator = scenario
        .modulator_params()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let fiber = scenario.fiber_params();
    let receiver = scenario.receiver_params();
    let ctl = scenario.controller_params();
    let eq = scenario
        .equalizer_config()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let rng = Rng::new(scenario.seed);

    // Transmit frame and channel realization.
    let mut tx_rng = rng.stream("tx");
    let frame = build_tx(&cfg, &laser, &modulator, scenario.n_symbols, &mut tx_rng)?;
    let realization = if scenario.fiber.rotation_euler_deg.len() == 3 {
        let a = &scenario.fiber.rotation_euler_deg;
        ChannelRealization {
            static_rotation: JonesMatrix::from_euler(
                a[0].to_radians(),
                a[1].to_radians(),
                a[2].to_radians(),
            ),
            ..ChannelRealization::identity()
        }
    } else {
        ChannelRealization::draw(&fiber, &rng)
    };

    let fiber_out = propagate(&frame.signal, &fiber, &realization)?;
    let received = load_osnr(&fiber_out, scenario.osnr.osnr_db, &rng)?;
    let carrier_out = propagate(&frame.carrier_only(), &fiber, &realization)?;

    // Drift trajectory at the control-loop cadence.
    let dt = 1.0 / ctl.loop_rate;
    let traj = if fiber.sop_drift_rate > 0.0 {
        SopTrajectory::random_walk(fiber.sop_drift_rate, dt, ctl.max_iters + 1, &rng)
    } else {
        SopTrajectory::frozen(ctl.max_iters as f64 * dt)
    };

    // Control phase. The loop monitors mean branch powers, which follow
    // exactly from the field covariance; per-iteration waveforms are not
    // resimulated.
    let mut link = ControlLink::new(
        FieldCovariance::of(&received),
        FieldCovariance::of(&fiber_out),
        receiver,
        &rng,
    );
    link.carrier = Some(FieldCovariance::of(&carrier_out));

    let template = EpcState::four_plate();
    let (trace, epc_final, t_final) = match scenario.mode.control {
        ControlMode::Adaptive => {
            let trace = run_loop(&mut link, template.clone(), &ctl, &traj)?;
            let state = final_state(&template, &trace);
            let t = trace.entries.last().map_or(0.0, |e| e.time_s);
            (trace, state, t)
        }
        ControlMode::ManualAngles => {
            let state = template.with_retardances(scenario.mode.manual_retardances.clone());
            (ControllerTrace::default(), state, 0.0)
        }
        ControlMode::Off => (ControllerTrace::default(), template.clone(), 0.0),
    };

    let drift_initial = drift_step(&traj, 0.0)?;
    let drift_final = drift_step(&traj, t_final.min(traj.horizon()))?;
    let extinction_final_db = link.extinction_db(&epc_final, &drift_final)?;
    let carrier_fraction_lo = link
        .carrier_fraction_lo(&epc_final, &drift_final)
        .unwrap_or(f64::NAN);

    // Spectra before (initial EPC state, t = 0) and after control. The
    // capture window is far shorter than the drift timescale, so the final
    // drift rotation is frozen for demodulation.
    let initial_op = epc_jones(&template) * drift_initial;
    let final_op = epc_jones(&epc_final) * drift_final;
    let seg = scenario
        .psd_segment_len
        .min((received.len() / 4).next_power_of_two());
    let band = cfg.baud * (1.0 + cfg.rolloff);
    let spectra_before = spectrum_report(
        &apply_jones(&received, &JonesOperator::Flat(initial_op))?,
        seg,
        Some(band),
    )?;
    let rx_final = apply_jones(&received, &JonesOperator::Flat(final_op))?;
    let spectra_after = spectrum_report(&rx_final, seg, Some(band))?;

    // Receive: PBS, tap, hybrid, DSP.
    let (sig_branch, lo_branch) = pbs_split(&rx_final);
    let (sig_main, _monitor) = tap(&sig_branch, receiver.tap_ratio)?;
    let iq = hybrid_bpd(
        &sig_main,
        &lo_branch,
        rx_final.sample_rate(),
        &receiver,
        &rng,
    )?;

    let synced = matched_filter_downsample(&iq, &cfg)?;
    let preamble = preamble_symbols(cfg.preamble_len);
    let (aligned, _) = phase_align(&synced.symbols, &preamble)?;

    // Truncate to the transmitted frame length.
    let n_frame = aligned.len().min(cfg.preamble_len + scenario.n_symbols);
    let aligned = &aligned[..n_frame];
    let frame_symbols = frame.frame_symbols();
    let bps = format.bits_per_symbol();

    // Bypass metrics: matched filter + static alignment only.
    let payload_pre_eq = aligned[cfg.preamble_len.min(aligned.len())..].to_vec();
    let bypass_bits = &frame.payload_bits[..payload_pre_eq.len() * bps];
    let metrics_bypass = demap_count(&payload_pre_eq, bypass_bits, format)?;

    let (metrics, payload_post_eq) = if scenario.mode.bypass_dsp {
        (metrics_bypass.clone(), payload_pre_eq.clone())
    } else {
        let rde_out = rde_equalize(aligned, &eq, 1)?;
        let (rde_aligned, _) = phase_align(&rde_out, &preamble)?;
        let dfe_out = dfe_equalize(&rde_aligned, &frame_symbols[..n_frame], &eq, format)?;
        let payload_post_eq = dfe_out[cfg.preamble_len.min(dfe_out.len())..].to_vec();
        // Skip the data-aided training region when counting.
        let skip = eq.train_len.saturating_sub(cfg.preamble_len);
        if payload_post_eq.len() <= skip {
            return Err(Error::InvalidParameter(
                "frame shorter than the equalizer training region".into(),
            ));
        }
        let counted = &payload_post_eq[skip..];
        let bits = &frame.payload_bits[skip * bps..(skip + counted.len()) * bps];
        (demap_count(counted, bits, format)?, payload_post_eq)
    };

    Ok(RunOutput {
        metrics,
        metrics_bypass,
        extinction_final_db,
        carrier_fraction_lo,
        trace,
        payload_pre_eq,
        payload_post_eq,
        spectra_before,
        spectra_after,
        frame,
    })
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Atomic write: temp file then rename.
    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!("{name}.tmp"));
        fs::write(&tmp, contents)?;
        fs::rename(&tmp, &path)?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn remove_partial(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

/// Run one scenario, writing `constellation.csv`, `spectra.csv`,
/// `ctl_trace.csv` and `report.json` into `out_dir`. Deterministic for a
/// given scenario and seed; on error all partial files are removed.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<LinkReport> {
    let mut artifacts = Artifacts::new(out_dir)?;
    match execute_scenario(scenario).and_then(|out| write_artifacts(&out, &mut artifacts)) {
        Ok(report) => Ok(report),
        Err(e) => {
            artifacts.remove_partial();
            Err(e)
        }
    }
}

fn write_artifacts(out: &RunOutput, artifacts: &mut Artifacts) -> Result<LinkReport> {
    let constellation = {
        let mut s = String::from("symbol_index,i_pre,q_pre,i_post,q_post\n");
        let n = out.payload_pre_eq.len().min(out.payload_post_eq.len());
        for k in 0..n {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                k,
                fmt_float(out.payload_pre_eq[k].re),
                fmt_float(out.payload_pre_eq[k].im),
                fmt_float(out.payload_post_eq[k].re),
                fmt_float(out.payload_post_eq[k].im),
            ));
        }
        artifacts.write("constellation.csv", &s)?
    };

    let spectra = {
        let before = &out.spectra_before;
        let after = &out.spectra_after;
        let mut s = String::from("freq_hz,psd_x_before,psd_y_before,psd_x_after,psd_y_after\n");
        for k in 0..before.psd_x.len() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_float(before.psd_x[k].frequency),
                fmt_float(before.psd_x[k].density),
                fmt_float(before.psd_y[k].density),
                fmt_float(after.psd_x[k].density),
                fmt_float(after.psd_y[k].density),
            ));
        }
        artifacts.write("spectra.csv", &s)?
    };

    let ctl_trace = {
        let mut s = String::from("iter,time_s,monitor_mw,ext_db,phi1,phi2,phi3,phi4\n");
        for (k, e) in out.trace.entries.iter().enumerate() {
            let phis: Vec<String> = e.retardances.iter().map(|r| fmt_float(*r)).collect();
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                k,
                fmt_float(e.time_s),
                fmt_float(e.monitor_mw),
                fmt_float(e.extinction_db),
                phis.join(","),
            ));
        }
        artifacts.write("ctl_trace.csv", &s)?
    };

    let mut report = LinkReport {
        metrics: out.metrics.clone(),
        metrics_bypass: out.metrics_bypass.clone(),
        extinction_final_db: out.extinction_final_db,
        carrier_fraction_lo: out.carrier_fraction_lo,
        extinction_duty_10db: out.trace.extinction_duty(10.0),
        controller: ControllerSummary {
            iterations: out.trace.iterations(),
            converged: out.trace.converged,
            diverged: out.trace.diverged,
        },
        files: ReportFiles {
            constellation,
            spectra,
            ctl_trace,
            report: PathBuf::new(),
        },
    };
    report.files.report = artifacts.write(
        "report.json",
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&report)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
        ),
    )?;
    Ok(report)
}

/// Sweep axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Osnr,
    Baud,
    DriftRate,
    Length,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "osnr" => Some(SweepAxis::Osnr),
            "baud" => Some(SweepAxis::Baud),
            "drift_rate" => Some(SweepAxis::DriftRate),
            "length" => Some(SweepAxis::Length),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Osnr => "osnr",
            SweepAxis::Baud => "baud",
            SweepAxis::DriftRate => "drift_rate",
            SweepAxis::Length => "length",
        }
    }

    fn apply(&self, scenario: &mut Scenario, value: f64) {
        match self {
            SweepAxis::Osnr => scenario.osnr.osnr_db = value,
            SweepAxis::Baud => scenario.tx.baud_hz = value,
            SweepAxis::DriftRate => scenario.fiber.sop_drift_rate_rad_s = value,
            SweepAxis::Length => scenario.fiber.length_km = value,
        }
    }
}

/// One sweep point outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub ber: Option<f64>,
    pub evm_db: Option<f64>,
    pub extinction_db: Option<f64>,
    /// Post-convergence duty cycle at 10 dB extinction, for drift sweeps.
    pub duty_10db: Option<f64>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

/// Run one scenario per axis value with per-point seed streams; per-point
/// failures are recorded and the sweep continues. Emits `sweep.csv`.
pub fn sweep(
    base: &Scenario,
    axis: SweepAxis,
    values: &[f64],
    out_dir: &Path,
) -> Result<Vec<SweepPoint>> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(
            "sweep needs at least 2 values".into(),
        ));
    }
    fs::create_dir_all(out_dir)?;
    let seed_root = Rng::new(base.seed);
    let mut points = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let mut scenario = base.clone();
        axis.apply(&mut scenario, *v);
        scenario.seed = seed_root.stream(&format!("sweep_point_{i}")).next_u64();
        let point_dir = out_dir.join(format!("point_{i}"));
        match run_scenario(&scenario, &point_dir) {
            Ok(report) => points.push(SweepPoint {
                value: *v,
                ber: Some(report.metrics.ber),
                evm_db: Some(report.metrics.evm_db),
                extinction_db: Some(report.extinction_final_db),
                duty_10db: report.extinction_duty_10db,
                converged: Some(report.controller.converged),
                error: None,
            }),
            Err(e) => points.push(SweepPoint {
                value: *v,
                ber: None,
                evm_db: None,
                extinction_db: None,
                duty_10db: None,
                converged: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let mut s = String::from("axis,value,ber,evm_db,extinction_db,duty_10db,converged,error\n");
    for p in &points {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            axis.label(),
            fmt_float(p.value),
            p.ber.map(fmt_float).unwrap_or_default(),
            p.evm_db.map(fmt_float).unwrap_or_default(),
            p.extinction_db.map(fmt_float).unwrap_or_default(),
            p.duty_10db.map(fmt_float).unwrap_or_default(),
            p.converged.map(|b| b.to_string()).unwrap_or_default(),
            p.error.clone().unwrap_or_default(),
        ));
    }
    let tmp = out_dir.join("sweep.csv.tmp");
    fs::write(&tmp, s)?;
    fs::rename(tmp, out_dir.join("sweep.csv"))?;
    Ok(points)
}
