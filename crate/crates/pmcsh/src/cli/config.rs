//! Scenario configuration: TOML parsing, presets, validation.
//!
//! Configs are dotted key/value text (`fiber.length_km = 20.0`). Unknown
//! keys are rejected; an empty config yields the `sim50g` preset values,
//! which are also the struct defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::FiberParams;
use crate::dsp::EqualizerConfig;
use crate::polctl::ControllerParams;
use crate::rxfront::ReceiverParams;
use crate::txchain::{Format, LaserParams, ModulatorParams, ModulatorTransfer, TxConfig};

/// Configuration-stage failures; these map to exit code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    Missing(PathBuf),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config range error: {0}")]
    Range(String),
    #[error("unknown preset '{0}' (available: {1})")]
    UnknownPreset(String, String),
    #[error("{0}")]
    Usage(String),
}

pub const PRESET_NAMES: [&str; 6] = [
    "sim50g",
    "exp10g",
    "exp16g",
    "exp10g_qam16",
    "exp16g_qam16",
    "b2b",
];

/// Annotated preset text embedded at compile time.
pub fn preset_text(name: &str) -> Result<&'static str, ConfigError> {
    match name {
        "sim50g" => Ok(include_str!("../../presets/sim50g.toml")),
        "exp10g" => Ok(include_str!("../../presets/exp10g.toml")),
        "exp16g" => Ok(include_str!("../../presets/exp16g.toml")),
        "exp10g_qam16" => Ok(include_str!("../../presets/exp10g_qam16.toml")),
        "exp16g_qam16" => Ok(include_str!("../../presets/exp16g_qam16.toml")),
        "b2b" => Ok(include_str!("../../presets/b2b.toml")),
        other => Err(ConfigError::UnknownPreset(
            other.to_string(),
            PRESET_NAMES.join(", "),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    Adaptive,
    ManualAngles,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeBlock {
    pub bypass_dsp: bool,
    pub control: ControlMode,
    /// EPC retardances for `manual_angles`, rad.
    pub manual_retardances: Vec<f64>,
}

impl Default for ModeBlock {
    fn default() -> Self {
        ModeBlock {
            bypass_dsp: false,
            control: ControlMode::Adaptive,
            manual_retardances: vec![0.0; 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TxBlock {
    pub format: String,
    pub baud_hz: f64,
    pub rolloff: f64,
    pub samples_per_symbol: usize,
    pub prbs_order: u32,
    pub preamble_len: usize,
}

impl Default for TxBlock {
    fn default() -> Self {
        TxBlock {
            format: "qpsk".into(),
            baud_hz: 50.0e9,
            rolloff: 0.1,
            samples_per_symbol: 16,
            prbs_order: 15,
            preamble_len: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaserBlock {
    pub power_mw: f64,
    pub linewidth_hz: f64,
    pub launch_azimuth_deg: f64,
}

impl Default for LaserBlock {
    fn default() -> Self {
        LaserBlock {
            power_mw: 10.0,
            linewidth_hz: 100.0e3,
            launch_azimuth_deg: 45.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulatorBlock {
    pub insertion_loss_db: f64,
    pub v_pi_volts: f64,
    pub drive_vpp_volts: f64,
    pub transfer: String,
}

impl Default for ModulatorBlock {
    fn default() -> Self {
        ModulatorBlock {
            insertion_loss_db: 12.0,
            v_pi_volts: 3.5,
            drive_vpp_volts: 0.35,
            transfer: "ideal_linear".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberBlock {
    pub length_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub slope_ps_nm2_km: f64,
    pub attenuation_db_km: f64,
    pub dgd_mean_ps: f64,
    pub sop_drift_rate_rad_s: f64,
    pub ref_wavelength_nm: f64,
    /// Fixed channel rotation as three retarder angles, deg; empty draws a
    /// random rotation from the seed.
    pub rotation_euler_deg: Vec<f64>,
}

impl Default for FiberBlock {
    fn default() -> Self {
        FiberBlock {
            length_km: 20.0,
            dispersion_ps_nm_km: 16.0,
            slope_ps_nm2_km: 0.08,
            attenuation_db_km: 0.2,
            dgd_mean_ps: 0.447,
            sop_drift_rate_rad_s: 1.0,
            ref_wavelength_nm: 1550.0,
            rotation_euler_deg: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OsnrBlock {
    /// OSNR in dB over 12.5 GHz; `inf` disables noise loading.
    pub osnr_db: f64,
}

impl Default for OsnrBlock {
    fn default() -> Self {
        OsnrBlock { osnr_db: 25.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverBlock {
    pub tap_ratio: f64,
    pub responsivity_a_w: f64,
    pub thermal_noise_pa_rt_hz: f64,
    pub shot_noise: bool,
    pub monitor_bw_hz: f64,
    pub pd_bw_hz: f64,
}

impl Default for ReceiverBlock {
    fn default() -> Self {
        ReceiverBlock {
            tap_ratio: 0.10,
            responsivity_a_w: 0.8,
            thermal_noise_pa_rt_hz: 15.0,
            shot_noise: true,
            monitor_bw_hz: 100.0e3,
            pd_bw_hz: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerBlock {
    pub step_mu_rad: f64,
    pub dither_delta_rad: f64,
    pub loop_rate_hz: f64,
    pub max_iters: usize,
    pub converge_tol_db: f64,
    pub window: usize,
}

impl Default for ControllerBlock {
    fn default() -> Self {
        ControllerBlock {
            step_mu_rad: 0.05,
            dither_delta_rad: 0.02,
            loop_rate_hz: 1000.0,
            max_iters: 400,
            converge_tol_db: 0.05,
            window: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EqualizerBlock {
    pub ff_taps: usize,
    pub fb_taps: usize,
    pub mu_rde: f64,
    pub mu_dfe: f64,
    pub train_len: usize,
}

impl Default for EqualizerBlock {
    fn default() -> Self {
        EqualizerBlock {
            ff_taps: 15,
            fb_taps: 5,
            mu_rde: 1e-3,
            mu_dfe: 1e-3,
            train_len: 1000,
        }
    }
}

/// Full scenario: every stage's parameter block plus seed, frame size and
/// mode flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub seed: u64,
    pub n_symbols: usize,
    /// Welch segment length for the emitted spectra, a power of two.
    pub psd_segment_len: usize,
    pub mode: ModeBlock,
    pub tx: TxBlock,
    pub laser: LaserBlock,
    pub modulator: ModulatorBlock,
    pub fiber: FiberBlock,
    pub osnr: OsnrBlock,
    pub receiver: ReceiverBlock,
    pub controller: ControllerBlock,
    pub equalizer: EqualizerBlock,
}

impl Default for Scenario {
    /// The default scenario is the `sim50g` preset.
    fn default() -> Self {
        Scenario {
            seed: 7,
            n_symbols: 20_000,
            psd_segment_len: 4096,
            mode: ModeBlock::default(),
            tx: TxBlock::default(),
            laser: LaserBlock::default(),
            modulator: ModulatorBlock::default(),
            fiber: FiberBlock::default(),
            osnr: OsnrBlock::default(),
            receiver: ReceiverBlock::default(),
            controller: ControllerBlock::default(),
            equalizer: EqualizerBlock::default(),
        }
    }
}

impl Scenario {
    /// The `sim50g` preset, which is also [`Scenario::default`].
    pub fn sim50g() -> Self {
        Scenario::default()
    }

    pub fn format(&self) -> Result<Format, ConfigError> {
        match self.tx.format.as_str() {
            "qpsk" => Ok(Format::Qpsk),
            "qam16" => Ok(Format::Qam16),
            other => Err(ConfigError::Range(format!(
                "tx.format must be 'qpsk' or 'qam16', got '{other}'"
            ))),
        }
    }

    pub fn tx_config(&self) -> Result<TxConfig, ConfigError> {
        Ok(TxConfig {
            format: self.format()?,
            baud: self.tx.baud_hz,
            rolloff: self.tx.rolloff,
            samples_per_symbol: self.tx.samples_per_symbol,
            prbs_order: self.tx.prbs_order,
            preamble_len: self.tx.preamble_len,
        })
    }

    pub fn laser_params(&self) -> LaserParams {
        LaserParams {
            power_mw: self.laser.power_mw,
            linewidth_hz: self.laser.linewidth_hz,
            launch_azimuth_deg: self.laser.launch_azimuth_deg,
        }
    }

    pub fn modulator_params(&self) -> Result<ModulatorParams, ConfigError> {
        let transfer = match self.modulator.transfer.as_str() {
            "ideal_linear" => ModulatorTransfer::IdealLinear,
            "mzm_sine" => ModulatorTransfer::MzmSine,
            other => {
                return Err(ConfigError::Range(format!(
                    "modulator.transfer must be 'ideal_linear' or 'mzm_sine', got '{other}'"
                )))
            }
        };
        Ok(ModulatorParams {
            insertion_loss_db: self.modulator.insertion_loss_db,
            v_pi: self.modulator.v_pi_volts,
            drive_vpp: self.modulator.drive_vpp_volts,
            transfer,
        })
    }

    pub fn fiber_params(&self) -> FiberParams {
        FiberParams {
            length_km: self.fiber.length_km,
            dispersion_d: self.fiber.dispersion_ps_nm_km,
            slope_s: self.fiber.slope_ps_nm2_km,
            atten_db_km: self.fiber.attenuation_db_km,
            dgd_mean_ps: self.fiber.dgd_mean_ps,
            sop_drift_rate: self.fiber.sop_drift_rate_rad_s,
            ref_wavelength: self.fiber.ref_wavelength_nm * 1.0e-9,
        }
    }

    pub fn receiver_params(&self) -> ReceiverParams {
        ReceiverParams {
            tap_ratio: self.receiver.tap_ratio,
            responsivity: self.receiver.responsivity_a_w,
            thermal_noise_density: self.receiver.thermal_noise_pa_rt_hz * 1.0e-12,
            shot_noise: self.receiver.shot_noise,
            monitor_bw: self.receiver.monitor_bw_hz,
            pd_bw: self.receiver.pd_bw_hz,
        }
    }

    pub fn controller_params(&self) -> ControllerParams {
        ControllerParams {
            step_mu: self.controller.step_mu_rad,
            dither_delta: self.controller.dither_delta_rad,
            loop_rate: self.controller.loop_rate_hz,
            max_iters: self.controller.max_iters,
            converge_tol_db: self.controller.converge_tol_db,
            window: self.controller.window,
        }
    }

    pub fn equalizer_config(&self) -> Result<EqualizerConfig, ConfigError> {
        Ok(EqualizerConfig {
            ff_taps: self.equalizer.ff_taps,
            fb_taps: self.equalizer.fb_taps,
            mu_rde: self.equalizer.mu_rde,
            mu_dfe: self.equalizer.mu_dfe,
            rde_radii_sq: self.format()?.ring_radii_sq(),
            train_len: self.equalizer.train_len,
        })
    }

    /// Cross-field range validation with one distinct message per failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |msg: String| Err(ConfigError::Range(msg));
        if self.n_symbols == 0 {
            return range("n_symbols must be >= 1".into());
        }
        if !self.psd_segment_len.is_power_of_two() {
            return range(format!(
                "psd_segment_len must be a power of two, got {}",
                self.psd_segment_len
            ));
        }
        if !(self.tx.baud_hz > 0.0) {
            return range(format!("tx.baud_hz must be > 0, got {}", self.tx.baud_hz));
        }
        if !(self.tx.rolloff > 0.0 && self.tx.rolloff <= 1.0) {
            return range(format!(
                "tx.rolloff must lie in (0, 1], got {}",
                self.tx.rolloff
            ));
        }
        if self.tx.samples_per_symbol < 4 || self.tx.samples_per_symbol % 2 != 0 {
            return range(format!(
                "tx.samples_per_symbol must be even and >= 4, got {}",
                self.tx.samples_per_symbol
            ));
        }
        if self.tx.prbs_order != 15 && self.tx.prbs_order != 23 {
            return range(format!(
                "tx.prbs_order must be 15 or 23, got {}",
                self.tx.prbs_order
            ));
        }
        if self.tx.preamble_len < 16 {
            return range(format!(
                "tx.preamble_len must be >= 16 for timing recovery, got {}",
                self.tx.preamble_len
            ));
        }
        if !(self.laser.power_mw > 0.0) {
            return range(format!(
                "laser.power_mw must be > 0, got {}",
                self.laser.power_mw
            ));
        }
        if self.laser.linewidth_hz < 0.0 {
            return range(format!(
                "laser.linewidth_hz must be >= 0, got {}",
                self.laser.linewidth_hz
            ));
        }
        if self.modulator.insertion_loss_db < 0.0 {
            return range(format!(
                "modulator.insertion_loss_db must be >= 0, got {}",
                self.modulator.insertion_loss_db
            ));
        }
        if !(self.modulator.v_pi_volts > 0.0) || !(self.modulator.drive_vpp_volts > 0.0) {
            return range("modulator v_pi and drive_vpp must be > 0".into());
        }
        if self.fiber.length_km < 0.0 {
            return range(format!(
                "fiber.length_km must be >= 0, got {}",
                self.fiber.length_km
            ));
        }
        if self.fiber.attenuation_db_km < 0.0
            || self.fiber.dgd_mean_ps < 0.0
            || self.fiber.sop_drift_rate_rad_s < 0.0
        {
            return range("fiber attenuation, DGD, drift rate must be >= 0".into());
        }
        if !(self.fiber.ref_wavelength_nm > 0.0) {
            return range(format!(
                "fiber.ref_wavelength_nm must be > 0, got {}",
                self.fiber.ref_wavelength_nm
            ));
        }
        if !self.fiber.rotation_euler_deg.is_empty() && self.fiber.rotation_euler_deg.len() != 3 {
            return range(format!(
                "fiber.rotation_euler_deg needs exactly 3 angles, got {}",
                self.fiber.rotation_euler_deg.len()
            ));
        }
        if !(self.receiver.tap_ratio > 0.0 && self.receiver.tap_ratio < 1.0) {
            return range(format!(
                "receiver.tap_ratio must lie in (0, 1), got {}",
                self.receiver.tap_ratio
            ));
        }
        if !(self.receiver.responsivity_a_w > 0.0) {
            return range(format!(
                "receiver.responsivity_a_w must be > 0, got {}",
                self.receiver.responsivity_a_w
            ));
        }
        if self.receiver.thermal_noise_pa_rt_hz < 0.0 {
            return range("receiver.thermal_noise_pa_rt_hz must be >= 0".into());
        }
        if !(self.controller.step_mu_rad > 0.0)
            || !(self.controller.dither_delta_rad > 0.0)
            || !(self.controller.loop_rate_hz > 0.0)
        {
            return range("controller step, dither and loop rate must be > 0".into());
        }
        if self.controller.max_iters == 0 || self.controller.window == 0 {
            return range("controller.max_iters and window must be >= 1".into());
        }
        if self.equalizer.ff_taps == 0 || self.equalizer.ff_taps % 2 == 0 {
            return range(format!(
                "equalizer.ff_taps must be odd and >= 1, got {}",
                self.equalizer.ff_taps
            ));
        }
        if !(self.equalizer.mu_rde > 0.0 && self.equalizer.mu_dfe > 0.0) {
            return range("equalizer steps must be > 0".into());
        }
        if self.mode.control == ControlMode::ManualAngles
            && self.mode.manual_retardances.len() != 4
        {
            return range(format!(
                "mode.manual_retardances needs exactly 4 angles, got {}",
                self.mode.manual_retardances.len()
            ));
        }
        Ok(())
    }
}

fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (slot, v) => {
                if let Some(slot) = slot {
                    *slot = v;
                } else {
                    base.insert(key, v);
                }
            }
        }
    }
}

/// Parse scenario text, starting from the defaults.
pub fn parse_config_str(text: &str) -> Result<Scenario, ConfigError> {
    parse_with_base(Scenario::sim50g(), text)
}

fn parse_with_base(base: Scenario, text: &str) -> Result<Scenario, ConfigError> {
    let base_value =
        toml::Value::try_from(&base).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut table = match base_value {
        toml::Value::Table(t) => t,
        _ => unreachable!("scenario serializes to a table"),
    };
    let overlay: toml::Table =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    // Reject unknown keys against the full schema first; merging would
    // silently accept typos otherwise.
    let _: Scenario = {
        let mut probe = table.clone();
        merge_tables(&mut probe, overlay.clone());
        toml::Value::Table(probe)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?
    };
    merge_tables(&mut table, overlay);
    let scenario: Scenario = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

/// Load a scenario from an optional preset and an optional config file;
/// config values override preset values.
pub fn load_scenario(
    preset: Option<&str>,
    config_path: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<Scenario, ConfigError> {
    let base = match preset {
        Some(name) => parse_config_str(preset_text(name)?)?,
        None => Scenario::sim50g(),
    };
    let mut scenario = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|_| ConfigError::Missing(path.to_path_buf()))?;
            parse_with_base(base, &text)?
        }
        None => base,
    };
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    scenario.validate()?;
    Ok(scenario)
}

/// Parse a scenario file path (exposed for the `run --config` path).
pub fn parse_config(path: &Path) -> Result<Scenario, ConfigError> {
    load_scenario(None, Some(path), None)
}
