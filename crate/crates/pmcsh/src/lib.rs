//! End-to-end simulator of a polarization-multiplexed-carrier
//! self-homodyne (PMC-SH) coherent optical link.
//!
//! The transmitter sends an unmodulated carrier on one polarization and the
//! modulated signal on the other; the receiver recovers them with an
//! endless polarization controller driven by gradient descent on a monitor
//! photodetector, then demodulates by mixing the two in an optical hybrid.
//! No local oscillator and no carrier recovery are involved.
//!
//! Stages map onto modules:
//!
//! - [`field`] — dual-polarization waveforms, Jones operators, deterministic
//!   random streams, PSD estimation, resampling
//! - [`txchain`] — laser, symbol mapping, RRC shaping, IQ modulator, PBC
//! - [`channel`] — fiber: chromatic dispersion, attenuation, PMD, SOP drift,
//!   OSNR loading
//! - [`rxfront`] — EPC, PBS, monitor tap and photodetector, 90-degree
//!   hybrid with balanced detection
//! - [`polctl`] — the adaptive polarization control loop
//! - [`dsp`] — matched filter, phase alignment, RDE/DFE equalizers, BER/EVM
//!   metrology
//! - [`cli`] — scenario configs, presets, runs, sweeps, and file reports
//!
//! Every run is reproducible: all noise comes from named counter-based
//! streams derived from one seed. Each major capability has a runnable
//! demo under `examples/`; the `pmcsh` binary wraps the scenario runner.

pub mod channel;
pub mod cli;
pub mod dsp;
pub mod error;
pub mod field;
pub mod polctl;
pub mod rxfront;
pub mod txchain;

pub use error::{Error, Result};
