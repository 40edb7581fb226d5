//! Core signal representation and numeric utilities: dual-polarization
//! waveforms, Jones operators, deterministic random streams, spectral
//! estimation, and rate conversion.

pub mod fft;
pub mod jones;
pub mod resample;
pub mod rng;
pub mod signal;
pub mod spectrum;

pub use jones::{apply_jones, JonesMatrix, JonesOperator};
pub use resample::resample;
pub use rng::Rng;
pub use signal::{stream_power, DualPolSignal, Polarization, C_BAND_WAVELENGTH};
pub use spectrum::{integrate_band, integrate_psd, psd, psd_of_stream, PsdPoint};
