//! Sampled dual-polarization complex baseband waveform.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default carrier wavelength (m) used by the presets.
pub const C_BAND_WAVELENGTH: f64 = 1550.0e-9;

/// Which polarization component of a [`DualPolSignal`] to operate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    X,
    Y,
}

/// Jones-vector waveform: two complex amplitude sequences sampled at a
/// common rate. Amplitudes are in sqrt(mW), so `|a|^2` is optical power in
/// mW. Immutable after construction; stages produce new signals.
#[derive(Debug, Clone)]
pub struct DualPolSignal {
    samples_x: Vec<Complex64>,
    samples_y: Vec<Complex64>,
    sample_rate: f64,
    center_wavelength: f64,
}

impl DualPolSignal {
    pub fn new(
        samples_x: Vec<Complex64>,
        samples_y: Vec<Complex64>,
        sample_rate: f64,
        center_wavelength: f64,
    ) -> Result<Self> {
        if samples_x.is_empty() || samples_y.is_empty() {
            return Err(Error::EmptySignal);
        }
        if samples_x.len() != samples_y.len() {
            return Err(Error::LengthMismatch {
                left: samples_x.len(),
                right: samples_y.len(),
            });
        }
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample_rate must be positive, got {sample_rate}"
            )));
        }
        if !(center_wavelength > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "center_wavelength must be positive, got {center_wavelength}"
            )));
        }
        Ok(DualPolSignal {
            samples_x,
            samples_y,
            sample_rate,
            center_wavelength,
        })
    }

    pub fn len(&self) -> usize {
        self.samples_x.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one sample
    }

    pub fn x(&self) -> &[Complex64] {
        &self.samples_x
    }

    pub fn y(&self) -> &[Complex64] {
        &self.samples_y
    }

    pub fn component(&self, which: Polarization) -> &[Complex64] {
        match which {
            Polarization::X => &self.samples_x,
            Polarization::Y => &self.samples_y,
        }
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn center_wavelength(&self) -> f64 {
        self.center_wavelength
    }

    /// New signal with the same rate and wavelength metadata.
    pub fn with_components(&self, x: Vec<Complex64>, y: Vec<Complex64>) -> Result<Self> {
        DualPolSignal::new(x, y, self.sample_rate, self.center_wavelength)
    }

    /// Mean of `|x|^2 + |y|^2` over all samples, in mW.
    pub fn total_power(&self) -> f64 {
        let sum: f64 = self
            .samples_x
            .iter()
            .zip(&self.samples_y)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        sum / self.len() as f64
    }

    /// Mean power of one polarization component, in mW.
    pub fn component_power(&self, which: Polarization) -> f64 {
        let s = self.component(which);
        s.iter().map(|a| a.norm_sqr()).sum::<f64>() / s.len() as f64
    }
}

/// Mean `|a|^2` of a single-polarization sample block, in mW.
pub fn stream_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|a| a.norm_sqr()).sum::<f64>() / samples.len() as f64
}
