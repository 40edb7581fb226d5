//! Transmitter chain: laser, polarization split, symbol mapping, pulse
//! shaping, IQ modulation, and recombination into the polarization-
//! multiplexed carrier signal.
//!
//! The modulated data rides on the x polarization and the unmodulated
//! carrier on the y polarization; the optical channel randomizes that
//! orientation afterwards.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::signal::C_BAND_WAVELENGTH;
use crate::field::{DualPolSignal, Rng};

/// Modulation format of the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Qpsk,
    Qam16,
}

impl Format {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Format::Qpsk => 2,
            Format::Qam16 => 4,
        }
    }

    /// Squared ring radii of the unit-mean-power constellation.
    pub fn ring_radii_sq(&self) -> Vec<f64> {
        match self {
            Format::Qpsk => vec![1.0],
            Format::Qam16 => vec![0.2, 1.0, 1.8],
        }
    }
}

/// Continuous-wave source parameters.
#[derive(Debug, Clone, Copy)]
pub struct LaserParams {
    /// Total emitted power, mW.
    pub power_mw: f64,
    /// Lorentzian linewidth, Hz.
    pub linewidth_hz: f64,
    /// Angle of the linear launch polarization against the PBS x axis, deg.
    pub launch_azimuth_deg: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        LaserParams {
            power_mw: 10.0,
            linewidth_hz: 100.0e3,
            launch_azimuth_deg: 45.0,
        }
    }
}

/// Electro-optic transfer model of the IQ modulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulatorTransfer {
    IdealLinear,
    MzmSine,
}

#[derive(Debug, Clone, Copy)]
pub struct ModulatorParams {
    pub insertion_loss_db: f64,
    pub v_pi: f64,
    pub drive_vpp: f64,
    pub transfer: ModulatorTransfer,
}

impl Default for ModulatorParams {
    fn default() -> Self {
        ModulatorParams {
            insertion_loss_db: 12.0,
            v_pi: 3.5,
            drive_vpp: 0.35,
            transfer: ModulatorTransfer::IdealLinear,
        }
    }
}

/// Payload framing and pulse-shaping configuration.
#[derive(Debug, Clone, Copy)]
pub struct TxConfig {
    pub format: Format,
    pub baud: f64,
    pub rolloff: f64,
    pub samples_per_symbol: usize,
    pub prbs_order: u32,
    pub preamble_len: usize,
}

impl Default for TxConfig {
    fn default() -> Self {
        TxConfig {
            format: Format::Qpsk,
            baud: 50.0e9,
            rolloff: 0.1,
            samples_per_symbol: 16,
            prbs_order: 15,
            preamble_len: 256,
        }
    }
}

impl TxConfig {
    pub fn sample_rate(&self) -> f64 {
        self.baud * self.samples_per_symbol as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.baud > 0.0) {
            return Err(Error::InvalidParameter("baud must be positive".into()));
        }
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rolloff must lie in (0, 1], got {}",
                self.rolloff
            )));
        }
        if self.samples_per_symbol < 4 || self.samples_per_symbol % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "samples_per_symbol must be even and >= 4, got {}",
                self.samples_per_symbol
            )));
        }
        if self.prbs_order != 15 && self.prbs_order != 23 {
            return Err(Error::InvalidParameter(format!(
                "prbs_order must be 15 or 23, got {}",
                self.prbs_order
            )));
        }
        Ok(())
    }
}

/// PRBS generator over the primitive polynomials x^15+x^14+1 / x^23+x^18+1.
#[derive(Debug, Clone)]
pub struct Prbs {
    state: u32,
    order: u32,
}

impl Prbs {
    pub fn new(order: u32, seed: u32) -> Result<Self> {
        let mask = (1u32 << order) - 1;
        let state = seed & mask;
        if order != 15 && order != 23 {
            return Err(Error::InvalidParameter(format!("unsupported PRBS order {order}")));
        }
        if state == 0 {
            return Err(Error::InvalidParameter("PRBS seed must be nonzero".into()));
        }
        Ok(Prbs { state, order })
    }

    pub fn next_bit(&mut self) -> u8 {
        let (t1, t2) = match self.order {
            15 => (14, 13),
            _ => (22, 17),
        };
        let bit = ((self.state >> t1) ^ (self.state >> t2)) & 1;
        self.state = ((self.state << 1) | bit) & ((1 << self.order) - 1);
        bit as u8
    }
}

/// Generate `count` PRBS bits. The register is seeded from the RNG, so the
/// same seed always yields the same sequence.
pub fn gen_bits(rng: &mut Rng, order: u32, count: usize) -> Result<Vec<u8>> {
    if count == 0 {
        return Err(Error::InvalidParameter("bit count must be positive".into()));
    }
    let mask = (1u64 << order) - 1;
    let mut seed = 0u32;
    while seed == 0 {
        seed = (rng.next_u64() & mask) as u32;
    }
    let mut prbs = Prbs::new(order, seed)?;
    Ok((0..count).map(|_| prbs.next_bit()).collect())
}

// Per-axis Gray mapping used for both formats: one bit selects +/- for
// QPSK, two bits select the level for 16-QAM (00 -> +3, 01 -> +1,
// 11 -> -1, 10 -> -3), scaled for unit mean constellation power.
const QAM16_LEVELS: [f64; 4] = [3.0, 1.0, -1.0, -3.0];
const QAM16_GRAY: [usize; 4] = [0b00, 0b01, 0b11, 0b10];

fn axis_level(b0: u8, b1: u8) -> f64 {
    let code = ((b0 as usize) << 1) | b1 as usize;
    let idx = QAM16_GRAY.iter().position(|g| *g == code).unwrap();
    QAM16_LEVELS[idx]
}

/// Map a bit stream onto unit-mean-power constellation symbols.
pub fn map_symbols(bits: &[u8], format: Format) -> Result<Vec<Complex64>> {
    let bps = format.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(Error::InvalidParameter(format!(
            "bit count {} not divisible by {} bits/symbol",
            bits.len(),
            bps
        )));
    }
    let symbols = bits
        .chunks(bps)
        .map(|c| match format {
            Format::Qpsk => {
                let i = if c[0] == 0 { 1.0 } else { -1.0 };
                let q = if c[1] == 0 { 1.0 } else { -1.0 };
                Complex64::new(i, q) * std::f64::consts::FRAC_1_SQRT_2
            }
            Format::Qam16 => {
                let i = axis_level(c[0], c[1]);
                let q = axis_level(c[2], c[3]);
                Complex64::new(i, q) / 10.0f64.sqrt()
            }
        })
        .collect();
    Ok(symbols)
}

/// Hard-decision demapping, inverse of [`map_symbols`].
pub fn demap_symbol(s: Complex64, format: Format) -> Vec<u8> {
    match format {
        Format::Qpsk => vec![(s.re < 0.0) as u8, (s.im < 0.0) as u8],
        Format::Qam16 => {
            let slice_axis = |v: f64| -> [u8; 2] {
                let scaled = v * 10.0f64.sqrt();
                let idx = if scaled > 2.0 {
                    0
                } else if scaled > 0.0 {
                    1
                } else if scaled > -2.0 {
                    2
                } else {
                    3
                };
                let code = QAM16_GRAY[idx];
                [(code >> 1) as u8, (code & 1) as u8]
            };
            let i = slice_axis(s.re);
            let q = slice_axis(s.im);
            vec![i[0], i[1], q[0], q[1]]
        }
    }
}

/// Nearest ideal constellation point.
pub fn nearest_point(s: Complex64, format: Format) -> Complex64 {
    map_symbols(&demap_symbol(s, format), format).unwrap()[0]
}

/// Root-raised-cosine taps spanning 32 symbols, `sps` samples per symbol,
/// normalized so that sum of squares equals `sps` (a shaped unit-power
/// symbol stream keeps unit mean power).
pub fn rrc_taps(rolloff: f64, sps: usize) -> Vec<f64> {
    const SPAN: usize = 32;
    let n = SPAN * sps + 1;
    let mid = (SPAN * sps / 2) as isize;
    let beta = rolloff;
    let mut taps: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as isize - mid) as f64 / sps as f64;
            if t == 0.0 {
                1.0 - beta + 4.0 * beta / std::f64::consts::PI
            } else if (t.abs() - 1.0 / (4.0 * beta)).abs() < 1e-12 {
                let a = std::f64::consts::PI / (4.0 * beta);
                (beta / 2.0f64.sqrt())
                    * ((1.0 + 2.0 / std::f64::consts::PI) * a.sin()
                        + (1.0 - 2.0 / std::f64::consts::PI) * a.cos())
            } else {
                let pi_t = std::f64::consts::PI * t;
                let num = (pi_t * (1.0 - beta)).sin()
                    + 4.0 * beta * t * (pi_t * (1.0 + beta)).cos();
                let den = pi_t * (1.0 - (4.0 * beta * t).powi(2));
                num / den
            }
        })
        .collect();
    let energy: f64 = taps.iter().map(|h| h * h).sum();
    let scale = (sps as f64 / energy).sqrt();
    for h in taps.iter_mut() {
        *h *= scale;
    }
    taps
}

/// Upsample symbols by `sps` and convolve with `taps`, trimming the filter
/// group delay so sample `k*sps` corresponds to symbol `k`.
pub fn shape_stream(symbols: &[Complex64], taps: &[f64], sps: usize) -> Vec<Complex64> {
    let n_out = symbols.len() * sps;
    let delay = taps.len() / 2;
    let mut out = vec![Complex64::default(); n_out];
    for (m, s) in symbols.iter().enumerate() {
        if s.norm_sqr() == 0.0 {
            continue;
        }
        let center = m * sps;
        for (j, h) in taps.iter().enumerate() {
            let idx = center as isize + j as isize - delay as isize;
            if idx >= 0 && (idx as usize) < n_out {
                out[idx as usize] += s * *h;
            }
        }
    }
    out
}

/// RRC pulse shaping of a symbol sequence per the transmit configuration.
pub fn rrc_shape(symbols: &[Complex64], cfg: &TxConfig) -> Result<Vec<Complex64>> {
    if symbols.is_empty() {
        return Err(Error::EmptySignal);
    }
    let taps = rrc_taps(cfg.rolloff, cfg.samples_per_symbol);
    Ok(shape_stream(symbols, &taps, cfg.samples_per_symbol))
}

/// Continuous-wave laser field with Wiener phase noise, split into the two
/// PBS branches by the launch azimuth.
pub fn laser_field(
    params: &LaserParams,
    n: usize,
    rate: f64,
    rng: &mut Rng,
) -> Result<DualPolSignal> {
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    let amp = params.power_mw.sqrt();
    let theta = params.launch_azimuth_deg.to_radians();
    let (ax, ay) = (amp * theta.cos(), amp * theta.sin());
    let sigma = (std::f64::consts::TAU * params.linewidth_hz / rate).sqrt();
    let mut phase = 0.0f64;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let ph = Complex64::from_polar(1.0, phase);
        x.push(ph * ax);
        y.push(ph * ay);
        if sigma > 0.0 {
            phase += sigma * rng.normal();
        }
    }
    DualPolSignal::new(x, y, rate, C_BAND_WAVELENGTH)
}

/// Drive the IQ modulator with a baseband waveform.
///
/// `ideal_linear` multiplies the carrier by the waveform and the insertion
/// loss; `mzm_sine` applies the field transfer sin(pi*v/(2*Vpi)) per
/// quadrature with the waveform scaled to the configured peak-to-peak
/// drive.
pub fn iq_modulate(
    carrier: &[Complex64],
    waveform: &[Complex64],
    params: &ModulatorParams,
) -> Result<Vec<Complex64>> {
    if carrier.len() != waveform.len() {
        return Err(Error::LengthMismatch {
            left: carrier.len(),
            right: waveform.len(),
        });
    }
    let loss = 10.0f64.powf(-params.insertion_loss_db / 20.0);
    match params.transfer {
        ModulatorTransfer::IdealLinear => Ok(carrier
            .iter()
            .zip(waveform)
            .map(|(c, u)| c * u * loss)
            .collect()),
        ModulatorTransfer::MzmSine => {
            let peak = waveform
                .iter()
                .map(|u| u.re.abs().max(u.im.abs()))
                .fold(0.0, f64::max);
            if peak == 0.0 {
                return Ok(vec![Complex64::default(); carrier.len()]);
            }
            let volts = 0.5 * params.drive_vpp / peak;
            let k = std::f64::consts::PI / (2.0 * params.v_pi);
            Ok(carrier
                .iter()
                .zip(waveform)
                .map(|(c, u)| {
                    let vi = volts * u.re;
                    let vq = volts * u.im;
                    let field = Complex64::new((k * vi).sin(), (k * vq).sin())
                        * std::f64::consts::FRAC_1_SQRT_2;
                    c * field * loss
                })
                .collect())
        }
    }
}

/// Known QPSK preamble pattern, fixed independently of the payload.
pub fn preamble_symbols(len: usize) -> Vec<Complex64> {
    if len == 0 {
        return Vec::new();
    }
    let mut prbs = Prbs::new(15, 0x2af5).unwrap();
    let bits: Vec<u8> = (0..len * 2).map(|_| prbs.next_bit()).collect();
    map_symbols(&bits, Format::Qpsk).unwrap()
}

/// Transmitted frame: the optical signal plus the ground truth the
/// receiver-side metrology compares against.
#[derive(Debug, Clone)]
pub struct TxFrame {
    pub signal: DualPolSignal,
    pub payload_bits: Vec<u8>,
    pub payload_symbols: Vec<Complex64>,
    pub preamble: Vec<Complex64>,
    pub config: TxConfig,
}

impl TxFrame {
    /// All framed symbols: preamble followed by payload.
    pub fn frame_symbols(&self) -> Vec<Complex64> {
        let mut v = self.preamble.clone();
        v.extend_from_slice(&self.payload_symbols);
        v
    }

    /// Carrier-branch-only copy of the transmitted signal (x zeroed).
    pub fn carrier_only(&self) -> DualPolSignal {
        let zeros = vec![Complex64::default(); self.signal.len()];
        self.signal
            .with_components(zeros, self.signal.y().to_vec())
            .unwrap()
    }

    /// Signal-branch-only copy of the transmitted signal (y zeroed).
    pub fn signal_only(&self) -> DualPolSignal {
        let zeros = vec![Complex64::default(); self.signal.len()];
        self.signal
            .with_components(self.signal.x().to_vec(), zeros)
            .unwrap()
    }
}

/// Build the polarization-multiplexed transmit frame: modulated payload on
/// x, unmodulated carrier on y, preceded by the known preamble.
pub fn build_tx(
    cfg: &TxConfig,
    laser: &LaserParams,
    modulator: &ModulatorParams,
    n_symbols: usize,
    rng: &mut Rng,
) -> Result<TxFrame> {
    cfg.validate()?;
    if n_symbols == 0 {
        return Err(Error::InvalidParameter("n_symbols must be positive".into()));
    }
    let bps = cfg.format.bits_per_symbol();
    let mut bit_rng = rng.stream("payload_bits");
    let payload_bits = gen_bits(&mut bit_rng, cfg.prbs_order, n_symbols * bps)?;
    let payload_symbols = map_symbols(&payload_bits, cfg.format)?;
    let preamble = preamble_symbols(cfg.preamble_len);

    let mut frame = preamble.clone();
    frame.extend_from_slice(&payload_symbols);
    let waveform = rrc_shape(&frame, cfg)?;

    let mut laser_rng = rng.stream("laser_phase");
    let field = laser_field(laser, waveform.len(), cfg.sample_rate(), &mut laser_rng)?;
    let modulated = iq_modulate(field.x(), &waveform, modulator)?;

    let signal = DualPolSignal::new(
        modulated,
        field.y().to_vec(),
        cfg.sample_rate(),
        field.center_wavelength(),
    )?;
    Ok(TxFrame {
        signal,
        payload_bits,
        payload_symbols,
        preamble,
        config: *cfg,
    })
}
