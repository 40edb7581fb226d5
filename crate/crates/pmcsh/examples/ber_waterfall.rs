//! QPSK BER waterfall against the Gaussian-channel theory curve.
//!
//! Runs Gray-mapped QPSK through AWGN at a range of Eb/N0 points and
//! compares the counted BER with Q(sqrt(2 Eb/N0)).
//!
//! ```bash
//! cargo run --release -p pmcsh --example ber_waterfall
//! ```

use num_complex::Complex64;
use pmcsh::dsp::demap_count;
use pmcsh::field::Rng;
use pmcsh::txchain::{gen_bits, map_symbols, Format};

fn q_function(x: f64) -> f64 {
    // Abramowitz-Stegun style erfc.
    let z = x / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * z);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    0.5 * poly * (-z * z).exp()
}

fn main() {
    let n_symbols = 2_000_000usize;
    println!("Eb/N0 dB   counted BER   Q(sqrt(2 Eb/N0))   errors");
    for ebn0_db in [2.0f64, 4.0, 6.0, 8.0, 9.0, 10.0] {
        let mut brng = Rng::new(7000 + ebn0_db as u64).stream("bits");
        let bits = gen_bits(&mut brng, 23, 2 * n_symbols).expect("bits");
        let symbols = map_symbols(&bits, Format::Qpsk).expect("map");
        let ebn0 = 10.0f64.powf(ebn0_db / 10.0);
        let sigma = (1.0 / (2.0 * ebn0)).sqrt();
        let mut nrng = Rng::new(8000 + ebn0_db as u64).stream("awgn");
        let noisy: Vec<Complex64> = symbols
            .iter()
            .map(|s| s + nrng.complex_normal() * sigma)
            .collect();
        let m = demap_count(&noisy, &bits, Format::Qpsk).expect("demap");
        println!(
            "{ebn0_db:>8.1}   {:>11.4e}   {:>16.4e}   {:>6}",
            m.ber,
            q_function((2.0 * ebn0).sqrt()),
            m.error_bits
        );
    }
}
