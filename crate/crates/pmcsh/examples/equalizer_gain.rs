//! Radius-directed plus decision-feedback equalization on an ISI channel.
//!
//! Pushes 16-QAM through a three-tap channel and compares the bypass path
//! (static phase alignment only) with the RDE + DFE chain.
//!
//! ```bash
//! cargo run --release -p pmcsh --example equalizer_gain
//! ```

use num_complex::Complex64;
use pmcsh::dsp::{demap_count, dfe_equalize, phase_align, rde_equalize, EqualizerConfig};
use pmcsh::field::Rng;
use pmcsh::txchain::{gen_bits, map_symbols, preamble_symbols, Format};

fn main() {
    let format = Format::Qam16;
    let n_payload = 60_000usize;
    let channel_taps = [1.0, 0.3, 0.1];
    let esn0_db = 24.0;

    let mut brng = Rng::new(42).stream("bits");
    let bits = gen_bits(&mut brng, 23, 4 * n_payload).expect("bits");
    let payload = map_symbols(&bits, format).expect("map");
    let mut frame = preamble_symbols(256);
    frame.extend_from_slice(&payload);

    let sigma = 10.0f64.powf(-esn0_db / 20.0);
    let mut nrng = Rng::new(43).stream("awgn");
    let mut distorted = vec![Complex64::default(); frame.len()];
    for k in 0..frame.len() {
        let mut acc = Complex64::default();
        for (d, t) in channel_taps.iter().enumerate() {
            if k >= d {
                acc += frame[k - d] * *t;
            }
        }
        distorted[k] = acc + nrng.complex_normal() * sigma;
    }
    println!(
        "16-QAM through channel {channel_taps:?} at Es/N0 = {esn0_db} dB, {n_payload} symbols"
    );

    let preamble = preamble_symbols(256);
    let (aligned, _) = phase_align(&distorted, &preamble).expect("align");
    let bypass = demap_count(&aligned[256..], &bits, format).expect("bypass");
    println!(
        "bypass:    EVM {:>7.2} dB   BER {:.3e}",
        bypass.evm_db, bypass.ber
    );

    let mut eq = EqualizerConfig::for_format(format);
    eq.train_len = 2000;
    let rde_out = rde_equalize(&aligned, &eq, 1).expect("rde");
    let (rde_aligned, _) = phase_align(&rde_out, &preamble).expect("align");
    let dfe_out = dfe_equalize(&rde_aligned, &frame, &eq, format).expect("dfe");
    let skip = eq.train_len - 256;
    let counted = &dfe_out[256 + skip..];
    let counted_bits = &bits[skip * 4..(skip + counted.len()) * 4];
    let equalized = demap_count(counted, counted_bits, format).expect("metrics");
    println!(
        "RDE + DFE: EVM {:>7.2} dB   BER {:.3e}   (EVM gain {:.1} dB)",
        equalized.evm_db,
        equalized.ber,
        bypass.evm_db - equalized.evm_db
    );
}
