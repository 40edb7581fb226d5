//! Fiber channel building blocks: dispersion phase, group delay, PMD and
//! OSNR loading.
//!
//! ```bash
//! cargo run --release -p pmcsh --example fiber_effects
//! ```

use num_complex::Complex64;
use pmcsh::channel::{cd_transfer, load_osnr, propagate, ChannelRealization, FiberParams};
use pmcsh::field::{DualPolSignal, Polarization, Rng, C_BAND_WAVELENGTH};

fn main() {
    let fiber = FiberParams::default();
    println!(
        "SSMF: D = {} ps/(nm km), S = {} ps/(nm^2 km), {} km",
        fiber.dispersion_d, fiber.slope_s, fiber.length_km
    );
    println!(
        "beta2 = {:.3} ps^2/km, beta3 = {:.4} ps^3/km",
        fiber.beta2() * 1e27 / 1e3 * 1e3,
        fiber.beta3() * 1e40 / 1e1
    );

    // Group delay across the band from the dispersion phase. Every point
    // has unit magnitude: the element is all-pass.
    println!("\n  f offset     |H|          group delay");
    let df = 1.0e6;
    for f_ghz in [-25.0, -12.5, 0.0, 12.5, 25.0] {
        let f = f_ghz * 1e9;
        let h = cd_transfer(f, &fiber);
        let tau = (cd_transfer(f + df, &fiber) * cd_transfer(f - df, &fiber).conj()).arg()
            / (std::f64::consts::TAU * 2.0 * df);
        println!("{f_ghz:>8.1} GHz   {:.12}   {:>8.2} ps", h.norm(), tau * 1e12);
    }

    // Attenuation and OSNR loading on a flat field.
    let n = 1 << 14;
    let x = vec![Complex64::new(1.0, 0.0); n];
    let y = vec![Complex64::default(); n];
    let sig = DualPolSignal::new(x, y, 200.0e9, C_BAND_WAVELENGTH).unwrap();
    let rng = Rng::new(5);
    let realization = ChannelRealization::draw(&fiber, &rng);
    let out = propagate(&sig, &fiber, &realization).unwrap();
    println!(
        "\npropagated power: {:.4} mW (loss {:.1} dB over {} km, DGD draw {:.3} ps)",
        out.total_power(),
        -10.0 * (out.total_power() / sig.total_power()).log10(),
        fiber.length_km,
        realization.dgd_ps
    );

    let noisy = load_osnr(&out, 25.0, &rng).unwrap();
    println!(
        "after 25 dB OSNR loading: {:.4} mW total, x/y split {:.4}/{:.4} mW",
        noisy.total_power(),
        noisy.component_power(Polarization::X),
        noisy.component_power(Polarization::Y)
    );
}
