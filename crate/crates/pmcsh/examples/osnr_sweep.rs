//! BER waterfall of the full link against OSNR loading.
//!
//! Sweeps the 16 Gbaud scenario over OSNR with per-point seed streams and
//! prints the table that `sweep.csv` captures.
//!
//! ```bash
//! cargo run --release -p pmcsh --example osnr_sweep
//! ```

use pmcsh::cli::{parse_config_str, preset_text, sweep, SweepAxis};

fn main() {
    let mut scenario = parse_config_str(preset_text("exp16g").unwrap()).unwrap();
    scenario.n_symbols = 30_000;
    scenario.controller.max_iters = 200;
    scenario.mode.bypass_dsp = true;
    scenario.tx.preamble_len = 512;

    let dir = std::env::temp_dir().join("pmcsh_osnr_sweep");
    let values = [10.0, 13.0, 16.0, 19.0, 22.0, 25.0, 28.0];
    let points = sweep(&scenario, SweepAxis::Osnr, &values, &dir).expect("sweep");

    println!("OSNR dB       BER       EVM dB   extinction dB");
    for p in &points {
        match &p.error {
            Some(e) => println!("{:>7.1}   {e}", p.value),
            None => println!(
                "{:>7.1}   {:>9.3e}   {:>6.2}   {:>13.2}",
                p.value,
                p.ber.unwrap(),
                p.evm_db.unwrap(),
                p.extinction_db.unwrap()
            ),
        }
    }
    println!("\nsweep table: {}", dir.join("sweep.csv").display());
}
