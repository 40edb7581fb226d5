//! Library-API variant of `pmcsh run`: execute a preset, override a few
//! knobs, and write the report artifacts.
//!
//! ```bash
//! cargo run --release -p pmcsh --example full_link_run
//! ```

use pmcsh::cli::{parse_config_str, preset_text, run_scenario};

fn main() {
    let mut scenario = parse_config_str(preset_text("exp16g").unwrap()).unwrap();
    scenario.osnr.osnr_db = 25.0;
    scenario.n_symbols = 50_000;

    let dir = std::env::temp_dir().join("pmcsh_full_link");
    let report = run_scenario(&scenario, &dir).expect("run");

    println!(
        "equalized: BER {:.3e}, EVM {:.2} dB over {} bits",
        report.metrics.ber, report.metrics.evm_db, report.metrics.counted_bits
    );
    println!(
        "bypass:    BER {:.3e}, EVM {:.2} dB",
        report.metrics_bypass.ber, report.metrics_bypass.evm_db
    );
    println!(
        "extinction {:.2} dB, carrier fraction in LO {:.4}, {} control iterations",
        report.extinction_final_db, report.carrier_fraction_lo, report.controller.iterations
    );
    println!("\nartifacts:");
    for p in [
        &report.files.constellation,
        &report.files.spectra,
        &report.files.ctl_trace,
        &report.files.report,
    ] {
        println!("  {}", p.display());
    }
}
