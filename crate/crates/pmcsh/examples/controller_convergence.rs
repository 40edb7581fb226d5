//! Gradient-descent convergence of the polarization controller.
//!
//! Builds a static link with a random channel rotation and prints the
//! monitor photodetector power and branch extinction every few iterations
//! while the loop pulls the carrier into the LO branch.
//!
//! ```bash
//! cargo run --release -p pmcsh --example controller_convergence
//! ```

use pmcsh::channel::SopTrajectory;
use pmcsh::field::{JonesMatrix, Rng};
use pmcsh::polctl::{run_loop, ControlLink, ControllerParams, FieldCovariance};
use pmcsh::rxfront::{EpcState, ReceiverParams};
use pmcsh::txchain::{build_tx, LaserParams, ModulatorParams, TxConfig};

fn main() {
    let cfg = TxConfig {
        baud: 16.0e9,
        ..TxConfig::default()
    };
    let mut tx_rng = Rng::new(2024).stream("tx");
    let frame = build_tx(
        &cfg,
        &LaserParams::default(),
        &ModulatorParams::default(),
        4000,
        &mut tx_rng,
    )
    .expect("tx frame");

    let mut rot_rng = Rng::new(28).stream("rotation"); // a nearly inverted start
    let rotation = JonesMatrix::random_unitary(&mut rot_rng);
    let cov = FieldCovariance::of(&frame.signal).transformed(&rotation);

    let mut link = ControlLink::new(cov, cov, ReceiverParams::default(), &Rng::new(2024));
    let params = ControllerParams::default();
    let traj = SopTrajectory::frozen(params.max_iters as f64 / params.loop_rate);
    let trace = run_loop(&mut link, EpcState::four_plate(), &params, &traj).expect("loop");

    println!("iter   monitor_uW   extinction_dB   retardances_rad");
    for (k, e) in trace.entries.iter().enumerate() {
        if k % 10 == 0 || k + 1 == trace.entries.len() {
            let phis: Vec<String> = e.retardances.iter().map(|r| format!("{r:+.3}")).collect();
            println!(
                "{k:>4}   {:>10.4}   {:>13.2}   [{}]",
                e.monitor_mw * 1e3,
                e.extinction_db,
                phis.join(", ")
            );
        }
    }
    println!(
        "converged = {} after {} iterations",
        trace.converged,
        trace.iterations()
    );
}
