//! Monte Carlo error rate against SNR with the analytical bound, written as
//! CSV to stdout.
//!
//! cargo run --release --example er_sweep

use molcomp::harness::{output, run_er_experiment, ExperimentConfig};

fn main() -> molcomp::Result<()> {
    let cfg = ExperimentConfig {
        snr_db: vec![-4.0, 0.0, 4.0, 8.0, 12.0],
        samples_per_symbol: 30,
        trials: 2000,
        seed: 11,
        ..ExperimentConfig::default()
    };
    let records = run_er_experiment(&cfg)?;
    print!("{}", output::er_csv(&records));
    Ok(())
}
