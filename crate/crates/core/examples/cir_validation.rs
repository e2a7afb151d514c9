//! Point-concentration impulse response against the exact ball occupancy and
//! a small particle simulation.
//!
//! cargo run --release --example cir_validation

use molcomp::harness::{run_cir_validation, ExperimentConfig};
use molcomp::physics::{cir, exact_occupancy, peak_time, ChannelGeometry};
use molcomp::DIFFUSION_A;

fn main() -> molcomp::Result<()> {
    let geom = ChannelGeometry::new(10e-6, 5e-6, DIFFUSION_A)?;
    if let Some(w) = geom.validity_warning() {
        println!("note: {w}");
    }
    let tp = peak_time(&geom);
    println!("t_peak = {tp:.6e} s");
    println!("{:>8} {:>14} {:>14} {:>9}", "t/tpeak", "h(t)", "exact", "ratio");
    for f in [0.2, 0.5, 0.835, 1.0, 1.5, 2.0, 3.0, 5.0] {
        let t = f * tp;
        let (h, e) = (cir(t, &geom)?, exact_occupancy(t, &geom)?);
        println!("{f:>8.3} {h:>14.6e} {e:>14.6e} {:>9.4}", h / e);
    }

    let mut cfg = ExperimentConfig::default();
    cfg.particle_sim.cir_molecules = 20_000;
    let v = run_cir_validation(&cfg)?;
    println!("\n{} molecules simulated", v.molecules);
    println!("simulated peak {:.4e} s (theory {:.4e} s)", v.peak_time_simulated, v.peak_time_theory);
    println!("max rel. deviation from h(t):  {:.3}", v.max_rel_dev_theory);
    println!("max rel. deviation from exact: {:.3}", v.max_rel_dev_exact);
    println!("mean net count of the A/B pair run: {:.3}", v.mean_net_simulated);
    Ok(())
}
