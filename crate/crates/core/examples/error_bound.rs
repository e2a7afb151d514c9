//! Pairwise statistics of the log-likelihood difference and the union bound.
//!
//! cargo run --release --example error_bound

use molcomp::analysis::{ber_upper_bound_with, pairwise_stats_with, q_function, VarianceForm};
use molcomp::detector::{enumerate_hypotheses, SignalModel, DEFAULT_ENUMERATION_CAP};
use molcomp::harness::snr_to_scale;
use molcomp::stats::{ResponseTable, SamplingPlan, TransmitterLink};
use molcomp::Species;

fn main() -> molcomp::Result<()> {
    for x in [0.0, 1.0, 3.0, 6.0, 10.0, 20.0] {
        println!("Q({x:>4}) = {:.6e}", q_function(x));
    }

    let links = [
        TransmitterLink::at_distance(10e-6, 5e-6)?,
        TransmitterLink::at_distance(15e-6, 5e-6)?,
    ];
    let plan = SamplingPlan::new(0.05, 60, 0)?;
    let qu = snr_to_scale(10.0, links[0].geometry(Species::A), &plan)?;
    let model = SignalModel::new(ResponseTable::new(&links, &plan), [qu, qu], 1.0)?;
    let set = enumerate_hypotheses(2, &[1, -1], &model, DEFAULT_ENUMERATION_CAP)?;
    println!("\npairs at 10 dB, true hypothesis {:?}:", set.get(0).values());
    for alt in set.hypotheses().iter().skip(1) {
        let s = pairwise_stats_with(set.get(0), alt, VarianceForm::Exact)?;
        println!(
            "  vs {:?}: E[Z]={:10.3} Var[Z]={:10.3} P={:.3e}",
            alt.values(),
            s.expected_z,
            s.variance_z,
            s.pairwise_error_probability
        );
    }

    println!("\n{:>6} {:>12} {:>12}", "snr", "exact var", "printed var");
    for snr in [-4.0, 0.0, 4.0, 8.0, 12.0, 16.0] {
        let qu = snr_to_scale(snr, links[0].geometry(Species::A), &plan)?;
        let model = SignalModel::new(ResponseTable::new(&links, &plan), [qu, qu], 1.0)?;
        let set = enumerate_hypotheses(2, &[1, -1, 2, -2], &model, DEFAULT_ENUMERATION_CAP)?;
        println!(
            "{snr:>6} {:>12.4e} {:>12.4e}",
            ber_upper_bound_with(&set, VarianceForm::Exact)?,
            ber_upper_bound_with(&set, VarianceForm::Printed)?
        );
    }
    Ok(())
}
