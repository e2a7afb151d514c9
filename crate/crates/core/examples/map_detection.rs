//! Joint ML detection of two transmitters over a simulated noisy channel.
//!
//! cargo run --release --example map_detection

use molcomp::detector::{enumerate_hypotheses, map_detect, SignalModel, DEFAULT_ENUMERATION_CAP};
use molcomp::harness::snr_to_scale;
use molcomp::stats::{sample_counts, CountObservation, ResponseTable, SamplingPlan, TransmitterLink};
use molcomp::Species;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> molcomp::Result<()> {
    let links = [
        TransmitterLink::at_distance(10e-6, 5e-6)?,
        TransmitterLink::at_distance(15e-6, 5e-6)?,
    ];
    let plan = SamplingPlan::new(0.05, 30, 0)?;
    let alphabet = [1, -1, 2, -2];
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    for snr in [0.0, 8.0, 16.0] {
        let qu = snr_to_scale(snr, links[0].geometry(Species::A), &plan)?;
        let model = SignalModel::new(ResponseTable::new(&links, &plan), [qu, qu], 1.0)?;
        let set = enumerate_hypotheses(2, &alphabet, &model, DEFAULT_ENUMERATION_CAP)?;
        let trials = 2000;
        let mut errors = 0;
        for _ in 0..trials {
            let truth = set.get(rng.random_range(0..set.len()));
            let counts: Vec<_> = truth.intensities().iter().map(|p| sample_counts(p, &mut rng)).collect();
            let found = map_detect(&CountObservation::from_species(counts), &set)?;
            errors += usize::from(found.values() != truth.values());
        }
        println!("SNR {snr:>4} dB: {errors}/{trials} joint decisions wrong over {} hypotheses", set.len());
    }
    Ok(())
}
