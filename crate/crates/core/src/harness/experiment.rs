use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{snr_to_scale, trial_seed, ErrorRateRecord, ExperimentConfig};
use crate::analysis::{ber_upper_bound_with, VarianceForm};
use crate::detector::{enumerate_hypotheses, HypothesisSet, SignalModel};
use crate::encoder::{
    decode_division, decode_result, plan_operation, DecodeContext, Operation, ValueEncoding,
};
use crate::particle::{simulate, Emission, SimConfig, TracePoint};
use crate::physics::{cir, exact_occupancy, peak_time};
use crate::stats::{intensity, sample_counts, IntensityPair, ResponseTable, SamplingPlan, TransmitterLink};
use crate::{Error, Result, Species};

/// Everything a trial at one SNR point needs.
struct SweepPoint<'a> {
    cfg: &'a ExperimentConfig,
    links: &'a [TransmitterLink],
    plan: SamplingPlan,
    model: SignalModel,
    set: HypothesisSet,
    scale: f64,
}

fn sweep_point<'a>(
    cfg: &'a ExperimentConfig,
    links: &'a [TransmitterLink],
    table: &ResponseTable,
    snr_db: f64,
) -> Result<SweepPoint<'a>> {
    let plan = *table.plan();
    let scale = snr_to_scale(snr_db, links[0].geometry(Species::A), &plan)?;
    let model = SignalModel::new(table.clone(), [scale, scale], cfg.background)?;
    let set = enumerate_hypotheses(cfg.transmitters, &cfg.alphabet()?, &model, cfg.enumeration_cap)?;
    Ok(SweepPoint {
        cfg,
        links,
        plan,
        model,
        set,
        scale,
    })
}

impl SweepPoint<'_> {
    fn history(&self, indices: &[usize]) -> Vec<Vec<i64>> {
        indices.iter().rev().map(|&k| self.set.get(k).values().to_vec()).collect()
    }

    /// Net counts of every symbol in the frame from the particle simulator,
    /// plus Poisson background.
    fn particle_observations(&self, truth: &[usize], seed: u64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        let cfg = self.cfg;
        let ts = self.plan.symbol_duration();
        let frame = truth.len();
        let d_max = self.links.iter().map(|l| l.geometry(Species::A).distance()).fold(0.0, f64::max);
        let time_step = match cfg.particle_sim.time_step {
            Some(dt) => dt,
            None => peak_time(self.links[0].geometry(Species::A)) / 200.0,
        };
        let mut emissions = Vec::new();
        for (k, &h) in truth.iter().enumerate() {
            for (m, &v) in self.set.get(h).values().iter().enumerate() {
                let Some(species) = Species::for_value(v) else {
                    continue;
                };
                emissions.push(Emission {
                    time: k as f64 * ts,
                    position: [-self.links[m].geometry(species).distance(), 0.0, 0.0],
                    species,
                    count: (v.unsigned_abs() as f64 * self.scale).round() as u64,
                });
            }
        }
        let sim = SimConfig {
            time_step,
            total_time: frame as f64 * ts,
            reaction_radius: cfg.particle_sim.reaction_radius,
            diffusion: [cfg.geometry.diffusion_a, cfg.geometry.diffusion_b],
            emissions,
            receiver_center: [0.0; 3],
            receiver_radius: cfg.geometry.receiver_radius,
            prune_distance: Some(cfg.particle_sim.prune_factor * d_max),
            seed,
        };
        let n = self.plan.samples_per_symbol();
        let times: Vec<f64> = (0..frame)
            .flat_map(|k| self.plan.sample_times().into_iter().map(move |t| k as f64 * ts + t))
            .map(|t| t.min(frame as f64 * ts))
            .collect();
        let trace = simulate(&sim, &times)?;
        let bg = IntensityPair::new(cfg.background, cfg.background)?;
        Ok(trace
            .chunks(n)
            .map(|c| {
                c.iter()
                    .map(|p| {
                        let (a, b) = sample_counts(&bg, rng);
                        (p.n_a + a) as f64 - (p.n_b + b) as f64
                    })
                    .collect()
            })
            .collect())
    }

    /// Runs one trial and reports whether the last symbol was misdetected.
    fn trial(&self, seed: u64) -> Result<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = self.plan.isi_length() + 1;
        let truth: Vec<usize> = (0..frame).map(|_| rng.random_range(0..self.set.len())).collect();
        let particle = if self.cfg.particle {
            Some(self.particle_observations(&truth, seed ^ 0x5EED, &mut rng)?)
        } else {
            None
        };
        let mut decided = Vec::with_capacity(frame);
        for k in 0..frame {
            let obs: Vec<f64> = match &particle {
                Some(p) => p[k].clone(),
                None => {
                    let isi = self.model.isi_intensities(&self.history(&truth[..k]));
                    let lambda = self.set.get(truth[k]).intensities().iter().zip(&isi).map(|(a, b)| *a + *b);
                    if self.cfg.noiseless {
                        lambda.map(|p| p.mean()).collect()
                    } else {
                        lambda
                            .map(|p| {
                                let (a, b) = sample_counts(&p, &mut rng);
                                a as f64 - b as f64
                            })
                            .collect()
                    }
                }
            };
            let idx = if self.cfg.noiseless && particle.is_none() {
                let isi = (frame > 1 && self.cfg.decision_feedback)
                    .then(|| self.model.isi_intensities(&self.history(&decided)));
                self.set.detect_nearest_mean(&obs, isi.as_deref())?
            } else if frame > 1 && self.cfg.decision_feedback {
                let isi = self.model.isi_intensities(&self.history(&decided));
                self.set.detect_index_with_isi(&obs, &isi)?
            } else {
                self.set.detect_index_real(&obs)
            };
            decided.push(idx);
        }
        Ok(decided[frame - 1] != truth[frame - 1])
    }
}

fn links_and_table(cfg: &ExperimentConfig) -> Result<(Vec<TransmitterLink>, ResponseTable)> {
    let links = cfg.links()?;
    let table = ResponseTable::new(&links, &cfg.sampling_plan()?);
    Ok((links, table))
}

/// Error rate (and optionally the bound) at every SNR of the sweep. A trial
/// is a frame of `isi_length + 1` symbols and counts as an error when its
/// last symbol is misdetected.
pub fn run_er_experiment(cfg: &ExperimentConfig) -> Result<Vec<ErrorRateRecord>> {
    cfg.validate()?;
    let (links, table) = links_and_table(cfg)?;
    let mut records = Vec::with_capacity(cfg.snr_db.len());
    for (p, &snr) in cfg.snr_db.iter().enumerate() {
        let point = sweep_point(cfg, &links, &table, snr)?;
        let n_err = (0..cfg.trials)
            .into_par_iter()
            .map(|t| point.trial(trial_seed(cfg.seed, p as u64, t)).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        let bound = if cfg.compute_bound && point.set.len() > 1 {
            Some(ber_upper_bound_with(&point.set, cfg.variance_form)?)
        } else {
            None
        };
        records.push(ErrorRateRecord::new(snr, n_err, cfg.trials, bound));
    }
    Ok(records)
}

/// The union bound alone over the configured SNR grid.
pub fn bound_curve(cfg: &ExperimentConfig, form: VarianceForm) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (links, table) = links_and_table(cfg)?;
    cfg.snr_db
        .iter()
        .map(|&snr| ber_upper_bound_with(&sweep_point(cfg, &links, &table, snr)?.set, form))
        .collect()
}

/// One time point of the CIR comparison. Fractions are per released molecule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CirRow {
    pub time_s: f64,
    pub theory: f64,
    pub exact: f64,
    pub simulated: f64,
    pub net_simulated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CirValidation {
    pub molecules: u64,
    pub pair_molecules: u64,
    pub peak_time_theory: f64,
    pub peak_time_simulated: f64,
    /// Largest relative gap between simulation and the impulse response.
    pub max_rel_dev_theory: f64,
    /// Largest relative gap between simulation and the exact ball occupancy.
    pub max_rel_dev_exact: f64,
    /// Largest statistical standard error of the simulated fraction, relative.
    pub max_rel_standard_error: f64,
    pub mean_net_simulated: f64,
    pub rows: Vec<CirRow>,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
    #[serde(skip)]
    pub pair_trace: Vec<TracePoint>,
}

impl CirValidation {
    /// The scalar results, without the curves.
    pub fn summary(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serialisable");
        v.as_object_mut().expect("object").remove("rows");
        v
    }
}

/// Particle simulation of a single-species release from transmitter 0,
/// compared with the impulse response over `[0.2, horizon] · t_peak`. A
/// second run releases equal amounts of A and B (same diffusion coefficient,
/// mirrored positions, reactions on) whose net count should stay near zero.
pub fn run_cir_validation(cfg: &ExperimentConfig) -> Result<CirValidation> {
    cfg.validate()?;
    let links = cfg.links()?;
    let geom = *links[0].geometry(Species::A);
    let d = geom.distance();
    let tp = peak_time(&geom);
    let dt = cfg.particle_sim.time_step.unwrap_or(tp / 200.0);
    let q = cfg.particle_sim.cir_molecules;
    let horizon = cfg.particle_sim.cir_horizon * tp;
    let first = (0.2 * tp / dt).ceil() as u64;
    let last = (horizon / dt).floor() as u64;
    let times: Vec<f64> = (first..=last).map(|k| k as f64 * dt).collect();
    if times.is_empty() {
        return Err(Error::config("CIR window contains no time steps"));
    }

    let base = SimConfig {
        time_step: dt,
        total_time: horizon,
        reaction_radius: 0.0,
        diffusion: [cfg.geometry.diffusion_a, cfg.geometry.diffusion_b],
        emissions: vec![Emission {
            time: 0.0,
            position: [-d, 0.0, 0.0],
            species: Species::A,
            count: q,
        }],
        receiver_center: [0.0; 3],
        receiver_radius: geom.receiver_radius(),
        prune_distance: Some(cfg.particle_sim.prune_factor * d),
        seed: cfg.seed,
    };
    let trace = simulate(&base, &times)?;

    let pair_q = q.min(10_000);
    let pair = SimConfig {
        reaction_radius: cfg.particle_sim.reaction_radius,
        diffusion: [cfg.geometry.diffusion_a; 2],
        emissions: vec![
            Emission {
                time: 0.0,
                position: [-d, 0.0, 0.0],
                species: Species::A,
                count: pair_q,
            },
            Emission {
                time: 0.0,
                position: [d, 0.0, 0.0],
                species: Species::B,
                count: pair_q,
            },
        ],
        seed: trial_seed(cfg.seed, 1, 0),
        ..base.clone()
    };
    let pair_trace = simulate(&pair, &times)?;

    let mut rows = Vec::with_capacity(times.len());
    let (mut dev_theory, mut dev_exact, mut rel_se) = (0.0f64, 0.0f64, 0.0f64);
    for ((&t, p), pp) in times.iter().zip(&trace).zip(&pair_trace) {
        let theory = cir(t, &geom)?;
        let exact = exact_occupancy(t, &geom)?;
        let simulated = p.n_a as f64 / q as f64;
        dev_theory = dev_theory.max((simulated / theory - 1.0).abs());
        dev_exact = dev_exact.max((simulated / exact - 1.0).abs());
        rel_se = rel_se.max((exact * (1.0 - exact) / q as f64).sqrt() / exact);
        rows.push(CirRow {
            time_s: t,
            theory,
            exact,
            simulated,
            net_simulated: (pp.n_a as f64 - pp.n_b as f64) / pair_q as f64,
        });
    }
    Ok(CirValidation {
        molecules: q,
        pair_molecules: pair_q,
        peak_time_theory: tp,
        peak_time_simulated: smoothed_peak_time(&rows),
        max_rel_dev_theory: dev_theory,
        max_rel_dev_exact: dev_exact,
        max_rel_standard_error: rel_se,
        mean_net_simulated: rows.iter().map(|r| r.net_simulated).sum::<f64>() / rows.len() as f64,
        rows,
        trace,
        pair_trace,
    })
}

/// Time of the maximum of an 11-point moving average of the simulated curve.
fn smoothed_peak_time(rows: &[CirRow]) -> f64 {
    let w = 5usize;
    let mut best = (rows[0].time_s, f64::NEG_INFINITY);
    for k in 0..rows.len() {
        let lo = k.saturating_sub(w);
        let hi = (k + w + 1).min(rows.len());
        let avg = rows[lo..hi].iter().map(|r| r.simulated).sum::<f64>() / (hi - lo) as f64;
        if avg > best.1 {
            best = (rows[k].time_s, avg);
        }
    }
    best.0
}

/// One arithmetic case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArithmeticRow {
    pub op: Operation,
    pub a: i64,
    pub b: i64,
    pub expected: i64,
    pub noiseless: i64,
    pub remainder: Option<i64>,
    pub correct: u64,
    pub trials: u64,
}

impl ArithmeticRow {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.trials as f64
    }
}

/// Carries out every configured operation on all operand pairs in
/// `1..=max_operand`, both noiselessly and over `trials` noisy channel uses.
/// All transmitters sit at the first configured distance, species B is
/// scaled to match species A's received gain, and the receiver adds up the
/// net counts of all samples in an interval.
pub fn run_arithmetic_demo(cfg: &ExperimentConfig) -> Result<Vec<ArithmeticRow>> {
    cfg.validate()?;
    let link = cfg.links()?[0];
    let links = [link, link];
    let plan = SamplingPlan::new(cfg.symbol_duration, cfg.samples_per_symbol, 0)?;
    let gain = |s: Species| -> Result<f64> {
        plan.sample_times()
            .iter()
            .map(|&t| cir(t, link.geometry(s)))
            .sum::<Result<f64>>()
    };
    let (gain_a, gain_b) = (gain(Species::A)?, gain(Species::B)?);
    let qu = snr_to_scale(cfg.arithmetic.snr_db, link.geometry(Species::A), &plan)?;
    let enc = ValueEncoding::with_combinations(qu.round().max(1.0) as u64, cfg.arithmetic.max_operand)?
        .equalized(gain_a, gain_b)?;
    let ctx = DecodeContext::new(enc.scale() as f64 * gain_a)?;
    let background = cfg.background * plan.samples_per_symbol() as f64;

    let mut rows = Vec::new();
    let n = cfg.arithmetic.max_operand as i64;
    let mut case = 0u64;
    for &op in &cfg.arithmetic.operations {
        for a in 1..=n {
            for b in 1..=n {
                let operands = [a, b];
                let expected = op.apply(&operands).expect("two non-zero operands");
                let p = plan_operation(op, &operands, &enc)?;
                let noiseless_counts = p.expected_counts(gain_a, gain_b);
                let noiseless = decode_result(&noiseless_counts, &p, &ctx)?;
                let remainder = match op {
                    Operation::Div => Some(decode_division(&noiseless_counts, &p, &ctx, enc.scale())?.remainder),
                    _ => None,
                };
                // accumulated intensity of each interval, summed over samples
                let per_interval: Vec<IntensityPair> = (0..p.intervals)
                    .map(|k| {
                        (1..=plan.samples_per_symbol())
                            .map(|i| intensity(&p.schedules, &links, &plan, k, i))
                            .try_fold(IntensityPair::default(), |acc, x| x.map(|x| acc + x))
                            .map(|x| x.with_background(background))
                    })
                    .collect::<Result<_>>()?;
                let correct = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, case, t));
                        let counts: Vec<f64> = per_interval
                            .iter()
                            .map(|lam| {
                                let (x, y) = sample_counts(lam, &mut rng);
                                x as f64 - y as f64
                            })
                            .collect();
                        decode_result(&counts, &p, &ctx).map(|r| u64::from(r == expected))
                    })
                    .try_reduce(|| 0, |x, y| Ok(x + y))?;
                rows.push(ArithmeticRow {
                    op,
                    a,
                    b,
                    expected,
                    noiseless,
                    remainder,
                    correct,
                    trials: cfg.trials,
                });
                case += 1;
            }
        }
    }
    Ok(rows)
}
