//! Particle-based reaction-diffusion simulator.
//!
//! Every molecule is tracked individually. A step draws independent Gaussian
//! displacements with per-axis standard deviation `√(2 D dt)`, then pairs A and
//! B molecules closer than the reaction radius, nearest pairs first, and
//! removes both members of each pair. The receiver is a transparent ball that
//! only counts.

use std::collections::HashMap;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::physics::{peak_time, ChannelGeometry};
use crate::{Error, Result, Species, DIFFUSION_A, DIFFUSION_B};

/// Reaction radius (m) at which the reference release of [`calibrate_reaction_radius`]
/// annihilates half of its molecules by the CIR peak time. Produced by
/// `calibrate_reaction_radius(10e-6, 2000, 1)` and checked in tests.
pub const DEFAULT_REACTION_RADIUS: f64 = 9.8e-8;

/// Reaction search ignores molecules farther than this many transmitter
/// distances from the receiver.
pub const DEFAULT_PRUNE_FACTOR: f64 = 20.0;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec3,
    pub species: Species,
    pub alive: bool,
}

/// All molecules released so far, dead ones included.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParticleState {
    particles: Vec<Particle>,
    time: f64,
    annihilated_pairs: u64,
}

impl ParticleState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Number of A+B reactions so far (each removes one A and one B).
    pub fn annihilated_pairs(&self) -> u64 {
        self.annihilated_pairs
    }

    pub fn emit(&mut self, position: Vec3, species: Species, count: u64) {
        self.particles.extend((0..count).map(|_| Particle {
            position,
            species,
            alive: true,
        }));
    }

    pub fn live(&self, species: Species) -> usize {
        self.particles
            .iter()
            .filter(|p| p.alive && p.species == species)
            .count()
    }

    pub fn dead(&self, species: Species) -> usize {
        self.particles
            .iter()
            .filter(|p| !p.alive && p.species == species)
            .count()
    }
}

/// Moves every live particle by one Brownian step. `diffusion` is indexed by
/// species.
pub fn brownian_step<R: Rng + ?Sized>(state: &mut ParticleState, dt: f64, diffusion: [f64; 2], rng: &mut R) {
    let sd = diffusion.map(|d| (2.0 * d * dt).sqrt());
    for p in state.particles.iter_mut().filter(|p| p.alive) {
        let s = sd[p.species.index()];
        for x in &mut p.position {
            let z: f64 = StandardNormal.sample(rng);
            *x += s * z;
        }
    }
    state.time += dt;
}

fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Region outside which molecules are left out of the reaction search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneRegion {
    pub center: Vec3,
    pub radius: f64,
}

/// Greedy nearest-first A/B annihilation within `radius`. Returns the number
/// of pairs removed. A radius of zero disables reactions.
pub fn react(state: &mut ParticleState, radius: f64, prune: Option<PruneRegion>) -> usize {
    if radius <= 0.0 {
        return 0;
    }
    let keep = |p: &Particle| {
        p.alive
            && prune.is_none_or(|r| dist2(&p.position, &r.center) <= r.radius * r.radius)
    };
    let cell = |x: &Vec3| x.map(|c| (c / radius).floor() as i64);
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (k, p) in state.particles.iter().enumerate() {
        if p.species == Species::B && keep(p) {
            grid.entry(cell(&p.position)).or_default().push(k);
        }
    }
    if grid.is_empty() {
        return 0;
    }
    let r2 = radius * radius;
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (ka, a) in state.particles.iter().enumerate() {
        if a.species != Species::A || !keep(a) {
            continue;
        }
        let c = cell(&a.position);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bs) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else {
                        continue;
                    };
                    for &kb in bs {
                        let d2 = dist2(&a.position, &state.particles[kb].position);
                        if d2 <= r2 {
                            candidates.push((d2, ka, kb));
                        }
                    }
                }
            }
        }
    }
    greedy_pairs(state, candidates)
}

fn greedy_pairs(state: &mut ParticleState, mut candidates: Vec<(f64, usize, usize)>) -> usize {
    candidates.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut pairs = 0;
    for (_, a, b) in candidates {
        if state.particles[a].alive && state.particles[b].alive {
            state.particles[a].alive = false;
            state.particles[b].alive = false;
            pairs += 1;
        }
    }
    state.annihilated_pairs += pairs as u64;
    pairs
}

/// Live molecules of each species inside the closed ball.
pub fn count_receiver(state: &ParticleState, center: Vec3, radius: f64) -> (u64, u64) {
    let r2 = radius * radius;
    let mut n = [0u64; 2];
    for p in &state.particles {
        if p.alive && dist2(&p.position, &center) <= r2 {
            n[p.species.index()] += 1;
        }
    }
    (n[0], n[1])
}

/// `count` molecules of `species` released at `position` at time `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Emission {
    pub time: f64,
    pub position: Vec3,
    pub species: Species,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub time_step: f64,
    pub total_time: f64,
    pub reaction_radius: f64,
    pub diffusion: [f64; 2],
    pub emissions: Vec<Emission>,
    pub receiver_center: Vec3,
    pub receiver_radius: f64,
    /// Reaction search radius around the receiver; `None` searches everywhere.
    pub prune_distance: Option<f64>,
    pub seed: u64,
}

impl SimConfig {
    /// Receiver of radius `receiver_radius` at the origin, default diffusion
    /// coefficients and reaction radius, and `dt = t_peak / 200` for species A
    /// at `distance`.
    pub fn with_defaults(distance: f64, receiver_radius: f64, total_time: f64, seed: u64) -> Result<Self> {
        let geom = ChannelGeometry::new(distance, receiver_radius, DIFFUSION_A)?;
        Ok(Self {
            time_step: peak_time(&geom) / 200.0,
            total_time,
            reaction_radius: DEFAULT_REACTION_RADIUS,
            diffusion: [DIFFUSION_A, DIFFUSION_B],
            emissions: Vec::new(),
            receiver_center: [0.0; 3],
            receiver_radius,
            prune_distance: Some(DEFAULT_PRUNE_FACTOR * distance),
            seed,
        })
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive, got {v}")))
            }
        };
        positive("time step", self.time_step)?;
        positive("total time", self.total_time)?;
        positive("receiver radius", self.receiver_radius)?;
        if !(self.reaction_radius.is_finite() && self.reaction_radius >= 0.0) {
            return Err(Error::domain("reaction radius must be >= 0"));
        }
        if self.diffusion.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::domain("diffusion coefficients must be >= 0"));
        }
        Ok(())
    }

    /// Warning when one step moves molecules much farther than the reaction
    /// radius, so encounters are missed.
    pub fn step_warning(&self) -> Option<String> {
        let step = (2.0 * self.diffusion[0].max(self.diffusion[1]) * self.time_step).sqrt();
        (self.reaction_radius > 0.0 && step > 5.0 * self.reaction_radius).then(|| {
            format!(
                "RMS step {step:.3e} m exceeds 5x the reaction radius {:.3e} m",
                self.reaction_radius
            )
        })
    }
}

/// Receiver counts and reaction tally at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time_s: f64,
    pub n_a: u64,
    pub n_b: u64,
    pub annihilated_total: u64,
}

/// Runs the simulation and records counts at each requested time. Each step
/// emits due releases, moves, reacts, and then records every sample time it
/// has reached.
pub fn simulate(cfg: &SimConfig, sample_times: &[f64]) -> Result<Vec<TracePoint>> {
    cfg.validate()?;
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("sample times must be sorted"));
    }
    if let Some(&t) = sample_times.iter().find(|&&t| !(0.0..=cfg.total_time).contains(&t)) {
        return Err(Error::domain(format!(
            "sample time {t} outside [0, {}]",
            cfg.total_time
        )));
    }
    if let Some(w) = cfg.step_warning() {
        warn!("{w}");
    }
    let mut emissions = cfg.emissions.clone();
    emissions.sort_by(|a, b| a.time.total_cmp(&b.time));
    let prune = cfg.prune_distance.map(|radius| PruneRegion {
        center: cfg.receiver_center,
        radius,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = ParticleState::new();
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next_emission = 0;
    let mut next_sample = 0;
    // tolerance so sample times on the step grid are not missed by rounding
    let eps = 1e-9 * cfg.time_step;
    let record = |state: &ParticleState, t: f64, out: &mut Vec<TracePoint>| {
        let (n_a, n_b) = count_receiver(state, cfg.receiver_center, cfg.receiver_radius);
        out.push(TracePoint {
            time_s: t,
            n_a,
            n_b,
            annihilated_total: state.annihilated_pairs,
        });
    };
    while next_sample < sample_times.len() && sample_times[next_sample] <= eps {
        record(&state, sample_times[next_sample], &mut out);
        next_sample += 1;
    }
    let mut step = 0u64;
    while next_sample < sample_times.len() {
        let t0 = step as f64 * cfg.time_step;
        while next_emission < emissions.len() && emissions[next_emission].time < t0 + cfg.time_step - eps {
            let e = &emissions[next_emission];
            state.emit(e.position, e.species, e.count);
            next_emission += 1;
        }
        brownian_step(&mut state, cfg.time_step, cfg.diffusion, &mut rng);
        react(&mut state, cfg.reaction_radius, prune);
        step += 1;
        let t1 = step as f64 * cfg.time_step;
        state.time = t1;
        while next_sample < sample_times.len() && sample_times[next_sample] <= t1 + eps {
            record(&state, sample_times[next_sample], &mut out);
            next_sample += 1;
        }
    }
    Ok(out)
}

/// Fraction of molecules annihilated by the CIR peak time when `count` A and
/// `count` B molecules are released 2 µm apart at distance `distance` from the
/// receiver.
pub fn reference_annihilation(distance: f64, count: u64, reaction_radius: f64, seed: u64) -> Result<f64> {
    let mut cfg = SimConfig::with_defaults(distance, 5e-6, 1.0, seed)?;
    let t_peak = 200.0 * cfg.time_step;
    cfg.total_time = t_peak;
    cfg.reaction_radius = reaction_radius;
    cfg.emissions = vec![
        Emission {
            time: 0.0,
            position: [-distance, 1e-6, 0.0],
            species: Species::A,
            count,
        },
        Emission {
            time: 0.0,
            position: [-distance, -1e-6, 0.0],
            species: Species::B,
            count,
        },
    ];
    let trace = simulate(&cfg, &[t_peak])?;
    Ok(trace[0].annihilated_total as f64 / count as f64)
}

/// Bisects on `ln(radius)` until the reference release annihilates 50% of
/// its molecules by the peak time.
pub fn calibrate_reaction_radius(distance: f64, count: u64, seed: u64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-10f64.ln(), 1e-6f64.ln());
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if reference_annihilation(distance, count, mid.exp(), seed)? < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Exhaustive nearest-first matching over all A/B pairs.
    fn brute_force_pairs(state: &ParticleState, radius: f64) -> usize {
        let ps = state.particles();
        let mut cands = Vec::new();
        for (i, a) in ps.iter().enumerate() {
            for (j, b) in ps.iter().enumerate() {
                if a.alive && b.alive && a.species == Species::A && b.species == Species::B {
                    let d2 = dist2(&a.position, &b.position);
                    if d2 <= radius * radius {
                        cands.push((d2, i, j));
                    }
                }
            }
        }
        cands.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut used = vec![false; ps.len()];
        let mut n = 0;
        for (_, i, j) in cands {
            if !used[i] && !used[j] {
                used[i] = true;
                used[j] = true;
                n += 1;
            }
        }
        n
    }

    #[test]
    fn zero_diffusion_leaves_positions() {
        let mut s = ParticleState::new();
        s.emit([1.0, 2.0, 3.0], Species::A, 10);
        let before = s.clone();
        brownian_step(&mut s, 1e-3, [0.0, 0.0], &mut rng(1));
        assert_eq!(s.particles(), before.particles());
        assert_eq!(s.time(), 1e-3);
    }

    #[test]
    fn displacement_moments() {
        let (d, dt, n) = (2.2e-9, 1e-3, 100_000);
        let mut s = ParticleState::new();
        s.emit([0.0; 3], Species::A, n);
        let mut r = rng(2);
        let steps = 10;
        for _ in 0..steps {
            brownian_step(&mut s, dt, [d, d], &mut r);
        }
        let t = steps as f64 * dt;
        for k in 0..3 {
            let mean = s.particles().iter().map(|p| p.position[k]).sum::<f64>() / n as f64;
            assert!(mean.abs() < 5.0 * (2.0 * d * t / n as f64).sqrt());
        }
        let msd = s.particles().iter().map(|p| dist2(&p.position, &[0.0; 3])).sum::<f64>() / n as f64;
        assert!((msd / (6.0 * d * t) - 1.0).abs() < 0.02, "msd ratio {}", msd / (6.0 * d * t));
    }

    #[test]
    fn dead_particles_stay_put() {
        let mut s = ParticleState::new();
        s.emit([0.0; 3], Species::A, 1);
        s.emit([0.0; 3], Species::B, 1);
        assert_eq!(react(&mut s, 1e-9, None), 1);
        let frozen = s.clone();
        brownian_step(&mut s, 1.0, [1.0, 1.0], &mut rng(3));
        assert_eq!(s.particles(), frozen.particles());
        assert_eq!(count_receiver(&s, [0.0; 3], 1.0), (0, 0));
    }

    #[test]
    fn react_basics() {
        let mut s = ParticleState::new();
        s.emit([0.0; 3], Species::A, 5);
        assert_eq!(react(&mut s, 1.0, None), 0);
        assert_eq!(s.live(Species::A), 5);
        s.emit([0.0; 3], Species::B, 2);
        assert_eq!(react(&mut s, 0.0, None), 0);
        assert_eq!(react(&mut s, 1e-12, None), 2);
        assert_eq!((s.live(Species::A), s.live(Species::B)), (3, 0));
        assert_eq!(s.dead(Species::A), s.dead(Species::B));
    }

    #[test]
    fn pruned_particles_do_not_react() {
        let mut s = ParticleState::new();
        s.emit([100.0, 0.0, 0.0], Species::A, 1);
        s.emit([100.0, 0.0, 0.0], Species::B, 1);
        let far = PruneRegion {
            center: [0.0; 3],
            radius: 10.0,
        };
        assert_eq!(react(&mut s, 1.0, Some(far)), 0);
        assert_eq!(s.live(Species::A), 1);
    }

    #[test]
    fn grid_matching_equals_exhaustive_matching() {
        let mut r = rng(4);
        for trial in 0..20 {
            let mut s = ParticleState::new();
            for species in [Species::A, Species::B] {
                for _ in 0..100 {
                    let pos = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
                    s.emit(pos, species, 1);
                }
            }
            let radius = 0.05 + 0.02 * trial as f64;
            let want = brute_force_pairs(&s, radius);
            let got = react(&mut s, radius, None);
            assert_eq!(got, want, "radius {radius}");
            assert_eq!(s.dead(Species::A), got);
            assert_eq!(s.dead(Species::B), got);
        }
    }

    #[test]
    fn receiver_counts_closed_ball() {
        let mut s = ParticleState::new();
        assert_eq!(count_receiver(&s, [0.0; 3], 1.0), (0, 0));
        s.emit([0.0; 3], Species::A, 4);
        s.emit([0.0; 3], Species::B, 3);
        s.emit([1.0, 0.0, 0.0], Species::B, 1);
        s.emit([1.5, 0.0, 0.0], Species::A, 1);
        assert_eq!(count_receiver(&s, [0.0; 3], 1.0), (4, 4));
    }

    fn single_release(species: Species, count: u64, seed: u64) -> SimConfig {
        let mut cfg = SimConfig::with_defaults(10e-6, 5e-6, 0.02, seed).unwrap();
        cfg.reaction_radius = 0.0;
        cfg.emissions.push(Emission {
            time: 0.0,
            position: [-10e-6, 0.0, 0.0],
            species,
            count,
        });
        cfg
    }

    #[test]
    fn simulate_is_deterministic_and_validates() {
        let mut cfg = single_release(Species::A, 2000, 7);
        cfg.reaction_radius = DEFAULT_REACTION_RADIUS;
        cfg.emissions.push(Emission {
            time: 0.0,
            position: [-10e-6, 1e-6, 0.0],
            species: Species::B,
            count: 2000,
        });
        let times: Vec<f64> = (1..=10).map(|k| k as f64 * 1e-3).collect();
        let a = simulate(&cfg, &times).unwrap();
        let b = simulate(&cfg, &times).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1].annihilated_total >= w[0].annihilated_total));
        assert!(simulate(&cfg, &[2e-3, 1e-3]).is_err());
        assert!(simulate(&cfg, &[1.0]).is_err());
        cfg.emissions.clear();
        let empty = simulate(&cfg, &times).unwrap();
        assert!(empty.iter().all(|p| p.n_a == 0 && p.n_b == 0));
    }

    #[test]
    fn occupancy_follows_exact_ball_probability() {
        use crate::physics::exact_occupancy;
        let q = 20_000;
        let cfg = single_release(Species::A, q, 11);
        let geom = ChannelGeometry::new(10e-6, 5e-6, DIFFUSION_A).unwrap();
        let tp = peak_time(&geom);
        let times: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|f| f * tp).collect();
        let trace = simulate(&cfg, &times).unwrap();
        for (p, &t) in trace.iter().zip(&times) {
            let want = exact_occupancy(t, &geom).unwrap() * q as f64;
            let sd = want.sqrt();
            assert!((p.n_a as f64 - want).abs() < 5.0 * sd, "t={t}: {} vs {want}", p.n_a);
        }
    }

    #[test]
    fn default_reaction_radius_is_calibrated() {
        let f = reference_annihilation(10e-6, 2000, DEFAULT_REACTION_RADIUS, 1).unwrap();
        assert!((0.45..=0.55).contains(&f), "annihilated fraction {f}");
    }

    #[test]
    fn larger_radius_never_leaves_more_survivors() {
        let mut last = 0.0;
        for radius in [0.0, 2.5e-8, 5e-8, 1e-7, 2e-7] {
            let f = reference_annihilation(10e-6, 1000, radius, 5).unwrap();
            assert!(f >= last, "radius {radius}: {f} < {last}");
            last = f;
        }
    }
}
