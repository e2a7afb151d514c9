//! Receiver count model.
//!
//! The number of species-`s` molecules seen at sample `i` of symbol `k` is
//! Poisson with intensity
//!
//! ```text
//! Λ_s(i) = Σ_tx Σ_{j=0}^{L} Q_{s,k-j} · h_s((i/I + j) Ts),   L = min(k, l)
//! ```
//!
//! where symbols are counted from 0 and `l` is the ISI memory. The net count
//! `N = N_A - N_B` is Skellam distributed; detection uses the Gaussian
//! approximation with mean `Λ_A - Λ_B` and variance `Λ_A + Λ_B`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::encoder::EmissionSchedule;
use crate::physics::{cir_unchecked, ChannelGeometry};
use crate::{Error, Result, Species, DIFFUSION_A, DIFFUSION_B};

/// Above this total intensity the Skellam PMF is evaluated by convolution
/// instead of the Bessel series.
const SKELLAM_SERIES_LIMIT: f64 = 400.0;

/// Where within each symbol the receiver samples, and how much history it
/// models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    symbol_duration: f64,
    samples_per_symbol: usize,
    isi_length: usize,
}

impl SamplingPlan {
    pub fn new(symbol_duration: f64, samples_per_symbol: usize, isi_length: usize) -> Result<Self> {
        if !(symbol_duration.is_finite() && symbol_duration > 0.0) {
            return Err(Error::domain(format!(
                "symbol duration must be positive, got {symbol_duration}"
            )));
        }
        if samples_per_symbol == 0 {
            return Err(Error::domain("at least one sample per symbol is required"));
        }
        Ok(Self {
            symbol_duration,
            samples_per_symbol,
            isi_length,
        })
    }

    pub fn symbol_duration(&self) -> f64 {
        self.symbol_duration
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn isi_length(&self) -> usize {
        self.isi_length
    }

    fn check_sample(&self, i: usize) -> Result<()> {
        if (1..=self.samples_per_symbol).contains(&i) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "sample index {i} outside 1..={}",
                self.samples_per_symbol
            )))
        }
    }

    /// Time since the start of the symbol at sample `i` (1-based).
    pub fn sample_time(&self, i: usize) -> Result<f64> {
        self.check_sample(i)?;
        Ok(self.lagged_time(i, 0))
    }

    /// Time since a release `j` symbols before the current one, at sample `i`.
    pub fn lagged_time(&self, i: usize, j: usize) -> f64 {
        (i as f64 / self.samples_per_symbol as f64 + j as f64) * self.symbol_duration
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (1..=self.samples_per_symbol)
            .map(|i| self.lagged_time(i, 0))
            .collect()
    }
}

/// Poisson intensities of the two species at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntensityPair {
    a: f64,
    b: f64,
}

impl IntensityPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
            return Err(Error::domain(format!(
                "intensities must be finite and >= 0, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub(crate) fn new_unchecked(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn get(&self, species: Species) -> f64 {
        match species {
            Species::A => self.a,
            Species::B => self.b,
        }
    }

    pub(crate) fn add(&mut self, species: Species, x: f64) {
        match species {
            Species::A => self.a += x,
            Species::B => self.b += x,
        }
    }

    /// Mean of the net count.
    pub fn mean(&self) -> f64 {
        self.a - self.b
    }

    /// Variance of the net count.
    pub fn variance(&self) -> f64 {
        self.a + self.b
    }

    pub fn scaled(&self, g: f64) -> Self {
        Self::new_unchecked(self.a * g, self.b * g)
    }

    /// Adds a background intensity to each species.
    pub fn with_background(&self, lambda0: f64) -> Self {
        Self::new_unchecked(self.a + lambda0, self.b + lambda0)
    }
}

impl std::ops::Add for IntensityPair {
    type Output = IntensityPair;

    fn add(self, rhs: Self) -> Self {
        Self::new_unchecked(self.a + rhs.a, self.b + rhs.b)
    }
}

/// Counts observed over the samples of one symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountObservation {
    net: Vec<i64>,
    species: Option<Vec<(u64, u64)>>,
}

impl CountObservation {
    pub fn from_net(net: Vec<i64>) -> Self {
        Self { net, species: None }
    }

    pub fn from_species(counts: Vec<(u64, u64)>) -> Self {
        let net = counts.iter().map(|&(a, b)| a as i64 - b as i64).collect();
        Self {
            net,
            species: Some(counts),
        }
    }

    pub fn net(&self) -> &[i64] {
        &self.net
    }

    pub fn species(&self) -> Option<&[(u64, u64)]> {
        self.species.as_deref()
    }

    pub fn len(&self) -> usize {
        self.net.len()
    }

    pub fn is_empty(&self) -> bool {
        self.net.is_empty()
    }
}

/// Channel from one transmitter to the receiver, one geometry per species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitterLink {
    a: ChannelGeometry,
    b: ChannelGeometry,
}

impl TransmitterLink {
    pub fn new(a: ChannelGeometry, b: ChannelGeometry) -> Self {
        Self { a, b }
    }

    /// Same distance and receiver for both species, default diffusion
    /// coefficients.
    pub fn at_distance(distance: f64, receiver_radius: f64) -> Result<Self> {
        Ok(Self {
            a: ChannelGeometry::new(distance, receiver_radius, DIFFUSION_A)?,
            b: ChannelGeometry::new(distance, receiver_radius, DIFFUSION_B)?,
        })
    }

    pub fn geometry(&self, species: Species) -> &ChannelGeometry {
        match species {
            Species::A => &self.a,
            Species::B => &self.b,
        }
    }
}

/// Intensities at sample `i` (1-based) of symbol `k` (0-based).
pub fn intensity(
    schedules: &[EmissionSchedule],
    links: &[TransmitterLink],
    plan: &SamplingPlan,
    k: usize,
    i: usize,
) -> Result<IntensityPair> {
    plan.check_sample(i)?;
    let depth = k.min(plan.isi_length);
    let mut out = IntensityPair::default();
    for s in schedules {
        let link = links.get(s.transmitter()).ok_or_else(|| {
            Error::domain(format!(
                "schedule for transmitter {} but only {} links",
                s.transmitter(),
                links.len()
            ))
        })?;
        for r in s.releases() {
            if r.symbol > k || k - r.symbol > depth {
                continue;
            }
            let t = plan.lagged_time(i, k - r.symbol);
            out.add(r.species, r.count as f64 * cir_unchecked(t, link.geometry(r.species)));
        }
    }
    Ok(out)
}

/// Precomputed `h_s((i/I + j) Ts)` for every transmitter, species, lag
/// `j = 0..=l` and sample `i = 1..=I`.
#[derive(Debug, Clone)]
pub struct ResponseTable {
    plan: SamplingPlan,
    transmitters: usize,
    values: Vec<f64>,
}

impl ResponseTable {
    pub fn new(links: &[TransmitterLink], plan: &SamplingPlan) -> Self {
        let (lags, n) = (plan.isi_length + 1, plan.samples_per_symbol);
        let mut values = Vec::with_capacity(links.len() * 2 * lags * n);
        for link in links {
            for species in Species::ALL {
                for j in 0..lags {
                    for i in 1..=n {
                        values.push(cir_unchecked(plan.lagged_time(i, j), link.geometry(species)));
                    }
                }
            }
        }
        Self {
            plan: *plan,
            transmitters: links.len(),
            values,
        }
    }

    pub fn plan(&self) -> &SamplingPlan {
        &self.plan
    }

    pub fn transmitters(&self) -> usize {
        self.transmitters
    }

    fn row(&self, tx: usize, species: Species, j: usize) -> &[f64] {
        let n = self.plan.samples_per_symbol;
        let lags = self.plan.isi_length + 1;
        let start = ((tx * 2 + species.index()) * lags + j) * n;
        &self.values[start..start + n]
    }

    /// Responses over samples `1..=I` at lag `j`.
    pub fn response(&self, tx: usize, species: Species, j: usize) -> &[f64] {
        self.row(tx, species, j)
    }

    /// Adds the intensities produced by one symbol's signed values sent `j`
    /// symbols ago. `scale` holds molecules per unit for A and B.
    pub fn accumulate(&self, values: &[i64], scale: [f64; 2], j: usize, out: &mut [IntensityPair]) {
        debug_assert_eq!(out.len(), self.plan.samples_per_symbol);
        for (tx, &v) in values.iter().enumerate() {
            let Some(species) = Species::for_value(v) else {
                continue;
            };
            let q = v.unsigned_abs() as f64 * scale[species.index()];
            for (o, h) in out.iter_mut().zip(self.row(tx, species, j)) {
                o.add(species, q * h);
            }
        }
    }
}

/// Poisson probability `λⁿ e^{-λ} / n!`.
pub fn poisson_pmf(lambda: f64, n: i64) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0) || n < 0 {
        return Err(Error::domain(format!(
            "poisson_pmf needs lambda >= 0 and n >= 0, got ({lambda}, {n})"
        )));
    }
    if lambda == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if lambda > 20.0 {
        return Ok(ln_poisson(lambda, n as u64).exp());
    }
    // e^{-λ} ∏ λ/k cannot overflow for λ <= 20
    let mut p = (-lambda).exp();
    for k in 1..=n {
        p *= lambda / k as f64;
        if p == 0.0 {
            break;
        }
    }
    Ok(p)
}

fn ln_poisson(lambda: f64, n: u64) -> f64 {
    n as f64 * lambda.ln() - lambda - ln_gamma(n as f64 + 1.0)
}

/// `ln I_ν(x)` for integer order by summing the power series in log space.
fn ln_bessel_i(nu: u64, x: f64) -> f64 {
    let nu = nu as f64;
    let half = (x / 2.0).ln();
    let term = |k: f64| (2.0 * k + nu) * half - ln_gamma(k + 1.0) - ln_gamma(k + nu + 1.0);
    // terms peak near k* where k(k + ν) = x²/4
    let k_star = (0.5 * (-nu + (nu * nu + x * x).sqrt())).floor().max(0.0);
    let top = term(k_star);
    let mut sum = 1.0;
    let mut k = k_star + 1.0;
    loop {
        let r = (term(k) - top).exp();
        sum += r;
        if r < 1e-18 {
            break;
        }
        k += 1.0;
    }
    k = k_star - 1.0;
    while k >= 0.0 {
        let r = (term(k) - top).exp();
        sum += r;
        if r < 1e-18 {
            break;
        }
        k -= 1.0;
    }
    top + sum.ln()
}

fn poisson_cutoff(lambda: f64) -> u64 {
    (lambda + 12.0 * lambda.sqrt()).ceil() as u64 + 10
}

/// Exact law of `N_A - N_B` for independent Poisson counts.
pub fn skellam_pmf(pair: &IntensityPair, n: i64) -> Result<f64> {
    let (a, b) = (pair.a, pair.b);
    if a == 0.0 {
        return if n > 0 { Ok(0.0) } else { poisson_pmf(b, -n) };
    }
    if b == 0.0 {
        return if n < 0 { Ok(0.0) } else { poisson_pmf(a, n) };
    }
    if a + b <= SKELLAM_SERIES_LIMIT {
        let ln = -(a + b) + 0.5 * n as f64 * (a / b).ln() + ln_bessel_i(n.unsigned_abs(), 2.0 * (a * b).sqrt());
        return Ok(ln.exp());
    }
    let (cut_a, cut_b) = (poisson_cutoff(a), poisson_cutoff(b));
    let k0 = (-n).max(0) as u64;
    let mut p = 0.0;
    for k in k0..=cut_b {
        let na = (n + k as i64) as u64;
        if na > cut_a {
            break;
        }
        p += (ln_poisson(a, na) + ln_poisson(b, k)).exp();
    }
    Ok(p)
}

/// Gaussian log-density of the net count under the approximation.
pub fn gaussian_loglik(n: f64, pair: &IntensityPair) -> Result<f64> {
    let var = pair.variance();
    if var <= 0.0 {
        return Err(Error::DegenerateVariance { sample: 0 });
    }
    let dev = n - pair.mean();
    Ok(-dev * dev / (2.0 * var) - 0.5 * (2.0 * PI * var).ln())
}

fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let d = Poisson::new(lambda).expect("intensity is positive and finite");
    d.sample(rng) as u64
}

/// Independent Poisson draws `(N_A, N_B)`.
pub fn sample_counts<R: Rng + ?Sized>(pair: &IntensityPair, rng: &mut R) -> (u64, u64) {
    (poisson_draw(pair.a, rng), poisson_draw(pair.b, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{plan_operation, Operation, ValueEncoding};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Poisson PMF table by the recurrence p(k+1) = p(k) λ/(k+1).
    fn poisson_table(lambda: f64, len: usize) -> Vec<f64> {
        let mut p = vec![0.0; len];
        p[0] = (-lambda).exp();
        for k in 1..len {
            p[k] = p[k - 1] * lambda / k as f64;
        }
        p
    }

    fn skellam_oracle(a: f64, b: f64, n: i64) -> f64 {
        let len = 1200;
        let (pa, pb) = (poisson_table(a, len), poisson_table(b, len));
        (0..len as i64)
            .filter(|k| (0..len as i64).contains(&(n + k)))
            .map(|k| pa[(n + k) as usize] * pb[k as usize])
            .sum()
    }

    fn pair(a: f64, b: f64) -> IntensityPair {
        IntensityPair::new(a, b).unwrap()
    }

    #[test]
    fn sampling_plan_times_and_validation() {
        let p = SamplingPlan::new(0.04, 4, 1).unwrap();
        assert_eq!(p.sample_time(1).unwrap(), 0.01);
        assert_eq!(p.sample_time(4).unwrap(), 0.04);
        assert!(p.sample_time(0).is_err());
        assert!(p.sample_time(5).is_err());
        assert!((p.lagged_time(2, 1) - 0.06).abs() < 1e-15);
        assert!(SamplingPlan::new(0.0, 4, 0).is_err());
        assert!(SamplingPlan::new(1.0, 0, 0).is_err());
    }

    #[test]
    fn observation_net_is_species_difference() {
        let o = CountObservation::from_species(vec![(5, 2), (0, 3)]);
        assert_eq!(o.net(), &[3, -3]);
        assert_eq!(o.len(), 2);
    }

    fn setup() -> (Vec<TransmitterLink>, SamplingPlan) {
        let l = TransmitterLink::at_distance(10e-6, 5e-6).unwrap();
        (vec![l, l], SamplingPlan::new(0.02, 5, 2).unwrap())
    }

    #[test]
    fn intensity_of_silence_is_zero() {
        let (links, plan) = setup();
        let s = vec![EmissionSchedule::new(0), EmissionSchedule::new(1)];
        let p = intensity(&s, &links, &plan, 3, 2).unwrap();
        assert_eq!((p.a(), p.b()), (0.0, 0.0));
    }

    #[test]
    fn intensity_single_transmitter_without_isi() {
        let (links, _) = setup();
        let plan = SamplingPlan::new(0.02, 5, 0).unwrap();
        let mut s = EmissionSchedule::new(0);
        s.push(0, Species::A, 1000).unwrap();
        s.push(1, Species::A, 700).unwrap();
        for i in 1..=5 {
            let p = intensity(std::slice::from_ref(&s), &links, &plan, 1, i).unwrap();
            let h = cir_unchecked(plan.sample_time(i).unwrap(), links[0].geometry(Species::A));
            assert_eq!(p.a(), 700.0 * h);
            assert_eq!(p.b(), 0.0);
        }
    }

    #[test]
    fn intensity_is_additive_over_transmitters_and_history() {
        let (links, plan) = setup();
        let mut s0 = EmissionSchedule::new(0);
        let mut s1 = EmissionSchedule::new(1);
        for k in 0..4 {
            s0.push(k, Species::A, 100 * (k as u64 + 1)).unwrap();
            s1.push(k, Species::B, 50 * (k as u64 + 2)).unwrap();
        }
        for k in 0..4 {
            for i in 1..=5 {
                let both = intensity(&[s0.clone(), s1.clone()], &links, &plan, k, i).unwrap();
                let a = intensity(std::slice::from_ref(&s0), &links, &plan, k, i).unwrap();
                let b = intensity(std::slice::from_ref(&s1), &links, &plan, k, i).unwrap();
                assert_eq!(both, a + b);
                // term by term over the modelled history
                let mut manual = 0.0;
                for j in 0..=k.min(2) {
                    let t = plan.lagged_time(i, j);
                    manual += s0.count(k - j, Species::A) as f64 * cir_unchecked(t, links[0].geometry(Species::A));
                }
                assert!((a.a() - manual).abs() <= 1e-12 * manual);
            }
        }
    }

    #[test]
    fn identical_transmitters_double_the_intensity() {
        let (links, plan) = setup();
        let enc = ValueEncoding::with_combinations(500, 2).unwrap();
        let two = plan_operation(Operation::Add, &[2, 2], &enc).unwrap();
        let one = plan_operation(Operation::Add, &[2], &enc).unwrap();
        for i in 1..=5 {
            let p2 = intensity(&two.schedules, &links, &plan, 0, i).unwrap();
            let p1 = intensity(&one.schedules, &links, &plan, 0, i).unwrap();
            assert_eq!(p2.a(), 2.0 * p1.a());
        }
    }

    #[test]
    fn intensity_rejects_bad_indices() {
        let (links, plan) = setup();
        let s = vec![EmissionSchedule::new(5)];
        assert!(intensity(&s, &links, &plan, 0, 1).is_err());
        assert!(intensity(&[], &links, &plan, 0, 6).is_err());
    }

    #[test]
    fn response_table_matches_intensity() {
        let (links, plan) = setup();
        let table = ResponseTable::new(&links, &plan);
        let enc = ValueEncoding::with_combinations(300, 3).unwrap();
        let history = [[2i64, -1], [-3, 0], [1, 3]];
        let mut schedules = vec![EmissionSchedule::new(0), EmissionSchedule::new(1)];
        for (k, values) in history.iter().enumerate() {
            let p = plan_operation(Operation::Add, values, &enc).unwrap();
            for (tx, s) in p.schedules.iter().enumerate() {
                for r in s.releases() {
                    schedules[tx].push(k, r.species, r.count).unwrap();
                }
            }
        }
        let k = 2;
        let mut fast = vec![IntensityPair::default(); 5];
        for j in 0..=2 {
            table.accumulate(&history[k - j], [300.0, 300.0], j, &mut fast);
        }
        for i in 1..=5 {
            let slow = intensity(&schedules, &links, &plan, k, i).unwrap();
            assert!((slow.a() - fast[i - 1].a()).abs() <= 1e-12 * slow.a());
            assert!((slow.b() - fast[i - 1].b()).abs() <= 1e-12 * slow.b());
        }
    }

    #[test]
    fn poisson_edge_cases_and_normalisation() {
        assert_eq!(poisson_pmf(0.0, 0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(0.0, 3).unwrap(), 0.0);
        assert!(poisson_pmf(-1.0, 0).is_err());
        assert!(poisson_pmf(1.0, -1).is_err());
        let total: f64 = (0..=200).map(|n| poisson_pmf(4.0, n).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let total: f64 = (0..=400).map(|n| poisson_pmf(150.0, n).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_log_space_agrees_with_direct() {
        for lambda in [0.3, 1.0, 7.5, 20.0] {
            let table = poisson_table(lambda, 51);
            for n in 0..=50 {
                let log = ln_poisson(lambda, n as u64).exp();
                assert!(((log - table[n]) / table[n]).abs() < 1e-12, "λ={lambda} n={n}");
                let direct = poisson_pmf(lambda, n as i64).unwrap();
                assert!(((direct - table[n]) / table[n]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn skellam_matches_convolution_oracle() {
        for (a, b) in [(3.0, 2.0), (20.0, 20.0), (100.0, 30.0), (0.5, 7.0), (300.0, 250.0)] {
            for n in -60..=60 {
                let got = skellam_pmf(&pair(a, b), n).unwrap();
                let want = skellam_oracle(a, b, n);
                assert!((got - want).abs() < 1e-10, "({a},{b}) n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn skellam_special_cases() {
        let p = pair(6.0, 6.0);
        for n in 0..30 {
            assert_eq!(skellam_pmf(&p, n).unwrap(), skellam_pmf(&p, -n).unwrap());
        }
        let p = pair(5.0, 0.0);
        for n in -5..30 {
            let want = if n < 0 { 0.0 } else { poisson_pmf(5.0, n).unwrap() };
            assert_eq!(skellam_pmf(&p, n).unwrap(), want);
        }
        assert_eq!(skellam_pmf(&pair(0.0, 0.0), 0).unwrap(), 1.0);
    }

    #[test]
    fn skellam_moments() {
        for (a, b) in [(3.0, 2.0), (20.0, 20.0), (100.0, 30.0), (500.0, 300.0)] {
            let p = pair(a, b);
            let lim = (a + b + 15.0 * (a + b).sqrt()) as i64 + 20;
            let pmf: Vec<(f64, f64)> = (-lim..=lim)
                .map(|n| (n as f64, skellam_pmf(&p, n).unwrap()))
                .collect();
            let total: f64 = pmf.iter().map(|x| x.1).sum();
            let mean: f64 = pmf.iter().map(|(n, q)| n * q).sum();
            let var: f64 = pmf.iter().map(|(n, q)| (n - (a - b)).powi(2) * q).sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!((mean - (a - b)).abs() < 1e-8, "mean {mean}");
            assert!((var - (a + b)).abs() < 1e-8, "var {var}");
        }
    }

    fn gaussian_tv(a: f64, b: f64, width: f64) -> f64 {
        let p = pair(a, b);
        let (mu, sd) = (p.mean(), p.variance().sqrt());
        let lo = (mu - width * sd).floor() as i64;
        let hi = (mu + width * sd).ceil() as i64;
        0.5 * (lo..=hi)
            .map(|n| {
                let g = gaussian_loglik(n as f64, &p).unwrap().exp();
                (g - skellam_pmf(&p, n).unwrap()).abs()
            })
            .sum::<f64>()
    }

    #[test]
    fn gaussian_loglik_basics() {
        let p = pair(30.0, 10.0);
        let at_mean = gaussian_loglik(20.0, &p).unwrap();
        assert!((at_mean + 0.5 * (2.0 * PI * 40.0).ln()).abs() < 1e-14);
        let s = pair(8.0, 8.0);
        assert_eq!(gaussian_loglik(3.0, &s).unwrap(), gaussian_loglik(-3.0, &s).unwrap());
        assert!(matches!(
            gaussian_loglik(0.0, &pair(0.0, 0.0)),
            Err(Error::DegenerateVariance { .. })
        ));
        assert!(gaussian_tv(500.0, 300.0, 6.0) < 0.01);
    }

    #[test]
    fn gaussian_error_shrinks_with_intensity() {
        let tv: Vec<f64> = [1.0, 5.0, 20.0, 100.0, 500.0]
            .iter()
            .map(|&m| gaussian_tv(m, m, 12.0))
            .collect();
        for w in tv.windows(2) {
            assert!(w[1] < w[0], "{tv:?}");
        }
    }

    #[test]
    fn sampled_counts_follow_poisson_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = pair(7.0, 0.0);
        let n = 1_000_000;
        let draws: Vec<(u64, u64)> = (0..n).map(|_| sample_counts(&p, &mut rng)).collect();
        assert!(draws.iter().all(|d| d.1 == 0));
        let mean = draws.iter().map(|d| d.0 as f64).sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d.0 as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 7.0).abs() < 0.03, "mean {mean}");
        assert!((var - 7.0).abs() < 0.15, "var {var}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn skellam_series_agrees_with_oracle(a in 0.05f64..60.0, b in 0.05f64..60.0, n in -40i64..40) {
                let got = skellam_pmf(&pair(a, b), n).unwrap();
                prop_assert!((got - skellam_oracle(a, b, n)).abs() < 1e-11);
            }

            #[test]
            fn pmf_values_are_probabilities(lambda in 0.0f64..1e4, n in 0i64..20_000) {
                let p = poisson_pmf(lambda, n).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
