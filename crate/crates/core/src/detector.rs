//! Maximum-likelihood detection over the computation set.
//!
//! With `M` transmitters each sending one of `D` signed values, the receiver
//! scores all `D^M` joint assignments by the summed Gaussian log-likelihood of
//! the `I` net counts of the current symbol and keeps the best one. Priors are
//! uniform, so this is also the MAP rule. Ties go to the lowest index.

use std::collections::HashSet;
use std::f64::consts::PI;

use crate::stats::{CountObservation, IntensityPair, ResponseTable};
use crate::{Error, Result};

/// Default limit on `D^M`.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Maps signed per-transmitter values to expected per-sample intensities.
#[derive(Debug, Clone)]
pub struct SignalModel {
    table: ResponseTable,
    scale: [f64; 2],
    background: f64,
}

impl SignalModel {
    /// `scale` is molecules per unit for species A and B; `background` is an
    /// extra Poisson intensity added to each species at every sample.
    pub fn new(table: ResponseTable, scale: [f64; 2], background: f64) -> Result<Self> {
        if scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::domain(format!("unit scales must be positive, got {scale:?}")));
        }
        if !(background.is_finite() && background >= 0.0) {
            return Err(Error::domain(format!("background must be >= 0, got {background}")));
        }
        Ok(Self {
            table,
            scale,
            background,
        })
    }

    pub fn table(&self) -> &ResponseTable {
        &self.table
    }

    pub fn scale(&self) -> [f64; 2] {
        self.scale
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn samples(&self) -> usize {
        self.table.plan().samples_per_symbol()
    }

    /// Intensities of the current symbol alone, background included.
    pub fn symbol_intensities(&self, values: &[i64]) -> Vec<IntensityPair> {
        let mut out = vec![IntensityPair::default().with_background(self.background); self.samples()];
        self.table.accumulate(values, self.scale, 0, &mut out);
        out
    }

    /// Intensities left over from earlier symbols. `history[0]` is the
    /// previous symbol; lags beyond the ISI length are ignored.
    pub fn isi_intensities(&self, history: &[Vec<i64>]) -> Vec<IntensityPair> {
        let mut out = vec![IntensityPair::default(); self.samples()];
        let depth = self.table.plan().isi_length();
        for (j, values) in history.iter().take(depth).enumerate() {
            self.table.accumulate(values, self.scale, j + 1, &mut out);
        }
        out
    }
}

/// One candidate joint transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    values: Vec<i64>,
    intensities: Vec<IntensityPair>,
}

impl Hypothesis {
    pub fn new(values: Vec<i64>, intensities: Vec<IntensityPair>) -> Self {
        Self { values, intensities }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn intensities(&self) -> &[IntensityPair] {
        &self.intensities
    }

    pub fn is_silent(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    pub fn means(&self) -> Vec<f64> {
        self.intensities.iter().map(IntensityPair::mean).collect()
    }
}

#[derive(Debug, Clone)]
struct Scorer {
    mean: Vec<f64>,
    inv_two_var: Vec<f64>,
    constant: f64,
    // samples with zero variance (only allowed for the silent hypothesis)
    point_mass: Vec<usize>,
}

impl Scorer {
    fn new(h: &Hypothesis) -> Result<Self> {
        let mut s = Scorer {
            mean: Vec::with_capacity(h.intensities.len()),
            inv_two_var: Vec::with_capacity(h.intensities.len()),
            constant: 0.0,
            point_mass: Vec::new(),
        };
        for (i, p) in h.intensities.iter().enumerate() {
            let var = p.variance();
            s.mean.push(p.mean());
            if var > 0.0 {
                s.inv_two_var.push(0.5 / var);
                s.constant -= 0.5 * (2.0 * PI * var).ln();
            } else if h.is_silent() {
                s.inv_two_var.push(0.0);
                s.point_mass.push(i);
            } else {
                return Err(Error::DegenerateVariance { sample: i + 1 });
            }
        }
        Ok(s)
    }

    fn score(&self, obs: impl Fn(usize) -> f64) -> f64 {
        if self.point_mass.iter().any(|&i| obs(i) != 0.0) {
            return f64::NEG_INFINITY;
        }
        let mut quad = 0.0;
        for (i, (m, w)) in self.mean.iter().zip(&self.inv_two_var).enumerate() {
            let d = obs(i) - m;
            quad += d * d * w;
        }
        self.constant - quad
    }
}

/// The enumerated computation set with precomputed scoring terms.
#[derive(Debug, Clone)]
pub struct HypothesisSet {
    hypotheses: Vec<Hypothesis>,
    scorers: Vec<Scorer>,
    alphabet: Vec<i64>,
    transmitters: usize,
}

impl HypothesisSet {
    /// Builds a set from explicit hypotheses, all with the same sample count.
    pub fn from_hypotheses(hypotheses: Vec<Hypothesis>, alphabet: Vec<i64>, transmitters: usize) -> Result<Self> {
        let Some(first) = hypotheses.first() else {
            return Err(Error::domain("hypothesis set is empty"));
        };
        let n = first.intensities.len();
        if hypotheses.iter().any(|h| h.intensities.len() != n) {
            return Err(Error::domain("hypotheses have different sample counts"));
        }
        let scorers = hypotheses.iter().map(Scorer::new).collect::<Result<_>>()?;
        Ok(Self {
            hypotheses,
            scorers,
            alphabet,
            transmitters,
        })
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn get(&self, index: usize) -> &Hypothesis {
        &self.hypotheses[index]
    }

    pub fn alphabet(&self) -> &[i64] {
        &self.alphabet
    }

    /// Values per transmitter (`D`).
    pub fn values_per_transmitter(&self) -> usize {
        self.alphabet.len()
    }

    pub fn transmitters(&self) -> usize {
        self.transmitters
    }

    pub fn samples(&self) -> usize {
        self.hypotheses[0].intensities.len()
    }

    /// Summed log-likelihood of every hypothesis for the given net counts.
    pub fn log_likelihoods(&self, net: &[f64]) -> Result<Vec<f64>> {
        self.check_len(net.len())?;
        Ok(self.scorers.iter().map(|s| s.score(|i| net[i])).collect())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n == self.samples() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "observation has {n} samples, hypotheses have {}",
                self.samples()
            )))
        }
    }

    /// Index of the most likely hypothesis for integer net counts.
    /// The caller guarantees `net.len() == self.samples()`.
    pub fn detect_index(&self, net: &[i64]) -> usize {
        argmax_first(self.scorers.iter().map(|s| s.score(|i| net[i] as f64)))
    }

    /// As [`detect_index`](Self::detect_index) for real-valued observations.
    pub fn detect_index_real(&self, net: &[f64]) -> usize {
        argmax_first(self.scorers.iter().map(|s| s.score(|i| net[i])))
    }

    /// Detection with known residual intensities from earlier symbols added
    /// to every hypothesis.
    pub fn detect_index_with_isi(&self, net: &[f64], isi: &[IntensityPair]) -> Result<usize> {
        self.check_len(net.len())?;
        self.check_len(isi.len())?;
        let mut scores = Vec::with_capacity(self.len());
        for h in &self.hypotheses {
            let combined: Vec<IntensityPair> =
                h.intensities.iter().zip(isi).map(|(a, b)| *a + *b).collect();
            let s = Scorer::new(&Hypothesis::new(h.values.clone(), combined))?;
            scores.push(s.score(|i| net[i]));
        }
        Ok(argmax_first(scores))
    }

    /// Zero-noise limit of the detector: the hypothesis whose mean net
    /// counts (plus the residual `isi`, if given) are closest to `net` in
    /// squared distance. Ties go to the lowest index.
    pub fn detect_nearest_mean(&self, net: &[f64], isi: Option<&[IntensityPair]>) -> Result<usize> {
        self.check_len(net.len())?;
        if let Some(isi) = isi {
            self.check_len(isi.len())?;
        }
        Ok(argmax_first(self.hypotheses.iter().map(|h| {
            -h.intensities
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let residue = isi.map_or(0.0, |r| r[i].mean());
                    (net[i] - p.mean() - residue).powi(2)
                })
                .sum::<f64>()
        })))
    }
}

/// Index of the first maximum. NaN scores never win.
pub fn argmax_first(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, s) in scores.into_iter().enumerate() {
        if s > best.1 {
            best = (k, s);
        }
    }
    best.0
}

/// Number of hypotheses `D^M`, or `None` on overflow.
pub fn set_size(d: usize, m: usize) -> Option<u128> {
    (d as u128).checked_pow(u32::try_from(m).ok()?)
}

/// All `D^M` joint assignments in lexicographic order, transmitter 0 most
/// significant, each with its expected intensities.
pub fn enumerate_hypotheses(
    transmitters: usize,
    alphabet: &[i64],
    model: &SignalModel,
    cap: usize,
) -> Result<HypothesisSet> {
    if transmitters == 0 {
        return Err(Error::domain("at least one transmitter is required"));
    }
    if alphabet.is_empty() {
        return Err(Error::domain("alphabet is empty"));
    }
    if alphabet.iter().collect::<HashSet<_>>().len() != alphabet.len() {
        return Err(Error::domain(format!("alphabet {alphabet:?} has duplicates")));
    }
    if transmitters > model.table().transmitters() {
        return Err(Error::domain(format!(
            "{transmitters} transmitters but the channel has {}",
            model.table().transmitters()
        )));
    }
    let d = alphabet.len();
    let size = set_size(d, transmitters).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::Capacity { size, cap });
    }
    let size = size as usize;
    let mut hypotheses = Vec::with_capacity(size);
    let mut values = vec![0i64; transmitters];
    for r in 0..size {
        let mut rest = r;
        for m in (0..transmitters).rev() {
            values[m] = alphabet[rest % d];
            rest /= d;
        }
        hypotheses.push(Hypothesis::new(values.clone(), model.symbol_intensities(&values)));
    }
    HypothesisSet::from_hypotheses(hypotheses, alphabet.to_vec(), transmitters)
}

/// Most likely hypothesis for an observation.
pub fn map_detect<'a>(obs: &CountObservation, set: &'a HypothesisSet) -> Result<&'a Hypothesis> {
    set.check_len(obs.len())?;
    Ok(set.get(set.detect_index(obs.net())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{SamplingPlan, TransmitterLink};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(samples: usize, scale: f64, background: f64) -> SignalModel {
        let links: Vec<_> = (0..4)
            .map(|m| TransmitterLink::at_distance(10e-6 + 5e-6 * m as f64, 5e-6).unwrap())
            .collect();
        let plan = SamplingPlan::new(0.05, samples, 0).unwrap();
        SignalModel::new(ResponseTable::new(&links, &plan), [scale, scale], background).unwrap()
    }

    #[test]
    fn set_sizes_and_order() {
        let m = model(4, 1e3, 1.0);
        assert_eq!(enumerate_hypotheses(1, &[1], &m, 10).unwrap().len(), 1);
        let s = enumerate_hypotheses(2, &[1, -1, 2, -2], &m, 100).unwrap();
        assert_eq!(s.len(), 16);
        assert_eq!(s.get(0).values(), &[1, 1]);
        assert_eq!(s.get(1).values(), &[1, -1]);
        assert_eq!(s.get(4).values(), &[-1, 1]);
        let big = enumerate_hypotheses(4, &[1, -1, 2, -2], &m, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(big.len(), 256);
        let distinct: HashSet<_> = big.hypotheses().iter().map(|h| h.values().to_vec()).collect();
        assert_eq!(distinct.len(), 256);
    }

    #[test]
    fn enumeration_errors() {
        let m = model(4, 1e3, 1.0);
        assert!(matches!(
            enumerate_hypotheses(4, &[1, -1, 2, -2], &m, 255),
            Err(Error::Capacity { size: 256, cap: 255 })
        ));
        assert!(enumerate_hypotheses(0, &[1], &m, 10).is_err());
        assert!(enumerate_hypotheses(2, &[], &m, 10).is_err());
        assert!(enumerate_hypotheses(2, &[1, 1], &m, 10).is_err());
        assert!(enumerate_hypotheses(5, &[1], &m, 10).is_err());
    }

    #[test]
    fn intensities_are_recomputable() {
        let m = model(6, 2e3, 0.5);
        let s = enumerate_hypotheses(2, &[1, -2], &m, 10).unwrap();
        for h in s.hypotheses() {
            assert_eq!(h.intensities().len(), 6);
            assert_eq!(h.intensities(), m.symbol_intensities(h.values()).as_slice());
        }
    }

    #[test]
    fn single_hypothesis_always_wins() {
        let m = model(3, 1e3, 1.0);
        let s = enumerate_hypotheses(1, &[2], &m, 10).unwrap();
        let obs = CountObservation::from_net(vec![-100, 5, 1000]);
        assert_eq!(map_detect(&obs, &s).unwrap().values(), &[2]);
        assert!(map_detect(&CountObservation::from_net(vec![1]), &s).is_err());
    }

    #[test]
    fn symmetric_tie_goes_to_lowest_index() {
        let p = IntensityPair::new(30.0, 10.0).unwrap();
        let q = IntensityPair::new(10.0, 30.0).unwrap();
        let s = HypothesisSet::from_hypotheses(
            vec![Hypothesis::new(vec![1], vec![p; 4]), Hypothesis::new(vec![-1], vec![q; 4])],
            vec![1, -1],
            1,
        )
        .unwrap();
        assert_eq!(s.detect_index(&[0, 0, 0, 0]), 0);
    }

    #[test]
    fn nearest_mean_recovers_every_hypothesis() {
        // low SNR: Gaussian ML at the exact mean can prefer a tighter hypothesis
        let m = model(8, 1.0, 1.0);
        let s = enumerate_hypotheses(2, &[1, -1, 2, -2], &m, 100).unwrap();
        let ml_misses = (0..s.len())
            .filter(|&k| s.detect_index_real(&s.get(k).means()) != k)
            .count();
        assert!(ml_misses > 0);
        for k in 0..s.len() {
            assert_eq!(s.detect_nearest_mean(&s.get(k).means(), None).unwrap(), k);
            let isi = vec![IntensityPair::new(3.0, 1.0).unwrap(); 8];
            let shifted: Vec<f64> = s.get(k).means().iter().map(|x| x + 2.0).collect();
            assert_eq!(s.detect_nearest_mean(&shifted, Some(&isi)).unwrap(), k);
        }
        assert!(s.detect_nearest_mean(&[0.0], None).is_err());
    }

    #[test]
    fn degenerate_hypotheses() {
        let zero = IntensityPair::default();
        let p = IntensityPair::new(5.0, 0.0).unwrap();
        assert!(matches!(
            HypothesisSet::from_hypotheses(vec![Hypothesis::new(vec![1], vec![zero, p])], vec![1], 1),
            Err(Error::DegenerateVariance { sample: 1 })
        ));
        let s = HypothesisSet::from_hypotheses(
            vec![
                Hypothesis::new(vec![0], vec![zero, zero]),
                Hypothesis::new(vec![1], vec![p, p]),
            ],
            vec![0, 1],
            1,
        )
        .unwrap();
        assert_eq!(s.detect_index(&[0, 0]), 0);
        assert_eq!(s.detect_index(&[0, 1]), 1);
        assert_eq!(s.detect_index(&[-3, 9]), 1);
    }

    #[test]
    fn constant_offset_keeps_decision() {
        let m = model(8, 500.0, 1.0);
        let s = enumerate_hypotheses(2, &[1, -1, 2, -2], &m, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let net: Vec<i64> = (0..8).map(|_| rng.random_range(-40..40)).collect();
            let real: Vec<f64> = net.iter().map(|&x| x as f64).collect();
            let ll = s.log_likelihoods(&real).unwrap();
            let idx = s.detect_index(&net);
            assert_eq!(idx, argmax_first(ll.iter().copied()));
            for c in [-1e3, 7.5, 1e6] {
                assert_eq!(idx, argmax_first(ll.iter().map(|x| x + c)));
            }
            assert_eq!(idx, s.detect_index(&net));
        }
    }

    #[test]
    fn noiseless_means_recover_each_hypothesis() {
        for g in [1e3, 1e5, 1e7] {
            let m = model(8, g, 1.0);
            let s = enumerate_hypotheses(2, &[1, -1, 2, -2], &m, 100).unwrap();
            for (k, h) in s.hypotheses().iter().enumerate() {
                assert_eq!(s.detect_index_real(&h.means()), k);
            }
        }
    }

    #[test]
    fn isi_offset_shifts_the_decision() {
        let m = model(4, 1e4, 1.0);
        let s = enumerate_hypotheses(1, &[1, -1], &m, 10).unwrap();
        let isi = vec![IntensityPair::default(); 4];
        let net: Vec<f64> = s.get(1).means().iter().map(|x| x.round()).collect();
        assert_eq!(s.detect_index_with_isi(&net, &isi).unwrap(), 1);
        // a large standing species-A residue makes the same counts look like -1
        let shift = s.get(0).means()[0] - s.get(1).means()[0];
        let isi = vec![IntensityPair::new(shift, 0.0).unwrap(); 4];
        let shifted: Vec<f64> = net.iter().map(|x| x + shift).collect();
        assert_eq!(s.detect_index_with_isi(&shifted, &isi).unwrap(), 1);
    }
}
