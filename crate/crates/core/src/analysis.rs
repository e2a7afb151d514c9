//! Error analysis of the detector.
//!
//! For a true hypothesis `r` and an alternative `e`, the decision metric is the
//! log-likelihood difference
//!
//! ```text
//! Z = Σ_i [ (N_i - μ_e)² / 2σ_e² - (N_i - μ_r)² / 2σ_r² + ½ ln(σ_e² / σ_r²) ]
//! ```
//!
//! with `N_i ~ Normal(μ_r, σ_r²)`. An error towards `e` happens when `Z <= 0`,
//! approximated by `Q(E[Z] / √Var(Z))`. The pairwise terms are combined into a
//! union bound over the computation set.
//!
//! Writing `N_i = μ_r + σ_r X` with standard normal `X`, each term is
//! `(a - ½) X² + (σ_r Δ / σ_e²) X + const` where `a = σ_r² / 2σ_e²` and
//! `Δ = μ_r - μ_e`, so its variance is `2(a - ½)² + σ_r² Δ² / σ_e⁴`. That is
//! what [`z_moments`] returns. [`printed_variance`] keeps the looser form
//! `(2σ_r⁴ + 4σ_r² Δ²) / 4σ_e⁴ + ½`, which treats the two quadratic terms as
//! independent and overstates the variance by `σ_r² / σ_e²` per sample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::detector::{Hypothesis, HypothesisSet};
use crate::stats::IntensityPair;
use crate::{Error, Result};

/// Mean and variance of the decision metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZMoments {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseStats {
    pub expected_z: f64,
    pub variance_z: f64,
    pub pairwise_error_probability: f64,
}

/// Which variance expression to use for `Var(Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceForm {
    #[default]
    Exact,
    Printed,
}

fn pairs<'a>(
    r: &'a Hypothesis,
    e: &'a Hypothesis,
) -> Result<impl Iterator<Item = (usize, &'a IntensityPair, &'a IntensityPair)>> {
    if r.intensities().len() != e.intensities().len() {
        return Err(Error::domain("hypotheses have different sample counts"));
    }
    for (i, (p, q)) in r.intensities().iter().zip(e.intensities()).enumerate() {
        if p.variance() <= 0.0 || q.variance() <= 0.0 {
            return Err(Error::domain(format!("zero variance at sample {}", i + 1)));
        }
    }
    Ok(r
        .intensities()
        .iter()
        .zip(e.intensities())
        .enumerate()
        .map(|(i, (p, q))| (i, p, q)))
}

fn mean_term(p: &IntensityPair, q: &IntensityPair) -> f64 {
    let (vr, ve) = (p.variance(), q.variance());
    let delta = p.mean() - q.mean();
    (vr + delta * delta) / (2.0 * ve) - 0.5 + 0.5 * (ve / vr).ln()
}

fn exact_var_term(p: &IntensityPair, q: &IntensityPair) -> f64 {
    let (vr, ve) = (p.variance(), q.variance());
    let delta = p.mean() - q.mean();
    let a = vr / (2.0 * ve);
    2.0 * (a - 0.5).powi(2) + vr * delta * delta / (ve * ve)
}

fn printed_var_term(p: &IntensityPair, q: &IntensityPair) -> f64 {
    let (vr, ve) = (p.variance(), q.variance());
    let delta = p.mean() - q.mean();
    (2.0 * vr * vr + 4.0 * vr * delta * delta) / (4.0 * ve * ve) + 0.5
}

/// Exact mean and variance of `Z` when `r` is true.
pub fn z_moments(true_hyp: &Hypothesis, alt_hyp: &Hypothesis) -> Result<ZMoments> {
    z_moments_with(true_hyp, alt_hyp, VarianceForm::Exact)
}

pub fn z_moments_with(true_hyp: &Hypothesis, alt_hyp: &Hypothesis, form: VarianceForm) -> Result<ZMoments> {
    let mut m = ZMoments {
        mean: 0.0,
        variance: 0.0,
    };
    for (_, p, q) in pairs(true_hyp, alt_hyp)? {
        m.mean += mean_term(p, q);
        m.variance += match form {
            VarianceForm::Exact => exact_var_term(p, q),
            VarianceForm::Printed => printed_var_term(p, q),
        };
    }
    Ok(m)
}

/// `Σ_i [(2σ_r⁴ + 4σ_r²Δ²) / 4σ_e⁴ + ½]`.
pub fn printed_variance(true_hyp: &Hypothesis, alt_hyp: &Hypothesis) -> Result<f64> {
    z_moments_with(true_hyp, alt_hyp, VarianceForm::Printed).map(|m| m.variance)
}

/// Upper tail of the standard normal distribution.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > 8.0 {
        ln_q_tail(x).exp()
    } else if x < -8.0 {
        1.0 - ln_q_tail(-x).exp()
    } else {
        0.5 * erfc(x / std::f64::consts::SQRT_2)
    }
}

/// `ln Q(x)`, finite for arbitrarily large `x`.
pub fn ln_q_function(x: f64) -> f64 {
    if x > 8.0 {
        ln_q_tail(x)
    } else {
        q_function(x).ln()
    }
}

// Asymptotic series ln Q(x) = -x²/2 - ln(x√2π) + ln Σ_k (-1)^k (2k-1)!! / x^{2k}
fn ln_q_tail(x: f64) -> f64 {
    let inv = 1.0 / (x * x);
    let (mut term, mut sum) = (1.0, 1.0);
    // the series diverges, so stop at its smallest term
    for k in 1..200 {
        let next = term * -((2 * k - 1) as f64) * inv;
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            break;
        }
        term = next;
        sum += term;
    }
    -0.5 * x * x - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + sum.ln()
}

fn error_from(m: ZMoments) -> f64 {
    if m.variance > 0.0 {
        q_function(m.mean / m.variance.sqrt())
    } else if m.mean > 0.0 {
        0.0
    } else {
        0.5
    }
}

/// `Q(E[Z] / √Var(Z))`. Indistinguishable hypotheses give ½.
pub fn pairwise_error(true_hyp: &Hypothesis, alt_hyp: &Hypothesis) -> Result<f64> {
    pairwise_stats(true_hyp, alt_hyp).map(|s| s.pairwise_error_probability)
}

pub fn pairwise_stats(true_hyp: &Hypothesis, alt_hyp: &Hypothesis) -> Result<PairwiseStats> {
    pairwise_stats_with(true_hyp, alt_hyp, VarianceForm::Exact)
}

pub fn pairwise_stats_with(true_hyp: &Hypothesis, alt_hyp: &Hypothesis, form: VarianceForm) -> Result<PairwiseStats> {
    let m = z_moments_with(true_hyp, alt_hyp, form)?;
    Ok(PairwiseStats {
        expected_z: m.mean,
        variance_z: m.variance,
        pairwise_error_probability: error_from(m),
    })
}

/// Union bound on the computation error rate with uniform priors:
/// `(1/|S|) Σ_r Σ_{e≠r} P(r → e)`, clamped to `[0, 1]`.
pub fn ber_upper_bound(set: &HypothesisSet) -> Result<f64> {
    ber_upper_bound_with(set, VarianceForm::Exact)
}

pub fn ber_upper_bound_with(set: &HypothesisSet, form: VarianceForm) -> Result<f64> {
    let hs = set.hypotheses();
    if hs.len() < 2 {
        return Err(Error::domain("the bound needs at least two hypotheses"));
    }
    let rows: Vec<f64> = (0..hs.len())
        .into_par_iter()
        .map(|r| {
            let mut row = 0.0;
            for (e, alt) in hs.iter().enumerate() {
                if e != r {
                    row += pairwise_stats_with(&hs[r], alt, form)?.pairwise_error_probability;
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    // summed in index order so the result does not depend on scheduling
    let total: f64 = rows.iter().sum();
    Ok((total / hs.len() as f64).clamp(0.0, 1.0))
}
