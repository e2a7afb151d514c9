//! Experiment orchestration: configuration, sweeps, and file output.
//!
//! Every Monte Carlo trial draws from its own ChaCha8 stream seeded by
//! [`trial_seed`], and tallies are integer sums, so results do not depend on
//! how rayon schedules the trials.

pub mod config;
mod experiment;
pub mod output;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, Mode};
pub use experiment::{
    bound_curve, run_arithmetic_demo, run_cir_validation, run_er_experiment, ArithmeticRow, CirRow,
    CirValidation,
};

use crate::physics::{cir, ChannelGeometry};
use crate::stats::SamplingPlan;
use crate::{Error, Result};

/// Human-readable SNR definition written into every output.
pub const SNR_DEFINITION: &str =
    "SNR = 10 log10(peak per-sample intensity of a unit value from transmitter 0, species A)";

/// Label of the analytical curve.
pub const BOUND_LABEL: &str = "union bound over pairwise Q(E[Z]/sqrt(Var Z))";

/// One point of an error-rate sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateRecord {
    pub snr_db: f64,
    pub error_rate: f64,
    pub n_err: u64,
    pub n_total: u64,
    pub bound: Option<f64>,
}

impl ErrorRateRecord {
    pub fn new(snr_db: f64, n_err: u64, n_total: u64, bound: Option<f64>) -> Self {
        Self {
            snr_db,
            error_rate: n_err as f64 / n_total as f64,
            n_err,
            n_total,
            bound,
        }
    }

    /// Binomial standard error of the error rate.
    pub fn standard_error(&self) -> f64 {
        (self.error_rate * (1.0 - self.error_rate) / self.n_total as f64).sqrt()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at sweep point `point`.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point) ^ trial.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Molecules per unit value that make the peak sample intensity of a unit
/// release equal `10^(snr_db / 10)`.
pub fn snr_to_scale(snr_db: f64, geom: &ChannelGeometry, plan: &SamplingPlan) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::domain(format!("SNR must be finite, got {snr_db}")));
    }
    let peak = plan
        .sample_times()
        .iter()
        .map(|&t| cir(t, geom))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::domain("impulse response is zero at every sample"));
    }
    Ok(10f64.powf(snr_db / 10.0) / peak)
}

/// Runs the experiment for `mode` and writes its files into `out`. Returns
/// the paths written.
pub fn execute(mode: Mode, cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.check_mode(mode)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = Vec::new();
    match mode {
        Mode::CirValidation => {
            let v = run_cir_validation(cfg)?;
            written.push(output::write(out.join("cir.csv"), &output::cir_csv(&v.rows))?);
            written.push(output::write(out.join("cir_trace.csv"), &output::trace_csv(&v.trace))?);
            written.push(output::write(
                out.join("cir_pair_trace.csv"),
                &output::trace_csv(&v.pair_trace),
            )?);
            written.push(output::write(out.join("cir.svg"), &output::cir_svg(&v.rows))?);
            written.push(output::write(out.join("run.json"), &output::run_json(mode, cfg, Some(&v.summary())))?);
        }
        Mode::ErVsSnr | Mode::BoundVsSim => {
            let mut cfg = cfg.clone();
            if mode == Mode::BoundVsSim {
                cfg.compute_bound = true;
            }
            let records = run_er_experiment(&cfg)?;
            written.push(output::write(out.join("er.csv"), &output::er_csv(&records))?);
            written.push(output::write(out.join("er_plot.csv"), &output::er_plot_csv(&records))?);
            written.push(output::write(out.join("er.svg"), &output::er_svg(&records))?);
            if mode == Mode::BoundVsSim {
                let exact = bound_curve(&cfg, crate::analysis::VarianceForm::Exact)?;
                let printed = bound_curve(&cfg, crate::analysis::VarianceForm::Printed)?;
                written.push(output::write(
                    out.join("bound_forms.csv"),
                    &output::bound_forms_csv(&cfg.snr_db, &exact, &printed),
                )?);
            }
            written.push(output::write(out.join("run.json"), &output::run_json(mode, &cfg, None))?);
        }
        Mode::ArithmeticDemo => {
            let rows = run_arithmetic_demo(cfg)?;
            written.push(output::write(out.join("arith.csv"), &output::arith_csv(&rows))?);
            written.push(output::write(out.join("run.json"), &output::run_json(mode, cfg, None))?);
        }
    }
    Ok(written)
}
