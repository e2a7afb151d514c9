//! Experiment configuration file.
//!
//! A TOML document whose keys are exactly the field names below. Unknown keys
//! are rejected. Every field has a default, so an empty file is valid.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::analysis::VarianceForm;
use crate::detector::DEFAULT_ENUMERATION_CAP;
use crate::encoder::Operation;
use crate::particle::{DEFAULT_PRUNE_FACTOR, DEFAULT_REACTION_RADIUS};
use crate::physics::ChannelGeometry;
use crate::stats::{SamplingPlan, TransmitterLink};
use crate::{Error, Result, DIFFUSION_A, DIFFUSION_B};

/// Distance of transmitter 0 when none are configured (m).
pub const DEFAULT_BASE_DISTANCE: f64 = 10e-6;
/// Extra distance per transmitter index when none are configured (m).
pub const DEFAULT_DISTANCE_STEP: f64 = 5e-6;
pub const DEFAULT_RECEIVER_RADIUS: f64 = 5e-6;
pub const DEFAULT_SYMBOL_DURATION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    CirValidation,
    ErVsSnr,
    BoundVsSim,
    ArithmeticDemo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Transmitter distances (m), one per transmitter. Empty means
    /// `10 µm + 5 µm · m` for transmitter `m`.
    pub distances: Vec<f64>,
    pub receiver_radius: f64,
    pub diffusion_a: f64,
    pub diffusion_b: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            distances: Vec::new(),
            receiver_radius: DEFAULT_RECEIVER_RADIUS,
            diffusion_a: DIFFUSION_A,
            diffusion_b: DIFFUSION_B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParticleConfig {
    /// Step size (s). Unset means `t_peak / 200` for species A at the first
    /// transmitter distance.
    pub time_step: Option<f64>,
    pub reaction_radius: f64,
    /// Reaction search cut-off in multiples of the largest distance.
    pub prune_factor: f64,
    /// Molecules released in the CIR validation run.
    pub cir_molecules: u64,
    /// CIR validation horizon in multiples of the peak time.
    pub cir_horizon: f64,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self {
            time_step: None,
            reaction_radius: DEFAULT_REACTION_RADIUS,
            prune_factor: DEFAULT_PRUNE_FACTOR,
            cir_molecules: 100_000,
            cir_horizon: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArithmeticConfig {
    pub operations: Vec<Operation>,
    /// Operands run over `1..=max_operand` on both sides.
    pub max_operand: u64,
    /// Peak per-unit intensity, in dB.
    pub snr_db: f64,
}

impl Default for ArithmeticConfig {
    fn default() -> Self {
        Self {
            operations: Operation::ALL.to_vec(),
            max_operand: 4,
            snr_db: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when set it must match the command being run.
    pub mode: Option<Mode>,
    /// Number of transmitters `M`.
    pub transmitters: usize,
    /// Distinct magnitudes `S`; the alphabet is `±1..=±S` unless given.
    pub combinations: u64,
    /// Explicit signed alphabet, overriding `combinations`.
    pub alphabet: Option<Vec<i64>>,
    /// Samples per symbol (`I`, called `N` in the sweeps).
    pub samples_per_symbol: usize,
    /// Symbol duration `Ts` (s).
    pub symbol_duration: f64,
    pub isi_length: usize,
    pub decision_feedback: bool,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Poisson background intensity per species and sample.
    pub background: f64,
    pub particle: bool,
    pub compute_bound: bool,
    pub variance_form: VarianceForm,
    pub enumeration_cap: usize,
    /// Replace sampled counts by their expected values.
    pub noiseless: bool,
    pub geometry: GeometryConfig,
    pub particle_sim: ParticleConfig,
    pub arithmetic: ArithmeticConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: None,
            transmitters: 2,
            combinations: 2,
            alphabet: None,
            samples_per_symbol: 60,
            symbol_duration: DEFAULT_SYMBOL_DURATION,
            isi_length: 0,
            decision_feedback: true,
            snr_db: (0..=10).map(|k| 2.0 * k as f64 - 4.0).collect(),
            trials: 10_000,
            seed: 1,
            background: 1.0,
            particle: false,
            compute_bound: true,
            variance_form: VarianceForm::Exact,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            noiseless: false,
            geometry: GeometryConfig::default(),
            particle_sim: ParticleConfig::default(),
            arithmetic: ArithmeticConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.transmitters == 0 {
            return Err(Error::config("transmitters must be at least 1"));
        }
        if self.samples_per_symbol == 0 {
            return Err(Error::config("samples_per_symbol must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("snr_db must be a non-empty list of finite values"));
        }
        positive("symbol_duration", self.symbol_duration)?;
        if !(self.background.is_finite() && self.background >= 0.0) {
            return Err(Error::config("background must be >= 0"));
        }
        self.alphabet()?;
        let g = &self.geometry;
        positive("geometry.receiver_radius", g.receiver_radius)?;
        positive("geometry.diffusion_a", g.diffusion_a)?;
        positive("geometry.diffusion_b", g.diffusion_b)?;
        if !g.distances.is_empty() && g.distances.len() < self.transmitters {
            return Err(Error::config(format!(
                "{} transmitters but only {} distances",
                self.transmitters,
                g.distances.len()
            )));
        }
        for &d in &g.distances {
            positive("geometry.distances", d)?;
        }
        let p = &self.particle_sim;
        if let Some(dt) = p.time_step {
            positive("particle_sim.time_step", dt)?;
        }
        if !(p.reaction_radius.is_finite() && p.reaction_radius >= 0.0) {
            return Err(Error::config("particle_sim.reaction_radius must be >= 0"));
        }
        positive("particle_sim.prune_factor", p.prune_factor)?;
        positive("particle_sim.cir_horizon", p.cir_horizon)?;
        if p.cir_molecules == 0 {
            return Err(Error::config("particle_sim.cir_molecules must be at least 1"));
        }
        let a = &self.arithmetic;
        if a.max_operand == 0 || a.operations.is_empty() || !a.snr_db.is_finite() {
            return Err(Error::config(
                "arithmetic needs operations, max_operand >= 1 and a finite snr_db",
            ));
        }
        Ok(())
    }

    /// Fails if the file names a different mode than the command.
    pub fn check_mode(&self, mode: Mode) -> Result<()> {
        match self.mode {
            Some(m) if m != mode => Err(Error::config(format!(
                "config is for mode {m:?} but {mode:?} was requested"
            ))),
            _ => Ok(()),
        }
    }

    /// Signed alphabet used by every transmitter.
    pub fn alphabet(&self) -> Result<Vec<i64>> {
        let alphabet = match &self.alphabet {
            Some(a) => a.clone(),
            None => {
                if self.combinations == 0 {
                    return Err(Error::config("combinations must be at least 1"));
                }
                let s = self.combinations as i64;
                (1..=s).flat_map(|v| [v, -v]).collect()
            }
        };
        if alphabet.is_empty() {
            return Err(Error::config("alphabet is empty"));
        }
        let mut seen = alphabet.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != alphabet.len() {
            return Err(Error::config(format!("alphabet {alphabet:?} has duplicates")));
        }
        Ok(alphabet)
    }

    pub fn distances(&self) -> Vec<f64> {
        if self.geometry.distances.is_empty() {
            (0..self.transmitters)
                .map(|m| DEFAULT_BASE_DISTANCE + DEFAULT_DISTANCE_STEP * m as f64)
                .collect()
        } else {
            self.geometry.distances[..self.transmitters].to_vec()
        }
    }

    /// Links for every transmitter. Logs a warning for geometries outside the
    /// validity range of the impulse response.
    pub fn links(&self) -> Result<Vec<TransmitterLink>> {
        let g = &self.geometry;
        self.distances()
            .into_iter()
            .map(|d| {
                let a = ChannelGeometry::new(d, g.receiver_radius, g.diffusion_a)?;
                let b = ChannelGeometry::new(d, g.receiver_radius, g.diffusion_b)?;
                if let Some(w) = a.validity_warning() {
                    warn!("{w}");
                }
                Ok(TransmitterLink::new(a, b))
            })
            .collect::<Result<_>>()
            .map_err(|e: Error| Error::config(e.to_string()))
    }

    pub fn sampling_plan(&self) -> Result<SamplingPlan> {
        SamplingPlan::new(self.symbol_duration, self.samples_per_symbol, self.isi_length)
            .map_err(|e| Error::config(e.to_string()))
    }

    /// Which values in this config were made up rather than taken from the
    /// source model. Reported in every output.
    pub fn invented_defaults(&self) -> Vec<&'static str> {
        let mut out = vec!["snr_definition", "background"];
        if self.geometry.distances.is_empty() {
            out.push("geometry.distances");
        }
        if self.geometry.receiver_radius == DEFAULT_RECEIVER_RADIUS {
            out.push("geometry.receiver_radius");
        }
        if self.symbol_duration == DEFAULT_SYMBOL_DURATION {
            out.push("symbol_duration");
        }
        if self.particle_sim.reaction_radius == DEFAULT_REACTION_RADIUS {
            out.push("particle_sim.reaction_radius");
        }
        out
    }
}
