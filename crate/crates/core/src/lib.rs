//! Arithmetic over a diffusive molecular channel.
//!
//! Numbers are carried by two molecular species: `A` for positive values and
//! `B` for negative ones. Transmitters release molecules in proportion to the
//! magnitude of their operand, same-species releases add up at a transparent
//! spherical receiver, and opposite species annihilate one another 1:1.
//!
//! The crate is organised bottom-up:
//!
//! - [`physics`]: free-diffusion channel impulse response.
//! - [`stats`]: Poisson/Skellam count model and its Gaussian approximation.
//! - [`encoder`]: operand to emission mapping, and decoding of results.
//! - [`detector`]: multi-sample MAP detection over the computation set.
//! - [`analysis`]: decision-metric moments, Q-function, error bounds.
//! - [`particle`]: Brownian particle simulator with A + B annihilation.
//! - [`harness`]: experiment configuration, sweeps and file output.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod analysis;
pub mod detector;
pub mod encoder;
mod error;
pub mod harness;
pub mod particle;
pub mod physics;
pub mod stats;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Diffusion coefficient of species A (m²/s).
pub const DIFFUSION_A: f64 = 2.2e-9;
/// Diffusion coefficient of species B (m²/s).
pub const DIFFUSION_B: f64 = 1.5e-9;

/// Molecular species. `A` carries positive values, `B` negative ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    A,
    B,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::A, Species::B];

    /// Species that encodes a value of the given sign. Zero has no species.
    pub fn for_value(x: i64) -> Option<Species> {
        match x.signum() {
            1 => Some(Species::A),
            -1 => Some(Species::B),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Species::A => 0,
            Species::B => 1,
        }
    }
}
