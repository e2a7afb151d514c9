//! Free diffusion in an unbounded 3-D medium observed by a transparent sphere.
//!
//! A point release of `Q` molecules at distance `d` from the receiver centre
//! produces, under the uniform-concentration approximation, an expected count
//! `Q · h(t)` inside a receiver of radius `r`, with
//!
//! ```text
//! h(t) = V / (4πDt)^{3/2} · exp(-d² / 4Dt),   V = 4/3 π r³
//! ```
//!
//! The approximation treats the concentration as constant over the receiver
//! volume, so it is only accurate for `d ≫ r`. [`exact_occupancy`] gives the
//! exact probability for the same geometry and is used to check the particle
//! simulator independently of that approximation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use libm::erf;

use crate::{Error, Result};

/// Transmitter to receiver geometry for one species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    distance: f64,
    receiver_radius: f64,
    diffusion: f64,
}

impl ChannelGeometry {
    /// All three quantities must be strictly positive and finite (SI units).
    pub fn new(distance: f64, receiver_radius: f64, diffusion: f64) -> Result<Self> {
        for (name, v) in [
            ("distance", distance),
            ("receiver radius", receiver_radius),
            ("diffusion coefficient", diffusion),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            distance,
            receiver_radius,
            diffusion,
        })
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn receiver_radius(&self) -> f64 {
        self.receiver_radius
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// Receiver volume `4/3 π r³`.
    pub fn receiver_volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.receiver_radius.powi(3)
    }

    /// Same geometry with another diffusion coefficient.
    pub fn with_diffusion(&self, diffusion: f64) -> Result<Self> {
        Self::new(self.distance, self.receiver_radius, diffusion)
    }

    /// Message describing why the point-receiver approximation is poor for
    /// this geometry, if it is (`d < 3r`).
    pub fn validity_warning(&self) -> Option<String> {
        (self.distance < 3.0 * self.receiver_radius).then(|| {
            format!(
                "distance {:.3e} m is less than 3x the receiver radius {:.3e} m; \
                 the uniform-concentration impulse response is inaccurate here",
                self.distance, self.receiver_radius
            )
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be positive, got {t}")))
    }
}

/// Probability that a single molecule released at `t = 0` is inside the
/// receiver at time `t`.
pub fn cir(t: f64, geom: &ChannelGeometry) -> Result<f64> {
    check_time(t)?;
    Ok(cir_unchecked(t, geom))
}

/// [`cir`] without the time check. Returns 0 for `t <= 0`.
pub(crate) fn cir_unchecked(t: f64, geom: &ChannelGeometry) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let four_dt = 4.0 * geom.diffusion * t;
    geom.receiver_volume() / (PI * four_dt).powf(1.5) * (-geom.distance.powi(2) / four_dt).exp()
}

/// Expected number of molecules inside the receiver after releasing `q`.
pub fn concentration(t: f64, q: f64, geom: &ChannelGeometry) -> Result<f64> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::domain(format!("molecule count must be >= 0, got {q}")));
    }
    Ok(q * cir(t, geom)?)
}

/// Time at which [`cir`] is maximal: `d² / 6D`.
pub fn peak_time(geom: &ChannelGeometry) -> f64 {
    geom.distance.powi(2) / (6.0 * geom.diffusion)
}

/// Exact probability that a freely diffusing molecule released at distance
/// `d` from the centre of a ball of radius `r` lies inside the ball at `t`.
pub fn exact_occupancy(t: f64, geom: &ChannelGeometry) -> Result<f64> {
    check_time(t)?;
    let (d, r) = (geom.distance, geom.receiver_radius);
    let s = (4.0 * geom.diffusion * t).sqrt();
    let dt = geom.diffusion * t;
    let p = 0.5 * (erf((r - d) / s) + erf((r + d) / s))
        + (dt / PI).sqrt() / d
            * ((-(r + d).powi(2) / (4.0 * dt)).exp() - (-(d - r).powi(2) / (4.0 * dt)).exp());
    Ok(p.clamp(0.0, 1.0))
}
