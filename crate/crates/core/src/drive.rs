//! Driving-field configuration.

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// Default gyromagnetic ratio in MHz/mT (linear-frequency convention).
///
/// Chosen so that the unperturbed three-photon resonance of a 100 MHz drive
/// sits at 10.705 mT, i.e. `gamma = 3 * 100 MHz / 10.705 mT`. This is the
/// g-factor of the charge carriers targeted by the toolkit; it differs from
/// the free-electron value (28.0250) in the fourth decimal. Override it in
/// [`DriveParams`] for other materials.
pub fn default_gamma() -> f64 {
    300.0 / 10.705
}

/// Continuous-wave drive configuration: a static field B0 (supplied per call)
/// plus a linearly polarized drive `B1 cos(ωt)` tilted by `theta` from B0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Drive-field amplitude B1 (mT).
    pub b1: f64,
    /// Drive frequency (MHz, linear frequency).
    pub freq: f64,
    /// Angle between B1 and B0 (degrees); 90° is the standard transverse
    /// geometry.
    pub theta: f64,
    /// Gyromagnetic ratio (MHz/mT, linear convention).
    pub gamma: f64,
}

impl DriveParams {
    pub fn new(b1: f64, freq: f64, theta: f64, gamma: f64) -> Result<Self> {
        let p = Self { b1, freq, theta, gamma };
        p.validate()?;
        Ok(p)
    }

    /// 100 MHz drive with the default gyromagnetic ratio.
    pub fn with_defaults(b1: f64, theta: f64) -> Result<Self> {
        Self::new(b1, 100.0, theta, default_gamma())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b1 >= 0.0 && self.b1.is_finite()) {
            return Err(CoreError::InvalidInput(format!("b1 must be >= 0, got {}", self.b1)));
        }
        if !(self.freq > 0.0 && self.freq.is_finite()) {
            return Err(CoreError::InvalidInput(format!("freq must be > 0, got {}", self.freq)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(CoreError::InvalidInput(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(0.0..=90.0).contains(&self.theta) {
            return Err(CoreError::InvalidInput(format!(
                "theta must lie in [0, 90] degrees, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Drive angular frequency ω = 2π·freq (rad/µs).
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.freq
    }

    /// Angular-convention gyromagnetic ratio 2π·gamma (rad/(µs·mT)).
    pub fn gamma_angular(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.gamma
    }

    /// One-photon reference field ω/γ = freq/gamma (mT).
    pub fn reference_field(&self) -> f64 {
        self.freq / self.gamma
    }

    pub fn theta_rad(&self) -> f64 {
        self.theta.to_radians()
    }

    pub fn with_b1(mut self, b1: f64) -> Result<Self> {
        self.b1 = b1;
        self.validate()?;
        Ok(self)
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        self.theta = theta;
        self.validate()?;
        Ok(self)
    }
}
