//! Closed-form expressions for n-photon resonance centers, drive-induced
//! shifts, exact shift ratios, and the three-photon effective amplitude.
//!
//! For a spin driven at angular frequency ω with amplitude B1 tilted by θ
//! from the static field, the n-photon resonance center is
//!
//! ```text
//! B(1) = ω/γ −  γ B1² sin²θ / (16 ω)                  (one photon)
//! B(n) = n ω/γ − γ B1² sin²θ / (4 ω) · n/(n²−1)        (n > 1)
//! ```
//!
//! to second order in B1. The drive-induced shift ΔB(n) ≡ n ω/γ − B(n) is
//! then quadratic in B1, so ratios of shifts at matched drive are pure
//! rationals independent of B1 — the quantity tested by the toolkit.
//!
//! The three-photon transition amplitude under linear drive is
//!
//! ```text
//! u = γ³ B1³ / (32 ω²) · |sinθ − (9/8) sin³θ|
//! ```
//!
//! whose angular factor vanishes at θ = 0° and ≈70.53° and peaks at ≈32.98°
//! and 90°.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::{CoreError, DriveParams, Result};

/// Exact rational shift ratio with a decimal view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftRatio {
    pub numer: i64,
    pub denom: i64,
}

impl ShiftRatio {
    pub fn value(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }
}

impl std::fmt::Display for ShiftRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

fn check_order(n: u32) -> Result<()> {
    if n == 0 {
        return Err(CoreError::InvalidInput("photon order must be >= 1".into()));
    }
    Ok(())
}

/// Resonance center B(n) in mT.
pub fn analytic_center(n: u32, drive: &DriveParams) -> Result<f64> {
    Ok(n as f64 * drive.reference_field() - analytic_shift(n, drive)?)
}

/// Drive-induced shift ΔB(n) = n ω/γ − B(n) in mT; non-negative.
pub fn analytic_shift(n: u32, drive: &DriveParams) -> Result<f64> {
    check_order(n)?;
    drive.validate()?;
    let b_ref = drive.reference_field();
    let s2 = drive.theta_rad().sin().powi(2);
    // γ B1²/(16 ω) in field units is B1²/(16 ω/γ); same for the n > 1 branch.
    let shift = if n == 1 {
        drive.b1 * drive.b1 * s2 / (16.0 * b_ref)
    } else {
        let nf = n as f64;
        drive.b1 * drive.b1 * s2 / (4.0 * b_ref) * nf / (nf * nf - 1.0)
    };
    Ok(shift)
}

/// Exact ratio ΔB(n)/ΔB(m) of drive-induced shifts at matched B1 and θ.
///
/// In units of γB1²sin²θ/(4ω) the shift of order n is 1/4 for n = 1 and
/// n/(n²−1) otherwise; the ratio is formed in exact rational arithmetic.
pub fn shift_ratio(n: u32, m: u32) -> Result<ShiftRatio> {
    check_order(n)?;
    check_order(m)?;
    if n == m {
        return Err(CoreError::InvalidInput("shift ratio needs two distinct photon orders".into()));
    }
    let reduced = |k: u32| -> Rational64 {
        let k = k as i64;
        if k == 1 {
            Rational64::new(1, 4)
        } else {
            Rational64::new(k, k * k - 1)
        }
    };
    let r = reduced(n) / reduced(m);
    Ok(ShiftRatio { numer: *r.numer(), denom: *r.denom() })
}

/// The angular factor |sinθ − (9/8)sin³θ| of the three-photon amplitude.
pub fn angular_factor(theta_deg: f64) -> f64 {
    let s = theta_deg.to_radians().sin();
    (s - 1.125 * s * s * s).abs()
}

/// Three-photon effective amplitude in angular-frequency units and its
/// field equivalent u/γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreePhotonAmplitude {
    /// u (rad/µs).
    pub rad_per_us: f64,
    /// u/γ (mT).
    pub field_mt: f64,
}

pub fn three_photon_amplitude(drive: &DriveParams) -> Result<ThreePhotonAmplitude> {
    drive.validate()?;
    let b_ref = drive.reference_field();
    let factor = angular_factor(drive.theta);
    let field_mt = drive.b1.powi(3) * factor / (32.0 * b_ref * b_ref);
    Ok(ThreePhotonAmplitude { rad_per_us: field_mt * drive.gamma_angular(), field_mt })
}

/// Zero of the angular factor inside (0°, 90°), found by bisection on
/// sinθ − (9/8)sin³θ.
pub fn angular_factor_zero() -> f64 {
    let h = |t: f64| {
        let s = t.to_radians().sin();
        s - 1.125 * s * s * s
    };
    let (mut a, mut b) = (45.0, 89.0);
    debug_assert!(h(a) > 0.0 && h(b) < 0.0);
    while b - a > 1e-10 {
        let mid = 0.5 * (a + b);
        if h(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Interior maximum of the angular factor on (0°, 70.5°), by golden-section
/// search.
pub fn angular_factor_interior_max() -> f64 {
    golden_max(|t| angular_factor(t), 1.0, angular_factor_zero(), 1e-10)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > xtol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}
