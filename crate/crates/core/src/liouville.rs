//! Steady-state density matrix of the driven, relaxing two-level spin.
//!
//! The state evolves under dρ/dt = −i[H(t), ρ] + R(ρ) with the Hamiltonian
//! of [`crate::floquet`] and a minimal relaxation map R: T1 recovery of the
//! longitudinal polarization toward the equilibrium value p0 (along B0) and
//! T2 decay of the coherences. In the Bloch parameterization
//! ρ = (I + m·σ)/2 this is
//!
//! ```text
//! dm/dt = γ B(t) × m  −  (mx/T2, my/T2, (mz − p0)/T1)
//! ```
//!
//! One drive period is integrated by Strang splitting: an exact relaxation
//! half-step, an exact rotation about the instantaneous field frozen at the
//! step midpoint, and another relaxation half-step. Every substep is a
//! contraction of the Bloch ball, so trace, Hermiticity and positivity are
//! preserved exactly at any step size; step count only controls accuracy.
//!
//! Because the equation of motion is affine and T-periodic, the whole period
//! is one affine map m ↦ A·m + b. The periodic steady state is reached by
//! iterating that map period-by-period until the state stops moving, and the
//! reported signal is the period-averaged polarization deficit
//! `S = p0 − ⟨mz⟩`, a non-negative proxy for the spin-dependent current
//! change read out in experiments.

use nalgebra::{Matrix2, Matrix3, Rotation3, Unit, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CoreError, DriveParams, Result};

/// Minimum integrator resolution (steps per drive period).
pub const MIN_STEPS_PER_PERIOD: usize = 100;

/// Two-level relaxation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationParams {
    /// Longitudinal relaxation time T1 (µs).
    pub t1: f64,
    /// Transverse coherence time T2 (µs).
    pub t2: f64,
    /// Equilibrium polarization along B0, in [−1, 1].
    pub p0: f64,
}

impl RelaxationParams {
    pub fn new(t1: f64, t2: f64, p0: f64) -> Result<Self> {
        let r = Self { t1, t2, p0 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) || self.t1.is_nan() {
            return Err(CoreError::InvalidInput(format!("t1 must be > 0, got {}", self.t1)));
        }
        if !(self.t2 > 0.0) || self.t2.is_nan() {
            return Err(CoreError::InvalidInput(format!("t2 must be > 0, got {}", self.t2)));
        }
        // complete positivity of the relaxation semigroup
        if self.t2 > 2.0 * self.t1 {
            return Err(CoreError::InvalidInput(format!(
                "t2 = {} exceeds 2*t1 = {}",
                self.t2,
                2.0 * self.t1
            )));
        }
        if !(-1.0..=1.0).contains(&self.p0) {
            return Err(CoreError::InvalidInput(format!("p0 must lie in [-1, 1], got {}", self.p0)));
        }
        Ok(())
    }
}

impl Default for RelaxationParams {
    /// T1 = 10 µs, T2 = 1 µs, p0 = 1e−3: sub-mT linewidths at 100 MHz drive.
    fn default() -> Self {
        Self { t1: 10.0, t2: 1.0, p0: 1e-3 }
    }
}

/// 2×2 density matrix, Hermitian with unit trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityState {
    pub rho: Matrix2<Complex64>,
}

impl DensityState {
    /// ρ = (I + m·σ)/2 for a Bloch vector m.
    pub fn from_bloch(m: Vector3<f64>) -> Self {
        let half = 0.5;
        let rho = Matrix2::new(
            Complex64::new(half * (1.0 + m.z), 0.0),
            Complex64::new(half * m.x, -half * m.y),
            Complex64::new(half * m.x, half * m.y),
            Complex64::new(half * (1.0 - m.z), 0.0),
        );
        Self { rho }
    }

    /// Thermal state with polarization p0 along z.
    pub fn thermal(p0: f64) -> Self {
        Self::from_bloch(Vector3::new(0.0, 0.0, p0))
    }

    /// Bloch vector (tr ρσx, tr ρσy, tr ρσz).
    pub fn bloch(&self) -> Vector3<f64> {
        Vector3::new(
            2.0 * self.rho[(0, 1)].re,
            -2.0 * self.rho[(0, 1)].im,
            self.rho[(0, 0)].re - self.rho[(1, 1)].re,
        )
    }

    pub fn trace(&self) -> f64 {
        self.rho[(0, 0)].re + self.rho[(1, 1)].re
    }

    /// tr ρ² = (1 + |m|²)/2 for trace-1 states.
    pub fn purity(&self) -> f64 {
        let m = self.bloch();
        0.5 * (1.0 + m.norm_squared())
    }

    /// Eigenvalues (λ−, λ+) of the 2×2 Hermitian matrix.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.rho[(0, 0)].re;
        let d = self.rho[(1, 1)].re;
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + self.rho[(0, 1)].norm_sqr()).sqrt();
        (mean - r, mean + r)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut d = (self.rho[(0, 1)] - self.rho[(1, 0)].conj()).norm();
        d += self.rho[(0, 0)].im.abs() + self.rho[(1, 1)].im.abs();
        d
    }
}

/// Affine map m ↦ a·m + b on Bloch vectors.
#[derive(Debug, Clone, Copy)]
struct AffineMap {
    a: Matrix3<f64>,
    b: Vector3<f64>,
}

impl AffineMap {
    fn identity() -> Self {
        Self { a: Matrix3::identity(), b: Vector3::zeros() }
    }

    fn apply(&self, m: &Vector3<f64>) -> Vector3<f64> {
        self.a * m + self.b
    }

    /// `next` applied after `self`.
    fn then(&self, next: &AffineMap) -> Self {
        Self { a: next.a * self.a, b: next.a * self.b + next.b }
    }
}

/// Exact relaxation over a time span dt.
fn relax_map(relax: &RelaxationParams, dt: f64) -> AffineMap {
    let e2 = (-dt / relax.t2).exp();
    let e1 = (-dt / relax.t1).exp();
    AffineMap {
        a: Matrix3::from_diagonal(&Vector3::new(e2, e2, e1)),
        b: Vector3::new(0.0, 0.0, relax.p0 * (1.0 - e1)),
    }
}

/// Exact rotation about the instantaneous field frozen at t_mid, over a span dt.
fn rotation_at(drive: &DriveParams, b0: f64, t_mid: f64, dt: f64) -> Matrix3<f64> {
    let g = drive.gamma_angular();
    let c = (drive.omega() * t_mid).cos();
    let axis = Vector3::new(
        g * drive.b1 * drive.theta_rad().sin() * c,
        0.0,
        g * (b0 + drive.b1 * drive.theta_rad().cos() * c),
    );
    let angle = axis.norm() * dt;
    if angle == 0.0 {
        return Matrix3::identity();
    }
    Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).into_inner()
}

/// Per-step Strang maps covering one drive period.
fn step_maps(drive: &DriveParams, b0: f64, relax: &RelaxationParams, steps: usize) -> Vec<AffineMap> {
    let period = 2.0 * std::f64::consts::PI / drive.omega();
    let h = period / steps as f64;
    let half = relax_map(relax, 0.5 * h);
    (0..steps)
        .map(|j| {
            let t_mid = (j as f64 + 0.5) * h;
            let rot = AffineMap { a: rotation_at(drive, b0, t_mid, h), b: Vector3::zeros() };
            half.then(&rot).then(&half)
        })
        .collect()
}

fn check_inputs(drive: &DriveParams, b0: f64, relax: &RelaxationParams, steps: usize) -> Result<()> {
    drive.validate()?;
    relax.validate()?;
    if !b0.is_finite() {
        return Err(CoreError::InvalidInput("b0 must be finite".into()));
    }
    if steps < MIN_STEPS_PER_PERIOD {
        return Err(CoreError::InvalidInput(format!(
            "steps per period must be >= {MIN_STEPS_PER_PERIOD}, got {steps}"
        )));
    }
    Ok(())
}

/// Advance ρ by exactly one drive period 2π/ω.
pub fn propagate_period(
    state: &DensityState,
    drive: &DriveParams,
    b0: f64,
    relax: &RelaxationParams,
    steps: usize,
) -> Result<DensityState> {
    check_inputs(drive, b0, relax, steps)?;
    let mut m = state.bloch();
    for map in step_maps(drive, b0, relax, steps) {
        m = map.apply(&m);
    }
    Ok(DensityState::from_bloch(m))
}

/// Controls for the periodic-steady-state solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateOptions {
    pub steps_per_period: usize,
    /// Periodicity is declared when the state at the start of successive
    /// periods differs by less than this in Frobenius norm.
    pub periodicity_tol: f64,
    pub max_periods: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { steps_per_period: 1000, periodicity_tol: 1e-8, max_periods: 400_000 }
    }
}

/// Converged periodic steady state and its signal.
#[derive(Debug, Clone, Copy)]
pub struct SteadyState {
    /// Period-averaged polarization deficit S = p0 − ⟨mz⟩.
    pub signal: f64,
    /// Drive periods iterated before periodicity was reached.
    pub periods: usize,
    /// State at the period boundary.
    pub state: DensityState,
}

/// Solve for the periodic steady state at static field `b0` and return the
/// period- and time-averaged polarization deficit.
pub fn steady_state_signal(drive: &DriveParams, b0: f64, relax: &RelaxationParams) -> Result<f64> {
    steady_state(drive, b0, relax, &SteadyStateOptions::default()).map(|s| s.signal)
}

pub fn steady_state(
    drive: &DriveParams,
    b0: f64,
    relax: &RelaxationParams,
    opts: &SteadyStateOptions,
) -> Result<SteadyState> {
    check_inputs(drive, b0, relax, opts.steps_per_period)?;
    let maps = step_maps(drive, b0, relax, opts.steps_per_period);
    let period_map = maps.iter().fold(AffineMap::identity(), |acc, m| acc.then(m));

    let mut m = Vector3::new(0.0, 0.0, relax.p0);
    let mut periods = 0usize;
    loop {
        let next = period_map.apply(&m);
        periods += 1;
        // ‖Δρ‖_F = |Δm|/√2 for trace-preserving differences
        let residual = (next - m).norm() / std::f64::consts::SQRT_2;
        m = next;
        if residual < opts.periodicity_tol {
            break;
        }
        if periods >= opts.max_periods {
            return Err(CoreError::SteadyStateNotPeriodic { max_periods: opts.max_periods, residual });
        }
    }

    // The stopping criterion leaves a geometric tail of order
    // residual/(1−λ); the affine fixed point of the period map removes it.
    // Kept only when it is a genuine fixed point inside the Bloch ball, so
    // the near-unitary limit (singular I−A) falls back to the iterate.
    let lhs = Matrix3::identity() - period_map.a;
    if let Some(exact) = lhs.lu().solve(&period_map.b) {
        let defect = (period_map.apply(&exact) - exact).norm();
        if defect < opts.periodicity_tol && exact.norm() <= 1.0 + 1e-9 {
            m = exact;
        }
    }

    // time average of mz over one period (trapezoid over the step boundaries)
    let mut acc = 0.5 * m.z;
    let mut cur = m;
    for (j, map) in maps.iter().enumerate() {
        cur = map.apply(&cur);
        let w = if j + 1 == maps.len() { 0.5 } else { 1.0 };
        acc += w * cur.z;
    }
    let mz_mean = acc / maps.len() as f64;

    Ok(SteadyState {
        signal: relax.p0 - mz_mean,
        periods,
        state: DensityState::from_bloch(m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn drive(b1: f64, theta: f64) -> DriveParams {
        DriveParams::with_defaults(b1, theta).unwrap()
    }

    #[test]
    fn relaxation_params_validation() {
        assert!(RelaxationParams::new(10.0, 1.0, 1e-3).is_ok());
        assert!(RelaxationParams::new(1.0, 2.0, 0.0).is_ok()); // t2 = 2 t1 boundary
        assert!(RelaxationParams::new(1.0, 2.1, 0.0).is_err());
        assert!(RelaxationParams::new(0.0, 1.0, 0.0).is_err());
        assert!(RelaxationParams::new(1.0, 1.0, 1.5).is_err());
        assert!(RelaxationParams::new(f64::INFINITY, f64::INFINITY, 0.5).is_ok());
    }

    #[test]
    fn bloch_round_trip_and_eigenvalues() {
        let m = Vector3::new(0.3, -0.4, 0.5);
        let s = DensityState::from_bloch(m);
        assert_abs_diff_eq!((s.bloch() - m).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.trace(), 1.0, epsilon = 1e-15);
        assert_eq!(s.hermiticity_defect(), 0.0);
        let (lo, hi) = s.eigenvalues();
        assert_abs_diff_eq!(lo, 0.5 * (1.0 - m.norm()), epsilon = 1e-14);
        assert_abs_diff_eq!(hi, 0.5 * (1.0 + m.norm()), epsilon = 1e-14);
    }

    #[test]
    fn rejects_coarse_steps() {
        let s = DensityState::thermal(1e-3);
        let err = propagate_period(&s, &drive(1.0, 90.0), 3.0, &RelaxationParams::default(), 99);
        assert!(err.is_err());
    }

    #[test]
    fn trace_preserved_through_propagation() {
        let relax = RelaxationParams::default();
        let mut s = DensityState::from_bloch(Vector3::new(0.2, 0.1, -0.3));
        for _ in 0..5 {
            s = propagate_period(&s, &drive(3.0, 90.0), 10.4, &relax, 250).unwrap();
            assert_abs_diff_eq!(s.trace(), 1.0, epsilon = 1e-12);
            assert_eq!(s.hermiticity_defect(), 0.0);
            let (lo, hi) = s.eigenvalues();
            assert!(lo >= -1e-9 && hi <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn unitary_limit_conserves_purity() {
        // no relaxation, no drive: pure Larmor precession
        let relax = RelaxationParams::new(f64::INFINITY, f64::INFINITY, 0.0).unwrap();
        let s0 = DensityState::from_bloch(Vector3::new(0.6, 0.0, 0.4));
        let s1 = propagate_period(&s0, &drive(0.0, 90.0), 5.0, &relax, 400).unwrap();
        assert_abs_diff_eq!(s1.purity(), s0.purity(), epsilon = 1e-12);
        // z component untouched by rotation about z
        assert_abs_diff_eq!(s1.bloch().z, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn maximally_mixed_is_fixed_point() {
        let relax = RelaxationParams::new(10.0, 1.0, 0.0).unwrap();
        let s0 = DensityState::from_bloch(Vector3::zeros());
        let s1 = propagate_period(&s0, &drive(0.0, 90.0), 7.0, &relax, 200).unwrap();
        assert_abs_diff_eq!((s1.bloch() - s0.bloch()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn no_drive_means_no_signal() {
        let relax = RelaxationParams::default();
        let s = steady_state_signal(&drive(0.0, 90.0), 3.5683, &relax).unwrap();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn parallel_drive_means_no_signal() {
        let relax = RelaxationParams::default();
        let s = steady_state_signal(&drive(3.0, 0.0), 3.5683, &relax).unwrap();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn signal_symmetric_under_field_reversal() {
        let relax = RelaxationParams::default();
        let d = drive(2.0, 80.0);
        for b0 in [3.3, 7.2, 10.5] {
            let sp = steady_state_signal(&d, b0, &relax).unwrap();
            let sm = steady_state_signal(&d, -b0, &relax).unwrap();
            assert_abs_diff_eq!(sp, sm, epsilon = 1e-9);
            assert!(sp >= -1e-9);
        }
    }

    #[test]
    fn weak_drive_matches_rotating_wave_saturation() {
        // S(δ=0) = p0 s/(1+s) with s = (γB1/2)² T1 T2.
        let relax = RelaxationParams::default();
        for b1 in [0.005, 0.02] {
            let d = drive(b1, 90.0);
            let s_num = steady_state_signal(&d, d.reference_field(), &relax).unwrap();
            let rabi = 0.5 * d.gamma_angular() * b1;
            let sat = rabi * rabi * relax.t1 * relax.t2;
            let s_rwa = relax.p0 * sat / (1.0 + sat);
            assert_relative_eq!(s_num, s_rwa, max_relative = 0.02);
        }
    }

    #[test]
    fn power_broadening_grows_with_drive() {
        // width at half maximum, from the rotating-wave prediction checked
        // against the numerical profile
        let relax = RelaxationParams::default();
        let width_of = |b1: f64| {
            let d = drive(b1, 90.0);
            let b_res = d.reference_field();
            let s0 = steady_state_signal(&d, b_res, &relax).unwrap();
            let mut db = 0.001;
            while steady_state_signal(&d, b_res + db, &relax).unwrap() > 0.5 * s0 {
                db *= 1.3;
            }
            db
        };
        let w_weak = width_of(0.01);
        let w_strong = width_of(0.05);
        assert!(w_strong > 1.5 * w_weak, "widths {w_weak} vs {w_strong}");
    }

    #[test]
    fn step_doubling_converges() {
        let relax = RelaxationParams::default();
        let d = drive(2.0, 90.0);
        let b0 = 10.4;
        let coarse = steady_state(&d, b0, &relax, &SteadyStateOptions { steps_per_period: 1000, ..Default::default() })
            .unwrap()
            .signal;
        let fine = steady_state(&d, b0, &relax, &SteadyStateOptions { steps_per_period: 2000, ..Default::default() })
            .unwrap()
            .signal;
        assert!((coarse - fine).abs() < 1e-6, "diff {}", (coarse - fine).abs());
    }

    #[test]
    fn propagate_step_doubling_converges() {
        // second-order integrator: measured error 7e-8 at 1000 steps for a
        // transverse excursion of 0.1, falling fourfold per doubling
        let relax = RelaxationParams::default();
        let d = drive(2.5, 90.0);
        let s0 = DensityState::from_bloch(Vector3::new(0.1, 0.0, 1e-3));
        let a = propagate_period(&s0, &d, 10.5, &relax, 1000).unwrap();
        let b = propagate_period(&s0, &d, 10.5, &relax, 2000).unwrap();
        let c = propagate_period(&s0, &d, 10.5, &relax, 4000).unwrap();
        let e1 = (a.bloch() - b.bloch()).norm();
        let e2 = (b.bloch() - c.bloch()).norm();
        assert!(e1 < 1.5e-7, "error {e1}");
        assert!(e2 < 0.3 * e1, "no quadratic decay: {e1} -> {e2}");
    }
}
