//! Floquet matrix of the driven spin and numerical location of n-photon
//! avoided crossings.
//!
//! The time-periodic Hamiltonian (in angular units, ħ = 1)
//!
//! ```text
//! H(t) = γ B0 Sz + γ B1 cos(ωt) (Sx sinθ + Sz cosθ)
//! ```
//!
//! is lifted to the static Floquet matrix over the basis |σ, k⟩ with spin
//! σ ∈ {↑, ↓} and Fourier index k ∈ [−N, N]: diagonal blocks `γB0 Sz + kωI`,
//! and the single-harmonic coupling `(γB1/2)(Sx sinθ + Sz cosθ)` between
//! adjacent k. All entries are real, so the matrix is real symmetric.
//!
//! Quasienergies live on a circle of circumference ω; the two physical ones
//! are picked by maximal eigenvector weight in the k = 0 block and folded
//! into the first zone [−ω/2, ω/2). An n-photon resonance appears as a
//! minimum of the folded gap as a function of B0 near n ω/γ; the minimum is
//! located by golden-section search.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::analytic::{analytic_center, analytic_shift};
use crate::{CoreError, DriveParams, Result};

/// Convergence tolerance on quasienergies under truncation doubling (rad/µs).
pub const QUASIENERGY_TOL: f64 = 1e-9;

/// Gaps below this are treated as "no transition" in scans (rad/µs).
pub const GAP_RESOLUTION: f64 = 1e-4;

/// Field tolerance of the crossing search (mT).
pub const FIELD_TOL: f64 = 1e-5;

/// Truncation guard: photon blocks needed for the highest order sought.
pub fn default_truncation(n_max: u32) -> usize {
    2 * n_max as usize + 3
}

/// Floquet matrix for one static field point.
#[derive(Debug, Clone)]
pub struct FloquetOperator {
    /// Photon-block cutoff N; the matrix spans k ∈ [−N, N].
    pub truncation: usize,
    /// Static field (mT).
    pub b0: f64,
    pub drive: DriveParams,
    /// Real symmetric matrix of dimension 2(2N+1), entries in rad/µs.
    pub matrix: DMatrix<f64>,
}

pub fn build_floquet_matrix(drive: &DriveParams, b0: f64, truncation: usize) -> Result<FloquetOperator> {
    drive.validate()?;
    if truncation < 1 {
        return Err(CoreError::InvalidInput("truncation must be >= 1".into()));
    }
    if !b0.is_finite() {
        return Err(CoreError::InvalidInput("b0 must be finite".into()));
    }
    let n = truncation;
    let dim = 2 * (2 * n + 1);
    let omega = drive.omega();
    let g = drive.gamma_angular();
    let hz = 0.5 * g * b0; // γ B0 <Sz> on the ↑ row
    // Coupling block (γB1/2)(Sx sinθ + Sz cosθ), written out over spin-1/2:
    let vc = 0.25 * g * drive.b1 * drive.theta_rad().cos(); // Sz part
    let vs = 0.25 * g * drive.b1 * drive.theta_rad().sin(); // Sx part

    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for kb in 0..=2 * n {
        let k = kb as i64 - n as i64;
        let r = 2 * kb;
        m[(r, r)] = hz + k as f64 * omega;
        m[(r + 1, r + 1)] = -hz + k as f64 * omega;
        if kb + 1 <= 2 * n {
            let s = 2 * (kb + 1);
            // identical block above and below the diagonal keeps the defect at zero
            for (a, b, v) in [(0, 0, vc), (0, 1, vs), (1, 0, vs), (1, 1, -vc)] {
                m[(r + a, s + b)] = v;
                m[(s + b, r + a)] = v;
            }
        }
    }
    Ok(FloquetOperator { truncation, b0, drive: *drive, matrix: m })
}

/// The two physical quasienergies folded into the first zone, and their gap
/// modulo ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasienergyPair {
    pub eps_plus: f64,
    pub eps_minus: f64,
    /// Minimal splitting |eps_plus − eps_minus| measured modulo ω (rad/µs).
    pub gap: f64,
    /// Set when doubling the truncation moved both quasienergies by less
    /// than the requested tolerance.
    pub converged: bool,
}

/// Fold x into [−ω/2, ω/2).
fn fold(x: f64, omega: f64) -> f64 {
    x - omega * (x / omega + 0.5).floor()
}

fn circ_dist(a: f64, b: f64, omega: f64) -> f64 {
    fold(a - b, omega).abs()
}

/// Folded quasienergies of the two eigenvectors with the largest k = 0 weight.
fn physical_pair(op: &FloquetOperator) -> (f64, f64) {
    let omega = op.drive.omega();
    let n = op.truncation;
    let eig = SymmetricEigen::new(op.matrix.clone());
    let (r0, r1) = (2 * n, 2 * n + 1); // rows of the k = 0 block
    let mut best = (0usize, f64::MIN);
    let mut second = (0usize, f64::MIN);
    for j in 0..op.matrix.nrows() {
        let v = eig.eigenvectors.column(j);
        let w = v[r0] * v[r0] + v[r1] * v[r1];
        if w > best.1 {
            second = best;
            best = (j, w);
        } else if w > second.1 {
            second = (j, w);
        }
    }
    let e1 = fold(eig.eigenvalues[best.0], omega);
    let e2 = fold(eig.eigenvalues[second.0], omega);
    if e1 >= e2 {
        (e2, e1)
    } else {
        (e1, e2)
    }
}

/// Quasienergies of `op`, with a convergence check against truncation 2N.
///
/// The pair from the doubled truncation is returned (it is the more accurate
/// one); `converged` reflects whether the two truncations agree within `tol`
/// in circular distance.
pub fn quasienergies(op: &FloquetOperator, tol: f64) -> Result<QuasienergyPair> {
    let omega = op.drive.omega();
    let coarse = physical_pair(op);
    let fine_op = build_floquet_matrix(&op.drive, op.b0, 2 * op.truncation)?;
    let fine = physical_pair(&fine_op);
    // match the pairs in whichever order is circularly closer
    let direct = circ_dist(coarse.0, fine.0, omega).max(circ_dist(coarse.1, fine.1, omega));
    let swapped = circ_dist(coarse.0, fine.1, omega).max(circ_dist(coarse.1, fine.0, omega));
    let converged = direct.min(swapped) < tol;
    Ok(QuasienergyPair {
        eps_plus: fine.1,
        eps_minus: fine.0,
        gap: circ_dist(fine.1, fine.0, omega),
        converged,
    })
}

/// Quasienergies with automatic truncation doubling until converged.
///
/// Returns the converged pair and the truncation that achieved it.
pub fn converged_quasienergies(
    drive: &DriveParams,
    b0: f64,
    start_truncation: usize,
    tol: f64,
) -> Result<(QuasienergyPair, usize)> {
    const MAX_TRUNCATION: usize = 512;
    let mut trunc = start_truncation.max(1);
    loop {
        let op = build_floquet_matrix(drive, b0, trunc)?;
        let pair = quasienergies(&op, tol)?;
        if pair.converged {
            return Ok((pair, trunc));
        }
        trunc *= 2;
        if trunc > MAX_TRUNCATION {
            return Err(CoreError::TruncationNotConverged { truncation: trunc / 2, tol });
        }
    }
}

/// A numerically located n-photon resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFix {
    pub n: u32,
    /// Center field B(n) minimizing the quasienergy gap (mT).
    pub center: f64,
    /// Minimal gap at the crossing (rad/µs).
    pub gap: f64,
    /// Search interval used (mT).
    pub window: (f64, f64),
}

/// Default search window: analytic center ± 3× the analytic shift, with a
/// floor of 1% of ω/γ so that the weak-drive window never collapses.
pub fn default_window(n: u32, drive: &DriveParams) -> Result<(f64, f64)> {
    let c = analytic_center(n, drive)?;
    let s = analytic_shift(n, drive)?;
    let half = (3.0 * s).max(0.01 * drive.reference_field());
    Ok((c - half, c + half))
}

/// Locate the n-photon resonance as the minimum of the quasienergy gap over
/// `window`, by golden-section search to [`FIELD_TOL`].
///
/// Fails with [`CoreError::NoCrossing`] when the gap is monotone over the
/// window (nothing bracketed), and propagates truncation-convergence
/// failures.
pub fn locate_resonance(n: u32, drive: &DriveParams, window: (f64, f64)) -> Result<ResonanceFix> {
    if n < 1 {
        return Err(CoreError::InvalidInput("photon order must be >= 1".into()));
    }
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(CoreError::InvalidInput(format!("invalid window [{a}, {b}]")));
    }
    // Reuse the truncation that last converged; it only ever grows.
    let mut trunc = default_truncation(n);
    let mut gap_at = |b0: f64| -> Result<f64> {
        let (pair, used) = converged_quasienergies(drive, b0, trunc, QUASIENERGY_TOL)?;
        trunc = used;
        Ok(pair.gap)
    };

    let (center_g, gap_g) = golden_min(&mut gap_at, a, b, FIELD_TOL)?;

    // Near a crossing the squared gap is locally G² + s²(B−B*)², for an
    // avoided (G > 0) and an exact (G = 0) crossing alike. A parabola through
    // three points recovers both the vertex and the minimal gap below the
    // γ·FIELD_TOL floor that the section search alone leaves behind.
    let delta = (50.0 * FIELD_TOL).min(0.25 * (b - a));
    let x0 = center_g.clamp(a + delta, b - delta);
    let y_m = gap_at(x0 - delta)?.powi(2);
    let y_0 = gap_at(x0)?.powi(2);
    let y_p = gap_at(x0 + delta)?.powi(2);
    let curv = y_p - 2.0 * y_0 + y_m;
    let (center, gap) = if curv > 0.0 {
        let vertex = x0 - delta * (y_p - y_m) / (2.0 * curv);
        let g2 = y_0 - (y_p - y_m).powi(2) / (8.0 * curv);
        if vertex > a && vertex < b && g2.is_finite() {
            (vertex, g2.max(0.0).sqrt())
        } else {
            (center_g, gap_g)
        }
    } else {
        (center_g, gap_g)
    };

    let (ga, gb) = (gap_at(a)?, gap_at(b)?);
    if center - a < 2.0 * FIELD_TOL || b - center < 2.0 * FIELD_TOL || gap >= ga.min(gb) {
        return Err(CoreError::NoCrossing(a, b));
    }
    Ok(ResonanceFix { n, center, gap, window })
}

fn golden_min(
    f: &mut impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    xtol: f64,
) -> Result<(f64, f64)> {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > xtol {
        if f1 > f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// One row of an angular scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularPoint {
    pub theta: f64,
    pub center: Option<f64>,
    /// Minimal gap at this angle (rad/µs).
    pub gap: Option<f64>,
    /// False when the gap fell below [`GAP_RESOLUTION`] or no crossing was
    /// bracketed; such points are excluded from angular-law fits.
    pub resolved: bool,
}

/// Locate the n-photon resonance at each angle of `theta_grid` with fixed
/// drive amplitude.
///
/// For n = 3 the gap across θ tracks the angular factor |sinθ − (9/8)sin³θ|
/// of the effective amplitude.
pub fn angular_scan(n: u32, drive: &DriveParams, theta_grid: &[f64]) -> Result<Vec<AngularPoint>> {
    let mut out = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        if !(0.0..=90.0).contains(&theta) {
            return Err(CoreError::InvalidInput(format!("theta {theta} outside [0, 90] degrees")));
        }
        let d = drive.with_theta(theta)?;
        let window = default_window(n, &d)?;
        match locate_resonance(n, &d, window) {
            Ok(fix) => out.push(AngularPoint {
                theta,
                center: Some(fix.center),
                gap: Some(fix.gap),
                resolved: fix.gap > GAP_RESOLUTION,
            }),
            Err(CoreError::NoCrossing(..)) => {
                out.push(AngularPoint { theta, center: None, gap: None, resolved: false })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
