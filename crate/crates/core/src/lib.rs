//! Simulation and analysis toolkit for multi-photon transitions of a strongly
//! driven two-level spin.
//!
//! The crate is organized around three layers:
//!
//! * [`analytic`] — closed-form resonance centers, drive-induced shifts and
//!   their exact shift ratios, and the three-photon effective amplitude with
//!   its angular factor `|sinθ − (9/8)sin³θ|`.
//! * [`floquet`] — the Floquet matrix of the driven spin, quasienergy
//!   extraction with truncation control, and numerical location of n-photon
//!   avoided crossings as minima of the quasienergy gap over the static field.
//! * [`liouville`] + [`spectra`] — a T1/T2-relaxed density-matrix steady
//!   state producing field-swept spectra, plus the analysis pipeline
//!   (baseline correction, peak centering by extremum averaging, field
//!   calibration against the one-photon lines, shift statistics and
//!   origin-constrained ratio fits, angular-law fit).
//!
//! Units throughout: magnetic fields in mT, frequencies in MHz (linear),
//! times in µs. Internal angular frequencies are rad/µs; the gyromagnetic
//! ratio is stored in the linear convention (MHz/mT) so that the one-photon
//! reference field is simply `freq / gamma`.

pub mod analytic;
pub mod drive;
pub mod error;
pub mod floquet;
pub mod liouville;
pub mod spectra;

pub use drive::{default_gamma, DriveParams};
pub use error::CoreError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
