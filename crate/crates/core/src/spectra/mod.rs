//! Spectrum synthesis and the analysis pipeline.

mod analysis;
mod fits;
mod spectrum;
mod synth;

pub use analysis::*;
pub use fits::*;
pub use spectrum::*;
pub use synth::*;
