//! Field-swept spectrum container and its on-disk CSV format.
//!
//! A spectrum file is a CSV with a header row `b0_mT,signal`, preceded by
//! `# key = value` comment lines carrying the acquisition metadata. Numeric
//! values are written with Rust's shortest round-trip formatting, so the
//! numeric columns survive write → read → write bit-exactly.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::liouville::RelaxationParams;
use crate::{CoreError, DriveParams, Result};

/// Systematic field-scale floor for slow lock-in modulation (mT).
pub const FLOOR_SLOW_MODULATION_MT: f64 = 0.020;

/// Systematic field-scale floor for fast lock-in modulation (mT).
pub const FLOOR_FAST_MODULATION_MT: f64 = 0.150;

/// Evenly spaced field grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let g = Self { start, stop, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CoreError::InvalidInput(format!(
                "grid needs finite bounds and step > 0, got [{}, {}] step {}",
                self.start, self.stop, self.step
            )));
        }
        if self.stop - self.start < 0.5 * self.step {
            return Err(CoreError::InvalidInput("grid must span at least two points".into()));
        }
        Ok(())
    }

    /// Grid points start, start+step, ..., up to stop (inclusive within
    /// rounding of the last step).
    pub fn fields(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Provenance metadata carried by every spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub drive: DriveParams,
    pub relax: Option<RelaxationParams>,
    pub seed: Option<u64>,
    pub noise_sigma: f64,
    /// Linear baseline (intercept, slope per mT) injected at synthesis.
    pub baseline: (f64, f64),
    /// True for synthesized traces, false for ingested measurements.
    pub synthesized: bool,
    /// Pairing key for shift-ratio fits; defaults to B1.
    pub drive_proxy: f64,
    /// Systematic field uncertainty floor (mT).
    pub uncertainty_floor: f64,
    /// Affine field correction (scale, offset) applied to this spectrum.
    pub calibration: Option<(f64, f64)>,
    /// Grid points where the steady-state solver failed (signal = NaN).
    pub failed_points: u32,
}

impl SpectrumMeta {
    pub fn new(drive: DriveParams) -> Self {
        Self {
            drive,
            relax: None,
            seed: None,
            noise_sigma: 0.0,
            baseline: (0.0, 0.0),
            synthesized: true,
            drive_proxy: drive.b1,
            uncertainty_floor: FLOOR_SLOW_MODULATION_MT,
            calibration: None,
            failed_points: 0,
        }
    }
}

/// A B0-swept signal trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    field_grid: Vec<f64>,
    signal: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn new(field_grid: Vec<f64>, signal: Vec<f64>, meta: SpectrumMeta) -> Result<Self> {
        if field_grid.len() != signal.len() {
            return Err(CoreError::InvalidInput(format!(
                "field grid ({}) and signal ({}) lengths differ",
                field_grid.len(),
                signal.len()
            )));
        }
        if field_grid.len() < 2 {
            return Err(CoreError::InvalidInput("spectrum needs at least two points".into()));
        }
        if field_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CoreError::InvalidInput("field grid must be strictly increasing".into()));
        }
        Ok(Self { field_grid, signal, meta })
    }

    pub fn len(&self) -> usize {
        self.field_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field_grid.is_empty()
    }

    pub fn field_grid(&self) -> &[f64] {
        &self.field_grid
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    /// Same grid and meta, new signal values.
    pub fn with_signal(&self, signal: Vec<f64>) -> Result<Self> {
        Self::new(self.field_grid.clone(), signal, self.meta)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = &self.meta;
        writeln!(w, "# b1_mT = {}", m.drive.b1)?;
        writeln!(w, "# freq_MHz = {}", m.drive.freq)?;
        writeln!(w, "# theta_deg = {}", m.drive.theta)?;
        writeln!(w, "# gamma_MHz_per_mT = {}", m.drive.gamma)?;
        if let Some(r) = &m.relax {
            writeln!(w, "# t1_us = {}", r.t1)?;
            writeln!(w, "# t2_us = {}", r.t2)?;
            writeln!(w, "# p0 = {}", r.p0)?;
        }
        if let Some(seed) = m.seed {
            writeln!(w, "# seed = {}", seed)?;
        }
        writeln!(w, "# noise_sigma = {}", m.noise_sigma)?;
        writeln!(w, "# baseline_intercept = {}", m.baseline.0)?;
        writeln!(w, "# baseline_slope = {}", m.baseline.1)?;
        writeln!(w, "# synthesized = {}", m.synthesized)?;
        writeln!(w, "# drive_proxy = {}", m.drive_proxy)?;
        writeln!(w, "# uncertainty_floor_mT = {}", m.uncertainty_floor)?;
        if let Some((scale, offset)) = m.calibration {
            writeln!(w, "# calibration_scale = {}", scale)?;
            writeln!(w, "# calibration_offset_mT = {}", offset)?;
        }
        writeln!(w, "# failed_points = {}", m.failed_points)?;
        writeln!(w, "b0_mT,signal")?;
        for (b, s) in self.field_grid.iter().zip(&self.signal) {
            writeln!(w, "{},{}", b, s)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut meta_pairs: Vec<(String, String)> = Vec::new();
        let mut header_seen = false;
        let mut grid = Vec::new();
        let mut signal = Vec::new();

        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest
                    .split_once('=')
                    .ok_or_else(|| CoreError::Format(format!("line {}: malformed meta line", lineno + 1)))?;
                meta_pairs.push((key.trim().to_string(), value.trim().to_string()));
                continue;
            }
            if !header_seen {
                if line != "b0_mT,signal" {
                    return Err(CoreError::Format(format!(
                        "line {}: expected header 'b0_mT,signal', got '{line}'",
                        lineno + 1
                    )));
                }
                header_seen = true;
                continue;
            }
            let (b, s) = line
                .split_once(',')
                .ok_or_else(|| CoreError::Format(format!("line {}: expected two columns", lineno + 1)))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| CoreError::Format(format!("line {}: bad field value '{b}'", lineno + 1)))?;
            let s: f64 = s
                .trim()
                .parse()
                .map_err(|_| CoreError::Format(format!("line {}: bad signal value '{s}'", lineno + 1)))?;
            grid.push(b);
            signal.push(s);
        }
        if !header_seen {
            return Err(CoreError::Format("missing 'b0_mT,signal' header".into()));
        }

        let get = |key: &str| meta_pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let parse_f64 = |key: &str| -> Result<Option<f64>> {
            match get(key) {
                None => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| CoreError::Format(format!("meta key '{key}': bad value '{v}'"))),
            }
        };
        let require = |key: &str, v: Option<f64>| -> Result<f64> {
            v.ok_or_else(|| CoreError::Format(format!("missing meta key '{key}'")))
        };

        let drive = DriveParams::new(
            require("b1_mT", parse_f64("b1_mT")?)?,
            require("freq_MHz", parse_f64("freq_MHz")?)?,
            require("theta_deg", parse_f64("theta_deg")?)?,
            require("gamma_MHz_per_mT", parse_f64("gamma_MHz_per_mT")?)?,
        )?;
        let relax = match (parse_f64("t1_us")?, parse_f64("t2_us")?, parse_f64("p0")?) {
            (Some(t1), Some(t2), Some(p0)) => Some(RelaxationParams::new(t1, t2, p0)?),
            (None, None, None) => None,
            _ => return Err(CoreError::Format("incomplete relaxation meta (t1_us/t2_us/p0)".into())),
        };
        let seed = match get("seed") {
            None => None,
            Some(v) => Some(
                v.parse::<u64>()
                    .map_err(|_| CoreError::Format(format!("meta key 'seed': bad value '{v}'")))?,
            ),
        };
        let synthesized = match get("synthesized") {
            None => true,
            Some("true") => true,
            Some("false") => false,
            Some(v) => return Err(CoreError::Format(format!("meta key 'synthesized': bad value '{v}'"))),
        };
        let calibration = match (parse_f64("calibration_scale")?, parse_f64("calibration_offset_mT")?) {
            (Some(s), Some(o)) => Some((s, o)),
            (None, None) => None,
            _ => return Err(CoreError::Format("incomplete calibration meta".into())),
        };

        let meta = SpectrumMeta {
            drive,
            relax,
            seed,
            noise_sigma: parse_f64("noise_sigma")?.unwrap_or(0.0),
            baseline: (
                parse_f64("baseline_intercept")?.unwrap_or(0.0),
                parse_f64("baseline_slope")?.unwrap_or(0.0),
            ),
            synthesized,
            drive_proxy: parse_f64("drive_proxy")?.unwrap_or(drive.b1),
            uncertainty_floor: parse_f64("uncertainty_floor_mT")?.unwrap_or(FLOOR_SLOW_MODULATION_MT),
            calibration,
            failed_points: parse_f64("failed_points")?.unwrap_or(0.0) as u32,
        };
        Self::new(grid, signal, meta)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read_csv(s.as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn meta() -> SpectrumMeta {
        let mut m = SpectrumMeta::new(DriveParams::with_defaults(2.0, 90.0).unwrap());
        m.relax = Some(RelaxationParams::default());
        m.seed = Some(42);
        m.noise_sigma = 1e-4;
        m.baseline = (0.5, 0.02);
        m
    }

    #[test]
    fn grid_fields_inclusive() {
        let g = GridSpec::new(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(g.fields(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(GridSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(GridSpec::new(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn rejects_non_increasing_grid() {
        let m = meta();
        assert!(Spectrum::new(vec![0.0, 0.0, 1.0], vec![0.0; 3], m).is_err());
        assert!(Spectrum::new(vec![0.0, -1.0], vec![0.0; 2], m).is_err());
        assert!(Spectrum::new(vec![0.0, 1.0], vec![0.0; 3], m).is_err());
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let s = Spectrum::new(
            vec![-0.3, 0.1, 0.7243000000001, 2.0],
            vec![1.0 / 3.0, f64::NAN, -2.5e-17, 0.1 + 0.2],
            meta(),
        )
        .unwrap();
        let text = s.to_csv_string();
        let back = Spectrum::from_csv_str(&text).unwrap();
        assert_eq!(text, back.to_csv_string());
        // numeric columns identical at the bit level (NaN included)
        for (a, b) in s.signal().iter().zip(back.signal()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(s.field_grid(), back.field_grid());
        assert_eq!(s.meta, back.meta);
    }

    #[test]
    fn read_rejects_malformed_input() {
        assert!(Spectrum::from_csv_str("b0_mT,signal\n").is_err()); // no rows
        assert!(Spectrum::from_csv_str("# b1_mT = 1\nwrong,header\n0,1\n").is_err());
        assert!(Spectrum::from_csv_str("b0_mT,signal\n0,1\n1,nope\n").is_err());
        // missing drive meta
        assert!(Spectrum::from_csv_str("b0_mT,signal\n0,1\n1,2\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trips_arbitrary_numeric_columns(
            raw in proptest::collection::vec((any::<f64>(), 1e-6..1e3f64), 2..40)
        ) {
            // strictly increasing grid from arbitrary positive gaps
            let mut grid = Vec::with_capacity(raw.len());
            let mut acc = -5.0;
            for (_, gap) in &raw {
                acc += *gap;
                grid.push(acc);
            }
            let signal: Vec<f64> = raw.iter().map(|(s, _)| *s).collect();
            let s = Spectrum::new(grid, signal, meta()).unwrap();
            let back = Spectrum::from_csv_str(&s.to_csv_string()).unwrap();
            for (a, b) in s.signal().iter().zip(back.signal()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in s.field_grid().iter().zip(back.field_grid()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
