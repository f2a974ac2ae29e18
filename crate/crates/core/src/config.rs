//! Run configuration (JSON) and the calibration table.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// The only generator the sweeps know: ChaCha with 8 rounds, seeded per grid
/// cell from `rng_seed`.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Calibration table shipped with the crate.
pub const DEFAULT_CALIBRATION: &str = include_str!("../calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rng: String,
    pub rng_seed: u64,
    pub sieve_limit: Option<u64>,
    /// `C_cal` per calibrated verifier; defaults to the shipped table.
    pub calibration: BTreeMap<String, f64>,
    pub census: CensusConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rng: RNG_ALGORITHM.to_string(),
            rng_seed: DEFAULT_RNG_SEED,
            sieve_limit: None,
            calibration: CalibrationTable::shipped().constants(),
            census: CensusConfig::default(),
        }
    }
}

pub const DEFAULT_RNG_SEED: u64 = 0x5EED_2024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusConfig {
    /// Allowed `|relative_dev|` per cell.
    pub tolerance: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig { tolerance: 0.15 }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rng != RNG_ALGORITHM {
            return Err(Error::Precondition(format!(
                "unsupported rng `{}`, expected `{RNG_ALGORITHM}`",
                self.rng
            )));
        }
        Ok(())
    }

    /// Canonical JSON used for the report header hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub c_cal: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub rng: String,
    pub rng_seed: u64,
    pub entries: BTreeMap<String, CalibrationEntry>,
}

impl CalibrationTable {
    pub fn shipped() -> Self {
        serde_json::from_str(DEFAULT_CALIBRATION).expect("shipped calibration table parses")
    }

    pub fn constants(&self) -> BTreeMap<String, f64> {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), v.c_cal))
            .collect()
    }

    /// Pretty JSON with a trailing newline; the committed file is exactly this.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_json(&cfg.canonical_json()).unwrap();
        assert_eq!(cfg, back);
        let partial = RunConfig::from_json(r#"{"rng_seed": 7}"#).unwrap();
        assert_eq!(partial.rng_seed, 7);
        assert_eq!(partial.calibration, cfg.calibration);
    }

    #[test]
    fn rejects_unknown_rng_and_fields() {
        assert!(RunConfig::from_json(r#"{"rng": "pcg"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn shipped_table_is_canonical() {
        let t = CalibrationTable::shipped();
        assert_eq!(t.to_json(), DEFAULT_CALIBRATION);
    }
}
