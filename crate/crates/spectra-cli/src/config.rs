//! Run configuration: system, geometry, potential, and reproducibility knobs.
//! The configuration hash is embedded in every output.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spectra_core::geometry::{AffineGeometry, CfGeometry, GeometryModel};
use spectra_core::potential::{
    AffineCoordinatePotential, ClassicalCfPotential, FiniteWindowPotential, Potential,
};
use spectra_core::{Symbol, TransitionSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryConfig {
    ContinuedFraction,
    Affine {
        ratios: Vec<f64>,
        #[serde(default)]
        stable_ratios: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialConfig {
    ClassicalCf,
    AffineCoordinate,
    FiniteWindow {
        past_len: usize,
        future_len: usize,
        /// Entries `(past, future, value)` covering every admissible window.
        entries: Vec<(Vec<Symbol>, Vec<Symbol>, f64)>,
    },
}

/// One run's full configuration; round-trips losslessly through JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: TransitionSystem,
    pub geometry: GeometryConfig,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget_level: u32,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_budget() -> u32 {
    6
}

fn default_workers() -> usize {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: TransitionSystem::full_shift_n(2).expect("two symbols"),
            geometry: GeometryConfig::ContinuedFraction,
            potential: PotentialConfig::ClassicalCf,
            seed: 0,
            budget_level: default_budget(),
            workers: default_workers(),
        }
    }
}

impl RunConfig {
    /// SHA-256 over the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hex::encode(hasher.finalize())
    }

    pub fn build_geometry(&self) -> Result<Box<dyn GeometryModel>, spectra_core::Error> {
        match &self.geometry {
            GeometryConfig::ContinuedFraction => Ok(Box::new(CfGeometry)),
            GeometryConfig::Affine { ratios, stable_ratios } => {
                let alphabet = self.system.alphabet().to_vec();
                let gm = match stable_ratios {
                    Some(s) => AffineGeometry::with_stable(alphabet, ratios.clone(), s.clone())?,
                    None => AffineGeometry::new(alphabet, ratios.clone())?,
                };
                Ok(Box::new(gm))
            }
        }
    }

    pub fn build_potential(&self) -> Result<Box<dyn Potential>, spectra_core::Error> {
        match &self.potential {
            PotentialConfig::ClassicalCf => {
                if self.system.alphabet().iter().any(|&a| a < 1) {
                    return Err(spectra_core::Error::InvalidParameter(
                        "classical potential needs digits >= 1".into(),
                    ));
                }
                Ok(Box::new(ClassicalCfPotential::new(self.system.clone())))
            }
            PotentialConfig::AffineCoordinate => {
                let GeometryConfig::Affine { ratios, stable_ratios } = &self.geometry else {
                    return Err(spectra_core::Error::InvalidParameter(
                        "affine_coordinate potential needs affine geometry".into(),
                    ));
                };
                let alphabet = self.system.alphabet().to_vec();
                let gm = match stable_ratios {
                    Some(s) => AffineGeometry::with_stable(alphabet, ratios.clone(), s.clone())?,
                    None => AffineGeometry::new(alphabet, ratios.clone())?,
                };
                Ok(Box::new(AffineCoordinatePotential::new(self.system.clone(), gm)))
            }
            PotentialConfig::FiniteWindow { past_len, future_len, entries } => {
                Ok(Box::new(FiniteWindowPotential::new(
                    self.system.clone(),
                    *past_len,
                    *future_len,
                    entries.clone(),
                )?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip_and_stable_hash() {
        let config = RunConfig::default();
        let json = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        assert_eq!(config.hash(), back.hash());
        // Changing a field changes the hash.
        let mut other = RunConfig::default();
        other.seed = 1;
        assert_ne!(config.hash(), other.hash());
    }
}
