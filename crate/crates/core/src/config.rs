//! Structured configuration document (TOML) with nested sections for the
//! platform, array, connector and jitter parameters. Unknown keys are an
//! error, so typos surface instead of silently using defaults.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::UavPlatform;
use crate::units::{Frequency, UnitsError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Units(#[from] UnitsError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlatformSection {
    pub body_length_m: f64,
    pub propeller_diameter_m: f64,
    pub max_elements: usize,
}

impl Default for PlatformSection {
    fn default() -> Self {
        let p = UavPlatform::reference();
        Self {
            body_length_m: p.body_length_m,
            propeller_diameter_m: p.propeller_diameter_m,
            max_elements: p.max_elements,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub frequency_hz: f64,
    pub segments_per_wire: usize,
    /// Element spacing override (m); half the wavelength when omitted.
    pub element_spacing_m: Option<f64>,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            frequency_hz: 300e6,
            segments_per_wire: 31,
            element_spacing_m: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConnectorSection {
    pub substrate_epsilon_r: f64,
    pub loss_tangent: f64,
    pub substrate_thickness_m: f64,
}

impl Default for ConnectorSection {
    fn default() -> Self {
        Self {
            substrate_epsilon_r: crate::connector::FR4_EPSILON_R,
            loss_tangent: crate::connector::FR4_LOSS_TANGENT,
            substrate_thickness_m: crate::connector::SUBSTRATE_THICKNESS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JitterSection {
    pub sigma_m: f64,
    pub phase_jitter_deg: f64,
    pub seed: u64,
}

impl Default for JitterSection {
    fn default() -> Self {
        Self {
            sigma_m: crate::experiments::CALIBRATED_SIGMA_M,
            phase_jitter_deg: crate::experiments::CALIBRATED_PHASE_JITTER_DEG,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub platform: PlatformSection,
    pub array: ArraySection,
    pub connector: ConnectorSection,
    pub jitter: JitterSection,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_file(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn platform(&self) -> UavPlatform {
        UavPlatform {
            body_length_m: self.platform.body_length_m,
            propeller_diameter_m: self.platform.propeller_diameter_m,
            max_elements: self.platform.max_elements,
        }
    }

    pub fn frequency(&self) -> Result<Frequency, ConfigError> {
        Ok(Frequency::from_hertz(self.array.frequency_hz)?)
    }

    pub fn jitter(&self) -> crate::experiments::FlightJitterModel {
        crate::experiments::FlightJitterModel {
            sigma_m: self.jitter.sigma_m,
            phase_jitter_deg: self.jitter.phase_jitter_deg,
            seed: self.jitter.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_document() {
        let cfg = SimConfig::from_toml("").unwrap();
        assert_eq!(cfg.array.frequency_hz, 300e6);
        assert_eq!(cfg.array.segments_per_wire, 31);
        assert_eq!(cfg.platform.max_elements, 4);
    }

    #[test]
    fn nested_sections_override() {
        let cfg = SimConfig::from_toml(
            "[array]\nfrequency_hz = 6e8\n\n[platform]\nbody_length_m = 0.0875\npropeller_diameter_m = 0.0635\n",
        )
        .unwrap();
        assert_eq!(cfg.array.frequency_hz, 6e8);
        assert_eq!(cfg.platform.propeller_diameter_m, 0.0635);
        // untouched sections keep defaults
        assert_eq!(cfg.connector.substrate_epsilon_r, 4.4);
    }

    #[test]
    fn unknown_keys_are_an_error() {
        let err = SimConfig::from_toml("[array]\nfrequncy_hz = 1e8\n").unwrap_err();
        match err {
            ConfigError::Parse(msg) => assert!(msg.contains("frequncy_hz") || msg.contains("unknown")),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(SimConfig::from_toml("[typo_section]\nx = 1\n").is_err());
    }
}
