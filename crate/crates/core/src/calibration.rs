//! Versioned values for the constants hidden behind `≲` in the analysis.
//!
//! The lemma entries are multiplicative prefactors on the closed-form
//! constants; the verifier entries are absolute.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

const EMBEDDED: &str = include_str!("../constants/calibration.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MildConstants {
    /// Prefactor on `(1/q′)^{1/q′}` in the X-norm bound for `Φ`.
    pub linear_i: f64,
    /// Prefactor on the composite Y-norm constant for `Φ`.
    pub linear_ii: f64,
    /// Prefactor on the Z-norm constant for the Duhamel integral `w`.
    pub nonlinear: f64,
    /// The absolute constant `C` in `C* = (3C · C_w · C_Φ)^{-1}`.
    pub absolute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierConstants {
    pub brezis_gallouet: f64,
    pub agmon_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbulenceConstants {
    pub chebyshev_energy: f64,
    pub chebyshev_enstrophy: f64,
    pub chebyshev_wiener: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub version: String,
    pub mild: MildConstants,
    pub verifier: VerifierConstants,
    pub turbulence: TurbulenceConstants,
}

impl Calibration {
    /// Constants compiled into the library.
    pub fn embedded() -> Self {
        Self::from_toml_str(EMBEDDED).expect("embedded calibration file is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cal: Calibration =
            toml::from_str(text).map_err(|e| Error::Format(format!("calibration file: {e}")))?;
        cal.validate()?;
        Ok(cal)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("calibration serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.version.trim().is_empty() {
            return Err(Error::Format("calibration file: empty version".into()));
        }
        let entries = [
            ("mild.linear_i", self.mild.linear_i),
            ("mild.linear_ii", self.mild.linear_ii),
            ("mild.nonlinear", self.mild.nonlinear),
            ("mild.absolute", self.mild.absolute),
            ("verifier.brezis_gallouet", self.verifier.brezis_gallouet),
            ("verifier.agmon_slack", self.verifier.agmon_slack),
            ("turbulence.chebyshev_energy", self.turbulence.chebyshev_energy),
            ("turbulence.chebyshev_enstrophy", self.turbulence.chebyshev_enstrophy),
            ("turbulence.chebyshev_wiener", self.turbulence.chebyshev_wiener),
        ];
        for (name, v) in entries {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Format(format!(
                    "calibration file: {name} must be a positive number, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for Calibration {
    fn default() -> Self {
        Self::embedded()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_parses_and_round_trips() {
        let c = Calibration::embedded();
        assert_eq!(c.mild.absolute, 2.0);
        let back = Calibration::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn corrupted_files_are_rejected() {
        assert!(Calibration::from_toml_str("version = ").is_err());
        let mut c = Calibration::embedded();
        c.mild.nonlinear = -1.0;
        assert!(Calibration::from_toml_str(&c.to_toml_string()).is_err());
        let extra = format!("{}\n[extra]\nx = 1\n", Calibration::embedded().to_toml_string());
        assert!(Calibration::from_toml_str(&extra).is_err());
    }
}
