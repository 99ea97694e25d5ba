use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Numerical tolerances shared by every check.
///
/// `psd_tol` and `herm_tol` are relative: they are multiplied by `1 + ‖X‖`
/// of the element under test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub psd_tol: f64,
    pub eq_tol: f64,
    pub herm_tol: f64,
}

impl ToleranceConfig {
    pub const DEFAULT_PSD_TOL: f64 = 1e-9;
    pub const DEFAULT_EQ_TOL: f64 = 1e-10;
    pub const DEFAULT_HERM_TOL: f64 = 1e-9;

    pub fn new(psd_tol: f64, eq_tol: f64, herm_tol: f64) -> Result<Self, AlgebraError> {
        let cfg = Self { psd_tol, eq_tol, herm_tol };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_psd_tol(self, psd_tol: f64) -> Result<Self, AlgebraError> {
        Self::new(psd_tol, self.eq_tol, self.herm_tol)
    }

    pub fn validate(&self) -> Result<(), AlgebraError> {
        for (name, v) in [("psd_tol", self.psd_tol), ("eq_tol", self.eq_tol), ("herm_tol", self.herm_tol)] {
            if !v.is_finite() || v < 0.0 {
                return Err(AlgebraError::InvalidTolerance(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            psd_tol: Self::DEFAULT_PSD_TOL,
            eq_tol: Self::DEFAULT_EQ_TOL,
            herm_tol: Self::DEFAULT_HERM_TOL,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_nan() {
        assert!(ToleranceConfig::new(-1.0, 0.0, 0.0).is_err());
        assert!(ToleranceConfig::new(0.0, f64::NAN, 0.0).is_err());
        assert!(ToleranceConfig::new(0.0, 0.0, 0.0).is_ok());
    }
}
