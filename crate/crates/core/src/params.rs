use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Physical setting of the flow: the torus `[0, L]^n` and the viscosity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    n: usize,
    box_len: f64,
    nu: f64,
    kappa0: f64,
}

impl PhysicalParams {
    pub fn new(n: usize, box_len: f64, nu: f64) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::arg(format!("dimension must be 2 or 3, got {n}")));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(Error::arg(format!("box length must be positive, got {box_len}")));
        }
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::arg(format!("viscosity must be positive, got {nu}")));
        }
        Ok(Self {
            n,
            box_len,
            nu,
            kappa0: 2.0 * PI / box_len,
        })
    }

    /// Parameters with `kappa0 = 1` (box side `2π`).
    pub fn unit(n: usize, nu: f64) -> Result<Self> {
        Self::new(n, 2.0 * PI, nu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Fundamental wavenumber `2π / L`.
    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    /// The viscous rate `ν κ₀²` that sets the natural time unit.
    pub fn viscous_rate(&self) -> f64 {
        self.nu * self.kappa0 * self.kappa0
    }

    /// Parseval factor `(2π)^n κ₀^{-n}` relating coefficient sums to `L²` integrals.
    pub fn parseval_factor(&self) -> f64 {
        (2.0 * PI / self.kappa0).powi(self.n as i32)
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && self.box_len == other.box_len && self.nu == other.nu
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa0_times_length_is_two_pi() {
        for len in [0.1, 1.0, 2.0 * PI, 17.3] {
            let p = PhysicalParams::new(2, len, 1.0).unwrap();
            assert!((p.kappa0() * p.box_len() - 2.0 * PI).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PhysicalParams::new(1, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(4, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(2, 0.0, 1.0).is_err());
        assert!(PhysicalParams::new(2, 1.0, -1.0).is_err());
        assert!(PhysicalParams::new(3, f64::NAN, 1.0).is_err());
    }
}
