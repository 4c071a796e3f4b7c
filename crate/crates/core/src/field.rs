use crate::error::{Error, Result};
use crate::lattice::{Lattice, Slot};
use crate::params::PhysicalParams;
use num_complex::Complex64;
use std::sync::Arc;

/// Truncated Fourier coefficients `û(k) ∈ ℂⁿ` of a real, mean-zero vector
/// field on the torus, stored on the canonical half of `|k|_∞ ≤ K`.
///
/// Coefficients are laid out mode-major: mode `i` occupies
/// `coeffs[i*n .. (i+1)*n]`. The coefficient at `-k` is the conjugate of the
/// one at `k` and is never stored, so reality holds by construction and the
/// mean mode `û(0)` is identically zero.
#[derive(Debug, Clone)]
pub struct SpectralField {
    params: PhysicalParams,
    lattice: Arc<Lattice>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.params.same_as(&other.params)
            && self.k_max() == other.k_max()
            && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(params: PhysicalParams, k_max: i32) -> Result<Self> {
        let lattice = Lattice::shared(params.dim(), k_max)?;
        Ok(Self::zeros_on(params, lattice))
    }

    pub fn zeros_on(params: PhysicalParams, lattice: Arc<Lattice>) -> Self {
        let len = lattice.len() * params.dim();
        Self {
            params,
            lattice,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Field with the same parameters and lattice and the given raw coefficients.
    pub fn with_coeffs(&self, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != self.coeffs.len() {
            return Err(Error::config(format!(
                "coefficient length {} does not match lattice storage {}",
                coeffs.len(),
                self.coeffs.len()
            )));
        }
        Ok(Self {
            params: self.params,
            lattice: Arc::clone(&self.lattice),
            coeffs,
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros_on(self.params, Arc::clone(&self.lattice))
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn k_max(&self) -> i32 {
        self.lattice.k_max()
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Number of stored modes.
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &[Complex64] {
        let n = self.dim();
        &self.coeffs[i * n..(i + 1) * n]
    }

    pub fn coeff_mut(&mut self, i: usize) -> &mut [Complex64] {
        let n = self.dim();
        &mut self.coeffs[i * n..(i + 1) * n]
    }

    /// Coefficient at an arbitrary lattice point (zero outside the box and at the origin).
    pub fn get(&self, k: &[i32]) -> Vec<Complex64> {
        let n = self.dim();
        match self.lattice.slot(k) {
            Some(Slot::Stored(i)) => self.coeff(i).to_vec(),
            Some(Slot::Partner(i)) => self.coeff(i).iter().map(|c| c.conj()).collect(),
            _ => vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Set `û(k)`; the partner `û(-k)` becomes the conjugate automatically.
    pub fn set(&mut self, k: &[i32], value: &[Complex64]) -> Result<()> {
        if value.len() != self.dim() {
            return Err(Error::arg(format!(
                "coefficient must have {} components, got {}",
                self.dim(),
                value.len()
            )));
        }
        match self.lattice.slot(k) {
            None => Err(Error::arg(format!("wave vector {k:?} lies outside the truncation box"))),
            Some(Slot::Origin) => {
                if value.iter().any(|c| c.norm() != 0.0) {
                    Err(Error::arg("mean mode û(0) must vanish"))
                } else {
                    Ok(())
                }
            }
            Some(Slot::Stored(i)) => {
                self.coeff_mut(i).copy_from_slice(value);
                Ok(())
            }
            Some(Slot::Partner(i)) => {
                for (dst, src) in self.coeff_mut(i).iter_mut().zip(value) {
                    *dst = src.conj();
                }
                Ok(())
            }
        }
    }

    /// Euclidean norm `|û(k)|` of the ℂⁿ coefficient of stored mode `i`.
    pub fn magnitude(&self, i: usize) -> f64 {
        self.coeff(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.magnitude(i)).collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.len()).map(|i| self.magnitude(i)).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if !self.params.same_as(&other.params) {
            return Err(Error::config(format!(
                "physical parameters differ: {:?} vs {:?}",
                self.params, other.params
            )));
        }
        if self.k_max() != other.k_max() {
            return Err(Error::config(format!(
                "truncation differs: K = {} vs K = {}",
                self.k_max(),
                other.k_max()
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|z| *z *= c);
        out
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (z, w) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *z += w * a;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Apply a real multiplier depending on `|k|` to every stored mode.
    pub fn map_radial(&self, mut mult: impl FnMut(f64) -> f64) -> Self {
        let mut out = self.clone();
        let n = self.dim();
        for (i, &kn) in self.lattice.norms().iter().enumerate() {
            let m = mult(kn);
            out.coeffs[i * n..(i + 1) * n].iter_mut().for_each(|z| *z *= m);
        }
        out
    }

    /// Largest `|k·û(k)|` over stored modes.
    pub fn max_divergence(&self) -> f64 {
        let n = self.dim();
        (0..self.len())
            .map(|i| {
                let k = self.lattice.mode(i).components();
                let c = self.coeff(i);
                (0..n)
                    .map(|j| c[j] * k[j] as f64)
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Divergence-free within `rel_tol · max|û|`.
    pub fn is_divergence_free(&self, rel_tol: f64) -> bool {
        self.max_divergence() <= rel_tol * self.max_magnitude().max(f64::MIN_POSITIVE)
    }

    /// Largest coefficient-wise difference `max_k |û(k) - v̂(k)|_∞` over components.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.ensure_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn set_partner_conjugates() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let mut u = SpectralField::zeros(p, 3).unwrap();
        u.set(&[-1, 2], &[c(1.0, 2.0), c(0.5, -1.0)]).unwrap();
        assert_eq!(u.get(&[1, -2]), vec![c(1.0, -2.0), c(0.5, 1.0)]);
        assert_eq!(u.get(&[-1, 2]), vec![c(1.0, 2.0), c(0.5, -1.0)]);
    }

    #[test]
    fn origin_must_stay_zero() {
        let p = PhysicalParams::unit(3, 1.0).unwrap();
        let mut u = SpectralField::zeros(p, 2).unwrap();
        assert!(u.set(&[0, 0, 0], &[c(1.0, 0.0); 3]).is_err());
        assert!(u.set(&[0, 0, 0], &[c(0.0, 0.0); 3]).is_ok());
        assert!(u.set(&[3, 0, 0], &[c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn compatibility_checks() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let q = PhysicalParams::unit(2, 0.5).unwrap();
        let a = SpectralField::zeros(p, 3).unwrap();
        assert!(a.add(&SpectralField::zeros(p, 4).unwrap()).is_err());
        assert!(a.add(&SpectralField::zeros(q, 3).unwrap()).is_err());
        assert!(a.add(&a).is_ok());
    }
}
