//! Spectral operators on truncated fields: Leray projection, the heat
//! propagator, the bilinear advection term and test-data generators.

mod bilinear;
mod generate;
pub mod snapshot;

pub use bilinear::{bilinear_direct, bilinear_fft, fft_grid_size, BilinearFft};
pub use generate::{random_field, random_raw_field, taylor_green, AmplitudeProfile};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use num_complex::Complex64;

/// Helmholtz-Leray projection: removes the component of each `û(k)` along `k`.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(f: &mut SpectralField) {
    let lattice = std::sync::Arc::clone(f.lattice());
    let n = f.dim();
    for (i, mode) in lattice.modes().iter().enumerate() {
        let k = mode.components();
        let k2 = mode.norm_sq() as f64;
        let c = f.coeff_mut(i);
        let dot: Complex64 = (0..n).map(|j| c[j] * k[j] as f64).sum();
        let s = dot / k2;
        for j in 0..n {
            c[j] -= s * k[j] as f64;
        }
    }
}

/// Multiply each mode by `exp(-nu_scale · ν t κ₀² |k|²)`.
pub fn heat_propagate(u: &SpectralField, t: f64, nu_scale: f64) -> Result<SpectralField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::arg(format!("propagation time must be finite and ≥ 0, got {t}")));
    }
    if !(nu_scale > 0.0) || !nu_scale.is_finite() {
        return Err(Error::arg(format!("viscosity multiplier must be positive, got {nu_scale}")));
    }
    let rate = nu_scale * u.params().viscous_rate() * t;
    Ok(u.map_radial(|kn| (-rate * kn * kn).exp()))
}

/// Keep only modes with `lo ≤ |k| ≤ hi` (lattice units).
pub fn band_filter(u: &SpectralField, lo: f64, hi: f64) -> SpectralField {
    u.map_radial(|kn| if kn >= lo && kn <= hi { 1.0 } else { 0.0 })
}

/// Galerkin projection `P_κ̄`: modes with `κ₀|k| ≤ κ̄`.
pub fn low_pass(u: &SpectralField, kappa_bar: f64) -> SpectralField {
    let k0 = u.params().kappa0();
    u.map_radial(|kn| if k0 * kn <= kappa_bar * (1.0 + 1e-12) { 1.0 } else { 0.0 })
}

/// Re-embed a field into a different truncation box, dropping modes outside the new box.
pub fn retruncate(u: &SpectralField, k_max: i32) -> Result<SpectralField> {
    let mut out = SpectralField::zeros(*u.params(), k_max)?;
    for (i, mode) in u.lattice().modes().iter().enumerate() {
        if mode.max_norm() <= k_max {
            out.set(mode.components(), u.coeff(i))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn leray_examples() {
        let p2 = PhysicalParams::unit(2, 1.0).unwrap();
        let mut u = SpectralField::zeros(p2, 2).unwrap();
        u.set(&[0, 1], &[c(1.0), c(0.0)]).unwrap();
        u.set(&[1, 0], &[c(1.0), c(0.0)]).unwrap();
        let pu = leray_project(&u);
        assert_eq!(pu.get(&[0, 1]), vec![c(1.0), c(0.0)]);
        let along = pu.get(&[1, 0]);
        assert!(along.iter().all(|z| z.norm() < 1e-16));

        let p3 = PhysicalParams::unit(3, 1.0).unwrap();
        let mut v = SpectralField::zeros(p3, 2).unwrap();
        v.set(&[1, 1, 0], &[c(1.0), c(0.0), c(0.0)]).unwrap();
        let pv = leray_project(&v).get(&[1, 1, 0]);
        // û - (k·û) k / |k|² with k = (1,1,0), û = e₁
        let expect = [0.5, -0.5, 0.0];
        for (z, e) in pv.iter().zip(expect) {
            assert!((z - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn leray_is_idempotent_and_divergence_free() {
        let p = PhysicalParams::unit(3, 0.7).unwrap();
        let u = random_raw_field(p, 4, [1.0, 4.0], 11, AmplitudeProfile::Uniform).unwrap();
        let once = leray_project(&u);
        let twice = leray_project(&once);
        assert!(once.max_abs_diff(&twice).unwrap() <= 1e-14 * once.max_magnitude());
        assert!(once.is_divergence_free(1e-14));
    }

    #[test]
    fn heat_examples() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let mut u = SpectralField::zeros(p, 2).unwrap();
        u.set(&[1, 0], &[c(0.0), c(1.0)]).unwrap();
        assert_eq!(heat_propagate(&u, 0.0, 1.0).unwrap(), u);
        let h = heat_propagate(&u, 0.5, 1.0).unwrap().get(&[1, 0]);
        assert!((h[1].re - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert!(heat_propagate(&u, -1.0, 1.0).is_err());
        assert!(heat_propagate(&u, 1.0, 0.0).is_err());
    }

    #[test]
    fn heat_semigroup_and_commutation() {
        let p = PhysicalParams::new(2, 3.0, 0.3).unwrap();
        let u = random_field(p, 6, [1.0, 6.0], 5, AmplitudeProfile::Flat).unwrap();
        let a = heat_propagate(&heat_propagate(&u, 0.3, 1.0).unwrap(), 0.7, 1.0).unwrap();
        let b = heat_propagate(&u, 1.0, 1.0).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-14 * b.max_magnitude());

        let raw = random_raw_field(p, 6, [1.0, 6.0], 6, AmplitudeProfile::Flat).unwrap();
        let x = leray_project(&heat_propagate(&raw, 0.2, 1.0).unwrap());
        let y = heat_propagate(&leray_project(&raw), 0.2, 1.0).unwrap();
        assert!(x.max_abs_diff(&y).unwrap() <= 1e-15);
    }

    #[test]
    fn low_pass_and_retruncate() {
        let p = PhysicalParams::new(2, 1.0, 1.0).unwrap();
        let u = random_field(p, 5, [1.0, 5.0], 2, AmplitudeProfile::Flat).unwrap();
        let k0 = p.kappa0();
        let lp = low_pass(&u, 2.0 * k0);
        for (i, &kn) in u.lattice().norms().iter().enumerate() {
            let kept = lp.magnitude(i) > 0.0;
            assert_eq!(kept, kn <= 2.0 && u.magnitude(i) > 0.0);
        }
        let r = retruncate(&u, 8).unwrap();
        let back = retruncate(&r, 5).unwrap();
        assert_eq!(back, u);
    }
}
