use super::leray_project_in_place;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::params::PhysicalParams;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Radial envelope of `|û(k)|` for generated fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplitudeProfile {
    /// `|û(k)| = 1`.
    Flat,
    /// `|û(k)|` uniform on `[0, 1)`.
    Uniform,
    /// `|û(k)| = exp(-λ₀ κ₀ |k|)`.
    Exponential { lambda0: f64 },
    /// `|û(k)| = |k|^{-exponent}`.
    PowerLaw { exponent: f64 },
}

impl AmplitudeProfile {
    fn amplitude(&self, kappa0: f64, kn: f64, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            AmplitudeProfile::Flat => 1.0,
            AmplitudeProfile::Uniform => rng.random::<f64>(),
            AmplitudeProfile::Exponential { lambda0 } => (-lambda0 * kappa0 * kn).exp(),
            AmplitudeProfile::PowerLaw { exponent } => kn.powf(-exponent),
        }
    }
}

fn validate_band(k_max: i32, band: [f64; 2]) -> Result<()> {
    let [lo, hi] = band;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || hi > k_max as f64 {
        return Err(Error::arg(format!(
            "band [{lo}, {hi}] must satisfy lo ≤ hi ≤ K = {k_max}"
        )));
    }
    Ok(())
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn generate(
    params: PhysicalParams,
    k_max: i32,
    band: [f64; 2],
    seed: u64,
    profile: AmplitudeProfile,
    solenoidal: bool,
) -> Result<SpectralField> {
    validate_band(k_max, band)?;
    let mut u = SpectralField::zeros(params, k_max)?;
    let lattice = std::sync::Arc::clone(u.lattice());
    let n = params.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut populated = 0usize;
    for (i, mode) in lattice.modes().iter().enumerate() {
        let kn = mode.norm();
        if kn < band[0] || kn > band[1] {
            continue;
        }
        let k = mode.components();
        // resample in the (measure-zero) event that the projection vanishes
        let dir = loop {
            let mut z = gaussian_vector(&mut rng, n);
            if solenoidal {
                let dot: Complex64 = (0..n).map(|j| z[j] * k[j] as f64).sum();
                let s = dot / mode.norm_sq() as f64;
                for j in 0..n {
                    z[j] -= s * k[j] as f64;
                }
            }
            let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                break z.into_iter().map(|c| c / norm).collect::<Vec<_>>();
            }
        };
        let amp = profile.amplitude(params.kappa0(), kn, &mut rng);
        for (dst, d) in u.coeff_mut(i).iter_mut().zip(dir) {
            *dst = d * amp;
        }
        populated += 1;
    }
    if populated == 0 {
        return Err(Error::arg(format!(
            "band [{}, {}] contains no lattice points",
            band[0], band[1]
        )));
    }
    if solenoidal {
        leray_project_in_place(&mut u);
    }
    Ok(u)
}

/// Deterministic random divergence-free field supported on `band[0] ≤ |k| ≤ band[1]`,
/// with `|û(k)|` following `profile` exactly (directions and phases are random).
pub fn random_field(
    params: PhysicalParams,
    k_max: i32,
    band: [f64; 2],
    seed: u64,
    profile: AmplitudeProfile,
) -> Result<SpectralField> {
    generate(params, k_max, band, seed, profile, true)
}

/// Like [`random_field`] but without the solenoidal constraint.
pub fn random_raw_field(
    params: PhysicalParams,
    k_max: i32,
    band: [f64; 2],
    seed: u64,
    profile: AmplitudeProfile,
) -> Result<SpectralField> {
    generate(params, k_max, band, seed, profile, false)
}

/// 2D Taylor-Green vortex `A (sin κ₀x cos κ₀y, -cos κ₀x sin κ₀y)`.
pub fn taylor_green(params: PhysicalParams, k_max: i32, amplitude: f64) -> Result<SpectralField> {
    if params.dim() != 2 {
        return Err(Error::arg("the Taylor-Green vortex is defined in two dimensions"));
    }
    let mut u = SpectralField::zeros(params, k_max)?;
    let q = Complex64::new(0.0, amplitude / 4.0);
    u.set(&[1, 1], &[-q, q])?;
    u.set(&[1, -1], &[-q, -q])?;
    Ok(u)
}
