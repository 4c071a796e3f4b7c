use super::duhamel::{duhamel_trajectory, evaluate_phi};
use super::theorem::TheoremQuantities;
use super::{function_space_norms, FunctionSpaceNorms, TrajectorySample};
use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::field::SpectralField;
use crate::norms::wiener_norm;
use crate::spectral::BilinearFft;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    /// Stop once successive iterates differ by at most `tol · ‖Φ‖_Z`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iterations: usize,
    /// `‖u^{m+1} − u^m‖_Z` per iteration.
    pub differences: Vec<f64>,
    /// Successive quotients of `differences`.
    pub ratios: Vec<f64>,
    pub phi_norms: FunctionSpaceNorms,
    pub solution_norms: FunctionSpaceNorms,
    /// `‖u − Φ‖_Z`.
    pub distance_to_phi: f64,
    /// `‖u − Φ + w[u,u]‖_Z`, absolute and relative to `‖Φ‖_Z`.
    pub residual: f64,
    pub relative_residual: f64,
    pub weak_residual: Option<f64>,
}

impl PicardReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// Fixed point of `u = Φ − w[u, u]` on the grid, with the regularity indices
/// taken from `theorem`.
pub fn picard_iterate(
    u0: &SpectralField,
    forcing: &Forcing,
    theorem: &TheoremQuantities,
    times: &[f64],
    opts: PicardOptions,
) -> Result<(TrajectorySample, PicardReport)> {
    let t_end = *times.last().unwrap_or(&0.0);
    if t_end > theorem.t_star * (1.0 + 1e-12) {
        return Err(Error::arg(format!(
            "grid ends at {t_end}, beyond the existence time T* = {}",
            theorem.t_star
        )));
    }
    picard_solve(u0, forcing, times, theorem.sigma, theorem.beta, opts)
}

/// Picard iteration for given `(σ, β)` without reference to an existence window.
pub fn picard_solve(
    u0: &SpectralField,
    forcing: &Forcing,
    times: &[f64],
    sigma: f64,
    beta: f64,
    opts: PicardOptions,
) -> Result<(TrajectorySample, PicardReport)> {
    if !(opts.tol > 0.0) || opts.max_iters == 0 {
        return Err(Error::arg("picard needs tol > 0 and max_iters ≥ 1"));
    }
    let phi = evaluate_phi(u0, forcing, times)?;
    let bilinear = BilinearFft::for_field(u0);
    let phi_norms = function_space_norms(&phi, sigma, beta)?;
    let scale = phi_norms.z_norm;

    let mut u = phi.clone();
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut rising = 0;
    loop {
        let w = duhamel_trajectory(&u, &u, &bilinear)?;
        let next = phi.sub(&w)?;
        let d = function_space_norms(&next.sub(&u)?, sigma, beta)?.z_norm;
        if !d.is_finite() {
            return Err(Error::Nonconvergence { ratios });
        }
        if let Some(&prev) = differences.last() {
            let rho = if prev > 0.0 { d / prev } else { 0.0 };
            ratios.push(rho);
            rising = if rho > 1.0 { rising + 1 } else { 0 };
        }
        differences.push(d);
        u = next;
        if d <= opts.tol * scale {
            break;
        }
        if rising >= 3 || differences.len() >= opts.max_iters {
            return Err(Error::Nonconvergence { ratios });
        }
    }

    let w = duhamel_trajectory(&u, &u, &bilinear)?;
    let residual = function_space_norms(&u.sub(&phi)?.add_traj(&w)?, sigma, beta)?.z_norm;
    let distance_to_phi = function_space_norms(&u.sub(&phi)?, sigma, beta)?.z_norm;
    let solution_norms = function_space_norms(&u, sigma, beta)?;
    let weak = weak_residual(&u, forcing, &bilinear).ok();
    let report = PicardReport {
        iterations: differences.len(),
        differences,
        ratios,
        phi_norms,
        solution_norms,
        distance_to_phi,
        residual,
        relative_residual: if scale > 0.0 { residual / scale } else { residual },
        weak_residual: weak,
    };
    Ok((u, report))
}

impl TrajectorySample {
    fn add_traj(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }
}

/// Largest relative defect of `∂ₜu + νAu + B[u,u] − 𝒫f` at interior points of
/// the uniform part of the grid, with `∂ₜ` by central differences.
pub fn weak_residual(
    traj: &TrajectorySample,
    forcing: &Forcing,
    bilinear: &BilinearFft,
) -> Result<f64> {
    let t = &traj.times;
    let interior: Vec<usize> = (1..t.len() - 1)
        .filter(|&i| {
            let (a, b) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            (a - b).abs() <= 1e-9 * a
        })
        .collect();
    if interior.is_empty() {
        return Err(Error::arg("weak residual needs three equally spaced grid points"));
    }
    let rate = traj.fields[0].params().viscous_rate();
    let defects = interior
        .par_iter()
        .map(|&i| {
            let h = t[i + 1] - t[i];
            let u = &traj.fields[i];
            let dudt = traj.fields[i + 1].sub(&traj.fields[i - 1])?.scaled(0.5 / h);
            let au = u.map_radial(|k| rate * k * k);
            let b = bilinear.apply(u, u)?;
            let mut r = dudt.add(&au)?.add(&b)?;
            let mut size = wiener_norm(&dudt) + wiener_norm(&au) + wiener_norm(&b);
            if let Some(f) = forcing.at(t[i])? {
                r = r.sub(&f)?;
                size += wiener_norm(&f);
            }
            Ok(if size > 0.0 { wiener_norm(&r) / size } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}
