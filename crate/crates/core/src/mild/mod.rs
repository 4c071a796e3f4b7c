//! Mild solutions `u = Φ − w[u, u]` on a time grid: the linear part `Φ`,
//! the Duhamel integral `w`, Picard iteration, an exponential integrator for
//! long runs and the theorem quantities that size the existence window.

mod duhamel;
mod etd;
mod picard;
mod theorem;
pub mod weights;

pub use duhamel::{duhamel_trajectory, evaluate_phi, evaluate_w};
pub use etd::EtdStepper;
pub use picard::{picard_iterate, picard_solve, weak_residual, PicardOptions, PicardReport};
pub use theorem::{
    beta_exponent, beta_exponent_exact, c_linear_i, c_linear_ii, c_nonlinear, c_beta_integral,
    radius_exponent_exact, theorem_quantities, TheoremId, TheoremQuantities,
};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::norms::{gevrey_norm, GevreyWeight, LambdaSchedule};
use serde::{Deserialize, Serialize};

/// Fields sampled on a strictly increasing grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    pub schedule: LambdaSchedule,
}

impl TrajectorySample {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        check_grid(&times)?;
        if fields.len() != times.len() {
            return Err(Error::arg(format!(
                "trajectory has {} times but {} fields",
                times.len(),
                fields.len()
            )));
        }
        for f in &fields[1..] {
            fields[0].ensure_compatible(f)?;
        }
        Ok(Self {
            times,
            fields,
            schedule: LambdaSchedule::SqrtNuT,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty grid")
    }

    pub fn last(&self) -> &SpectralField {
        self.fields.last().expect("nonempty grid")
    }

    /// Index of the grid point equal to `t` (relative tolerance 1e-12).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(s.abs()))
            .ok_or_else(|| Error::arg(format!("t = {t} is not a grid point")))
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.times != other.times {
            return Err(Error::config("trajectories live on different time grids"));
        }
        self.fields[0].ensure_compatible(&other.fields[0])
    }

    /// Pointwise `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(x, y)| x.axpy(a, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: self.times.clone(),
            fields,
            schedule: self.schedule,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.len() < 2 || times[0] != 0.0 {
        return Err(Error::arg("time grid needs at least two points and must start at 0"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::arg("time grid must be strictly increasing and finite"));
    }
    Ok(())
}

/// Uniform grid of `steps` intervals on `[0, t_end]` whose first interval is
/// split geometrically `refine` times: `0, h/2^refine, …, h/2, h, 2h, …`.
pub fn time_grid(t_end: f64, steps: usize, refine: u32) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || !t_end.is_finite() || steps == 0 {
        return Err(Error::arg(format!(
            "time grid needs t_end > 0 and steps ≥ 1, got {t_end} and {steps}"
        )));
    }
    let h = t_end / steps as f64;
    let mut grid = vec![0.0];
    for j in (1..=refine).rev() {
        grid.push(h * 0.5f64.powi(j as i32));
    }
    grid.extend((1..steps).map(|i| i as f64 * h));
    grid.push(t_end);
    Ok(grid)
}

/// Dimensionless trajectory norms along `λ(t) = √(νt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpaceNorms {
    pub x_norm: f64,
    pub y_norm: f64,
    pub z_norm: f64,
    pub beta: f64,
    pub sigma: f64,
    pub horizon: f64,
}

/// `X = κ₀^{-σ}/(νκ₀) max_t ‖u(t)‖_{λ(t),σ}` and
/// `Y = ν^{β/2} κ₀^{-σ}/(νκ₀) max_{t>0} (t ∧ (νκ₀²)^{-1})^{β/2} ‖u(t)‖_{λ(t),σ+β}`.
pub fn function_space_norms(
    traj: &TrajectorySample,
    sigma: f64,
    beta: f64,
) -> Result<FunctionSpaceNorms> {
    let p = *traj.fields[0].params();
    let (nu, k0) = (p.nu(), p.kappa0());
    let tau = 1.0 / p.viscous_rate();
    let scale = k0.powf(-sigma) / (nu * k0);
    let mut x: f64 = 0.0;
    let mut y: f64 = 0.0;
    for (&t, u) in traj.times.iter().zip(&traj.fields) {
        let lambda = traj.schedule.at(nu, t);
        x = x.max(gevrey_norm(u, GevreyWeight::new(lambda, sigma)?)?);
        if t > 0.0 {
            let weight = (nu * t.min(tau)).powf(beta / 2.0);
            y = y.max(weight * gevrey_norm(u, GevreyWeight::new(lambda, sigma + beta)?)?);
        }
    }
    let (x_norm, y_norm) = (scale * x, scale * y);
    Ok(FunctionSpaceNorms {
        x_norm,
        y_norm,
        z_norm: x_norm.max(y_norm),
        beta,
        sigma,
        horizon: traj.horizon(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::spectral::{random_field, AmplitudeProfile};

    #[test]
    fn grid_is_refined_near_zero() {
        let g = time_grid(1.0, 4, 3).unwrap();
        assert_eq!(g, vec![0.0, 0.03125, 0.0625, 0.125, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(time_grid(2.0, 2, 0).unwrap(), vec![0.0, 1.0, 2.0]);
        assert!(time_grid(0.0, 2, 0).is_err());
    }

    #[test]
    fn z_is_max_of_x_and_y() {
        let p = PhysicalParams::new(2, 3.0, 0.2).unwrap();
        let u = random_field(p, 5, [1.0, 5.0], 3, AmplitudeProfile::Uniform).unwrap();
        let times = time_grid(1.0, 5, 2).unwrap();
        let fields = times
            .iter()
            .map(|&t| crate::spectral::heat_propagate(&u, t, 1.0).unwrap())
            .collect();
        let traj = TrajectorySample::new(times, fields).unwrap();
        for beta in [0.0, 0.25, 0.9] {
            let n = function_space_norms(&traj, -0.5, beta).unwrap();
            assert_eq!(n.z_norm, n.x_norm.max(n.y_norm));
            assert!(n.x_norm > 0.0 && n.y_norm > 0.0);
        }
        let n0 = function_space_norms(&traj, 0.0, 0.0).unwrap();
        assert!(n0.y_norm <= n0.x_norm);
    }

    #[test]
    fn y_weight_saturates_after_the_viscous_time() {
        // single mode at |k| = 1 with κ₀ = ν = 1: heat decay and growth of e^{√t} balance
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let mut u = SpectralField::zeros(p, 2).unwrap();
        let one = num_complex::Complex64::new(1.0, 0.0);
        let zero = num_complex::Complex64::new(0.0, 0.0);
        u.set(&[1, 0], &[zero, one]).unwrap();
        let times = vec![0.0, 0.5, 1.0, 4.0];
        let fields = times.iter().map(|_| u.clone()).collect();
        let traj = TrajectorySample::new(times, fields).unwrap();
        let n = function_space_norms(&traj, 0.0, 0.5).unwrap();
        let want = 2.0 * (4f64).sqrt().exp();
        assert!((n.y_norm - want).abs() < 1e-12 * want);
        assert!((n.x_norm - want).abs() < 1e-12 * want);
    }
}
