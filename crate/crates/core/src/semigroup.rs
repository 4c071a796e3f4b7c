//! Heat-kernel smoothing, radius-schedule absorption, the convolution algebra
//! bound and the smoothed bilinear estimate, each evaluated on concrete fields
//! with explicit constants.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::norms::{gevrey_norm, GevreyWeight, LambdaSchedule};
use crate::spectral::{bilinear_fft, heat_propagate};
use crate::special::power_exp_sup;
use serde::{Deserialize, Serialize};

/// Relative slack allowed before a check counts as violated.
pub const CHECK_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingEstimateReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant_used: f64,
    pub ratio: f64,
    pub passed: bool,
}

impl SmoothingEstimateReport {
    pub fn new(lhs: f64, rhs: f64, constant_used: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self {
            lhs,
            rhs,
            constant_used,
            ratio,
            passed: ratio <= 1.0 + CHECK_SLACK,
        }
    }
}

/// `(β/(2e))^{β/2}`, the supremum of `x^{β/2} e^{-x}`.
pub fn heat_smoothing_constant(beta: f64) -> f64 {
    power_exp_sup(beta / 2.0)
}

/// `2^{max(γ, 1)}`.
pub fn algebra_constant(gamma: f64) -> f64 {
    2f64.powf(gamma.max(1.0))
}

/// `C_alg(γ) · ((1+δ-γ)/(2e))^{max(0, α)}` with `α = (1+δ-γ)/2`.
pub fn heat_bilinear_constant(gamma: f64, delta: f64) -> f64 {
    let alpha = 0.5 * (1.0 + delta - gamma);
    algebra_constant(gamma) * power_exp_sup(alpha.max(0.0))
}

/// `(νt)^{β/2} ‖e^{-νtA}u‖_{λ,σ+β} ≤ (β/(2e))^{β/2} ‖u‖_{λ,σ}`.
pub fn check_heat_smoothing(
    u: &SpectralField,
    lambda: f64,
    sigma: f64,
    beta: f64,
    t: f64,
) -> Result<SmoothingEstimateReport> {
    if !(t > 0.0) {
        return Err(Error::arg(format!("smoothing time must be positive, got {t}")));
    }
    if !(beta >= 0.0) {
        return Err(Error::arg(format!("smoothing gap β must be ≥ 0, got {beta}")));
    }
    let nu = u.params().nu();
    let heated = heat_propagate(u, t, 1.0)?;
    let lhs = (nu * t).powf(beta / 2.0) * gevrey_norm(&heated, GevreyWeight::new(lambda, sigma + beta)?)?;
    let c = heat_smoothing_constant(beta);
    let rhs = c * gevrey_norm(u, GevreyWeight::new(lambda, sigma)?)?;
    Ok(SmoothingEstimateReport::new(lhs, rhs, c))
}

/// `‖e^{-ν(t-s)A}u‖_{λ(t),σ} ≤ e^{1/2} ‖e^{-(ν/2)(t-s)A}u‖_{λ(s),σ}` for `λ(t) = √(νt)`.
pub fn check_schedule_absorption(
    u: &SpectralField,
    s: f64,
    t: f64,
    sigma: f64,
) -> Result<SmoothingEstimateReport> {
    if !(s >= 0.0 && s < t) {
        return Err(Error::arg(format!("absorption needs 0 ≤ s < t, got s = {s}, t = {t}")));
    }
    let nu = u.params().nu();
    let sched = LambdaSchedule::SqrtNuT;
    let full = heat_propagate(u, t - s, 1.0)?;
    let half = heat_propagate(u, t - s, 0.5)?;
    let lhs = gevrey_norm(&full, GevreyWeight::new(sched.at(nu, t), sigma)?)?;
    let c = 0.5f64.exp();
    let rhs = c * gevrey_norm(&half, GevreyWeight::new(sched.at(nu, s), sigma)?)?;
    Ok(SmoothingEstimateReport::new(lhs, rhs, c))
}

/// Untruncated convolution `(|û| * |v̂|)(k)` on the box `|k|_∞ ≤ 2K`, origin included.
pub struct AbsConvolution {
    pub k_max: i32,
    pub values: Vec<f64>,
}

impl AbsConvolution {
    pub fn side(&self) -> usize {
        (2 * self.k_max + 1) as usize
    }

    pub fn point(&self, mut idx: usize, dim: usize) -> [i32; 3] {
        let side = self.side();
        let mut c = [0i32; 3];
        for j in (0..dim).rev() {
            c[j] = (idx % side) as i32 - self.k_max;
            idx /= side;
        }
        c
    }

    pub fn get(&self, k: &[i32]) -> f64 {
        let side = self.side();
        let mut idx = 0usize;
        for &c in k {
            if c.abs() > self.k_max {
                return 0.0;
            }
            idx = idx * side + (c + self.k_max) as usize;
        }
        self.values[idx]
    }
}

fn full_support(u: &SpectralField) -> Vec<([i32; 3], f64)> {
    let mut out = Vec::new();
    for (i, mode) in u.lattice().modes().iter().enumerate() {
        let m = u.magnitude(i);
        if m > 0.0 {
            let mut k = [0i32; 3];
            k[..u.dim()].copy_from_slice(mode.components());
            out.push((k, m));
            out.push(([-k[0], -k[1], -k[2]], m));
        }
    }
    out
}

pub fn abs_convolution(u: &SpectralField, v: &SpectralField) -> Result<AbsConvolution> {
    u.ensure_compatible(v)?;
    let n = u.dim();
    let big = 2 * u.k_max();
    let side = (2 * big + 1) as usize;
    let mut values = vec![0.0; side.pow(n as u32)];
    let su = full_support(u);
    let sv = full_support(v);
    for (l, a) in &su {
        for (m, b) in &sv {
            let mut idx = 0usize;
            for j in 0..n {
                idx = idx * side + (l[j] + m[j] + big) as usize;
            }
            values[idx] += a * b;
        }
    }
    Ok(AbsConvolution { k_max: big, values })
}

/// `‖|u| * |v|‖_{λ,γ} ≤ C_alg(γ) κ₀^{-γ} ‖u‖_{λ,γ} ‖v‖_{λ,γ}`.
pub fn check_algebra_bound(
    u: &SpectralField,
    v: &SpectralField,
    lambda: f64,
    gamma: f64,
) -> Result<SmoothingEstimateReport> {
    if !(gamma >= 0.0) {
        return Err(Error::arg(format!("algebra exponent γ must be ≥ 0, got {gamma}")));
    }
    let w = GevreyWeight::new(lambda, gamma)?;
    let conv = abs_convolution(u, v)?;
    let n = u.dim();
    let k0 = u.params().kappa0();
    let mut lhs = 0.0;
    for (idx, &c) in conv.values.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let p = conv.point(idx, n);
        let kn = p[..n].iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
        let weight = if kn == 0.0 {
            if gamma == 0.0 { 1.0 } else { 0.0 }
        } else {
            (lambda * k0 * kn).exp() * kn.powf(gamma)
        };
        lhs += weight * c;
    }
    lhs *= k0.powf(gamma);
    let c = algebra_constant(gamma);
    let rhs = c * k0.powf(-gamma) * gevrey_norm(u, w)? * gevrey_norm(v, w)?;
    Ok(SmoothingEstimateReport::new(lhs, rhs, c))
}

/// `‖e^{-νtA}B[u,v]‖_{λ,δ} ≤ C κ₀^{1+δ-2γ} (νκ₀²t)^{-max(0,α)} ‖u‖_{λ,γ}‖v‖_{λ,γ}`.
pub fn check_heat_bilinear(
    u: &SpectralField,
    v: &SpectralField,
    lambda: f64,
    gamma: f64,
    delta: f64,
    t: f64,
) -> Result<SmoothingEstimateReport> {
    if !(t > 0.0) {
        return Err(Error::arg(format!("smoothing time must be positive, got {t}")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::arg(format!("γ must be ≥ 0, got {gamma}")));
    }
    let p = u.params();
    let k0 = p.kappa0();
    let b = heat_propagate(&bilinear_fft(u, v)?, t, 1.0)?;
    let lhs = gevrey_norm(&b, GevreyWeight::new(lambda, delta)?)?;
    let alpha = 0.5 * (1.0 + delta - gamma);
    let c = heat_bilinear_constant(gamma, delta);
    let wg = GevreyWeight::new(lambda, gamma)?;
    let rhs = c
        * k0.powf(1.0 + delta - 2.0 * gamma)
        * (p.viscous_rate() * t).powf(-alpha.max(0.0))
        * gevrey_norm(u, wg)?
        * gevrey_norm(v, wg)?;
    Ok(SmoothingEstimateReport::new(lhs, rhs, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::spectral::{random_field, AmplitudeProfile};
    use num_complex::Complex64;

    fn shear(p: PhysicalParams, k_max: i32, k: [i32; 2], amp: f64) -> SpectralField {
        let mut u = SpectralField::zeros(p, k_max).unwrap();
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let c = |x: f64| Complex64::new(x, 0.0);
        u.set(&k, &[c(-amp * k[1] as f64 / kn), c(amp * k[0] as f64 / kn)]).unwrap();
        u
    }

    #[test]
    fn heat_smoothing_is_tight_on_single_modes() {
        let p = PhysicalParams::new(2, 4.0, 0.2).unwrap();
        let k0 = p.kappa0();
        for beta in [0.25, 0.5, 1.0] {
            let u = shear(p, 6, [3, 1], 1.0);
            let k2 = 10.0;
            let t = beta / 2.0 / (p.nu() * k0 * k0 * k2);
            let r = check_heat_smoothing(&u, 0.1, -0.5, beta, t).unwrap();
            assert!(r.passed);
            assert!(r.ratio > 0.99 && r.ratio <= 1.0 + 1e-12, "ratio {}", r.ratio);
        }
        let u = shear(p, 6, [1, 0], 1.0);
        let r = check_heat_smoothing(&u, 0.0, 0.0, 0.0, 0.3).unwrap();
        assert_eq!(r.constant_used, 1.0);
        assert!(check_heat_smoothing(&u, 0.0, 0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn absorption_constant_is_approached() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u = shear(p, 12, [10, 0], 1.0);
        // s = 0 and νtκ₀²|k|² = 1 make the exponent exactly 1/2
        let t = 1.0 / 100.0;
        let r = check_schedule_absorption(&u, 0.0, t, 0.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
        let z = u.zeros_like();
        assert_eq!(check_schedule_absorption(&z, 0.0, t, 0.0).unwrap().ratio, 0.0);
        assert!(check_schedule_absorption(&u, 0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn algebra_on_two_pairs() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u = shear(p, 3, [1, 0], 1.0);
        let v = shear(p, 3, [0, 1], 2.0);
        let conv = abs_convolution(&u, &v).unwrap();
        let support: Vec<_> = conv.values.iter().filter(|&&x| x > 0.0).collect();
        assert_eq!(support.len(), 4);
        for k in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            assert_eq!(conv.get(&k), 2.0);
        }
        // γ = 0: Σ conv = ‖u‖‖v‖, so the ratio against 2‖u‖‖v‖ is exactly 1/2
        let r = check_algebra_bound(&u, &v, 0.0, 0.0).unwrap();
        assert!((r.ratio - 0.5).abs() < 1e-15);
        assert!(check_algebra_bound(&u, &v, 0.0, -1.0).is_err());
    }

    #[test]
    fn heat_bilinear_examples() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u = shear(p, 5, [1, 0], 1.0);
        assert_eq!(check_heat_bilinear(&u, &u, 0.1, 0.0, 0.0, 0.5).unwrap().lhs, 0.0);
        assert_eq!(heat_bilinear_constant(1.5, 0.5), algebra_constant(1.5));
        let a = random_field(p, 5, [1.0, 5.0], 1, AmplitudeProfile::Uniform).unwrap();
        let b = random_field(p, 5, [1.0, 5.0], 2, AmplitudeProfile::Uniform).unwrap();
        for t in [1e-3, 1e-2, 0.1, 1.0] {
            assert!(check_heat_bilinear(&a, &b, 0.0, 0.0, 0.0, t).unwrap().passed);
        }
    }

    #[test]
    fn reports_are_scale_invariant() {
        let p = PhysicalParams::new(3, 3.0, 0.5).unwrap();
        let u = random_field(p, 3, [1.0, 3.0], 3, AmplitudeProfile::Uniform).unwrap();
        let a = check_heat_smoothing(&u, 0.2, 0.3, 0.7, 0.1).unwrap();
        let b = check_heat_smoothing(&u.scaled(17.0), 0.2, 0.3, 0.7, 0.1).unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-13);
    }
}
