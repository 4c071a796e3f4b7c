//! Analyticity-radius estimates from modal decay.
//!
//! Every truncated field is entire, so the radius is defined operationally:
//! either as the slope of `log sup_shell |û|` against `−κ₀|k|`, or as the
//! largest `λ` whose Gevrey norm stays within a fixed multiple of the
//! Sobolev norm.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::mild::TheoremQuantities;
use crate::norms::{log_gevrey_norm, sobolev_l1_norm, GevreyWeight};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Coefficients below this fraction of the largest are treated as noise.
pub const NOISE_FLOOR: f64 = 1e-14;
/// `λ_overflow · κ₀`.
pub const LAMBDA_CAP: f64 = 20.0;
pub const DEFAULT_BUDGET: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMethod {
    LoglinearFit,
    GevreyBisect,
}

/// Largest coefficient magnitude in the unit shell `[m, m+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellMax {
    pub shell: usize,
    /// `|k|` of the mode attaining the maximum.
    pub k: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub lambda_hat: f64,
    /// Lattice `|k|` range used by the fit; the full populated range for bisection.
    pub fit_band: [f64; 2],
    pub residual: f64,
    pub shell_maxima: Vec<ShellMax>,
    pub method: RadiusMethod,
    /// The estimate hit the overflow cap; the field is numerically entire.
    pub capped: bool,
    /// Line `ln sup ≈ intercept − λ̂ κ₀|k| − σ ln|k|`.
    pub intercept: f64,
    pub sigma: f64,
}

pub fn shell_maxima(u: &SpectralField) -> Vec<ShellMax> {
    let norms = u.lattice().norms();
    let shells = norms.last().map_or(0, |k| k.floor() as usize + 1);
    let mut out: Vec<ShellMax> = (0..shells)
        .map(|m| ShellMax { shell: m, k: m as f64, sup: 0.0 })
        .collect();
    for (i, &k) in norms.iter().enumerate() {
        let s = &mut out[k.floor() as usize];
        let a = u.magnitude(i);
        if a > s.sup {
            s.sup = a;
            s.k = k;
        }
    }
    out
}

/// Least-squares slope of `ln sup + σ ln|k|` against `−κ₀|k|` over shells
/// whose maximising `|k|` lies in `band` (default `[K/4, 3K/4]`).
pub fn estimate_radius_fit(
    u: &SpectralField,
    band: Option<[f64; 2]>,
    sigma: f64,
) -> Result<RadiusEstimate> {
    let k_max = u.k_max() as f64;
    let band = band.unwrap_or([k_max / 4.0, 3.0 * k_max / 4.0]);
    if !(band[0] >= 0.0 && band[1] > band[0]) {
        return Err(Error::arg(format!("fit band [{}, {}] is empty", band[0], band[1])));
    }
    let shells = shell_maxima(u);
    let floor = NOISE_FLOOR * u.max_magnitude();
    let k0 = u.params().kappa0();
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|s| s.sup > floor && s.sup > 0.0 && s.k >= band[0] && s.k <= band[1])
        .map(|s| (-k0 * s.k, s.sup.ln() + sigma * s.k.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Estimation(format!(
            "only {} populated shells in the fit band [{}, {}]; need at least 4",
            pts.len(),
            band[0],
            band[1]
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual =
        (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RadiusEstimate {
        lambda_hat: slope.max(0.0),
        fit_band: band,
        residual,
        shell_maxima: shells,
        method: RadiusMethod::LoglinearFit,
        capped: false,
        intercept,
        sigma,
    })
}

/// Largest `λ ≤ 20/κ₀` with `‖u‖_{λ,σ} ≤ budget · ‖u‖_{0,σ}`, to `1e-3/κ₀`.
pub fn estimate_radius_bisect(u: &SpectralField, sigma: f64, budget: f64) -> Result<RadiusEstimate> {
    if !(budget > 1.0) || !budget.is_finite() {
        return Err(Error::arg(format!("growth budget must exceed 1, got {budget}")));
    }
    let k0 = u.params().kappa0();
    let shells = shell_maxima(u);
    let norms = u.lattice().norms();
    let floor = NOISE_FLOOR * u.max_magnitude();
    let support: Vec<f64> = (0..u.len())
        .filter(|&i| u.magnitude(i) > floor && u.magnitude(i) > 0.0)
        .map(|i| norms[i])
        .collect();
    let (lo_k, hi_k) = support
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &k| (a.min(k), b.max(k)));
    if support.is_empty() {
        return Err(Error::Estimation("field is identically zero".into()));
    }
    let cap = LAMBDA_CAP / k0;
    let estimate = |lambda_hat: f64, capped: bool| RadiusEstimate {
        lambda_hat,
        fit_band: [lo_k, hi_k],
        residual: 0.0,
        shell_maxima: shells.clone(),
        method: RadiusMethod::GevreyBisect,
        capped,
        intercept: 0.0,
        sigma,
    };
    if hi_k - lo_k <= 1e-12 * hi_k {
        return Ok(estimate(cap, true));
    }
    let limit = budget.ln() + sobolev_l1_norm(u, sigma).ln();
    let within = |lambda: f64| log_gevrey_norm(u, GevreyWeight { lambda, sigma }) <= limit;
    if within(cap) {
        return Ok(estimate(cap, true));
    }
    let (mut a, mut b) = (0.0, cap);
    let tol = 1e-3 / k0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if within(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(estimate(0.5 * (a + b), false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusComparison {
    pub lambda_hat: f64,
    pub method: RadiusMethod,
    pub radius_bound: f64,
    pub ratio: f64,
    pub hypothesis: bool,
    pub verdict: Verdict,
}

/// The bound is a lower bound: pass iff `λ̂ ≥ radius_bound` under the hypothesis.
pub fn compare_to_bound(estimate: &RadiusEstimate, theorem: &TheoremQuantities) -> RadiusComparison {
    let ratio = estimate.lambda_hat / theorem.radius_bound;
    let verdict = match (theorem.hypothesis, ratio >= 1.0) {
        (false, _) => Verdict::Inconclusive,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    };
    RadiusComparison {
        lambda_hat: estimate.lambda_hat,
        method: estimate.method,
        radius_bound: theorem.radius_bound,
        ratio,
        hypothesis: theorem.hypothesis,
        verdict,
    }
}

/// CSV of shell index, shell sup and, for fits, the fitted envelope.
pub fn write_shell_csv<W: Write>(estimate: &RadiusEstimate, k0: f64, mut out: W) -> Result<()> {
    writeln!(out, "shell,k,shell_sup,fitted")?;
    for s in &estimate.shell_maxima {
        let fitted = match estimate.method {
            RadiusMethod::LoglinearFit if s.k > 0.0 => {
                (estimate.intercept - estimate.lambda_hat * k0 * s.k - estimate.sigma * s.k.ln()).exp()
            }
            _ => f64::NAN,
        };
        writeln!(out, "{},{},{:e},{:e}", s.shell, s.k, s.sup, fitted)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::spectral::{heat_propagate, random_field, AmplitudeProfile};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn decaying(p: PhysicalParams, k_max: i32, profile: impl Fn(f64) -> f64) -> SpectralField {
        let u = random_field(p, k_max, [1.0, k_max as f64], 17, AmplitudeProfile::Flat).unwrap();
        let mut out = u.clone();
        for i in 0..u.len() {
            if u.magnitude(i) == 0.0 {
                continue;
            }
            let k = u.lattice().norms()[i];
            let s = profile(k) / u.magnitude(i);
            for c in out.coeff_mut(i) {
                *c *= s;
            }
        }
        out
    }

    #[test]
    fn exact_exponential_decay_is_recovered() {
        let p = PhysicalParams::new(2, 4.0, 0.1).unwrap();
        let k0 = p.kappa0();
        let u = decaying(p, 24, |k| (-0.7 * k0 * k).exp());
        let est = estimate_radius_fit(&u, None, 0.0).unwrap();
        assert!((est.lambda_hat - 0.7).abs() < 1e-10, "{}", est.lambda_hat);
        let v = decaying(p, 24, |k| k.powf(-2.0) * (-0.7 * k0 * k).exp());
        let est = estimate_radius_fit(&v, None, 2.0).unwrap();
        assert!((est.lambda_hat - 0.7).abs() < 1e-8);
    }

    #[test]
    fn bisection_recovers_the_budget_radius() {
        let p = PhysicalParams::unit(3, 1.0).unwrap();
        let lambda0 = 0.6;
        let u = decaying(p, 12, |k| (-lambda0 * k).exp());
        let target = lambda0 * 0.95;
        let budget = (log_gevrey_norm(&u, GevreyWeight { lambda: target, sigma: 0.0 })
            - sobolev_l1_norm(&u, 0.0).ln())
        .exp();
        let est = estimate_radius_bisect(&u, 0.0, budget).unwrap();
        assert!((est.lambda_hat - lambda0).abs() < 0.1 * lambda0);
        assert!((est.lambda_hat - target).abs() < 2e-3);
        assert!(estimate_radius_bisect(&u, 0.0, 1.0).is_err());
    }

    #[test]
    fn single_pair_is_entire() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let mut u = SpectralField::zeros(p, 4).unwrap();
        u.set(&[0, 2], &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        let est = estimate_radius_bisect(&u, 0.0, DEFAULT_BUDGET).unwrap();
        assert!(est.capped && est.lambda_hat == LAMBDA_CAP);
        assert!(matches!(estimate_radius_fit(&u, None, 0.0), Err(Error::Estimation(_))));
    }

    #[test]
    fn heat_flow_only_increases_the_fitted_radius() {
        let p = PhysicalParams::unit(2, 0.05).unwrap();
        let u = decaying(p, 20, |k| (-0.3 * k).exp());
        let before = estimate_radius_fit(&u, None, 0.0).unwrap().lambda_hat;
        for t in [0.01, 0.1, 1.0] {
            let after = estimate_radius_fit(&heat_propagate(&u, t, 1.0).unwrap(), None, 0.0)
                .unwrap()
                .lambda_hat;
            assert!(after >= before - 1e-12);
        }
    }

    #[test]
    fn truncation_change_is_small_for_interior_bands() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let a = decaying(p, 16, |k| (-0.5 * k).exp());
        let b = decaying(p, 24, |k| (-0.5 * k).exp());
        let ea = estimate_radius_fit(&a, Some([4.0, 12.0]), 0.0).unwrap().lambda_hat;
        let eb = estimate_radius_fit(&b, Some([4.0, 12.0]), 0.0).unwrap().lambda_hat;
        assert!((ea - eb).abs() < 0.02 * ea);
    }

    #[test]
    fn shell_csv_has_one_row_per_shell() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u = decaying(p, 8, |k| (-0.5 * k).exp());
        let est = estimate_radius_fit(&u, None, 0.0).unwrap();
        let mut out = Vec::new();
        write_shell_csv(&est, 1.0, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + est.shell_maxima.len());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn estimates_ignore_overall_scale(c in 1e-3f64..1e3, seed in 0u64..1000) {
            let p = PhysicalParams::unit(2, 1.0).unwrap();
            let u = heat_propagate(
                &random_field(p, 12, [1.0, 12.0], seed, AmplitudeProfile::Uniform).unwrap(),
                0.02,
                1.0,
            )
            .unwrap();
            let v = u.scaled(c);
            let (f1, f2) = (
                estimate_radius_fit(&u, None, 0.0).unwrap().lambda_hat,
                estimate_radius_fit(&v, None, 0.0).unwrap().lambda_hat,
            );
            prop_assert!((f1 - f2).abs() <= 1e-9 * f1.max(1.0));
            let (b1, b2) = (
                estimate_radius_bisect(&u, 0.0, 50.0).unwrap().lambda_hat,
                estimate_radius_bisect(&v, 0.0, 50.0).unwrap().lambda_hat,
            );
            prop_assert!((b1 - b2).abs() <= 2e-3);
        }
    }
}
