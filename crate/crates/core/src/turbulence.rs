//! Finite-horizon turbulence diagnostics: dissipation rates and length
//! scales, dyadic band spectra with power-law fits, and the Chebyshev-set
//! fractions over snapshot ensembles.
//!
//! Averages over the invariant measure are replaced by trapezoidal time means.

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::norms::{grad_l2_norm, l2_norm, laplacian_l2_norm, wiener_norm};
use crate::params::PhysicalParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Trapezoidal mean of a sampled series over `[t₀, t₀ + t_avg]`.
pub fn time_average(times: &[f64], values: &[f64], t_avg: f64) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::arg("time series needs one value per sample time"));
    }
    if !(t_avg > 0.0) {
        return Err(Error::arg(format!("averaging horizon must be positive, got {t_avg}")));
    }
    let t0 = times[0];
    let end = t0 + t_avg;
    let last = *times.last().expect("nonempty");
    if last < end * (1.0 - 1e-12) - 1e-300 {
        return Err(Error::arg(format!(
            "averaging horizon {t_avg} exceeds the series span {}",
            last - t0
        )));
    }
    let mut acc = 0.0;
    for i in 0..times.len() - 1 {
        let (a, b) = (times[i], times[i + 1].min(end));
        if b <= a {
            break;
        }
        let vb = if times[i + 1] <= end {
            values[i + 1]
        } else {
            values[i] + (values[i + 1] - values[i]) * (b - a) / (times[i + 1] - a)
        };
        acc += 0.5 * (b - a) * (values[i] + vb);
    }
    Ok(acc / t_avg)
}

/// Squared norms of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSample {
    pub t: f64,
    /// `‖u‖²_{L²}`.
    pub l2_sq: f64,
    /// `‖A^{1/2}u‖²_{L²}`.
    pub grad_sq: f64,
    /// `‖Au‖²_{L²}`.
    pub lap_sq: f64,
    /// Dimensionless `(νκ₀)^{-1}‖u‖_𝒲`.
    pub wiener: f64,
}

impl DiagnosticSample {
    pub fn of(t: f64, u: &SpectralField) -> Self {
        let p = u.params();
        Self {
            t,
            l2_sq: l2_norm(u).powi(2),
            grad_sq: grad_l2_norm(u).powi(2),
            lap_sq: laplacian_l2_norm(u).powi(2),
            wiener: wiener_norm(u) / (p.nu() * p.kappa0()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    /// `νκ₀ⁿ⟨‖∇u‖²⟩`.
    pub eps: f64,
    pub eps_sup: f64,
    /// `νκ₀ⁿ⟨‖Δu‖²⟩`.
    pub eta: f64,
    pub lambda_eps: f64,
    pub lambda_eta: f64,
    pub kappa_eta: f64,
    pub kappa_sigma: f64,
    pub t_avg: f64,
}

pub fn dissipation_report(
    params: &PhysicalParams,
    samples: &[DiagnosticSample],
    t_avg: f64,
) -> Result<DissipationReport> {
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let grad: Vec<f64> = samples.iter().map(|s| s.grad_sq).collect();
    let lap: Vec<f64> = samples.iter().map(|s| s.lap_sq).collect();
    let (nu, k0) = (params.nu(), params.kappa0());
    let norm = nu * k0.powi(params.dim() as i32);
    let mean_grad = time_average(&times, &grad, t_avg)?;
    let mean_lap = time_average(&times, &lap, t_avg)?;
    let end = times[0] + t_avg;
    let eps_sup = norm
        * samples
            .iter()
            .filter(|s| s.t <= end * (1.0 + 1e-12))
            .map(|s| s.grad_sq)
            .fold(0.0, f64::max);
    let eps = norm * mean_grad;
    let eta = norm * mean_lap;
    Ok(DissipationReport {
        eps,
        eps_sup: eps_sup.max(eps),
        eta,
        lambda_eps: (nu.powi(3) / eps).powf(0.25),
        lambda_eta: (nu.powi(3) / eta).powf(1.0 / 6.0),
        kappa_eta: (eta / (nu * nu)).powf(1.0 / 6.0),
        kappa_sigma: (mean_lap / mean_grad).sqrt(),
        t_avg,
    })
}

/// `κ₀ⁿ[⟨(f,u)⟩ − (E(T) − E(0))/T]`, the dissipation implied by the energy budget
/// `½ d‖u‖²/dt + ν‖∇u‖² = (f, u)`.
pub fn eps_from_energy_balance(
    params: &PhysicalParams,
    times: &[f64],
    power: &[f64],
    l2_sq: &[f64],
) -> Result<f64> {
    let t_avg = times.last().copied().unwrap_or(0.0) - times.first().copied().unwrap_or(0.0);
    let mean_power = time_average(times, power, t_avg)?;
    let de = 0.5 * (l2_sq[l2_sq.len() - 1] - l2_sq[0]) / t_avg;
    Ok(params.kappa0().powi(params.dim() as i32) * (mean_power - de))
}

/// `κ₀ⁿ‖(P_{κ₂} − P_{κ₁})u‖²_{L²}`: modes with `κ₁ < κ₀|k| ≤ κ₂`.
pub fn band_l2_sq(u: &SpectralField, kappa1: f64, kappa2: f64) -> f64 {
    let p = u.params();
    let k0 = p.kappa0();
    let norms = u.lattice().norms();
    let sum: f64 = (0..u.len())
        .filter(|&i| {
            let k = k0 * norms[i];
            k > kappa1 * (1.0 + 1e-12) && k <= kappa2 * (1.0 + 1e-12)
        })
        .map(|i| u.magnitude(i).powi(2))
        .sum();
    k0.powi(p.dim() as i32) * p.parseval_factor() * 2.0 * sum
}

/// Time-averaged band energy `e_{κ₁,κ₂}` over snapshots.
pub fn band_energy(
    times: &[f64],
    fields: &[SpectralField],
    kappa1: f64,
    kappa2: f64,
    t_avg: f64,
) -> Result<f64> {
    let first = fields.first().ok_or_else(|| Error::arg("no snapshots"))?;
    let k0 = first.params().kappa0();
    if !(kappa1 >= 0.0 && kappa2 > kappa1) {
        return Err(Error::arg(format!("empty band ({kappa1}, {kappa2}]")));
    }
    let populated = first
        .lattice()
        .norms()
        .iter()
        .any(|&k| k0 * k > kappa1 * (1.0 + 1e-12) && k0 * k <= kappa2 * (1.0 + 1e-12));
    if !populated {
        return Err(Error::arg(format!("band ({kappa1}, {kappa2}] holds no lattice modes")));
    }
    let values: Vec<f64> = fields.par_iter().map(|u| band_l2_sq(u, kappa1, kappa2)).collect();
    time_average(times, &values, t_avg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// `(κ, e_{κ,2κ})` for dyadic `κ`.
    pub bands: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    pub fit_range: [f64; 2],
    pub fit_residual: f64,
}

/// Lower edges `κ_start·2^j` of the dyadic bands covering the truncation box.
pub fn dyadic_edges(u: &SpectralField, kappa_start: f64) -> Vec<f64> {
    let top = u.params().kappa0() * u.lattice().norms().last().copied().unwrap_or(0.0);
    let mut edges = vec![];
    let mut k = kappa_start;
    while k < top {
        edges.push(k);
        k *= 2.0;
    }
    edges
}

/// Time-averaged dyadic band energies `(κ, e_{κ,2κ})`.
pub fn dyadic_spectrum(
    times: &[f64],
    fields: &[SpectralField],
    kappa_start: f64,
    t_avg: f64,
) -> Result<Vec<(f64, f64)>> {
    let first = fields.first().ok_or_else(|| Error::arg("no snapshots"))?;
    dyadic_edges(first, kappa_start)
        .into_iter()
        .map(|k| {
            let values: Vec<f64> = fields.par_iter().map(|u| band_l2_sq(u, k, 2.0 * k)).collect();
            Ok((k, time_average(times, &values, t_avg)?))
        })
        .collect()
}

/// Least squares of `ln e` against `ln κ` over bands with `κ` in `range` and `e > 0`.
pub fn fit_power_law(bands: &[(f64, f64)], range: Option<[f64; 2]>) -> Result<SpectrumReport> {
    let range = range.unwrap_or([0.0, f64::INFINITY]);
    let pts: Vec<(f64, f64)> = bands
        .iter()
        .filter(|(k, e)| *k >= range[0] && *k <= range[1] && *e > 0.0)
        .map(|(k, e)| (k.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Estimation(format!(
            "power-law fit needs at least two populated bands, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual =
        (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    let used: Vec<f64> = pts.iter().map(|p| p.0.exp()).collect();
    Ok(SpectrumReport {
        bands: bands.to_vec(),
        fitted_exponent: slope,
        fit_range: [used[0], used[used.len() - 1]],
        fit_residual: residual,
    })
}

pub fn write_spectrum_csv<W: Write>(bands: &[(f64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "kappa,e_band")?;
    for (k, e) in bands {
        writeln!(out, "{k},{e:e}")?;
    }
    Ok(())
}

/// `𝓛 = r(ln G)^{3/2}[1 + ln(r^{5/2} G^{1/2} (ln G)^{3/4})]` with `r = κ̄/κ₀`.
pub fn log_factor(g: f64, kbar_ratio: f64) -> Result<f64> {
    if !(g > 1.0) {
        return Err(Error::Domain(format!("the log factor needs G > 1, got {g}")));
    }
    if !(kbar_ratio >= 1.0) {
        return Err(Error::Domain(format!("the log factor needs κ̄/κ₀ ≥ 1, got {kbar_ratio}")));
    }
    let lg = g.ln();
    Ok(kbar_ratio * lg.powf(1.5) * (1.0 + (kbar_ratio.powf(2.5) * g.sqrt() * lg.powf(0.75)).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "3d")]
    ThreeD,
}

/// Membership statistics of one threshold set `{X ≥ threshold}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub name: String,
    /// The calibrated mean-square scale `c²S²` that `⟨X²⟩` should not exceed.
    pub mean_square_scale: f64,
    pub mean_square: f64,
    pub threshold: f64,
    pub fraction: f64,
    /// `⟨X²⟩/threshold²`, the empirical Markov bound.
    pub markov_bound: f64,
    pub predicted_max: f64,
    pub mean_bound_holds: bool,
    pub within_prediction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevReport {
    pub p: f64,
    pub g: f64,
    pub regime: Regime,
    pub log_factor: Option<f64>,
    pub snapshots: usize,
    pub sets: Vec<SetReport>,
}

fn set_report(
    name: &str,
    values: &[f64],
    scale: f64,
    coefficient: f64,
    widen: f64,
    predicted: f64,
) -> SetReport {
    let threshold = coefficient * widen * scale;
    let n = values.len() as f64;
    let mean_square = values.iter().map(|x| x * x).sum::<f64>() / n;
    let fraction = values.iter().filter(|&&x| x >= threshold).count() as f64 / n;
    let mss = (coefficient * scale).powi(2);
    SetReport {
        name: name.into(),
        mean_square_scale: mss,
        mean_square,
        threshold,
        fraction,
        markov_bound: mean_square / (threshold * threshold),
        predicted_max: predicted,
        mean_bound_holds: mean_square <= mss,
        within_prediction: fraction <= predicted,
    }
}

/// Fractions of snapshots in the large-norm sets.
///
/// 3D: `‖u‖ ≥ c_A√(2/p) ν κ₀^{-1/2}(κ₀/κ̄)^{1/2}G^{1/2}` and
/// `‖A^{1/2}u‖ ≥ c_B√(2/p) ν κ₀^{1/2}(κ₀/κ̄)^{1/4}G^{3/4}`, each predicted at most `p/2`.
/// 2D: `‖u‖_𝒲 ≥ c_W√(𝓛/p) G^{1/2}`, predicted at most `p`.
pub fn chebyshev_fractions(
    ensemble: &[SpectralField],
    p: f64,
    regime: Regime,
    g: f64,
    kbar_ratio: f64,
    calibration: &Calibration,
) -> Result<ChebyshevReport> {
    if ensemble.len() < 10 {
        return Err(Error::arg(format!(
            "Chebyshev fractions need at least 10 snapshots, got {}",
            ensemble.len()
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::arg(format!("p must lie in (0, 1], got {p}")));
    }
    let params = *ensemble[0].params();
    let want_dim = if regime == Regime::TwoD { 2 } else { 3 };
    if params.dim() != want_dim {
        return Err(Error::Domain(format!("{regime:?} sets need n = {want_dim}")));
    }
    let (nu, k0) = (params.nu(), params.kappa0());
    let samples: Vec<DiagnosticSample> =
        ensemble.par_iter().map(|u| DiagnosticSample::of(0.0, u)).collect();
    let c = &calibration.turbulence;
    let (log_factor, sets) = match regime {
        Regime::ThreeD => {
            if !(g > 0.0) {
                return Err(Error::Domain(format!("Grashof number must be positive, got {g}")));
            }
            let r = 1.0 / kbar_ratio;
            let widen = (2.0 / p).sqrt();
            let l2: Vec<f64> = samples.iter().map(|s| s.l2_sq.sqrt()).collect();
            let grad: Vec<f64> = samples.iter().map(|s| s.grad_sq.sqrt()).collect();
            let sa = nu * k0.powf(-0.5) * r.sqrt() * g.sqrt();
            let sb = nu * k0.sqrt() * r.powf(0.25) * g.powf(0.75);
            (
                None,
                vec![
                    set_report("A_p", &l2, sa, c.chebyshev_energy, widen, p / 2.0),
                    set_report("B_p", &grad, sb, c.chebyshev_enstrophy, widen, p / 2.0),
                ],
            )
        }
        Regime::TwoD => {
            let lf = log_factor(g, kbar_ratio)?;
            let w: Vec<f64> = samples.iter().map(|s| s.wiener).collect();
            let sw = (lf * g).sqrt();
            let widen = (1.0 / p).sqrt();
            (Some(lf), vec![set_report("W_p", &w, sw, c.chebyshev_wiener, widen, p)])
        }
    };
    Ok(ChebyshevReport {
        p,
        g,
        regime,
        log_factor,
        snapshots: ensemble.len(),
        sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, taylor_green, AmplitudeProfile};
    use num_complex::Complex64;

    #[test]
    fn constant_and_linear_series() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        assert!((time_average(&t, &[3.0; 11], 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((time_average(&t, &t, 1.0).unwrap() - 0.5).abs() < 1e-15);
        // partial window ending between samples
        assert!((time_average(&t, &t, 0.55).unwrap() - 0.275).abs() < 1e-15);
        assert!(time_average(&t, &t, 1.5).is_err());
    }

    #[test]
    fn taylor_green_energy_mean_matches_the_closed_form() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u0 = taylor_green(p, 4, 1.0).unwrap();
        let e0 = 0.5 * l2_norm(&u0).powi(2);
        let n = 4000;
        let t: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let e: Vec<f64> = t.iter().map(|s| e0 * (-4.0 * s).exp()).collect();
        let mean = time_average(&t, &e, 1.0).unwrap();
        let exact = e0 / 4.0 * (1.0 - (-4.0f64).exp());
        assert!((mean - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn scale_identities_are_exact() {
        let p = PhysicalParams::new(3, 2.0, 0.05).unwrap();
        let u = random_field(p, 5, [1.0, 5.0], 3, AmplitudeProfile::Uniform).unwrap();
        let s: Vec<_> = [0.0, 0.5, 1.0].iter().map(|&t| DiagnosticSample::of(t, &u.scaled(1.0 + t))).collect();
        let r = dissipation_report(&p, &s, 1.0).unwrap();
        let nu3 = p.nu().powi(3);
        assert!((r.lambda_eps.powi(4) * r.eps - nu3).abs() < 1e-12 * nu3);
        assert!((r.lambda_eta.powi(6) * r.eta - nu3).abs() < 1e-12 * nu3);
        assert!(r.eps_sup >= r.eps);
        assert!(r.kappa_sigma >= p.kappa0());
    }

    #[test]
    fn dyadic_bands_partition_the_energy() {
        let p = PhysicalParams::new(2, 3.0, 0.1).unwrap();
        let u = random_field(p, 12, [1.0, 12.0], 2, AmplitudeProfile::Uniform).unwrap();
        let k0 = p.kappa0();
        let bands = dyadic_spectrum(&[0.0, 1.0], &[u.clone(), u.clone()], k0 / 2.0, 1.0).unwrap();
        let total: f64 = bands.iter().map(|b| b.1).sum();
        let want = k0.powi(2) * l2_norm(&u).powi(2);
        assert!((total - want).abs() < 1e-12 * want);
        assert!(band_energy(&[0.0, 1.0], &[u.clone(), u], 100.0, 200.0, 1.0).is_err());
    }

    fn synthetic_spectrum(exponent: f64) -> Vec<(f64, f64)> {
        // one coefficient per dyadic band with the prescribed band energy
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let mut u = SpectralField::zeros(p, 64).unwrap();
        let mut k = 1;
        while k <= 64 {
            let e = (k as f64).powf(exponent);
            let amp = (e / (2.0 * p.parseval_factor())).sqrt();
            u.set(&[k, 0], &[Complex64::new(0.0, 0.0), Complex64::new(amp, 0.0)]).unwrap();
            k *= 2;
        }
        dyadic_spectrum(&[0.0, 1.0], &[u.clone(), u], 0.75, 1.0).unwrap()
    }

    #[test]
    fn synthetic_power_laws_are_recovered() {
        for exponent in [-2.0 / 3.0, -2.0] {
            let rep = fit_power_law(&synthetic_spectrum(exponent), None).unwrap();
            assert!((rep.fitted_exponent - exponent).abs() < 0.05, "{}", rep.fitted_exponent);
        }
        assert!(matches!(fit_power_law(&[(1.0, 2.0)], None), Err(Error::Estimation(_))));
    }

    #[test]
    fn log_factor_closed_form() {
        // G = e⁴, κ̄/κ₀ = 2: 2·8·[1 + ln(2^{5/2}·e²·2^{3/2})] = 16(3 + 4 ln 2)
        let v = log_factor(4f64.exp(), 2.0).unwrap();
        let want = 16.0 * (3.0 + 4.0 * 2f64.ln());
        assert!((v - want).abs() < 1e-12 * want);
        assert!((want - 92.36142).abs() < 1e-5);
        assert!(matches!(log_factor(1.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn chebyshev_sets_are_consistent_with_markov() {
        let p = PhysicalParams::unit(3, 1.0).unwrap();
        let ens: Vec<_> = (0..40)
            .map(|s| {
                random_field(p, 4, [1.0, 3.0], s, AmplitudeProfile::Uniform)
                    .unwrap()
                    .scaled(0.5 + (s % 7) as f64 * 0.1)
            })
            .collect();
        let cal = Calibration::embedded();
        for pp in [1.0, 0.5, 0.1] {
            let rep = chebyshev_fractions(&ens, pp, Regime::ThreeD, 30.0, 2.0, &cal).unwrap();
            for s in &rep.sets {
                assert!(s.fraction <= s.markov_bound + 1e-15);
                if s.mean_bound_holds {
                    assert!(s.within_prediction);
                }
            }
        }
        assert!(chebyshev_fractions(&ens[..5], 0.5, Regime::ThreeD, 30.0, 2.0, &cal).is_err());
        assert!(chebyshev_fractions(&ens, 0.5, Regime::TwoD, 30.0, 2.0, &cal).is_err());
    }
}
