//! Existence windows and analyticity-radius lower bounds from the data sizes.

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::forcing::Forcing;
use crate::norms::{compute_data_numbers, conjugate_exponent, LambdaSchedule};
use crate::special::{beta, gamma};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Which existence statement sizes the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    /// Window from `M = M₀ + M_f`, any `q ∈ (1, ∞]`, `σ ∈ (−1, 0]`.
    General,
    /// 2D, steady band-limited force, `σ = 0`, `q = 2`, horizon `(νκ₀²)^{-1}`.
    Grashof2d,
    /// 3D, steady band-limited force, `σ = −3/4`, `q = 59/49`, horizon `(νκ₀²)^{-1}`.
    Grashof3d,
    /// Window from `M_f` alone under a smallness condition on `M₀`.
    ForceDominated,
}

impl std::str::FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(TheoremId::General),
            "grashof-2d" => Ok(TheoremId::Grashof2d),
            "grashof-3d" => Ok(TheoremId::Grashof3d),
            "force-dominated" => Ok(TheoremId::ForceDominated),
            other => Err(Error::arg(format!(
                "unknown theorem '{other}' (general | grashof-2d | grashof-3d | force-dominated)"
            ))),
        }
    }
}

/// `β(σ, q) = 2σ₋/q′` for `q ≤ 2` and `σ₋` for `q ≥ 2`.
pub fn beta_exponent(sigma: f64, q: f64) -> Result<f64> {
    if !(sigma > -1.0) {
        return Err(Error::OutOfRange(format!("σ must exceed −1, got {sigma}")));
    }
    let (_, inv_qp) = conjugate_exponent(q)?;
    let s_minus = (-sigma).max(0.0);
    Ok(if q <= 2.0 { 2.0 * s_minus * inv_qp } else { s_minus })
}

/// Exact `β` for rational `σ` and rational `q` (`None` for `q = ∞`).
pub fn beta_exponent_exact(sigma: Ratio<i64>, q: Option<Ratio<i64>>) -> Result<Ratio<i64>> {
    let one = Ratio::from_integer(1);
    if sigma <= -one {
        return Err(Error::OutOfRange(format!("σ must exceed −1, got {sigma}")));
    }
    let s_minus = if sigma < Ratio::from_integer(0) { -sigma } else { Ratio::from_integer(0) };
    match q {
        None => Ok(s_minus),
        Some(q) if q <= one => Err(Error::arg(format!("q must exceed 1, got {q}"))),
        Some(q) if q <= Ratio::from_integer(2) => Ok(Ratio::from_integer(2) * s_minus * (q - one) / q),
        Some(_) => Ok(s_minus),
    }
}

/// Exponent of the data size in the radius bound: `1/(1−β)` for the general
/// window, `1/(1−β+2/q′)` for the force-dominated ones.
pub fn radius_exponent_exact(
    theorem: TheoremId,
    sigma: Ratio<i64>,
    q: Option<Ratio<i64>>,
) -> Result<Ratio<i64>> {
    let one = Ratio::from_integer(1);
    let b = beta_exponent_exact(sigma, q)?;
    let inv_qp = q.map_or(one, |q| (q - one) / q);
    Ok(match theorem {
        TheoremId::General => one / (one - b),
        _ => one / (one - b + Ratio::from_integer(2) * inv_qp),
    })
}

/// `max{ℬ(1−c, 1−d), Γ(1−c)}`.
pub fn c_beta_integral(c: f64, d: f64) -> f64 {
    beta(1.0 - c, 1.0 - d).max(gamma(1.0 - c))
}

/// `(1/q′)^{1/q′}`.
pub fn c_linear_i(q: f64) -> Result<f64> {
    let (_, inv_qp) = conjugate_exponent(q)?;
    Ok(inv_qp.powf(inv_qp))
}

/// `β^{β/2} · C(βq′/2, 0)^{1/q′} · (q′)^{β/2}`.
pub fn c_linear_ii(q: f64, beta_: f64) -> Result<f64> {
    let (qp, inv_qp) = conjugate_exponent(q)?;
    if !(beta_ >= 0.0 && beta_ * inv_qp.recip() < 2.0) {
        return Err(Error::OutOfRange(format!("need 0 ≤ β < 2/q′, got β = {beta_}")));
    }
    Ok(beta_.powf(beta_ / 2.0) * c_beta_integral(beta_ * qp / 2.0, 0.0).powf(inv_qp) * qp.powf(beta_ / 2.0))
}

/// `max{C((1−β)/2, β), C(1/2, β)}`.
pub fn c_nonlinear(beta_: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta_) {
        return Err(Error::OutOfRange(format!("need 0 ≤ β < 1, got {beta_}")));
    }
    Ok(c_beta_integral((1.0 - beta_) / 2.0, beta_).max(c_beta_integral(0.5, beta_)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremQuantities {
    pub theorem: TheoremId,
    pub sigma: f64,
    #[serde(with = "crate::norms::extended_f64")]
    pub q: f64,
    pub q_prime: f64,
    pub beta: f64,
    pub m0: f64,
    pub mf: f64,
    pub m: f64,
    pub g: f64,
    /// Horizon on which the force enters `M_f`.
    pub tf: f64,
    /// Closed-form constants before calibration.
    pub c_linear_ii: f64,
    pub c_nonlinear: f64,
    /// `C* = (3C · C_w · C_Φ)^{-1}` with calibrated lemma constants.
    pub c_star: f64,
    /// `C₍*₎ = (C*)^{(2/q′)/(1−β+2/q′)}`.
    pub c_lower_star: f64,
    pub t_star: f64,
    /// Exponent `e` in `λ ≳ κ₀^{-1}·size^{-e}`.
    pub radius_exponent: f64,
    pub radius_prefactor: f64,
    /// `√(νT*)`, the radius guaranteed at `T*`.
    pub radius_bound: f64,
    /// Smallness condition of the selected statement with calibrated constants.
    pub hypothesis: bool,
    /// `M ≤ C*`, so the window extends to `T_f`.
    pub global_on_tf: bool,
    pub calibration_version: String,
}

/// Data numbers, calibrated constants, `T*` and the radius lower bound.
pub fn theorem_quantities(
    u0: &SpectralField,
    forcing: &Forcing,
    sigma: f64,
    q: f64,
    theorem: TheoremId,
    tf: f64,
    calibration: &Calibration,
) -> Result<TheoremQuantities> {
    let beta_ = beta_exponent(sigma, q)?;
    let p = *u0.params();
    let rate = p.viscous_rate();
    let tf = match theorem {
        TheoremId::Grashof2d | TheoremId::Grashof3d => {
            let (n, s, qq) = if theorem == TheoremId::Grashof2d {
                (2, 0.0, 2.0)
            } else {
                (3, -0.75, 59.0 / 49.0)
            };
            if p.dim() != n || (sigma - s).abs() > 1e-12 || (q - qq).abs() > 1e-12 {
                return Err(Error::arg(format!(
                    "{theorem:?} needs n = {n}, σ = {s}, q = {qq}; got n = {}, σ = {sigma}, q = {q}",
                    p.dim()
                )));
            }
            if !matches!(forcing, Forcing::Steady(_)) {
                return Err(Error::arg(format!("{theorem:?} needs a time-independent force")));
            }
            1.0 / rate
        }
        _ => tf,
    };
    let data = compute_data_numbers(u0, forcing, sigma, q, tf, LambdaSchedule::SqrtNuT)?;
    let (qp, inv_qp) = conjugate_exponent(q)?;
    let cl2 = c_linear_ii(q, beta_)?;
    let cnl = c_nonlinear(beta_)?;
    let mild = &calibration.mild;
    let c_star = 1.0 / (3.0 * mild.absolute * (mild.nonlinear * cnl) * (mild.linear_ii * cl2));
    let gap = 1.0 - beta_ + 2.0 * inv_qp;
    let c_lower_star = c_star.powf(2.0 * inv_qp / gap);

    let (t_window, radius_exponent, radius_prefactor, hypothesis) = match theorem {
        TheoremId::General => {
            let t = if data.m > 0.0 {
                c_star.powf(2.0 / (1.0 - beta_)) / rate * data.m.powf(-2.0 / (1.0 - beta_))
            } else {
                f64::INFINITY
            };
            (t, 1.0 / (1.0 - beta_), c_star.powf(1.0 / (1.0 - beta_)), true)
        }
        _ => {
            if !(data.mf > 0.0) {
                return Err(Error::Domain(
                    "force-dominated windows need a nonzero force (M_f > 0)".into(),
                ));
            }
            let t = c_lower_star.powf(qp) / rate * data.mf.powf(-2.0 / gap);
            let small = data.m0 <= c_lower_star * data.mf.powf((1.0 - beta_) / gap);
            (t, 1.0 / gap, c_lower_star.powf(qp / 2.0), small)
        }
    };
    let t_star = t_window.min(tf);
    Ok(TheoremQuantities {
        theorem,
        sigma,
        q,
        q_prime: qp,
        beta: beta_,
        m0: data.m0,
        mf: data.mf,
        m: data.m,
        g: data.g,
        tf,
        c_linear_ii: cl2,
        c_nonlinear: cnl,
        c_star,
        c_lower_star,
        t_star,
        radius_exponent,
        radius_prefactor,
        radius_bound: (p.nu() * t_star).sqrt(),
        hypothesis,
        global_on_tf: data.m <= c_star,
        calibration_version: calibration.version.clone(),
    })
}
