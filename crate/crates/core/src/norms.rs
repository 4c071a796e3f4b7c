//! Scalar functionals on fields.
//!
//! Every sum over `ℤⁿ` is twice the sum over stored modes, since `|û(-k)| = |û(k)|`.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::forcing::Forcing;
use crate::quadrature::integrate;
use serde::{Deserialize, Serialize};

/// Exponents above this are reported as saturation rather than overflowing.
pub const LOG_SATURATION: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyWeight {
    pub lambda: f64,
    pub sigma: f64,
}

impl GevreyWeight {
    pub fn new(lambda: f64, sigma: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() || !sigma.is_finite() {
            return Err(Error::arg(format!("gevrey weight needs λ ≥ 0, got λ = {lambda}, σ = {sigma}")));
        }
        Ok(Self { lambda, sigma })
    }

    pub fn sobolev(sigma: f64) -> Self {
        Self { lambda: 0.0, sigma }
    }
}

/// Radius schedule `λ(t)` paired with the Gevrey norms along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSchedule {
    Zero,
    /// `λ(t) = √(νt)`.
    #[default]
    SqrtNuT,
}

impl LambdaSchedule {
    pub fn at(&self, nu: f64, t: f64) -> f64 {
        match self {
            LambdaSchedule::Zero => 0.0,
            LambdaSchedule::SqrtNuT => (nu * t.max(0.0)).sqrt(),
        }
    }
}

fn weighted_sum(u: &SpectralField, mut weight: impl FnMut(f64) -> f64) -> f64 {
    let norms = u.lattice().norms();
    2.0 * (0..u.len())
        .map(|i| weight(norms[i]) * u.magnitude(i))
        .sum::<f64>()
}

fn weighted_sq_sum(u: &SpectralField, mut weight: impl FnMut(f64) -> f64) -> f64 {
    let norms = u.lattice().norms();
    2.0 * (0..u.len())
        .map(|i| {
            let m = u.magnitude(i);
            weight(norms[i]) * m * m
        })
        .sum::<f64>()
}

/// `κ₀^σ Σ_k |k|^σ |û(k)|`.
pub fn sobolev_l1_norm(u: &SpectralField, sigma: f64) -> f64 {
    let k0 = u.params().kappa0();
    if sigma == 0.0 {
        return weighted_sum(u, |_| 1.0);
    }
    k0.powf(sigma) * weighted_sum(u, |kn| kn.powf(sigma))
}

/// Natural log of the Gevrey norm, computed without overflow (`-∞` for the zero field).
pub fn log_gevrey_norm(u: &SpectralField, w: GevreyWeight) -> f64 {
    let k0 = u.params().kappa0();
    let norms = u.lattice().norms();
    let logs: Vec<f64> = (0..u.len())
        .rev()
        .filter_map(|i| {
            let m = u.magnitude(i);
            (m > 0.0).then(|| w.lambda * k0 * norms[i] + w.sigma * norms[i].ln() + m.ln())
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    let sum: f64 = logs.iter().map(|&l| (l - top).exp()).sum();
    top + (2.0 * sum).ln() + w.sigma * k0.ln()
}

/// `κ₀^σ Σ_k e^{λκ₀|k|} |k|^σ |û(k)|`, summed from the outermost shell inwards.
pub fn gevrey_norm(u: &SpectralField, w: GevreyWeight) -> Result<f64> {
    if !(w.lambda >= 0.0) {
        return Err(Error::arg(format!("gevrey weight needs λ ≥ 0, got {}", w.lambda)));
    }
    let k0 = u.params().kappa0();
    let norms = u.lattice().norms();
    let mut sum = 0.0;
    for i in (0..u.len()).rev() {
        let m = u.magnitude(i);
        if m == 0.0 {
            continue;
        }
        let kn = norms[i];
        let log_term = w.lambda * k0 * kn + w.sigma * (k0 * kn).ln() + m.ln();
        if log_term > LOG_SATURATION {
            return Err(Error::Saturation { shell: kn, log_term });
        }
        sum += log_term.exp();
    }
    Ok(2.0 * sum)
}

/// `Σ_k |û(k)|`.
pub fn wiener_norm(u: &SpectralField) -> f64 {
    weighted_sum(u, |_| 1.0)
}

/// `(2π)^{n/2} κ₀^{-n/2} (Σ_k |û(k)|²)^{1/2}`.
pub fn l2_norm(u: &SpectralField) -> f64 {
    (u.params().parseval_factor() * weighted_sq_sum(u, |_| 1.0)).sqrt()
}

/// `‖∇u‖_{L²}`, i.e. the L² norm with weight `κ₀|k|`.
pub fn grad_l2_norm(u: &SpectralField) -> f64 {
    let k0 = u.params().kappa0();
    (u.params().parseval_factor() * weighted_sq_sum(u, |kn| (k0 * kn).powi(2))).sqrt()
}

/// `‖Δu‖_{L²} = ‖Au‖_{L²}`, weight `(κ₀|k|)²`.
pub fn laplacian_l2_norm(u: &SpectralField) -> f64 {
    let k0 = u.params().kappa0();
    (u.params().parseval_factor() * weighted_sq_sum(u, |kn| (k0 * kn).powi(4))).sqrt()
}

/// `½‖u‖²_{L²}`.
pub fn energy(u: &SpectralField) -> f64 {
    0.5 * l2_norm(u).powi(2)
}

/// `½‖∇u‖²_{L²}`.
pub fn enstrophy(u: &SpectralField) -> f64 {
    0.5 * grad_l2_norm(u).powi(2)
}

/// `Re Σ_{k∈ℤⁿ} û(k)·conj(v̂(k))`.
pub fn inner(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    u.ensure_compatible(v)?;
    Ok(2.0
        * u.coeffs()
            .iter()
            .zip(v.coeffs())
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>())
}

pub(crate) mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Text(s) => Err(serde::de::Error::custom(format!("expected a number, got {s:?}"))),
        }
    }
}

/// Dimensionless sizes of the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataNumbers {
    pub m0: f64,
    pub mf: f64,
    pub m: f64,
    pub g: f64,
    #[serde(with = "extended_f64")]
    pub q: f64,
    /// Conjugate exponent `q′ = q/(q-1)`.
    #[serde(with = "extended_f64")]
    pub q_prime: f64,
    pub tf: f64,
}

/// `(q′, 1/q′)` for `q ∈ (1, ∞]`.
pub fn conjugate_exponent(q: f64) -> Result<(f64, f64)> {
    if !(q > 1.0) {
        return Err(Error::arg(format!("integrability exponent must satisfy q > 1, got {q}")));
    }
    if q.is_infinite() {
        return Ok((1.0, 1.0));
    }
    Ok((q / (q - 1.0), 1.0 - 1.0 / q))
}

impl DataNumbers {
    pub fn inv_q_prime(&self) -> f64 {
        if self.q.is_infinite() {
            1.0
        } else {
            1.0 - 1.0 / self.q
        }
    }
}

/// `(νκ₀² ∫₀^{Tf} ‖f(s)‖^q_{λ(s),σ} ds)^{1/q}` or the sup over `[0, Tf]` when `q = ∞`.
fn forcing_integral(
    forcing: &Forcing,
    sigma: f64,
    q: f64,
    tf: f64,
    schedule: LambdaSchedule,
) -> Result<f64> {
    let Some(first) = forcing.at(0.0)? else {
        return Ok(0.0);
    };
    let p = *first.params();
    let rate = p.viscous_rate();
    let nu = p.nu();
    match forcing {
        Forcing::None => Ok(0.0),
        Forcing::Steady(f) => {
            let top_weight = GevreyWeight::new(schedule.at(nu, tf), sigma)?;
            let top = gevrey_norm(f, top_weight)?;
            if top == 0.0 || q.is_infinite() {
                return Ok(top);
            }
            if schedule == LambdaSchedule::Zero {
                return Ok(top * (rate * tf).powf(1.0 / q));
            }
            // s = Tf r², normalised by the largest integrand value at r = 1
            let log_top = top.ln();
            let lam_top = schedule.at(nu, tf);
            let integral = integrate(
                |r| {
                    let w = GevreyWeight { lambda: lam_top * r, sigma };
                    2.0 * tf * r * (q * (log_gevrey_norm(f, w) - log_top)).exp()
                },
                0.0,
                1.0,
                0.0,
                1e-12,
            )?
            .value;
            Ok(top * (rate * integral).powf(1.0 / q))
        }
        Forcing::Sampled { times, .. } => {
            if *times.last().expect("nonempty") < tf * (1.0 - 1e-12) {
                return Err(Error::arg(format!(
                    "forcing samples end before the horizon Tf = {tf}"
                )));
            }
            let mut grid: Vec<f64> = times.iter().copied().filter(|&t| t < tf).collect();
            grid.push(tf);
            let values = grid
                .iter()
                .map(|&t| {
                    let f = forcing.at(t)?.expect("forcing present");
                    gevrey_norm(&f, GevreyWeight::new(schedule.at(nu, t), sigma)?)
                })
                .collect::<Result<Vec<_>>>()?;
            if q.is_infinite() {
                return Ok(values.iter().copied().fold(0.0, f64::max));
            }
            let integral: f64 = grid
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].powf(q) + v[1].powf(q)))
                .sum();
            Ok((rate * integral).powf(1.0 / q))
        }
    }
}

/// `sup_t ‖f(t)‖_{L²}` over `[0, Tf]`.
fn forcing_l2_sup(forcing: &Forcing, tf: f64) -> Result<f64> {
    match forcing {
        Forcing::None => Ok(0.0),
        Forcing::Steady(f) => Ok(l2_norm(f)),
        Forcing::Sampled { times, fields } => {
            let mut best = l2_norm(&forcing.at(tf.min(forcing.horizon()))?.expect("present"));
            for (t, f) in times.iter().zip(fields) {
                if *t <= tf {
                    best = best.max(l2_norm(f));
                }
            }
            Ok(best)
        }
    }
}

/// `M₀`, `M_f`, `M = M₀ + M_f` and the Grashof number `G`.
pub fn compute_data_numbers(
    u0: &SpectralField,
    forcing: &Forcing,
    sigma: f64,
    q: f64,
    tf: f64,
    schedule: LambdaSchedule,
) -> Result<DataNumbers> {
    let (q_prime, _) = conjugate_exponent(q)?;
    if !(tf > 0.0) {
        return Err(Error::arg(format!("forcing horizon must be positive, got {tf}")));
    }
    forcing.check_compatible(u0)?;
    let p = u0.params();
    let (nu, k0, n) = (p.nu(), p.kappa0(), p.dim() as f64);
    let m0 = k0.powf(-sigma) / (nu * k0) * sobolev_l1_norm(u0, sigma);
    let scale = k0.powf(-sigma) / (nu * nu * k0.powi(3));
    let mf = scale * forcing_integral(forcing, sigma, q, tf, schedule)?;
    let g = k0.powf(n / 2.0) / (nu * nu * k0.powi(3)) * forcing_l2_sup(forcing, tf)?;
    Ok(DataNumbers {
        m0,
        mf,
        m: m0 + mf,
        g,
        q,
        q_prime,
        tf,
    })
}
