use super::weights::step_weights;
use super::TrajectorySample;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::forcing::Forcing;
use crate::spectral::{heat_propagate, BilinearFft};
use rayon::prelude::*;

/// Decay rates `νκ₀²|k|²` of the stored modes.
fn mode_rates(u: &SpectralField) -> Vec<f64> {
    let rate = u.params().viscous_rate();
    u.lattice().norms().iter().map(|k| rate * k * k).collect()
}

/// `∫₀^{tᵢ} e^{-ν(tᵢ-s)A} g(s) ds` on every grid point, for `g` known on the
/// grid and linear in between.
fn integrate_samples(times: &[f64], samples: &[SpectralField]) -> Result<Vec<SpectralField>> {
    let rates = mode_rates(&samples[0]);
    let n = samples[0].dim();
    let mut acc = samples[0].zeros_like();
    let mut out = Vec::with_capacity(times.len());
    out.push(acc.clone());
    for i in 0..times.len() - 1 {
        let h = times[i + 1] - times[i];
        let (left, right) = (samples[i].coeffs(), samples[i + 1].coeffs());
        for (m, &r) in rates.iter().enumerate() {
            let w = step_weights(r, h);
            for j in m * n..(m + 1) * n {
                let c = &mut acc.coeffs_mut()[j];
                *c = *c * w.decay + left[j] * w.left + right[j] * w.right;
            }
        }
        out.push(acc.clone());
    }
    Ok(out)
}

/// `Φ(t) = e^{-νtA}u₀ + ∫₀ᵗ e^{-ν(t-s)A}𝒫f(s) ds` on the grid.
pub fn evaluate_phi(
    u0: &SpectralField,
    forcing: &Forcing,
    times: &[f64],
) -> Result<TrajectorySample> {
    super::check_grid(times)?;
    forcing.check_compatible(u0)?;
    let t_end = *times.last().expect("checked");
    if t_end > forcing.horizon() * (1.0 + 1e-12) {
        return Err(Error::arg(format!(
            "grid ends at {t_end}, beyond the forcing horizon {}",
            forcing.horizon()
        )));
    }
    let mut fields = times
        .iter()
        .map(|&t| heat_propagate(u0, t, 1.0))
        .collect::<Result<Vec<_>>>()?;
    match forcing {
        Forcing::None => {}
        Forcing::Steady(f) => {
            let rates = mode_rates(f);
            let n = f.dim();
            for (u, &t) in fields.iter_mut().zip(times) {
                for (m, &r) in rates.iter().enumerate() {
                    // (1 - e^{-rt})/r, exact per mode
                    let g = -(-r * t).exp_m1() / r;
                    for j in m * n..(m + 1) * n {
                        u.coeffs_mut()[j] += f.coeffs()[j] * g;
                    }
                }
            }
        }
        Forcing::Sampled { .. } => {
            let samples = times
                .iter()
                .map(|&t| Ok(forcing.at(t)?.expect("forcing present").into_owned()))
                .collect::<Result<Vec<_>>>()?;
            for (u, g) in fields.iter_mut().zip(integrate_samples(times, &samples)?) {
                *u = u.add(&g)?;
            }
        }
    }
    TrajectorySample::new(times.to_vec(), fields)
}

/// `w(tᵢ) = ∫₀^{tᵢ} e^{-ν(tᵢ-s)A} B[u(s), v(s)] ds` at every grid point.
pub fn duhamel_trajectory(
    u: &TrajectorySample,
    v: &TrajectorySample,
    bilinear: &BilinearFft,
) -> Result<TrajectorySample> {
    u.ensure_same_grid(v)?;
    let samples = u
        .fields
        .par_iter()
        .zip(v.fields.par_iter())
        .map(|(a, b)| bilinear.apply(a, b))
        .collect::<Result<Vec<_>>>()?;
    let fields = integrate_samples(&u.times, &samples)?;
    TrajectorySample::new(u.times.clone(), fields)
}

/// `w(t)` for a single grid time `t`.
pub fn evaluate_w(u: &TrajectorySample, v: &TrajectorySample, t: f64) -> Result<SpectralField> {
    u.ensure_same_grid(v)?;
    let idx = u.index_of(t)?;
    let bilinear = BilinearFft::for_field(&u.fields[0]);
    let head = TrajectorySample {
        times: u.times[..=idx.max(1)].to_vec(),
        fields: u.fields[..=idx.max(1)].to_vec(),
        schedule: u.schedule,
    };
    let head_v = TrajectorySample {
        times: head.times.clone(),
        fields: v.fields[..=idx.max(1)].to_vec(),
        schedule: v.schedule,
    };
    let w = duhamel_trajectory(&head, &head_v, &bilinear)?;
    Ok(w.fields[idx].clone())
}
