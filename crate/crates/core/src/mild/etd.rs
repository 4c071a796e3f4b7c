use super::weights::{phi1, phi2};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::forcing::Forcing;
use crate::spectral::{leray_project_in_place, BilinearFft};
use num_complex::Complex64;

/// Second-order exponential Runge-Kutta (Cox-Matthews) stepper for
/// `∂ₜu + νAu = −B[u,u] + 𝒫f`.
pub struct EtdStepper {
    dt: f64,
    n: usize,
    decay: Vec<f64>,
    w1: Vec<f64>,
    w2: Vec<f64>,
    bilinear: BilinearFft,
    forcing: Forcing,
}

impl EtdStepper {
    /// `stability_cap` bounds `dt·νκ₀²K²`; the linear part is exact, so this
    /// only guards the explicit treatment of the nonlinearity.
    pub fn new(
        template: &SpectralField,
        forcing: Forcing,
        dt: f64,
        stability_cap: f64,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::arg(format!("time step must be positive, got {dt}")));
        }
        let k = template.k_max() as f64;
        let stiffness = dt * template.params().viscous_rate() * k * k;
        if stiffness > stability_cap {
            return Err(Error::arg(format!(
                "dt·νκ₀²K² = {stiffness:.4} exceeds the stability cap {stability_cap}"
            )));
        }
        forcing.check_compatible(template)?;
        let rate = template.params().viscous_rate();
        let mut decay = Vec::with_capacity(template.len());
        let mut w1 = Vec::with_capacity(template.len());
        let mut w2 = Vec::with_capacity(template.len());
        for &kn in template.lattice().norms() {
            let z = rate * kn * kn * dt;
            decay.push((-z).exp());
            w1.push(dt * phi1(z));
            w2.push(dt * phi2(z));
        }
        Ok(Self {
            dt,
            n: template.dim(),
            decay,
            w1,
            w2,
            bilinear: BilinearFft::for_field(template),
            forcing,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    /// `−B[u,u] + 𝒫f(t)`.
    fn rhs(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        let mut out = self.bilinear.apply(u, u)?.scaled(-1.0);
        if let Some(f) = self.forcing.at(t)? {
            out = out.add(&f)?;
        }
        Ok(out)
    }

    fn combine(
        &self,
        base: &[Complex64],
        base_w: &[f64],
        term: &[Complex64],
        term_w: &[f64],
        out: &mut SpectralField,
    ) {
        let n = self.n;
        for (m, (&a, &b)) in base_w.iter().zip(term_w).enumerate() {
            for j in m * n..(m + 1) * n {
                out.coeffs_mut()[j] = base[j] * a + term[j] * b;
            }
        }
    }

    /// Advance `u` from `t` to `t + dt`.
    pub fn step(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        let nu_ = self.rhs(u, t)?;
        let mut a = u.zeros_like();
        self.combine(u.coeffs(), &self.decay, nu_.coeffs(), &self.w1, &mut a);
        let na = self.rhs(&a, t + self.dt)?;
        let diff = na.sub(&nu_)?;
        let ones = vec![1.0; self.decay.len()];
        let mut next = u.zeros_like();
        self.combine(a.coeffs(), &ones, diff.coeffs(), &self.w2, &mut next);
        leray_project_in_place(&mut next);
        if !next.is_finite() {
            return Err(Error::Numerical {
                time: t + self.dt,
                reason: "non-finite coefficients after an exponential step".into(),
                last_good: Some(Box::new(u.clone())),
            });
        }
        Ok(next)
    }

    /// Take `steps` steps from `t0`, calling `observe(step_index, t, u)` after each.
    pub fn run(
        &self,
        u0: &SpectralField,
        t0: f64,
        steps: usize,
        mut observe: impl FnMut(usize, f64, &SpectralField) -> Result<()>,
    ) -> Result<SpectralField> {
        let mut u = u0.clone();
        for i in 0..steps {
            let t = t0 + i as f64 * self.dt;
            u = self.step(&u, t)?;
            observe(i + 1, t0 + (i + 1) as f64 * self.dt, &u)?;
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{energy, l2_norm};
    use crate::params::PhysicalParams;
    use crate::spectral::{random_field, taylor_green, AmplitudeProfile};

    #[test]
    fn taylor_green_energy_decays_exactly() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u0 = taylor_green(p, 10, 1.0).unwrap();
        let stepper = EtdStepper::new(&u0, Forcing::None, 1e-3, 10.0).unwrap();
        let u = stepper.run(&u0, 0.0, 1000, |_, _, _| Ok(())).unwrap();
        let e_exact = energy(&u0) * (-4.0f64).exp();
        assert!((energy(&u) - e_exact).abs() < 1e-6 * e_exact);
        let err = l2_norm(&u.sub(&u0.scaled((-2.0f64).exp())).unwrap());
        assert!(err < 1e-6 * l2_norm(&u));
    }

    #[test]
    fn unforced_energy_never_increases() {
        let p = PhysicalParams::unit(2, 0.05).unwrap();
        let u0 = random_field(p, 10, [1.0, 4.0], 21, AmplitudeProfile::Uniform).unwrap();
        let stepper = EtdStepper::new(&u0, Forcing::None, 5e-3, 10.0).unwrap();
        let mut e_prev = energy(&u0);
        stepper
            .run(&u0, 0.0, 200, |_, _, u| {
                let e = energy(u);
                assert!(e <= e_prev * (1.0 + 1e-12));
                e_prev = e;
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn halving_the_step_quarters_the_error() {
        let p = PhysicalParams::unit(2, 0.1).unwrap();
        let u0 = random_field(p, 8, [1.0, 3.0], 5, AmplitudeProfile::Uniform).unwrap();
        let f = random_field(p, 8, [1.0, 2.0], 6, AmplitudeProfile::Uniform).unwrap();
        let solve = |dt: f64| {
            let s = EtdStepper::new(&u0, Forcing::steady(&f), dt, 50.0).unwrap();
            s.run(&u0, 0.0, (0.5 / dt).round() as usize, |_, _, _| Ok(())).unwrap()
        };
        let reference = solve(0.5 / 1600.0);
        let e1 = l2_norm(&solve(0.5 / 50.0).sub(&reference).unwrap());
        let e2 = l2_norm(&solve(0.5 / 100.0).sub(&reference).unwrap());
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.25, "observed order {order}");
    }

    #[test]
    fn stability_cap_is_enforced_and_breakdown_keeps_the_last_state() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u0 = taylor_green(p, 10, 1.0).unwrap();
        assert!(EtdStepper::new(&u0, Forcing::None, 0.2, 10.0).is_err());
        let mut bad = u0.clone();
        bad.coeffs_mut()[0] = Complex64::new(f64::NAN, 0.0);
        let s = EtdStepper::new(&u0, Forcing::None, 1e-3, 10.0).unwrap();
        match s.step(&bad, 0.5) {
            Err(Error::Numerical { time, last_good, .. }) => {
                assert!((time - 0.501).abs() < 1e-12);
                assert!(last_good.is_some());
            }
            other => panic!("expected breakdown, got {other:?}"),
        }
    }
}
