//! Gamma and beta functions.

pub use statrs::function::beta::{beta, ln_beta};
pub use statrs::function::gamma::{gamma, ln_gamma};

/// `max_{x ≥ 0} x^a e^{-x} = (a/e)^a` for `a ≥ 0` (the value 1 at `a = 0`).
pub fn power_exp_sup(a: f64) -> f64 {
    if a <= 0.0 {
        1.0
    } else {
        (a / std::f64::consts::E).powf(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use std::f64::consts::PI;

    #[test]
    fn known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((beta(0.5, 0.5) - PI).abs() < 1e-13);
        assert!((beta(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((beta(0.5, 1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn beta_matches_gamma_ratio_and_quadrature() {
        for &(a, b) in &[(0.3, 0.9), (0.75, 0.5), (1.0, 0.25), (0.1, 0.1), (2.5, 0.7)] {
            let via_gamma = gamma(a) * gamma(b) / gamma(a + b);
            assert!((beta(a, b) - via_gamma).abs() <= 1e-12 * via_gamma);
            // split at 1/2 and unfold both endpoint singularities with power substitutions
            let left = integrate(
                |v: f64| {
                    let s = v.powf(1.0 / a);
                    (1.0 - s).powf(b - 1.0) / a
                },
                0.0,
                0.5f64.powf(a),
                1e-14,
                1e-13,
            )
            .unwrap()
            .value;
            let right = integrate(
                |v: f64| {
                    let s = 1.0 - v.powf(1.0 / b);
                    s.powf(a - 1.0) / b
                },
                0.0,
                0.5f64.powf(b),
                1e-14,
                1e-13,
            )
            .unwrap()
            .value;
            assert!(((left + right) - via_gamma).abs() <= 1e-11 * via_gamma);
        }
    }

    #[test]
    fn sup_of_power_times_exponential() {
        assert_eq!(power_exp_sup(0.0), 1.0);
        let a = 0.8;
        let grid_max = (1..20000)
            .map(|i| {
                let x = i as f64 * 1e-4;
                x.powf(a) * (-x).exp()
            })
            .fold(0.0, f64::max);
        assert!((power_exp_sup(a) - grid_max).abs() < 1e-8);
    }
}
