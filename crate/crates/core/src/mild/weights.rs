//! Exponential-integrator weights, evaluated by series near `z = 0`.

const SERIES_CUTOFF: f64 = 0.1;
const SERIES_TERMS: usize = 14;

/// `φ₁(z) = (1 - e^{-z})/z`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < SERIES_CUTOFF {
        // Σ (-z)^m / (m+1)!
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..SERIES_TERMS {
            term *= -z / (m + 1) as f64;
            sum += term;
        }
        sum
    } else {
        -(-z).exp_m1() / z
    }
}

/// `ψ(z) = (1 - e^{-z}(1+z))/z²`, the weight of the left endpoint in the
/// product rule `∫₀^h e^{-r(h-τ)} g(τ) dτ` with `g` linear.
pub fn psi(z: f64) -> f64 {
    if z.abs() < SERIES_CUTOFF {
        // Σ (-1)^m (m+1)/(m+2)! z^m
        let mut fact = 2.0;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for m in 0..SERIES_TERMS {
            sum += (m + 1) as f64 * pow / fact;
            pow *= -z;
            fact *= (m + 3) as f64;
        }
        sum
    } else {
        (1.0 - (-z).exp() * (1.0 + z)) / (z * z)
    }
}

/// `φ₂(z) = (e^{-z} - 1 + z)/z²`.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < SERIES_CUTOFF {
        // Σ (-z)^m / (m+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for m in 1..SERIES_TERMS {
            term *= -z / (m + 2) as f64;
            sum += term;
        }
        sum
    } else {
        ((-z).exp_m1() + z) / (z * z)
    }
}

/// Per-mode weights of one product-rule step of length `h` at decay rate `r`:
/// `∫₀^h e^{-r(h-τ)} g(τ) dτ = left·g(0) + right·g(h)` for linear `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepWeights {
    pub decay: f64,
    pub left: f64,
    pub right: f64,
}

pub fn step_weights(rate: f64, h: f64) -> StepWeights {
    let z = rate * h;
    let p = psi(z);
    StepWeights {
        decay: (-z).exp(),
        left: h * p,
        right: h * (phi1(z) - p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn series_and_closed_forms_agree_at_the_cutoff() {
        for z in [0.0999999f64, 0.1, 0.1000001] {
            let closed1 = -(-z).exp_m1() / z;
            let closedp = (1.0 - (-z).exp() * (1.0 + z)) / (z * z);
            let closed2 = ((-z).exp_m1() + z) / (z * z);
            assert!((phi1(z) - closed1).abs() < 1e-14);
            assert!((psi(z) - closedp).abs() < 1e-11);
            assert!((phi2(z) - closed2).abs() < 1e-11);
        }
        assert_eq!(phi1(0.0), 1.0);
        assert_eq!(psi(0.0), 0.5);
        assert_eq!(phi2(0.0), 0.5);
    }

    #[test]
    fn product_rule_is_exact_for_linear_data() {
        // ∫₀^h e^{-r(h-τ)} (a + bτ) dτ in closed form
        let (r, h, a, b) = (3.7, 0.4, 1.3, -2.1);
        let w = step_weights(r, h);
        let got = w.left * a + w.right * (a + b * h);
        let e = (-r * h).exp();
        let want = a * (1.0 - e) / r + b * (h / r - (1.0 - e) / (r * r));
        assert!((got - want).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn weights_are_positive_and_sum_to_phi1(z in 0.0f64..50.0) {
            let w = step_weights(z, 1.0);
            prop_assert!(w.left > 0.0 && w.right > 0.0);
            prop_assert!((w.left + w.right - phi1(z)).abs() <= 1e-14);
            prop_assert!(phi2(z) > 0.0 && phi2(z) <= 0.5);
        }
    }
}
