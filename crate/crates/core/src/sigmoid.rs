//! The logistic sigmoid `σ_β(x) = 1 / (1 + e^{-βx})` and the closed forms
//! built on top of it.

/// Logistic sigmoid with inverse temperature `beta`.
///
/// Evaluated through whichever branch keeps the exponent non-positive, so it
/// stays finite for arbitrarily large `|beta * x|`.
#[inline]
pub fn sigma(beta: f64, x: f64) -> f64 {
    let t = beta * x;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Analytic derivative `σ'_β(x) = β σ_β(x) (1 − σ_β(x))`.
#[inline]
pub fn sigma_prime(beta: f64, x: f64) -> f64 {
    // σ(x)(1 − σ(x)) = σ(x)σ(−x); both factors are computed without cancellation.
    beta * sigma(beta, x) * sigma(beta, -x)
}

/// `(1 − e^{−β}) / (1 + e^{−β})`, i.e. `tanh(β/2)`.
///
/// This is the slope of the chord of `σ_β` between 0 and 1, scaled by two.
#[inline]
pub fn chord_factor(beta: f64) -> f64 {
    (beta / 2.0).tanh()
}

/// `(β/2) (1 + e^{−β}) / (1 − e^{−β})`: the two-candidate welfare ratio bound,
/// which is also the lower bound for rules with the probabilistic Condorcet
/// loser property.
#[inline]
pub fn two_candidate_bound(beta: f64) -> f64 {
    beta / 2.0 / chord_factor(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_at_zero() {
        for beta in [0.1, 1.0, 2.0, 50.0, 1e4] {
            assert_eq!(sigma(beta, 0.0), 0.5);
        }
    }

    #[test]
    fn direct_value() {
        // 1 / (1 + e^{-0.5})
        assert_relative_eq!(sigma(1.0, 0.5), 0.622_459_331_201_854_6, epsilon = 1e-15);
        assert_relative_eq!(sigma(1.0, 1.0), 0.731_058_578_630_004_9, epsilon = 1e-15);
    }

    #[test]
    fn no_overflow_at_extremes() {
        assert_eq!(sigma(1e4, 1.0), 1.0);
        assert!(sigma(1e4, -1.0) >= 0.0);
        assert!(sigma(1e4, -1.0).is_finite());
        assert!(sigma(1e6, -1e3).is_finite());
        assert!(sigma_prime(1e4, 1.0).is_finite());
    }

    #[test]
    fn reflection() {
        for x in [-3.0, -0.7, 0.01, 0.4, 2.5] {
            assert_relative_eq!(sigma(2.0, x) + sigma(2.0, -x), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bounds_are_consistent() {
        for beta in [1.0_f64, 5.0, 10.0] {
            let ub = beta * (1.0 + (-beta).exp()) / (1.0 - (-beta).exp());
            assert_relative_eq!(2.0 * two_candidate_bound(beta), ub, max_relative = 1e-14);
        }
    }
}
