//! Smooth switching functions used by the kinetics: a logistic sigmoid for
//! glucose inhibition and a smooth maximum that keeps the product-inhibition
//! factor from turning negative.
//!
//! Both are written in overflow-safe form (sign branch / subtract-the-max)
//! so that an optimizer can probe arbitrarily extreme iterates without
//! producing infinities.

use super::ModelError;

/// Logistic sigmoid `s_γ(x, x̄) = 1 / (1 + exp(-γ (x - x̄)))`.
///
/// Strictly increasing in `x`, equal to 1/2 at `x = x̄`. Stable for any
/// finite argument: the exponential is only ever evaluated at non-positive
/// exponents.
pub fn sigmoid(x: f64, midpoint: f64, steepness: f64) -> f64 {
    assert!(x.is_finite() && midpoint.is_finite(), "sigmoid requires finite inputs");
    assert!(steepness > 0.0, "sigmoid steepness must be positive");
    logistic(steepness * (x - midpoint))
}

/// `σ(t) = 1 / (1 + e^{-t})` with the exponential kept at non-positive
/// exponents. `logistic(-t)` is the cancellation-free form of `1 - σ(t)`.
pub(crate) fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Smooth maximum `maxₐ(x₁, …, xₙ) = Σ xᵢ e^{α xᵢ} / Σ e^{α xᵢ}`.
///
/// Invariant under permutation of the inputs and shift-equivariant:
/// `maxₐ(x + c) = maxₐ(x) + c`. The exponentials are computed relative to
/// the true maximum, so no finite input can overflow.
///
/// Near ties the approximation dips slightly *below* the true maximum; for
/// two arguments the worst undershoot is `(1 + s*)/α ≈ -0.2785/α`, where
/// `s*` solves `s = -(1 + eˢ)`.
pub fn smooth_max(values: &[f64], sharpness: f64) -> Result<f64, ModelError> {
    if values.is_empty() {
        return Err(ModelError::EmptySmoothMax);
    }
    assert!(sharpness > 0.0, "smooth_max sharpness must be positive");
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite { quantity: "smooth_max input" });
    }
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in values {
        let w = (sharpness * (x - top)).exp();
        num += x * w;
        den += w;
    }
    Ok(num / den)
}

/// `smooth_max([0, y], α)`, the two-argument case used by the kinetics.
pub(crate) fn smooth_max_zero(y: f64, sharpness: f64) -> f64 {
    // y·σ(αy) with weights referenced to max(0, y).
    let t = sharpness * y;
    if t >= 0.0 {
        y / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        y * e / (1.0 + e)
    }
}

/// d/dy of [`smooth_max_zero`]: `σ(αy) (1 + αy (1 - σ(αy)))`.
pub(crate) fn smooth_max_zero_derivative(y: f64, sharpness: f64) -> f64 {
    let t = sharpness * y;
    let (s_pos, s_neg) = if t >= 0.0 {
        let e = (-t).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = t.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    s_pos * (1.0 + t * s_neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_midpoint_is_exactly_half() {
        assert_eq!(sigmoid(7.5, 7.5, 10.0), 0.5);
    }

    #[test]
    fn sigmoid_saturates() {
        assert_eq!(sigmoid(1e6, 7.5, 10.0), 1.0);
        assert_eq!(sigmoid(-1e6, 7.5, 10.0), 0.0);
        // No overflow far beyond |γ(x - x̄)| = 700.
        assert!(sigmoid(1e300, 0.0, 10.0).is_finite());
        assert!(sigmoid(-1e300, 0.0, 10.0).is_finite());
    }

    #[test]
    fn sigmoid_matches_direct_evaluation() {
        // Independent oracle: direct formula at a point where it is safe.
        let expected = 1.0 / (1.0 + (10.0f64 * (7.5 - 6.0496)).exp());
        assert_relative_eq!(sigmoid(6.0496, 7.5, 10.0), expected, max_relative = 1e-15);
        // Frozen value 1/(1 + e^{14.504}) = 5.0233e-7.
        assert_relative_eq!(sigmoid(6.0496, 7.5, 10.0), 5.0233405e-7, max_relative = 1e-6);
    }

    #[test]
    fn smooth_max_basics() {
        assert_eq!(smooth_max(&[0.0, 0.0], 100.0).unwrap(), 0.0);
        // e^{100}/(1 + e^{100}) differs from 1 by e^{-100}: exactly 1.0 in f64.
        assert_eq!(smooth_max(&[0.0, 1.0], 100.0).unwrap(), 1.0);
        // Near-tie undershoot, by hand: -0.01 e^{-1} / (1 + e^{-1}).
        let expected = -0.01 * (-1.0f64).exp() / (1.0 + (-1.0f64).exp());
        assert_relative_eq!(smooth_max(&[0.0, -0.01], 100.0).unwrap(), expected, max_relative = 1e-14);
        assert!((expected - (-2.689e-3)).abs() < 1e-5);
    }

    #[test]
    fn smooth_max_rejects_empty() {
        assert_eq!(smooth_max(&[], 100.0), Err(ModelError::EmptySmoothMax));
    }

    #[test]
    fn smooth_max_zero_agrees_with_general_form() {
        for &y in &[-2.0, -0.5, -0.0127846, -0.01, 0.0, 0.003, 0.25, 1.0, 50.0] {
            let general = smooth_max(&[0.0, y], 100.0).unwrap();
            assert_relative_eq!(smooth_max_zero(y, 100.0), general, epsilon = 1e-300, max_relative = 1e-12);
        }
    }

    #[test]
    fn smooth_max_zero_derivative_matches_finite_differences() {
        let h = 1e-7;
        for &y in &[-0.5, -0.0128, -0.004, 0.0, 0.009, 0.3, 2.0] {
            let fd = (smooth_max_zero(y + h, 100.0) - smooth_max_zero(y - h, 100.0)) / (2.0 * h);
            let an = smooth_max_zero_derivative(y, 100.0);
            assert_relative_eq!(an, fd, epsilon = 1e-6, max_relative = 1e-5);
        }
    }

    #[test]
    fn smooth_max_floor_two_arguments() {
        // Analytic floor of y ↦ y σ(αy): (1 + s*)/α with s* = -(1 + e^{s*}).
        let mut s = -1.3f64;
        for _ in 0..100 {
            s = -(1.0 + s.exp());
        }
        let floor = (1.0 + s) / 100.0;
        assert_relative_eq!(floor, -0.27846455 / 100.0, max_relative = 1e-6);
        // Dense grid, including the analytic minimizer itself.
        let mut min_seen = f64::INFINITY;
        for i in -100_000..=100_000 {
            let y = i as f64 * 1e-5;
            min_seen = min_seen.min(smooth_max_zero(y, 100.0));
        }
        min_seen = min_seen.min(smooth_max_zero(s / 100.0, 100.0));
        assert!(min_seen >= floor - 1e-12, "min {min_seen} below analytic floor {floor}");
        assert_relative_eq!(min_seen, floor, max_relative = 1e-6);
    }

    #[test]
    fn smooth_max_tracks_hard_max() {
        // Global bound 3e-3 at α = 100, and 1e-8 once |y| ≥ 0.25.
        for i in -4000..=4000 {
            let y = i as f64 * 1e-3;
            let gap = (smooth_max_zero(y, 100.0) - y.max(0.0)).abs();
            assert!(gap <= 3e-3, "gap {gap} at y = {y}");
            if y.abs() >= 0.25 {
                assert!(gap <= 1e-8, "tail gap {gap} at y = {y}");
            }
        }
    }

    proptest! {
        #[test]
        fn smooth_max_permutation_invariant(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64) {
            let m1 = smooth_max(&[a, b, c], 10.0).unwrap();
            let m2 = smooth_max(&[c, a, b], 10.0).unwrap();
            prop_assert!((m1 - m2).abs() <= 1e-12 * (1.0 + m1.abs()));
        }

        #[test]
        fn smooth_max_shift_equivariant(a in -5.0..5.0f64, b in -5.0..5.0f64, shift in -10.0..10.0f64) {
            let base = smooth_max(&[a, b], 10.0).unwrap();
            let shifted = smooth_max(&[a + shift, b + shift], 10.0).unwrap();
            prop_assert!((shifted - (base + shift)).abs() <= 1e-10);
        }

        #[test]
        fn sigmoid_strictly_increasing(x in -20.0..20.0f64, dx in 1e-6..1.0f64) {
            prop_assert!(sigmoid(x + dx, 7.5, 10.0) > sigmoid(x, 7.5, 10.0) || sigmoid(x, 7.5, 10.0) == 1.0 || sigmoid(x + dx, 7.5, 10.0) == 0.0);
        }
    }
}
