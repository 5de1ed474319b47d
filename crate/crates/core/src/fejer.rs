//! The Fejer test-function family: f(x) = delta * sinc^2(pi delta x) with
//! triangle transform fhat(x) = max(0, 1 - |x|/delta).

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TestFnError {
    #[error("delta must be positive, got {0}")]
    InvalidDelta(f64),
    #[error("degenerate support: exp(2 pi delta) = {0:.6} <= 2, no prime term visible")]
    DegenerateSupport(f64),
}

/// Fejer kernel parameterized by the half-width `delta` of the support of
/// its Fourier transform. `delta = 1/(2 pi)` gives the pair
/// f(x) = (1/2pi) sin^2(x/2)/(x/2)^2, fhat(x) = 1 - 2 pi |x| on |x| < 1/(2pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FejerTestFunction {
    delta: f64,
}

impl FejerTestFunction {
    pub fn new(delta: f64) -> Result<Self, TestFnError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(TestFnError::InvalidDelta(delta));
        }
        Ok(Self { delta })
    }

    /// The paper's choice delta = 1/(2 pi).
    pub fn paper() -> Self {
        Self { delta: 1.0 / (2.0 * PI) }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// f(x) = delta * (sin(pi delta x)/(pi delta x))^2, with f(0) = delta.
    pub fn eval_f(&self, x: f64) -> f64 {
        let u = PI * self.delta * x;
        if u.abs() < 1e-4 {
            // sinc^2(u) = 1 - u^2/3 + O(u^4); the quartic term is < 1e-17 here
            let s = 1.0 - u * u / 3.0;
            self.delta * s
        } else {
            let s = u.sin() / u;
            self.delta * s * s
        }
    }

    /// fhat(x) = max(0, 1 - |x|/delta).
    pub fn eval_f_hat(&self, x: f64) -> f64 {
        (1.0 - x.abs() / self.delta).max(0.0)
    }

    /// f(0), the weight of one central zero on the left side of the
    /// explicit formula.
    pub fn f_at_zero(&self) -> f64 {
        self.delta
    }

    /// fhat(0), which also equals the total mass of f.
    pub fn f_hat_at_zero(&self) -> f64 {
        1.0
    }

    /// Integers n >= 2 with log(n)/(2 pi) inside the open support of fhat,
    /// returned as the inclusive range (2, n_max). These are the prime-side
    /// indices the formula can see.
    pub fn support_window(&self) -> Result<(u64, u64), TestFnError> {
        let lim = (2.0 * PI * self.delta).exp();
        if lim <= 2.0 {
            return Err(TestFnError::DegenerateSupport(lim));
        }
        let mut n_max = lim.floor() as u64;
        // strict inequality log n / (2 pi) < delta
        while n_max >= 2 && (n_max as f64).ln() >= 2.0 * PI * self.delta {
            n_max -= 1;
        }
        Ok((2, n_max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f_at_zero_is_delta() {
        let tf = FejerTestFunction::paper();
        let expect = 1.0 / (2.0 * PI);
        assert!((tf.eval_f(0.0) - expect).abs() < 1e-15);
        assert!((expect - 0.159_154_9).abs() < 1e-6);
    }

    #[test]
    fn f_vanishes_at_kernel_zero() {
        let tf = FejerTestFunction::paper();
        assert!(tf.eval_f(2.0 * PI).abs() < 1e-30);
    }

    #[test]
    fn f_at_two_direct_evaluation() {
        // (1/2pi) sin^2(1)/1^2
        let tf = FejerTestFunction::paper();
        let expect = 1.0_f64.sin().powi(2) / (2.0 * PI);
        assert!((tf.eval_f(2.0) - expect).abs() < 1e-15);
        assert!((expect - 0.112_693_4).abs() < 1e-6);
    }

    #[test]
    fn f_hat_triangle_values() {
        let tf = FejerTestFunction::paper();
        assert_eq!(tf.eval_f_hat(0.0), 1.0);
        // at log(2)/(2pi): 1 - log 2
        let x = 2.0_f64.ln() / (2.0 * PI);
        assert!((tf.eval_f_hat(x) - (1.0 - 2.0_f64.ln())).abs() < 1e-12);
        // log(3)/(2pi) is outside the support
        let x3 = 3.0_f64.ln() / (2.0 * PI);
        assert_eq!(tf.eval_f_hat(x3), 0.0);
    }

    #[test]
    fn support_window_paper_choice_sees_only_two() {
        let tf = FejerTestFunction::paper();
        assert_eq!(tf.support_window().unwrap(), (2, 2));
    }

    #[test]
    fn support_window_widened() {
        let tf = FejerTestFunction::new(5.0_f64.ln() / (2.0 * PI)).unwrap();
        assert_eq!(tf.support_window().unwrap(), (2, 4));
    }

    #[test]
    fn support_window_degenerate() {
        let tf = FejerTestFunction::new(2.0_f64.ln() / (4.0 * PI)).unwrap();
        assert!(matches!(
            tf.support_window(),
            Err(TestFnError::DegenerateSupport(_))
        ));
    }

    #[test]
    fn series_branch_is_continuous() {
        let tf = FejerTestFunction::paper();
        // compare the two branches just across the switchover
        let x_lo = 1e-4 / (PI * tf.delta()) * 0.999;
        let x_hi = 1e-4 / (PI * tf.delta()) * 1.001;
        assert!((tf.eval_f(x_lo) - tf.eval_f(x_hi)).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn f_nonnegative_and_even(x in -1e4f64..1e4, d in 0.01f64..2.0) {
            let tf = FejerTestFunction::new(d).unwrap();
            prop_assert!(tf.eval_f(x) >= 0.0);
            prop_assert!((tf.eval_f(x) - tf.eval_f(-x)).abs() <= 1e-15 * (1.0 + tf.eval_f(x)));
            prop_assert!((tf.eval_f_hat(x) - tf.eval_f_hat(-x)).abs() == 0.0);
        }
    }
}
