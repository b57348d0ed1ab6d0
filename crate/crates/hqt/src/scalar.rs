//! Scalar abstraction for the half-space geometry.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt;

/// Floating-point scalar the geometric formulas are written against.
///
/// Implemented for `f32` and `f64`. Fixed-point quantisation (the L-order
/// comparator) always goes through `f64`, so `f32` inputs are widened before
/// being quantised.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from `f64` for constants.
    fn from_f64_c(v: f64) -> Self {
        Self::from_f64(v).expect("constant conversion")
    }

    /// Widen to `f64` for quantisation.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Inverse hyperbolic sine, computed as `ln(t + sqrt(t^2 + 1))` with a series
/// fallback for tiny arguments where the logarithm form cancels.
pub fn arsinh<S: Scalar>(t: S) -> S {
    let a = t.abs();
    let small = S::from_f64_c(1e-4);
    let r = if a < small {
        // t - t^3/6 + 3 t^5/40, truncation error below 2^-80 for |t| < 1e-4
        let t2 = a * a;
        a * (S::one() - t2 / S::from_f64_c(6.0)
            + t2 * t2 * S::from_f64_c(3.0 / 40.0))
    } else {
        (a + (a * a + S::one()).sqrt()).ln()
    };
    if t < S::zero() {
        -r
    } else {
        r
    }
}

/// `arsinh(2^e)` without materialising `2^e`, valid for exponents far beyond
/// the representable range of the scalar.
pub fn arsinh_exp2(e: f64) -> f64 {
    if e > 500.0 {
        // arsinh(x) = ln(2x) + O(1/x^2)
        std::f64::consts::LN_2 * (e + 1.0)
    } else if e < -500.0 {
        e.exp2() // arsinh(x) ~ x
    } else {
        arsinh(e.exp2())
    }
}

/// `2^e - 1` computed stably for any sign of `e`.
pub fn exp2_m1(e: f64) -> f64 {
    (e * std::f64::consts::LN_2).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arsinh_matches_std() {
        for &t in &[0.0, 1e-8, 1e-5, 1e-3, 0.5, 1.0, 4.0, 1e6, -0.25, -3.0] {
            let got: f64 = arsinh(t);
            assert!((got - t.asinh()).abs() <= 1e-15 * (1.0 + t.abs().ln().abs()));
        }
    }

    #[test]
    fn arsinh_exp2_log_domain() {
        assert!((arsinh_exp2(3.0) - 8f64.asinh()).abs() < 1e-12);
        let big = arsinh_exp2(1e6);
        assert!((big - std::f64::consts::LN_2 * (1e6 + 1.0)).abs() < 1e-6);
    }

    #[test]
    fn exp2_m1_small() {
        assert!((exp2_m1(-40.0) - (2f64.powi(-40) - 1.0)).abs() < 1e-16);
        let tiny = exp2_m1(1e-12);
        assert!((tiny - 1e-12 * std::f64::consts::LN_2).abs() < 1e-24);
        assert_eq!(exp2_m1(0.0), 0.0);
    }
}
