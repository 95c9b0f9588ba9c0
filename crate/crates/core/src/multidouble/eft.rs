//! Error-free transformations of binary64 sums and products.
//!
//! Everything here is generic over [`Scalar`] so that the same code runs on
//! plain `f64` and on the operation-counting wrapper in
//! [`super::cost`].

use std::ops::{Add, Mul, Neg, Sub};

/// The arithmetic the expansion algorithms need from a binary64-like type.
pub trait Scalar:
    Copy
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    /// `self * a + b` with a single rounding.
    fn fused_mul_add(self, a: Self, b: Self) -> Self;
    fn abs(self) -> Self;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;

    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline(always)]
    fn fused_mul_add(self, a: Self, b: Self) -> Self {
        self.mul_add(a, b)
    }

    #[inline(always)]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Knuth's branch-free two-sum: `s = fl(a + b)` and `s + e = a + b` exactly.
#[inline(always)]
pub fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Dekker's fast two-sum. Exact only when `|a| >= |b|` or `a == 0`.
#[inline(always)]
pub fn fast_two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// `p = fl(a * b)` and `p + e = a * b` exactly, through a fused multiply-add.
#[inline(always)]
pub fn two_prod_fma<T: Scalar>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let e = a.fused_mul_add(b, -p);
    (p, e)
}

/// Veltkamp splitting of `a` into two halves of at most 26 significant bits.
#[inline(always)]
pub fn split<T: Scalar>(a: T) -> (T, T) {
    // 2^27 + 1
    let factor = T::from_f64(134_217_729.0);
    let t = factor * a;
    let hi = t - (t - a);
    let lo = a - hi;
    (hi, lo)
}

/// Dekker's two-product, for targets without a hardware fused multiply-add.
/// Requires `|a * b|` well below the overflow threshold.
#[inline(always)]
pub fn two_prod_dekker<T: Scalar>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = al * bl - (((p - ah * bh) - al * bh) - ah * bl);
    (p, e)
}

/// Error-free product, picking the fused multiply-add when the target has
/// one and Dekker's splitting otherwise.
#[inline(always)]
pub fn two_prod<T: Scalar>(a: T, b: T) -> (T, T) {
    if cfg!(target_feature = "fma") {
        two_prod_fma(a, b)
    } else {
        two_prod_dekker(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sum_keeps_tiny_addend() {
        let tiny = 2f64.powi(-60);
        assert_eq!(two_sum(1.0, tiny), (1.0, tiny));
    }

    #[test]
    fn two_sum_exact_cancellation() {
        let (s, e) = two_sum(1.0, -1.0);
        assert_eq!(s, 0.0);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn two_sum_at_two_pow_53() {
        // 2^53 + 1 is not representable; the error term carries the 1.
        let big = 2f64.powi(53);
        assert_eq!(two_sum(big, 1.0), (big, 1.0));
    }

    #[test]
    fn two_prod_identity() {
        for x in [0.5, -3.25, 1e300, 7.0e-300] {
            assert_eq!(two_prod(1.0, x), (x, 0.0));
            assert_eq!(two_prod_dekker(1.0, x), (x, 0.0));
        }
    }

    #[test]
    fn two_prod_one_plus_ulp_squared() {
        // (1 + u)^2 = 1 + 2u + u^2 with u = 2^-52; u^2 = 2^-104 is the residual.
        let u = f64::EPSILON;
        let x = 1.0 + u;
        let expect = (1.0 + 2.0 * u, 2f64.powi(-104));
        assert_eq!(two_prod_fma(x, x), expect);
        assert_eq!(two_prod_dekker(x, x), expect);
    }

    #[test]
    fn fma_and_dekker_agree() {
        let third = 1.0 / 3.0;
        assert_eq!(two_prod_fma(3.0, third), two_prod_dekker(3.0, third));
        assert_eq!(two_prod_fma(3.0, third), (1.0, -2f64.powi(-54)));
    }
}
