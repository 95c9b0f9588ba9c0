//! Multiple-double arithmetic: real numbers stored as unevaluated sums of
//! `m` binary64 limbs, for `m` in {1, 2, 3, 4, 5, 8, 10}.
//!
//! Overflow and underflow are not guarded; callers keep magnitudes well
//! inside the binary64 range.

pub mod cost;
pub mod eft;
pub mod expansion;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use cost::{instrumented_cost, OpCost, OpCostTable, DECA_REFERENCE_COST};
pub use eft::{two_prod, two_sum};
pub use expansion::MAX_LIMBS;

use crate::error::{Error, Result};

/// Relative accuracy target for one addition or multiplication at `m`
/// limbs: `2^(16 - 52 m)`.
pub fn accuracy_bound(precision: Precision) -> f64 {
    2f64.powi(16 - 52 * precision.limbs() as i32)
}

/// Number of binary64 limbs per value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precision {
    Double,
    DoubleDouble,
    Triple,
    Quad,
    Penta,
    Octo,
    Deca,
}

impl Precision {
    pub const ALL: [Precision; 7] = [
        Precision::Double,
        Precision::DoubleDouble,
        Precision::Triple,
        Precision::Quad,
        Precision::Penta,
        Precision::Octo,
        Precision::Deca,
    ];

    pub const fn limbs(self) -> usize {
        match self {
            Precision::Double => 1,
            Precision::DoubleDouble => 2,
            Precision::Triple => 3,
            Precision::Quad => 4,
            Precision::Penta => 5,
            Precision::Octo => 8,
            Precision::Deca => 10,
        }
    }

    pub fn from_limbs(m: usize) -> Result<Self> {
        Precision::ALL
            .into_iter()
            .find(|p| p.limbs() == m)
            .ok_or(Error::UnsupportedPrecision(m))
    }

    pub(crate) const fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}d", self.limbs())
    }
}

/// Runs `$body` with `$m` bound to the limb count of `$precision` as a
/// `const usize`, so generic kernels can be monomorphized per level.
#[macro_export]
macro_rules! with_limbs {
    ($precision:expr, $m:ident => $body:expr) => {
        match $precision {
            $crate::multidouble::Precision::Double => {
                const $m: usize = 1;
                $body
            }
            $crate::multidouble::Precision::DoubleDouble => {
                const $m: usize = 2;
                $body
            }
            $crate::multidouble::Precision::Triple => {
                const $m: usize = 3;
                $body
            }
            $crate::multidouble::Precision::Quad => {
                const $m: usize = 4;
                $body
            }
            $crate::multidouble::Precision::Penta => {
                const $m: usize = 5;
                $body
            }
            $crate::multidouble::Precision::Octo => {
                const $m: usize = 8;
                $body
            }
            $crate::multidouble::Precision::Deca => {
                const $m: usize = 10;
                $body
            }
        }
    };
}

/// A normalized multiple-double value. Limbs beyond the precision are zero.
#[derive(Clone, Copy, PartialEq)]
pub struct MultiDouble {
    precision: Precision,
    limbs: [f64; MAX_LIMBS],
}

impl MultiDouble {
    pub fn zero(precision: Precision) -> Self {
        MultiDouble {
            precision,
            limbs: [0.0; MAX_LIMBS],
        }
    }

    pub fn from_f64(x: f64, precision: Precision) -> Self {
        let mut md = Self::zero(precision);
        md.limbs[0] = x;
        md
    }

    pub fn one(precision: Precision) -> Self {
        Self::from_f64(1.0, precision)
    }

    /// Builds a value from an arbitrary sequence of finite doubles, rounding
    /// their exact sum to a normalized expansion of `precision` limbs.
    pub fn renormalize(terms: &[f64], precision: Precision) -> Self {
        let limbs = expansion::renormalize_exact(terms, precision.limbs());
        Self::from_normalized_limbs(&limbs, precision)
    }

    /// Wraps limbs that are already normalized. Missing limbs are zero and
    /// extra limbs are ignored.
    pub fn from_normalized_limbs(limbs: &[f64], precision: Precision) -> Self {
        let mut md = Self::zero(precision);
        let m = precision.limbs().min(limbs.len());
        md.limbs[..m].copy_from_slice(&limbs[..m]);
        md
    }

    pub(crate) fn from_array<const M: usize>(limbs: [f64; M], precision: Precision) -> Self {
        debug_assert_eq!(M, precision.limbs());
        Self::from_normalized_limbs(&limbs, precision)
    }

    pub(crate) fn to_array<const M: usize>(self) -> [f64; M] {
        std::array::from_fn(|i| self.limbs[i])
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn limbs(&self) -> &[f64] {
        &self.limbs[..self.precision.limbs()]
    }

    pub fn leading(&self) -> f64 {
        self.limbs[0]
    }

    /// Nearest-ish binary64 approximation (sum of limbs from the bottom).
    pub fn to_f64(&self) -> f64 {
        self.limbs().iter().rev().fold(0.0, |acc, &l| acc + l)
    }

    pub fn is_zero(&self) -> bool {
        self.limbs[0] == 0.0
    }

    /// True when the limbs satisfy the normalization invariant.
    pub fn is_normalized(&self) -> bool {
        self.limbs()
            .windows(2)
            .all(|w| two_sum(w[0], w[1]) == (w[0], w[1]))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.precision != other.precision {
            return Err(Error::PrecisionMismatch {
                expected: self.precision,
                found: other.precision,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(md_add(self, other))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(md_sub(self, other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(md_mul(self, other))
    }

    /// Multiplies by a binary64 value, e.g. an exactly representable integer.
    pub fn scale(&self, c: f64) -> Self {
        let p = self.precision;
        with_limbs!(p, M => Self::from_array(
            expansion::mul_scalar::<f64, M>(&self.to_array(), c),
            p,
        ))
    }
}

/// Multiple-double sum. Both operands must share one precision.
pub fn md_add(x: &MultiDouble, y: &MultiDouble) -> MultiDouble {
    debug_assert_eq!(x.precision, y.precision);
    let p = x.precision;
    with_limbs!(p, M => MultiDouble::from_array(
        expansion::add::<f64, M>(&x.to_array(), &y.to_array()),
        p,
    ))
}

/// Multiple-double difference.
pub fn md_sub(x: &MultiDouble, y: &MultiDouble) -> MultiDouble {
    debug_assert_eq!(x.precision, y.precision);
    let p = x.precision;
    with_limbs!(p, M => MultiDouble::from_array(
        expansion::sub::<f64, M>(&x.to_array(), &y.to_array()),
        p,
    ))
}

/// Multiple-double product.
pub fn md_mul(x: &MultiDouble, y: &MultiDouble) -> MultiDouble {
    debug_assert_eq!(x.precision, y.precision);
    let p = x.precision;
    with_limbs!(p, M => MultiDouble::from_array(
        expansion::mul::<f64, M>(&x.to_array(), &y.to_array()),
        p,
    ))
}

impl Add for MultiDouble {
    type Output = MultiDouble;
    fn add(self, rhs: Self) -> Self {
        md_add(&self, &rhs)
    }
}

impl Sub for MultiDouble {
    type Output = MultiDouble;
    fn sub(self, rhs: Self) -> Self {
        md_sub(&self, &rhs)
    }
}

impl Mul for MultiDouble {
    type Output = MultiDouble;
    fn mul(self, rhs: Self) -> Self {
        md_mul(&self, &rhs)
    }
}

impl Neg for MultiDouble {
    type Output = MultiDouble;
    fn neg(mut self) -> Self {
        for l in &mut self.limbs {
            *l = -*l;
        }
        self
    }
}

impl fmt::Debug for MultiDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiDouble<{}>{:?}", self.precision, self.limbs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_levels() {
        let limbs: Vec<usize> = Precision::ALL.iter().map(|p| p.limbs()).collect();
        assert_eq!(limbs, [1, 2, 3, 4, 5, 8, 10]);
        assert!(matches!(
            Precision::from_limbs(7),
            Err(Error::UnsupportedPrecision(7))
        ));
        assert_eq!(Precision::from_limbs(8).unwrap(), Precision::Octo);
    }

    #[test]
    fn double_is_plain_binary64() {
        let p = Precision::Double;
        let (a, b) = (0.1, 0.7);
        let x = MultiDouble::from_f64(a, p);
        let y = MultiDouble::from_f64(b, p);
        assert_eq!((x + y).leading().to_bits(), (a + b).to_bits());
        assert_eq!((x * y).leading().to_bits(), (a * b).to_bits());
        assert_eq!((x - y).leading().to_bits(), (a - b).to_bits());
    }

    #[test]
    fn identities() {
        let p = Precision::Quad;
        let x = MultiDouble::renormalize(&[0.3, 1e-17, 3e-34, -1e-50], p);
        assert_eq!(x + MultiDouble::zero(p), x);
        assert!((x + (-x)).is_zero());
        assert_eq!(x * MultiDouble::one(p), x);
        assert!((x * MultiDouble::zero(p)).is_zero());
    }

    #[test]
    fn mismatched_precision_is_rejected() {
        let x = MultiDouble::one(Precision::Triple);
        let y = MultiDouble::one(Precision::Quad);
        assert!(matches!(
            x.try_add(&y),
            Err(Error::PrecisionMismatch { .. })
        ));
    }

    #[test]
    fn scale_by_integer() {
        let p = Precision::DoubleDouble;
        let x = MultiDouble::renormalize(&[1.0, 2f64.powi(-70)], p);
        let y = x.scale(3.0);
        assert_eq!(y.limbs(), &[3.0, 3.0 * 2f64.powi(-70)]);
    }
}
