//! Exact binary rationals `mant * 2^exp` with optional rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::multidouble::MultiDouble;

/// `mant * 2^exp`, kept with an odd mantissa (or zero with `exp == 0`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn from_i64(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    /// Exact value of a finite binary64 number.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value {x}");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1 << 52), biased - 1075)
        };
        let m = BigInt::from(m);
        Self::new(if x < 0.0 { -m } else { m }, e)
    }

    /// Exact sum of the limbs.
    pub fn from_limbs(limbs: &[f64]) -> Self {
        let parts: Vec<Dyadic> = limbs.iter().filter(|&&v| v != 0.0).map(|&v| Self::from_f64(v)).collect();
        let Some(min_exp) = parts.iter().map(|d| d.exp).min() else {
            return Self::zero();
        };
        let mut mant = BigInt::zero();
        for d in parts {
            mant += d.mant << (d.exp - min_exp) as usize;
        }
        Self::new(mant, min_exp)
    }

    pub fn from_multidouble(x: &MultiDouble) -> Self {
        Self::from_limbs(x.limbs())
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Significant bits of the mantissa.
    pub fn precision_bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Rounds to `bits` significant bits, ties to even.
    pub fn round(&self, bits: u64) -> Self {
        assert!(bits >= 1);
        let have = self.mant.bits();
        if have <= bits {
            return self.clone();
        }
        let shift = have - bits;
        let neg = self.mant.sign() == Sign::Minus;
        let mag = self.mant.magnitude();
        let mut q = mag >> shift;
        let rem = mag - (&q << shift);
        let half = num_bigint::BigUint::from(1u8) << (shift - 1);
        let round_up = match rem.cmp(&half) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => q.bit(0),
        };
        if round_up {
            q += 1u8;
        }
        let q = BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, q);
        Self::new(q, self.exp + shift as i64)
    }

    /// Nearest binary64 value (ties to even; no subnormal special-casing).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(53);
        let m = r.mant.to_f64().expect("53-bit mantissa");
        ldexp(m, r.exp)
    }

    /// Greedy `m`-limb approximation, renormalized.
    pub fn to_limbs(&self, m: usize) -> Vec<f64> {
        let mut rest = self.clone();
        let mut limbs = Vec::with_capacity(m);
        for _ in 0..m {
            let v = rest.to_f64();
            limbs.push(v);
            rest = &rest - &Dyadic::from_f64(v);
        }
        crate::multidouble::expansion::renormalize_exact(&limbs, m)
    }

    /// `|self - exact| / |exact|`, or the absolute error when `exact` is 0.
    pub fn relative_error(&self, exact: &Dyadic) -> f64 {
        let diff = (self - exact).to_f64().abs();
        if exact.is_zero() {
            diff
        } else {
            diff / exact.to_f64().abs()
        }
    }

    fn normalize(&mut self) {
        match self.mant.trailing_zeros() {
            None => self.exp = 0,
            Some(0) => {}
            Some(tz) => {
                self.mant >>= tz as usize;
                self.exp += tz as i64;
            }
        }
    }
}

fn ldexp(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (lo, hi) = if self.exp <= rhs.exp { (self, rhs) } else { (rhs, self) };
        let mant = &lo.mant + (&hi.mant << (hi.exp - lo.exp) as usize);
        Dyadic::new(mant, lo.exp)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &rhs.mant,
            exp: self.exp + rhs.exp,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self - other;
        diff.mant.sign().cmp(&Sign::NoSign)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * 2^{}", self.mant, self.exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        for x in [1.0, -0.1, 3.0e300, 5e-324, 2f64.powi(-1022), 123456.789] {
            assert_eq!(Dyadic::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = Dyadic::from_f64(0.1);
        let b = Dyadic::from_f64(0.2);
        let s = &a + &b;
        assert_ne!(s, Dyadic::from_f64(0.3));
        assert_eq!(&s - &b, a);
        assert_eq!(&(&a * &b) - &(&b * &a), Dyadic::zero());
    }

    #[test]
    fn rounding_ties_to_even() {
        // 0b1011 -> 3 bits: 0b110 (tie rounds up to even); 0b1001 -> 0b100.
        assert_eq!(Dyadic::from_i64(11).round(3), Dyadic::from_i64(12));
        assert_eq!(Dyadic::from_i64(9).round(3), Dyadic::from_i64(8));
        assert_eq!(Dyadic::from_i64(-13).round(3), Dyadic::from_i64(-12));
    }

    #[test]
    fn limbs_round_trip() {
        let x = &Dyadic::from_f64(1.0) + &Dyadic::from_f64(2f64.powi(-80));
        let limbs = x.to_limbs(2);
        assert_eq!(limbs, vec![1.0, 2f64.powi(-80)]);
        assert_eq!(Dyadic::from_limbs(&limbs), x);
    }

    #[test]
    fn ordering() {
        assert!(Dyadic::from_f64(-1.5) < Dyadic::from_f64(0.25));
        assert!(Dyadic::from_f64(2.0) > Dyadic::from_f64(1.75));
    }
}
