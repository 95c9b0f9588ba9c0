//! Brute-force references: symbolic differentiation with direct series
//! arithmetic, and exact or rounded big-float evaluation.

mod dyadic;

pub use dyadic::Dyadic;

use crate::error::{Error, Result};
use crate::jobgraph::{MonomialShape, Polynomial};
use crate::multidouble::md_sub;
use crate::pseries::{Mode, Series};

/// Largest [`direct_cost`] accepted by [`eval_direct`].
pub const DIRECT_GUARD: u64 = 10_000_000;

/// One term of a symbolic partial derivative: `multiplier * a_k * x^reduced`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicTerm {
    /// 0-based monomial index.
    pub monomial: usize,
    pub multiplier: u32,
    /// The monomial with the differentiated exponent lowered by one;
    /// variables whose exponent reaches zero are dropped.
    pub reduced: Vec<(usize, u32)>,
}

/// Per variable (index `i - 1`), the terms of `dp/dx_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicGradient {
    pub terms: Vec<Vec<SymbolicTerm>>,
}

impl SymbolicGradient {
    pub fn new(n_vars: usize, shapes: &[MonomialShape]) -> Self {
        let mut terms = vec![Vec::new(); n_vars];
        for (k, shape) in shapes.iter().enumerate() {
            for (p, (&i, &e)) in shape.indices.iter().zip(&shape.exponents).enumerate() {
                let reduced = shape
                    .indices
                    .iter()
                    .zip(&shape.exponents)
                    .enumerate()
                    .filter_map(|(q, (&j, &f))| {
                        let f = if q == p { f - 1 } else { f };
                        (f > 0).then_some((j, f))
                    })
                    .collect();
                terms[i - 1].push(SymbolicTerm {
                    monomial: k,
                    multiplier: e,
                    reduced,
                });
            }
        }
        SymbolicGradient { terms }
    }

    /// Checks `sum_i x_i * dm/dx_i = (sum e_i) * m` for every monomial.
    pub fn satisfies_euler(&self, shapes: &[MonomialShape]) -> bool {
        let mut totals = vec![0u64; shapes.len()];
        for (i0, terms) in self.terms.iter().enumerate() {
            for t in terms {
                let mut restored = t.reduced.clone();
                match restored.iter_mut().find(|(j, _)| *j == i0 + 1) {
                    Some((_, f)) => *f += 1,
                    None => {
                        restored.push((i0 + 1, 1));
                        restored.sort_unstable();
                    }
                }
                let shape = &shapes[t.monomial];
                let original: Vec<(usize, u32)> = shape
                    .indices
                    .iter()
                    .copied()
                    .zip(shape.exponents.iter().copied())
                    .collect();
                if restored != original {
                    return false;
                }
                totals[t.monomial] += t.multiplier as u64;
            }
        }
        shapes
            .iter()
            .zip(&totals)
            .all(|(s, &t)| s.exponents.iter().map(|&e| e as u64).sum::<u64>() == t)
    }
}

/// `N * (n_1 + ... + n_N) * d^2`, the size measure guarded by
/// [`eval_direct`].
pub fn direct_cost(poly: &Polynomial) -> u64 {
    let occurrences: u64 = poly.monomials().iter().map(|m| m.num_vars() as u64).sum();
    let d = poly.degree() as u64;
    poly.num_monomials() as u64 * occurrences * d * d
}

/// Value and gradient by direct series arithmetic in the polynomial's own
/// precision: each monomial is multiplied out left to right, each partial
/// derivative comes from its symbolic form, and sums run in monomial order.
pub fn eval_direct(poly: &Polynomial, z: &[Series]) -> Result<(Series, Vec<Series>)> {
    let cost = direct_cost(poly);
    if cost > DIRECT_GUARD {
        return Err(Error::OracleGuard {
            cost,
            limit: DIRECT_GUARD,
        });
    }
    poly.check_inputs(z)?;
    let product = |coeff: &Series, factors: &[(usize, u32)]| -> Result<Series> {
        let mut acc = coeff.clone();
        for &(i, e) in factors {
            for _ in 0..e {
                acc = acc.conv(&z[i - 1])?;
            }
        }
        Ok(acc)
    };
    let mut value = poly.constant().clone();
    for mono in poly.monomials() {
        let factors: Vec<(usize, u32)> = mono
            .indices()
            .iter()
            .copied()
            .zip(mono.exponents().iter().copied())
            .collect();
        value = value.add(&product(&mono.coeff, &factors)?)?;
    }
    let symbolic = SymbolicGradient::new(poly.num_vars(), &poly.shapes());
    let zero = Series::zero(poly.degree(), poly.precision(), poly.mode());
    let mut gradient = Vec::with_capacity(poly.num_vars());
    for terms in &symbolic.terms {
        let mut acc: Option<Series> = None;
        for t in terms {
            let coeff = &poly.monomials()[t.monomial].coeff;
            let term = product(coeff, &t.reduced)?.scale_int(t.multiplier as i64);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        gradient.push(acc.unwrap_or_else(|| zero.clone()));
    }
    Ok((value, gradient))
}

/// Largest coefficient difference between two compatible series, relative
/// to the largest coefficient magnitude of `reference` (absolute when that
/// is zero). Real and imaginary parts are compared separately.
pub fn max_discrepancy(approx: &Series, reference: &Series) -> Result<f64> {
    reference.check_compatible(approx)?;
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in approx.coeffs().zip(reference.coeffs()) {
        let parts = [(Some(a.re), Some(b.re)), (a.im, b.im)];
        for (x, y) in parts {
            if let (Some(x), Some(y)) = (x, y) {
                diff = diff.max(md_sub(&x, &y).to_f64().abs());
                scale = scale.max(y.to_f64().abs());
            }
        }
    }
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

/// A real series with big-float coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigSeries {
    pub coeffs: Vec<Dyadic>,
}

impl BigSeries {
    pub fn zero(degree: usize) -> Self {
        BigSeries {
            coeffs: vec![Dyadic::zero(); degree + 1],
        }
    }

    /// Exact value of a real multiple-double series.
    pub fn from_series(s: &Series) -> Result<Self> {
        if s.mode() != Mode::Real {
            return Err(Error::Unsupported("complex big-float series".into()));
        }
        let m = s.precision().limbs();
        Ok(BigSeries {
            coeffs: s.re_limbs().chunks_exact(m).map(Dyadic::from_limbs).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn round(&mut self, bits: Option<u64>) {
        if let Some(b) = bits {
            for c in &mut self.coeffs {
                *c = c.round(b);
            }
        }
    }

    /// Truncated product, each coefficient product and partial sum rounded
    /// to `bits` when given.
    pub fn conv(&self, other: &BigSeries, bits: Option<u64>) -> BigSeries {
        let n = self.coeffs.len();
        let mut out = BigSeries::zero(n - 1);
        for k in 0..n {
            let mut acc = Dyadic::zero();
            for i in 0..=k {
                let mut p = &self.coeffs[i] * &other.coeffs[k - i];
                if let Some(b) = bits {
                    p = p.round(b);
                }
                acc = &acc + &p;
                if let Some(b) = bits {
                    acc = acc.round(b);
                }
            }
            out.coeffs[k] = acc;
        }
        out
    }

    pub fn add(&self, other: &BigSeries, bits: Option<u64>) -> BigSeries {
        let mut out = BigSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        };
        out.round(bits);
        out
    }

    pub fn scale_int(&self, c: i64) -> BigSeries {
        let f = Dyadic::from_i64(c);
        BigSeries {
            coeffs: self.coeffs.iter().map(|a| a * &f).collect(),
        }
    }

    /// Largest coefficient magnitude, as binary64.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// `max_k |s_k - self_k| / max_k |self_k|`; absolute when `self` is 0.
    pub fn normwise_error(&self, s: &Series) -> Result<f64> {
        let other = BigSeries::from_series(s)?;
        if other.coeffs.len() != self.coeffs.len() {
            return Err(Error::DegreeMismatch {
                expected: self.degree(),
                found: other.degree(),
            });
        }
        let diff = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (b - a).to_f64().abs())
            .fold(0.0, f64::max);
        let scale = self.max_abs();
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }
}

/// Minimum working precision accepted by [`eval_bigfloat`] at `m` limbs.
pub fn min_bigfloat_bits(m: usize) -> u64 {
    64 * m as u64 + 64
}

/// Same semantics as [`eval_direct`] on big-float coefficients, rounding
/// every operation to `bits` significant bits. `None` keeps everything
/// exact. Real mode only.
pub fn eval_bigfloat(
    poly: &Polynomial,
    z: &[Series],
    bits: Option<u64>,
) -> Result<(BigSeries, Vec<BigSeries>)> {
    if poly.mode() != Mode::Real {
        return Err(Error::Unsupported(
            "big-float evaluation supports real mode only".into(),
        ));
    }
    let m = poly.precision().limbs();
    if let Some(b) = bits {
        if b < min_bigfloat_bits(m) {
            return Err(Error::InvalidInput(format!(
                "{b} bits is below the {} required at {m} limbs",
                min_bigfloat_bits(m)
            )));
        }
    }
    poly.check_inputs(z)?;
    let zs: Vec<BigSeries> = z.iter().map(BigSeries::from_series).collect::<Result<_>>()?;
    let product = |coeff: &Series, factors: &[(usize, u32)]| -> Result<BigSeries> {
        let mut acc = BigSeries::from_series(coeff)?;
        for &(i, e) in factors {
            for _ in 0..e {
                acc = acc.conv(&zs[i - 1], bits);
            }
        }
        Ok(acc)
    };
    let mut value = BigSeries::from_series(poly.constant())?;
    for mono in poly.monomials() {
        let factors: Vec<(usize, u32)> = mono
            .indices()
            .iter()
            .copied()
            .zip(mono.exponents().iter().copied())
            .collect();
        value = value.add(&product(&mono.coeff, &factors)?, bits);
    }
    let symbolic = SymbolicGradient::new(poly.num_vars(), &poly.shapes());
    let mut gradient = Vec::with_capacity(poly.num_vars());
    for terms in &symbolic.terms {
        let mut acc = BigSeries::zero(poly.degree());
        for t in terms {
            let coeff = &poly.monomials()[t.monomial].coeff;
            let term = product(coeff, &t.reduced)?.scale_int(t.multiplier as i64);
            acc = acc.add(&term, bits);
        }
        gradient.push(acc);
    }
    Ok((value, gradient))
}
