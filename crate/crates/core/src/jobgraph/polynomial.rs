use crate::error::{Error, Result};
use crate::multidouble::Precision;
use crate::pseries::{Mode, Series};

/// Variable support of one monomial: strictly increasing 1-based indices
/// with a positive exponent per index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialShape {
    pub indices: Vec<usize>,
    pub exponents: Vec<u32>,
}

impl MonomialShape {
    pub fn multilinear(indices: Vec<usize>) -> Self {
        let exponents = vec![1; indices.len()];
        MonomialShape { indices, exponents }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_multilinear(&self) -> bool {
        self.exponents.iter().all(|&e| e == 1)
    }

    /// Checks the index and exponent invariants against `n` variables.
    pub fn check(&self, n: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::InvalidPolynomial(
                "monomial without variables".into(),
            ));
        }
        if self.exponents.len() != self.indices.len() {
            return Err(Error::InvalidPolynomial(format!(
                "{} exponents for {} variables",
                self.exponents.len(),
                self.indices.len()
            )));
        }
        if self.indices[0] == 0 {
            return Err(Error::InvalidPolynomial(
                "variable indices are 1-based".into(),
            ));
        }
        if let Some(w) = self.indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPolynomial(format!(
                "variable indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&last) = self.indices.last() {
            if last > n {
                return Err(Error::InvalidPolynomial(format!(
                    "variable index {last} exceeds n = {n}"
                )));
            }
        }
        if self.exponents.contains(&0) {
            return Err(Error::InvalidPolynomial(
                "exponent 0: drop the variable instead".into(),
            ));
        }
        Ok(())
    }
}

/// A series coefficient times a product of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: Series,
    pub shape: MonomialShape,
}

impl Monomial {
    pub fn new(coeff: Series, indices: Vec<usize>) -> Self {
        Monomial {
            coeff,
            shape: MonomialShape::multilinear(indices),
        }
    }

    pub fn with_exponents(coeff: Series, indices: Vec<usize>, exponents: Vec<u32>) -> Self {
        Monomial {
            coeff,
            shape: MonomialShape { indices, exponents },
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.shape.indices
    }

    pub fn exponents(&self) -> &[u32] {
        &self.shape.exponents
    }

    pub fn num_vars(&self) -> usize {
        self.shape.len()
    }
}

/// `a0 + sum_k a_k * x_{i1}^{e1} * ... * x_{iq}^{eq}` over `n` variables,
/// with every coefficient truncated at one common degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    constant: Series,
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(n: usize, constant: Series, monomials: Vec<Monomial>) -> Result<Self> {
        if let Some(k) = monomials.iter().position(|m| m.coeff.is_zero()) {
            return Err(Error::InvalidPolynomial(format!(
                "monomial {} has an identically zero coefficient",
                k + 1
            )));
        }
        Self::with_zero_coefficients(n, constant, monomials)
    }

    /// Like [`Polynomial::new`] but keeps monomials whose coefficient
    /// vanished, as happens when folding powers of a nilpotent input.
    pub(crate) fn with_zero_coefficients(n: usize, constant: Series, monomials: Vec<Monomial>) -> Result<Self> {
        for (k, mono) in monomials.iter().enumerate() {
            mono.shape.check(n).map_err(|e| match e {
                Error::InvalidPolynomial(msg) => {
                    Error::InvalidPolynomial(format!("monomial {}: {msg}", k + 1))
                }
                other => other,
            })?;
            constant.check_compatible(&mono.coeff).map_err(|e| {
                Error::InvalidPolynomial(format!("monomial {}: {e}", k + 1))
            })?;
        }
        Ok(Polynomial {
            n,
            constant,
            monomials,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_monomials(&self) -> usize {
        self.monomials.len()
    }

    pub fn constant(&self) -> &Series {
        &self.constant
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn degree(&self) -> usize {
        self.constant.degree()
    }

    pub fn precision(&self) -> Precision {
        self.constant.precision()
    }

    pub fn mode(&self) -> Mode {
        self.constant.mode()
    }

    pub fn shapes(&self) -> Vec<MonomialShape> {
        self.monomials.iter().map(|m| m.shape.clone()).collect()
    }

    pub fn is_multilinear(&self) -> bool {
        self.monomials.iter().all(|m| m.shape.is_multilinear())
    }

    /// Checks that `inputs` holds one series per variable, compatible with
    /// the coefficients.
    pub fn check_inputs(&self, inputs: &[Series]) -> Result<()> {
        if inputs.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} input series, got {}",
                self.n,
                inputs.len()
            )));
        }
        for (i, z) in inputs.iter().enumerate() {
            self.constant
                .check_compatible(z)
                .map_err(|e| Error::InvalidInput(format!("input {}: {e}", i + 1)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Series {
        Series::one(2, Precision::Double, Mode::Real)
    }

    #[test]
    fn rejects_bad_indices() {
        let cases = [vec![2, 2], vec![3, 1], vec![0, 1], vec![1, 7], vec![]];
        for idx in cases {
            let mono = Monomial::new(one(), idx.clone());
            assert!(
                Polynomial::new(6, one(), vec![mono]).is_err(),
                "{idx:?} accepted"
            );
        }
    }

    #[test]
    fn rejects_zero_exponent_and_zero_coefficient() {
        let mono = Monomial::with_exponents(one(), vec![1, 2], vec![1, 0]);
        assert!(Polynomial::new(2, one(), vec![mono]).is_err());
        let zero = Series::zero(2, Precision::Double, Mode::Real);
        let mono = Monomial::new(zero, vec![1]);
        assert!(Polynomial::new(2, one(), vec![mono]).is_err());
    }

    #[test]
    fn rejects_mixed_degree() {
        let mono = Monomial::new(Series::one(3, Precision::Double, Mode::Real), vec![1]);
        assert!(Polynomial::new(1, one(), vec![mono]).is_err());
    }
}
