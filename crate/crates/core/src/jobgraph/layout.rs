//! Slot layout of the flat coefficient arena.
//!
//! Slots are series-granular; the raw offset of slot `s` at degree `d` is
//! `s * (d + 1)`. In order: the constant term, the `N` monomial
//! coefficients, the `n` inputs, then every forward product, every backward
//! product and every cross product, monomial by monomial.

use super::polynomial::MonomialShape;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    n_vars: usize,
    sizes: Vec<usize>,
    // Prefix sums over monomials, length N + 1; entry k - 1 belongs to
    // monomial k and entry N is the region total.
    alpha: Vec<usize>,
    beta: Vec<usize>,
    gamma: Vec<usize>,
}

/// Backward products stored for a monomial of `nk` variables.
pub fn backward_count(nk: usize) -> usize {
    nk.saturating_sub(2).max(1)
}

/// Cross products stored for a monomial of `nk` variables.
pub fn cross_count(nk: usize) -> usize {
    nk.saturating_sub(2)
}

impl Layout {
    pub fn new(n_vars: usize, sizes: Vec<usize>) -> Self {
        let count = sizes.len();
        let mut alpha = Vec::with_capacity(count + 1);
        let mut acc = 0;
        for &nk in &sizes {
            alpha.push(acc);
            acc += nk;
        }
        alpha.push(acc);
        let mut beta = Vec::with_capacity(count + 1);
        for &nk in &sizes {
            beta.push(acc);
            acc += backward_count(nk);
        }
        beta.push(acc);
        let mut gamma = Vec::with_capacity(count + 1);
        for &nk in &sizes {
            gamma.push(acc);
            acc += cross_count(nk);
        }
        gamma.push(acc);
        Layout {
            n_vars,
            sizes,
            alpha,
            beta,
            gamma,
        }
    }

    pub fn from_shapes(n_vars: usize, shapes: &[MonomialShape]) -> Self {
        Self::new(n_vars, shapes.iter().map(MonomialShape::len).collect())
    }

    pub fn num_monomials(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_vars(&self) -> usize {
        self.n_vars
    }

    /// Variables in monomial `k` (1-based).
    pub fn size(&self, k: usize) -> usize {
        self.sizes[k - 1]
    }

    /// Offset of `f_{k,1}` within the product region.
    pub fn alpha(&self, k: usize) -> usize {
        self.alpha[k - 1]
    }

    /// Offset of `b_{k,1}` within the product region.
    pub fn beta(&self, k: usize) -> usize {
        self.beta[k - 1]
    }

    /// Offset of `c_{k,1}` within the product region.
    pub fn gamma(&self, k: usize) -> usize {
        self.gamma[k - 1]
    }

    /// Number of static slots: constant, coefficients and inputs.
    pub fn static_slots(&self) -> usize {
        1 + self.num_monomials() + self.n_vars
    }

    pub fn total_slots(&self) -> usize {
        self.static_slots() + self.gamma[self.num_monomials()]
    }

    /// Doubles per slab at degree `d`.
    pub fn total_len(&self, degree: usize) -> usize {
        self.total_slots() * (degree + 1)
    }

    pub fn constant_slot(&self) -> usize {
        0
    }

    pub fn coeff_slot(&self, k: usize) -> usize {
        k
    }

    /// Slot of input series `z_i` (1-based `i`).
    pub fn input_slot(&self, i: usize) -> usize {
        self.num_monomials() + i
    }

    pub fn forward(&self, k: usize, l: usize) -> usize {
        debug_assert!(l >= 1 && l <= self.size(k));
        self.static_slots() + self.alpha(k) + l - 1
    }

    pub fn backward(&self, k: usize, l: usize) -> usize {
        debug_assert!(l >= 1 && l <= backward_count(self.size(k)));
        self.static_slots() + self.beta(k) + l - 1
    }

    pub fn cross(&self, k: usize, l: usize) -> usize {
        debug_assert!(l >= 1 && l <= cross_count(self.size(k)));
        self.static_slots() + self.gamma(k) + l - 1
    }

    pub fn is_static(&self, slot: usize) -> bool {
        slot < self.static_slots()
    }
}

/// Raw offset of a slot in one slab.
pub fn raw_offset(slot: usize, degree: usize) -> usize {
    slot * (degree + 1)
}
