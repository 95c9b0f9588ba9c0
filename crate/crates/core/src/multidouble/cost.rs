//! Binary64 operation counts for multiple-double addition and multiplication.

use std::cell::Cell;
use std::ops::{Add, Mul, Neg, Sub};

use super::eft::Scalar;
use super::expansion;
use super::Precision;

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

fn tick() {
    OPS.with(|c| c.set(c.get() + 1));
}

/// A binary64 value that counts every arithmetic operation applied to it.
/// Negation and absolute value are sign manipulations and are not counted;
/// a fused multiply-add counts as one operation.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Tally(pub f64);

impl Add for Tally {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        tick();
        Tally(self.0 + rhs.0)
    }
}

impl Sub for Tally {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        tick();
        Tally(self.0 - rhs.0)
    }
}

impl Mul for Tally {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        tick();
        Tally(self.0 * rhs.0)
    }
}

impl Neg for Tally {
    type Output = Self;
    fn neg(self) -> Self {
        Tally(-self.0)
    }
}

impl Scalar for Tally {
    const ZERO: Self = Tally(0.0);

    fn from_f64(x: f64) -> Self {
        Tally(x)
    }

    fn to_f64(self) -> f64 {
        self.0
    }

    fn fused_mul_add(self, a: Self, b: Self) -> Self {
        tick();
        Tally(self.0.mul_add(a.0, b.0))
    }

    fn abs(self) -> Self {
        Tally(self.0.abs())
    }
}

/// Runs `f` and returns its result with the number of counted operations.
pub fn count_ops<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = OPS.with(Cell::get);
    let r = f();
    let after = OPS.with(Cell::get);
    (r, after - before)
}

/// Double operations per multiple-double addition and multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpCost {
    pub add: u64,
    pub mul: u64,
}

/// Deca-double costs of the generated code the published operation counts
/// refer to: 139 additions + 258 subtractions per addition, and
/// 952 additions + 1743 subtractions + 394 multiplications per multiplication.
pub const DECA_REFERENCE_COST: OpCost = OpCost {
    add: 139 + 258,
    mul: 952 + 1743 + 394,
};

// Fixed operands so the data-dependent branches take the same path each run.
fn probe_operands<const M: usize>() -> ([Tally; M], [Tally; M]) {
    let mut x = [0.0; M];
    let mut y = [0.0; M];
    let mut scale = 1.0;
    for i in 0..M {
        x[i] = scale * (0.612_345_678_912_345_6 + 0.013 * i as f64);
        y[i] = -scale * (0.739_876_543_219_876_5 - 0.017 * i as f64);
        scale *= f64::EPSILON / 2.0 * 0.75;
    }
    let x = expansion::renormalize_exact(&x, M);
    let y = expansion::renormalize_exact(&y, M);
    (
        std::array::from_fn(|i| Tally(x[i])),
        std::array::from_fn(|i| Tally(y[i])),
    )
}

fn measure<const M: usize>() -> OpCost {
    let (x, y) = probe_operands::<M>();
    let (_, add) = count_ops(|| expansion::add(&x, &y));
    let (_, mul) = count_ops(|| expansion::mul(&x, &y));
    OpCost { add, mul }
}

/// Operation counts measured by running this crate's own addition and
/// multiplication on fixed operands with a counting scalar type.
pub fn instrumented_cost(precision: Precision) -> OpCost {
    crate::with_limbs!(precision, M => measure::<M>())
}

/// Per-precision cost table used for double-operation accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpCostTable {
    costs: [OpCost; 7],
}

impl OpCostTable {
    /// Costs measured from this implementation at every level.
    pub fn instrumented() -> Self {
        OpCostTable {
            costs: Precision::ALL.map(instrumented_cost),
        }
    }

    /// Instrumented costs, except deca-double which uses the published
    /// reference counts (397 per addition, 3089 per multiplication).
    pub fn reference() -> Self {
        let mut table = Self::instrumented();
        table.costs[Precision::Deca.index()] = DECA_REFERENCE_COST;
        table
    }

    pub fn get(&self, precision: Precision) -> OpCost {
        self.costs[precision.index()]
    }

    pub fn set(&mut self, precision: Precision, cost: OpCost) {
        self.costs[precision.index()] = cost;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_costs_one_each() {
        assert_eq!(
            instrumented_cost(Precision::Double),
            OpCost { add: 1, mul: 1 }
        );
    }

    #[test]
    fn reference_deca() {
        assert_eq!(DECA_REFERENCE_COST, OpCost { add: 397, mul: 3089 });
        let table = OpCostTable::reference();
        assert_eq!(table.get(Precision::Deca), DECA_REFERENCE_COST);
        assert_eq!(table.get(Precision::Double), OpCost { add: 1, mul: 1 });
        assert_eq!(
            table.get(Precision::Quad),
            instrumented_cost(Precision::Quad)
        );
    }

    #[test]
    fn measurement_is_stable() {
        for p in Precision::ALL {
            assert_eq!(instrumented_cost(p), instrumented_cost(p));
        }
    }

    #[test]
    fn cost_grows_with_precision() {
        let table = OpCostTable::instrumented();
        for w in Precision::ALL.windows(2) {
            assert!(table.get(w[0]).mul < table.get(w[1]).mul);
            assert!(table.get(w[0]).add < table.get(w[1]).add);
        }
    }
}
