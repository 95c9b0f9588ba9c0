//! Benchmark polynomials and random instances.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jobgraph::{Monomial, MonomialShape, Polynomial};
use crate::multidouble::Precision;
use crate::pseries::{Mode, Series};

use super::problem::ProblemFile;

/// The three benchmark structures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchmarkId {
    /// All products of 4 out of 16 variables.
    P1,
    /// 128 windows of 64 cyclically consecutive variables out of 128.
    P2,
    /// All products of 2 out of 128 variables.
    P3,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 3] = [BenchmarkId::P1, BenchmarkId::P2, BenchmarkId::P3];

    pub fn num_vars(self) -> usize {
        match self {
            BenchmarkId::P1 => 16,
            BenchmarkId::P2 | BenchmarkId::P3 => 128,
        }
    }

    pub fn shapes(self) -> Vec<MonomialShape> {
        match self {
            BenchmarkId::P1 => combinations(16, 4),
            BenchmarkId::P2 => (1..=128)
                .map(|k| {
                    let mut idx: Vec<usize> = (0..64).map(|j| (k - 1 + j) % 128 + 1).collect();
                    idx.sort_unstable();
                    MonomialShape::multilinear(idx)
                })
                .collect(),
            BenchmarkId::P3 => combinations(128, 2),
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkId::P1 => "p1",
            BenchmarkId::P2 => "p2",
            BenchmarkId::P3 => "p3",
        })
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p1" => Ok(BenchmarkId::P1),
            "p2" => Ok(BenchmarkId::P2),
            "p3" => Ok(BenchmarkId::P3),
            other => Err(Error::InvalidInput(format!(
                "unknown polynomial {other:?} (expected p1, p2 or p3)"
            ))),
        }
    }
}

/// All `k`-subsets of `1..=n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<MonomialShape> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<MonomialShape>) {
        if current.len() == k {
            out.push(MonomialShape::multilinear(current.clone()));
            return;
        }
        for i in start..=n {
            if n - i + 1 < k - current.len() {
                break;
            }
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(1, n, k, &mut current, &mut out);
    out
}

/// Fills the given structure with random coefficients and inputs. The
/// constant is drawn first, then the monomial coefficients in order, then
/// the inputs, all from one stream seeded with `seed`.
pub fn with_random_data(
    n_vars: usize,
    shapes: Vec<MonomialShape>,
    degree: usize,
    precision: Precision,
    mode: Mode,
    seed: u64,
) -> Result<ProblemFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let constant = Series::random_with(&mut rng, degree, precision, mode);
    let monomials = shapes
        .into_iter()
        .map(|shape| Monomial {
            coeff: nonzero_series(&mut rng, degree, precision, mode),
            shape,
        })
        .collect();
    let inputs = (0..n_vars)
        .map(|_| Series::random_with(&mut rng, degree, precision, mode))
        .collect();
    let poly = Polynomial::new(n_vars, constant, monomials)?;
    ProblemFile::new(poly, inputs, seed)
}

fn nonzero_series(rng: &mut ChaCha8Rng, degree: usize, precision: Precision, mode: Mode) -> Series {
    loop {
        let s = Series::random_with(rng, degree, precision, mode);
        if !s.is_zero() {
            return s;
        }
    }
}

/// One of the benchmark polynomials with random data.
pub fn gen(id: BenchmarkId, degree: usize, precision: Precision, mode: Mode, seed: u64) -> Result<ProblemFile> {
    with_random_data(id.num_vars(), id.shapes(), degree, precision, mode, seed)
}

/// Size limits of a random instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomSpec {
    pub max_vars: usize,
    pub max_monomials: usize,
    pub max_degree: usize,
    pub max_exponent: u32,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_vars: 6,
            max_monomials: 10,
            max_degree: 5,
            max_exponent: 1,
        }
    }
}

fn random_shapes(rng: &mut ChaCha8Rng, n: usize, count: usize, max_exponent: u32) -> Vec<MonomialShape> {
    (0..count)
        .map(|_| {
            let nk = rng.gen_range(1..=n);
            let mut idx: Vec<usize> = rand::seq::index::sample(rng, n, nk)
                .into_iter()
                .map(|i| i + 1)
                .collect();
            idx.sort_unstable();
            let exponents = idx.iter().map(|_| rng.gen_range(1..=max_exponent)).collect();
            MonomialShape {
                indices: idx,
                exponents,
            }
        })
        .collect()
}

/// Random structure and random multiple-double data.
pub fn random_instance(spec: RandomSpec, precision: Precision, mode: Mode, seed: u64) -> Result<ProblemFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=spec.max_vars);
    let count = rng.gen_range(1..=spec.max_monomials);
    let degree = rng.gen_range(0..=spec.max_degree);
    let shapes = random_shapes(&mut rng, n, count, spec.max_exponent.max(1));
    with_random_data(n, shapes, degree, precision, mode, rng.gen())
}

/// Random structure with integer coefficients in `[-max_coeff, max_coeff]`,
/// so that at small sizes every double operation is exact.
pub fn random_integer_instance(spec: RandomSpec, max_coeff: i64, mode: Mode, seed: u64) -> Result<ProblemFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=spec.max_vars);
    let count = rng.gen_range(1..=spec.max_monomials);
    let degree = rng.gen_range(0..=spec.max_degree);
    let shapes = random_shapes(&mut rng, n, count, spec.max_exponent.max(1));
    let int_series = |rng: &mut ChaCha8Rng, nonzero: bool| loop {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..=degree)
                .map(|_| rng.gen_range(-max_coeff..=max_coeff) as f64)
                .collect()
        };
        let re = draw(rng);
        let s = match mode {
            Mode::Real => Series::from_f64s(&re, Precision::Double),
            Mode::Complex => {
                let im = draw(rng);
                Series::from_complex_f64s(&re, &im, Precision::Double)
            }
        };
        if !nonzero || !s.is_zero() {
            break s;
        }
    };
    let constant = int_series(&mut rng, false);
    let monomials = shapes
        .into_iter()
        .map(|shape| Monomial {
            coeff: int_series(&mut rng, true),
            shape,
        })
        .collect();
    let inputs = (0..n).map(|_| int_series(&mut rng, false)).collect();
    let poly = Polynomial::new(n, constant, monomials)?;
    ProblemFile::new(poly, inputs, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_sizes() {
        assert_eq!(BenchmarkId::P1.shapes().len(), 1820);
        assert_eq!(BenchmarkId::P3.shapes().len(), 8128);
        let p2 = BenchmarkId::P2.shapes();
        assert_eq!(p2.len(), 128);
        let mut occurrences = [0; 128];
        for s in &p2 {
            assert_eq!(s.len(), 64);
            for &i in &s.indices {
                occurrences[i - 1] += 1;
            }
        }
        assert!(occurrences.iter().all(|&c| c == 64));
    }

    #[test]
    fn lexicographic_order() {
        let c = combinations(4, 2);
        let idx: Vec<Vec<usize>> = c.into_iter().map(|s| s.indices).collect();
        assert_eq!(idx, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen(BenchmarkId::P1, 2, Precision::DoubleDouble, Mode::Real, 5).unwrap();
        let b = gen(BenchmarkId::P1, 2, Precision::DoubleDouble, Mode::Real, 5).unwrap();
        let c = gen(BenchmarkId::P1, 2, Precision::DoubleDouble, Mode::Real, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn integer_instances_are_within_limits() {
        for seed in 0..20 {
            let p = random_integer_instance(RandomSpec::default(), 50, Mode::Real, seed).unwrap();
            assert!(p.header.vars <= 6 && p.header.monomials <= 10 && p.header.degree <= 5);
            for v in p.polynomial.constant().re_limbs() {
                assert!(v.abs() <= 50.0 && v.fract() == 0.0);
            }
        }
    }
}
