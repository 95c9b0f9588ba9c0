//! Compilation of a polynomial into layered convolution and addition jobs.
//!
//! Every monomial `a_k * z_{i1} * ... * z_{in}` yields forward products
//! `f_l = a z_{i1} ... z_{il}`, backward products taken from the last
//! variable down, and cross products combining the two. After the
//! convolution stage the value and every partial derivative are single
//! sums of slots, reduced pairwise in the addition stage.

mod layout;
mod polynomial;
mod schedule;
mod validate;

use std::collections::HashMap;
use std::fmt;

pub use layout::{backward_count, cross_count, raw_offset, Layout};
pub use polynomial::{Monomial, MonomialShape, Polynomial};
pub use schedule::addition_schedule;
pub use validate::{validate, Stage, Violation, ViolationKind};

use crate::error::{Error, Result};
use crate::pseries::Series;

/// Role of a convolution inside its monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConvKind {
    /// `f_l`.
    Forward,
    /// `b_l`.
    Backward,
    /// The in-place product of the last backward slot with the coefficient.
    Fold,
    /// `c_l`.
    Cross,
}

/// `out := in1 * in2`, truncated; `in1 == out` is allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConvJob {
    pub in1: usize,
    pub in2: usize,
    pub out: usize,
    /// 1-based layer.
    pub layer: usize,
    pub kind: ConvKind,
    /// 1-based monomial index.
    pub monomial: usize,
    /// Index of the produced slot within its family.
    pub index: usize,
}

/// `dst := src` during the first convolution layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CopyJob {
    pub src: usize,
    pub dst: usize,
    pub monomial: usize,
}

/// `dst := dst + src`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AddJob {
    pub src: usize,
    pub dst: usize,
    /// 1-based layer.
    pub layer: usize,
}

impl fmt::Display for ConvJob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}[{}] of monomial {}: {} * {} -> {}",
            self.kind, self.index, self.monomial, self.in1, self.in2, self.out
        )
    }
}

/// Integer factor applied to one slot between the two stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TermScale {
    pub slot: usize,
    pub factor: u32,
}

/// Convolutions (and the copy, if any) emitted for one monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialJobs {
    pub convs: Vec<ConvJob>,
    pub copy: Option<CopyJob>,
}

/// Emits the jobs of monomial `k` (1-based) over the given variables.
pub fn monomial_conv_jobs(k: usize, indices: &[usize], layout: &Layout) -> MonomialJobs {
    let n = indices.len();
    assert!(n >= 1 && n == layout.size(k));
    let a = layout.coeff_slot(k);
    let z = |j: usize| layout.input_slot(indices[j - 1]);
    let f = |l: usize| layout.forward(k, l);
    let b = |l: usize| layout.backward(k, l);
    let c = |l: usize| layout.cross(k, l);
    let job = |in1, in2, out, layer, kind, index| ConvJob {
        in1,
        in2,
        out,
        layer,
        kind,
        monomial: k,
        index,
    };

    let mut convs = Vec::with_capacity(3 * n);
    let mut copy = None;
    convs.push(job(a, z(1), f(1), 1, ConvKind::Forward, 1));
    for l in 2..=n {
        convs.push(job(f(l - 1), z(l), f(l), l, ConvKind::Forward, l));
    }
    match n {
        1 => {
            copy = Some(CopyJob {
                src: a,
                dst: b(1),
                monomial: k,
            })
        }
        2 => convs.push(job(z(2), a, b(1), 1, ConvKind::Backward, 1)),
        _ => {
            convs.push(job(z(n), z(n - 1), b(1), 1, ConvKind::Backward, 1));
            for l in 2..=n - 2 {
                convs.push(job(b(l - 1), z(n - l), b(l), l, ConvKind::Backward, l));
            }
            convs.push(job(b(n - 2), a, b(n - 2), n - 1, ConvKind::Fold, n - 2));
            for j in 1..=n - 3 {
                let layer = j.max(n - 2 - j) + 1;
                convs.push(job(f(j), b(n - 2 - j), c(j), layer, ConvKind::Cross, j));
            }
            convs.push(job(f(n - 2), z(n), c(n - 2), n - 1, ConvKind::Cross, n - 2));
        }
    }
    MonomialJobs { convs, copy }
}

/// Slot holding `d/dz_{i_p}` of monomial `k` after the convolution stage,
/// for the 1-based position `p` within the monomial.
pub fn derivative_slot(layout: &Layout, k: usize, p: usize) -> usize {
    let n = layout.size(k);
    match (n, p) {
        (1, _) => layout.backward(k, 1),
        (_, p) if p == n => layout.forward(k, n - 1),
        (_, 1) => layout.backward(k, backward_count(n)),
        _ => layout.cross(k, p - 1),
    }
}

/// For every variable (index `i - 1`), the derivative slots of the
/// monomials containing it, in monomial order.
pub fn gradient_term_map(layout: &Layout, shapes: &[MonomialShape]) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); layout.num_vars()];
    for (k0, shape) in shapes.iter().enumerate() {
        for (p0, &i) in shape.indices.iter().enumerate() {
            lists[i - 1].push(derivative_slot(layout, k0 + 1, p0 + 1));
        }
    }
    lists
}

/// Replaces every coefficient `a` by `a * prod_i z_i^(e_i - 1)` and drops
/// the exponents, so that the remaining products are multilinear.
pub fn fold_exponents(poly: &Polynomial, z: &[Series]) -> Result<Polynomial> {
    poly.check_inputs(z)?;
    let mut powers: HashMap<usize, Vec<Series>> = HashMap::new();
    let mut monomials = Vec::with_capacity(poly.num_monomials());
    for mono in poly.monomials() {
        mono.shape.check(poly.num_vars())?;
        let mut coeff = mono.coeff.clone();
        for (&i, &e) in mono.indices().iter().zip(mono.exponents()) {
            if e == 1 {
                continue;
            }
            let table = powers.entry(i).or_insert_with(|| vec![z[i - 1].clone()]);
            while table.len() < (e - 1) as usize {
                let next = table.last().unwrap().conv(&z[i - 1])?;
                table.push(next);
            }
            coeff = coeff.conv(&table[e as usize - 2])?;
        }
        monomials.push(Monomial::new(coeff, mono.indices().to_vec()));
    }
    Polynomial::with_zero_coefficients(poly.num_vars(), poly.constant().clone(), monomials)
}

/// The compiled job graph of one polynomial structure.
#[derive(Clone, Debug, PartialEq)]
pub struct JobGraph {
    pub layout: Layout,
    pub conv_layers: Vec<Vec<ConvJob>>,
    pub copies: Vec<CopyJob>,
    pub add_layers: Vec<Vec<AddJob>>,
    /// Slot holding the value after the addition stage.
    pub value_slot: usize,
    /// Per variable, the slot holding its partial derivative; `None` when
    /// the variable occurs in no monomial.
    pub gradient_slots: Vec<Option<usize>>,
    /// Per variable, the integer factor applied at extraction.
    pub multipliers: Vec<u32>,
    /// Slot scalings applied between the stages.
    pub term_scales: Vec<TermScale>,
}

/// Compiles the structure of `poly`.
pub fn build_jobgraph(poly: &Polynomial) -> Result<JobGraph> {
    JobGraph::from_shapes(poly.num_vars(), &poly.shapes())
}

impl JobGraph {
    pub fn from_shapes(n_vars: usize, shapes: &[MonomialShape]) -> Result<JobGraph> {
        if shapes.is_empty() {
            return Err(Error::InvalidPolynomial(
                "at least one monomial is required".into(),
            ));
        }
        for (k, shape) in shapes.iter().enumerate() {
            shape.check(n_vars).map_err(|e| {
                Error::InvalidPolynomial(format!("monomial {}: {e}", k + 1))
            })?;
        }
        let layout = Layout::from_shapes(n_vars, shapes);

        let mut conv_layers: Vec<Vec<ConvJob>> = Vec::new();
        let mut copies = Vec::new();
        for (k0, shape) in shapes.iter().enumerate() {
            let jobs = monomial_conv_jobs(k0 + 1, &shape.indices, &layout);
            for job in jobs.convs {
                if conv_layers.len() < job.layer {
                    conv_layers.resize_with(job.layer, Vec::new);
                }
                conv_layers[job.layer - 1].push(job);
            }
            copies.extend(jobs.copy);
        }

        let mut lists = Vec::with_capacity(1 + n_vars);
        let mut value_terms = vec![layout.constant_slot()];
        value_terms.extend((1..=shapes.len()).map(|k| layout.forward(k, layout.size(k))));
        lists.push(value_terms);
        let grad_terms = gradient_term_map(&layout, shapes);
        lists.extend(grad_terms.iter().filter(|l| !l.is_empty()).cloned());
        let (add_layers, outputs) = addition_schedule(&lists)?;

        let mut outputs = outputs.into_iter();
        let value_slot = outputs.next().expect("value list");
        let gradient_slots = grad_terms
            .iter()
            .map(|l| (!l.is_empty()).then(|| outputs.next().expect("gradient list")))
            .collect();

        let mut exponents: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n_vars];
        for (k0, shape) in shapes.iter().enumerate() {
            for (p0, (&i, &e)) in shape.indices.iter().zip(&shape.exponents).enumerate() {
                exponents[i - 1].push((derivative_slot(&layout, k0 + 1, p0 + 1), e));
            }
        }
        let mut multipliers = vec![1; n_vars];
        let mut term_scales = Vec::new();
        for (i, terms) in exponents.iter().enumerate() {
            let Some(&(_, first)) = terms.first() else {
                continue;
            };
            if terms.iter().all(|&(_, e)| e == first) {
                multipliers[i] = first;
            } else {
                term_scales.extend(
                    terms
                        .iter()
                        .filter(|&&(_, e)| e != 1)
                        .map(|&(slot, factor)| TermScale { slot, factor }),
                );
            }
        }

        let graph = JobGraph {
            layout,
            conv_layers,
            copies,
            add_layers,
            value_slot,
            gradient_slots,
            multipliers,
            term_scales,
        };
        debug_assert_eq!(validate(&graph), Ok(()));
        Ok(graph)
    }

    pub fn total_slots(&self) -> usize {
        self.layout.total_slots()
    }

    pub fn num_vars(&self) -> usize {
        self.layout.num_vars()
    }

    pub fn conv_job_count(&self) -> usize {
        self.conv_layers.iter().map(Vec::len).sum()
    }

    pub fn add_job_count(&self) -> usize {
        self.add_layers.iter().map(Vec::len).sum()
    }

    pub fn conv_layer_sizes(&self) -> Vec<usize> {
        self.conv_layers.iter().map(Vec::len).collect()
    }

    pub fn add_layer_sizes(&self) -> Vec<usize> {
        self.add_layers.iter().map(Vec::len).collect()
    }

    pub fn conv_jobs(&self) -> impl Iterator<Item = &ConvJob> {
        self.conv_layers.iter().flatten()
    }

    pub fn add_jobs(&self) -> impl Iterator<Item = &AddJob> {
        self.add_layers.iter().flatten()
    }
}
