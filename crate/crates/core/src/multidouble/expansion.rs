//! Fixed-length floating-point expansion arithmetic.
//!
//! An expansion of length `M` is an array of limbs, most significant first,
//! whose exact sum is the represented value. All results are returned in
//! normalized form: each adjacent pair `(hi, lo)` is a fixed point of
//! [`two_sum`], i.e. `fl(hi + lo) == hi`, so `|lo| <= ulp(hi) / 2` and no
//! nonzero limb follows a zero limb.

use super::eft::{two_prod, two_sum, Scalar};

/// Largest supported expansion length.
pub const MAX_LIMBS: usize = 10;

// Worst case for the product level buffers is M^2 + M + 1 = 111 terms.
const LEVEL_CAPACITY: usize = 128;
const MAX_STAGED: usize = 2 * MAX_LIMBS + 2;

/// Repeats adjacent two-sum sweeps until every pair is normalized.
#[inline]
pub fn strict_normalize<T: Scalar>(limbs: &mut [T]) {
    if limbs.len() < 2 {
        return;
    }
    // Convergence takes one or two sweeps in practice; the cap only guards
    // against pathological tie patterns.
    for _ in 0..4 * limbs.len() {
        let mut changed = false;
        for i in 0..limbs.len() - 1 {
            let (s, e) = two_sum(limbs[i], limbs[i + 1]);
            if s != limbs[i] || e != limbs[i + 1] {
                limbs[i] = s;
                limbs[i + 1] = e;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Renormalizes terms of roughly decreasing magnitude into `M` limbs:
/// a bottom-up two-sum sweep, a top-down extraction that skips exact zeros,
/// then [`strict_normalize`].
#[inline]
pub fn renormalize_sorted<T: Scalar, const M: usize>(terms: &[T]) -> [T; M] {
    let mut out = [T::ZERO; M];
    let n = terms.len();
    if n == 0 {
        return out;
    }
    let mut e = [T::ZERO; LEVEL_CAPACITY];
    e[..n].copy_from_slice(terms);

    let mut s = e[n - 1];
    for i in (0..n - 1).rev() {
        let (hi, lo) = two_sum(e[i], s);
        e[i + 1] = lo;
        s = hi;
    }
    e[0] = s;

    let mut j = 0;
    let mut eps = e[0];
    let mut full = false;
    for &t in &e[1..n] {
        let (r, err) = two_sum(eps, t);
        if err != T::ZERO {
            out[j] = r;
            j += 1;
            if j == M {
                full = true;
                break;
            }
            eps = err;
        } else {
            eps = r;
        }
    }
    if !full {
        out[j] = eps;
    }
    strict_normalize(&mut out);
    out
}

/// Sum of two normalized expansions.
#[inline]
pub fn add<T: Scalar, const M: usize>(x: &[T; M], y: &[T; M]) -> [T; M] {
    const { assert!(M >= 1 && M <= MAX_LIMBS) };
    if M == 1 {
        let mut out = [T::ZERO; M];
        out[0] = x[0] + y[0];
        return out;
    }
    // Merge by decreasing magnitude.
    let mut merged = [T::ZERO; MAX_STAGED];
    let (mut i, mut j) = (0, 0);
    for slot in merged.iter_mut().take(2 * M) {
        let take_x = j == M || (i < M && x[i].abs() >= y[j].abs());
        if take_x {
            *slot = x[i];
            i += 1;
        } else {
            *slot = y[j];
            j += 1;
        }
    }
    renormalize_sorted::<T, M>(&merged[..2 * M])
}

/// Difference of two normalized expansions.
#[inline]
pub fn sub<T: Scalar, const M: usize>(x: &[T; M], y: &[T; M]) -> [T; M] {
    let neg = y.map(|v| -v);
    add(x, &neg)
}

/// Product of two normalized expansions.
///
/// Partial products are grouped by significance level `i + j`. Levels below
/// `M` use error-free products and error-free summation, pushing every error
/// term one level down; level `M` is summed in plain arithmetic and deeper
/// levels are dropped.
#[inline]
pub fn mul<T: Scalar, const M: usize>(x: &[T; M], y: &[T; M]) -> [T; M] {
    const { assert!(M >= 1 && M <= MAX_LIMBS) };
    if M == 1 {
        let mut out = [T::ZERO; M];
        out[0] = x[0] * y[0];
        return out;
    }
    let mut levels = [T::ZERO; MAX_LIMBS + 1];
    let mut cur = [T::ZERO; LEVEL_CAPACITY];
    let mut next = [T::ZERO; LEVEL_CAPACITY];
    let mut cur_len = 0;

    for k in 0..M {
        let mut next_len = 0;
        let (p, e) = two_prod(x[0], y[k]);
        let mut s = p;
        if e != T::ZERO {
            next[next_len] = e;
            next_len += 1;
        }
        for i in 1..=k {
            let (p, e) = two_prod(x[i], y[k - i]);
            if e != T::ZERO {
                next[next_len] = e;
                next_len += 1;
            }
            let (hi, lo) = two_sum(s, p);
            s = hi;
            if lo != T::ZERO {
                next[next_len] = lo;
                next_len += 1;
            }
        }
        for &t in &cur[..cur_len] {
            let (hi, lo) = two_sum(s, t);
            s = hi;
            if lo != T::ZERO {
                next[next_len] = lo;
                next_len += 1;
            }
        }
        levels[k] = s;
        std::mem::swap(&mut cur, &mut next);
        cur_len = next_len;
    }

    let mut s = x[1] * y[M - 1];
    for i in 2..M {
        s = s + x[i] * y[M - i];
    }
    for &t in &cur[..cur_len] {
        s = s + t;
    }
    levels[M] = s;

    renormalize_sorted::<T, M>(&levels[..M + 1])
}

/// Product of a normalized expansion with a single binary64 value.
#[inline]
pub fn mul_scalar<T: Scalar, const M: usize>(x: &[T; M], c: T) -> [T; M] {
    let mut y = [T::ZERO; M];
    y[0] = c;
    mul(x, &y)
}

/// Exact accumulation of arbitrary binary64 terms into a nonoverlapping
/// expansion (increasing magnitude, zeros eliminated).
pub fn grow_expansion(terms: &[f64]) -> Vec<f64> {
    let mut expansion: Vec<f64> = Vec::with_capacity(terms.len());
    for &t in terms {
        let mut q = t;
        let mut grown = Vec::with_capacity(expansion.len() + 1);
        for &component in &expansion {
            let (s, e) = two_sum(q, component);
            if e != 0.0 {
                grown.push(e);
            }
            q = s;
        }
        if q != 0.0 {
            grown.push(q);
        }
        expansion = grown;
    }
    expansion
}

/// Normalizes an arbitrary finite sequence of binary64 values into `m`
/// limbs: an exact expansion of the whole input is built first, normalized
/// at full length, then truncated.
pub fn renormalize_exact(terms: &[f64], m: usize) -> Vec<f64> {
    let mut exact = grow_expansion(terms);
    exact.reverse();
    strict_normalize(&mut exact);
    exact.resize(m.max(exact.len()), 0.0);
    exact.truncate(m);
    exact
}
