//! Coefficient kernels shared by series arithmetic and the job executor.
//!
//! Every series is a slice of `d + 1` expansions of `M` limbs. Convolutions
//! accumulate in ascending `i`, starting from `x[0] * y[k]`, which is the
//! per-coefficient order of the zero-insertion scheme.

use crate::multidouble::expansion::{add, mul, sub};

/// `z[k] = sum_{i=0..k} x[i] * y[k-i]`.
pub fn conv_real<const M: usize>(x: &[[f64; M]], y: &[[f64; M]], z: &mut [[f64; M]]) {
    let n = z.len();
    debug_assert!(x.len() == n && y.len() == n);
    for k in 0..n {
        let mut acc = mul(&x[0], &y[k]);
        for i in 1..=k {
            acc = add(&acc, &mul(&x[i], &y[k - i]));
        }
        z[k] = acc;
    }
}

/// Reference form of [`conv_real`] with the zero-insertion padding made
/// explicit: the second operand is shifted behind `d` zeros and every
/// coefficient performs exactly `d + 1` multiply-adds.
pub fn conv_real_padded<const M: usize>(x: &[[f64; M]], y: &[[f64; M]], z: &mut [[f64; M]]) {
    let n = z.len();
    let d = n - 1;
    let mut padded = vec![[0.0; M]; 2 * n];
    padded[d..d + n].copy_from_slice(y);
    for k in 0..n {
        let mut acc = mul(&x[0], &padded[d + k]);
        for i in 1..=d {
            acc = add(&acc, &mul(&x[i], &padded[d + k - i]));
        }
        z[k] = acc;
    }
}

/// Complex convolution with real and imaginary parts in separate slices.
/// Each coefficient product uses four multiplications and two additions.
pub fn conv_complex<const M: usize>(
    xr: &[[f64; M]],
    xi: &[[f64; M]],
    yr: &[[f64; M]],
    yi: &[[f64; M]],
    zr: &mut [[f64; M]],
    zi: &mut [[f64; M]],
) {
    let product = |a: usize, b: usize| {
        let re = sub(&mul(&xr[a], &yr[b]), &mul(&xi[a], &yi[b]));
        let im = add(&mul(&xr[a], &yi[b]), &mul(&xi[a], &yr[b]));
        (re, im)
    };
    for k in 0..zr.len() {
        let (mut acc_re, mut acc_im) = product(0, k);
        for i in 1..=k {
            let (re, im) = product(i, k - i);
            acc_re = add(&acc_re, &re);
            acc_im = add(&acc_im, &im);
        }
        zr[k] = acc_re;
        zi[k] = acc_im;
    }
}

/// `z[k] = x[k] + y[k]`.
pub fn add_series<const M: usize>(x: &[[f64; M]], y: &[[f64; M]], z: &mut [[f64; M]]) {
    for ((zk, xk), yk) in z.iter_mut().zip(x).zip(y) {
        *zk = add(xk, yk);
    }
}
