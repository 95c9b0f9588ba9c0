//! Truncated power series with real or complex multiple-double coefficients.
//!
//! Coefficient storage is coefficient-major: limb `l` of coefficient `k` of
//! a series at precision `m` lives at `k * m + l`, with imaginary parts in a
//! separate buffer.
//!
//! Additions of exact zeros may turn a `-0.0` coefficient into `+0.0`;
//! bitwise comparisons elsewhere in the crate treat the two zeros as equal.

pub mod kernel;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::multidouble::{expansion, MultiDouble, Precision};
use crate::with_limbs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Real,
    Complex,
}

impl Mode {
    /// Number of separately stored parts (1 for real, 2 for complex).
    pub fn parts(self) -> usize {
        match self {
            Mode::Real => 1,
            Mode::Complex => 2,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Real => "real",
            Mode::Complex => "complex",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Mode::Real),
            "complex" => Ok(Mode::Complex),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

/// One series coefficient; `im` is present exactly in complex mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficient {
    pub re: MultiDouble,
    pub im: Option<MultiDouble>,
}

impl Coefficient {
    pub fn real(re: MultiDouble) -> Self {
        Coefficient { re, im: None }
    }

    pub fn complex(re: MultiDouble, im: MultiDouble) -> Self {
        Coefficient { re, im: Some(im) }
    }

    pub fn mode(&self) -> Mode {
        if self.im.is_some() {
            Mode::Complex
        } else {
            Mode::Real
        }
    }
}

/// A power series truncated at degree `d`, holding `d + 1` coefficients.
#[derive(Clone, PartialEq)]
pub struct Series {
    degree: usize,
    precision: Precision,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

impl Series {
    pub fn zero(degree: usize, precision: Precision, mode: Mode) -> Self {
        let len = (degree + 1) * precision.limbs();
        Series {
            degree,
            precision,
            re: vec![0.0; len],
            im: (mode == Mode::Complex).then(|| vec![0.0; len]),
        }
    }

    /// The constant series 1.
    pub fn one(degree: usize, precision: Precision, mode: Mode) -> Self {
        let mut s = Self::zero(degree, precision, mode);
        s.re[0] = 1.0;
        s
    }

    /// A real series whose coefficients are the given binary64 values.
    pub fn from_f64s(coeffs: &[f64], precision: Precision) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least one coefficient");
        let mut s = Self::zero(coeffs.len() - 1, precision, Mode::Real);
        let m = precision.limbs();
        for (k, &c) in coeffs.iter().enumerate() {
            s.re[k * m] = c;
        }
        s
    }

    /// A complex series from real and imaginary binary64 values.
    pub fn from_complex_f64s(re: &[f64], im: &[f64], precision: Precision) -> Self {
        assert_eq!(re.len(), im.len());
        let mut s = Self::from_f64s(re, precision);
        let m = precision.limbs();
        let mut buf = vec![0.0; s.re.len()];
        for (k, &c) in im.iter().enumerate() {
            buf[k * m] = c;
        }
        s.im = Some(buf);
        s
    }

    /// Builds a series from raw coefficient-major limb buffers.
    pub fn from_limbs(
        degree: usize,
        precision: Precision,
        re: Vec<f64>,
        im: Option<Vec<f64>>,
    ) -> Result<Self> {
        let len = (degree + 1) * precision.limbs();
        if re.len() != len || im.as_ref().is_some_and(|v| v.len() != len) {
            return Err(Error::InvalidInput(format!(
                "expected {len} limbs per part for degree {degree} at {precision}"
            )));
        }
        Ok(Series {
            degree,
            precision,
            re,
            im,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn mode(&self) -> Mode {
        if self.im.is_some() {
            Mode::Complex
        } else {
            Mode::Real
        }
    }

    /// Coefficient-major limbs of the real parts.
    pub fn re_limbs(&self) -> &[f64] {
        &self.re
    }

    pub fn im_limbs(&self) -> Option<&[f64]> {
        self.im.as_deref()
    }

    pub fn coeff(&self, k: usize) -> Coefficient {
        let m = self.precision.limbs();
        let part = |buf: &[f64]| MultiDouble::from_normalized_limbs(&buf[k * m..(k + 1) * m], self.precision);
        Coefficient {
            re: part(&self.re),
            im: self.im.as_deref().map(part),
        }
    }

    pub fn coeffs(&self) -> impl Iterator<Item = Coefficient> + '_ {
        (0..self.len()).map(|k| self.coeff(k))
    }

    pub fn set_coeff(&mut self, k: usize, c: &Coefficient) -> Result<()> {
        if c.re.precision() != self.precision {
            return Err(Error::PrecisionMismatch {
                expected: self.precision,
                found: c.re.precision(),
            });
        }
        if c.mode() != self.mode() {
            return Err(Error::ModeMismatch {
                expected: self.mode(),
                found: c.mode(),
            });
        }
        let m = self.precision.limbs();
        self.re[k * m..(k + 1) * m].copy_from_slice(c.re.limbs());
        if let (Some(buf), Some(im)) = (self.im.as_mut(), c.im) {
            buf[k * m..(k + 1) * m].copy_from_slice(im.limbs());
        }
        Ok(())
    }

    /// True when every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.re.iter().chain(self.im.iter().flatten()).all(|&v| v == 0.0)
    }

    /// Equality that ignores the sign of zero limbs.
    pub fn same_values(&self, other: &Series) -> bool {
        self.degree == other.degree
            && self.precision == other.precision
            && self.mode() == other.mode()
            && self.re.iter().zip(&other.re).all(|(a, b)| a == b)
            && match (&self.im, &other.im) {
                (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x == y),
                _ => true,
            }
    }

    /// Leading limbs of the real parts, one per coefficient.
    pub fn leading_re(&self) -> Vec<f64> {
        self.re.iter().step_by(self.precision.limbs()).copied().collect()
    }

    /// Keeps the first `degree + 1` coefficients.
    pub fn truncate(&self, degree: usize) -> Series {
        assert!(degree <= self.degree);
        let len = (degree + 1) * self.precision.limbs();
        Series {
            degree,
            precision: self.precision,
            re: self.re[..len].to_vec(),
            im: self.im.as_ref().map(|v| v[..len].to_vec()),
        }
    }

    pub(crate) fn check_compatible(&self, other: &Series) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        if self.precision != other.precision {
            return Err(Error::PrecisionMismatch {
                expected: self.precision,
                found: other.precision,
            });
        }
        if self.mode() != other.mode() {
            return Err(Error::ModeMismatch {
                expected: self.mode(),
                found: other.mode(),
            });
        }
        Ok(())
    }

    /// Truncated product.
    pub fn conv(&self, other: &Series) -> Result<Series> {
        self.check_compatible(other)
            .map_err(|e| Error::InvalidOperands(e.to_string()))?;
        let mut out = Series::zero(self.degree, self.precision, self.mode());
        with_limbs!(self.precision, M => {
            let xr = to_arrays::<M>(&self.re);
            let yr = to_arrays::<M>(&other.re);
            let mut zr = vec![[0.0; M]; self.len()];
            match (&self.im, &other.im) {
                (Some(xi), Some(yi)) => {
                    let xi = to_arrays::<M>(xi);
                    let yi = to_arrays::<M>(yi);
                    let mut zi = vec![[0.0; M]; self.len()];
                    kernel::conv_complex(&xr, &xi, &yr, &yi, &mut zr, &mut zi);
                    write_arrays(&zi, out.im.as_mut().expect("complex output"));
                }
                _ => kernel::conv_real(&xr, &yr, &mut zr),
            }
            write_arrays(&zr, &mut out.re);
        });
        Ok(out)
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_compatible(other)
            .map_err(|e| Error::InvalidOperands(e.to_string()))?;
        let mut out = Series::zero(self.degree, self.precision, self.mode());
        with_limbs!(self.precision, M => {
            add_part::<M>(&self.re, &other.re, &mut out.re);
            if let (Some(x), Some(y), Some(z)) = (&self.im, &other.im, out.im.as_mut()) {
                add_part::<M>(x, y, z);
            }
        });
        Ok(out)
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        let mut out = self.clone();
        for v in out.re.iter_mut().chain(out.im.iter_mut().flatten()) {
            *v = -*v;
        }
        out
    }

    /// Multiplies every coefficient by the integer `c`.
    pub fn scale_int(&self, c: i64) -> Series {
        assert!(c.unsigned_abs() <= 1 << 53, "scale factor must be exact in binary64");
        if c == 1 {
            return self.clone();
        }
        let factor = c as f64;
        let mut out = self.clone();
        with_limbs!(self.precision, M => {
            for buf in out.re.chunks_exact_mut(M).chain(
                out.im.iter_mut().flat_map(|v| v.chunks_exact_mut(M)),
            ) {
                let x: [f64; M] = std::array::from_fn(|i| buf[i]);
                buf.copy_from_slice(&expansion::mul_scalar::<f64, M>(&x, factor));
            }
        });
        out
    }

    /// Deterministic pseudo-random series; see [`random_series`].
    pub fn random(seed: u64, degree: usize, precision: Precision, mode: Mode) -> Series {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(&mut rng, degree, precision, mode)
    }

    /// Draws every coefficient with [`random_multidouble`].
    pub fn random_with<R: Rng>(rng: &mut R, degree: usize, precision: Precision, mode: Mode) -> Series {
        let mut s = Series::zero(degree, precision, mode);
        let m = precision.limbs();
        for k in 0..=degree {
            let re = random_multidouble(rng, precision);
            s.re[k * m..(k + 1) * m].copy_from_slice(re.limbs());
            if let Some(im) = s.im.as_mut() {
                let v = random_multidouble(rng, precision);
                im[k * m..(k + 1) * m].copy_from_slice(v.limbs());
            }
        }
        s
    }
}

/// A random value with leading limb uniform in [-1, 1] and every lower limb
/// filled with a uniform fraction of the previous limb's scale, then
/// renormalized so that all `m` limbs carry information.
pub fn random_multidouble<R: Rng>(rng: &mut R, precision: Precision) -> MultiDouble {
    let m = precision.limbs();
    let mut terms = [0.0; crate::multidouble::MAX_LIMBS];
    let lead: f64 = rng.gen_range(-1.0..=1.0);
    terms[0] = lead;
    let mut scale = lead.abs();
    for t in terms.iter_mut().take(m).skip(1) {
        scale *= f64::EPSILON / 2.0;
        *t = scale * rng.gen_range(-1.0..=1.0);
    }
    MultiDouble::renormalize(&terms[..m], precision)
}

/// Deterministic pseudo-random series: the same `(seed, degree, precision,
/// mode)` always yields bitwise the same coefficients.
pub fn random_series(seed: u64, degree: usize, precision: Precision, mode: Mode) -> Series {
    Series::random(seed, degree, precision, mode)
}

pub fn conv(x: &Series, y: &Series) -> Result<Series> {
    x.conv(y)
}

pub fn series_add(x: &Series, y: &Series) -> Result<Series> {
    x.add(y)
}

pub fn series_scale_int(x: &Series, c: i64) -> Series {
    x.scale_int(c)
}

pub(crate) fn to_arrays<const M: usize>(limbs: &[f64]) -> Vec<[f64; M]> {
    limbs
        .chunks_exact(M)
        .map(|c| std::array::from_fn(|i| c[i]))
        .collect()
}

pub(crate) fn write_arrays<const M: usize>(src: &[[f64; M]], dst: &mut [f64]) {
    for (chunk, v) in dst.chunks_exact_mut(M).zip(src) {
        chunk.copy_from_slice(v);
    }
}

fn add_part<const M: usize>(x: &[f64], y: &[f64], z: &mut [f64]) {
    let xs = to_arrays::<M>(x);
    let ys = to_arrays::<M>(y);
    let mut zs = vec![[0.0; M]; xs.len()];
    kernel::add_series(&xs, &ys, &mut zs);
    write_arrays(&zs, z);
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Series")
            .field("degree", &self.degree)
            .field("precision", &self.precision)
            .field("mode", &self.mode())
            .field("leading_re", &self.leading_re())
            .finish()
    }
}
