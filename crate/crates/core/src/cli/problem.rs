//! Line-oriented problem files.
//!
//! ```text
//! polyseries-problem 1
//! vars 3
//! monomials 2
//! degree 1
//! precision 2
//! mode real
//! seed 7
//! constant
//! 0x3ff0000000000000 0x0000000000000000
//! 0x0000000000000000 0x0000000000000000
//! monomial 1 3
//! ...
//! monomial 2^3
//! ...
//! input 1
//! ...
//! ```
//!
//! Every series is followed by `degree + 1` coefficient lines of `m` limbs
//! each; complex coefficients append `|` and the imaginary limbs. Limbs
//! are written as `0x` followed by the 16 hex digits of their binary64
//! bits; decimal numbers are accepted on input. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::jobgraph::{Monomial, MonomialShape, Polynomial};
use crate::multidouble::{MultiDouble, Precision};
use crate::pseries::{Mode, Series};

pub const MAGIC: &str = "polyseries-problem 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub vars: usize,
    pub monomials: usize,
    pub degree: usize,
    pub precision: Precision,
    pub mode: Mode,
    pub seed: u64,
}

/// A polynomial together with the point it is evaluated at.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub header: Header,
    pub polynomial: Polynomial,
    pub inputs: Vec<Series>,
}

impl ProblemFile {
    pub fn new(polynomial: Polynomial, inputs: Vec<Series>, seed: u64) -> Result<Self> {
        polynomial.check_inputs(&inputs)?;
        let header = Header {
            vars: polynomial.num_vars(),
            monomials: polynomial.num_monomials(),
            degree: polynomial.degree(),
            precision: polynomial.precision(),
            mode: polynomial.mode(),
            seed,
        };
        Ok(ProblemFile {
            header,
            polynomial,
            inputs,
        })
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "vars {}", h.vars).unwrap();
        writeln!(out, "monomials {}", h.monomials).unwrap();
        writeln!(out, "degree {}", h.degree).unwrap();
        writeln!(out, "precision {}", h.precision.limbs()).unwrap();
        writeln!(out, "mode {}", h.mode).unwrap();
        writeln!(out, "seed {}", h.seed).unwrap();
        out.push_str("constant\n");
        write_series(&mut out, self.polynomial.constant());
        for mono in self.polynomial.monomials() {
            out.push_str("monomial");
            for (&i, &e) in mono.indices().iter().zip(mono.exponents()) {
                if e == 1 {
                    write!(out, " {i}").unwrap();
                } else {
                    write!(out, " {i}^{e}").unwrap();
                }
            }
            out.push('\n');
            write_series(&mut out, &mono.coeff);
        }
        for (i, z) in self.inputs.iter().enumerate() {
            writeln!(out, "input {}", i + 1).unwrap();
            write_series(&mut out, z);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).problem()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn write_series(out: &mut String, s: &Series) {
    let m = s.precision().limbs();
    let im = s.im_limbs();
    for (k, re) in s.re_limbs().chunks_exact(m).enumerate() {
        let mut first = true;
        for v in re {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{:#018x}", v.to_bits()).unwrap();
        }
        if let Some(im) = im {
            out.push_str(" |");
            for v in &im[k * m..(k + 1) * m] {
                write!(out, " {:#018x}", v.to_bits()).unwrap();
            }
        }
        out.push('\n');
    }
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Parser { lines, pos: 0 }
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(1, |&(n, _)| n)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let item = self.lines.get(self.pos).copied().ok_or_else(|| {
            Error::parse(self.last_line(), format!("unexpected end of file, expected {what}"))
        })?;
        self.pos += 1;
        Ok(item)
    }

    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<(usize, T)> {
        let (line, text) = self.next(key)?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::parse(line, format!("malformed header: expected `{key} <value>`")));
        }
        let value = parts
            .next()
            .ok_or_else(|| Error::parse(line, format!("malformed header: `{key}` needs a value")))?;
        if parts.next().is_some() {
            return Err(Error::parse(line, format!("malformed header: trailing text after `{key}`")));
        }
        let parsed = value
            .parse()
            .map_err(|_| Error::parse(line, format!("malformed header: bad value {value:?} for `{key}`")))?;
        Ok((line, parsed))
    }

    fn header(&mut self) -> Result<Header> {
        let (line, magic) = self.next("the file header")?;
        if magic != MAGIC {
            return Err(Error::parse(line, format!("malformed header: expected `{MAGIC}`")));
        }
        let (_, vars) = self.keyed::<usize>("vars")?;
        let (_, monomials) = self.keyed::<usize>("monomials")?;
        let (_, degree) = self.keyed::<usize>("degree")?;
        let (line, m) = self.keyed::<usize>("precision")?;
        let precision = Precision::from_limbs(m).map_err(|_| {
            Error::parse(line, format!("unsupported precision {m}: use 1, 2, 3, 4, 5, 8 or 10 limbs"))
        })?;
        let (line, mode) = self.keyed::<String>("mode")?;
        let mode: Mode = mode
            .parse()
            .map_err(|_| Error::parse(line, format!("malformed header: unknown mode {mode:?}")))?;
        let (_, seed) = self.keyed::<u64>("seed")?;
        Ok(Header {
            vars,
            monomials,
            degree,
            precision,
            mode,
            seed,
        })
    }

    fn series(&mut self, h: &Header, what: &str) -> Result<Series> {
        let m = h.precision.limbs();
        let n = h.degree + 1;
        let mut re = Vec::with_capacity(n * m);
        let mut im = (h.mode == Mode::Complex).then(|| Vec::with_capacity(n * m));
        for k in 0..n {
            let (line, text) = self.next(&format!("coefficient {k} of {what}"))?;
            if is_section(text) {
                return Err(Error::parse(
                    line,
                    format!("wrong coefficient count for {what}: expected {n}, found {k}"),
                ));
            }
            let (re_text, im_text) = match text.split_once('|') {
                Some((a, b)) => (a, Some(b)),
                None => (text, None),
            };
            match (&mut im, im_text) {
                (None, Some(_)) => {
                    return Err(Error::parse(line, "imaginary part in a real problem"));
                }
                (Some(_), None) => {
                    return Err(Error::parse(line, "missing imaginary part in a complex problem"));
                }
                _ => {}
            }
            re.extend(limbs(line, re_text, h.precision)?);
            if let (Some(buf), Some(t)) = (im.as_mut(), im_text) {
                buf.extend(limbs(line, t, h.precision)?);
            }
        }
        if let Some(&(line, text)) = self.lines.get(self.pos) {
            if !is_section(text) {
                return Err(Error::parse(
                    line,
                    format!("wrong coefficient count for {what}: more than {n} lines"),
                ));
            }
        }
        Series::from_limbs(h.degree, h.precision, re, im)
    }

    fn monomial_shape(&self, line: usize, text: &str, vars: usize) -> Result<MonomialShape> {
        let mut indices = Vec::new();
        let mut exponents = Vec::new();
        for tok in text.split_whitespace().skip(1) {
            let (i, e) = match tok.split_once('^') {
                Some((i, e)) => (i, e),
                None => (tok, "1"),
            };
            let i: usize = i
                .parse()
                .map_err(|_| Error::parse(line, format!("bad variable index {tok:?}")))?;
            let e: u32 = e
                .parse()
                .map_err(|_| Error::parse(line, format!("bad exponent in {tok:?}")))?;
            if i == 0 || i > vars {
                return Err(Error::parse(line, format!("variable index {i} outside 1..={vars}")));
            }
            if e == 0 {
                return Err(Error::parse(line, format!("zero exponent in {tok:?}")));
            }
            if let Some(&prev) = indices.last() {
                if i == prev {
                    return Err(Error::parse(line, format!("duplicate variable index {i}")));
                }
                if i < prev {
                    return Err(Error::parse(
                        line,
                        format!("variable indices must be increasing ({prev} then {i})"),
                    ));
                }
            }
            indices.push(i);
            exponents.push(e);
        }
        if indices.is_empty() {
            return Err(Error::parse(line, "monomial without variables"));
        }
        Ok(MonomialShape { indices, exponents })
    }

    fn problem(mut self) -> Result<ProblemFile> {
        let h = self.header()?;
        let (line, text) = self.next("`constant`")?;
        if text != "constant" {
            return Err(Error::parse(line, "expected `constant`"));
        }
        let constant = self.series(&h, "the constant")?;
        let mut monomials = Vec::with_capacity(h.monomials);
        for k in 1..=h.monomials {
            let (line, text) = self.next(&format!("monomial {k}"))?;
            if text.split_whitespace().next() != Some("monomial") {
                return Err(Error::parse(
                    line,
                    format!("expected monomial {k} of {}", h.monomials),
                ));
            }
            let shape = self.monomial_shape(line, text, h.vars)?;
            let coeff = self.series(&h, &format!("monomial {k}"))?;
            if coeff.is_zero() {
                return Err(Error::parse(line, "identically zero monomial coefficient"));
            }
            monomials.push(Monomial {
                coeff,
                shape,
            });
        }
        let mut inputs = Vec::with_capacity(h.vars);
        for i in 1..=h.vars {
            let (line, text) = self.next(&format!("input {i}"))?;
            if text != format!("input {i}") {
                return Err(Error::parse(line, format!("expected `input {i}`")));
            }
            inputs.push(self.series(&h, &format!("input {i}"))?);
        }
        if let Some(&(line, _)) = self.lines.get(self.pos) {
            return Err(Error::parse(line, "unexpected trailing content"));
        }
        let polynomial = Polynomial::new(h.vars, constant, monomials)?;
        Ok(ProblemFile {
            header: h,
            polynomial,
            inputs,
        })
    }
}

fn is_section(text: &str) -> bool {
    matches!(
        text.split_whitespace().next(),
        Some("constant" | "monomial" | "input")
    )
}

fn limbs(line: usize, text: &str, precision: Precision) -> Result<Vec<f64>> {
    let m = precision.limbs();
    let values = text
        .split_whitespace()
        .map(|tok| parse_limb(tok).ok_or_else(|| Error::parse(line, format!("bad number {tok:?}"))))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != m {
        return Err(Error::parse(
            line,
            format!("wrong coefficient count: expected {m} limbs, found {}", values.len()),
        ));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::parse(line, format!("non-finite limb {v}")));
    }
    let md = MultiDouble::renormalize(&values, precision);
    if md.limbs().iter().zip(&values).all(|(a, b)| a == b) {
        Ok(values)
    } else {
        Ok(md.limbs().to_vec())
    }
}

fn parse_limb(tok: &str) -> Option<f64> {
    match tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok().map(f64::from_bits),
        None => tok.parse().ok(),
    }
}
