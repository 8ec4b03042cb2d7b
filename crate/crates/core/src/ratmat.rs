//! Exact rational scalars and dense symmetric labeled matrices.
//!
//! Everything in this module is exact: no floating point enters any
//! arithmetic path. Matrices are symmetric by construction, addressed by
//! coordinate label rather than position, and immutable once built.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator. Division by zero panics, so callers guard divisors.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from an integer pair. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate coordinate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown coordinate label `{0}`")]
    UnknownLabel(String),
    #[error("entries ({0}, {1}) and ({1}, {0}) differ; matrix must be symmetric")]
    NotSymmetric(String, String),
    #[error("singular matrix (zero determinant)")]
    Singular,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal `{text}`: {reason}")]
pub struct LiteralError {
    pub text: String,
    pub reason: String,
}

/// Parse a decimal literal (`70`, `0.5`, `1.25e1`, `-3.2e-2`) into the exact
/// rational it denotes. Never goes through binary floating point.
pub fn rational_from_decimal(text: &str) -> Result<Rational, LiteralError> {
    let err = |reason: &str| LiteralError {
        text: text.to_owned(),
        reason: reason.to_owned(),
    };
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut negative = false;
    if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
        negative = bytes[pos] == b'-';
        pos += 1;
    }
    let int_start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
    }
    if pos == int_start {
        return Err(err("expected digits"));
    }
    let mut digits = text[int_start..pos].to_owned();
    let mut frac_len = 0u32;
    if pos < bytes.len() && bytes[pos] == b'.' {
        pos += 1;
        let frac_start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == frac_start {
            return Err(err("expected digits after decimal point"));
        }
        frac_len = (pos - frac_start) as u32;
        digits.push_str(&text[frac_start..pos]);
    }
    let mut exponent: i64 = 0;
    if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
        pos += 1;
        let mut exp_negative = false;
        if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
            exp_negative = bytes[pos] == b'-';
            pos += 1;
        }
        let exp_start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == exp_start {
            return Err(err("expected digits in exponent"));
        }
        exponent = text[exp_start..pos]
            .parse::<i64>()
            .map_err(|_| err("exponent out of range"))?;
        if exp_negative {
            exponent = -exponent;
        }
    }
    if pos != bytes.len() {
        return Err(err("trailing characters"));
    }
    let mut mantissa: BigInt = digits.parse().expect("digit string");
    if negative {
        mantissa = -mantissa;
    }
    let scale = exponent - i64::from(frac_len);
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(mantissa * ten.pow(scale as u32))
    } else {
        Rational::new(mantissa, ten.pow((-scale) as u32))
    };
    Ok(value)
}

/// Parse either a decimal literal or an exact fraction `p/q` (q > 0).
pub fn rational_from_literal(text: &str) -> Result<Rational, LiteralError> {
    match text.split_once('/') {
        None => rational_from_decimal(text),
        Some((num, den)) => {
            let err = |reason: &str| LiteralError {
                text: text.to_owned(),
                reason: reason.to_owned(),
            };
            let is_int =
                |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
            let (sign, num_digits) = match num.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, num.strip_prefix('+').unwrap_or(num)),
            };
            if !is_int(num_digits) || !is_int(den) {
                return Err(err("expected `p/q` with integer p and q"));
            }
            let p: BigInt = num_digits.parse().expect("digit string");
            let q: BigInt = den.parse().expect("digit string");
            if q.is_zero() {
                return Err(err("zero denominator"));
            }
            Ok(Rational::new(BigInt::from(sign) * p, q))
        }
    }
}

/// Render a rational as a decimal with at most `sig` significant digits,
/// rounding half away from zero and trimming trailing zeros.
pub fn decimal_approx(value: &Rational, sig: u32) -> String {
    assert!(sig > 0);
    if value.is_zero() {
        return "0".to_owned();
    }
    let negative = value.is_negative();
    let num = value.numer().abs();
    let den = value.denom().clone();
    let ten = BigInt::from(10);
    // exp10 = number of digits before the decimal point (may be <= 0)
    let mut exp10: i64 = 0;
    let mut lo = num.clone();
    let mut hi = den.clone();
    while lo >= hi {
        hi *= &ten;
        exp10 += 1;
    }
    while &lo * &ten <= hi {
        lo *= &ten;
        exp10 -= 1;
    }
    // round num/den to `sig` digits: digits = round(num * 10^(sig - exp10) / den)
    let shift = i64::from(sig) - exp10;
    let (scaled_num, scaled_den) = if shift >= 0 {
        (num * ten.pow(shift as u32), den)
    } else {
        (num, den * ten.pow((-shift) as u32))
    };
    let (quot, rem) = (&scaled_num / &scaled_den, &scaled_num % &scaled_den);
    let mut digits = if &rem * 2 >= scaled_den { quot + 1 } else { quot };
    // rounding may carry into one extra digit (e.g. 999.95 -> 1000)
    if digits == ten.pow(sig) {
        digits /= &ten;
        exp10 += 1;
    }
    let mut s = digits.to_string();
    while s.len() > 1 && s.ends_with('0') {
        s.pop();
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp10 >= 1 && exp10 <= 13 {
        let e = exp10 as usize;
        if s.len() <= e {
            out.push_str(&s);
            out.push_str(&"0".repeat(e - s.len()));
        } else {
            out.push_str(&s[..e]);
            out.push('.');
            out.push_str(&s[e..]);
        }
    } else if exp10 <= 0 && exp10 >= -3 {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp10) as usize));
        out.push_str(&s);
    } else {
        out.push_str(&s[..1]);
        if s.len() > 1 {
            out.push('.');
            out.push_str(&s[1..]);
        }
        out.push('e');
        out.push_str(&(exp10 - 1).to_string());
    }
    out
}

/// Render a rational exactly: an integer, a finite decimal when the reduced
/// denominator has only factors 2 and 5, otherwise `p/q`.
pub fn exact_literal(value: &Rational) -> String {
    let den = value.denom();
    if den.is_one() {
        return value.numer().to_string();
    }
    let (mut twos, mut fives) = (0u32, 0u32);
    let mut rest = den.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", value.numer(), den);
    }
    let places = twos.max(fives);
    let scale = BigInt::from(10).pow(places) / den;
    let scaled = (value.numer() * scale).abs().to_string();
    let mut out = String::new();
    if value.is_negative() {
        out.push('-');
    }
    let places = places as usize;
    if scaled.len() <= places {
        out.push_str("0.");
        out.push_str(&"0".repeat(places - scaled.len()));
        out.push_str(&scaled);
    } else {
        out.push_str(&scaled[..scaled.len() - places]);
        out.push('.');
        out.push_str(&scaled[scaled.len() - places..]);
    }
    out
}

/// Dense symmetric matrix over exact rationals, indexed by coordinate labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    labels: Vec<String>,
    entries: Vec<Rational>, // row major, dim * dim
}

impl Matrix {
    /// Build from explicit rows. Fails on ragged rows, duplicate labels, or
    /// an asymmetric entry pair.
    pub fn from_rows(
        labels: Vec<String>,
        rows: Vec<Vec<Rational>>,
    ) -> Result<Self, MatrixError> {
        let dim = labels.len();
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(MatrixError::DuplicateLabel(a.clone()));
            }
        }
        if rows.len() != dim {
            return Err(MatrixError::DimensionMismatch {
                expected: dim,
                found: rows.len(),
            });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(MatrixError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().cloned());
        }
        let m = Matrix { labels, entries };
        for i in 0..dim {
            for j in (i + 1)..dim {
                if m.at(i, j) != m.at(j, i) {
                    return Err(MatrixError::NotSymmetric(
                        m.labels[i].clone(),
                        m.labels[j].clone(),
                    ));
                }
            }
        }
        Ok(m)
    }

    /// Identity with the given coordinate labels.
    pub fn identity(labels: Vec<String>) -> Result<Self, MatrixError> {
        let dim = labels.len();
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Self::from_rows(labels, rows)
    }

    pub(crate) fn from_raw_symmetric(labels: Vec<String>, entries: Vec<Rational>) -> Self {
        debug_assert_eq!(entries.len(), labels.len() * labels.len());
        let m = Matrix { labels, entries };
        debug_assert!({
            let d = m.dim();
            (0..d).all(|i| (0..d).all(|j| m.at(i, j) == m.at(j, i)))
        });
        m
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Positional access (row, column), 0-based.
    pub fn at(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.dim() + j]
    }

    /// Label-addressed access.
    pub fn get(&self, row: &str, col: &str) -> Result<&Rational, MatrixError> {
        let i = self
            .index_of(row)
            .ok_or_else(|| MatrixError::UnknownLabel(row.to_owned()))?;
        let j = self
            .index_of(col)
            .ok_or_else(|| MatrixError::UnknownLabel(col.to_owned()))?;
        Ok(self.at(i, j))
    }

    /// Exact inverse by Gauss-Jordan elimination over the rationals.
    pub fn invert(&self) -> Result<Self, MatrixError> {
        let dim = self.dim();
        let mut work: Vec<Vec<Rational>> = (0..dim)
            .map(|i| (0..dim).map(|j| self.at(i, j).clone()).collect())
            .collect();
        let mut inv: Vec<Vec<Rational>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        for col in 0..dim {
            let pivot_row = (col..dim)
                .find(|&r| !work[r][col].is_zero())
                .ok_or(MatrixError::Singular)?;
            work.swap(col, pivot_row);
            inv.swap(col, pivot_row);
            let pivot = work[col][col].clone();
            for j in 0..dim {
                work[col][j] /= &pivot;
                inv[col][j] /= &pivot;
            }
            for r in 0..dim {
                if r == col || work[r][col].is_zero() {
                    continue;
                }
                let factor = work[r][col].clone();
                for j in 0..dim {
                    let w = &work[col][j] * &factor;
                    work[r][j] -= w;
                    let v = &inv[col][j] * &factor;
                    inv[r][j] -= v;
                }
            }
        }
        let entries = inv.into_iter().flatten().collect();
        Ok(Matrix::from_raw_symmetric(self.labels.clone(), entries))
    }

    /// Restrict rows and columns to `keep`, preserving this matrix's label
    /// order. `keep` is a set; duplicates and unknown labels are errors.
    pub fn submatrix(&self, keep: &[&str]) -> Result<Self, MatrixError> {
        let mut mask = vec![false; self.dim()];
        for label in keep {
            let i = self
                .index_of(label)
                .ok_or_else(|| MatrixError::UnknownLabel((*label).to_owned()))?;
            if mask[i] {
                return Err(MatrixError::DuplicateLabel((*label).to_owned()));
            }
            mask[i] = true;
        }
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| mask[i]).collect();
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let mut entries = Vec::with_capacity(idx.len() * idx.len());
        for &i in &idx {
            for &j in &idx {
                entries.push(self.at(i, j).clone());
            }
        }
        Ok(Matrix::from_raw_symmetric(labels, entries))
    }

    /// Reorder rows and columns to the given label order, which must be a
    /// permutation of this matrix's labels.
    pub fn permute(&self, order: &[&str]) -> Result<Self, MatrixError> {
        if order.len() != self.dim() {
            return Err(MatrixError::DimensionMismatch {
                expected: self.dim(),
                found: order.len(),
            });
        }
        let mut seen = vec![false; self.dim()];
        let mut idx = Vec::with_capacity(order.len());
        for label in order {
            let i = self
                .index_of(label)
                .ok_or_else(|| MatrixError::UnknownLabel((*label).to_owned()))?;
            if seen[i] {
                return Err(MatrixError::DuplicateLabel((*label).to_owned()));
            }
            seen[i] = true;
            idx.push(i);
        }
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let mut entries = Vec::with_capacity(self.dim() * self.dim());
        for &i in &idx {
            for &j in &idx {
                entries.push(self.at(i, j).clone());
            }
        }
        Ok(Matrix::from_raw_symmetric(labels, entries))
    }

    /// Congruence transform `S^-1 * M * S^-1` with a symmetric invertible
    /// `S`. The result carries `s`'s labels, which name the new coordinates.
    pub fn congruence(&self, s: &Matrix) -> Result<Self, MatrixError> {
        if s.dim() != self.dim() {
            return Err(MatrixError::DimensionMismatch {
                expected: self.dim(),
                found: s.dim(),
            });
        }
        let s_inv = s.invert()?;
        let tmp = mul_raw(&s_inv, self);
        let entries = mul_rows_raw(&tmp, &s_inv);
        Ok(Matrix::from_raw_symmetric(s.labels.clone(), entries))
    }

    /// Schur complement onto `keep`: `M_KK - M_KF * M_FF^-1 * M_FK`, where F
    /// is the complement of `keep`. Label order of the result follows this
    /// matrix. Fails if the eliminated block is singular.
    pub fn schur_complement(&self, keep: &[&str]) -> Result<Self, MatrixError> {
        let mut mask = vec![false; self.dim()];
        for label in keep {
            let i = self
                .index_of(label)
                .ok_or_else(|| MatrixError::UnknownLabel((*label).to_owned()))?;
            if mask[i] {
                return Err(MatrixError::DuplicateLabel((*label).to_owned()));
            }
            mask[i] = true;
        }
        let kept: Vec<usize> = (0..self.dim()).filter(|&i| mask[i]).collect();
        let free: Vec<usize> = (0..self.dim()).filter(|&i| !mask[i]).collect();
        if free.is_empty() {
            return self.submatrix(keep);
        }
        let free_labels: Vec<&str> = free.iter().map(|&i| self.labels[i].as_str()).collect();
        let ff_inv = self.submatrix(&free_labels)?.invert()?;
        // cross = M_KF * M_FF^-1, shape |K| x |F|
        let cross: Vec<Vec<Rational>> = kept
            .iter()
            .map(|&k| {
                (0..free.len())
                    .map(|c| {
                        free.iter()
                            .enumerate()
                            .map(|(fi, &f)| self.at(k, f) * ff_inv.at(fi, c))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let labels: Vec<String> = kept.iter().map(|&i| self.labels[i].clone()).collect();
        let mut entries = Vec::with_capacity(kept.len() * kept.len());
        for (a, &i) in kept.iter().enumerate() {
            for &j in &kept {
                let correction: Rational = free
                    .iter()
                    .enumerate()
                    .map(|(fi, &f)| &cross[a][fi] * self.at(j, f))
                    .sum();
                entries.push(self.at(i, j) - correction);
            }
        }
        Ok(Matrix::from_raw_symmetric(labels, entries))
    }
}

fn mul_raw(a: &Matrix, b: &Matrix) -> Vec<Vec<Rational>> {
    let dim = a.dim();
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).map(|k| a.at(i, k) * b.at(k, j)).sum())
                .collect()
        })
        .collect()
}

fn mul_rows_raw(a: &[Vec<Rational>], b: &Matrix) -> Vec<Rational> {
    let dim = b.dim();
    let mut out = Vec::with_capacity(dim * dim);
    for row in a {
        for j in 0..dim {
            out.push((0..dim).map(|k| &row[k] * b.at(k, j)).sum());
        }
    }
    out
}
