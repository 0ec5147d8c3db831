//! Sparse multivariate polynomials over `F_q` in variables `z_1..z_n`.
//!
//! Terms are kept in a map ordered by graded lexicographic order, so the
//! leading term is always the last entry and canonical output needs no
//! sorting pass. Variable indices in the Rust API are 0-based.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::ff::{Field, FieldElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension mismatch: {0} vs {1} variables")]
    DimensionMismatch(usize, usize),
    #[error("polynomials live over different fields")]
    MixedFields,
    #[error("variable index {index} out of range for {nvars} variables")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("division by the zero polynomial")]
    DivisorZero,
    #[error("linear form must have a nonzero coefficient")]
    ZeroLinearForm,
    #[error("coefficient encoding {0} is out of range")]
    BadCoefficient(u64),
    #[error("term has {got} exponents, expected {expected}")]
    BadExponents { got: usize, expected: usize },
}

/// Exponent vector of a monomial.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(SmallVec<[u32; 4]>);

impl Monomial {
    pub fn new(exponents: &[u32]) -> Self {
        Monomial(SmallVec::from_slice(exponents))
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            if b > a {
                return None;
            }
            out.push(a - b);
        }
        Some(Monomial(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One serialized term: `{exponents, coeff}` with `coeff` the field encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub exponents: Vec<u32>,
    pub coeff: u32,
}

#[derive(Clone)]
pub struct Polynomial {
    field: Field,
    nvars: usize,
    terms: BTreeMap<Monomial, u32>,
}

impl Polynomial {
    pub fn zero(field: &Field, nvars: usize) -> Self {
        Polynomial {
            field: field.clone(),
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: &Field, nvars: usize) -> Self {
        Self::constant(field, nvars, 1)
    }

    pub(crate) fn constant(field: &Field, nvars: usize, c: u32) -> Self {
        let mut p = Self::zero(field, nvars);
        if c != 0 {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn from_element(c: &FieldElement, nvars: usize) -> Self {
        Self::constant(c.field(), nvars, c.value())
    }

    /// The coordinate function `z_{i+1}`.
    pub fn var(field: &Field, nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(field, nvars);
        p.terms.insert(Monomial::var(nvars, i), 1);
        p
    }

    pub fn monomial(field: &Field, m: Monomial, c: &FieldElement) -> Self {
        let nvars = m.nvars();
        let mut p = Self::zero(field, nvars);
        if !c.is_zero() {
            p.terms.insert(m, c.value());
        }
        p
    }

    /// Builds a polynomial from raw `(exponents, coefficient encoding)` pairs,
    /// combining repeated monomials.
    pub(crate) fn from_raw<I>(field: &Field, nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, u32)>,
    {
        let mut p = Self::zero(field, nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Linear polynomial `sum_j coeffs[j] z_j`.
    pub(crate) fn linear(field: &Field, coeffs: &[u32]) -> Self {
        let n = coeffs.len();
        Self::from_raw(
            field,
            n,
            coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| (Monomial::var(n, j), c)),
        )
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Terms in graded-lex descending order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, FieldElement)> + '_ {
        self.terms
            .iter()
            .rev()
            .map(move |(m, &c)| (m, self.field.wrap(c)))
    }

    pub fn coefficient(&self, m: &Monomial) -> FieldElement {
        self.field.wrap(self.terms.get(m).copied().unwrap_or(0))
    }

    pub fn leading_term(&self) -> Option<(&Monomial, FieldElement)> {
        self.terms
            .iter()
            .next_back()
            .map(|(m, &c)| (m, self.field.wrap(c)))
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: u32) {
        if c == 0 {
            return;
        }
        let f = &self.field;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = f.add(*e.get(), c);
                if s == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.field != other.field {
            return Err(PolyError::MixedFields);
        }
        if self.nvars != other.nvars {
            return Err(PolyError::DimensionMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), self.field.neg(c));
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(other)?;
        let f = &self.field;
        let mut out = Polynomial::zero(f, self.nvars);
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                out.add_term(m1.mul(m2), f.mul(c1, c2));
            }
        }
        Ok(out)
    }

    pub(crate) fn scale_raw(&self, c: u32) -> Polynomial {
        if c == 0 {
            return Polynomial::zero(&self.field, self.nvars);
        }
        let f = &self.field;
        Polynomial {
            field: f.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &a)| (m.clone(), f.mul(a, c)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &FieldElement) -> Polynomial {
        assert!(c.field() == &self.field, "scalar from a different field");
        self.scale_raw(c.value())
    }

    fn mul_monomial(&self, m: &Monomial, c: u32) -> Polynomial {
        let f = &self.field;
        Polynomial {
            field: f.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(t, &a)| (t.mul(m), f.mul(a, c)))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(&self.field, self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Product of an iterator of polynomials, `one` when empty.
    pub fn product<'a, I>(field: &Field, nvars: usize, factors: I) -> Polynomial
    where
        I: IntoIterator<Item = &'a Polynomial>,
    {
        factors
            .into_iter()
            .fold(Polynomial::one(field, nvars), |acc, f| &acc * f)
    }

    /// Formal partial derivative with respect to `z_{i+1}`.
    pub fn partial_derivative(&self, i: usize) -> Result<Polynomial, PolyError> {
        if i >= self.nvars {
            return Err(PolyError::IndexOutOfRange {
                index: i,
                nvars: self.nvars,
            });
        }
        let f = &self.field;
        let mut out = Polynomial::zero(f, self.nvars);
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let factor = f.int(e as i64);
            if factor == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, f.mul(c, factor));
        }
        Ok(out)
    }

    /// Exact quotient `f / g`, or `None` when `g` does not divide `f`.
    ///
    /// Single-divisor division under graded lex: if `f = q g` then the leading
    /// term of every intermediate remainder is divisible by `LT(g)`, so the
    /// first failure proves non-divisibility.
    pub fn exact_divide(&self, g: &Polynomial) -> Result<Option<Polynomial>, PolyError> {
        self.check_compatible(g)?;
        let (lm_g, lc_g) = match g.terms.iter().next_back() {
            Some((m, &c)) => (m.clone(), c),
            None => return Err(PolyError::DivisorZero),
        };
        let f = &self.field;
        let inv_lc = f.inv(lc_g).expect("nonzero leading coefficient");
        let mut rem = self.clone();
        let mut quot = Polynomial::zero(f, self.nvars);
        while let Some((lm, &lc)) = rem.terms.iter().next_back() {
            let t = match lm.div(&lm_g) {
                Some(t) => t,
                None => return Ok(None),
            };
            let c = f.mul(lc, inv_lc);
            let sub = g.mul_monomial(&t, f.neg(c));
            for (m, a) in sub.terms {
                rem.add_term(m, a);
            }
            quot.add_term(t, c);
        }
        Ok(Some(quot))
    }

    /// `c` with `self = c * g`, `c != 0`; `None` when no such scalar exists.
    pub fn scalar_multiple_of(&self, g: &Polynomial) -> Result<Option<FieldElement>, PolyError> {
        self.check_compatible(g)?;
        let (lm_g, lc_g) = match g.terms.iter().next_back() {
            Some((m, &c)) => (m, c),
            None => return Err(PolyError::DivisorZero),
        };
        if self.terms.len() != g.terms.len() {
            return Ok(None);
        }
        let lc = match self.terms.get(lm_g) {
            Some(&c) => c,
            None => return Ok(None),
        };
        let f = &self.field;
        let c = f.mul(lc, f.inv(lc_g).expect("nonzero"));
        let ok = g
            .terms
            .iter()
            .all(|(m, &b)| self.terms.get(m).copied() == Some(f.mul(b, c)));
        Ok(if ok { Some(f.wrap(c)) } else { None })
    }

    /// Substitutes `z_i -> images[i]` for every variable.
    pub fn substitute(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), self.nvars, "one image per variable");
        let target_n = images.first().map_or(self.nvars, |p| p.nvars);
        let mut max_exp = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                max_exp[i] = max_exp[i].max(e);
            }
        }
        let powers: Vec<Vec<Polynomial>> = images
            .iter()
            .zip(&max_exp)
            .map(|(img, &top)| {
                let mut v = Vec::with_capacity(top as usize + 1);
                v.push(Polynomial::one(&self.field, target_n));
                for e in 1..=top as usize {
                    let next = &v[e - 1] * img;
                    v.push(next);
                }
                v
            })
            .collect();
        let terms: Vec<(&Monomial, u32)> = self.terms.iter().map(|(m, &c)| (m, c)).collect();
        substitute_rec(&self.field, target_n, &terms, 0, &powers)
    }

    /// Substitutes `z_i -> sum_j rows[i][j] z_j` (raw field encodings).
    pub(crate) fn linear_substitution(&self, rows: &[Vec<u32>]) -> Polynomial {
        let images: Vec<Polynomial> = rows
            .iter()
            .map(|r| Polynomial::linear(&self.field, r))
            .collect();
        self.substitute(&images)
    }

    /// Value at a point given by raw encodings.
    pub(crate) fn evaluate_raw(&self, point: &[u32]) -> u32 {
        let f = &self.field;
        let mut acc = 0;
        for (m, &c) in &self.terms {
            let mut t = c;
            for (&e, &x) in m.0.iter().zip(point) {
                t = f.mul(t, f.pow(x, e as u64));
            }
            acc = f.add(acc, t);
        }
        acc
    }

    pub fn evaluate(&self, point: &[FieldElement]) -> FieldElement {
        let raw: Vec<u32> = point.iter().map(FieldElement::value).collect();
        self.field.wrap(self.evaluate_raw(&raw))
    }

    /// Serialized terms, graded-lex descending.
    pub fn to_terms(&self) -> Vec<PolyTerm> {
        self.terms
            .iter()
            .rev()
            .map(|(m, &c)| PolyTerm {
                exponents: m.0.to_vec(),
                coeff: c,
            })
            .collect()
    }

    pub fn from_terms(field: &Field, nvars: usize, terms: &[PolyTerm]) -> Result<Self, PolyError> {
        let mut p = Polynomial::zero(field, nvars);
        for t in terms {
            if t.exponents.len() != nvars {
                return Err(PolyError::BadExponents {
                    got: t.exponents.len(),
                    expected: nvars,
                });
            }
            if t.coeff >= field.order() {
                return Err(PolyError::BadCoefficient(t.coeff as u64));
            }
            p.add_term(Monomial::new(&t.exponents), t.coeff);
        }
        Ok(p)
    }
}

fn substitute_rec(
    field: &Field,
    n: usize,
    terms: &[(&Monomial, u32)],
    var: usize,
    powers: &[Vec<Polynomial>],
) -> Polynomial {
    if var == powers.len() {
        let c = terms.iter().fold(0, |acc, &(_, c)| field.add(acc, c));
        return Polynomial::constant(field, n, c);
    }
    let mut groups: BTreeMap<u32, Vec<(&Monomial, u32)>> = BTreeMap::new();
    for &(m, c) in terms {
        groups.entry(m.0[var]).or_default().push((m, c));
    }
    let mut acc = Polynomial::zero(field, n);
    for (e, group) in groups {
        let inner = substitute_rec(field, n, &group, var + 1, powers);
        if inner.is_zero() {
            continue;
        }
        let part = if e == 0 {
            inner
        } else {
            &powers[var][e as usize] * &inner
        };
        for (m, c) in part.terms {
            acc.add_term(m, c);
        }
    }
    acc
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms && self.field == other.field
    }
}

impl Eq for Polynomial {}

impl std::hash::Hash for Polynomial {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.nvars.hash(state);
        for (m, c) in &self.terms {
            m.hash(state);
            c.hash(state);
        }
    }
}

// Operator impls panic on mismatched operands; the `try_*` methods report it.

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("incompatible polynomials")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("incompatible polynomials")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("incompatible polynomials")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        let p = self.field.characteristic();
        self.scale_raw(self.field.int(p as i64 - 1))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let vars: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("z{}", i + 1)
                    } else {
                        format!("z{}^{}", i + 1, e)
                    }
                })
                .collect();
            match (c.is_one(), vars.is_empty()) {
                (_, true) => write!(f, "{c}")?,
                (true, false) => write!(f, "{}", vars.join("*"))?,
                (false, false) => write!(f, "{}*{}", c, vars.join("*"))?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Determinant of the Jacobian matrix `(d f_i / d z_j)`.
pub fn jacobian_det(fs: &[Polynomial]) -> Result<Polynomial, PolyError> {
    let n = match fs.first() {
        Some(f) => f.nvars,
        None => return Err(PolyError::DimensionMismatch(0, 0)),
    };
    if fs.len() != n {
        return Err(PolyError::DimensionMismatch(fs.len(), n));
    }
    let mut rows = Vec::with_capacity(n);
    for f in fs {
        if f.nvars != n {
            return Err(PolyError::DimensionMismatch(f.nvars, n));
        }
        rows.push(
            (0..n)
                .map(|j| f.partial_derivative(j))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(cofactor_det(&rows))
}

/// Laplace expansion along the first row; intended for `n <= 4`.
pub fn cofactor_det(m: &[Vec<Polynomial>]) -> Polynomial {
    let n = m.len();
    assert!(n > 0);
    if n == 1 {
        return m[0][0].clone();
    }
    let field = m[0][0].field().clone();
    let nvars = m[0][0].nvars();
    let mut acc = Polynomial::zero(&field, nvars);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * &cofactor_det(&minor);
        acc = if j % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

/// Nonzero linear form normalized so that its first nonzero coefficient is 1.
#[derive(Clone)]
pub struct LinearForm {
    field: Field,
    coeffs: Vec<u32>,
}

impl LinearForm {
    pub fn new(field: &Field, coeffs: &[FieldElement]) -> Result<Self, PolyError> {
        let raw: Vec<u32> = coeffs.iter().map(FieldElement::value).collect();
        Self::from_raw(field, &raw).ok_or(PolyError::ZeroLinearForm)
    }

    pub(crate) fn from_raw(field: &Field, coeffs: &[u32]) -> Option<Self> {
        let lead = *coeffs.iter().find(|&&c| c != 0)?;
        let inv = field.inv(lead).expect("nonzero");
        Some(LinearForm {
            field: field.clone(),
            coeffs: coeffs.iter().map(|&c| field.mul(c, inv)).collect(),
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> Vec<FieldElement> {
        self.coeffs.iter().map(|&c| self.field.wrap(c)).collect()
    }

    pub(crate) fn raw(&self) -> &[u32] {
        &self.coeffs
    }

    /// Index of the first nonzero coefficient (where the coefficient is 1).
    pub fn pivot(&self) -> usize {
        self.coeffs
            .iter()
            .position(|&c| c != 0)
            .expect("nonzero form")
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::linear(&self.field, &self.coeffs)
    }

    /// `l(v)` for a vector of raw encodings.
    pub(crate) fn eval_raw(&self, v: &[u32]) -> u32 {
        let f = &self.field;
        self.coeffs
            .iter()
            .zip(v)
            .fold(0, |acc, (&a, &x)| f.add(acc, f.mul(a, x)))
    }
}

impl PartialEq for LinearForm {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for LinearForm {}

impl std::hash::Hash for LinearForm {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl Ord for LinearForm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.cmp(&other.coeffs)
    }
}

impl PartialOrd for LinearForm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_polynomial())
    }
}

impl fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn f(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    pub(crate) fn poly(field: &Field, n: usize, terms: &[(&[u32], i64)]) -> Polynomial {
        Polynomial::from_raw(
            field,
            n,
            terms.iter().map(|(e, c)| (Monomial::new(e), field.int(*c))),
        )
    }

    #[test]
    fn arithmetic_examples() {
        let f5 = f(5);
        let a = poly(&f5, 2, &[(&[1, 0], 1), (&[0, 1], 1)]);
        let b = poly(&f5, 2, &[(&[1, 0], 1), (&[0, 1], -1)]);
        assert_eq!(&a * &b, poly(&f5, 2, &[(&[2, 0], 1), (&[0, 2], -1)]));
        assert_eq!(&a + &Polynomial::zero(&f5, 2), a);

        let f3 = f(3);
        let z1 = Polynomial::var(&f3, 2, 0);
        let z2 = Polynomial::var(&f3, 2, 1);
        let two = Polynomial::constant(&f3, 2, 2);
        let prod = &(&z2 * &(&z2 + &z1)) * &(&z2 + &(&two * &z1));
        assert_eq!(prod, poly(&f3, 2, &[(&[0, 3], 1), (&[2, 1], -1)]));

        let c = Polynomial::var(&f3, 3, 0);
        assert_eq!(
            z1.try_add(&c).unwrap_err(),
            PolyError::DimensionMismatch(2, 3)
        );
    }

    #[test]
    fn derivative_examples() {
        let f3 = f(3);
        let z1_cubed = poly(&f3, 2, &[(&[3, 0], 1)]);
        assert!(z1_cubed.partial_derivative(0).unwrap().is_zero());
        let z1z2 = poly(&f3, 2, &[(&[1, 1], 1)]);
        assert_eq!(
            z1z2.partial_derivative(1).unwrap(),
            Polynomial::var(&f3, 2, 0)
        );
        let f2 = poly(&f3, 2, &[(&[0, 3], 1), (&[2, 1], -1)]);
        assert_eq!(
            f2.partial_derivative(1).unwrap(),
            poly(&f3, 2, &[(&[2, 0], 2)])
        );
        assert_eq!(
            f2.partial_derivative(2).unwrap_err(),
            PolyError::IndexOutOfRange { index: 2, nvars: 2 }
        );
    }

    #[test]
    fn division_examples() {
        let f3 = f(3);
        let f2 = poly(&f3, 2, &[(&[0, 3], 1), (&[2, 1], -1)]);
        let z2 = Polynomial::var(&f3, 2, 1);
        let z1 = Polynomial::var(&f3, 2, 0);
        assert_eq!(
            f2.exact_divide(&z2).unwrap().unwrap(),
            poly(&f3, 2, &[(&[0, 2], 1), (&[2, 0], -1)])
        );
        assert_eq!(z1.exact_divide(&z2).unwrap(), None);
        assert_eq!(
            z1.exact_divide(&Polynomial::zero(&f3, 2)).unwrap_err(),
            PolyError::DivisorZero
        );
        // remainder hidden below the leading term
        let g = &(&z1 * &z1) + &z2;
        assert_eq!(g.exact_divide(&z1).unwrap(), None);
    }

    #[test]
    fn proportionality_examples() {
        let f5 = f(5);
        let g = poly(&f5, 2, &[(&[1, 1], 1), (&[0, 2], 3)]);
        assert_eq!(
            g.scale_raw(2).scalar_multiple_of(&g).unwrap(),
            Some(f5.from_int(2))
        );
        assert_eq!(
            Polynomial::zero(&f5, 2).scalar_multiple_of(&g).unwrap(),
            None
        );
        let h = poly(&f5, 2, &[(&[1, 1], 2), (&[0, 2], 3)]);
        assert_eq!(h.scalar_multiple_of(&g).unwrap(), None);
    }

    #[test]
    fn jacobian_examples() {
        let f3 = f(3);
        let z1 = Polynomial::var(&f3, 2, 0);
        let z2 = Polynomial::var(&f3, 2, 1);
        assert_eq!(
            jacobian_det(&[z1.clone(), z2.clone()]).unwrap(),
            Polynomial::one(&f3, 2)
        );
        let f2 = poly(&f3, 2, &[(&[0, 3], 1), (&[2, 1], -1)]);
        let j = jacobian_det(&[z1.clone(), f2]).unwrap();
        assert_eq!(j, poly(&f3, 2, &[(&[2, 0], -1)]));
        assert!(jacobian_det(&[z1]).is_err());
    }

    #[test]
    fn substitution_matches_pointwise_evaluation() {
        // oracle: evaluate f at A v for all v in F_3^2
        let f3 = f(3);
        let p = poly(
            &f3,
            2,
            &[(&[3, 1], 1), (&[1, 2], 2), (&[0, 1], 1), (&[0, 0], 2)],
        );
        let rows = vec![vec![1, 2], vec![0, 1]];
        let s = p.linear_substitution(&rows);
        for x in 0..3 {
            for y in 0..3 {
                let ax = f3.add(x, f3.mul(2, y));
                assert_eq!(s.evaluate_raw(&[x, y]), p.evaluate_raw(&[ax, y]));
            }
        }
    }

    #[test]
    fn linear_form_normalization() {
        let f5 = f(5);
        let l = LinearForm::from_raw(&f5, &[0, 3, 1]).unwrap();
        assert_eq!(l.raw(), &[0, 1, 2]);
        assert_eq!(l.pivot(), 1);
        assert!(LinearForm::from_raw(&f5, &[0, 0]).is_none());
        assert_eq!(
            LinearForm::new(&f5, &[f5.zero()]).unwrap_err(),
            PolyError::ZeroLinearForm
        );
    }

    #[test]
    fn serialization_is_graded_lex_descending() {
        let f3 = f(3);
        let p = poly(&f3, 2, &[(&[0, 3], 1), (&[2, 1], 2), (&[1, 0], 1)]);
        let terms = p.to_terms();
        assert_eq!(terms[0].exponents, vec![2, 1]);
        assert_eq!(terms[1].exponents, vec![0, 3]);
        assert_eq!(terms[2].exponents, vec![1, 0]);
        assert_eq!(Polynomial::from_terms(&f3, 2, &terms).unwrap(), p);
        assert_eq!(p.to_string(), "2*z1^2*z2 + z2^3 + z1");
    }

    pub(crate) fn arb_poly(
        p: u64,
        n: usize,
        max_deg: u32,
        max_terms: usize,
    ) -> impl Strategy<Value = Polynomial> {
        let term = (prop::collection::vec(0..=max_deg, n), 1..p as u32);
        prop::collection::vec(term, 0..=max_terms).prop_map(move |ts| {
            let field = Field::prime(p).unwrap();
            Polynomial::from_raw(
                &field,
                n,
                ts.into_iter().map(|(e, c)| (Monomial::new(&e), c)),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn divide_product_recovers_factor(a in arb_poly(5, 3, 3, 5), b in arb_poly(5, 3, 3, 5)) {
            prop_assume!(!b.is_zero());
            let prod = &a * &b;
            prop_assert_eq!(prod.exact_divide(&b).unwrap(), Some(a.clone()));
            if !a.is_zero() {
                prop_assert_eq!(prod.degree().unwrap(), a.degree().unwrap() + b.degree().unwrap());
            }
        }

        #[test]
        fn derivative_is_additive_and_leibniz(a in arb_poly(3, 2, 4, 5), b in arb_poly(3, 2, 4, 5), i in 0usize..2) {
            let da = a.partial_derivative(i).unwrap();
            let db = b.partial_derivative(i).unwrap();
            prop_assert_eq!((&a + &b).partial_derivative(i).unwrap(), &da + &db);
            prop_assert_eq!((&a * &b).partial_derivative(i).unwrap(), &(&da * &b) + &(&a * &db));
        }
    }
}
