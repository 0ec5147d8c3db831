//! Differential forms `sum_I u_I dz_I` with polynomial coefficients.
//!
//! Index sets are bitmasks over 0-based variable indices, always stored
//! strictly increasing with any reordering sign absorbed into the coefficient.
//!
//! Group action convention: `(g f)(v) = f(g^{-1} v)`. Hence `g` sends
//! `z_i` to `sum_j (g^{-1})_{ij} z_j`, and `dz_i` likewise. For a transvection
//! `v -> v + z_n(v) v_m` this gives `dz_m -> dz_m - dz_n`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{Field, FieldElement};
use crate::linalg::Matrix;
use crate::mpoly::{PolyError, PolyTerm, Polynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("wedge of degrees {0} and {1} exceeds dimension {2}")]
    DegreeOverflow(usize, usize, usize),
    #[error("forms live in different ambient spaces")]
    Mismatch,
    #[error("coefficient of dz{} is not divisible", fmt_indices(.indices))]
    NotDivisible { indices: Vec<usize> },
    #[error("division by the zero polynomial")]
    DivisorZero,
    #[error("matrix is singular or has the wrong size")]
    SingularMatrix,
    #[error("invalid index set {0:?}")]
    BadIndices(Vec<usize>),
    #[error("term degree {got} does not match form degree {expected}")]
    BadDegree { got: usize, expected: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn fmt_indices(ix: &[usize]) -> String {
    ix.iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join("")
}

/// A strictly increasing subset of `{0, .., n-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexSet(u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    /// Accepts strictly increasing 0-based indices below 32.
    pub fn new(indices: &[usize]) -> Option<Self> {
        let mut bits = 0u32;
        let mut last: Option<usize> = None;
        for &i in indices {
            if i >= 32 || last.is_some_and(|l| l >= i) {
                return None;
            }
            bits |= 1 << i;
            last = Some(i);
        }
        Some(IndexSet(bits))
    }

    pub fn single(i: usize) -> Self {
        IndexSet(1 << i)
    }

    pub fn full(n: usize) -> Self {
        IndexSet(((1u64 << n) - 1) as u32)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Sign of `dz_self ^ dz_other`, or `None` when the sets overlap.
    fn merge_sign(self, other: IndexSet) -> Option<bool> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut inversions = 0u32;
        for j in other.iter() {
            inversions += (self.0 >> (j + 1)).count_ones();
        }
        Some(inversions % 2 == 1)
    }

    /// All subsets of `{0..n-1}` of size `k`, in lexicographic order.
    pub fn all_of_size(n: usize, k: usize) -> Vec<IndexSet> {
        let mut out: Vec<IndexSet> = (0u32..(1u32 << n))
            .filter(|b| b.count_ones() as usize == k)
            .map(IndexSet)
            .collect();
        out.sort();
        out
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", fmt_indices(&self.indices()))
    }
}

/// A differential `k`-form on `n`-dimensional space over `F_q`.
#[derive(Clone, PartialEq, Eq)]
pub struct DiffForm {
    field: Field,
    nvars: usize,
    degree: usize,
    terms: BTreeMap<IndexSet, Polynomial>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormTerm {
    /// 1-based, strictly increasing.
    pub indices: Vec<usize>,
    pub poly: Vec<PolyTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormRepr {
    pub degree: usize,
    pub terms: Vec<FormTerm>,
}

impl DiffForm {
    pub fn zero(field: &Field, nvars: usize, degree: usize) -> Self {
        assert!(degree <= nvars);
        DiffForm {
            field: field.clone(),
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The 0-form `f`.
    pub fn from_polynomial(f: &Polynomial) -> Self {
        let mut out = Self::zero(f.field(), f.nvars(), 0);
        out.insert(IndexSet::EMPTY, f.clone());
        out
    }

    /// `f dz_I` for strictly increasing 0-based indices.
    pub fn basis(f: &Polynomial, indices: &[usize]) -> Result<Self, FormError> {
        let set = IndexSet::new(indices)
            .filter(|s| s.iter().all(|i| i < f.nvars()))
            .ok_or_else(|| FormError::BadIndices(indices.to_vec()))?;
        let mut out = Self::zero(f.field(), f.nvars(), set.len());
        out.insert(set, f.clone());
        Ok(out)
    }

    /// `dz_{i+1}`.
    pub fn dz(field: &Field, nvars: usize, i: usize) -> Self {
        let mut out = Self::zero(field, nvars, 1);
        out.insert(IndexSet::single(i), Polynomial::one(field, nvars));
        out
    }

    /// The volume form `dz_1 ^ ... ^ dz_n`.
    pub fn volume(field: &Field, nvars: usize) -> Self {
        let mut out = Self::zero(field, nvars, nvars);
        out.insert(IndexSet::full(nvars), Polynomial::one(field, nvars));
        out
    }

    /// 1-form `sum_i coeffs[i] dz_i`.
    pub fn one_form(coeffs: &[Polynomial]) -> Self {
        let field = coeffs[0].field().clone();
        let n = coeffs.len();
        let mut out = Self::zero(&field, n, 1);
        for (i, c) in coeffs.iter().enumerate() {
            out.insert(IndexSet::single(i), c.clone());
        }
        out
    }

    fn insert(&mut self, set: IndexSet, coeff: Polynomial) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&set) {
            Some(existing) => {
                let sum = &*existing + &coeff;
                if sum.is_zero() {
                    self.terms.remove(&set);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(set, coeff);
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (IndexSet, &Polynomial)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn coefficient(&self, set: IndexSet) -> Polynomial {
        self.terms
            .get(&set)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(&self.field, self.nvars))
    }

    /// Coefficient of `dz_{i+1}` in a 1-form.
    pub fn component(&self, i: usize) -> Polynomial {
        self.coefficient(IndexSet::single(i))
    }

    /// The `f` in `self = f vol` for a top-degree form.
    pub fn top_coefficient(&self) -> Polynomial {
        assert_eq!(self.degree, self.nvars, "not a top-degree form");
        self.coefficient(IndexSet::full(self.nvars))
    }

    /// Largest total degree among the coefficients.
    pub fn coefficient_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(Polynomial::degree).max()
    }

    fn check_same(&self, other: &DiffForm) -> Result<(), FormError> {
        if self.field != other.field || self.nvars != other.nvars {
            return Err(FormError::Mismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.check_same(other)?;
        if self.degree != other.degree {
            return Err(FormError::Mismatch);
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert(*k, v.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.try_add(&other.scale(&self.field.from_int(-1)))
    }

    pub fn scale(&self, c: &FieldElement) -> DiffForm {
        let mut out = DiffForm::zero(&self.field, self.nvars, self.degree);
        for (k, v) in &self.terms {
            out.insert(*k, v.scale(c));
        }
        out
    }

    /// `f * self` for a polynomial `f`.
    pub fn mul_poly(&self, f: &Polynomial) -> DiffForm {
        let mut out = DiffForm::zero(&self.field, self.nvars, self.degree);
        for (k, v) in &self.terms {
            out.insert(*k, v * f);
        }
        out
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.check_same(other)?;
        let deg = self.degree + other.degree;
        if deg > self.nvars {
            return Err(FormError::DegreeOverflow(
                self.degree,
                other.degree,
                self.nvars,
            ));
        }
        let mut out = DiffForm::zero(&self.field, self.nvars, deg);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let Some(negate) = i.merge_sign(*j) else {
                    continue;
                };
                let prod = a * b;
                let prod = if negate { -&prod } else { prod };
                out.insert(IndexSet(i.0 | j.0), prod);
            }
        }
        Ok(out)
    }

    /// `w_1 ^ ... ^ w_m`; the constant 0-form 1 when empty.
    pub fn wedge_all(
        field: &Field,
        nvars: usize,
        forms: &[&DiffForm],
    ) -> Result<DiffForm, FormError> {
        let mut acc = DiffForm::from_polynomial(&Polynomial::one(field, nvars));
        for w in forms {
            acc = acc.wedge(w)?;
        }
        Ok(acc)
    }

    /// Exterior derivative of a `k`-form.
    pub fn d(&self) -> Result<DiffForm, FormError> {
        if self.degree == self.nvars {
            return Ok(DiffForm::zero(&self.field, self.nvars, self.degree));
        }
        let mut out = DiffForm::zero(&self.field, self.nvars, self.degree + 1);
        for (set, u) in &self.terms {
            for i in 0..self.nvars {
                let Some(negate) = IndexSet::single(i).merge_sign(*set) else {
                    continue;
                };
                let du = u.partial_derivative(i)?;
                let du = if negate { -&du } else { du };
                out.insert(IndexSet(set.0 | (1 << i)), du);
            }
        }
        Ok(out)
    }

    /// Divides every coefficient by `g`, naming the first failing index set.
    pub fn divide(&self, g: &Polynomial) -> Result<DiffForm, FormError> {
        if g.is_zero() {
            return Err(FormError::DivisorZero);
        }
        let mut out = DiffForm::zero(&self.field, self.nvars, self.degree);
        for (set, u) in &self.terms {
            match u.exact_divide(g)? {
                Some(q) => out.insert(*set, q),
                None => {
                    return Err(FormError::NotDivisible {
                        indices: set.indices(),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Applies the linear substitution `z_i -> sum_j a[i][j] z_j` to the
    /// coefficients and to the `dz_i`. With `a = g^{-1}` this is the action of `g`.
    pub(crate) fn substitute_linear(&self, a: &Matrix) -> DiffForm {
        let f = &self.field;
        let n = self.nvars;
        let rows = a.row_vecs();
        let dz_images: Vec<DiffForm> = rows
            .iter()
            .map(|r| {
                let coeffs: Vec<Polynomial> =
                    r.iter().map(|&c| Polynomial::constant(f, n, c)).collect();
                DiffForm::one_form(&coeffs)
            })
            .collect();
        let mut basis_cache: BTreeMap<IndexSet, DiffForm> = BTreeMap::new();
        let mut out = DiffForm::zero(f, n, self.degree);
        for (set, u) in &self.terms {
            let image = basis_cache.entry(*set).or_insert_with(|| {
                let factors: Vec<&DiffForm> = set.iter().map(|i| &dz_images[i]).collect();
                DiffForm::wedge_all(f, n, &factors).expect("degree within range")
            });
            let new_u = u.linear_substitution(&rows);
            for (s2, c) in &image.terms {
                out.insert(*s2, &new_u * c);
            }
        }
        out
    }

    /// `g . self` under `(g f)(v) = f(g^{-1} v)`.
    pub fn act(&self, g: &Matrix) -> Result<DiffForm, FormError> {
        if g.rows() != self.nvars {
            return Err(FormError::SingularMatrix);
        }
        let inv = g.inverse(&self.field).ok_or(FormError::SingularMatrix)?;
        Ok(self.substitute_linear(&inv))
    }

    pub fn to_repr(&self) -> FormRepr {
        FormRepr {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(set, u)| FormTerm {
                    indices: set.iter().map(|i| i + 1).collect(),
                    poly: u.to_terms(),
                })
                .collect(),
        }
    }

    pub fn from_repr(field: &Field, nvars: usize, repr: &FormRepr) -> Result<Self, FormError> {
        if repr.degree > nvars {
            return Err(FormError::BadDegree {
                got: repr.degree,
                expected: nvars,
            });
        }
        let mut out = DiffForm::zero(field, nvars, repr.degree);
        for t in &repr.terms {
            if t.indices.len() != repr.degree {
                return Err(FormError::BadDegree {
                    got: t.indices.len(),
                    expected: repr.degree,
                });
            }
            let zero_based: Option<Vec<usize>> =
                t.indices.iter().map(|&i| i.checked_sub(1)).collect();
            let set = zero_based
                .as_deref()
                .and_then(IndexSet::new)
                .filter(|s| s.iter().all(|i| i < nvars))
                .ok_or_else(|| FormError::BadIndices(t.indices.clone()))?;
            out.insert(set, Polynomial::from_terms(field, nvars, &t.poly)?);
        }
        Ok(out)
    }
}

/// `df = sum_i (df/dz_i) dz_i`.
pub fn exterior_derivative(f: &Polynomial) -> DiffForm {
    DiffForm::from_polynomial(f).d().expect("0-form derivative")
}

/// `(mu ^ nu) / delta`.
pub fn twisted_wedge(
    mu: &DiffForm,
    nu: &DiffForm,
    delta: &Polynomial,
) -> Result<DiffForm, FormError> {
    mu.wedge(nu)?.divide(delta)
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(set, u)| {
                if set.is_empty() {
                    format!("({u})")
                } else {
                    format!("({u}) dz{}", fmt_indices(&set.indices()))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
