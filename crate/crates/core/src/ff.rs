//! Exact arithmetic in finite fields `F_q`, `q = p^k`, `p` an odd prime.
//!
//! Elements are stored as a single integer in `[0, q)` whose base-`p`
//! digits (little-endian) are the coefficients of the element as a
//! polynomial in the generator of `F_p[x]/(m(x))`. This is also the
//! serialized form, so canonical representatives compare bit-for-bit.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    CharTwoRejected,
    #[error("modulus polynomial is reducible over F_{0}")]
    ReducibleModulus(u32),
    #[error("invalid modulus polynomial: {0}")]
    InvalidModulus(String),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{k} is too large")]
    TooLarge { p: u64, k: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("zero has no multiplicative order")]
    ZeroElement,
    #[error("{value} is not an element encoding of a field with {q} elements")]
    OutOfRange { value: u64, q: u32 },
}

/// Serializable description of a finite field.
///
/// `modulus_poly` lists the `k + 1` coefficients of the defining polynomial,
/// constant term first, and is omitted for prime fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus_poly: Option<Vec<u32>>,
}

struct Inner {
    spec: FieldSpec,
    p: u32,
    k: usize,
    q: u32,
    // monic, little-endian, length k + 1 (unused for k = 1)
    modulus: Vec<u32>,
}

/// A validated finite field. Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `a` modulo the monic polynomial `m` over `F_p` (little-endian).
fn poly_rem_mod_p(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r[r.len() - 1];
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (j, &mj) in m.iter().enumerate() {
                let sub = (lead as u64 * mj as u64 % p as u64) as u32;
                r[shift + j] = (r[shift + j] + p - sub) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible_mod_p(m: &[u32], p: u32) -> bool {
    let k = m.len() - 1;
    for d in 1..=k / 2 {
        // every monic polynomial of degree d
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut f = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                f.push((c % p as u64) as u32);
                c /= p as u64;
            }
            f.push(1);
            if poly_rem_mod_p(m, &f, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Validates `(p, k, modulus)` and builds the field.
    pub fn new(p: u64, k: u32, modulus_poly: Option<&[u32]>) -> Result<Self, FieldError> {
        if p == 2 {
            return Err(FieldError::CharTwoRejected);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u128)
            .checked_pow(k)
            .filter(|&q| q <= i32::MAX as u128);
        let q = match q {
            Some(q) => q as u32,
            None => return Err(FieldError::TooLarge { p, k }),
        };
        let p32 = p as u32;
        let (modulus, spec_modulus) = if k == 1 {
            (Vec::new(), None)
        } else {
            let m = modulus_poly.ok_or_else(|| {
                FieldError::InvalidModulus("a modulus is required when k > 1".into())
            })?;
            if m.len() != k as usize + 1 {
                return Err(FieldError::InvalidModulus(format!(
                    "expected {} coefficients, got {}",
                    k + 1,
                    m.len()
                )));
            }
            if m.iter().any(|&c| c >= p32) {
                return Err(FieldError::InvalidModulus(
                    "coefficient out of range".into(),
                ));
            }
            if m[k as usize] != 1 {
                return Err(FieldError::InvalidModulus("modulus must be monic".into()));
            }
            if !is_irreducible_mod_p(m, p32) {
                return Err(FieldError::ReducibleModulus(p32));
            }
            (m.to_vec(), Some(m.to_vec()))
        };
        Ok(Field(Arc::new(Inner {
            spec: FieldSpec {
                p: p32,
                k,
                modulus_poly: spec_modulus,
            },
            p: p32,
            k: k as usize,
            q,
            modulus,
        })))
    }

    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::new(p, 1, None)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self, FieldError> {
        Self::new(spec.p as u64, spec.k, spec.modulus_poly.as_deref())
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.k
    }

    pub fn order(&self) -> u32 {
        self.0.q
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.q).map(move |v| self.wrap(v))
    }

    /// Wraps a raw encoding. The caller guarantees `value < q`.
    pub(crate) fn wrap(&self, value: u32) -> FieldElement {
        debug_assert!(value < self.0.q);
        FieldElement {
            field: self.clone(),
            value,
        }
    }

    /// Checked conversion from the serialized integer encoding.
    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if value >= self.0.q as u64 {
            return Err(FieldError::OutOfRange { value, q: self.0.q });
        }
        Ok(self.wrap(value as u32))
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }

    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        self.wrap(self.int(n))
    }

    // Raw arithmetic on encodings, used by the polynomial kernels.

    pub(crate) fn int(&self, n: i64) -> u32 {
        n.rem_euclid(self.0.p as i64) as u32
    }

    fn digits(&self, mut a: u32) -> Vec<u32> {
        let p = self.0.p;
        (0..self.0.k)
            .map(|_| {
                let d = a % p;
                a /= p;
                d
            })
            .collect()
    }

    fn undigits(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0u32, |acc, &x| acc * self.0.p + x)
    }

    #[inline]
    pub(crate) fn add(&self, a: u32, b: u32) -> u32 {
        let p = self.0.p;
        if self.0.k == 1 {
            let s = a as u64 + b as u64;
            return (s % p as u64) as u32;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.0.k {
            let d = (a % p + b % p) % p;
            out += d * place;
            place = place.wrapping_mul(p);
            a /= p;
            b /= p;
        }
        out
    }

    #[inline]
    pub(crate) fn neg(&self, a: u32) -> u32 {
        let p = self.0.p;
        if self.0.k == 1 {
            return if a == 0 { 0 } else { p - a };
        }
        let mut a = a;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.0.k {
            let d = (p - a % p) % p;
            out += d * place;
            place = place.wrapping_mul(p);
            a /= p;
        }
        out
    }

    #[inline]
    pub(crate) fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub(crate) fn mul(&self, a: u32, b: u32) -> u32 {
        let p = self.0.p as u64;
        if self.0.k == 1 {
            return (a as u64 * b as u64 % p) as u32;
        }
        if a == 0 || b == 0 {
            return 0;
        }
        let k = self.0.k;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let m = &self.0.modulus;
        for deg in (k..2 * k - 1).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            // x^deg = x^(deg-k) * x^k and x^k = -(m_0 + ... + m_{k-1} x^{k-1})
            for (j, &mj) in m.iter().take(k).enumerate() {
                let idx = deg - k + j;
                prod[idx] = (prod[idx] + (p - c) * mj as u64) % p;
            }
            prod[deg] = 0;
        }
        let digits: Vec<u32> = prod[..k].iter().map(|&x| x as u32).collect();
        self.undigits(&digits)
    }

    pub(crate) fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero encoding.
    pub(crate) fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.0.q as u64 - 2))
        }
    }

    pub(crate) fn order_of(&self, a: u32) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let n = self.0.q as u64 - 1;
        let mut divisors = Vec::new();
        let mut d = 1u64;
        while d * d <= n {
            if n.is_multiple_of(d) {
                divisors.push(d);
                if d * d != n {
                    divisors.push(n / d);
                }
            }
            d += 1;
        }
        divisors.sort_unstable();
        divisors.into_iter().find(|&d| self.pow(a, d) == 1)
    }

    pub(crate) fn fmt_value(&self, v: u32) -> String {
        if self.0.k == 1 {
            return v.to_string();
        }
        // generator written as `a`
        let d = self.digits(v);
        let mut parts = Vec::new();
        for (i, &c) in d.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mon = match i {
                0 => String::new(),
                1 => "a".to_string(),
                _ => format!("a^{i}"),
            };
            parts.push(match (c, mon.is_empty()) {
                (_, true) => c.to_string(),
                (1, false) => mon,
                (_, false) => format!("{c}{mon}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else if parts.len() == 1 {
            parts.remove(0)
        } else {
            format!("({})", parts.join("+"))
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.q)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.q)
    }
}

/// An element of a finite field in canonical form.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    value: u32,
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Serialized integer encoding in `[0, q)`.
    pub fn value(&self) -> u32 {
        self.value
    }

    /// Coefficients over `F_p`, constant term first.
    pub fn coeffs(&self) -> Vec<u32> {
        self.field.digits(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_one(&self) -> bool {
        self.value == 1
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::MixedFields)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.field.wrap(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.field.wrap(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.field.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        let inv = self
            .field
            .inv(other.value)
            .ok_or(FieldError::DivisionByZero)?;
        Ok(self.field.wrap(self.field.mul(self.value, inv)))
    }

    pub fn neg(&self) -> Self {
        self.field.wrap(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        let inv = self
            .field
            .inv(self.value)
            .ok_or(FieldError::DivisionByZero)?;
        Ok(self.field.wrap(inv))
    }

    /// `self^e` for a signed exponent; negative powers of zero fail.
    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        if e >= 0 {
            Ok(self.field.wrap(self.field.pow(self.value, e as u64)))
        } else {
            Ok(self.inv()?.pow(-e)?)
        }
    }

    /// Smallest `m >= 1` with `self^m = 1`.
    pub fn mult_order(&self) -> Result<u64, FieldError> {
        self.field
            .order_of(self.value)
            .ok_or(FieldError::ZeroElement)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.field == other.field
    }
}

impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.field.0.spec.hash(state);
        self.value.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.fmt_value(self.value))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.fmt_value(self.value))
    }
}
