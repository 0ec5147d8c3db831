//! Explicit invariant polynomials and candidate generating 1-forms:
//! Dickson invariants and the forms `d(d_{n,i-1}) / f` for `SL_n <= G <= GL_n`,
//! the unipotent orbit products `f_k` with `df_k / prod_{i<k} f_i^(q-2)`,
//! the generators of a group fixing a single hyperplane, and Chern-class
//! forms for an arbitrary group.
//!
//! Every family is checked for invariance under all generators before it is
//! returned.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crit::is_invariant;
use crate::extalg::{exterior_derivative, DiffForm, FormError, FormRepr};
use crate::ff::Field;
use crate::grp::{adapted_basis_of, arrangement, hyperplane_table, MatrixGroup};
use crate::linalg::Matrix;
use crate::mpoly::{PolyError, PolyTerm, Polynomial};

/// Bound on the number of vectors enumerated when expanding orbit products.
pub const ENUMERATION_CAP: u64 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GensError {
    #[error("{what} needs {size} vectors, above the cap of {cap}")]
    ScaleExceeded {
        what: &'static str,
        size: u64,
        cap: u64,
    },
    #[error("not a group between SL_n and GL_n: {0}")]
    NotSLGLFamily(String),
    #[error("group is not the standard lower unitriangular group: {0}")]
    NotUnipotentStandard(String),
    #[error("expected exactly one reflecting hyperplane, found {0}")]
    NotSingleHyperplane(usize),
    #[error("division is not exact: {0}")]
    NotDivisible(String),
    #[error("only {found} of {n} Chern forms are independent")]
    SelectionFailed { found: usize, n: usize },
    #[error("constructed form {0} is not invariant")]
    NotInvariant(usize),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    DicksonGlsl,
    Unipotent,
    SingleHyperplane,
    Chern,
}

impl FamilyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::DicksonGlsl => "dickson_glsl",
            FamilyTag::Unipotent => "unipotent",
            FamilyTag::SingleHyperplane => "single_hyperplane",
            FamilyTag::Chern => "chern",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorFamily {
    pub family_tag: FamilyTag,
    pub polys: Vec<Polynomial>,
    pub forms: Vec<DiffForm>,
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRepr {
    pub family_tag: FamilyTag,
    pub polys: Vec<Vec<PolyTerm>>,
    pub forms: Vec<FormRepr>,
    #[serde(default)]
    pub notes: String,
}

impl GeneratorFamily {
    pub fn to_repr(&self) -> FamilyRepr {
        FamilyRepr {
            family_tag: self.family_tag,
            polys: self.polys.iter().map(Polynomial::to_terms).collect(),
            forms: self.forms.iter().map(DiffForm::to_repr).collect(),
            notes: self.notes.clone(),
        }
    }

    pub fn from_repr(field: &Field, nvars: usize, repr: &FamilyRepr) -> Result<Self, FormError> {
        Ok(GeneratorFamily {
            family_tag: repr.family_tag,
            polys: repr
                .polys
                .iter()
                .map(|p| Polynomial::from_terms(field, nvars, p))
                .collect::<Result<_, _>>()?,
            forms: repr
                .forms
                .iter()
                .map(|f| DiffForm::from_repr(field, nvars, f))
                .collect::<Result<_, _>>()?,
            notes: repr.notes.clone(),
        })
    }

    fn verified(self, g: &MatrixGroup) -> Result<Self, GensError> {
        for (i, w) in self.forms.iter().enumerate() {
            if !is_invariant(w, g, None) {
                return Err(GensError::NotInvariant(i));
            }
        }
        Ok(self)
    }
}

fn check_scale(what: &'static str, q: u64, exp: usize) -> Result<u64, GensError> {
    let size = (0..exp)
        .try_fold(1u64, |acc, _| acc.checked_mul(q))
        .unwrap_or(u64::MAX);
    if size > ENUMERATION_CAP {
        return Err(GensError::ScaleExceeded {
            what,
            size,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(size)
}

/// The vector with base-`q` digits of `index`, least significant first.
fn decode(index: u64, q: u64, n: usize) -> Vec<u32> {
    let mut v = Vec::with_capacity(n);
    let mut x = index;
    for _ in 0..n {
        v.push((x % q) as u32);
        x /= q;
    }
    v
}

fn encode(v: &[u32], q: u64) -> u64 {
    v.iter().rev().fold(0, |acc, &d| acc * q + d as u64)
}

/// Row-reduced bases of all `dim`-dimensional subspaces of `F^n`.
fn subspaces(field: &Field, n: usize, dim: usize) -> Vec<Vec<Vec<u32>>> {
    let q = field.order() as u64;
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = (0..dim).collect();
    loop {
        // free slots: (row, col) with col > pivot[row] and col not a pivot
        let free: Vec<(usize, usize)> = (0..dim)
            .flat_map(|r| {
                let pivots = &pivots;
                ((pivots[r] + 1)..n)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let count = q.pow(free.len() as u32);
        for fill in 0..count {
            let digits = decode(fill, q, free.len());
            let mut rows = vec![vec![0u32; n]; dim];
            for (r, &p) in pivots.iter().enumerate() {
                rows[r][p] = 1;
            }
            for (&(r, c), &d) in free.iter().zip(&digits) {
                rows[r][c] = d;
            }
            out.push(rows);
        }
        // next combination of pivot columns
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < n - dim + i {
                pivots[i] += 1;
                for j in i + 1..dim {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn span_codes(field: &Field, basis: &[Vec<u32>], n: usize) -> HashSet<u64> {
    let q = field.order() as u64;
    let dim = basis.len();
    (0..q.pow(dim as u32))
        .map(|c| {
            let coeffs = decode(c, q, dim);
            let mut v = vec![0u32; n];
            for (a, row) in coeffs.iter().zip(basis) {
                for (x, &r) in v.iter_mut().zip(row) {
                    *x = field.add(*x, field.mul(*a, r));
                }
            }
            encode(&v, q)
        })
        .collect()
}

fn product_of_vectors<I>(field: &Field, n: usize, vectors: I) -> Polynomial
where
    I: IntoIterator<Item = Vec<u32>>,
{
    vectors
        .into_iter()
        .fold(Polynomial::one(field, n), |acc, v| {
            &acc * &Polynomial::linear(field, &v)
        })
}

/// `d_{n,0}, .., d_{n,n-1}`, with `d_{n,i}` the sum over `i`-dimensional
/// `U <= V*` of the product of all `v in V* \ U`.
pub fn dickson_invariants(field: &Field, n: usize) -> Result<Vec<Polynomial>, GensError> {
    let q = field.order() as u64;
    let total = check_scale("dickson invariants", q, n)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut sum = Polynomial::zero(field, n);
        for basis in subspaces(field, n, i) {
            let inside = span_codes(field, &basis, n);
            let outside = (0..total)
                .filter(|c| !inside.contains(c))
                .map(|c| decode(c, q, n));
            sum = &sum + &product_of_vectors(field, n, outside);
        }
        out.push(sum);
    }
    Ok(out)
}

fn gl_order(q: u64, n: usize) -> u128 {
    let qn = (q as u128).pow(n as u32);
    (0..n).map(|i| qn - (q as u128).pow(i as u32)).product()
}

/// Order of the image of `det`.
fn det_image_order(g: &MatrixGroup) -> u32 {
    (0..g.order())
        .map(|i| g.det(i).mult_order().expect("unit") as u32)
        .max()
        .unwrap_or(1)
}

/// `omega_i = d(d_{n,i-1}) / prod_H l_H^(q-e-1)` for `SL_n <= G <= GL_n`.
pub fn slgl_forms(g: &MatrixGroup) -> Result<GeneratorFamily, GensError> {
    let f = g.field();
    let n = g.dim();
    let q = f.order() as u64;
    let e = det_image_order(g);
    let expected = gl_order(q, n) / (q as u128 - 1) * e as u128;
    if g.order() as u128 != expected {
        return Err(GensError::NotSLGLFamily(format!(
            "order {} but SL_n extended by a determinant image of order {e} has order {expected}",
            g.order()
        )));
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let mut t = Matrix::identity(n);
            t.set(i, j, 1);
            if !g.contains(&t) {
                return Err(GensError::NotSLGLFamily(format!(
                    "missing elementary transvection I + E_{}{}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let table = hyperplane_table(g);
    if let Some(h) = arrangement(&table).find(|h| h.e != e || h.b + 1 != n) {
        return Err(GensError::NotSLGLFamily(format!(
            "hyperplane {} has (e_H, b_H) = ({}, {})",
            h.form, h.e, h.b
        )));
    }
    let dickson = dickson_invariants(f, n)?;
    let exp = q as u32 - e - 1;
    let divisor = Polynomial::product(
        f,
        n,
        arrangement(&table)
            .map(|h| h.polynomial().pow(exp))
            .collect::<Vec<_>>()
            .iter(),
    );
    let mut forms = Vec::with_capacity(n);
    for (i, d) in dickson.iter().enumerate() {
        let w = exterior_derivative(d)
            .divide(&divisor)
            .map_err(|err| GensError::NotDivisible(format!("d(d_{{{n},{i}}}): {err}")))?;
        forms.push(w);
    }
    GeneratorFamily {
        family_tag: FamilyTag::DicksonGlsl,
        polys: dickson,
        forms,
        notes: format!(
            "omega_i = d(d_{{{n},i-1}}) / f, f = product of l_H^{exp} over {} hyperplanes, e = {e}",
            arrangement(&table).count()
        ),
    }
    .verified(g)
}

/// `f_k = prod_{a in F^(k-1)} (z_k + a_{k-1} z_{k-1} + .. + a_1 z_1)`.
pub fn unipotent_invariants(field: &Field, n: usize) -> Result<Vec<Polynomial>, GensError> {
    let q = field.order() as u64;
    check_scale("unipotent invariants", q, n.saturating_sub(1))?;
    Ok((0..n)
        .map(|k| {
            let factors = (0..q.pow(k as u32)).map(|c| {
                let mut v = decode(c, q, n);
                for x in v.iter_mut().skip(k) {
                    *x = 0;
                }
                v[k] = 1;
                v
            });
            product_of_vectors(field, n, factors)
        })
        .collect())
}

fn is_lower_unitriangular(m: &Matrix) -> bool {
    let n = m.rows();
    (0..n).all(|i| (i..n).all(|j| m.get(i, j) == u32::from(i == j)))
}

/// `omega_k = df_k / prod_{i<k} f_i^(q-2)` for the lower unitriangular group.
pub fn unipotent_forms(g: &MatrixGroup) -> Result<GeneratorFamily, GensError> {
    let f = g.field();
    let n = g.dim();
    let q = f.order() as u64;
    let expected = (q as u128).pow((n * (n - 1) / 2) as u32);
    if g.order() as u128 != expected {
        return Err(GensError::NotUnipotentStandard(format!(
            "order {} instead of {expected}",
            g.order()
        )));
    }
    if let Some(m) = g.elements().iter().find(|m| !is_lower_unitriangular(m)) {
        return Err(GensError::NotUnipotentStandard(format!(
            "element {} is not lower unitriangular",
            m.display(f)
        )));
    }
    let fs = unipotent_invariants(f, n)?;
    let mut forms = Vec::with_capacity(n);
    for k in 0..n {
        let divisor = Polynomial::product(
            f,
            n,
            fs[..k]
                .iter()
                .map(|fi| fi.pow(q as u32 - 2))
                .collect::<Vec<_>>()
                .iter(),
        );
        let w = exterior_derivative(&fs[k])
            .divide(&divisor)
            .map_err(|err| GensError::NotDivisible(format!("df_{}: {err}", k + 1)))?;
        forms.push(w);
    }
    GeneratorFamily {
        family_tag: FamilyTag::Unipotent,
        polys: fs,
        forms,
        notes: "omega_k = df_k / prod_{i<k} f_i^(q-2)".into(),
    }
    .verified(g)
}

/// Generators for a group whose reflecting hyperplanes reduce to a single `H`,
/// written in an adapted basis `y` (so `l_H = y_n`) and pulled back:
/// `y_n^e dy_j - y_j y_n^(e-1) dy_n` for `j <= b_H`, `dy_j` for `b_H < j < n`,
/// and `y_n^(e-1) dy_n`.
pub fn single_hyperplane_forms(g: &MatrixGroup) -> Result<GeneratorFamily, GensError> {
    let f = g.field();
    let n = g.dim();
    let table = hyperplane_table(g);
    let arr: Vec<_> = arrangement(&table).collect();
    if arr.len() != 1 {
        return Err(GensError::NotSingleHyperplane(arr.len()));
    }
    let h = arr[0];
    let (e, b) = (h.e, h.b);
    let basis = adapted_basis_of(h);
    let to_original = basis.inverse(f).expect("adapted basis is invertible");
    let y = |i: usize| Polynomial::var(f, n, i);
    let dy = |i: usize| DiffForm::dz(f, n, i);
    let last = n - 1;
    let mut forms = Vec::with_capacity(n);
    for j in 0..last {
        let w = if j < b {
            dy(j)
                .mul_poly(&y(last).pow(e))
                .try_sub(&dy(last).mul_poly(&(&y(j) * &y(last).pow(e - 1))))?
        } else {
            dy(j)
        };
        forms.push(w);
    }
    forms.push(dy(last).mul_poly(&y(last).pow(e - 1)));
    let forms = forms
        .iter()
        .map(|w| w.substitute_linear(&to_original))
        .collect();
    GeneratorFamily {
        family_tag: FamilyTag::SingleHyperplane,
        polys: vec![h.polynomial()],
        forms,
        notes: format!("hyperplane {} with e_H = {e}, b_H = {b}", h.form),
    }
    .verified(g)
}

/// Bound on `|U|` for the Chern polynomial expansion.
pub const CHERN_CAP: usize = 64;

/// Chern classes of the union `U` of the orbits of `z_1, .., z_n`: the
/// elementary symmetric polynomials `c_1, .., c_|U|` of `U`.
pub fn chern_classes(g: &MatrixGroup) -> Result<Vec<Polynomial>, GensError> {
    let f = g.field();
    let n = g.dim();
    let mut seen = HashSet::new();
    let mut union = Vec::new();
    for i in 0..n {
        let mut e = vec![0u32; n];
        e[i] = 1;
        for w in g.orbit_of_form(&e) {
            if seen.insert(w.clone()) {
                union.push(w);
            }
            if union.len() > CHERN_CAP {
                return Err(GensError::ScaleExceeded {
                    what: "chern orbit union",
                    size: union.len() as u64,
                    cap: CHERN_CAP as u64,
                });
            }
        }
    }
    let mut c = vec![Polynomial::one(f, n)];
    for u in &union {
        let lin = Polynomial::linear(f, u);
        let mut next = c.clone();
        next.push(Polynomial::zero(f, n));
        for k in 1..next.len() {
            next[k] = &next[k] + &(&lin * &c[k - 1]);
        }
        c = next;
    }
    c.remove(0);
    Ok(c)
}

/// Picks `n` Chern classes in increasing index order whose differentials
/// keep a nonzero running wedge.
pub fn chern_forms(g: &MatrixGroup) -> Result<GeneratorFamily, GensError> {
    let f = g.field();
    let n = g.dim();
    let classes = chern_classes(g)?;
    let mut running = DiffForm::from_polynomial(&Polynomial::one(f, n));
    let mut polys = Vec::new();
    let mut forms = Vec::new();
    let mut picked = Vec::new();
    for (i, c) in classes.iter().enumerate() {
        if forms.len() == n {
            break;
        }
        let dc = exterior_derivative(c);
        if dc.is_zero() {
            continue;
        }
        let next = running.wedge(&dc)?;
        if next.is_zero() {
            continue;
        }
        running = next;
        polys.push(c.clone());
        forms.push(dc);
        picked.push(i + 1);
    }
    if forms.len() < n {
        return Err(GensError::SelectionFailed {
            found: forms.len(),
            n,
        });
    }
    GeneratorFamily {
        family_tag: FamilyTag::Chern,
        polys,
        forms,
        notes: format!(
            "dc_i for i in {picked:?} out of {} Chern classes",
            classes.len()
        ),
    }
    .verified(g)
}
