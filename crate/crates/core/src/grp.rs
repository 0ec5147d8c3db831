//! Finite matrix groups: enumeration, reflections, hyperplane stabilizer data
//! and linear characters.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::ff::{Field, FieldElement};
use crate::linalg::Matrix;
use crate::mpoly::{LinearForm, Polynomial};

pub const DEFAULT_CAP: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group order exceeds the cap of {0} elements")]
    CapExceeded(usize),
    #[error("generator {0} is singular")]
    SingularGenerator(usize),
    #[error("generator {index} is not a {n}x{n} matrix")]
    DimensionMismatch { index: usize, n: usize },
    #[error("at least one generator is required")]
    NoGenerators,
    #[error("no reflecting hyperplane {0}")]
    NoSuchHyperplane(String),
    #[error("character values are inconsistent: {0}")]
    InconsistentCharacter(String),
    #[error("expected {expected} character values, got {got}")]
    WrongValueCount { expected: usize, got: usize },
}

/// A finite subgroup of `GL_n(F_q)` with all elements enumerated.
#[derive(Clone)]
pub struct MatrixGroup {
    field: Field,
    n: usize,
    generators: Vec<Matrix>,
    generator_inverses: Vec<Matrix>,
    elements: Vec<Matrix>,
    index: HashMap<Matrix, usize>,
    // BFS tree: element = generators[gen] * elements[parent]
    parent: Vec<Option<(usize, usize)>>,
}

impl MatrixGroup {
    /// Breadth-first closure of `{1}` under left multiplication by the generators.
    pub fn enumerate(
        field: &Field,
        generators: Vec<Matrix>,
        cap: usize,
    ) -> Result<Self, GroupError> {
        let n = match generators.first() {
            Some(g) => g.rows(),
            None => return Err(GroupError::NoGenerators),
        };
        let mut generator_inverses = Vec::with_capacity(generators.len());
        for (i, g) in generators.iter().enumerate() {
            if g.rows() != n || g.cols() != n {
                return Err(GroupError::DimensionMismatch { index: i, n });
            }
            generator_inverses.push(g.inverse(field).ok_or(GroupError::SingularGenerator(i))?);
        }
        let id = Matrix::identity(n);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::from([(id, 0usize)]);
        let mut parent = vec![None];
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (gi, g) in generators.iter().enumerate() {
                let y = g.mul(&elements[x], field);
                if index.contains_key(&y) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(GroupError::CapExceeded(cap));
                }
                index.insert(y.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(y);
                parent.push(Some((x, gi)));
            }
        }
        Ok(MatrixGroup {
            field: field.clone(),
            n,
            generators,
            generator_inverses,
            elements,
            index,
            parent,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn generator_inverses(&self) -> &[Matrix] {
        &self.generator_inverses
    }

    /// Elements in discovery order; index 0 is the identity.
    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn index_of(&self, m: &Matrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.index.contains_key(m)
    }

    pub fn det(&self, i: usize) -> FieldElement {
        self.field.wrap(self.elements[i].det(&self.field))
    }

    /// Orbit of a row vector (a linear form) under `w -> w g^{-1}`.
    pub(crate) fn orbit_of_form(&self, w: &[u32]) -> Vec<Vec<u32>> {
        let mut seen = vec![w.to_vec()];
        let mut set: std::collections::HashSet<Vec<u32>> = seen.iter().cloned().collect();
        let mut i = 0;
        while i < seen.len() {
            for ginv in &self.generator_inverses {
                let img = ginv.vec_mul(&seen[i], &self.field);
                if set.insert(img.clone()) {
                    seen.push(img);
                }
            }
            i += 1;
        }
        seen
    }

    /// Orbit of a hyperplane, given and returned as normalized linear forms.
    pub fn hyperplane_orbit(&self, l: &LinearForm) -> Vec<LinearForm> {
        let mut seen = vec![l.clone()];
        let mut i = 0;
        while i < seen.len() {
            for ginv in &self.generator_inverses {
                let img = ginv.vec_mul(seen[i].raw(), &self.field);
                let lf = LinearForm::from_raw(&self.field, &img).expect("invertible image");
                if !seen.contains(&lf) {
                    seen.push(lf);
                }
            }
            i += 1;
        }
        seen
    }

    /// Returns a group conjugated by `c`: generators `c g c^{-1}`.
    pub fn conjugate(&self, c: &Matrix, cap: usize) -> Result<MatrixGroup, GroupError> {
        let cinv = c
            .inverse(&self.field)
            .ok_or(GroupError::SingularGenerator(0))?;
        let gens = self
            .generators
            .iter()
            .map(|g| c.mul(g, &self.field).mul(&cinv, &self.field))
            .collect();
        MatrixGroup::enumerate(&self.field, gens, cap)
    }

    /// The subgroup generated by the listed elements.
    pub fn subgroup(&self, members: &[usize]) -> Result<MatrixGroup, GroupError> {
        let mut gens: Vec<Matrix> = members.iter().map(|&i| self.elements[i].clone()).collect();
        if gens.is_empty() {
            gens.push(Matrix::identity(self.n));
        }
        MatrixGroup::enumerate(&self.field, gens, self.order().max(1))
    }
}

impl std::fmt::Debug for MatrixGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "MatrixGroup(n={}, order={}, over {})",
            self.n,
            self.elements.len(),
            self.field
        )
    }
}

/// `g . f` for a polynomial under `(g f)(v) = f(g^{-1} v)`, given `g^{-1}`.
pub(crate) fn act_with_inverse(ginv: &Matrix, f: &Polynomial) -> Polynomial {
    f.linear_substitution(&ginv.row_vecs())
}

/// `g . f` for a polynomial under `(g f)(v) = f(g^{-1} v)`.
pub fn act_on_polynomial(g: &Matrix, f: &Polynomial) -> Option<Polynomial> {
    Some(act_with_inverse(&g.inverse(f.field())?, f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionKind {
    Diagonalizable,
    Transvection,
}

/// A reflection `s(v) = v + l_H(v) alpha` with `l_H` normalized.
#[derive(Debug, Clone)]
pub struct Reflection {
    pub element: usize,
    pub matrix: Matrix,
    pub hyperplane: LinearForm,
    root: Vec<u32>,
    pub kind: ReflectionKind,
    eigenvalue: Option<u32>,
}

impl Reflection {
    pub fn root(&self) -> Vec<FieldElement> {
        let f = self.hyperplane.field();
        self.root.iter().map(|&c| f.wrap(c)).collect()
    }

    #[cfg(test)]
    pub(crate) fn root_raw(&self) -> &[u32] {
        &self.root
    }

    /// Nontrivial eigenvalue `1 + l_H(alpha)`, diagonalizable reflections only.
    pub fn eigenvalue(&self) -> Option<FieldElement> {
        let f = self.hyperplane.field();
        self.eigenvalue.map(|v| f.wrap(v))
    }
}

/// Writes `g - I = alpha (x) l` with `l` normalized, if `g - I` has rank 1.
pub(crate) fn rank_one_decomposition(g: &Matrix, f: &Field) -> Option<(LinearForm, Vec<u32>)> {
    let n = g.rows();
    let m = g.sub(&Matrix::identity(n), f);
    let i0 = (0..n).find(|&i| m.row(i).iter().any(|&x| x != 0))?;
    let l = LinearForm::from_raw(f, m.row(i0))?;
    let pivot = l.pivot();
    let alpha: Vec<u32> = (0..n).map(|i| m.get(i, pivot)).collect();
    for (i, &a) in alpha.iter().enumerate() {
        for j in 0..n {
            if m.get(i, j) != f.mul(a, l.raw()[j]) {
                return None;
            }
        }
    }
    Some((l, alpha))
}

/// Every non-identity element whose fixed space is a hyperplane, in discovery order.
pub fn find_reflections(g: &MatrixGroup) -> Vec<Reflection> {
    let f = &g.field;
    g.elements
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(i, m)| {
            let (l, alpha) = rank_one_decomposition(m, f)?;
            let la = l.eval_raw(&alpha);
            let (kind, eigenvalue) = if la == 0 {
                (ReflectionKind::Transvection, None)
            } else {
                (ReflectionKind::Diagonalizable, Some(f.add(1, la)))
            };
            Some(Reflection {
                element: i,
                matrix: m.clone(),
                hyperplane: l,
                root: alpha,
                kind,
                eigenvalue,
            })
        })
        .collect()
}

/// Pointwise-stabilizer data for one hyperplane.
#[derive(Debug, Clone)]
pub struct HyperplaneData {
    pub form: LinearForm,
    /// `|G_H : K_H|`, the largest multiplicative order of `det` on `G_H`.
    pub e: u32,
    /// Dimension of the span of transvection roots in `G_H`.
    pub b: usize,
    /// A diagonalizable reflection of order `e`, or the identity.
    pub s: Matrix,
    pub orbit: usize,
    pub in_arrangement: bool,
    /// Element indices of `G_H` (identity included).
    pub stabilizer: Vec<usize>,
    /// Element indices of `K_H` (identity included).
    pub kernel: Vec<usize>,
    transvection_roots: Vec<Vec<u32>>,
    s_root: Option<Vec<u32>>,
}

impl HyperplaneData {
    pub fn polynomial(&self) -> Polynomial {
        self.form.to_polynomial()
    }
}

fn build_hyperplane(
    field: &Field,
    n: usize,
    form: LinearForm,
    refls: &[&Reflection],
) -> HyperplaneData {
    let mut e = 1u32;
    for r in refls {
        if let Some(lambda) = r.eigenvalue {
            e = e.max(field.order_of(lambda).expect("nonzero") as u32);
        }
    }
    let transvection_roots: Vec<Vec<u32>> = refls
        .iter()
        .filter(|r| r.kind == ReflectionKind::Transvection)
        .map(|r| r.root.clone())
        .collect();
    let b = if transvection_roots.is_empty() {
        0
    } else {
        Matrix::from_rows(&transvection_roots).rank(field)
    };
    let s_refl = refls.iter().find(|r| {
        r.eigenvalue
            .is_some_and(|lambda| field.order_of(lambda).expect("nonzero") as u32 == e)
    });
    let s = s_refl.map_or_else(|| Matrix::identity(n), |r| r.matrix.clone());
    let s_root = s_refl.map(|r| r.root.clone());
    let mut stabilizer = vec![0];
    stabilizer.extend(refls.iter().map(|r| r.element));
    let mut kernel = vec![0];
    kernel.extend(
        refls
            .iter()
            .filter(|r| r.kind == ReflectionKind::Transvection)
            .map(|r| r.element),
    );
    HyperplaneData {
        form,
        e,
        b,
        s,
        orbit: 0,
        in_arrangement: !refls.is_empty(),
        stabilizer,
        kernel,
        transvection_roots,
        s_root,
    }
}

/// One entry per reflecting hyperplane, sorted by normalized linear form.
pub fn hyperplane_table(g: &MatrixGroup) -> Vec<HyperplaneData> {
    hyperplane_table_with(g, &[])
}

/// As [`hyperplane_table`], additionally retaining the full orbits of the
/// `extra` hyperplanes (non-reflecting ones get `e = 1`, `b = 0`).
pub fn hyperplane_table_with(g: &MatrixGroup, extra: &[LinearForm]) -> Vec<HyperplaneData> {
    let refls = find_reflections(g);
    let mut by_form: BTreeMap<LinearForm, Vec<&Reflection>> = BTreeMap::new();
    for r in &refls {
        by_form.entry(r.hyperplane.clone()).or_default().push(r);
    }
    for l in extra {
        for img in g.hyperplane_orbit(l) {
            by_form.entry(img).or_default();
        }
    }
    let mut table: Vec<HyperplaneData> = by_form
        .into_iter()
        .map(|(form, rs)| build_hyperplane(&g.field, g.n, form, &rs))
        .collect();
    let position: HashMap<LinearForm, usize> = table
        .iter()
        .enumerate()
        .map(|(i, h)| (h.form.clone(), i))
        .collect();
    let mut orbit_of = vec![usize::MAX; table.len()];
    let mut next = 0;
    for i in 0..table.len() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        for img in g.hyperplane_orbit(&table[i].form) {
            if let Some(&j) = position.get(&img) {
                orbit_of[j] = next;
            }
        }
        next += 1;
    }
    for (h, o) in table.iter_mut().zip(orbit_of) {
        h.orbit = o;
    }
    table
}

/// Reflecting hyperplanes only.
pub fn arrangement(table: &[HyperplaneData]) -> impl Iterator<Item = &HyperplaneData> {
    table.iter().filter(|h| h.in_arrangement)
}

/// Basis `v_1..v_n` (as matrix columns) with `v_1..v_{n-1}` spanning `H`,
/// `v_1..v_b` transvection roots and `v_n` an `s_H`-eigenvector with `l_H(v_n) = 1`.
pub fn adapted_basis(table: &[HyperplaneData], form: &LinearForm) -> Result<Matrix, GroupError> {
    let h = table
        .iter()
        .find(|h| &h.form == form)
        .ok_or_else(|| GroupError::NoSuchHyperplane(form.to_string()))?;
    Ok(adapted_basis_of(h))
}

pub(crate) fn adapted_basis_of(h: &HyperplaneData) -> Matrix {
    let f = h.form.field();
    let n = h.form.nvars();
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(n);
    let push_if_independent = |cols: &mut Vec<Vec<u32>>, v: &[u32]| {
        let mut trial = cols.clone();
        trial.push(v.to_vec());
        if Matrix::from_rows(&trial).rank(f) == trial.len() {
            *cols = trial;
        }
    };
    for r in &h.transvection_roots {
        if cols.len() == h.b {
            break;
        }
        push_if_independent(&mut cols, r);
    }
    let pivot = h.form.pivot();
    for j in (0..n).filter(|&j| j != pivot) {
        if cols.len() == n - 1 {
            break;
        }
        // e_j - l_j e_pivot lies in ker l
        let mut v = vec![0u32; n];
        v[j] = 1;
        v[pivot] = f.neg(h.form.raw()[j]);
        push_if_independent(&mut cols, &v);
    }
    let last = match &h.s_root {
        Some(alpha) => {
            let inv = f
                .inv(h.form.eval_raw(alpha))
                .expect("diagonalizable root leaves H");
            alpha.iter().map(|&a| f.mul(a, inv)).collect()
        }
        None => {
            let mut v = vec![0u32; n];
            v[pivot] = 1;
            v
        }
    };
    cols.push(last);
    Matrix::from_rows(&cols).transpose()
}

/// A linear character, stored as its value on every element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    pub name: String,
    field: Field,
    values: Vec<u32>,
}

impl Character {
    pub fn value(&self, element: usize) -> FieldElement {
        self.field.wrap(self.values[element])
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&v| v == 1)
    }

    /// Pointwise product, named `"{a}*{b}"`.
    pub fn product(&self, other: &Character) -> Character {
        Character {
            name: format!("{}*{}", self.name, other.name),
            field: self.field.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| self.field.mul(a, b))
                .collect(),
        }
    }

    pub fn inverse(&self) -> Character {
        Character {
            name: format!("{}^-1", self.name),
            field: self.field.clone(),
            values: self
                .values
                .iter()
                .map(|&a| self.field.inv(a).expect("unit"))
                .collect(),
        }
    }

    /// Values on the generators, in generator order.
    pub fn generator_values(&self, g: &MatrixGroup) -> Vec<FieldElement> {
        g.generators
            .iter()
            .map(|m| self.value(g.index_of(m).expect("generator in group")))
            .collect()
    }
}

/// Extends per-generator values along the BFS tree and checks every Cayley
/// graph edge, which makes the result a homomorphism exactly.
pub fn character_extend(
    g: &MatrixGroup,
    name: &str,
    gen_values: &[FieldElement],
) -> Result<Character, GroupError> {
    if gen_values.len() != g.generators.len() {
        return Err(GroupError::WrongValueCount {
            expected: g.generators.len(),
            got: gen_values.len(),
        });
    }
    let f = &g.field;
    let mut raw = Vec::with_capacity(gen_values.len());
    for v in gen_values {
        if v.field() != f || v.is_zero() {
            return Err(GroupError::InconsistentCharacter(format!(
                "value {v} is not a unit of {f}"
            )));
        }
        raw.push(v.value());
    }
    let mut values = vec![1u32; g.order()];
    for (i, p) in g.parent.iter().enumerate() {
        if let Some((parent, gi)) = *p {
            values[i] = f.mul(raw[gi], values[parent]);
        }
    }
    for (x, m) in g.elements.iter().enumerate() {
        for (gi, gen) in g.generators.iter().enumerate() {
            let y = g.index[&gen.mul(m, f)];
            if values[y] != f.mul(raw[gi], values[x]) {
                return Err(GroupError::InconsistentCharacter(format!(
                    "generator {gi} value {} does not respect the group relations",
                    f.wrap(raw[gi])
                )));
            }
        }
    }
    Ok(Character {
        name: name.to_string(),
        field: f.clone(),
        values,
    })
}

pub fn trivial_character(g: &MatrixGroup) -> Character {
    Character {
        name: "trivial".into(),
        field: g.field.clone(),
        values: vec![1; g.order()],
    }
}

pub fn det_character(g: &MatrixGroup) -> Character {
    Character {
        name: "det".into(),
        field: g.field.clone(),
        values: g.elements.iter().map(|m| m.det(&g.field)).collect(),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::mpoly::tests::arb_poly;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn f3() -> Field {
        Field::prime(3).unwrap()
    }

    pub(crate) fn gl2_f3() -> MatrixGroup {
        let f = f3();
        let gens = vec![
            Matrix::from_ints(&f, &[&[1, 1], &[0, 1]]),
            Matrix::from_ints(&f, &[&[1, 0], &[1, 1]]),
            Matrix::from_ints(&f, &[&[1, 0], &[0, 2]]),
        ];
        MatrixGroup::enumerate(&f, gens, DEFAULT_CAP).unwrap()
    }

    pub(crate) fn u3_f3() -> MatrixGroup {
        let f = f3();
        let gens = vec![
            Matrix::from_ints(&f, &[&[1, 0, 0], &[1, 1, 0], &[0, 0, 1]]),
            Matrix::from_ints(&f, &[&[1, 0, 0], &[0, 1, 0], &[0, 1, 1]]),
        ];
        MatrixGroup::enumerate(&f, gens, DEFAULT_CAP).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        let f = f3();
        let id = MatrixGroup::enumerate(&f, vec![Matrix::identity(2)], DEFAULT_CAP).unwrap();
        assert_eq!(id.order(), 1);
        let u2 = MatrixGroup::enumerate(
            &f,
            vec![Matrix::from_ints(&f, &[&[1, 0], &[1, 1]])],
            DEFAULT_CAP,
        )
        .unwrap();
        assert_eq!(u2.order(), 3);
        // (q^2 - 1)(q^2 - q)
        assert_eq!(gl2_f3().order(), 8 * 6);
        assert_eq!(u3_f3().order(), 27);
        let sing = Matrix::from_ints(&f, &[&[1, 1], &[1, 1]]);
        assert_eq!(
            MatrixGroup::enumerate(&f, vec![sing], DEFAULT_CAP).unwrap_err(),
            GroupError::SingularGenerator(0)
        );
        assert_eq!(
            MatrixGroup::enumerate(
                &f,
                vec![Matrix::identity(2), Matrix::identity(3)],
                DEFAULT_CAP
            )
            .unwrap_err(),
            GroupError::DimensionMismatch { index: 1, n: 2 }
        );
        let gl = gl2_f3();
        assert_eq!(
            MatrixGroup::enumerate(&f, gl.generators().to_vec(), 10).unwrap_err(),
            GroupError::CapExceeded(10)
        );
    }

    #[test]
    fn closure_and_inverses() {
        let g = gl2_f3();
        let f = g.field().clone();
        for a in g.elements() {
            assert!(g.contains(&a.inverse(&f).unwrap()));
            for b in g.elements().iter().step_by(5) {
                assert!(g.contains(&a.mul(b, &f)));
            }
        }
    }

    #[test]
    fn reflections_of_small_groups() {
        let f = f3();
        let u2 = MatrixGroup::enumerate(
            &f,
            vec![Matrix::from_ints(&f, &[&[1, 0], &[1, 1]])],
            DEFAULT_CAP,
        )
        .unwrap();
        let r = find_reflections(&u2);
        assert_eq!(r.len(), 2);
        for x in &r {
            assert_eq!(x.kind, ReflectionKind::Transvection);
            assert_eq!(x.hyperplane.raw(), &[1, 0]);
        }
        let s = MatrixGroup::enumerate(
            &f,
            vec![Matrix::from_ints(&f, &[&[1, 0], &[0, 2]])],
            DEFAULT_CAP,
        )
        .unwrap();
        let r = find_reflections(&s);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].kind, ReflectionKind::Diagonalizable);
        assert_eq!(r[0].hyperplane.raw(), &[0, 1]);
        assert_eq!(r[0].eigenvalue().unwrap(), f.from_int(2));
    }

    #[test]
    fn gl2_reflection_counts_match_brute_force() {
        // Oracle: scan all 2x2 matrices over F_3 and count fixed vectors directly.
        let f = f3();
        let (mut trans, mut diag) = (0, 0);
        for code in 0..81u32 {
            let e: Vec<u32> = (0..4).map(|i| (code / 3u32.pow(i)) % 3).collect();
            let det = (e[0] * e[3] + 2 * e[1] * e[2]) % 3;
            if det == 0 || e == [1, 0, 0, 1] {
                continue;
            }
            let mut fixed = 0;
            for x in 0..3 {
                for y in 0..3 {
                    if (e[0] * x + e[1] * y) % 3 == x && (e[2] * x + e[3] * y) % 3 == y {
                        fixed += 1;
                    }
                }
            }
            if fixed == 3 {
                if det == 1 {
                    trans += 1;
                } else {
                    diag += 1;
                }
            }
        }
        let r = find_reflections(&gl2_f3());
        let t = r
            .iter()
            .filter(|x| x.kind == ReflectionKind::Transvection)
            .count();
        let d = r
            .iter()
            .filter(|x| x.kind == ReflectionKind::Diagonalizable)
            .count();
        assert_eq!((t, d), (trans, diag));
        assert_eq!(t, 8);
        let _ = f;
    }

    #[test]
    fn reflection_decomposition_invariants() {
        let g = gl2_f3();
        let f = g.field().clone();
        for r in find_reflections(&g) {
            // s(v) = v + l(v) alpha on every vector
            for x in 0..3 {
                for y in 0..3 {
                    let v = [x, y];
                    let sv = r.matrix.mul_vec(&v, &f);
                    let lv = r.hyperplane.eval_raw(&v);
                    let expect: Vec<u32> = v
                        .iter()
                        .zip(r.root_raw())
                        .map(|(&a, &b)| f.add(a, f.mul(lv, b)))
                        .collect();
                    assert_eq!(sv, expect);
                }
            }
            let is_t = r.kind == ReflectionKind::Transvection;
            assert_eq!(is_t, r.hyperplane.eval_raw(r.root_raw()) == 0);
            assert_eq!(is_t, r.matrix.det(&f) == 1);
        }
    }

    #[test]
    fn hyperplane_tables() {
        let table = hyperplane_table(&gl2_f3());
        assert_eq!(table.len(), 4);
        for h in &table {
            assert_eq!((h.e, h.b, h.orbit), (2, 1, 0));
            assert!(h.in_arrangement);
            assert_eq!(h.stabilizer.len(), 6);
        }

        let table = hyperplane_table(&u3_f3());
        let mut eb: Vec<(u32, usize)> = table.iter().map(|h| (h.e, h.b)).collect();
        eb.sort();
        assert_eq!(eb, vec![(1, 1), (1, 1), (1, 1), (1, 2)]);
        let z1 = table.iter().find(|h| h.b == 2).unwrap();
        assert_eq!(z1.form.raw(), &[1, 0, 0]);
        let orbits: std::collections::BTreeSet<usize> = table.iter().map(|h| h.orbit).collect();
        assert_eq!(orbits.len(), 2);

        let f = f3();
        let s = MatrixGroup::enumerate(
            &f,
            vec![Matrix::from_ints(&f, &[&[1, 0], &[0, 2]])],
            DEFAULT_CAP,
        )
        .unwrap();
        let table = hyperplane_table(&s);
        assert_eq!(table.len(), 1);
        assert_eq!((table[0].e, table[0].b), (2, 0));
    }

    #[test]
    fn extra_hyperplanes_join_as_orbits() {
        let g = u3_f3();
        let f = g.field().clone();
        let z3 = LinearForm::from_raw(&f, &[0, 0, 1]).unwrap();
        let table = hyperplane_table_with(&g, &[z3]);
        let extra: Vec<_> = table.iter().filter(|h| !h.in_arrangement).collect();
        assert_eq!(extra.len(), 9);
        assert!(extra
            .iter()
            .all(|h| h.e == 1 && h.b == 0 && h.s.is_identity()));
        let o = extra[0].orbit;
        assert!(extra.iter().all(|h| h.orbit == o));
    }

    fn check_lemma_orbits(table: &[HyperplaneData]) {
        for a in table {
            for b in table {
                if a.orbit == b.orbit {
                    assert_eq!((a.e, a.b), (b.e, b.b));
                }
            }
        }
    }

    #[test]
    fn orbit_data_is_constant() {
        check_lemma_orbits(&hyperplane_table(&gl2_f3()));
        check_lemma_orbits(&hyperplane_table(&u3_f3()));
    }

    fn check_adapted(table: &[HyperplaneData]) {
        for h in table {
            let f = h.form.field();
            let b = adapted_basis(table, &h.form).unwrap();
            let n = b.rows();
            assert!(b.inverse(f).is_some());
            for j in 0..n - 1 {
                assert_eq!(h.form.eval_raw(&b.column(j)), 0);
            }
            assert_eq!(h.form.eval_raw(&b.column(n - 1)), 1);
            let roots = Matrix::from_rows(&h.transvection_roots);
            for j in 0..h.b {
                let mut stacked = h.transvection_roots.clone();
                stacked.push(b.column(j));
                assert_eq!(Matrix::from_rows(&stacked).rank(f), roots.rank(f));
            }
            // s_H v_n is a multiple of v_n
            let vn = b.column(n - 1);
            let svn = h.s.mul_vec(&vn, f);
            assert_eq!(Matrix::from_rows(&[vn, svn]).rank(f), 1);
        }
    }

    #[test]
    fn adapted_bases() {
        let f = f3();
        let g = MatrixGroup::enumerate(
            &f,
            vec![
                Matrix::from_ints(&f, &[&[1, 0], &[0, 2]]),
                Matrix::from_ints(&f, &[&[1, 1], &[0, 1]]),
            ],
            DEFAULT_CAP,
        )
        .unwrap();
        assert_eq!(g.order(), 6);
        let table = hyperplane_table(&g);
        assert_eq!(table.len(), 1);
        assert_eq!((table[0].e, table[0].b), (2, 1));
        assert!(adapted_basis(&table, &table[0].form).unwrap().is_identity());

        let s = MatrixGroup::enumerate(
            &f,
            vec![Matrix::from_ints(&f, &[&[1, 0], &[0, 2]])],
            DEFAULT_CAP,
        )
        .unwrap();
        let table = hyperplane_table(&s);
        assert!(adapted_basis(&table, &table[0].form).unwrap().is_identity());
        let other = LinearForm::from_raw(&f, &[1, 0]).unwrap();
        assert!(matches!(
            adapted_basis(&table, &other),
            Err(GroupError::NoSuchHyperplane(_))
        ));

        check_adapted(&hyperplane_table(&gl2_f3()));
        check_adapted(&hyperplane_table(&u3_f3()));
    }

    #[test]
    fn root_rank_equals_codim_of_kernel_invariant_forms() {
        for g in [gl2_f3(), u3_f3()] {
            let f = g.field().clone();
            let n = g.dim();
            for h in hyperplane_table(&g) {
                // (V*)^{K_H}: rows w with w t^{-1} = w, i.e. (t^{-1} - I)^T w^T = 0
                let mut stacked = Vec::new();
                for &k in &h.kernel {
                    let tinv = g.elements()[k].inverse(&f).unwrap();
                    let d = tinv.sub(&Matrix::identity(n), &f).transpose();
                    stacked.extend(d.row_vecs());
                }
                let fixed_dim = n - Matrix::from_rows(&stacked).rank(&f);
                assert_eq!(h.b, n - fixed_dim);
            }
        }
    }

    #[test]
    fn reflections_are_conjugation_covariant() {
        let g = gl2_f3();
        let f = g.field().clone();
        let c = Matrix::from_ints(&f, &[&[2, 1], &[1, 1]]);
        let cinv = c.inverse(&f).unwrap();
        let conj = g.conjugate(&c, DEFAULT_CAP).unwrap();
        let mut lhs: Vec<Vec<u32>> = find_reflections(&conj)
            .iter()
            .map(|r| r.matrix.raw().to_vec())
            .collect();
        let mut rhs: Vec<Vec<u32>> = find_reflections(&g)
            .iter()
            .map(|r| c.mul(&r.matrix, &f).mul(&cinv, &f).raw().to_vec())
            .collect();
        lhs.sort();
        rhs.sort();
        assert_eq!(lhs, rhs);

        let u = u3_f3();
        let c3 = Matrix::from_ints(&f, &[&[1, 2, 0], &[0, 1, 1], &[1, 0, 2]]);
        let c3inv = c3.inverse(&f).unwrap();
        let conj = u.conjugate(&c3, DEFAULT_CAP).unwrap();
        let mut lhs: Vec<Vec<u32>> = find_reflections(&conj)
            .iter()
            .map(|r| r.matrix.raw().to_vec())
            .collect();
        let mut rhs: Vec<Vec<u32>> = find_reflections(&u)
            .iter()
            .map(|r| c3.mul(&r.matrix, &f).mul(&c3inv, &f).raw().to_vec())
            .collect();
        lhs.sort();
        rhs.sort();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn reflection_moves_polynomials_by_multiples_of_l() {
        use proptest::strategy::{Strategy, ValueTree};
        use proptest::test_runner::TestRunner;
        let mut runner = TestRunner::deterministic();
        for g in [gl2_f3(), u3_f3()] {
            let n = g.dim();
            let strat = arb_poly(3, n, 4, 6);
            for r in find_reflections(&g) {
                for _ in 0..30 {
                    let p = strat.new_tree(&mut runner).unwrap().current();
                    let moved = act_on_polynomial(&r.matrix, &p).unwrap();
                    let diff = &moved - &p;
                    assert!(diff
                        .exact_divide(&r.hyperplane.to_polynomial())
                        .unwrap()
                        .is_some());
                }
            }
        }
    }

    #[test]
    fn characters() {
        let g = gl2_f3();
        let f = g.field().clone();
        let triv = character_extend(&g, "one", &[f.one(), f.one(), f.one()]).unwrap();
        assert!(triv.is_trivial());
        let det_gens: Vec<FieldElement> =
            g.generators().iter().map(|m| f.wrap(m.det(&f))).collect();
        let chi = character_extend(&g, "det", &det_gens).unwrap();
        assert_eq!(
            chi,
            Character {
                name: "det".into(),
                ..det_character(&g)
            }
        );
        for i in 0..g.order() {
            assert_eq!(chi.value(i), g.det(i));
        }
        // a transvection has order 3, so it cannot map to -1
        let bad = character_extend(&g, "bad", &[f.from_int(2), f.one(), f.one()]);
        assert!(matches!(bad, Err(GroupError::InconsistentCharacter(_))));
        assert!(matches!(
            character_extend(&g, "short", &[f.one()]),
            Err(GroupError::WrongValueCount { .. })
        ));
        let d = det_character(&g);
        assert!(d.product(&d.inverse()).is_trivial());
    }

    #[test]
    fn random_conjugates_keep_hyperplane_counts() {
        let g = gl2_f3();
        let f = g.field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let c = loop {
                let m = Matrix::from_raw(2, 2, (0..4).map(|_| rng.gen_range(0..3)).collect());
                if m.det(&f) != 0 {
                    break m;
                }
            };
            let conj = g.conjugate(&c, DEFAULT_CAP).unwrap();
            assert_eq!(hyperplane_table(&conj).len(), 4);
        }
    }
}
