//! Freeness criteria and the oracles behind them.
//!
//! A passed [`FreenessCertificate`] certifies the wedge identity
//! `w_1 ^ .. ^ w_n = c * target * vol` with `c != 0`; freeness of the
//! module of invariant 1-forms then follows from the corresponding theorem.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrgt::{build_arrangement_polys, q_chi, ArrangementError, ArrangementPolys};
use crate::extalg::{DiffForm, FormError, IndexSet};
use crate::ff::{Field, FieldElement};
use crate::gens::{chern_forms, GensError};
use crate::grp::{
    act_with_inverse, adapted_basis_of, arrangement, det_character, find_reflections,
    hyperplane_table, Character, GroupError, HyperplaneData, MatrixGroup,
};
use crate::linalg::Matrix;
use crate::mpoly::{Monomial, PolyError, Polynomial};

pub const DEFAULT_SEED: u64 = 0x5eed_1e55;
pub const MAX_SPACE_DIM: usize = 3;
pub const MAX_SPACE_DEGREE: u32 = 20;
pub const MAX_SPACE_UNKNOWNS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CritError {
    #[error("expected {expected} forms, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("form {0} is not a 1-form in the right ambient space")]
    NotOneForm(usize),
    #[error("form {0} is not invariant")]
    InputNotInvariant(usize),
    #[error("form {index} is not {character}-invariant")]
    InputNotChiInvariant { index: usize, character: String },
    #[error("{what} = {size} exceeds the cap of {cap}")]
    ScaleExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Gens(#[from] GensError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Objects carrying the linear action of a matrix group.
pub trait Actable: Sized + PartialEq {
    /// `g . self`, given `g^{-1}`.
    fn act_inverse(&self, ginv: &Matrix) -> Self;
    fn scaled(&self, c: &FieldElement) -> Self;
}

impl Actable for Polynomial {
    fn act_inverse(&self, ginv: &Matrix) -> Self {
        act_with_inverse(ginv, self)
    }

    fn scaled(&self, c: &FieldElement) -> Self {
        self.scale(c)
    }
}

impl Actable for DiffForm {
    fn act_inverse(&self, ginv: &Matrix) -> Self {
        self.substitute_linear(ginv)
    }

    fn scaled(&self, c: &FieldElement) -> Self {
        self.scale(c)
    }
}

/// `g . x = chi(g) x` for every generator `g` (trivial `chi` when `None`).
pub fn is_invariant<T: Actable>(x: &T, g: &MatrixGroup, chi: Option<&Character>) -> bool {
    g.generators()
        .iter()
        .zip(g.generator_inverses())
        .all(|(m, minv)| {
            let image = x.act_inverse(minv);
            match chi {
                None => image == *x,
                Some(chi) => {
                    let v = chi.value(g.index_of(m).expect("generator in group"));
                    if v.is_one() {
                        image == *x
                    } else {
                        image == x.scaled(&v)
                    }
                }
            }
        })
}

/// Exponent vectors of all monomials of degree `d` in `n` variables, grlex descending.
pub fn monomials(n: usize, d: u32) -> Vec<Monomial> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(Monomial::new(prefix));
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Basis of the degree-`d` (`chi`-)invariant polynomials, in reduced echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSpace {
    pub degree: u32,
    pub basis: Vec<Polynomial>,
}

impl DegreeSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn space_caps(n: usize, d: u32, unknowns: usize) -> Result<(), CritError> {
    if n > MAX_SPACE_DIM {
        return Err(CritError::ScaleExceeded {
            what: "dimension",
            size: n,
            cap: MAX_SPACE_DIM,
        });
    }
    if d > MAX_SPACE_DEGREE {
        return Err(CritError::ScaleExceeded {
            what: "degree",
            size: d as usize,
            cap: MAX_SPACE_DEGREE as usize,
        });
    }
    if unknowns > MAX_SPACE_UNKNOWNS {
        return Err(CritError::ScaleExceeded {
            what: "unknowns",
            size: unknowns,
            cap: MAX_SPACE_UNKNOWNS,
        });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-forms with homogeneous coefficients of degree `d` satisfying
/// `g w = chi(g) w`, as a reduced echelon basis over `{m dz_I}`.
pub fn invariant_form_space(
    g: &MatrixGroup,
    k: usize,
    d: u32,
    chi: Option<&Character>,
) -> Result<Vec<DiffForm>, CritError> {
    let f = g.field();
    let n = g.dim();
    if k > n {
        return Ok(Vec::new());
    }
    let sets = IndexSet::all_of_size(n, k);
    let unknowns = sets.len() * binomial(n + d as usize - 1, d as usize);
    space_caps(n, d, unknowns)?;
    let mons = monomials(n, d);
    let mut basis = Vec::with_capacity(unknowns);
    let mut position = HashMap::with_capacity(unknowns);
    for &set in &sets {
        for m in &mons {
            position.insert((set, m.clone()), basis.len());
            let coeff = Polynomial::monomial(f, m.clone(), &f.one());
            basis.push(DiffForm::basis(&coeff, &set.indices())?);
        }
    }
    let size = basis.len();
    let gens = g.generators().len();
    let mut system = Matrix::zeros(gens * size, size);
    for (gi, (m, minv)) in g
        .generators()
        .iter()
        .zip(g.generator_inverses())
        .enumerate()
    {
        let c = chi.map_or_else(
            || f.one(),
            |chi| chi.value(g.index_of(m).expect("generator")),
        );
        for (col, b) in basis.iter().enumerate() {
            let image = b.act_inverse(minv).try_sub(&b.scale(&c))?;
            for (set, u) in image.terms() {
                for (mono, coeff) in u.terms() {
                    let row = position[&(set, mono.clone())];
                    system.set(gi * size + row, col, coeff.value());
                }
            }
        }
    }
    let kernel = system.kernel(f);
    if kernel.is_empty() {
        return Ok(Vec::new());
    }
    let (reduced, pivots) = Matrix::from_rows(&kernel).rref(f);
    Ok((0..pivots.len())
        .map(|r| {
            basis
                .iter()
                .enumerate()
                .fold(DiffForm::zero(f, n, k), |acc, (j, b)| {
                    match reduced.get(r, j) {
                        0 => acc,
                        c => acc.try_add(&b.scale(&f.wrap(c))).expect("same space"),
                    }
                })
        })
        .collect())
}

/// Degree-`d` (`chi`-)invariant polynomials.
pub fn invariant_degree_space(
    g: &MatrixGroup,
    d: u32,
    chi: Option<&Character>,
) -> Result<DegreeSpace, CritError> {
    let forms = invariant_form_space(g, 0, d, chi)?;
    Ok(DegreeSpace {
        degree: d,
        basis: forms
            .iter()
            .map(|w| w.coefficient(IndexSet::EMPTY))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreenessCertificate {
    pub passed: bool,
    pub wedge: DiffForm,
    pub target: Polynomial,
    pub scalar: Option<FieldElement>,
    pub diagnostic: Option<String>,
}

/// JSON summary of a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub check: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar: Option<u32>,
    pub target_degree: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FreenessCertificate {
    fn compare(wedge: DiffForm, target: Polynomial) -> Result<Self, CritError> {
        let w = wedge.top_coefficient();
        let (scalar, diagnostic) = if w.is_zero() {
            (None, Some("wedge product is zero".to_string()))
        } else {
            match w.scalar_multiple_of(&target)? {
                Some(c) => (Some(c), None),
                None => {
                    let (dw, dt) = (w.degree().unwrap_or(0), target.degree().unwrap_or(0));
                    let msg = if dw != dt {
                        let extra = match w.exact_divide(&target)? {
                            Some(_) => "target divides the wedge",
                            None => "target does not divide the wedge",
                        };
                        format!("degree mismatch: wedge coefficient has degree {dw}, target has degree {dt}; {extra}")
                    } else {
                        format!("wedge coefficient of degree {dw} is not a scalar multiple of the target")
                    };
                    (None, Some(msg))
                }
            }
        };
        Ok(FreenessCertificate {
            passed: scalar.is_some(),
            wedge,
            target,
            scalar,
            diagnostic,
        })
    }

    pub fn target_degree(&self) -> u32 {
        self.target.degree().unwrap_or(0)
    }

    pub fn report(&self, check: &str, seed: Option<u64>) -> CertificateReport {
        CertificateReport {
            check: check.to_string(),
            passed: self.passed,
            scalar: self.scalar.as_ref().map(FieldElement::value),
            target_degree: self.target_degree(),
            diagnostic: self.diagnostic.clone(),
            seed,
        }
    }
}

fn check_shape(g: &MatrixGroup, forms: &[DiffForm]) -> Result<(), CritError> {
    if forms.len() != g.dim() {
        return Err(CritError::WrongCount {
            expected: g.dim(),
            got: forms.len(),
        });
    }
    for (i, w) in forms.iter().enumerate() {
        if w.degree() != 1 || w.nvars() != g.dim() || w.field() != g.field() {
            return Err(CritError::NotOneForm(i));
        }
    }
    Ok(())
}

fn wedge_of(g: &MatrixGroup, forms: &[DiffForm]) -> Result<DiffForm, CritError> {
    let refs: Vec<&DiffForm> = forms.iter().collect();
    Ok(DiffForm::wedge_all(g.field(), g.dim(), &refs)?)
}

/// Tests `w_1 ^ .. ^ w_n = c Q(A~) Q_det vol`.
pub fn check_solomon(
    g: &MatrixGroup,
    forms: &[DiffForm],
) -> Result<FreenessCertificate, CritError> {
    check_shape(g, forms)?;
    if let Some(i) = forms.iter().position(|w| !is_invariant(w, g, None)) {
        return Err(CritError::InputNotInvariant(i));
    }
    let table = hyperplane_table(g);
    let polys = build_arrangement_polys(&table, g);
    FreenessCertificate::compare(wedge_of(g, forms)?, polys.solomon_target())
}

/// `Q(A~_chi) Q_chi^(n-1) Q_{chi det}`.
pub fn chi_target(
    g: &MatrixGroup,
    table: &[HyperplaneData],
    chi: &Character,
) -> Result<Polynomial, CritError> {
    let c = q_chi(g, table, chi)?;
    let cd = q_chi(g, table, &chi.product(&det_character(g)))?;
    Ok(&(&c.q_tilde_chi * &c.q_chi.pow(g.dim() as u32 - 1)) * &cd.q_chi)
}

/// Tests `w_1 ^ .. ^ w_n = c Q(A~_chi) Q_chi^(n-1) Q_{chi det} vol` for `chi`-invariant forms.
pub fn check_chi_solomon(
    g: &MatrixGroup,
    chi: &Character,
    forms: &[DiffForm],
) -> Result<FreenessCertificate, CritError> {
    check_shape(g, forms)?;
    if let Some(index) = forms.iter().position(|w| !is_invariant(w, g, Some(chi))) {
        return Err(CritError::InputNotChiInvariant {
            index,
            character: chi.name.clone(),
        });
    }
    let table = hyperplane_table(g);
    FreenessCertificate::compare(wedge_of(g, forms)?, chi_target(g, &table, chi)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistedProduct {
    /// 1-based indices.
    pub indices: Vec<usize>,
    pub divisible: bool,
    pub invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeAlgebraReport {
    pub maximal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maximality_diagnostic: Option<String>,
    pub delta_identity: bool,
    pub solomon: CertificateReport,
    pub twisted: Vec<TwistedProduct>,
    pub passed: bool,
}

/// Checks every verifiable hypothesis of the free exterior algebra statement:
/// maximal root spaces, `delta^(n-1) = c Q(A~)`, the module criterion and the
/// twisted products `(w_{i_1} ^ .. ^ w_{i_k}) / delta^(k-1)`.
pub fn check_free_algebra(
    g: &MatrixGroup,
    forms: &[DiffForm],
) -> Result<FreeAlgebraReport, CritError> {
    let n = g.dim();
    let cert = check_solomon(g, forms)?;
    let table = hyperplane_table(g);
    let polys = build_arrangement_polys(&table, g);
    let bad: Vec<String> = arrangement(&table)
        .filter(|h| h.b + 1 != n)
        .map(|h| format!("{} has b_H = {}", h.form, h.b))
        .collect();
    let maximal = bad.is_empty();
    let maximality_diagnostic = (!maximal).then(|| {
        format!(
            "transvection root spaces are not maximal ({}); the theorem does not apply",
            bad.join(", ")
        )
    });
    let delta_identity = polys
        .delta_max
        .pow(n as u32 - 1)
        .scalar_multiple_of(&polys.q_tilde)?
        .is_some();
    let mut twisted = Vec::new();
    for k in 1..=n {
        let divisor = polys.delta_max.pow(k as u32 - 1);
        for set in IndexSet::all_of_size(n, k) {
            let factors: Vec<&DiffForm> = set.iter().map(|i| &forms[i]).collect();
            let w = DiffForm::wedge_all(g.field(), n, &factors)?;
            let (divisible, invariant) = match w.divide(&divisor) {
                Ok(q) => (true, is_invariant(&q, g, None)),
                Err(FormError::NotDivisible { .. }) => (false, false),
                Err(e) => return Err(e.into()),
            };
            twisted.push(TwistedProduct {
                indices: set.iter().map(|i| i + 1).collect(),
                divisible,
                invariant,
            });
        }
    }
    let passed = maximal
        && delta_identity
        && cert.passed
        && twisted.iter().all(|t| t.divisible && t.invariant);
    Ok(FreeAlgebraReport {
        maximal,
        maximality_diagnostic,
        delta_identity,
        solomon: cert.report("check-criterion", None),
        twisted,
        passed,
    })
}

/// Outcome of one stanley-type comparison at a fixed degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanleyRow {
    pub degree: u32,
    pub chi_dim: usize,
    pub shifted_dim: usize,
    pub all_divisible: bool,
}

/// Compares `dim F[V]^G_{chi,d}` with `dim F[V]^G_{d - deg Q_chi}` and checks
/// that every `chi`-invariant basis element is divisible by `Q_chi`.
pub fn stanley_rows(
    g: &MatrixGroup,
    chi: &Character,
    max_degree: u32,
) -> Result<Vec<StanleyRow>, CritError> {
    let table = hyperplane_table(g);
    let qc = q_chi(g, &table, chi)?.q_chi;
    let shift = qc.degree().unwrap_or(0);
    let mut rows = Vec::new();
    for d in 0..=max_degree {
        let space = invariant_degree_space(g, d, Some(chi))?;
        let shifted_dim = if d >= shift {
            invariant_degree_space(g, d - shift, None)?.dim()
        } else {
            0
        };
        let mut all_divisible = true;
        for p in &space.basis {
            all_divisible &= p.exact_divide(&qc)?.is_some();
        }
        rows.push(StanleyRow {
            degree: d,
            chi_dim: space.dim(),
            shifted_dim,
            all_divisible,
        });
    }
    Ok(rows)
}

/// Result of a seeded property run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub samples: usize,
    pub checks: usize,
    pub seed: u64,
    pub counterexamples: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LemmaReport {
    fn new(lemma: &str, samples: usize, seed: u64) -> Self {
        LemmaReport {
            lemma: lemma.into(),
            samples,
            checks: 0,
            seed,
            counterexamples: Vec::new(),
            note: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.counterexamples.push(describe());
        }
    }
}

fn random_element(f: &Field, rng: &mut ChaCha8Rng) -> FieldElement {
    f.wrap(rng.gen_range(0..f.order()))
}

fn random_polynomial(
    f: &Field,
    n: usize,
    max_deg: u32,
    max_terms: usize,
    rng: &mut ChaCha8Rng,
) -> Polynomial {
    let terms = rng.gen_range(1..=max_terms);
    let mut p = Polynomial::zero(f, n);
    for _ in 0..terms {
        let exps: Vec<u32> = (0..n)
            .map(|_| rng.gen_range(0..=max_deg / n as u32 + 1))
            .collect();
        let c = random_element(f, rng);
        p = &p + &Polynomial::monomial(f, Monomial::new(&exps), &c);
    }
    p
}

fn random_combination(
    f: &Field,
    n: usize,
    k: usize,
    basis: &[DiffForm],
    rng: &mut ChaCha8Rng,
) -> DiffForm {
    basis.iter().fold(DiffForm::zero(f, n, k), |acc, b| {
        acc.try_add(&b.scale(&random_element(f, rng)))
            .expect("same space")
    })
}

/// `s f - f` is divisible by `l_H` for every reflection `s` about `H`.
pub fn verify_delta_lemma(g: &MatrixGroup, samples: usize, seed: u64) -> LemmaReport {
    let f = g.field();
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaReport::new("delta", samples, seed);
    let refls: Vec<_> = find_reflections(g)
        .into_iter()
        .map(|r| {
            let inv = r.matrix.inverse(f).expect("invertible");
            (r, inv)
        })
        .collect();
    for _ in 0..samples {
        let p = random_polynomial(f, n, 5, 6, &mut rng);
        for (r, inv) in &refls {
            let diff = &act_with_inverse(inv, &p) - &p;
            let ok = diff
                .exact_divide(&r.hyperplane.to_polynomial())
                .expect("compatible")
                .is_some();
            report.record(ok, || format!("s = {}, f = {p}", r.matrix.display(f)));
        }
    }
    report
}

/// The group generated by `B^{-1} m B` for the listed elements.
fn in_adapted_coordinates(
    g: &MatrixGroup,
    members: &[usize],
    b: &Matrix,
) -> Result<MatrixGroup, GroupError> {
    let f = g.field();
    let binv = b.inverse(f).expect("basis");
    let mut gens: Vec<Matrix> = members
        .iter()
        .map(|&i| binv.mul(&g.elements()[i], f).mul(b, f))
        .collect();
    if gens.is_empty() {
        gens.push(Matrix::identity(g.dim()));
    }
    MatrixGroup::enumerate(f, gens, g.order().max(1))
}

/// In an adapted basis, coefficients `u_J` with `J` meeting `{1..b_H}` and
/// `n` not in `J` are divisible by `l_H` for `K_H`-invariant forms and by
/// `l_H^(e_H)` for `G_H`-invariant forms.
pub fn verify_divisions_lemma(
    g: &MatrixGroup,
    samples: usize,
    seed: u64,
) -> Result<Vec<LemmaReport>, CritError> {
    let f = g.field();
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut part1 = LemmaReport::new("divisions (1)", samples, seed);
    let mut part2 = LemmaReport::new("divisions (2)", samples, seed);
    let table = hyperplane_table(g);
    let hyperplanes: Vec<&HyperplaneData> = arrangement(&table).filter(|h| h.b > 0).collect();
    if hyperplanes.is_empty() || n < 2 {
        let note = Some("no hyperplane with transvections; nothing to check".to_string());
        part1.note = note.clone();
        part2.note = note;
        return Ok(vec![part1, part2]);
    }
    let mut spaces: HashMap<(usize, bool, usize, u32), Vec<DiffForm>> = HashMap::new();
    let mut groups = Vec::new();
    for h in &hyperplanes {
        let b = adapted_basis_of(h);
        groups.push((
            in_adapted_coordinates(g, &h.kernel, &b)?,
            in_adapted_coordinates(g, &h.stabilizer, &b)?,
        ));
    }
    let yn = Polynomial::var(f, n, n - 1);
    for _ in 0..samples {
        for full in [false, true] {
            // redraw until the sample has a coefficient the statement constrains
            for _ in 0..32 {
                let hi = rng.gen_range(0..hyperplanes.len());
                let h = hyperplanes[hi];
                let k = rng.gen_range(1..n);
                let d = rng.gen_range(0..=4u32);
                let key = (hi, full, k, d);
                if let std::collections::hash_map::Entry::Vacant(slot) = spaces.entry(key) {
                    let grp = if full { &groups[hi].1 } else { &groups[hi].0 };
                    slot.insert(invariant_form_space(grp, k, d, None)?);
                }
                let mu = random_combination(f, n, k, &spaces[&key], &mut rng);
                let constrained: Vec<(IndexSet, &Polynomial)> = mu
                    .terms()
                    .filter(|(set, _)| !set.contains(n - 1) && set.iter().any(|i| i < h.b))
                    .collect();
                if constrained.is_empty() {
                    continue;
                }
                let divisor = if full { yn.pow(h.e) } else { yn.clone() };
                let report = if full { &mut part2 } else { &mut part1 };
                for (set, u) in constrained {
                    let ok = u.exact_divide(&divisor)?.is_some();
                    report.record(ok, || format!("H = {}, J = {:?}, u_J = {u}", h.form, set));
                }
                break;
            }
        }
    }
    Ok(vec![part1, part2])
}

/// Invariant 1-forms with coefficient degree up to `max_degree`, grouped by degree.
struct OneFormPool {
    by_degree: Vec<Vec<DiffForm>>,
    chern: Vec<DiffForm>,
    small_invariants: Vec<Polynomial>,
}

impl OneFormPool {
    fn new(g: &MatrixGroup) -> Result<Self, CritError> {
        let chern = chern_forms(g)?.forms;
        let top = chern
            .iter()
            .filter_map(DiffForm::coefficient_degree)
            .max()
            .unwrap_or(0)
            + 1;
        let mut by_degree = Vec::new();
        for d in 0..=top.min(MAX_SPACE_DEGREE) {
            match invariant_form_space(g, 1, d, None) {
                Ok(space) => by_degree.push(space),
                Err(CritError::ScaleExceeded { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        let mut small_invariants = Vec::new();
        for d in 0..=3 {
            small_invariants.extend(invariant_degree_space(g, d, None)?.basis);
        }
        Ok(OneFormPool {
            by_degree,
            chern,
            small_invariants,
        })
    }

    /// Zero with probability 1/10; otherwise a random element of one graded
    /// piece plus a random invariant multiple of a Chern form.
    fn sample(&self, g: &MatrixGroup, rng: &mut ChaCha8Rng) -> DiffForm {
        let f = g.field();
        let n = g.dim();
        let mut w = DiffForm::zero(f, n, 1);
        if rng.gen_range(0..10) == 0 {
            return w;
        }
        let nonempty: Vec<&Vec<DiffForm>> =
            self.by_degree.iter().filter(|s| !s.is_empty()).collect();
        if !nonempty.is_empty() {
            let space = nonempty[rng.gen_range(0..nonempty.len())];
            w = random_combination(f, n, 1, space, rng);
        }
        let omega = &self.chern[rng.gen_range(0..self.chern.len())];
        let h = &self.small_invariants[rng.gen_range(0..self.small_invariants.len())];
        w.try_add(&omega.mul_poly(h).scale(&random_element(f, rng)))
            .expect("same space")
    }
}

/// Whether the reflections of `g` generate `g`.
pub fn is_reflection_group(g: &MatrixGroup) -> bool {
    let members: Vec<usize> = find_reflections(g).iter().map(|r| r.element).collect();
    g.subgroup(&members)
        .map(|s| s.order() == g.order())
        .unwrap_or(false)
}

/// n-fold wedges of random invariant 1-forms are divisible by `Q(A~) Q_det`
/// (reflection groups), and pairwise wedges by `delta`.
pub fn verify_divides_lemma(
    g: &MatrixGroup,
    samples: usize,
    seed: u64,
) -> Result<Vec<LemmaReport>, CritError> {
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = hyperplane_table(g);
    let polys: ArrangementPolys = build_arrangement_polys(&table, g);
    let pool = OneFormPool::new(g)?;
    let mut divides = LemmaReport::new("divides", samples, seed);
    let mut wedge = LemmaReport::new("wedge", samples, seed);
    let reflection_group = is_reflection_group(g);
    if !reflection_group {
        divides.note = Some("not generated by reflections; the statement does not apply".into());
    }
    let target = polys.solomon_target();
    for _ in 0..samples {
        let forms: Vec<DiffForm> = (0..n).map(|_| pool.sample(g, &mut rng)).collect();
        if reflection_group {
            let top = wedge_of(g, &forms)?.top_coefficient();
            let ok = top.exact_divide(&target)?.is_some();
            divides.record(ok, || format!("forms {forms:?}"));
        }
        if n >= 2 {
            let (mu, nu) = (pool.sample(g, &mut rng), pool.sample(g, &mut rng));
            let w = mu.wedge(&nu)?;
            let ok = w.divide(&polys.delta_max).is_ok();
            wedge.record(ok, || format!("mu = {mu}, nu = {nu}"));
        }
    }
    Ok(vec![divides, wedge])
}

/// `e_H` and `b_H` are constant on hyperplane orbits, for `g` and for
/// `samples` random conjugates of it.
pub fn verify_orbits_lemma(
    g: &MatrixGroup,
    samples: usize,
    seed: u64,
) -> Result<LemmaReport, CritError> {
    let f = g.field();
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaReport::new("orbits", samples, seed);
    let check = |grp: &MatrixGroup, report: &mut LemmaReport| {
        let table = hyperplane_table(grp);
        let mut seen: HashMap<usize, (u32, usize)> = HashMap::new();
        for h in arrangement(&table) {
            let first = *seen.entry(h.orbit).or_insert((h.e, h.b));
            report.record(first == (h.e, h.b), || {
                format!(
                    "hyperplane {} has (e_H, b_H) = ({}, {}), orbit has {:?}",
                    h.form, h.e, h.b, first
                )
            });
        }
    };
    check(g, &mut report);
    for _ in 0..samples {
        let c = loop {
            let raw: Vec<u32> = (0..n * n).map(|_| rng.gen_range(0..f.order())).collect();
            let c = Matrix::from_raw(n, n, raw);
            if c.det(f) != 0 {
                break c;
            }
        };
        let conj = g.conjugate(&c, g.order().max(1))?;
        check(&conj, &mut report);
    }
    Ok(report)
}

/// Rank over the fraction field by fraction-free elimination.
pub fn polynomial_matrix_rank(rows: &[Vec<Polynomial>]) -> Result<usize, CritError> {
    let mut m: Vec<Vec<Polynomial>> = rows.to_vec();
    let nrows = m.len();
    let Some(ncols) = m.first().map(Vec::len) else {
        return Ok(0);
    };
    let field = m[0].first().map(|p| p.field().clone());
    let Some(field) = field else {
        return Ok(0);
    };
    let nvars = m[0][0].nvars();
    let mut prev = Polynomial::one(&field, nvars);
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let num = &(&m[rank][col] * &m[r][c]) - &(&m[r][col] * &m[rank][c]);
                m[r][c] = num.exact_divide(&prev)?.ok_or(PolyError::DivisorZero)?;
            }
            m[r][col] = Polynomial::zero(&field, nvars);
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    Ok(rank)
}

/// Any `n + 1` invariant 1-forms are dependent over the fraction field: the
/// coefficient matrix has rank at most `n`, the maximal minors `M_j` satisfy
/// `sum_j (-1)^j M_j w_j = 0`, and each `M_j` is `det`-semi-invariant.
pub fn verify_rank_bound(
    g: &MatrixGroup,
    samples: usize,
    seed: u64,
) -> Result<LemmaReport, CritError> {
    let f = g.field();
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = OneFormPool::new(g)?;
    let det = det_character(g);
    let mut report = LemmaReport::new("rank", samples, seed);
    for _ in 0..samples {
        let forms: Vec<DiffForm> = (0..=n).map(|_| pool.sample(g, &mut rng)).collect();
        let rows: Vec<Vec<Polynomial>> = forms
            .iter()
            .map(|w| (0..n).map(|i| w.component(i)).collect())
            .collect();
        let rank = polynomial_matrix_rank(&rows)?;
        report.record(rank <= n, || format!("rank {rank} > {n} for {forms:?}"));
        let mut relation = DiffForm::zero(f, n, 1);
        for j in 0..=n {
            let others: Vec<DiffForm> = forms
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, w)| w.clone())
                .collect();
            let minor = wedge_of(g, &others)?.top_coefficient();
            report.record(is_invariant(&minor, g, Some(&det)), || {
                format!("minor {j} is not det-invariant: {minor}")
            });
            let term = forms[j].mul_poly(&minor);
            relation = if j % 2 == 0 {
                relation.try_add(&term)?
            } else {
                relation.try_sub(&term)?
            };
        }
        report.record(relation.is_zero(), || {
            format!("dependency relation fails: {relation}")
        });
    }
    Ok(report)
}

/// All lemma suites with a shared seed.
pub fn verify_lemmas(
    g: &MatrixGroup,
    samples: usize,
    seed: u64,
) -> Result<Vec<LemmaReport>, CritError> {
    let mut out = vec![verify_delta_lemma(g, samples, seed)];
    out.extend(verify_divisions_lemma(g, samples, seed)?);
    out.extend(verify_divides_lemma(g, samples, seed)?);
    out.push(verify_orbits_lemma(g, samples, seed)?);
    out.push(verify_rank_bound(g, samples.min(10), seed)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrgt::for_group;
    use crate::extalg::exterior_derivative;
    use crate::gens::{dickson_invariants, single_hyperplane_forms, slgl_forms, unipotent_forms};
    use crate::grp::tests::{f3, gl2_f3, u3_f3};
    use crate::grp::{trivial_character, DEFAULT_CAP};

    fn group(field: &Field, gens: &[&[&[i64]]]) -> MatrixGroup {
        let gens = gens.iter().map(|m| Matrix::from_ints(field, m)).collect();
        MatrixGroup::enumerate(field, gens, DEFAULT_CAP).unwrap()
    }

    fn sl2_f3() -> MatrixGroup {
        group(&f3(), &[&[&[1, 1], &[0, 1]], &[&[1, 0], &[1, 1]]])
    }

    fn u2_f3() -> MatrixGroup {
        group(&f3(), &[&[&[1, 0], &[1, 1]]])
    }

    #[test]
    fn invariance_examples() {
        let g = gl2_f3();
        let (_, polys) = for_group(&g);
        assert!(is_invariant(&polys.q_det, &g, Some(&det_character(&g))));
        assert!(!is_invariant(&polys.q_det, &g, None));
        let u2 = u2_f3();
        assert!(!is_invariant(&DiffForm::dz(&f3(), 2, 1), &u2, None));
        assert!(is_invariant(&DiffForm::dz(&f3(), 2, 0), &u2, None));
        let sl = sl2_f3();
        assert!(is_invariant(&DiffForm::volume(&f3(), 2), &sl, None));
        assert!(is_invariant(
            &DiffForm::volume(&f3(), 2),
            &g,
            Some(&det_character(&g).inverse())
        ));
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(2, 3).len(), 4);
        assert_eq!(monomials(3, 4).len(), 15);
        assert_eq!(monomials(3, 0), vec![Monomial::one(3)]);
    }

    #[test]
    fn degree_space_examples() {
        let f = f3();
        let trivial = group(&f, &[&[&[1, 0], &[0, 1]]]);
        assert_eq!(invariant_degree_space(&trivial, 2, None).unwrap().dim(), 3);
        let u2 = u2_f3();
        let s = invariant_degree_space(&u2, 1, None).unwrap();
        assert_eq!(s.basis, vec![Polynomial::var(&f, 2, 0)]);
        let g = gl2_f3();
        let (_, polys) = for_group(&g);
        let s = invariant_degree_space(&g, 4, Some(&det_character(&g))).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.basis[0]
            .scalar_multiple_of(&polys.q_det)
            .unwrap()
            .is_some());
        for p in invariant_degree_space(&g, 8, None).unwrap().basis {
            assert!(is_invariant(&p, &g, None));
        }
    }

    #[test]
    fn space_caps_enforced() {
        let g = gl2_f3();
        assert!(matches!(
            invariant_degree_space(&g, 21, None),
            Err(CritError::ScaleExceeded { .. })
        ));
    }

    #[test]
    fn solomon_examples() {
        let g = gl2_f3();
        let forms: Vec<DiffForm> = dickson_invariants(&f3(), 2)
            .unwrap()
            .iter()
            .map(exterior_derivative)
            .collect();
        let cert = check_solomon(&g, &forms).unwrap();
        assert!(cert.passed);
        assert_eq!(cert.target_degree(), 12);

        let u3 = u3_f3();
        let cert = check_solomon(&u3, &unipotent_forms(&u3).unwrap().forms).unwrap();
        assert!(cert.passed);
        assert_eq!(cert.target_degree(), 5);

        let sl = sl2_f3();
        let cert = check_solomon(&sl, &forms).unwrap();
        assert!(!cert.passed);
        assert!(cert
            .diagnostic
            .unwrap()
            .contains("degree mismatch: wedge coefficient has degree 12, target has degree 4"));

        assert_eq!(
            check_solomon(&g, &forms[..1]),
            Err(CritError::WrongCount {
                expected: 2,
                got: 1
            })
        );
        let not_inv = vec![DiffForm::dz(&f3(), 2, 0), forms[1].clone()];
        assert_eq!(
            check_solomon(&g, &not_inv),
            Err(CritError::InputNotInvariant(0))
        );
    }

    #[test]
    fn chi_solomon_specializes() {
        for (g, forms) in [
            (gl2_f3(), slgl_forms(&gl2_f3()).unwrap().forms),
            (sl2_f3(), slgl_forms(&sl2_f3()).unwrap().forms),
            (u3_f3(), unipotent_forms(&u3_f3()).unwrap().forms),
        ] {
            let a = check_solomon(&g, &forms).unwrap();
            let b = check_chi_solomon(&g, &trivial_character(&g), &forms).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.report("x", None), b.report("x", None));
        }
    }

    #[test]
    fn chi_solomon_twisted_basis() {
        let g = gl2_f3();
        let chi = det_character(&g).inverse();
        let table = hyperplane_table(&g);
        let qc = q_chi(&g, &table, &chi).unwrap().q_chi;
        let forms: Vec<DiffForm> = slgl_forms(&g)
            .unwrap()
            .forms
            .iter()
            .map(|w| w.mul_poly(&qc))
            .collect();
        let cert = check_chi_solomon(&g, &chi, &forms).unwrap();
        // target Q_chi^(n-1) Q_{chi det} = Q_chi; the wedge carries Q_chi^2 Q(A~) Q_det
        assert_eq!(cert.target_degree(), 4);
        assert!(!cert.passed);
        let wrong = check_chi_solomon(&g, &chi, &forms[..1]);
        assert_eq!(
            wrong,
            Err(CritError::WrongCount {
                expected: 2,
                got: 1
            })
        );
        let err = check_chi_solomon(&g, &chi, &slgl_forms(&g).unwrap().forms).unwrap_err();
        assert!(matches!(
            err,
            CritError::InputNotChiInvariant { index: 0, .. }
        ));
    }

    #[test]
    fn chi_solomon_passes_on_a_chi_basis() {
        // det^-1-invariant 1-forms of degree 1 over GL_2(F_3) and the next one up
        let g = gl2_f3();
        let chi = det_character(&g).inverse();
        let mut found = Vec::new();
        for d in 0..8 {
            for w in invariant_form_space(&g, 1, d, Some(&chi)).unwrap() {
                if found.len() < 2 {
                    let mut trial = found.clone();
                    trial.push(w);
                    let refs: Vec<&DiffForm> = trial.iter().collect();
                    if trial.len() < 2 || !DiffForm::wedge_all(&f3(), 2, &refs).unwrap().is_zero() {
                        found = trial;
                    }
                }
            }
        }
        let cert = check_chi_solomon(&g, &chi, &found).unwrap();
        assert!(cert.passed, "{:?}", cert.diagnostic);
    }

    #[test]
    fn free_algebra_reports() {
        let g = gl2_f3();
        let forms = slgl_forms(&g).unwrap().forms;
        let r = check_free_algebra(&g, &forms).unwrap();
        assert!(r.maximal && r.delta_identity && r.solomon.passed && r.passed);
        assert_eq!(r.twisted.len(), 3);

        let sl = sl2_f3();
        let r = check_free_algebra(&sl, &slgl_forms(&sl).unwrap().forms).unwrap();
        assert!(r.passed);

        let f = f3();
        let g3 = group(&f, &[&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 1]]]);
        let forms = vec![
            DiffForm::dz(&f, 3, 0),
            DiffForm::dz(&f, 3, 1).mul_poly(&Polynomial::var(&f, 3, 1)),
            DiffForm::dz(&f, 3, 2),
        ];
        let r = check_free_algebra(&g3, &forms).unwrap();
        assert!(!r.maximal);
        assert!(r.maximality_diagnostic.unwrap().contains("does not apply"));
        assert!(!r.passed);
    }

    #[test]
    fn single_hyperplane_certificate() {
        let f = f3();
        let g = group(&f, &[&[&[1, 1], &[0, 1]], &[&[1, 0], &[0, 2]]]);
        let cert = check_solomon(&g, &single_hyperplane_forms(&g).unwrap().forms).unwrap();
        assert!(cert.passed);
        assert_eq!(cert.target_degree(), 3);
    }

    #[test]
    fn stanley_on_gl2() {
        let g = gl2_f3();
        let det = det_character(&g);
        for chi in [trivial_character(&g), det.clone(), det.inverse()] {
            for row in stanley_rows(&g, &chi, 10).unwrap() {
                assert_eq!(
                    row.chi_dim, row.shifted_dim,
                    "{} at degree {}",
                    chi.name, row.degree
                );
                assert!(row.all_divisible);
            }
        }
    }

    #[test]
    fn bareiss_rank() {
        let f = f3();
        let x = Polynomial::var(&f, 2, 0);
        let y = Polynomial::var(&f, 2, 1);
        let one = Polynomial::one(&f, 2);
        let zero = Polynomial::zero(&f, 2);
        assert_eq!(
            polynomial_matrix_rank(&[vec![x.clone(), y.clone()], vec![&x * &x, &x * &y]]).unwrap(),
            1
        );
        assert_eq!(
            polynomial_matrix_rank(&[vec![x.clone(), y.clone()], vec![y.clone(), x.clone()]])
                .unwrap(),
            2
        );
        let m = vec![
            vec![zero.clone(), x.clone(), y.clone()],
            vec![zero.clone(), y.clone(), x.clone()],
            vec![one.clone(), zero.clone(), one.clone()],
        ];
        assert_eq!(polynomial_matrix_rank(&m).unwrap(), 3);
    }

    #[test]
    fn lemma_suites_on_gl2_and_u3() {
        for g in [gl2_f3(), u3_f3()] {
            for r in verify_lemmas(&g, 12, DEFAULT_SEED).unwrap() {
                assert!(r.passed(), "{}: {:?}", r.lemma, r.counterexamples);
            }
        }
    }

    #[test]
    fn lemma_runs_are_reproducible() {
        let g = gl2_f3();
        let a = verify_divides_lemma(&g, 5, 7).unwrap();
        let b = verify_divides_lemma(&g, 5, 7).unwrap();
        assert_eq!(a, b);
        assert!(a[0].checks == 5);
    }
}
