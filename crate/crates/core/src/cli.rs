//! Command-line front end: group files in, text or JSON reports out.
//!
//! Exit codes: 0 on success or a passed check, 1 when a check fails,
//! 2 on input errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arrgt::{build_arrangement_polys, q_chi, ArrangementReport};
use crate::crit::{
    check_chi_solomon, check_free_algebra, check_solomon, invariant_degree_space, verify_lemmas,
    CertificateReport, CritError, FreenessCertificate, DEFAULT_SEED,
};
use crate::extalg::{exterior_derivative, DiffForm, FormError, FormRepr};
use crate::ff::{Field, FieldError, FieldSpec};
use crate::gens::{
    chern_forms, dickson_invariants, single_hyperplane_forms, slgl_forms, unipotent_forms,
    FamilyRepr, FamilyTag, GeneratorFamily, GensError,
};
use crate::grp::{
    character_extend, det_character, find_reflections, hyperplane_table, trivial_character,
    Character, GroupError, MatrixGroup, ReflectionKind, DEFAULT_CAP,
};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Analyze,
    Dickson,
    UnipotentForms,
    HyperplaneForms,
    SlglForms,
    ChernForms,
    CheckCriterion,
    CheckChiCriterion,
    CheckFreeAlgebra,
    InvariantSpace,
    VerifyLemmas,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "invforms",
    version,
    about = "Invariant differential forms of finite matrix groups over F_q"
)]
pub struct RunConfig {
    /// Group file (JSON).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub command: Command,
    /// Character name: trivial, det, det^k, or one declared in the group file.
    #[arg(long)]
    pub chi: Option<String>,
    /// Forms file for the check-* commands.
    #[arg(long)]
    pub forms: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Maximum group order to enumerate.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub verbose: bool,
    /// Degree for invariant-space (all degrees up to 10 when omitted).
    #[arg(long)]
    pub degree: Option<u32>,
    /// Samples per lemma suite for verify-lemmas.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, command: Command) -> Self {
        RunConfig {
            input: input.into(),
            command,
            chi: None,
            forms: None,
            json: false,
            seed: DEFAULT_SEED,
            cap: DEFAULT_CAP,
            verbose: false,
            degree: None,
            samples: 50,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("missing required flag --{0}")]
    MissingFlag(&'static str),
    #[error("unknown character {0}")]
    UnknownCharacter(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Gens(#[from] GensError),
    #[error(transparent)]
    Crit(#[from] CritError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Gens(
                GensError::SelectionFailed { .. }
                | GensError::NotInvariant(_)
                | GensError::NotDivisible(_),
            ) => 1,
            _ => 2,
        }
    }
}

/// Exit status and captured output of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GeneratorEntry {
    Flat(Vec<i64>),
    Nested(Vec<Vec<i64>>),
}

/// On-disk group description.
#[derive(Debug, Clone, Deserialize)]
pub struct GroupFile {
    pub field: FieldSpec,
    pub n: usize,
    generators: Vec<GeneratorEntry>,
    #[serde(default)]
    pub characters: BTreeMap<String, Vec<u64>>,
}

/// A parsed group together with its declared characters.
pub struct LoadedGroup {
    pub group: MatrixGroup,
    pub characters: BTreeMap<String, Vec<u64>>,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.clone(),
        message: e.to_string(),
    })
}

pub fn parse_group(text: &str, cap: usize) -> Result<LoadedGroup, CliError> {
    let file: GroupFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let field = Field::from_spec(&file.field)?;
    let n = file.n;
    if n == 0 {
        return Err(CliError::Parse("n must be positive".into()));
    }
    let q = field.order() as i64;
    let mut gens = Vec::with_capacity(file.generators.len());
    for (i, g) in file.generators.iter().enumerate() {
        let flat: Vec<i64> = match g {
            GeneratorEntry::Flat(v) => v.clone(),
            GeneratorEntry::Nested(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Parse(format!("generator {i} is not {n}x{n}")));
                }
                rows.concat()
            }
        };
        if flat.len() != n * n {
            return Err(CliError::Parse(format!(
                "generator {i} has {} entries, expected {}",
                flat.len(),
                n * n
            )));
        }
        if let Some(bad) = flat.iter().find(|&&x| x < 0 || x >= q) {
            return Err(CliError::Parse(format!(
                "generator {i} entry {bad} is not an encoding in [0, {q})"
            )));
        }
        gens.push(Matrix::from_raw(
            n,
            n,
            flat.iter().map(|&x| x as u32).collect(),
        ));
    }
    let group = MatrixGroup::enumerate(&field, gens, cap)?;
    Ok(LoadedGroup {
        group,
        characters: file.characters,
    })
}

/// Resolves `trivial`, `det`, `det^k` (`k` may be negative) or a declared name.
pub fn resolve_character(loaded: &LoadedGroup, name: &str) -> Result<Character, CliError> {
    let g = &loaded.group;
    if let Some(values) = loaded.characters.get(name) {
        let f = g.field();
        let values = values
            .iter()
            .map(|&v| f.element(v))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(character_extend(g, name, &values)?);
    }
    match name {
        "trivial" | "1" => return Ok(trivial_character(g)),
        "det" => return Ok(det_character(g)),
        _ => {}
    }
    let k: i64 = name
        .strip_prefix("det^")
        .and_then(|k| k.trim_matches(|c| c == '(' || c == ')').parse().ok())
        .ok_or_else(|| CliError::UnknownCharacter(name.into()))?;
    let det = det_character(g);
    let base = if k < 0 { det.inverse() } else { det.clone() };
    let mut chi = trivial_character(g);
    for _ in 0..k.unsigned_abs() {
        chi = chi.product(&base);
    }
    chi.name = name.to_string();
    Ok(chi)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FormsFile {
    Family(FamilyRepr),
    Wrapped { forms: Vec<FormRepr> },
    List(Vec<FormRepr>),
}

pub fn parse_forms(text: &str, field: &Field, n: usize) -> Result<Vec<DiffForm>, CliError> {
    let file: FormsFile =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("forms file: {e}")))?;
    let reprs = match file {
        FormsFile::Family(f) => f.forms,
        FormsFile::Wrapped { forms } | FormsFile::List(forms) => forms,
    };
    Ok(reprs
        .iter()
        .map(|r| DiffForm::from_repr(field, n, r))
        .collect::<Result<_, _>>()?)
}

struct Report {
    code: i32,
    text: String,
    json: Value,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report {
            code: 0,
            text,
            json,
        }
    }
}

pub fn run(config: &RunConfig) -> Outcome {
    match execute(config) {
        Ok(r) => {
            let stdout = if config.json {
                serde_json::to_string_pretty(&r.json).expect("serializable") + "\n"
            } else {
                r.text
            };
            Outcome {
                code: r.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => {
            let stdout = if config.json {
                serde_json::to_string_pretty(&json!({ "error": e.to_string() }))
                    .expect("serializable")
                    + "\n"
            } else {
                String::new()
            };
            Outcome {
                code: e.exit_code(),
                stdout,
                stderr: format!("error: {e}\n"),
            }
        }
    }
}

fn execute(config: &RunConfig) -> Result<Report, CliError> {
    let loaded = parse_group(&read(&config.input)?, config.cap)?;
    let chi = config
        .chi
        .as_deref()
        .map(|name| resolve_character(&loaded, name))
        .transpose()?;
    let g = &loaded.group;
    match config.command {
        Command::Analyze => analyze(g, chi.as_ref(), config.verbose),
        Command::Dickson => {
            let polys = dickson_invariants(g.field(), g.dim())?;
            let forms = polys.iter().map(exterior_derivative).collect();
            let family = GeneratorFamily {
                family_tag: FamilyTag::DicksonGlsl,
                polys,
                forms,
                notes: format!(
                    "Dickson invariants d_{{{},i}} and their differentials",
                    g.dim()
                ),
            };
            Ok(family_report(&family, config.verbose))
        }
        Command::UnipotentForms => Ok(family_report(&unipotent_forms(g)?, config.verbose)),
        Command::HyperplaneForms => Ok(family_report(&single_hyperplane_forms(g)?, config.verbose)),
        Command::SlglForms => Ok(family_report(&slgl_forms(g)?, config.verbose)),
        Command::ChernForms => Ok(family_report(&chern_forms(g)?, config.verbose)),
        Command::CheckCriterion => {
            let forms = load_forms(config, g)?;
            Ok(certificate_report(
                "check-criterion",
                &check_solomon(g, &forms)?,
                config.verbose,
            ))
        }
        Command::CheckChiCriterion => {
            let chi = chi.ok_or(CliError::MissingFlag("chi"))?;
            let forms = load_forms(config, g)?;
            Ok(certificate_report(
                "check-chi-criterion",
                &check_chi_solomon(g, &chi, &forms)?,
                config.verbose,
            ))
        }
        Command::CheckFreeAlgebra => {
            let forms = load_forms(config, g)?;
            let r = check_free_algebra(g, &forms)?;
            let mut text = String::new();
            let mark = |b: bool| if b { "yes" } else { "no" };
            let _ = writeln!(text, "maximal root spaces: {}", mark(r.maximal));
            if let Some(d) = &r.maximality_diagnostic {
                let _ = writeln!(text, "  {d}");
            }
            let _ = writeln!(text, "delta^(n-1) = c Q(A~): {}", mark(r.delta_identity));
            let _ = writeln!(
                text,
                "module criterion: {}",
                if r.solomon.passed { "passed" } else { "failed" }
            );
            for t in &r.twisted {
                let _ = writeln!(
                    text,
                    "  twisted product {:?}: divisible {}, invariant {}",
                    t.indices,
                    mark(t.divisible),
                    mark(t.invariant)
                );
            }
            let _ = writeln!(
                text,
                "check-free-algebra: {}",
                if r.passed { "PASSED" } else { "FAILED" }
            );
            let mut json = serde_json::to_value(&r).expect("serializable");
            json["check"] = json!("check-free-algebra");
            Ok(Report {
                code: if r.passed { 0 } else { 1 },
                text,
                json,
            })
        }
        Command::InvariantSpace => {
            let degrees: Vec<u32> = match config.degree {
                Some(d) => vec![d],
                None => (0..=10).collect(),
            };
            let name = chi
                .as_ref()
                .map_or("trivial", |c| c.name.as_str())
                .to_string();
            let mut text = String::new();
            let mut rows = Vec::new();
            for d in degrees {
                let space = invariant_degree_space(g, d, chi.as_ref())?;
                let _ = writeln!(text, "degree {d}: dimension {}", space.dim());
                if config.verbose {
                    for p in &space.basis {
                        let _ = writeln!(text, "  {p}");
                    }
                }
                rows.push(json!({
                    "degree": d,
                    "dimension": space.dim(),
                    "basis": space.basis.iter().map(|p| p.to_terms()).collect::<Vec<_>>(),
                }));
            }
            Ok(Report::ok(
                text,
                json!({ "character": name, "spaces": rows }),
            ))
        }
        Command::VerifyLemmas => {
            let reports = verify_lemmas(g, config.samples, config.seed)?;
            let mut text = String::new();
            let mut all = true;
            for r in &reports {
                all &= r.passed();
                let _ = writeln!(
                    text,
                    "lemma {}: {} ({} checks over {} samples, seed {})",
                    r.lemma,
                    if r.passed() { "ok" } else { "COUNTEREXAMPLE" },
                    r.checks,
                    r.samples,
                    r.seed
                );
                if let Some(note) = &r.note {
                    let _ = writeln!(text, "  {note}");
                }
                for c in &r.counterexamples {
                    let _ = writeln!(text, "  {c}");
                }
            }
            let json = json!({ "seed": config.seed, "passed": all, "lemmas": reports });
            Ok(Report {
                code: if all { 0 } else { 1 },
                text,
                json,
            })
        }
    }
}

fn load_forms(config: &RunConfig, g: &MatrixGroup) -> Result<Vec<DiffForm>, CliError> {
    let path = config
        .forms
        .as_ref()
        .ok_or(CliError::MissingFlag("forms"))?;
    parse_forms(&read(path)?, g.field(), g.dim())
}

#[derive(Serialize)]
struct AnalyzeJson {
    field: FieldSpec,
    n: usize,
    order: usize,
    transvections: usize,
    diagonalizable_reflections: usize,
    orbits: usize,
    #[serde(flatten)]
    arrangement: ArrangementReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    character: Option<Value>,
}

fn analyze(g: &MatrixGroup, chi: Option<&Character>, verbose: bool) -> Result<Report, CliError> {
    let refls = find_reflections(g);
    let transvections = refls
        .iter()
        .filter(|r| r.kind == ReflectionKind::Transvection)
        .count();
    let table = hyperplane_table(g);
    let polys = build_arrangement_polys(&table, g);
    let arrangement = ArrangementReport::new(&table, &polys);
    let orbits = arrangement
        .hyperplanes
        .iter()
        .map(|h| h.orbit)
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let mut text = String::new();
    let _ = writeln!(
        text,
        "group of order {} in GL_{}({})",
        g.order(),
        g.dim(),
        g.field()
    );
    let _ = writeln!(
        text,
        "reflections: {} transvections, {} diagonalizable",
        transvections,
        refls.len() - transvections
    );
    let _ = writeln!(
        text,
        "{} reflecting hyperplanes, {} orbit(s)",
        arrangement.hyperplanes.len(),
        orbits
    );
    let _ = writeln!(
        text,
        "  {:<24} {:>4} {:>4} {:>6}",
        "l_H", "e_H", "b_H", "orbit"
    );
    for h in table.iter().filter(|h| h.in_arrangement) {
        let _ = writeln!(
            text,
            "  {:<24} {:>4} {:>4} {:>6}",
            h.form.to_string(),
            h.e,
            h.b,
            h.orbit
        );
    }
    let d = &arrangement.degrees;
    let _ = writeln!(
        text,
        "deg Q_det = {}, deg Q(A~) = {}, deg delta = {}",
        d.q_det, d.q_tilde, d.delta
    );
    if verbose {
        let _ = writeln!(text, "Q_det = {}", polys.q_det);
        let _ = writeln!(text, "Q(A~) = {}", polys.q_tilde);
        let _ = writeln!(text, "delta = {}", polys.delta_max);
    }
    let character = match chi {
        None => None,
        Some(chi) => {
            let c = q_chi(g, &table, chi).map_err(CritError::from)?;
            let exps: Vec<u32> = c.exponents.iter().map(|(_, a)| *a).collect();
            let _ = writeln!(
                text,
                "character {}: a_H = {:?}, deg Q_chi = {}, deg Q(A~_chi) = {}",
                chi.name,
                exps,
                c.q_chi.degree().unwrap_or(0),
                c.q_tilde_chi.degree().unwrap_or(0)
            );
            Some(json!({
                "name": chi.name,
                "a_H": exps,
                "q_chi": c.q_chi.degree().unwrap_or(0),
                "q_tilde_chi": c.q_tilde_chi.degree().unwrap_or(0),
            }))
        }
    };
    let json = serde_json::to_value(AnalyzeJson {
        field: g.field().spec().clone(),
        n: g.dim(),
        order: g.order(),
        transvections,
        diagonalizable_reflections: refls.len() - transvections,
        orbits,
        arrangement,
        character,
    })
    .expect("serializable");
    Ok(Report::ok(text, json))
}

fn family_report(family: &GeneratorFamily, verbose: bool) -> Report {
    let mut text = String::new();
    let _ = writeln!(
        text,
        "family {}: {}",
        family.family_tag.as_str(),
        family.notes
    );
    for (i, p) in family.polys.iter().enumerate() {
        let _ = writeln!(
            text,
            "  polynomial {} of degree {}",
            i + 1,
            p.degree().unwrap_or(0)
        );
        if verbose {
            let _ = writeln!(text, "    {p}");
        }
    }
    for (i, w) in family.forms.iter().enumerate() {
        let _ = writeln!(
            text,
            "  form {} with coefficient degree {}",
            i + 1,
            w.coefficient_degree().unwrap_or(0)
        );
        if verbose {
            let _ = writeln!(text, "    {w}");
        }
    }
    Report::ok(
        text,
        serde_json::to_value(family.to_repr()).expect("serializable"),
    )
}

fn certificate_report(check: &str, cert: &FreenessCertificate, verbose: bool) -> Report {
    let r: CertificateReport = cert.report(check, None);
    let mut text = String::new();
    if r.passed {
        let _ = writeln!(
            text,
            "{check}: PASSED (scalar {}, target degree {})",
            cert.scalar
                .as_ref()
                .map(ToString::to_string)
                .unwrap_or_default(),
            r.target_degree
        );
    } else {
        let _ = writeln!(
            text,
            "{check}: FAILED (target degree {}): {}",
            r.target_degree,
            r.diagnostic.as_deref().unwrap_or("")
        );
    }
    if verbose {
        let _ = writeln!(text, "  wedge = {}", cert.wedge);
        let _ = writeln!(text, "  target = {}", cert.target);
    }
    Report {
        code: if r.passed { 0 } else { 1 },
        text,
        json: serde_json::to_value(&r).expect("serializable"),
    }
}
