//! TOML schemas for group, cocycle, bundle and triple inputs, and their
//! conversion into `deform_core` values.
//!
//! Every angle is measured in turns (units of 2π). Text angles such as
//! `"1/3"` are exact rationals, so roots of unity come out exact.

use std::path::{Path, PathBuf};

use deform_core::cocycle::{heisenberg_bicharacter, phase_from_turns, random_real_coboundary, random_u1_coboundary};
use deform_core::linalg::phase;
use deform_core::spectral::{ancilla_triple, EquivariantTriple, ProjectionRule};
use deform_core::{BilinearCocycle, CMat, FellBundle, FiniteGroup, FreeAbelianGroup, TwoCocycleReal, TwoCocycleU1, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

const TAU: f64 = std::f64::consts::TAU;
const MAX_BUILTIN_ORDER: usize = 128;

/// Either a reference (`"builtin:NAME"` or a path) or an inline table.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Reference(String),
    Inline(T),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Number(f64),
    Text(String),
}

/// A fraction of a full turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Turns {
    Exact(i64, i64),
    Float(f64),
}

impl Angle {
    pub fn turns(&self) -> Result<Turns, String> {
        match self {
            Angle::Number(x) if x.is_finite() => Ok(Turns::Float(*x)),
            Angle::Number(x) => Err(format!("angle {x} is not finite")),
            Angle::Text(s) => parse_turns(s),
        }
    }
}

fn parse_turns(s: &str) -> Result<Turns, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in angle {s:?}"))?;
        let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in angle {s:?}"))?;
        if q == 0 {
            return Err(format!("zero denominator in angle {s:?}"));
        }
        return Ok(Turns::Exact(p, q));
    }
    if let Ok(p) = s.parse::<i64>() {
        return Ok(Turns::Exact(p, 1));
    }
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(Turns::Float)
        .ok_or_else(|| format!("cannot parse angle {s:?}"))
}

impl Turns {
    pub fn radians(self) -> f64 {
        match self {
            Turns::Exact(p, q) => TAU * p as f64 / q as f64,
            Turns::Float(x) => TAU * x,
        }
    }

    pub fn phase(self) -> C64 {
        match self {
            Turns::Exact(p, q) => phase_from_turns(p, q).expect("denominator checked at parse time"),
            Turns::Float(x) => phase(TAU * x),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ElemRef {
    Index(usize),
    Label(String),
}

impl ElemRef {
    pub fn resolve(&self, group: &FiniteGroup) -> Result<usize, String> {
        match self {
            ElemRef::Index(i) if *i < group.order() => Ok(*i),
            ElemRef::Index(i) => Err(format!("element index {i} out of range for a group of order {}", group.order())),
            ElemRef::Label(l) => group.find_label(l).ok_or_else(|| format!("no element labelled {l:?}")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixSpec {
    pub fn to_matrix(&self) -> Result<CMat, String> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || self.re.iter().any(|r| r.len() != cols) {
            return Err("matrix rows must be nonempty and of equal length".into());
        }
        if let Some(im) = &self.im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err("imaginary part has a different shape".into());
            }
        }
        Ok(CMat::from_fn(rows, cols, |i, j| {
            C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |m| m[i][j]))
        }))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub builtin: Option<String>,
    pub order: Option<usize>,
    pub cayley: Option<Vec<Vec<usize>>>,
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub enum GroupKind {
    Finite(FiniteGroup),
    Free(FreeAbelianGroup),
}

impl GroupKind {
    pub fn finite(&self) -> Option<&FiniteGroup> {
        match self {
            GroupKind::Finite(g) => Some(g),
            GroupKind::Free(_) => None,
        }
    }
}

fn parse_size(s: &str, name: &str) -> Result<usize, String> {
    s.parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("unknown builtin group {name:?}"))
}

/// `trivial`, `z<n>`, `z<a>xz<b>[x...]`, `s<n>`, `d<n>`, `q8`, `z^<n>`.
pub fn builtin_group(name: &str) -> Result<GroupKind, String> {
    let lower = name.to_ascii_lowercase();
    let group = match lower.as_str() {
        "trivial" => FiniteGroup::trivial(),
        "q8" => FiniteGroup::quaternion(),
        s if s.starts_with("z^") => return Ok(GroupKind::Free(FreeAbelianGroup::new(parse_size(&s[2..], name)?))),
        s if s.contains('x') => {
            let mut factors = s.split('x').map(|f| match f.strip_prefix('z') {
                Some(n) => parse_size(n, name).map(FiniteGroup::cyclic),
                None => Err(format!("unknown builtin group {name:?}")),
            });
            let first = factors.next().expect("split yields one item")?;
            factors.try_fold(first, |acc, f| f.map(|f| acc.direct_product(&f)))?
        }
        s if s.starts_with('z') => FiniteGroup::cyclic(parse_size(&s[1..], name)?),
        s if s.starts_with('s') => {
            let n = parse_size(&s[1..], name)?;
            if n > 5 {
                return Err(format!("builtin symmetric groups stop at s5, got {name:?}"));
            }
            FiniteGroup::symmetric(n)
        }
        s if s.starts_with('d') => FiniteGroup::dihedral(parse_size(&s[1..], name)?),
        _ => return Err(format!("unknown builtin group {name:?}")),
    };
    if group.order() > MAX_BUILTIN_ORDER {
        return Err(format!("builtin group {name:?} has order {} > {MAX_BUILTIN_ORDER}", group.order()));
    }
    Ok(GroupKind::Finite(group))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    pub group: Option<String>,
    pub kind: Option<String>,
    pub turns: Option<Vec<Vec<Angle>>>,
    pub re: Option<Vec<Vec<f64>>>,
    pub im: Option<Vec<Vec<f64>>>,
    pub values: Option<Vec<Vec<Angle>>>,
    pub theta: Option<Vec<Vec<Angle>>>,
    pub seed: Option<u64>,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum LoadedCocycle {
    U1(TwoCocycleU1),
    Real(TwoCocycleReal),
    Bilinear(BilinearCocycle),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub group: Option<String>,
    pub builtin: Option<String>,
    pub n: Option<usize>,
    pub subgroup: Option<Vec<ElemRef>>,
    pub element: Option<Vec<ElementSpec>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub degree: ElemRef,
    pub re: Vec<Vec<f64>>,
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    /// `ancilla` or `regular`; these bring their own algebra.
    pub builtin: Option<String>,
    pub coupling: Option<f64>,
    pub grading: Option<Vec<ElemRef>>,
    pub dirac: Option<MatrixSpec>,
    pub gamma: Option<MatrixSpec>,
    /// Element whose deformed symmetric part defines `p_θ`.
    pub element: Option<MatrixSpec>,
    pub cut: Option<f64>,
    pub projection: Option<MatrixSpec>,
}

/// A triple together with the optional index data.
#[derive(Debug, Clone)]
pub struct TripleInput {
    pub triple: EquivariantTriple,
    pub rule: Option<ProjectionRule>,
    pub projection: Option<CMat>,
    pub label: String,
}

/// Resolves references relative to the directory of the file that made them.
#[derive(Debug, Clone)]
pub struct Loader {
    base: PathBuf,
}

impl Loader {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self { base: base.into() }
    }

    pub fn for_file(path: &Path) -> Self {
        Self::new(path.parent().map(Path::to_path_buf).unwrap_or_default())
    }

    fn resolve(&self, reference: &str) -> PathBuf {
        let p = Path::new(reference);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Reads and parses a TOML file; returns the parsed value and a loader
    /// rooted at the file's directory.
    pub fn read<T: DeserializeOwned>(&self, reference: &str) -> Result<(T, Loader), CliError> {
        let path = self.resolve(reference);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::config(path.display(), format!("cannot read: {e}")))?;
        let value = toml::from_str(&text).map_err(|e| CliError::config(path.display(), e.to_string()))?;
        Ok((value, Loader::for_file(&path)))
    }

    pub fn group_ref(&self, reference: &str) -> Result<GroupKind, CliError> {
        if let Some(name) = reference.strip_prefix("builtin:") {
            return builtin_group(name).map_err(|m| CliError::config(reference, m));
        }
        let (spec, loader): (GroupSpec, _) = self.read(reference)?;
        loader.group(&spec, reference)
    }

    pub fn group(&self, spec: &GroupSpec, location: &str) -> Result<GroupKind, CliError> {
        match (&spec.builtin, &spec.cayley) {
            (Some(name), None) => builtin_group(name).map_err(|m| CliError::config(location, m)),
            (None, Some(table)) => {
                if let Some(order) = spec.order {
                    if order != table.len() {
                        return Err(CliError::config(location, format!("order {order} but {} table rows", table.len())));
                    }
                }
                FiniteGroup::from_table(table, spec.labels.clone())
                    .map(GroupKind::Finite)
                    .map_err(|e| CliError::input(location, e))
            }
            _ => Err(CliError::config(location, "a group needs exactly one of `builtin` or `cayley`")),
        }
    }

    /// The group named inside a cocycle or bundle file, or the inherited one.
    fn inner_group(&self, own: &Option<String>, inherited: Option<&GroupKind>, location: &str) -> Result<GroupKind, CliError> {
        match (own, inherited) {
            (Some(r), _) => self.group_ref(r),
            (None, Some(g)) => Ok(g.clone()),
            (None, None) => Err(CliError::config(location, "no group given")),
        }
    }

    pub fn cocycle_source(&self, source: &Source<CocycleSpec>, inherited: Option<&GroupKind>, seed: u64) -> Result<(LoadedCocycle, GroupKind), CliError> {
        match source {
            Source::Reference(r) => {
                if let Some(kind) = r.strip_prefix("builtin:") {
                    let spec = CocycleSpec {
                        kind: Some(kind.to_string()),
                        ..Default::default()
                    };
                    return self.cocycle(&spec, inherited, seed, r);
                }
                let (spec, loader): (CocycleSpec, _) = self.read(r)?;
                loader.cocycle(&spec, inherited, seed, r)
            }
            Source::Inline(spec) => self.cocycle(spec, inherited, seed, "cocycle"),
        }
    }

    pub fn cocycle(&self, spec: &CocycleSpec, inherited: Option<&GroupKind>, seed: u64, location: &str) -> Result<(LoadedCocycle, GroupKind), CliError> {
        let group = self.inner_group(&spec.group, inherited, location)?;
        let cfg = |m: String| CliError::config(location, m);
        let kind = match &spec.kind {
            Some(k) => k.clone(),
            None if spec.turns.is_some() => "turns".into(),
            None if spec.re.is_some() => "complex".into(),
            None if spec.values.is_some() => "real".into(),
            None if spec.theta.is_some() => "bilinear".into(),
            None => return Err(cfg("cocycle needs a `kind` or a table".into())),
        };
        let seed = spec.seed.unwrap_or(seed);
        if kind == "bilinear" {
            let GroupKind::Free(free) = &group else {
                return Err(cfg("bilinear cocycles live on z^n".into()));
            };
            let theta = spec.theta.as_ref().ok_or_else(|| cfg("bilinear cocycle needs `theta`".into()))?;
            let n = free.rank();
            if theta.len() != n || theta.iter().any(|r| r.len() != n) {
                return Err(cfg(format!("theta must be {n}x{n}")));
            }
            let mut m = deform_core::linalg::zeros(n).map(|z| z.re);
            for (i, row) in theta.iter().enumerate() {
                for (j, a) in row.iter().enumerate() {
                    m[(i, j)] = a.turns().map_err(cfg)?.radians();
                }
            }
            let b = BilinearCocycle::new(m).map_err(|e| CliError::input(location, e))?;
            return Ok((LoadedCocycle::Bilinear(b), group));
        }
        let GroupKind::Finite(g) = &group else {
            return Err(cfg(format!("cocycle kind {kind:?} needs a finite group")));
        };
        let n = g.order();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = spec.scale.unwrap_or(1.0);
        let loaded = match kind.as_str() {
            "trivial" => LoadedCocycle::U1(TwoCocycleU1::trivial(g)),
            "zero" => LoadedCocycle::Real(TwoCocycleReal::zero(g)),
            "turns" => {
                let t = spec.turns.as_ref().ok_or_else(|| cfg("missing `turns`".into()))?;
                if !(t.len() == n && t.iter().all(|r| r.len() == n)) {
                    return Err(cfg(format!("turns table must be {n}x{n}")));
                }
                let table = t
                    .iter()
                    .map(|r| r.iter().map(|a| a.turns().map(Turns::phase)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(cfg)?;
                LoadedCocycle::U1(TwoCocycleU1::from_table(g, &table).map_err(|e| CliError::input(location, e))?)
            }
            "complex" => {
                let re = spec.re.as_ref().ok_or_else(|| cfg("missing `re`".into()))?;
                let m = MatrixSpec {
                    re: re.clone(),
                    im: spec.im.clone(),
                }
                .to_matrix()
                .map_err(cfg)?;
                if m.shape() != (n, n) {
                    return Err(cfg(format!("complex table must be {n}x{n}")));
                }
                let table: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
                LoadedCocycle::U1(TwoCocycleU1::from_table(g, &table).map_err(|e| CliError::input(location, e))?)
            }
            "bicharacter" => {
                let k = (n as f64).sqrt().round() as usize;
                let (h, w) = heisenberg_bicharacter(k);
                if k * k != n || &h != g {
                    return Err(cfg("bicharacter needs the group z<n>xz<n>".into()));
                }
                LoadedCocycle::U1(w)
            }
            "random-coboundary" => {
                let u = random_u1_coboundary(g, &mut rng);
                let r = random_real_coboundary(g, &mut rng, scale);
                LoadedCocycle::U1(u.product(&r.exp(1.0)).expect("same group"))
            }
            "real" => {
                let v = spec.values.as_ref().ok_or_else(|| cfg("missing `values`".into()))?;
                if !(v.len() == n && v.iter().all(|r| r.len() == n)) {
                    return Err(cfg(format!("values table must be {n}x{n}")));
                }
                let table = v
                    .iter()
                    .map(|r| r.iter().map(|a| a.turns().map(Turns::radians)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(cfg)?;
                LoadedCocycle::Real(TwoCocycleReal::from_table(g, &table).map_err(|e| CliError::input(location, e))?)
            }
            "random-real-coboundary" => LoadedCocycle::Real(random_real_coboundary(g, &mut rng, scale)),
            other => return Err(cfg(format!("unknown cocycle kind {other:?}"))),
        };
        Ok((loaded, group))
    }

    pub fn bundle_source(&self, source: &Source<BundleSpec>, inherited: Option<&GroupKind>) -> Result<(FellBundle, FiniteGroup), CliError> {
        match source {
            Source::Reference(r) => {
                if let Some(name) = r.strip_prefix("builtin:") {
                    let spec = BundleSpec {
                        builtin: Some(name.to_string()),
                        ..Default::default()
                    };
                    return self.bundle(&spec, inherited, r);
                }
                let (spec, loader): (BundleSpec, _) = self.read(r)?;
                loader.bundle(&spec, inherited, r)
            }
            Source::Inline(spec) => self.bundle(spec, inherited, "bundle"),
        }
    }

    pub fn bundle(&self, spec: &BundleSpec, inherited: Option<&GroupKind>, location: &str) -> Result<(FellBundle, FiniteGroup), CliError> {
        let group = self.inner_group(&spec.group, inherited, location)?;
        let cfg = |m: String| CliError::config(location, m);
        let GroupKind::Finite(g) = group else {
            return Err(cfg("bundles need a finite group".into()));
        };
        let inp = |e: deform_core::graded::BundleError| CliError::input(location, e);
        let bundle = match (&spec.builtin, &spec.element) {
            (Some(name), None) => {
                let size = |default: usize| spec.n.unwrap_or(default);
                match name.as_str() {
                    "group-algebra" => FellBundle::group_algebra(&g),
                    "subgroup-algebra" => {
                        let gens = spec
                            .subgroup
                            .as_ref()
                            .ok_or_else(|| cfg("subgroup-algebra needs `subgroup` generators".into()))?
                            .iter()
                            .map(|e| e.resolve(&g))
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(cfg)?;
                        let h = g.subgroup_closure(&gens).map_err(|e| CliError::input(location, e))?;
                        FellBundle::subgroup_algebra(&h)
                    }
                    "full-matrix" => FellBundle::full_matrix(&g, size(2)),
                    "diagonal" => FellBundle::diagonal(&g, size(2)),
                    "pauli" => FellBundle::pauli(&g).map_err(inp)?,
                    "clock-shift" => FellBundle::clock_shift(&g, size(2)).map_err(inp)?,
                    "off-diagonal" => FellBundle::off_diagonal_m2(&g).map_err(inp)?,
                    "ancilla" => FellBundle::group_algebra_with_ancilla(&g),
                    other => return Err(cfg(format!("unknown builtin bundle {other:?}"))),
                }
            }
            (None, Some(elements)) => {
                let mut basis = Vec::with_capacity(elements.len());
                let mut degrees = Vec::with_capacity(elements.len());
                for e in elements {
                    let m = MatrixSpec {
                        re: e.re.clone(),
                        im: e.im.clone(),
                    }
                    .to_matrix()
                    .map_err(cfg)?;
                    basis.push(m);
                    degrees.push(e.degree.resolve(&g).map_err(cfg)?);
                }
                FellBundle::new(&g, basis, degrees).map_err(inp)?
            }
            _ => return Err(cfg("a bundle needs exactly one of `builtin` or `element`".into())),
        };
        Ok((bundle, g))
    }

    pub fn triple_source(&self, source: &Source<TripleSpec>, bundle: &FellBundle, seed: u64) -> Result<TripleInput, CliError> {
        match source {
            Source::Reference(r) => {
                if let Some(name) = r.strip_prefix("builtin:") {
                    let spec = TripleSpec {
                        builtin: Some(name.to_string()),
                        ..Default::default()
                    };
                    return triple(&spec, bundle, seed, r);
                }
                let (spec, _): (TripleSpec, _) = self.read(r)?;
                triple(&spec, bundle, seed, r)
            }
            Source::Inline(spec) => triple(spec, bundle, seed, "triple"),
        }
    }
}

/// Small seeded off-identity part with `Σ|c_g| = 0.1`, so the symmetric
/// part moves the spectrum of `λ_e` by at most 0.2.
fn perturbation(group: &FiniteGroup, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<C64> = group
        .elements()
        .map(|g| {
            if g == group.identity() {
                C64::new(0.0, 0.0)
            } else {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }
        })
        .collect();
    let total: f64 = c.iter().map(|z| z.norm()).sum();
    if total > 0.0 {
        for z in &mut c {
            *z *= 0.1 / total;
        }
    }
    c
}

/// `0.5 λ_e + Σ c_g λ_g (+ 0.1 on the ancilla)`: the ℓ² spectrum of the
/// symmetric part stays in `[0.8, 1.2]` for every cocycle, the ancilla sits
/// at 0.2, and the cut at 0.5 is gap-protected.
fn default_rule(bundle: &FellBundle, group: &FiniteGroup, seed: u64, ancilla: bool) -> ProjectionRule {
    let c = perturbation(group, seed);
    let basis = bundle.basis();
    let mut element = basis[group.identity()].scale(0.5);
    for g in group.elements() {
        element += &basis[g] * c[g];
    }
    if ancilla {
        element += basis[group.order()].scale(0.1);
    }
    ProjectionRule { element, cut: 0.5 }
}

pub fn triple(spec: &TripleSpec, bundle: &FellBundle, seed: u64, location: &str) -> Result<TripleInput, CliError> {
    let cfg = |m: String| CliError::config(location, m);
    let inp = |e: deform_core::spectral::SpectralError| CliError::input(location, e);
    let group = bundle.group();
    let matrix = |m: &Option<MatrixSpec>| m.as_ref().map(MatrixSpec::to_matrix).transpose().map_err(cfg);
    let projection = matrix(&spec.projection)?;
    let explicit_rule = match (matrix(&spec.element)?, spec.cut) {
        (Some(element), Some(cut)) => Some(ProjectionRule { element, cut }),
        (None, None) => None,
        _ => return Err(cfg("`element` and `cut` go together".into())),
    };
    let (triple, rule, label) = match spec.builtin.as_deref() {
        Some("ancilla") => {
            let t = ancilla_triple(group, spec.coupling.unwrap_or(1.0));
            let rule = explicit_rule.unwrap_or_else(|| default_rule(t.bundle(), group, seed, true));
            (t, rule, "ancilla")
        }
        Some("regular") => {
            let n = group.order();
            let t = EquivariantTriple::new(
                FellBundle::group_algebra(group),
                group.elements().collect(),
                CMat::zeros(n, n),
                deform_core::linalg::identity(n),
            )
            .map_err(inp)?;
            let rule = explicit_rule.unwrap_or_else(|| default_rule(t.bundle(), group, seed, false));
            (t, rule, "regular")
        }
        Some(other) => return Err(cfg(format!("unknown builtin triple {other:?}"))),
        None => {
            let grading = spec
                .grading
                .as_ref()
                .ok_or_else(|| cfg("triple needs `grading`".into()))?
                .iter()
                .map(|e| e.resolve(group))
                .collect::<Result<Vec<_>, _>>()
                .map_err(cfg)?;
            let dirac = matrix(&spec.dirac)?.ok_or_else(|| cfg("triple needs `dirac`".into()))?;
            let gamma = matrix(&spec.gamma)?.ok_or_else(|| cfg("triple needs `gamma`".into()))?;
            let t = EquivariantTriple::new(bundle.clone(), grading, dirac, gamma).map_err(inp)?;
            let Some(rule) = explicit_rule else {
                return Ok(TripleInput {
                    triple: t,
                    rule: None,
                    projection,
                    label: "file".into(),
                });
            };
            (t, rule, "file")
        }
    };
    Ok(TripleInput {
        triple,
        rule: Some(rule),
        projection,
        label: label.into(),
    })
}

/// `a:b:n` gives `n` evenly spaced points from `a` to `b` inclusive.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("theta grid {text:?} is not of the form a:b:n"));
    };
    let a: f64 = a.trim().parse().map_err(|_| format!("bad grid start in {text:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad grid end in {text:?}"))?;
    let n: usize = n.trim().parse().map_err(|_| format!("bad grid count in {text:?}"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(format!("theta grid {text:?} is empty or not finite"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_turns("1/4").unwrap(), Turns::Exact(1, 4));
        assert_eq!(parse_turns("3").unwrap(), Turns::Exact(3, 1));
        assert_eq!(parse_turns("0.5").unwrap(), Turns::Float(0.5));
        assert!(parse_turns("1/0").is_err());
        assert_eq!(Turns::Exact(1, 4).phase(), C64::new(0.0, 1.0));
    }

    #[test]
    fn builtin_groups() {
        assert_eq!(builtin_group("z3xz3").unwrap().finite().unwrap().order(), 9);
        assert_eq!(builtin_group("d4").unwrap().finite().unwrap().order(), 8);
        assert!(matches!(builtin_group("z^2").unwrap(), GroupKind::Free(_)));
        assert!(builtin_group("s9").is_err());
        assert!(builtin_group("x").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn default_rule_is_gap_protected() {
        let g = FiniteGroup::cyclic(4);
        let c = perturbation(&g, 5);
        assert!((c.iter().map(|z| z.norm()).sum::<f64>() - 0.1).abs() < 1e-12);
        assert_eq!(c[0], C64::new(0.0, 0.0));
    }
}
