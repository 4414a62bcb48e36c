//! Scenario files and the resolved run context.

use std::collections::BTreeMap;
use std::path::Path;

use deform_core::cocycle::random_real_coboundary;
use deform_core::{BilinearCocycle, FellBundle, FiniteGroup, FreeAbelianGroup, TwoCocycleReal, TwoCocycleU1, DEFAULT_SEED};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::CliError;
use crate::input::{parse_grid, BundleSpec, CocycleSpec, GroupKind, GroupSpec, LoadedCocycle, Loader, Source, TripleInput, TripleSpec};

pub const DEFAULT_GRID: &str = "0:1:11";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Cocycle,
    Tga,
    Deform,
    Crossed,
    K0,
    Triple,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Cocycle, Suite::Tga, Suite::Deform, Suite::Crossed, Suite::K0, Suite::Triple];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cocycle => "cocycle",
            Suite::Tga => "tga",
            Suite::Deform => "deform",
            Suite::Crossed => "crossed",
            Suite::K0 => "k0",
            Suite::Triple => "triple",
        }
    }

    fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Self::ALL.to_vec());
        }
        Self::ALL.iter().find(|x| x.name() == s).map(|x| vec![*x])
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Text(String),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// Whether `A_ω` and `A` should have equal K₀ signatures.
    pub k0_isomorphic: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub description: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub suites: Vec<String>,
    pub theta_grid: Option<GridSpec>,
    pub group: Source<GroupSpec>,
    pub cocycle: Option<Source<CocycleSpec>>,
    pub real_cocycle: Option<Source<CocycleSpec>>,
    pub bundle: Option<Source<BundleSpec>>,
    pub triple: Option<Source<TripleSpec>>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub expect: Expectations,
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub theta_grid: Option<String>,
}

#[derive(Debug, Clone)]
pub struct FiniteSetup {
    pub group: FiniteGroup,
    pub cocycle: TwoCocycleU1,
    pub real: TwoCocycleReal,
    pub bundle: FellBundle,
    pub triple: TripleInput,
}

#[derive(Debug, Clone)]
pub struct FreeSetup {
    pub group: FreeAbelianGroup,
    pub cocycle: BilinearCocycle,
}

#[derive(Debug, Clone)]
pub enum Setup {
    Finite(Box<FiniteSetup>),
    Free(FreeSetup),
}

#[derive(Debug, Clone)]
pub struct Context {
    pub name: String,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub suites: Vec<Suite>,
    pub tolerances: BTreeMap<String, f64>,
    pub expect: Expectations,
    pub setup: Setup,
    /// When set, only these record names are reported.
    pub only: Option<Vec<String>>,
}

pub fn resolve_grid(spec: Option<&GridSpec>, cli: Option<&str>) -> Result<Vec<f64>, CliError> {
    let grid = match (cli, spec) {
        (Some(text), _) => parse_grid(text),
        (None, Some(GridSpec::Text(text))) => parse_grid(text),
        (None, Some(GridSpec::List(v))) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v.clone()),
        (None, Some(GridSpec::List(_))) => Err("theta grid list is empty or not finite".into()),
        (None, None) => parse_grid(DEFAULT_GRID),
    };
    grid.map_err(|m| CliError::config("theta_grid", m))
}

fn require_valid(location: &str, report: deform_core::cocycle::CocycleReport) -> Result<(), CliError> {
    if report.passed {
        Ok(())
    } else {
        Err(CliError::input(
            location,
            format!("cocycle fails validation (worst residual {:.3e})", report.max_residual()),
        ))
    }
}

impl Context {
    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let loader = Loader::new(".");
        let (spec, inner): (ScenarioSpec, Loader) = loader.read(&path.to_string_lossy())?;
        Self::from_spec(&spec, &inner, overrides)
    }

    pub fn from_toml(text: &str, location: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| CliError::config(location, e))?;
        Self::from_spec(&spec, &Loader::new("."), overrides)
    }

    pub fn from_spec(spec: &ScenarioSpec, loader: &Loader, overrides: &Overrides) -> Result<Self, CliError> {
        let seed = overrides.seed.or(spec.seed).unwrap_or(DEFAULT_SEED);
        let grid = resolve_grid(spec.theta_grid.as_ref(), overrides.theta_grid.as_deref())?;
        let mut suites = Vec::new();
        let names: Vec<&str> = if spec.suites.is_empty() {
            vec!["all"]
        } else {
            spec.suites.iter().map(String::as_str).collect()
        };
        for s in names {
            let parsed = Suite::parse(s).ok_or_else(|| CliError::config("suites", format!("unknown suite {s:?}")))?;
            suites.extend(parsed);
        }
        suites.sort();
        suites.dedup();

        let group = match &spec.group {
            Source::Reference(r) => loader.group_ref(r)?,
            Source::Inline(g) => loader.group(g, "group")?,
        };
        let setup = match group {
            GroupKind::Free(free) => {
                if let Some(bad) = suites.iter().find(|s| !matches!(s, Suite::Cocycle | Suite::Tga)) {
                    return Err(CliError::config("suites", format!("suite {:?} needs a finite group", bad.name())));
                }
                let source = spec
                    .cocycle
                    .as_ref()
                    .ok_or_else(|| CliError::config("cocycle", "z^n scenarios need a bilinear cocycle"))?;
                let (c, _) = loader.cocycle_source(source, Some(&GroupKind::Free(free.clone())), seed)?;
                let LoadedCocycle::Bilinear(b) = c else {
                    return Err(CliError::config("cocycle", "z^n scenarios need a bilinear cocycle"));
                };
                if b.rank() != free.rank() {
                    return Err(CliError::input("cocycle", format!("rank {} cocycle on z^{}", b.rank(), free.rank())));
                }
                Setup::Free(FreeSetup { group: free, cocycle: b })
            }
            GroupKind::Finite(g) => Setup::Finite(Box::new(finite_setup(spec, loader, &g, seed)?)),
        };
        Ok(Self {
            name: spec.name.clone(),
            seed,
            grid,
            suites,
            tolerances: spec.tolerances.clone(),
            expect: spec.expect.clone(),
            setup,
            only: None,
        })
    }
}

fn finite_setup(spec: &ScenarioSpec, loader: &Loader, g: &FiniteGroup, seed: u64) -> Result<FiniteSetup, CliError> {
    let kind = GroupKind::Finite(g.clone());
    let same_group = |location: &str, other: &GroupKind| match other.finite() {
        Some(h) if h == g => Ok(()),
        _ => Err(CliError::input(location, "group differs from the scenario group")),
    };
    let cocycle = match &spec.cocycle {
        None => TwoCocycleU1::trivial(g),
        Some(source) => {
            let (c, cg) = loader.cocycle_source(source, Some(&kind), seed)?;
            same_group("cocycle", &cg)?;
            match c {
                LoadedCocycle::U1(c) => c,
                _ => return Err(CliError::config("cocycle", "expected a U(1)-valued cocycle")),
            }
        }
    };
    require_valid("cocycle", cocycle.validate())?;
    let real = match &spec.real_cocycle {
        None => random_real_coboundary(g, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), 1.0),
        Some(source) => {
            let (c, cg) = loader.cocycle_source(source, Some(&kind), seed)?;
            same_group("real_cocycle", &cg)?;
            match c {
                LoadedCocycle::Real(c) => c,
                _ => return Err(CliError::config("real_cocycle", "expected a real-valued cocycle")),
            }
        }
    };
    require_valid("real_cocycle", real.validate())?;
    let bundle = match &spec.bundle {
        None => FellBundle::group_algebra(g),
        Some(source) => {
            let (b, bg) = loader.bundle_source(source, Some(&kind))?;
            same_group("bundle", &GroupKind::Finite(bg))?;
            b
        }
    };
    let triple_source = spec.triple.clone().unwrap_or_else(|| Source::Reference("builtin:ancilla".into()));
    let triple = loader.triple_source(&triple_source, &bundle, seed)?;
    Ok(FiniteSetup {
        group: g.clone(),
        cocycle,
        real,
        bundle,
        triple,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_defaults() {
        let ctx = Context::from_toml("name = \"m\"\ngroup = \"builtin:z2\"\n", "m", &Overrides::default()).unwrap();
        assert_eq!(ctx.seed, DEFAULT_SEED);
        assert_eq!(ctx.grid.len(), 11);
        assert_eq!(ctx.suites, Suite::ALL.to_vec());
        let Setup::Finite(s) = ctx.setup else { panic!() };
        assert_eq!(s.bundle.len(), 2);
        assert_eq!(s.triple.label, "ancilla");
    }

    #[test]
    fn rejects_bad_scenarios() {
        let o = Overrides::default();
        assert!(Context::from_toml("name = \"m\"\ngroup = \"builtin:z2\"\nsuites = [\"nope\"]\n", "m", &o).is_err());
        assert!(Context::from_toml("name = \"m\"\ngroup = \"builtin:z^2\"\n", "m", &o).is_err());
        assert!(Context::from_toml("name = \"m\"\ngroup = \"missing.toml\"\n", "m", &o).is_err());
        let bad = "name = \"m\"\ngroup = \"builtin:z2\"\n[cocycle]\nturns = [[0, \"1/3\"], [0, 0]]\n";
        assert!(matches!(Context::from_toml(bad, "m", &o), Err(CliError::InputInvalid { .. })));
    }

    #[test]
    fn cli_overrides_win() {
        let o = Overrides {
            seed: Some(7),
            theta_grid: Some("0:2:3".into()),
        };
        let ctx = Context::from_toml("name = \"m\"\ngroup = \"builtin:z2\"\nseed = 3\n", "m", &o).unwrap();
        assert_eq!(ctx.seed, 7);
        assert_eq!(ctx.grid, vec![0.0, 1.0, 2.0]);
    }
}
