//! Command implementations behind the `deformctl` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use deform_core::cocycle::random_real_coboundary;
use deform_core::{tol, FiniteGroup, TwoCocycleU1, C64, DEFAULT_SEED};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{builtin, BUILTINS};
use crate::error::CliError;
use crate::input::{GroupKind, GroupSpec, LoadedCocycle, Loader, Source, TripleSpec};
use crate::report::{Recorder, Report};
use crate::scenario::{resolve_grid, Context, Expectations, FiniteSetup, FreeSetup, Overrides, Setup, Suite};
use crate::suites;

#[derive(Debug, Parser)]
#[command(name = "deformctl", version, about = "Run cocycle-deformation checks on finite graded algebras")]
pub struct Cli {
    /// Write the JSON report here; a one-line-per-record summary goes to stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Angle grid `a:b:n` for path checks.
    #[arg(long, global = true)]
    pub theta_grid: Option<String>,
    /// Include per-record wall-clock times (makes reports nondeterministic).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file.
    Run { config: PathBuf },
    /// Run a builtin scenario.
    Builtin {
        name: String,
        /// Print the scenario TOML instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// List builtin scenarios.
    List,
    /// Cayley table checks.
    #[command(subcommand)]
    Group(GroupCommand),
    /// Validate and transform 2-cocycles.
    #[command(subcommand)]
    Cocycle(CocycleCommand),
    /// Twisted group algebra relations.
    #[command(subcommand)]
    Tga(TgaCommand),
    /// Fell bundle checks.
    #[command(subcommand)]
    Bundle(BundleCommand),
    /// Deform a bundle by a cocycle.
    #[command(subcommand)]
    Deform(DeformCommand),
    /// Crossed products, untwisting and dual actions.
    #[command(subcommand)]
    Crossed(CrossedCommand),
    /// K₀ signatures of a bundle and its deformation.
    K0 {
        #[command(flatten)]
        pair: Pair,
        /// Fail unless the two signatures agree.
        #[arg(long)]
        compare_untwisted: bool,
    },
    /// Equivariant spectral triples and index pairings.
    #[command(subcommand)]
    Triple(TripleCommand),
}

#[derive(Debug, Subcommand)]
pub enum GroupCommand {
    /// Check the group axioms of a Cayley table.
    Validate { file: String },
}

#[derive(Debug, Subcommand)]
pub enum CocycleCommand {
    /// Cocycle identity, normalization and modulus.
    Validate { file: String },
    /// `exp(iθω₀)` of a real cocycle; θ in turns.
    Exp {
        file: String,
        #[arg(long, default_value = "1/4")]
        theta: String,
    },
    /// `ω̃(g,h) = ω(h⁻¹,g⁻¹)` and its cohomology class.
    Opposite { file: String },
}

#[derive(Debug, Subcommand)]
pub enum TgaCommand {
    /// Relations, traciality and the convolution oracle.
    Relations { cocycle: String },
}

#[derive(Debug, Subcommand)]
pub enum BundleCommand {
    /// Grading, closure and unit checks.
    Validate { file: String },
}

#[derive(Debug, Args)]
pub struct Pair {
    pub bundle: String,
    pub cocycle: String,
}

#[derive(Debug, Subcommand)]
pub enum DeformCommand {
    /// Build `A_ω` and run the deformation suite.
    Run(Pair),
}

#[derive(Debug, Subcommand)]
pub enum CrossedCommand {
    Untwist(Pair),
    Dual(Pair),
    Vk(Pair),
    Wk(Pair),
}

#[derive(Debug, Args)]
pub struct TriplePair {
    pub bundle: String,
    pub cocycle: String,
    pub triple: String,
}

#[derive(Debug, Subcommand)]
pub enum TripleCommand {
    Deform(TriplePair),
    Pair(TriplePair),
    Path(TriplePair),
}

/// What a command produced.
pub enum Output {
    Report(Report),
    Text(String),
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            theta_grid: self.theta_grid.clone(),
        }
    }

    pub fn execute(&self) -> Result<Output, CliError> {
        let o = self.overrides();
        let cwd = Loader::new(".");
        let report = match &self.command {
            Command::Run { config } => suites::run(&Context::from_file(config, &o)?, self.timings),
            Command::Builtin { name, print_config } => {
                let b = builtin(name).ok_or_else(|| CliError::config(name, "no such builtin; see `deformctl list`"))?;
                if *print_config {
                    return Ok(Output::Text(b.toml.trim_start().to_string()));
                }
                suites::run(&Context::from_toml(b.toml, b.name, &o)?, self.timings)
            }
            Command::List => {
                let text = BUILTINS.iter().map(|b| format!("{:<20} {}\n", b.name, b.summary)).collect();
                return Ok(Output::Text(text));
            }
            Command::Group(GroupCommand::Validate { file }) => group_validate(&cwd, file, &o)?,
            Command::Cocycle(c) => cocycle_command(&cwd, c, &o, self.timings)?,
            Command::Tga(TgaCommand::Relations { cocycle }) => {
                let ctx = cocycle_context(&cwd, cocycle, Suite::Tga, &o)?;
                suites::run(&ctx, self.timings)
            }
            Command::Bundle(BundleCommand::Validate { file }) => bundle_validate(&cwd, file, &o)?,
            Command::Deform(DeformCommand::Run(p)) => self.pair(&cwd, p, None, Suite::Deform, None, &o)?,
            Command::Crossed(c) => {
                let (p, only): (&Pair, &[&str]) = match c {
                    CrossedCommand::Untwist(p) => (p, &["crossed.closure", "crossed.partition", "crossed.untwist"]),
                    CrossedCommand::Dual(p) => (p, &["crossed.dual-action"]),
                    CrossedCommand::Vk(p) => (p, &["crossed.v-multiplicativity"]),
                    CrossedCommand::Wk(p) => (p, &["crossed.w-cocycle", "crossed.w-unitarity", "crossed.constant-field", "crossed.exterior-equivalence"]),
                };
                self.pair(&cwd, p, None, Suite::Crossed, Some(only), &o)?
            }
            Command::K0 { pair, compare_untwisted } => {
                let mut ctx = pair_context(&cwd, &pair.bundle, &pair.cocycle, None, Suite::K0, &o)?;
                if *compare_untwisted {
                    ctx.expect.k0_isomorphic = Some(true);
                }
                suites::run(&ctx, self.timings)
            }
            Command::Triple(t) => {
                let (p, only): (&TriplePair, &[&str]) = match t {
                    TripleCommand::Deform(p) => (p, &["triple.covariance", "triple.restriction", "triple.isospectral", "triple.deformed-covariance"]),
                    TripleCommand::Pair(p) => (p, &["triple.pairing", "triple.index-additivity"]),
                    TripleCommand::Path(p) => (p, &["triple.index-path"]),
                };
                let pair = Pair {
                    bundle: p.bundle.clone(),
                    cocycle: p.cocycle.clone(),
                };
                self.pair(&cwd, &pair, Some(&p.triple), Suite::Triple, Some(only), &o)?
            }
        };
        Ok(Output::Report(report))
    }

    fn pair(&self, cwd: &Loader, p: &Pair, triple: Option<&str>, suite: Suite, only: Option<&[&str]>, o: &Overrides) -> Result<Report, CliError> {
        let mut ctx = pair_context(cwd, &p.bundle, &p.cocycle, triple, suite, o)?;
        ctx.only = only.map(|v| v.iter().map(|s| s.to_string()).collect());
        Ok(suites::run(&ctx, self.timings))
    }
}

fn seed_of(o: &Overrides) -> u64 {
    o.seed.unwrap_or(DEFAULT_SEED)
}

fn bare_context(name: String, o: &Overrides, suite: Suite, setup: Setup) -> Result<Context, CliError> {
    Ok(Context {
        name,
        seed: seed_of(o),
        grid: resolve_grid(None, o.theta_grid.as_deref())?,
        suites: vec![suite],
        tolerances: Default::default(),
        expect: Expectations::default(),
        setup,
        only: None,
    })
}

/// A bundle file plus a cocycle file. A U(1) cocycle is used as `ω`; a real
/// cocycle is used as `ω₀`, with `ω = exp(iθω₀)` at the last grid point.
fn pair_context(cwd: &Loader, bundle: &str, cocycle: &str, triple: Option<&str>, suite: Suite, o: &Overrides) -> Result<Context, CliError> {
    let seed = seed_of(o);
    let grid = resolve_grid(None, o.theta_grid.as_deref())?;
    let (b, g) = cwd.bundle_source(&Source::Reference(bundle.to_string()), None)?;
    let kind = GroupKind::Finite(g.clone());
    let (c, cg) = cwd.cocycle_source(&Source::Reference(cocycle.to_string()), Some(&kind), seed)?;
    if cg.finite() != Some(&g) {
        return Err(CliError::input(cocycle, "cocycle group differs from the bundle group"));
    }
    let (omega, real) = match c {
        LoadedCocycle::U1(w) => (w, random_real_coboundary(&g, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), 1.0)),
        LoadedCocycle::Real(r) => (r.exp(*grid.last().expect("nonempty grid")), r),
        LoadedCocycle::Bilinear(_) => return Err(CliError::config(cocycle, "bilinear cocycles have no finite bundles")),
    };
    for (what, rep) in [("cocycle", omega.validate()), ("real cocycle", real.validate())] {
        if !rep.passed {
            return Err(CliError::input(cocycle, format!("{what} fails validation (worst residual {:.3e})", rep.max_residual())));
        }
    }
    let source = match triple {
        Some(t) => Source::Reference(t.to_string()),
        None => Source::Inline(TripleSpec {
            builtin: Some("ancilla".into()),
            ..Default::default()
        }),
    };
    let triple = cwd.triple_source(&source, &b, seed)?;
    let setup = Setup::Finite(Box::new(FiniteSetup {
        group: g,
        cocycle: omega,
        real,
        bundle: b,
        triple,
    }));
    bare_context(format!("{} {}", suite.name(), bundle), o, suite, setup)
}

/// Scenario around a single cocycle file, with the group algebra as bundle.
fn cocycle_context(cwd: &Loader, file: &str, suite: Suite, o: &Overrides) -> Result<Context, CliError> {
    let seed = seed_of(o);
    let (c, g) = cwd.cocycle_source(&Source::Reference(file.to_string()), None, seed)?;
    let setup = match (c, g) {
        (LoadedCocycle::Bilinear(b), GroupKind::Free(free)) => Setup::Free(FreeSetup { group: free, cocycle: b }),
        (c, GroupKind::Finite(g)) => {
            let (omega, real) = match c {
                LoadedCocycle::U1(w) => (w, random_real_coboundary(&g, &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), 1.0)),
                LoadedCocycle::Real(r) => (r.exp(1.0), r),
                LoadedCocycle::Bilinear(_) => unreachable!("bilinear cocycles only load on z^n"),
            };
            let bundle = deform_core::FellBundle::group_algebra(&g);
            let triple = crate::input::triple(
                &TripleSpec {
                    builtin: Some("ancilla".into()),
                    ..Default::default()
                },
                &bundle,
                seed,
                file,
            )?;
            Setup::Finite(Box::new(FiniteSetup {
                group: g,
                cocycle: omega,
                real,
                bundle,
                triple,
            }))
        }
        _ => return Err(CliError::config(file, "cocycle kind does not match its group")),
    };
    bare_context(format!("{} {file}", suite.name()), o, suite, setup)
}

#[derive(Serialize)]
struct GroupSummary {
    order: usize,
    abelian: bool,
    element_orders: Vec<usize>,
    subgroups: usize,
}

fn group_validate(cwd: &Loader, file: &str, o: &Overrides) -> Result<Report, CliError> {
    let mut report = Report::new(format!("group {file}"), seed_of(o), vec![]);
    let overrides = Default::default();
    let mut rec = Recorder::new(&mut report, "group", &overrides, false);
    let group = if let Some(name) = file.strip_prefix("builtin:") {
        crate::input::builtin_group(name).map_err(|m| CliError::config(file, m))?
    } else {
        let (spec, _): (GroupSpec, Loader) = cwd.read(file)?;
        match (&spec.builtin, &spec.cayley) {
            (None, Some(table)) => match FiniteGroup::from_table(table, spec.labels.clone()) {
                Ok(g) => GroupKind::Finite(g),
                Err(e) => {
                    rec.error("group.axioms", "group-axioms", e);
                    return Ok(report);
                }
            },
            _ => cwd.group(&spec, file)?,
        }
    };
    match group {
        GroupKind::Finite(g) => {
            rec.verdict("group.axioms", "group-axioms", true, true);
            rec.detail(
                "summary",
                GroupSummary {
                    order: g.order(),
                    abelian: g.is_abelian(),
                    element_orders: g.elements().map(|x| g.element_order(x)).collect(),
                    subgroups: g.all_subgroups().len(),
                },
            );
        }
        GroupKind::Free(f) => {
            rec.verdict("group.axioms", "group-axioms", true, true);
            rec.detail("free-abelian-rank", f.rank());
        }
    }
    Ok(report)
}

#[derive(Serialize)]
struct Table {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn table_of(w: &TwoCocycleU1) -> Table {
    let t = w.table();
    let part = |f: fn(&C64) -> f64| t.iter().map(|r| r.iter().map(f).collect()).collect();
    Table {
        re: part(|z| z.re),
        im: part(|z| z.im),
    }
}

fn cocycle_command(cwd: &Loader, c: &CocycleCommand, o: &Overrides, timings: bool) -> Result<Report, CliError> {
    let seed = seed_of(o);
    let file = match c {
        CocycleCommand::Validate { file } | CocycleCommand::Exp { file, .. } | CocycleCommand::Opposite { file } => file,
    };
    if let CocycleCommand::Validate { .. } = c {
        let ctx = cocycle_context(cwd, file, Suite::Cocycle, o)?;
        return Ok(suites::run(&ctx, timings));
    }
    let (loaded, _) = cwd.cocycle_source(&Source::Reference(file.clone()), None, seed)?;
    let mut report = Report::new(format!("cocycle {file}"), seed, vec![]);
    let overrides = Default::default();
    let mut rec = Recorder::new(&mut report, "cocycle", &overrides, timings);
    match (c, loaded) {
        (CocycleCommand::Exp { theta, .. }, LoadedCocycle::Real(r)) => {
            let t = crate::input::Angle::Text(theta.clone()).turns().map_err(|m| CliError::config("--theta", m))?;
            let w = r.exp(t.radians());
            rec.residual("cocycle.validate", "cocycle-identity", w.validate().max_residual(), tol::COCYCLE);
            rec.detail("exp", table_of(&w));
        }
        (CocycleCommand::Opposite { .. }, LoadedCocycle::U1(w)) => {
            let op = w.opposite();
            rec.residual("cocycle.validate", "cocycle-identity", op.validate().max_residual(), tol::COCYCLE);
            let ok = deform_core::cocycle::check_cohomologous(&w.conjugate(), &op, &w.antipode_map());
            rec.verdict("cocycle.conjugate-vs-antipode", "antipode-cohomology", ok, ok);
            rec.detail("opposite", table_of(&op));
        }
        (CocycleCommand::Exp { .. }, _) => return Err(CliError::config(file, "`exp` needs a real cocycle")),
        _ => return Err(CliError::config(file, "`opposite` needs a U(1) cocycle")),
    }
    Ok(report)
}

fn bundle_validate(cwd: &Loader, file: &str, o: &Overrides) -> Result<Report, CliError> {
    let mut report = Report::new(format!("bundle {file}"), seed_of(o), vec![]);
    let overrides = Default::default();
    let mut rec = Recorder::new(&mut report, "bundle", &overrides, false);
    let (spec, inner) = if file.starts_with("builtin:") {
        (None, cwd.clone())
    } else {
        let (spec, inner): (crate::input::BundleSpec, Loader) = cwd.read(file)?;
        (Some(spec), inner)
    };
    let result = match &spec {
        Some(s) => inner.bundle(s, None, file),
        None => return Err(CliError::config(file, "builtin bundles need a group; use a bundle file")),
    };
    match result {
        Ok((b, _)) => match b.health() {
            Ok(h) => {
                rec.verdict("bundle.health", "graded-algebra", true, true);
                rec.detail("health", h);
                rec.detail("dimension", b.len());
            }
            Err(e) => rec.error("bundle.health", "graded-algebra", e),
        },
        Err(CliError::InputInvalid { message, .. }) => rec.error("bundle.health", "graded-algebra", message),
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Writes the report where asked and returns what goes to stdout.
pub fn emit(report: &Report, path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, report.to_json()).map_err(|e| CliError::config(p.display(), format!("cannot write report: {e}")))?;
            Ok(report.summary())
        }
        None => Ok(report.to_json()),
    }
}
