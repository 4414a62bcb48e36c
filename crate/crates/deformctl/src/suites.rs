//! Check suites. Each suite appends records in a fixed order; nothing here
//! depends on hash iteration order or wall-clock time.

use deform_core::cocycle::{check_cohomologous, random_u1_coboundary};
use deform_core::crossed::{
    constant_field_check, crossed_product, dual_action, dual_action_check, exterior_equivalence_check, iterated_crossed_product,
    untwist_isomorphism, v_multiplicativity_check, w_cocycle, w_unitary,
};
use deform_core::deform::{bundle_structure_constants, braided_model_check, deform, deform_path, iterate_check, twisted_structure_constants};
use deform_core::k0::{block_decompose, k0_along_path, k0_compare, morita_rank_check, MatrixAlgebra};
use deform_core::linalg::{self, conjugate_by, hermitian_eigen, kron, max_abs_diff};
use deform_core::spectral::{index_invariance_along_path, index_pairing, EquivariantTriple};
use deform_core::twisted::{relations_check, right_translation, yetter_drinfeld_check, TwistedAlgebra, TwistedAlgebraExt};
use deform_core::{tol, CMat, FellBundle, TwoCocycleU1, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Recorder, Report};
use crate::scenario::{Context, FiniteSetup, FreeSetup, Setup, Suite};

/// Largest `|Γ|² N` handled by the crossed-product checks before the
/// bundle is replaced by trivially graded `ℂ`.
pub const CROSSED_LIMIT: usize = 256;
/// Same for the iterated crossed product in the Morita check.
pub const MORITA_LIMIT: usize = 128;
/// Largest group order for the Yetter-Drinfeld check (matrices of size `|Γ|³`).
pub const YD_ORDER_LIMIT: usize = 10;
pub const TRACE_PAIRS: usize = 100;
pub const ORACLE_PAIRS: usize = 20;

pub fn run(ctx: &Context, timings: bool) -> Report {
    let mut report = Report::new(ctx.name.clone(), ctx.seed, ctx.grid.clone());
    for &suite in &ctx.suites {
        let mut rec = Recorder::new(&mut report, suite.name(), &ctx.tolerances, timings).with_filter(ctx.only.as_deref());
        match (&ctx.setup, suite) {
            (Setup::Finite(s), Suite::Cocycle) => cocycle_suite(ctx, s, &mut rec),
            (Setup::Finite(s), Suite::Tga) => tga_suite(ctx, s, &mut rec),
            (Setup::Finite(s), Suite::Deform) => deform_suite(ctx, s, &mut rec),
            (Setup::Finite(s), Suite::Crossed) => crossed_suite(ctx, s, &mut rec),
            (Setup::Finite(s), Suite::K0) => k0_suite(ctx, s, &mut rec),
            (Setup::Finite(s), Suite::Triple) => triple_suite(ctx, s, &mut rec),
            (Setup::Free(s), Suite::Cocycle) => free_cocycle_suite(s, &mut rec),
            (Setup::Free(s), Suite::Tga) => free_tga_suite(ctx, s, &mut rec),
            (Setup::Free(_), _) => unreachable!("rejected while loading the scenario"),
        }
    }
    report
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

/// The bundle itself if `|Γ|² N` fits, else trivially graded `ℂ`.
pub fn fit_bundle(bundle: &FellBundle, limit: usize) -> (FellBundle, bool) {
    let n = bundle.group().order();
    if n * n * bundle.ambient_dim() <= limit {
        (bundle.clone(), false)
    } else {
        (FellBundle::diagonal(bundle.group(), 1), true)
    }
}

pub fn cocycle_suite(ctx: &Context, s: &FiniteSetup, rec: &mut Recorder) {
    let report = s.cocycle.validate();
    rec.residual("cocycle.validate", "cocycle-identity", report.max_residual(), tol::COCYCLE);
    let cohomologous = check_cohomologous(&s.cocycle.conjugate(), &s.cocycle.opposite(), &s.cocycle.antipode_map());
    rec.verdict("cocycle.conjugate-vs-antipode", "antipode-cohomology", cohomologous, cohomologous);

    let real = s.real.validate();
    rec.residual("real-cocycle.validate", "cocycle-identity", real.max_residual(), tol::COCYCLE);
    let mut worst: f64 = 0.0;
    let subgroups = s.group.all_subgroups();
    for h in &subgroups {
        match s.real.coboundary_solve(h) {
            Ok(w) => worst = worst.max(w.residual(&s.real)),
            Err(e) => {
                rec.error("real-cocycle.coboundary-solve", "real-coboundary", e);
                return;
            }
        }
    }
    rec.detail("subgroups", subgroups.len());
    rec.residual("real-cocycle.coboundary-solve", "real-coboundary", worst, tol::COHOMOLOGOUS);
    let exp_worst = ctx.grid.iter().map(|&t| s.real.exp(t).validate().max_residual()).fold(0.0, f64::max);
    rec.residual("real-cocycle.exp-path", "cocycle-identity", exp_worst, tol::COCYCLE);
}

pub fn tga_suite(ctx: &Context, s: &FiniteSetup, rec: &mut Recorder) {
    let rel = relations_check(&s.cocycle);
    rec.residual("tga.relations", "twisted-relations", rel.max_residual(), rel.tolerance);

    let alg = TwistedAlgebra::new(s.group.clone(), s.cocycle.clone());
    let n = s.group.order();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let random = |rng: &mut ChaCha8Rng| alg.element(s.group.elements().zip(random_coeffs(rng, n)));
    let mut trace: f64 = 0.0;
    for _ in 0..TRACE_PAIRS {
        let (x, y) = (random(&mut rng), random(&mut rng));
        let xy = x.multiply(&y).expect("same algebra").standard_trace();
        let yx = y.multiply(&x).expect("same algebra").standard_trace();
        trace = trace.max((xy - yx).norm());
    }
    rec.residual("tga.trace-tracial", "standard-trace", trace, tol::CLOSURE);
    let mut oracle: f64 = 0.0;
    for _ in 0..ORACLE_PAIRS {
        let (x, y) = (random(&mut rng), random(&mut rng));
        let xy = x.multiply(&y).expect("same algebra");
        oracle = oracle.max(max_abs_diff(&xy.matrix(), &(x.matrix() * y.matrix())));
    }
    rec.residual("tga.matrix-vs-convolution", "regular-representation", oracle, tol::COCYCLE);
    if n <= YD_ORDER_LIMIT {
        let yd = yetter_drinfeld_check(&s.cocycle);
        let worst = yd.diagram_residual.max(yd.closed_form_residual).max(yd.ad_formula_residual);
        rec.residual("tga.yetter-drinfeld", "yetter-drinfeld", worst, yd.tolerance);
    } else {
        rec.detail("tga.yetter-drinfeld.skipped", format!("group order {n} > {YD_ORDER_LIMIT}"));
    }
}

pub fn deform_suite(ctx: &Context, s: &FiniteSetup, rec: &mut Recorder) {
    let a = match deform(&s.bundle, &s.cocycle) {
        Ok(a) => a,
        Err(e) => return rec.error("deform.build", "deformation", e),
    };
    let r = a.report();
    rec.residual("deform.closure", "deformation-closure", r.closure_residual, tol::CLOSURE);
    rec.residual("deform.star", "deformation-closure", r.star_residual, tol::CLOSURE);
    rec.residual("deform.unit", "deformation-closure", r.unit_residual, tol::CLOSURE);
    match r.intertwining_residual {
        Some(x) => {
            rec.residual("deform.intertwining", "deformation-intertwiner", x, tol::CLOSURE);
        }
        None => rec.detail("intertwining.skipped", "carrier too large"),
    }
    rec.residual("deform.norm", "deformation-norm", r.norm_residual, tol::CLOSURE);
    rec.detail("structure-constants.digest", a.structure_constants().digest());
    match twisted_structure_constants(&s.bundle, &s.cocycle) {
        Ok(oracle) => {
            rec.residual("deform.oracle", "structure-constant-oracle", a.structure_constants().max_abs_diff(&oracle), tol::CLOSURE);
        }
        Err(e) => rec.error("deform.oracle", "structure-constant-oracle", e),
    }
    match deform(&s.bundle, &TwoCocycleU1::trivial(&s.group)) {
        Ok(t) => {
            let d = t.structure_constants().max_abs_diff(&bundle_structure_constants(&s.bundle));
            rec.residual("deform.trivial-reproduces-source", "trivial-deformation", d, tol::CLOSURE);
        }
        Err(e) => rec.error("deform.trivial-reproduces-source", "trivial-deformation", e),
    }
    let eta = random_u1_coboundary(&s.group, &mut ChaCha8Rng::seed_from_u64(ctx.seed ^ 0xe7a));
    match iterate_check(&s.bundle, &s.cocycle, &eta) {
        Ok(it) => {
            rec.residual("deform.iterate", "iterated-deformation", it.iterated_residual.max(it.oracle_residual), it.tolerance);
        }
        Err(e) => rec.error("deform.iterate", "iterated-deformation", e),
    }
    match braided_model_check(&s.bundle, &s.cocycle) {
        Ok(b) => {
            rec.residual("deform.braided-model", "braided-model", b.coaction_residual.max(b.adjoint_residual), b.tolerance);
        }
        Err(e) => rec.error("deform.braided-model", "braided-model", e),
    }
    match deform_path(&s.bundle, &s.real, &ctx.grid) {
        Ok((_, path)) => {
            rec.verdict("deform.path-lipschitz", "deformation-path", path.passed, path.passed);
            rec.detail("path", &path);
        }
        Err(e) => rec.error("deform.path-lipschitz", "deformation-path", e),
    }
}

pub fn crossed_suite(ctx: &Context, s: &FiniteSetup, rec: &mut Recorder) {
    let (bundle, substituted) = fit_bundle(&s.bundle, CROSSED_LIMIT);
    if substituted {
        rec.detail("substitute", "trivially graded C");
    }
    let cp = match crossed_product(&bundle, ctx.seed) {
        Ok(cp) => cp,
        Err(e) => return rec.error("crossed.build", "crossed-product", e),
    };
    rec.residual("crossed.closure", "crossed-product", cp.closure_residual(), tol::CLOSURE);
    rec.residual(
        "crossed.partition",
        "crossed-product",
        cp.partition_residual().max(cp.projection_residual()),
        tol::CLOSURE,
    );
    match untwist_isomorphism(&bundle, &s.cocycle) {
        Ok((_, u)) => {
            let worst = [
                u.formula_residual,
                u.span_residual,
                u.homomorphism_residual,
                u.adjoint_residual,
                u.unitarity_residual,
                u.coefficient_residual,
            ]
            .into_iter()
            .fold(0.0, f64::max);
            rec.residual("crossed.untwist", "untwisting", worst, u.tolerance);
            rec.detail("untwist", &u);
        }
        Err(e) => rec.error("crossed.untwist", "untwisting", e),
    }
    let d = dual_action_check(&bundle, &s.cocycle, &cp);
    let worst = d.automorphism_residual.max(d.adjoint_residual).max(d.composition_residual).max(d.vk_residual);
    rec.residual("crossed.dual-action", "dual-action", worst, d.tolerance);
    rec.detail("dual-action.periods", &d.periods);
    let v = v_multiplicativity_check(&s.cocycle);
    rec.residual(
        "crossed.v-multiplicativity",
        "v-multiplicativity",
        v.conjugation_residual.max(v.multiplicativity_residual).max(v.unitarity_residual),
        v.tolerance,
    );

    let mut cocycle_worst: f64 = 0.0;
    let mut unitary_worst: f64 = 0.0;
    let subgroups = s.group.all_subgroups();
    for h in &subgroups {
        let result = s
            .real
            .opposite()
            .coboundary_solve(h)
            .map_err(|e| e.to_string())
            .and_then(|w| w_cocycle(&bundle, &s.real, h, &w, &ctx.grid, &cp).map_err(|e| e.to_string()));
        match result {
            Ok(r) => {
                for p in &r.points {
                    cocycle_worst = cocycle_worst.max(p.cocycle_residual).max(p.conjugacy_residual);
                    unitary_worst = unitary_worst.max(p.unitarity_residual);
                }
            }
            Err(e) => return rec.error("crossed.w-cocycle", "w-cocycle", e),
        }
    }
    rec.detail("w-cocycle.subgroups", subgroups.len());
    rec.residual("crossed.w-cocycle", "w-cocycle", cocycle_worst, tol::CLOSURE);
    rec.residual("crossed.w-unitarity", "w-cocycle", unitary_worst, tol::UNITARY);
    match constant_field_check(&bundle, &s.real, &ctx.grid) {
        Ok(r) => {
            rec.residual("crossed.constant-field", "constant-field", r, tol::CLOSURE);
        }
        Err(e) => rec.error("crossed.constant-field", "constant-field", e),
    }
    exterior(ctx, s, &bundle, &cp, rec);
}

/// The plain translation action and the dual action at the last grid point
/// are exterior equivalent through `u_k = w_k ⊗ 1`.
fn exterior(ctx: &Context, s: &FiniteSetup, bundle: &FellBundle, cp: &deform_core::crossed::CrossedProductAlgebra, rec: &mut Recorder) {
    let g = &s.group;
    let whole = g.whole();
    let witness = match s.real.opposite().coboundary_solve(&whole) {
        Ok(w) => w,
        Err(e) => return rec.error("crossed.exterior-equivalence", "exterior-equivalence", e),
    };
    let theta = *ctx.grid.last().expect("grid is nonempty");
    let omega = s.real.exp(theta);
    let big_n = bundle.ambient_dim();
    let one = linalg::identity(big_n);
    let rho: Vec<CMat> = g.elements().map(|k| kron(&right_translation(g, k), &one)).collect();
    let maps: Vec<_> = g.elements().map(|k| dual_action(bundle, &omega, k)).collect();
    let units: Vec<CMat> = g.elements().map(|k| kron(&w_unitary(&s.real, &witness, theta, k), &one)).collect();
    let plain = |k: usize, x: &CMat| conjugate_by(&rho[k], x);
    let twisted = |k: usize, x: &CMat| maps[k].apply(cp, x);
    let all: Vec<usize> = g.elements().collect();
    let r = exterior_equivalence_check(g, &all, &plain, &twisted, &|k| units[k].clone(), cp.basis());
    rec.verdict("crossed.exterior-equivalence", "exterior-equivalence", r.equivalent, r.equivalent);
    rec.detail("exterior-equivalence", &r);
}

fn signature_or_error(rec: &mut Recorder, name: &str, alg: &MatrixAlgebra, seed: u64) -> Option<deform_core::k0::K0Signature> {
    match block_decompose(alg, seed) {
        Ok(sig) => {
            rec.detail(name, &sig);
            Some(sig)
        }
        Err(e) => {
            rec.error(name, "k0-signature", e);
            None
        }
    }
}

pub fn k0_suite(ctx: &Context, s: &FiniteSetup, rec: &mut Recorder) {
    let source = MatrixAlgebra::from_bundle(&s.bundle);
    let deformed = match deform(&s.bundle, &s.cocycle) {
        Ok(a) => MatrixAlgebra::from_deformed(&a),
        Err(e) => return rec.error("k0.deformed", "k0-signature", e),
    };
    let Some(sa) = signature_or_error(rec, "k0.untwisted", &source, ctx.seed) else { return };
    rec.count("k0.untwisted-rank", "k0-signature", sa.rank as i64, true);
    let Some(sb) = signature_or_error(rec, "k0.deformed", &deformed, ctx.seed) else { return };
    rec.count("k0.deformed-rank", "k0-signature", sb.rank as i64, true);
    match k0_compare(&source, &deformed, ctx.seed) {
        Ok(c) => {
            let pass = ctx.expect.k0_isomorphic.is_none_or(|e| e == c.isomorphic);
            rec.verdict("k0.compare", "k0-comparison", c.isomorphic, pass);
        }
        Err(e) => rec.error("k0.compare", "k0-comparison", e),
    }
    match k0_along_path(&s.bundle, &s.real, &ctx.grid, ctx.seed) {
        Ok(p) => {
            let ok = p.ranks_constant && p.signatures.iter().all(|x| x.rank == sa.rank);
            rec.verdict("k0.path-invariance", "k0-invariance", ok, ok);
            let ranks: Vec<usize> = p.signatures.iter().map(|x| x.rank).collect();
            rec.detail("path.ranks", ranks);
        }
        Err(e) => rec.error("k0.path-invariance", "k0-invariance", e),
    }
    let (bundle, substituted) = fit_bundle(&s.bundle, MORITA_LIMIT);
    if substituted {
        rec.detail("morita.substitute", "trivially graded C");
    }
    let result = deform(&bundle, &s.cocycle)
        .map_err(|e| e.to_string())
        .and_then(|a| {
            let it = iterated_crossed_product(&bundle, &s.cocycle, ctx.seed).map_err(|e| e.to_string())?;
            let ok = morita_rank_check(&MatrixAlgebra::from_deformed(&a), it.algebra.algebra(), ctx.seed).map_err(|e| e.to_string())?;
            Ok((ok, it.covariance_residual))
        });
    match result {
        Ok((ok, cov)) => {
            rec.residual("k0.iterated-covariance", "morita-rank", cov, tol::CLOSURE);
            rec.verdict("k0.morita-rank", "morita-rank", ok, ok);
        }
        Err(e) => rec.error("k0.morita-rank", "morita-rank", e),
    }
}

/// Spectral projection of the Hermitian part of `x` above `cut`.
fn spectral_projection(x: &CMat, cut: f64) -> CMat {
    let h = (x + x.adjoint()).scale(0.5);
    let (vals, vecs) = hermitian_eigen(&h);
    let n = x.nrows();
    let mut p = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v > cut {
            let c = vecs.column(i);
            p += &c * c.adjoint();
        }
    }
    p
}

fn covariance(rec: &mut Recorder, name: &str, t: &EquivariantTriple) {
    match t.covariant_unitary() {
        Ok((_, c)) => {
            rec.residual(name, "covariance", c.coproduct_residual.max(c.coaction_residual).max(c.unitarity_residual), c.tolerance);
        }
        Err(e) => rec.error(name, "covariance", e),
    }
}

pub fn triple_suite(ctx: &Context, s: &FiniteSetup, rec: &mut Recorder) {
    let t = &s.triple.triple;
    rec.detail("label", &s.triple.label);
    covariance(rec, "triple.covariance", t);
    match t.deform(&s.cocycle) {
        Ok((td, r)) => {
            rec.residual("triple.restriction", "triple-deformation", r.restriction_residual, tol::CLOSURE);
            rec.verdict("triple.isospectral", "isospectrality", r.isospectral, r.isospectral);
            rec.detail("commutator-norms", &r.commutator_norms);
            covariance(rec, "triple.deformed-covariance", &td);
        }
        Err(e) => rec.error("triple.restriction", "triple-deformation", e),
    }
    if let Some(p) = &s.triple.projection {
        match index_pairing(t, p) {
            Ok(f) => {
                rec.count("triple.pairing", "index-pairing", f.index, true);
            }
            Err(e) => rec.error("triple.pairing", "index-pairing", e),
        }
    }
    let Some(rule) = &s.triple.rule else { return };
    let p = spectral_projection(&rule.element, rule.cut);
    let q = linalg::identity(p.nrows()) - &p;
    let unit = linalg::identity(p.nrows());
    match (index_pairing(t, &p), index_pairing(t, &q), index_pairing(t, &unit)) {
        (Ok(a), Ok(b), Ok(c)) => {
            let defect = a.index + b.index - c.index;
            rec.count("triple.index-additivity", "index-pairing", defect, defect == 0);
        }
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => rec.error("triple.index-additivity", "index-pairing", e),
    }
    match index_invariance_along_path(t, &s.real, &ctx.grid, rule) {
        Ok(path) => {
            let index = path.points.first().map_or(0, |p| p.index);
            rec.count("triple.index-path", "index-invariance", index, path.constant);
            rec.detail("index-path", &path);
        }
        Err(e) => rec.error("triple.index-path", "index-invariance", e),
    }
}

fn box_points(rank: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut pts = vec![vec![]];
    for _ in 0..rank {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (-radius..=radius).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    pts
}

pub fn free_cocycle_suite(s: &FreeSetup, rec: &mut Recorder) {
    let b = &s.cocycle;
    let radius = if b.rank() <= 2 { 2 } else { 1 };
    let pts = box_points(b.rank(), radius);
    let add = |x: &[i64], y: &[i64]| x.iter().zip(y).map(|(a, c)| a + c).collect::<Vec<_>>();
    let zero = vec![0; b.rank()];
    let mut identity: f64 = 0.0;
    let mut normalization: f64 = 0.0;
    for x in &pts {
        normalization = normalization.max((b.eval(&zero, x) - 1.0).norm()).max((b.eval(x, &zero) - 1.0).norm());
        for y in &pts {
            for z in &pts {
                let lhs = b.eval(x, y) * b.eval(&add(x, y), z);
                let rhs = b.eval(x, &add(y, z)) * b.eval(y, z);
                identity = identity.max((lhs - rhs).norm());
            }
        }
    }
    rec.residual("bilinear.cocycle-identity", "cocycle-identity", identity, tol::COCYCLE);
    rec.residual("bilinear.normalization", "cocycle-identity", normalization, tol::COCYCLE);
    rec.detail("box-radius", radius);
}

pub fn free_tga_suite(ctx: &Context, s: &FreeSetup, rec: &mut Recorder) {
    let r = s.group.rank();
    let alg = TwistedAlgebra::new(s.group.clone(), s.cocycle.clone());
    let units: Vec<_> = (0..r).map(|i| alg.delta(s.group.unit(i))).collect();
    let mut commutation: f64 = 0.0;
    let mut unitarity: f64 = 0.0;
    for i in 0..r {
        let ui = &units[i];
        let uu = ui.multiply(&ui.involute()).expect("same algebra");
        unitarity = unitarity.max(uu.distance(&alg.unit()));
        for j in 0..r {
            let (ei, ej) = (s.group.unit(i), s.group.unit(j));
            let c = s.cocycle.eval(&ei, &ej) * s.cocycle.eval(&ej, &ei).conj();
            let lhs = ui.multiply(&units[j]).expect("same algebra");
            let rhs = units[j].multiply(ui).expect("same algebra").scale(c);
            commutation = commutation.max(lhs.distance(&rhs));
        }
    }
    rec.residual("tga.commutation-relation", "commutation-relation", commutation, tol::COCYCLE);
    rec.residual("tga.unitarity", "twisted-relations", unitarity, tol::COCYCLE);
    let pts = box_points(r, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let random = |rng: &mut ChaCha8Rng| {
        let c = random_coeffs(rng, pts.len());
        alg.element(pts.iter().cloned().zip(c))
    };
    let mut assoc: f64 = 0.0;
    let mut trace: f64 = 0.0;
    for _ in 0..ORACLE_PAIRS {
        let (x, y, z) = (random(&mut rng), random(&mut rng), random(&mut rng));
        let xy = x.multiply(&y).expect("same algebra");
        let yz = y.multiply(&z).expect("same algebra");
        let l = xy.multiply(&z).expect("same algebra");
        let rr = x.multiply(&yz).expect("same algebra");
        assoc = assoc.max(l.distance(&rr));
        let yx = y.multiply(&x).expect("same algebra");
        trace = trace.max((xy.standard_trace() - yx.standard_trace()).norm());
    }
    rec.residual("tga.associativity", "twisted-relations", assoc, tol::CLOSURE);
    rec.residual("tga.trace-tracial", "standard-trace", trace, tol::CLOSURE);
}
