//! The deformation `A_ω` realized as the span of `Σ_g λ^(ω)_g ⊗ α^(g)(a)`
//! inside `M_{|Γ|}(ℂ) ⊗ M_N(ℂ)`, and the coefficient-level oracle for its
//! product and involution.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::cocycle::{CocycleError, TwoCocycleReal, TwoCocycleU1};
use crate::graded::{BundleError, FellBundle};
use crate::linalg::{
    self, conjugate_by, kron, max_abs, max_abs_diff, mul, on_legs, operator_norm, CMat, CVec,
    SpanCoords, C64, ZERO,
};
use crate::tol;
use crate::twisted::{delta_projection, fundamental_unitary, lambda_matrix};

/// Matrix models whose intertwining check would exceed this carrier size
/// (`|Γ|²N`) skip it.
pub const INTERTWINING_LIMIT: usize = 8192;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeformError {
    #[error("bundle and cocycle live on different groups")]
    GroupMismatch,
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("deformed span violates {what} (residual {residual:.3e})")]
    InvariantViolated { what: &'static str, residual: f64 },
}

/// Product and involution of an algebra in a fixed basis:
/// `a_i a_j = Σ_k c[i][j][k] a_k` and `a_i* = Σ_k s[i][k] a_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureConstants {
    dim: usize,
    product: Vec<C64>,
    involution: Vec<C64>,
}

impl StructureConstants {
    pub fn new(dim: usize, product: Vec<C64>, involution: Vec<C64>) -> Self {
        assert_eq!(product.len(), dim * dim * dim);
        assert_eq!(involution.len(), dim * dim);
        Self {
            dim,
            product,
            involution,
        }
    }

    /// Reads the constants off a span of matrices. Returns them with the
    /// worst closure and adjoint residuals.
    pub fn from_span(span: &SpanCoords) -> (Self, f64, f64) {
        let d = span.dim();
        let basis = span.basis();
        let mut product = Vec::with_capacity(d * d * d);
        let mut closure: f64 = 0.0;
        for a in basis {
            for b in basis {
                let ab = mul(a, b);
                let (c, r) = span.expand(&ab);
                closure = closure.max(r);
                product.extend(c.iter());
            }
        }
        let mut involution = Vec::with_capacity(d * d);
        let mut star: f64 = 0.0;
        for a in basis {
            let (c, r) = span.expand(&a.adjoint());
            star = star.max(r);
            involution.extend(c.iter());
        }
        (Self::new(d, product, involution), closure, star)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn product(&self, i: usize, j: usize, k: usize) -> C64 {
        self.product[(i * self.dim + j) * self.dim + k]
    }

    pub fn involution(&self, i: usize, k: usize) -> C64 {
        self.involution[i * self.dim + k]
    }

    /// Coefficients of `x·y`.
    pub fn multiply(&self, x: &CVec, y: &CVec) -> CVec {
        let d = self.dim;
        let mut out = CVec::zeros(d);
        for i in 0..d {
            if x[i] == ZERO {
                continue;
            }
            for j in 0..d {
                if y[j] == ZERO {
                    continue;
                }
                let s = x[i] * y[j];
                for k in 0..d {
                    out[k] += s * self.product(i, j, k);
                }
            }
        }
        out
    }

    /// Coefficients of `x*`.
    pub fn adjoint(&self, x: &CVec) -> CVec {
        let d = self.dim;
        let mut out = CVec::zeros(d);
        for i in 0..d {
            if x[i] != ZERO {
                for k in 0..d {
                    out[k] += x[i].conj() * self.involution(i, k);
                }
            }
        }
        out
    }

    fn unit(&self, i: usize) -> CVec {
        let mut v = CVec::zeros(self.dim);
        v[i] = linalg::ONE;
        v
    }

    /// `max |(a_i a_j) a_l − a_i (a_j a_l)|` over all basis triples.
    pub fn associativity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let ij = self.multiply(&self.unit(i), &self.unit(j));
                for l in 0..d {
                    let left = self.multiply(&ij, &self.unit(l));
                    let jl = self.multiply(&self.unit(j), &self.unit(l));
                    let right = self.multiply(&self.unit(i), &jl);
                    worst = worst.max((left - right).camax());
                }
            }
        }
        worst
    }

    /// `max |(a_i*)* − a_i|` and `max |(a_i a_j)* − a_j* a_i*|`.
    pub fn involution_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            let twice = self.adjoint(&self.adjoint(&self.unit(i)));
            worst = worst.max((twice - self.unit(i)).camax());
            for j in 0..d {
                let lhs = self.adjoint(&self.multiply(&self.unit(i), &self.unit(j)));
                let rhs = self.multiply(&self.adjoint(&self.unit(j)), &self.adjoint(&self.unit(i)));
                worst = worst.max((lhs - rhs).camax());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "structure constants of different dimensions");
        self.product
            .iter()
            .zip(&other.product)
            .chain(self.involution.iter().zip(&other.involution))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.product
            .iter()
            .chain(&self.involution)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Hex digest of the constants rounded to 1e-9, for reports.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for z in self.product.iter().chain(&self.involution) {
            for part in [z.re, z.im] {
                let q = (part * 1e9).round() as i64;
                for byte in q.to_le_bytes() {
                    h ^= u64::from(byte);
                    h = h.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
        format!("{h:016x}")
    }
}

/// Source structure constants of a bundle in its own basis.
pub fn bundle_structure_constants(bundle: &FellBundle) -> StructureConstants {
    StructureConstants::from_span(bundle.coords()).0
}

/// `Σ_{g,h} ω(g,h) (α^(g)(x) α^(h)(y))^(ω)` on coefficient vectors.
pub fn twisted_product(bundle: &FellBundle, source: &StructureConstants, omega: &TwoCocycleU1, x: &CVec, y: &CVec) -> CVec {
    let grp = bundle.group();
    let mut out = CVec::zeros(bundle.len());
    for g in grp.elements() {
        let xg = bundle.component_coeffs(x, g);
        if xg.iter().all(|z| *z == ZERO) {
            continue;
        }
        for h in grp.elements() {
            let yh = bundle.component_coeffs(y, h);
            if yh.iter().all(|z| *z == ZERO) {
                continue;
            }
            out += source.multiply(&xg, &yh) * omega.value(g, h);
        }
    }
    out
}

/// `Σ_g ω(g,g⁻¹)̄ (α^(g)(x)*)^(ω)` on coefficient vectors.
pub fn twisted_involution(bundle: &FellBundle, source: &StructureConstants, omega: &TwoCocycleU1, x: &CVec) -> CVec {
    let grp = bundle.group();
    let mut out = CVec::zeros(bundle.len());
    for g in grp.elements() {
        let xg = bundle.component_coeffs(x, g);
        if xg.iter().any(|z| *z != ZERO) {
            out += source.adjoint(&xg) * omega.value(g, grp.inv(g)).conj();
        }
    }
    out
}

/// Structure constants of `A_ω` from the twisted formulas alone, never
/// forming the `|Γ|N`-dimensional matrices.
pub fn twisted_structure_constants(bundle: &FellBundle, omega: &TwoCocycleU1) -> Result<StructureConstants, DeformError> {
    if bundle.group() != omega.group() {
        return Err(DeformError::GroupMismatch);
    }
    let source = bundle_structure_constants(bundle);
    let d = bundle.len();
    let unit = |i: usize| {
        let mut v = CVec::zeros(d);
        v[i] = linalg::ONE;
        v
    };
    let mut product = Vec::with_capacity(d * d * d);
    for i in 0..d {
        for j in 0..d {
            product.extend(twisted_product(bundle, &source, omega, &unit(i), &unit(j)).iter());
        }
    }
    let mut involution = Vec::with_capacity(d * d);
    for i in 0..d {
        involution.extend(twisted_involution(bundle, &source, omega, &unit(i)).iter());
    }
    Ok(StructureConstants::new(d, product, involution))
}

/// `d_ω(a) = Σ_g λ^(ω)_g ⊗ α^(g)(a)`.
pub fn embed(bundle: &FellBundle, omega: &TwoCocycleU1, a: &CMat) -> Result<CMat, DeformError> {
    if bundle.group() != omega.group() {
        return Err(DeformError::GroupMismatch);
    }
    let parts = bundle.components(a)?;
    let n = bundle.group().order() * bundle.ambient_dim();
    let mut out = CMat::zeros(n, n);
    for (g, part) in parts.iter().enumerate() {
        if max_abs(part) > 0.0 {
            out += kron(&lambda_matrix(omega, g), part);
        }
    }
    Ok(out)
}

/// Residual of the membership condition for `A′_ω`:
/// `(ι⊗α)(x)` with legs 1 and 2 exchanged against `W^(ω)₁₂ x₁₃ W^(ω)*₁₂`.
///
/// Both sides are assembled entry by entry on `ℓ²(Γ)⊗ℓ²(Γ)⊗ℂ^N`; only
/// nonzero entries are stored.
pub fn intertwining_residual(bundle: &FellBundle, omega: &TwoCocycleU1, x: &CMat) -> Result<f64, DeformError> {
    let grp = bundle.group();
    let n = grp.order();
    let big_n = bundle.ambient_dim();
    let index = |a: usize, b: usize, i: usize| (a * n + b) * big_n + i;
    let mut diff: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    for p in 0..n {
        for q in 0..n {
            let part = x.view((p * big_n, q * big_n), (big_n, big_n)).into_owned();
            if max_abs(&part) == 0.0 {
                continue;
            }
            // lhs: λ_g ⊗ part_g sits at (g·h, p, i), (h, q, j) after the leg swap
            for (g, comp) in bundle.components(&part)?.iter().enumerate() {
                for (i, j) in nonzero_positions(comp) {
                    for h in 0..n {
                        *diff.entry((index(grp.mul(g, h), p, i), index(h, q, j))).or_insert(ZERO) += comp[(i, j)];
                    }
                }
            }
            // rhs: W₁₂ sends (a, k, i) to (a, a·k, i) with phase ω(a, k)
            for (i, j) in nonzero_positions(&part) {
                for k in 0..n {
                    let v = omega.value(p, k) * part[(i, j)] * omega.value(q, k).conj();
                    *diff.entry((index(p, grp.mul(p, k), i), index(q, grp.mul(q, k), j))).or_insert(ZERO) -= v;
                }
            }
        }
    }
    let worst = diff.values().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    Ok(worst / max_abs(x).max(1.0))
}

fn nonzero_positions(m: &CMat) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != ZERO {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformReport {
    pub closure_residual: f64,
    pub star_residual: f64,
    pub unit_residual: f64,
    /// `None` when the carrier exceeds [`INTERTWINING_LIMIT`].
    pub intertwining_residual: Option<f64>,
    /// `max_i | ‖d_ω(b_i)‖ − ‖b_i‖ |`.
    pub norm_residual: f64,
    pub min_pivot: f64,
}

#[derive(Debug, Clone)]
pub struct DeformedAlgebra {
    source: FellBundle,
    cocycle: TwoCocycleU1,
    coords: SpanCoords,
    constants: StructureConstants,
    report: DeformReport,
}

/// Builds `A′_ω` from the images of the source basis and verifies its invariants.
pub fn deform(bundle: &FellBundle, omega: &TwoCocycleU1) -> Result<DeformedAlgebra, DeformError> {
    if bundle.group() != omega.group() {
        return Err(DeformError::GroupMismatch);
    }
    let basis: Vec<CMat> = bundle
        .basis()
        .iter()
        .zip(bundle.degrees())
        .map(|(b, &g)| kron(&lambda_matrix(omega, g), b))
        .collect();
    let coords = SpanCoords::new(basis, tol::INDEPENDENCE).map_err(|_| DeformError::InvariantViolated {
        what: "injectivity",
        residual: f64::INFINITY,
    })?;
    let (constants, closure_residual, star_residual) = StructureConstants::from_span(&coords);
    let n = coords.shape().0;
    let unit_residual = coords.residual(&linalg::identity(n));
    let n_grp = bundle.group().order();
    let intertwining = if n_grp * n <= INTERTWINING_LIMIT {
        let mut worst: f64 = 0.0;
        for x in coords.basis() {
            worst = worst.max(intertwining_residual(bundle, omega, x)?);
        }
        Some(worst)
    } else {
        None
    };
    let norm_residual = bundle
        .basis()
        .iter()
        .zip(coords.basis())
        .map(|(b, d)| (operator_norm(b) - operator_norm(d)).abs())
        .fold(0.0, f64::max);
    let report = DeformReport {
        closure_residual,
        star_residual,
        unit_residual,
        intertwining_residual: intertwining,
        norm_residual,
        min_pivot: coords.min_pivot(),
    };
    for (what, r) in [
        ("closure under products", closure_residual),
        ("closure under adjoints", star_residual),
        ("unitality", unit_residual),
        ("the intertwining relation", intertwining.unwrap_or(0.0)),
        ("norm preservation", norm_residual),
    ] {
        if r > tol::CLOSURE {
            return Err(DeformError::InvariantViolated { what, residual: r });
        }
    }
    Ok(DeformedAlgebra {
        source: bundle.clone(),
        cocycle: omega.clone(),
        coords,
        constants,
        report,
    })
}

impl DeformedAlgebra {
    pub fn source(&self) -> &FellBundle {
        &self.source
    }

    pub fn cocycle(&self) -> &TwoCocycleU1 {
        &self.cocycle
    }

    /// `d_ω(b_i)`, one per source basis element.
    pub fn basis(&self) -> &[CMat] {
        self.coords.basis()
    }

    pub fn coords(&self) -> &SpanCoords {
        &self.coords
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.constants
    }

    pub fn report(&self) -> &DeformReport {
        &self.report
    }

    /// `d_ω(a)` for `a` in the source algebra.
    pub fn embed(&self, a: &CMat) -> Result<CMat, DeformError> {
        embed(&self.source, &self.cocycle, a)
    }

    /// `A_ω` as a bundle on `ℂ^{|Γ|N}`, `d_ω(b)` keeping the degree of `b`.
    pub fn as_bundle(&self) -> Result<FellBundle, DeformError> {
        Ok(FellBundle::new(
            self.source.group(),
            self.basis().to_vec(),
            self.source.degrees().to_vec(),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateReport {
    /// `(A_ω)_η` against `A_{ωη}`.
    pub iterated_residual: f64,
    /// `(A_ω)_η` against the coefficient oracle for `ωη`.
    pub oracle_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the deformation of `A_ω` (graded by source degrees) by `η`
/// with the single deformation by `ω·η`.
pub fn iterate_check(bundle: &FellBundle, omega: &TwoCocycleU1, eta: &TwoCocycleU1) -> Result<IterateReport, DeformError> {
    let product = omega.product(eta)?;
    let once = deform(bundle, omega)?;
    let twice = deform(&once.as_bundle()?, eta)?;
    let direct = deform(bundle, &product)?;
    let oracle = twisted_structure_constants(bundle, &product)?;
    let iterated_residual = twice.structure_constants().max_abs_diff(direct.structure_constants());
    let oracle_residual = twice.structure_constants().max_abs_diff(&oracle);
    Ok(IterateReport {
        iterated_residual,
        oracle_residual,
        tolerance: tol::CLOSURE,
        passed: iterated_residual.max(oracle_residual) <= tol::CLOSURE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraidedReport {
    /// `W^(ω̄)₁₃ α(b)₁₂ W^(ω̄)*₁₃` against `Σ_g λ^(ω)_g ⊗ α^(g)(b) ⊗ λ^(ω̄)_g`.
    pub coaction_residual: f64,
    /// `W^(ω̄)₁₃ Ãd^(ω̄)(y)₁₃ W^(ω̄)*₁₃` against `1 ⊗ 1 ⊗ y`.
    pub adjoint_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Conjugates the two generator families of the braided picture on
/// `ℓ²(Γ) ⊗ ℂ^N ⊗ ℓ²(Γ)` by `W^(ω̄)₁₃` and compares with their images.
pub fn braided_model_check(bundle: &FellBundle, omega: &TwoCocycleU1) -> Result<BraidedReport, DeformError> {
    if bundle.group() != omega.group() {
        return Err(DeformError::GroupMismatch);
    }
    let grp = bundle.group();
    let n = grp.order();
    let big_n = bundle.ambient_dim();
    let dims = [n, big_n, n];
    let bar = omega.conjugate();
    let w13 = on_legs(&dims, &fundamental_unitary(&bar), &[0, 2]);
    let w13_adj = w13.adjoint();
    let conj = |x: &CMat| mul(&mul(&w13, x), &w13_adj);
    let mut coaction_residual: f64 = 0.0;
    for b in bundle.basis() {
        let alpha = bundle.coaction_matrix(b)?;
        let image = conj(&kron(&alpha, &linalg::identity(n)));
        let parts = bundle.components(b)?;
        let mut expected = CMat::zeros(n * big_n * n, n * big_n * n);
        for (g, part) in parts.iter().enumerate() {
            if max_abs(part) > 0.0 {
                expected += kron(&kron(&lambda_matrix(omega, g), part), &lambda_matrix(&bar, g));
            }
        }
        coaction_residual = coaction_residual.max(max_abs_diff(&image, &expected));
    }
    let bar_lambdas: Vec<CMat> = grp.elements().map(|g| lambda_matrix(&bar, g)).collect();
    let mut adjoint_residual: f64 = 0.0;
    for y in &bar_lambdas {
        // Σ_h δ_h ⊗ λ̄_{h⁻¹} y λ̄_{h⁻¹}*
        let mut ad = CMat::zeros(n * n, n * n);
        for h in grp.elements() {
            let inner = conjugate_by(&bar_lambdas[grp.inv(h)], y);
            ad += kron(&delta_projection(grp, h), &inner);
        }
        let image = conj(&on_legs(&dims, &ad, &[0, 2]));
        let expected = on_legs(&dims, y, &[2]);
        adjoint_residual = adjoint_residual.max(max_abs_diff(&image, &expected));
    }
    Ok(BraidedReport {
        coaction_residual,
        adjoint_residual,
        tolerance: tol::CLOSURE,
        passed: coaction_residual.max(adjoint_residual) <= tol::CLOSURE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathReport {
    pub thetas: Vec<f64>,
    pub digests: Vec<String>,
    /// `‖SC(θ_{k+1}) − SC(θ_k)‖_∞`.
    pub adjacent_differences: Vec<f64>,
    /// `max|ω₀| · |θ_{k+1} − θ_k| · ‖SC(A)‖_∞ + tol`.
    pub lipschitz_bounds: Vec<f64>,
    /// `‖SC(A)‖_∞`, the basis-dependent constant in the bounds.
    pub source_sup_norm: f64,
    pub passed: bool,
}

/// Deforms along `ω_θ = e^{iθω₀}` and checks the Lipschitz bound between
/// neighbouring grid points.
pub fn deform_path(
    bundle: &FellBundle,
    omega0: &TwoCocycleReal,
    grid: &[f64],
) -> Result<(Vec<DeformedAlgebra>, PathReport), DeformError> {
    if bundle.group() != omega0.group() {
        return Err(DeformError::GroupMismatch);
    }
    let fibers: Vec<DeformedAlgebra> = grid
        .iter()
        .map(|&t| deform(bundle, &omega0.exp(t)))
        .collect::<Result<_, _>>()?;
    let source_sup_norm = bundle_structure_constants(bundle).sup_norm();
    let mut adjacent_differences = Vec::new();
    let mut lipschitz_bounds = Vec::new();
    for k in 1..fibers.len() {
        adjacent_differences.push(
            fibers[k]
                .structure_constants()
                .max_abs_diff(fibers[k - 1].structure_constants()),
        );
        lipschitz_bounds.push(omega0.max_abs() * (grid[k] - grid[k - 1]).abs() * source_sup_norm + tol::CLOSURE);
    }
    let passed = adjacent_differences.iter().zip(&lipschitz_bounds).all(|(d, b)| d <= b);
    let report = PathReport {
        thetas: grid.to_vec(),
        digests: fibers.iter().map(|f| f.structure_constants().digest()).collect(),
        adjacent_differences,
        lipschitz_bounds,
        source_sup_norm,
        passed,
    };
    Ok((fibers, report))
}

/// Residual of `d_ω(b) ↦ ψ(deg b)̄ d_{ω′}(b)` as a structure-constant
/// isomorphism, where `ω′` is `ω` transported by `ψ`.
pub fn transport_residual(bundle: &FellBundle, omega: &TwoCocycleU1, psi: &[C64]) -> Result<f64, DeformError> {
    let moved = omega.transport(psi)?;
    let source = deform(bundle, omega)?;
    let target = deform(bundle, &moved)?;
    let rescaled: Vec<CMat> = target
        .basis()
        .iter()
        .zip(bundle.degrees())
        .map(|(d, &g)| d * psi[g].conj())
        .collect();
    let span = SpanCoords::new(rescaled, tol::INDEPENDENCE).map_err(|_| DeformError::InvariantViolated {
        what: "injectivity",
        residual: f64::INFINITY,
    })?;
    let (sc, _, _) = StructureConstants::from_span(&span);
    Ok(sc.max_abs_diff(source.structure_constants()))
}
