//! Crossed products by `C₀(Γ)`, the untwisting unitary `V`, dual actions,
//! the unitaries `v_k` and `w_k`, and exterior equivalence.
//!
//! The crossed product `C₀(Γ) ⋉_α A` acts on `ℓ²(Γ) ⊗ ℂ^N` with basis
//! `E(i, h) = α(b_i)(δ_h ⊗ 1)`, stored at index `i·|Γ| + h`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cocycle::{CoboundaryWitness, CocycleError, TwoCocycleReal, TwoCocycleU1};
use crate::deform::DeformError;
use crate::graded::{BundleError, FellBundle};
use crate::group::{FiniteGroup, Subgroup};
use crate::k0::{K0Error, MatrixAlgebra};
use crate::linalg::{self, conjugate_by, kron, max_abs, max_abs_diff, mul, CMat, CVec, SpanCoords, C64, ONE};
use crate::tol;
use crate::twisted::{delta_projection, lambda_matrix, left_regular, multiplication_operator, right_translation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossedError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Algebra(#[from] K0Error),
    #[error("bundle and cocycle live on different groups")]
    GroupMismatch,
    #[error("coboundary witness does not solve the opposite cocycle on the subgroup (residual {residual:.3e})")]
    WitnessInvalid { residual: f64 },
}

#[derive(Debug, Clone)]
pub struct CrossedProductAlgebra {
    leg_dims: Vec<usize>,
    algebra: MatrixAlgebra,
    closure_residual: f64,
    partition_residual: f64,
    projection_residual: f64,
}

impl CrossedProductAlgebra {
    /// Tensor-leg dimensions of the carrier.
    pub fn leg_dims(&self) -> &[usize] {
        &self.leg_dims
    }

    pub fn carrier_dim(&self) -> usize {
        self.leg_dims.iter().product()
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn basis(&self) -> &[CMat] {
        self.algebra.basis()
    }

    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// `|Σ_h (δ_h)₁ − 1|`.
    pub fn partition_residual(&self) -> f64 {
        self.partition_residual
    }

    /// Worst span residual of the projections `(δ_h)₁`.
    pub fn projection_residual(&self) -> f64 {
        self.projection_residual
    }
}

fn first_leg_projections(group: &FiniteGroup, rest: usize) -> Vec<CMat> {
    group
        .elements()
        .map(|h| kron(&delta_projection(group, h), &linalg::identity(rest)))
        .collect()
}

/// Basis `E(i, h) = α(b_i)(δ_h)₁` of `C₀(Γ) ⋉_α A`.
fn crossed_basis(bundle: &FellBundle) -> Vec<CMat> {
    let grp = bundle.group();
    let projections = first_leg_projections(grp, bundle.ambient_dim());
    let mut basis = Vec::with_capacity(bundle.len() * grp.order());
    for (b, &g) in bundle.basis().iter().zip(bundle.degrees()) {
        let alpha = kron(&left_regular(grp, g), b);
        for p in &projections {
            basis.push(mul(&alpha, p));
        }
    }
    basis
}

/// `C₀(Γ) ⋉_α A` on `ℓ²(Γ) ⊗ ℂ^N`, generated by `(δ_h)₁` and `α(a)`.
pub fn crossed_product(bundle: &FellBundle, seed: u64) -> Result<CrossedProductAlgebra, CrossedError> {
    let grp = bundle.group();
    let projections = first_leg_projections(grp, bundle.ambient_dim());
    let mut generators = projections.clone();
    for b in bundle.basis() {
        generators.push(bundle.coaction_matrix(b)?);
    }
    let algebra = MatrixAlgebra::with_generators(crossed_basis(bundle), generators)?;
    let closure_residual = algebra.closure_residual(seed);
    let n = algebra.size();
    let total = projections.iter().fold(CMat::zeros(n, n), |acc, p| acc + p);
    let partition_residual = max_abs_diff(&total, &linalg::identity(n));
    let projection_residual = projections
        .iter()
        .map(|p| algebra.coords().residual(p))
        .fold(0.0, f64::max);
    Ok(CrossedProductAlgebra {
        leg_dims: vec![grp.order(), bundle.ambient_dim()],
        algebra,
        closure_residual,
        partition_residual,
        projection_residual,
    })
}

/// `V(δ_k ⊗ δ_{k′}) = ω̄(k⁻¹,k) ω(k⁻¹,k′) δ_k ⊗ δ_{k′}` on `ℓ²(Γ) ⊗ ℓ²(Γ)`.
pub fn untwisting_unitary(omega: &TwoCocycleU1) -> CMat {
    let grp = omega.group();
    let n = grp.order();
    multiplication_operator(
        |idx| {
            let (k, kp) = (idx / n, idx % n);
            let kinv = grp.inv(k);
            omega.value(kinv, k).conj() * omega.value(kinv, kp)
        },
        n * n,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UntwistReport {
    /// `Ad_{V₁₂}` on `α_ω(b_i)(δ_h)₁` against `ω(g_i,h)(λ_g ⊗ λ_g ⊗ b_i)(δ_h)₁`.
    pub formula_residual: f64,
    /// Span residual of the images inside the untwisted crossed product.
    pub span_residual: f64,
    /// The coefficient map on products of generator pairs.
    pub homomorphism_residual: f64,
    /// The coefficient map on adjoints of generators.
    pub adjoint_residual: f64,
    pub unitarity_residual: f64,
    /// Largest deviation of an extracted image coefficient from `ω(g, h)`.
    pub coefficient_residual: f64,
    pub twisted_dim: usize,
    pub untwisted_dim: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Verifies that `Φ = Ad_{V₁₂}` carries the twisted crossed product
/// `C₀(Γ) ⋉ A_ω` on `ℓ²(Γ) ⊗ ℓ²(Γ) ⊗ ℂ^N` onto the untwisted one.
pub fn untwist_isomorphism(bundle: &FellBundle, omega: &TwoCocycleU1) -> Result<(CMat, UntwistReport), CrossedError> {
    let grp = bundle.group();
    if grp != omega.group() {
        return Err(CrossedError::GroupMismatch);
    }
    let n = grp.order();
    let big_n = bundle.ambient_dim();
    let rest = n * big_n;
    let v = untwisting_unitary(omega);
    let v12 = kron(&v, &linalg::identity(big_n));
    let v12_adj = v12.adjoint();
    let projections = first_leg_projections(grp, rest);
    let trivial = TwoCocycleU1::trivial(grp);
    // α_ω(b) = (ι ⊗ d_ω)... realized as λ_g ⊗ λ^(ω)_g ⊗ b for homogeneous b
    let twisted_gens: Vec<CMat> = bundle
        .basis()
        .iter()
        .zip(bundle.degrees())
        .map(|(b, &g)| kron(&left_regular(grp, g), &kron(&lambda_matrix(omega, g), b)))
        .collect();
    let plain_gens: Vec<CMat> = bundle
        .basis()
        .iter()
        .zip(bundle.degrees())
        .map(|(b, &g)| kron(&left_regular(grp, g), &kron(&lambda_matrix(&trivial, g), b)))
        .collect();
    let mut twisted_basis = Vec::with_capacity(bundle.len() * n);
    let mut plain_basis = Vec::with_capacity(bundle.len() * n);
    for (t, u) in twisted_gens.iter().zip(&plain_gens) {
        for p in &projections {
            twisted_basis.push(mul(t, p));
            plain_basis.push(mul(u, p));
        }
    }
    // coefficient of E(i,h) under the formula map
    let coef = |idx: usize| omega.value(bundle.degree(idx / n), idx % n);
    let mut formula_residual: f64 = 0.0;
    let mut coefficient_residual: f64 = 0.0;
    let mut images = Vec::with_capacity(twisted_basis.len());
    for (idx, (t, u)) in twisted_basis.iter().zip(&plain_basis).enumerate() {
        let image = mul(&mul(&v12, t), &v12_adj);
        formula_residual = formula_residual.max(max_abs_diff(&image, &(u * coef(idx))));
        // read the coefficient off the largest entry of the untwisted element
        let (pos, _) = u.iter().enumerate().fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        let extracted = image.as_slice()[pos] / u.as_slice()[pos];
        coefficient_residual = coefficient_residual.max((extracted - coef(idx)).norm());
        images.push(image);
    }
    let twisted_span = SpanCoords::new(twisted_basis, tol::INDEPENDENCE).map_err(K0Error::from)?;
    let plain_span = SpanCoords::new(plain_basis, tol::INDEPENDENCE).map_err(K0Error::from)?;
    let span_residual = images.iter().map(|m| plain_span.residual(m)).fold(0.0, f64::max);
    let phi = |x: &CMat| -> CMat {
        let c = twisted_span.coords(x);
        let mapped = CVec::from_iterator(c.len(), c.iter().enumerate().map(|(i, z)| z * coef(i)));
        plain_span.combine(&mapped)
    };
    let mut generators: Vec<CMat> = projections.clone();
    generators.extend(twisted_gens.iter().cloned());
    let mut homomorphism_residual: f64 = 0.0;
    let mut adjoint_residual: f64 = 0.0;
    let images_of_gens: Vec<CMat> = generators.iter().map(phi).collect();
    for (x, px) in generators.iter().zip(&images_of_gens) {
        for (y, py) in generators.iter().zip(&images_of_gens) {
            let lhs = phi(&mul(x, y));
            homomorphism_residual = homomorphism_residual.max(max_abs_diff(&lhs, &mul(px, py)));
        }
        adjoint_residual = adjoint_residual.max(max_abs_diff(&phi(&x.adjoint()), &px.adjoint()));
    }
    let unitarity_residual = linalg::unitarity_residual(&v);
    let worst = formula_residual
        .max(span_residual)
        .max(homomorphism_residual)
        .max(adjoint_residual)
        .max(unitarity_residual);
    let report = UntwistReport {
        formula_residual,
        span_residual,
        homomorphism_residual,
        adjoint_residual,
        unitarity_residual,
        coefficient_residual,
        twisted_dim: twisted_span.dim(),
        untwisted_dim: plain_span.dim(),
        tolerance: tol::CLOSURE,
        passed: worst <= tol::CLOSURE && twisted_span.dim() == plain_span.dim(),
    };
    Ok((v, report))
}

/// `v_k = (Σ_g ω(gk,k⁻¹) δ_g) ρ_k`.
pub fn v_unitary(omega: &TwoCocycleU1, k: usize) -> CMat {
    let grp = omega.group();
    let kinv = grp.inv(k);
    let diag = multiplication_operator(|g| omega.value(grp.mul(g, k), kinv), grp.order());
    mul(&diag, &right_translation(grp, k))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VReport {
    /// `Ad_{v_k}(λ_g δ_h)` against `ω(gh,k⁻¹) ω̄(h,k⁻¹) λ_g δ_{hk⁻¹}`.
    pub conjugation_residual: f64,
    /// `v_k v_{k′}` against `ω(k′⁻¹,k⁻¹) v_{kk′}`.
    pub multiplicativity_residual: f64,
    pub unitarity_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn v_multiplicativity_check(omega: &TwoCocycleU1) -> VReport {
    let grp = omega.group();
    let vs: Vec<CMat> = grp.elements().map(|k| v_unitary(omega, k)).collect();
    let lambdas: Vec<CMat> = grp.elements().map(|g| left_regular(grp, g)).collect();
    let deltas: Vec<CMat> = grp.elements().map(|h| delta_projection(grp, h)).collect();
    let mut conjugation_residual: f64 = 0.0;
    let mut multiplicativity_residual: f64 = 0.0;
    let mut unitarity_residual: f64 = 0.0;
    for k in grp.elements() {
        let kinv = grp.inv(k);
        unitarity_residual = unitarity_residual.max(linalg::unitarity_residual(&vs[k]));
        for g in grp.elements() {
            for h in grp.elements() {
                let lhs = conjugate_by(&vs[k], &mul(&lambdas[g], &deltas[h]));
                let c = omega.value(grp.mul(g, h), kinv) * omega.value(h, kinv).conj();
                let rhs = mul(&lambdas[g], &deltas[grp.mul(h, kinv)]) * c;
                conjugation_residual = conjugation_residual.max(max_abs_diff(&lhs, &rhs));
            }
        }
        for kp in grp.elements() {
            let lhs = mul(&vs[k], &vs[kp]);
            let rhs = &vs[grp.mul(k, kp)] * omega.value(grp.inv(kp), kinv);
            multiplicativity_residual = multiplicativity_residual.max(max_abs_diff(&lhs, &rhs));
        }
    }
    let worst = conjugation_residual.max(multiplicativity_residual).max(unitarity_residual);
    VReport {
        conjugation_residual,
        multiplicativity_residual,
        unitarity_residual,
        tolerance: tol::COCYCLE,
        passed: worst <= tol::COCYCLE,
    }
}

/// The dual action `(α̂_ω)_k` on the basis `E(i, h)`: a phase times a
/// permutation, `E(i,h) ↦ ω(g_i, hk⁻¹) ω̄(g_i, h) E(i, hk⁻¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualActionMap {
    pub k: usize,
    pub target: Vec<usize>,
    pub phase: Vec<C64>,
}

impl DualActionMap {
    pub fn apply_coords(&self, c: &CVec) -> CVec {
        let mut out = CVec::zeros(c.len());
        for (i, z) in c.iter().enumerate() {
            out[self.target[i]] += z * self.phase[i];
        }
        out
    }

    pub fn apply(&self, cp: &CrossedProductAlgebra, x: &CMat) -> CMat {
        let coords = cp.algebra().coords();
        coords.combine(&self.apply_coords(&coords.coords(x)))
    }
}

pub fn dual_action(bundle: &FellBundle, omega: &TwoCocycleU1, k: usize) -> DualActionMap {
    let grp = bundle.group();
    let n = grp.order();
    let kinv = grp.inv(k);
    let mut target = Vec::with_capacity(bundle.len() * n);
    let mut phase = Vec::with_capacity(bundle.len() * n);
    for i in 0..bundle.len() {
        let g = bundle.degree(i);
        for h in grp.elements() {
            let hk = grp.mul(h, kinv);
            target.push(i * n + hk);
            phase.push(omega.value(g, hk) * omega.value(g, h).conj());
        }
    }
    DualActionMap { k, target, phase }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualActionReport {
    pub automorphism_residual: f64,
    pub adjoint_residual: f64,
    pub composition_residual: f64,
    /// `Ad((v_k)₁)` against the coefficient formula on every basis element.
    pub vk_residual: f64,
    /// Orders of the maps `(α̂_ω)_k`.
    pub periods: Vec<usize>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks that every `(α̂_ω)_k` is a *-automorphism, that they compose by
/// the group law, and that `Ad((v_k)₁)` implements them.
pub fn dual_action_check(bundle: &FellBundle, omega: &TwoCocycleU1, cp: &CrossedProductAlgebra) -> DualActionReport {
    let grp = bundle.group();
    let coords = cp.algebra().coords();
    let basis = coords.basis();
    let d = basis.len();
    let maps: Vec<DualActionMap> = grp.elements().map(|k| dual_action(bundle, omega, k)).collect();
    let products: Vec<Vec<CVec>> = basis
        .iter()
        .map(|a| basis.iter().map(|b| coords.coords_of_product(a, b)).collect())
        .collect();
    let adjoints: Vec<CVec> = basis.iter().map(|a| coords.coords(&a.adjoint())).collect();
    let mut automorphism_residual: f64 = 0.0;
    let mut adjoint_residual: f64 = 0.0;
    let mut vk_residual: f64 = 0.0;
    let big_n = bundle.ambient_dim();
    for m in &maps {
        for a in 0..d {
            for b in 0..d {
                let lhs = m.apply_coords(&products[a][b]);
                let rhs = &products[m.target[a]][m.target[b]] * (m.phase[a] * m.phase[b]);
                automorphism_residual = automorphism_residual.max((lhs - rhs).camax());
            }
            let lhs = m.apply_coords(&adjoints[a]);
            let rhs = &adjoints[m.target[a]] * m.phase[a].conj();
            adjoint_residual = adjoint_residual.max((lhs - rhs).camax());
        }
        let v1 = kron(&v_unitary(omega, m.k), &linalg::identity(big_n));
        for (a, e) in basis.iter().enumerate() {
            let image = conjugate_by(&v1, e);
            vk_residual = vk_residual.max(max_abs_diff(&image, &(&basis[m.target[a]] * m.phase[a])));
        }
    }
    let mut composition_residual: f64 = 0.0;
    for k in grp.elements() {
        for kp in grp.elements() {
            let kk = &maps[grp.mul(k, kp)];
            for a in 0..d {
                // (α̂_k ∘ α̂_{k′})(E_a)
                let mid = maps[kp].target[a];
                let phase = maps[kp].phase[a] * maps[k].phase[mid];
                let target = maps[k].target[mid];
                if target != kk.target[a] {
                    composition_residual = f64::INFINITY;
                } else {
                    composition_residual = composition_residual.max((phase - kk.phase[a]).norm());
                }
            }
        }
    }
    let periods = grp
        .elements()
        .map(|k| {
            let mut power = 1;
            let mut current = maps[k].clone();
            while !(current.target.iter().enumerate().all(|(i, &t)| t == i)
                && current.phase.iter().all(|p| (p - ONE).norm() <= tol::COCYCLE))
            {
                let next = &maps[k];
                let target: Vec<usize> = (0..d).map(|a| next.target[current.target[a]]).collect();
                let phase: Vec<C64> = (0..d).map(|a| current.phase[a] * next.phase[current.target[a]]).collect();
                current = DualActionMap { k, target, phase };
                power += 1;
            }
            power
        })
        .collect();
    let worst = automorphism_residual
        .max(adjoint_residual)
        .max(composition_residual)
        .max(vk_residual);
    DualActionReport {
        automorphism_residual,
        adjoint_residual,
        composition_residual,
        vk_residual,
        periods,
        tolerance: tol::CLOSURE,
        passed: worst <= tol::CLOSURE,
    }
}

/// `(w_k)_θ = e^{−iθφ(k)} Σ_g ω_θ(gk,k⁻¹) δ_g`.
pub fn w_unitary(omega0: &TwoCocycleReal, witness: &CoboundaryWitness, theta: f64, k: usize) -> CMat {
    let grp = omega0.group();
    let omega = omega0.exp(theta);
    let kinv = grp.inv(k);
    let scalar = linalg::phase(-theta * witness.phi(k));
    multiplication_operator(|g| scalar * omega.value(grp.mul(g, k), kinv), grp.order())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WPoint {
    pub theta: f64,
    /// `w_k ρ_k w_{k′} ρ_k* − w_{kk′}` over `k, k′ ∈ H`.
    pub cocycle_residual: f64,
    pub unitarity_residual: f64,
    /// `Ad((w_k ρ_k)₁)` against `(α̂_{ω_θ})_k` on every basis element.
    pub conjugacy_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WReport {
    pub subgroup: Vec<usize>,
    pub witness_residual: f64,
    pub points: Vec<WPoint>,
    pub tolerance: f64,
    pub passed: bool,
}

/// The family `w_k` along `θ` for a finite subgroup on which the opposite
/// real cocycle is the coboundary of the witness.
pub fn w_cocycle(
    bundle: &FellBundle,
    omega0: &TwoCocycleReal,
    subgroup: &Subgroup,
    witness: &CoboundaryWitness,
    grid: &[f64],
    cp: &CrossedProductAlgebra,
) -> Result<WReport, CrossedError> {
    let grp = omega0.group();
    if bundle.group() != grp || subgroup.parent() != grp || witness.subgroup() != subgroup {
        return Err(CrossedError::GroupMismatch);
    }
    let witness_residual = witness.residual(&omega0.opposite());
    if witness_residual > tol::COHOMOLOGOUS {
        return Err(CrossedError::WitnessInvalid {
            residual: witness_residual,
        });
    }
    let big_n = bundle.ambient_dim();
    let members = subgroup.members();
    let rhos: Vec<CMat> = grp.elements().map(|k| right_translation(grp, k)).collect();
    let basis = cp.basis();
    let mut points = Vec::with_capacity(grp.order());
    for &theta in grid {
        let omega = omega0.exp(theta);
        let ws: Vec<(usize, CMat)> = members.iter().map(|&k| (k, w_unitary(omega0, witness, theta, k))).collect();
        let w_of = |k: usize| &ws.iter().find(|(m, _)| *m == k).expect("member").1;
        let mut cocycle_residual: f64 = 0.0;
        let mut unitarity_residual: f64 = 0.0;
        let mut conjugacy_residual: f64 = 0.0;
        for &(k, ref wk) in &ws {
            unitarity_residual = unitarity_residual.max(linalg::unitarity_residual(wk));
            for &kp in members {
                let lhs = mul(wk, &conjugate_by(&rhos[k], w_of(kp)));
                cocycle_residual = cocycle_residual.max(max_abs_diff(&lhs, w_of(grp.mul(k, kp))));
            }
            let implementer = kron(&mul(wk, &rhos[k]), &linalg::identity(big_n));
            let map = dual_action(bundle, &omega, k);
            for (a, e) in basis.iter().enumerate() {
                let lhs = conjugate_by(&implementer, e);
                let rhs = &basis[map.target[a]] * map.phase[a];
                conjugacy_residual = conjugacy_residual.max(max_abs_diff(&lhs, &rhs));
            }
        }
        points.push(WPoint {
            theta,
            cocycle_residual,
            unitarity_residual,
            conjugacy_residual,
        });
    }
    let passed = points
        .iter()
        .all(|p| p.cocycle_residual.max(p.conjugacy_residual) <= tol::CLOSURE && p.unitarity_residual <= tol::UNITARY);
    Ok(WReport {
        subgroup: members.to_vec(),
        witness_residual,
        points,
        tolerance: tol::CLOSURE,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExteriorReport {
    pub cocycle_residual: f64,
    pub conjugacy_residual: f64,
    /// Pair `(g, h)` where the cocycle identity fails worst, or
    /// `(g, generator index)` where the conjugacy fails worst.
    pub witness: Option<(usize, usize)>,
    pub equivalent: bool,
}

/// True iff `u_g α_g(u_h) = u_{gh}` and `β_g = Ad_{u_g} ∘ α_g` on all
/// generators, for `g, h` in `elements`.
pub fn exterior_equivalence_check(
    group: &FiniteGroup,
    elements: &[usize],
    alpha: &dyn Fn(usize, &CMat) -> CMat,
    beta: &dyn Fn(usize, &CMat) -> CMat,
    units: &dyn Fn(usize) -> CMat,
    generators: &[CMat],
) -> ExteriorReport {
    let mut cocycle_residual: f64 = 0.0;
    let mut cocycle_witness = None;
    for &g in elements {
        let ug = units(g);
        for &h in elements {
            let lhs = mul(&ug, &alpha(g, &units(h)));
            let r = max_abs_diff(&lhs, &units(group.mul(g, h)));
            if r > cocycle_residual {
                cocycle_residual = r;
                cocycle_witness = Some((g, h));
            }
        }
    }
    let mut conjugacy_residual: f64 = 0.0;
    let mut conjugacy_witness = None;
    for &g in elements {
        let ug = units(g);
        for (i, x) in generators.iter().enumerate() {
            let lhs = beta(g, x);
            let rhs = conjugate_by(&ug, &alpha(g, x));
            let r = max_abs_diff(&lhs, &rhs) / max_abs(x).max(1.0);
            if r > conjugacy_residual {
                conjugacy_residual = r;
                conjugacy_witness = Some((g, i));
            }
        }
    }
    let cocycle_ok = cocycle_residual <= tol::CLOSURE;
    let conjugacy_ok = conjugacy_residual <= tol::CLOSURE;
    let witness = if !cocycle_ok {
        cocycle_witness
    } else if !conjugacy_ok {
        conjugacy_witness
    } else {
        None
    };
    ExteriorReport {
        cocycle_residual,
        conjugacy_residual,
        witness,
        equivalent: cocycle_ok && conjugacy_ok,
    }
}

#[derive(Debug, Clone)]
pub struct IteratedCrossedProduct {
    pub algebra: CrossedProductAlgebra,
    /// `(λ_k ⊗ 1) π(b) (λ_k ⊗ 1)* − π((α̂_ω)_k(b))` over basis elements `b`.
    pub covariance_residual: f64,
}

/// `Γ ⋉_{α̂_ω} (C₀(Γ) ⋉_α A)` on `ℓ²(Γ) ⊗ ℓ²(Γ) ⊗ ℂ^N`, generated by
/// `λ_k ⊗ 1` and `π(b) = Σ_g δ_g ⊗ (α̂_ω)_{g⁻¹}(b)`, with `(α̂_ω)_k = Ad((v_k)₁)`.
pub fn iterated_crossed_product(bundle: &FellBundle, omega: &TwoCocycleU1, seed: u64) -> Result<IteratedCrossedProduct, CrossedError> {
    let grp = bundle.group();
    if grp != omega.group() {
        return Err(CrossedError::GroupMismatch);
    }
    let n = grp.order();
    let big_n = bundle.ambient_dim();
    let inner = crossed_product(bundle, seed)?;
    let inner_basis = inner.basis();
    let v1: Vec<CMat> = grp
        .elements()
        .map(|k| kron(&v_unitary(omega, k), &linalg::identity(big_n)))
        .collect();
    let pi = |b: &CMat| -> CMat {
        let mut out = CMat::zeros(n * b.nrows(), n * b.ncols());
        for g in grp.elements() {
            let image = conjugate_by(&v1[grp.inv(g)], b);
            out += kron(&delta_projection(grp, g), &image);
        }
        out
    };
    let pis: Vec<CMat> = inner_basis.iter().map(pi).collect();
    let shifts: Vec<CMat> = grp
        .elements()
        .map(|k| kron(&left_regular(grp, k), &linalg::identity(n * big_n)))
        .collect();
    let mut basis = Vec::with_capacity(n * pis.len());
    for s in &shifts {
        for p in &pis {
            basis.push(mul(s, p));
        }
    }
    let mut covariance_residual: f64 = 0.0;
    for k in grp.elements() {
        let map = dual_action(bundle, omega, k);
        for (a, p) in pis.iter().enumerate() {
            let lhs = conjugate_by(&shifts[k], p);
            let rhs = &pis[map.target[a]] * map.phase[a];
            covariance_residual = covariance_residual.max(max_abs_diff(&lhs, &rhs));
        }
    }
    let mut generators = shifts.clone();
    for p in first_leg_projections(grp, big_n) {
        generators.push(pi(&p));
    }
    for b in bundle.basis() {
        generators.push(pi(&bundle.coaction_matrix(b)?));
    }
    let algebra = MatrixAlgebra::with_generators(basis, generators)?;
    let closure_residual = algebra.closure_residual(seed);
    let size = algebra.size();
    Ok(IteratedCrossedProduct {
        algebra: CrossedProductAlgebra {
            leg_dims: vec![n, n, big_n],
            algebra,
            closure_residual,
            partition_residual: 0.0,
            projection_residual: 0.0,
        },
        covariance_residual: covariance_residual.max(if size == n * n * big_n { 0.0 } else { f64::INFINITY }),
    })
}

/// `C₀(Γ) ⋉ A_ω` for each `θ` lands in one untwisted span; returns the
/// worst untwist residual along the grid.
pub fn constant_field_check(bundle: &FellBundle, omega0: &TwoCocycleReal, grid: &[f64]) -> Result<f64, CrossedError> {
    let mut worst: f64 = 0.0;
    for &theta in grid {
        let (_, report) = untwist_isomorphism(bundle, &omega0.exp(theta))?;
        worst = worst
            .max(report.span_residual)
            .max(report.formula_residual)
            .max(report.homomorphism_residual);
    }
    Ok(worst)
}

/// Random seeded element of a crossed product, for property tests.
pub fn random_element(cp: &CrossedProductAlgebra, seed: u64) -> CMat {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = cp.algebra().coords();
    let c = CVec::from_iterator(
        coords.dim(),
        (0..coords.dim()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    );
    coords.combine(&c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{heisenberg_bicharacter, random_real_coboundary};
    use crate::k0::block_decompose;
    use crate::DEFAULT_SEED;

    fn klein() -> (FiniteGroup, TwoCocycleU1) {
        heisenberg_bicharacter(2)
    }

    #[test]
    fn crossed_products_of_small_bundles() {
        let t = FiniteGroup::trivial();
        let a = FellBundle::full_matrix(&t, 2);
        let cp = crossed_product(&a, DEFAULT_SEED).unwrap();
        assert_eq!(cp.algebra().dim(), 4);
        let z2 = FiniteGroup::cyclic(2);
        let cp = crossed_product(&FellBundle::group_algebra(&z2), DEFAULT_SEED).unwrap();
        assert!(cp.closure_residual() < 1e-12 && cp.partition_residual() == 0.0 && cp.projection_residual() < 1e-12);
        assert_eq!(block_decompose(cp.algebra(), DEFAULT_SEED).unwrap().block_dims, vec![2]);
        let (g, _) = klein();
        let cp = crossed_product(&FellBundle::group_algebra(&g), DEFAULT_SEED).unwrap();
        assert_eq!(block_decompose(cp.algebra(), DEFAULT_SEED).unwrap().block_dims, vec![4]);
    }

    #[test]
    fn untwisting() {
        let (g, w) = klein();
        let ga = FellBundle::group_algebra(&g);
        let (v, r) = untwist_isomorphism(&ga, &TwoCocycleU1::trivial(&g)).unwrap();
        assert_eq!(v, linalg::identity(16));
        assert!(r.passed);
        let (_, r) = untwist_isomorphism(&ga, &w).unwrap();
        assert!(r.passed);
        assert_eq!(r.coefficient_residual, 0.0);
        let (_, r) = untwist_isomorphism(&FellBundle::pauli(&g).unwrap(), &w).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.twisted_dim, r.untwisted_dim);
    }

    #[test]
    fn v_unitaries() {
        let (g, w) = klein();
        let t = TwoCocycleU1::trivial(&g);
        for k in g.elements() {
            assert_eq!(v_unitary(&t, k), right_translation(&g, k));
        }
        assert_eq!(v_multiplicativity_check(&t).multiplicativity_residual, 0.0);
        let r = v_multiplicativity_check(&w);
        assert!(r.passed);
        let (a, b) = (2, 1);
        let lhs = mul(&v_unitary(&w, a), &v_unitary(&w, b));
        let sign = w.value(g.inv(b), g.inv(a));
        assert_eq!(sign, C64::new(-1.0, 0.0));
        assert!(max_abs_diff(&lhs, &(v_unitary(&w, g.mul(a, b)) * sign)) < 1e-14);
    }

    #[test]
    fn dual_actions() {
        let (g, w) = klein();
        let p = FellBundle::pauli(&g).unwrap();
        let cp = crossed_product(&p, DEFAULT_SEED).unwrap();
        let e = dual_action(&p, &w, g.identity());
        assert!(e.target.iter().enumerate().all(|(i, &t)| i == t));
        assert!(e.phase.iter().all(|z| *z == ONE));
        let plain = dual_action_check(&p, &TwoCocycleU1::trivial(&g), &cp);
        assert!(plain.passed);
        assert_eq!(plain.periods, g.elements().map(|k| g.element_order(k)).collect::<Vec<_>>());
        let r = dual_action_check(&p, &w, &cp);
        assert!(r.passed, "{r:?}");
        assert!(r.composition_residual < 1e-12);
    }

    #[test]
    fn w_family_on_z4() {
        let z4 = FiniteGroup::cyclic(4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w0 = random_real_coboundary(&z4, &mut rng, 1.0);
        let bundle = FellBundle::group_algebra(&z4);
        let cp = crossed_product(&bundle, DEFAULT_SEED).unwrap();
        let h = z4.whole();
        let witness = w0.opposite().coboundary_solve(&h).unwrap();
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let r = w_cocycle(&bundle, &w0, &h, &witness, &grid, &cp).unwrap();
        assert!(r.passed, "{r:?}");
        let trivial = z4.subgroup_closure(&[]).unwrap();
        let tw = w0.opposite().coboundary_solve(&trivial).unwrap();
        assert_eq!(w_unitary(&w0, &tw, 0.7, 0), linalg::identity(4));
        let bad = CoboundaryWitness::new(&h, vec![0.0, 1.0, 2.0, 3.5]);
        assert!(matches!(
            w_cocycle(&bundle, &w0, &h, &bad, &grid, &cp),
            Err(CrossedError::WitnessInvalid { .. })
        ));
    }

    #[test]
    fn exterior_equivalence() {
        let (g, w) = klein();
        let p = FellBundle::pauli(&g).unwrap();
        let cp = crossed_product(&p, DEFAULT_SEED).unwrap();
        let gens = cp.basis().to_vec();
        let rho1: Vec<CMat> = g.elements().map(|k| kron(&right_translation(&g, k), &linalg::identity(2))).collect();
        let plain = |k: usize, x: &CMat| conjugate_by(&rho1[k], x);
        let all: Vec<usize> = g.elements().collect();
        let same = exterior_equivalence_check(&g, &all, &plain, &plain, &|_| linalg::identity(8), &gens);
        assert!(same.equivalent);
        // ω is trivial on ⟨(1,0)⟩, so the diagonal part of v_k is a cocycle there
        let sub = [0, 2];
        let twisted = |k: usize, x: &CMat| dual_action(&p, &w, k).apply(&cp, x);
        let diag = |k: usize| {
            let kinv = g.inv(k);
            kron(&multiplication_operator(|x| w.value(g.mul(x, k), kinv), 4), &linalg::identity(2))
        };
        let r = exterior_equivalence_check(&g, &sub, &plain, &twisted, &diag, &gens);
        assert!(r.equivalent, "{r:?}");
        let perturbed = |k: usize| if k == 2 { diag(k) * C64::new(0.0, 1.0) } else { diag(k) };
        let r = exterior_equivalence_check(&g, &sub, &plain, &twisted, &perturbed, &gens);
        assert!(!r.equivalent);
        assert!(r.witness.is_some());
    }

    #[test]
    fn iterated_crossed_products() {
        let z2 = FiniteGroup::cyclic(2);
        let c = FellBundle::full_matrix(&z2, 1);
        let it = iterated_crossed_product(&c, &TwoCocycleU1::trivial(&z2), DEFAULT_SEED).unwrap();
        assert!(it.covariance_residual < 1e-12);
        assert_eq!(block_decompose(it.algebra.algebra(), DEFAULT_SEED).unwrap().block_dims, vec![2]);
        let (g, w) = klein();
        let c = FellBundle::full_matrix(&g, 1);
        let it = iterated_crossed_product(&c, &w, DEFAULT_SEED).unwrap();
        assert!(it.covariance_residual < 1e-12);
        assert_eq!(block_decompose(it.algebra.algebra(), DEFAULT_SEED).unwrap().rank, 1);
    }
}
