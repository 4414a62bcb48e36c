//! Twisted group algebras: the regular ω-representation on `ℓ²(Γ)` and
//! finitely supported twisted convolution.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::cocycle::{check_cohomologous, Cocycle, TwoCocycleU1};
use crate::group::{DiscreteGroup, FiniteGroup};
use crate::linalg::{self, conjugate_by, kron, max_abs_diff, mul, on_legs, permute_legs, CMat, C64, ONE, ZERO};
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TgaError {
    #[error("elements belong to different twisted algebras")]
    CocycleMismatch,
    #[error("matrix models need a finite group")]
    InfiniteGroupUnsupported,
    #[error("the map does not carry the source cocycle to the target (residual {residual:.3e})")]
    NotCohomologous { residual: f64 },
}

/// `λ^(ω)_g`: entry `ω(g,h)` at `(gh, h)`.
pub fn lambda_matrix(omega: &TwoCocycleU1, g: usize) -> CMat {
    let grp = omega.group();
    let n = grp.order();
    let mut m = CMat::zeros(n, n);
    for h in grp.elements() {
        m[(grp.mul(g, h), h)] = omega.value(g, h);
    }
    m
}

/// Untwisted left regular representation `λ_g`.
pub fn left_regular(group: &FiniteGroup, g: usize) -> CMat {
    lambda_matrix(&TwoCocycleU1::trivial(group), g)
}

/// Right translation `ρ_k δ_h = δ_{hk⁻¹}`.
pub fn right_translation(group: &FiniteGroup, k: usize) -> CMat {
    let n = group.order();
    let kinv = group.inv(k);
    let mut m = CMat::zeros(n, n);
    for h in group.elements() {
        m[(group.mul(h, kinv), h)] = ONE;
    }
    m
}

/// Rank-one diagonal projection onto `δ_h`.
pub fn delta_projection(group: &FiniteGroup, h: usize) -> CMat {
    let n = group.order();
    let mut m = CMat::zeros(n, n);
    m[(h, h)] = ONE;
    m
}

/// Diagonal multiplication operator by `f` on `ℓ²(Γ)`.
pub fn multiplication_operator(f: impl Fn(usize) -> C64, n: usize) -> CMat {
    CMat::from_diagonal(&linalg::CVec::from_iterator(n, (0..n).map(f)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationsReport {
    pub product_residual: f64,
    pub adjoint_residual: f64,
    pub unitarity_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl RelationsReport {
    pub fn max_residual(&self) -> f64 {
        self.product_residual.max(self.adjoint_residual).max(self.unitarity_residual)
    }
}

/// Checks `λ_g λ_h = ω(g,h) λ_{gh}` and `λ_g* = ω(g,g⁻¹)̄ λ_{g⁻¹}` for all pairs.
pub fn relations_check(omega: &TwoCocycleU1) -> RelationsReport {
    let grp = omega.group();
    let lambdas: Vec<CMat> = grp.elements().map(|g| lambda_matrix(omega, g)).collect();
    let mut product_residual: f64 = 0.0;
    let mut adjoint_residual: f64 = 0.0;
    let mut unitarity_residual: f64 = 0.0;
    for g in grp.elements() {
        for h in grp.elements() {
            let lhs = mul(&lambdas[g], &lambdas[h]);
            let rhs = &lambdas[grp.mul(g, h)] * omega.value(g, h);
            product_residual = product_residual.max(max_abs_diff(&lhs, &rhs));
        }
        let ginv = grp.inv(g);
        let rhs = &lambdas[ginv] * omega.value(g, ginv).conj();
        adjoint_residual = adjoint_residual.max(max_abs_diff(&lambdas[g].adjoint(), &rhs));
        unitarity_residual = unitarity_residual.max(linalg::unitarity_residual(&lambdas[g]));
    }
    RelationsReport {
        product_residual,
        adjoint_residual,
        unitarity_residual,
        tolerance: tol::COCYCLE,
        passed: product_residual.max(adjoint_residual).max(unitarity_residual) <= tol::COCYCLE,
    }
}

/// `W^(ω) = Σ_h δ_h ⊗ λ^(ω)_h`, i.e. `δ_h ⊗ δ_k ↦ ω(h,k) δ_h ⊗ δ_{hk}`.
pub fn fundamental_unitary(omega: &TwoCocycleU1) -> CMat {
    let grp = omega.group();
    let n = grp.order();
    let mut w = CMat::zeros(n * n, n * n);
    for h in grp.elements() {
        for k in grp.elements() {
            w[(h * n + grp.mul(h, k), h * n + k)] = omega.value(h, k);
        }
    }
    w
}

/// Residual of `W^(ω) = W · diag(ω)`, with `W` the untwisted unitary.
pub fn factorization_residual(omega: &TwoCocycleU1) -> f64 {
    let grp = omega.group();
    let n = grp.order();
    let w = fundamental_unitary(&TwoCocycleU1::trivial(grp));
    let diag = multiplication_operator(|i| omega.value(i / n, i % n), n * n);
    max_abs_diff(&fundamental_unitary(omega), &mul(&w, &diag))
}

/// Max over `g` of `|W^(β)(λ^(αβ)_g ⊗ 1)W^(β)* − λ^(α)_g ⊗ λ^(β)_g|`.
pub fn tensor_split_residual(alpha: &TwoCocycleU1, beta: &TwoCocycleU1) -> Result<f64, crate::cocycle::CocycleError> {
    let ab = alpha.product(beta)?;
    let grp = alpha.group();
    let n = grp.order();
    let w = fundamental_unitary(beta);
    Ok(grp
        .elements()
        .map(|g| {
            let lhs = conjugate_by(&w, &kron(&lambda_matrix(&ab, g), &linalg::identity(n)));
            let rhs = kron(&lambda_matrix(alpha, g), &lambda_matrix(beta, g));
            max_abs_diff(&lhs, &rhs)
        })
        .fold(0.0, f64::max))
}

/// `δ^(ω)_l(y) = W^(ω)(y ⊗ 1)W^(ω)*`.
pub fn left_coproduct(omega: &TwoCocycleU1, y: &CMat) -> CMat {
    let n = omega.group().order();
    conjugate_by(&fundamental_unitary(omega), &kron(y, &linalg::identity(n)))
}

/// `Ãd^(ω)(x) = W^(ω)*(1 ⊗ x)W^(ω) = Σ_h δ_h ⊗ (λ^(ω)_h)* x λ^(ω)_h`.
pub fn adjoint_coaction(omega: &TwoCocycleU1, x: &CMat) -> CMat {
    let n = omega.group().order();
    let w = fundamental_unitary(omega);
    conjugate_by(&w.adjoint(), &kron(&linalg::identity(n), x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YetterDrinfeldReport {
    /// Difference of the two composites of the compatibility square.
    pub diagram_residual: f64,
    /// Top-right composite against `Σ_h δ_h ⊗ λ_g ⊗ λ_h* λ^(ω)_g λ_h`.
    pub closed_form_residual: f64,
    /// `Ad^(ω)_g(λ_h)` against its scalar formula.
    pub ad_formula_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Evaluates both routes around the square relating the coproduct
/// `δ^(ω)_l` and the adjoint coaction `Ãd^(ω)` on each generator.
pub fn yetter_drinfeld_check(omega: &TwoCocycleU1) -> YetterDrinfeldReport {
    let grp = omega.group();
    let n = grp.order();
    let dims = [n, n, n];
    let trivial = TwoCocycleU1::trivial(grp);
    let w_omega = fundamental_unitary(omega);
    let w_plain = fundamental_unitary(&trivial);
    let w_omega_23 = on_legs(&dims, &w_omega, &[1, 2]);
    let w_omega_23_adj = w_omega_23.adjoint();
    let w_plain_12 = on_legs(&dims, &w_plain, &[0, 1]);
    let lambdas: Vec<CMat> = grp.elements().map(|g| lambda_matrix(omega, g)).collect();
    let mut diagram_residual: f64 = 0.0;
    let mut closed_form_residual: f64 = 0.0;
    for g in grp.elements() {
        // top-right: δ_l, then ι ⊗ Ãd, then the leg flip Σ₁₂
        let coproduct = left_coproduct(omega, &lambdas[g]);
        let placed = on_legs(&dims, &coproduct, &[0, 2]);
        let adjointed = mul(&mul(&w_omega_23_adj, &placed), &w_omega_23);
        let (top_right, _) = permute_legs(&adjointed, &dims, &[1, 0, 2]);
        // left-bottom: Ãd, then ι ⊗ δ_l, then Ad of the untwisted W on legs 1,2
        let ad = adjoint_coaction(omega, &lambdas[g]);
        let placed = on_legs(&dims, &ad, &[0, 1]);
        let coproducted = conjugate_by(&w_omega_23, &placed);
        let left_bottom = conjugate_by(&w_plain_12, &coproducted);
        diagram_residual = diagram_residual.max(max_abs_diff(&top_right, &left_bottom));

        let mut closed = CMat::zeros(n * n * n, n * n * n);
        for h in grp.elements() {
            let inner = mul(&mul(&lambdas[h].adjoint(), &lambdas[g]), &lambdas[h]);
            closed += kron(&kron(&delta_projection(grp, h), &left_regular(grp, g)), &inner);
        }
        closed_form_residual = closed_form_residual.max(max_abs_diff(&top_right, &closed));
    }
    let mut ad_formula_residual: f64 = 0.0;
    for g in grp.elements() {
        let ginv = grp.inv(g);
        for h in grp.elements() {
            let lhs = conjugate_by(&lambdas[g], &lambdas[h]);
            let gh = grp.mul(g, h);
            let coef = omega.value(g, h) * omega.value(gh, ginv) * omega.value(g, ginv).conj();
            let rhs = &lambdas[grp.mul(gh, ginv)] * coef;
            ad_formula_residual = ad_formula_residual.max(max_abs_diff(&lhs, &rhs));
        }
    }
    let worst = diagram_residual.max(closed_form_residual).max(ad_formula_residual);
    YetterDrinfeldReport {
        diagram_residual,
        closed_form_residual,
        ad_formula_residual,
        tolerance: tol::COCYCLE,
        passed: worst <= tol::COCYCLE,
    }
}

/// `C*_{r,ω}(Γ)` as an abstract algebra of finitely supported functions.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedAlgebra<G: DiscreteGroup, W: Cocycle<G>> {
    group: G,
    cocycle: W,
}

impl<G, W> TwistedAlgebra<G, W>
where
    G: DiscreteGroup + PartialEq,
    W: Cocycle<G> + PartialEq,
{
    pub fn new(group: G, cocycle: W) -> Arc<Self> {
        Arc::new(Self { group, cocycle })
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn cocycle(&self) -> &W {
        &self.cocycle
    }
}

/// Element `Σ_g x(g) λ^(ω)_g`.
#[derive(Debug, Clone)]
pub struct TwistedGroupElement<G: DiscreteGroup, W: Cocycle<G>> {
    algebra: Arc<TwistedAlgebra<G, W>>,
    coeffs: BTreeMap<G::Elem, C64>,
}

/// Constructors that need a handle to the algebra.
pub trait TwistedAlgebraExt<G: DiscreteGroup, W: Cocycle<G>> {
    fn delta(&self, g: G::Elem) -> TwistedGroupElement<G, W>;
    fn unit(&self) -> TwistedGroupElement<G, W>;
    fn element(&self, coeffs: impl IntoIterator<Item = (G::Elem, C64)>) -> TwistedGroupElement<G, W>;
}

impl<G, W> TwistedAlgebraExt<G, W> for Arc<TwistedAlgebra<G, W>>
where
    G: DiscreteGroup + PartialEq,
    W: Cocycle<G> + PartialEq,
{
    fn delta(&self, g: G::Elem) -> TwistedGroupElement<G, W> {
        self.element([(g, ONE)])
    }

    fn unit(&self) -> TwistedGroupElement<G, W> {
        self.delta(self.group.identity())
    }

    fn element(&self, coeffs: impl IntoIterator<Item = (G::Elem, C64)>) -> TwistedGroupElement<G, W> {
        let mut map = BTreeMap::new();
        for (g, c) in coeffs {
            *map.entry(g).or_insert(ZERO) += c;
        }
        map.retain(|_, c| *c != ZERO);
        TwistedGroupElement {
            algebra: Arc::clone(self),
            coeffs: map,
        }
    }
}

impl<G, W> TwistedGroupElement<G, W>
where
    G: DiscreteGroup + PartialEq,
    W: Cocycle<G> + PartialEq,
{
    pub fn algebra(&self) -> &Arc<TwistedAlgebra<G, W>> {
        &self.algebra
    }

    pub fn coefficient(&self, g: &G::Elem) -> C64 {
        self.coeffs.get(g).copied().unwrap_or(ZERO)
    }

    pub fn support(&self) -> impl Iterator<Item = (&G::Elem, &C64)> {
        self.coeffs.iter()
    }

    fn same_algebra(&self, other: &Self) -> Result<(), TgaError> {
        if Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra {
            Ok(())
        } else {
            Err(TgaError::CocycleMismatch)
        }
    }

    fn rebuild(&self, coeffs: BTreeMap<G::Elem, C64>) -> Self {
        self.algebra.element(coeffs)
    }

    /// `(x·y)(k) = Σ_{gh=k} x(g) y(h) ω(g,h)`.
    pub fn multiply(&self, other: &Self) -> Result<Self, TgaError> {
        self.same_algebra(other)?;
        let grp = &self.algebra.group;
        let w = &self.algebra.cocycle;
        let mut out: BTreeMap<G::Elem, C64> = BTreeMap::new();
        for (g, x) in &self.coeffs {
            for (h, y) in &other.coeffs {
                *out.entry(grp.mul(g, h)).or_insert(ZERO) += x * y * w.value(g, h);
            }
        }
        Ok(self.rebuild(out))
    }

    /// `x*(g) = ω(g,g⁻¹)̄ · conj(x(g⁻¹))`.
    pub fn involute(&self) -> Self {
        let grp = &self.algebra.group;
        let w = &self.algebra.cocycle;
        let out = self.coeffs.iter().map(|(h, x)| {
            let g = grp.inv(h);
            let c = w.value(&g, h).conj() * x.conj();
            (g, c)
        });
        self.algebra.element(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, TgaError> {
        self.same_algebra(other)?;
        let all = self.coeffs.iter().chain(&other.coeffs).map(|(g, c)| (g.clone(), *c));
        Ok(self.algebra.element(all))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.algebra.element(self.coeffs.iter().map(|(g, c)| (g.clone(), c * s)))
    }

    /// Coefficient at the identity.
    pub fn standard_trace(&self) -> C64 {
        self.coefficient(&self.algebra.group.identity())
    }

    /// Largest coefficient difference.
    pub fn distance(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<&G::Elem> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.into_iter()
            .map(|g| (self.coefficient(g) - other.coefficient(g)).norm())
            .fold(0.0, f64::max)
    }
}

impl TwistedGroupElement<FiniteGroup, TwoCocycleU1> {
    /// `Σ_g x(g) λ^(ω)_g` on `ℓ²(Γ)`.
    pub fn matrix(&self) -> CMat {
        let w = &self.algebra.cocycle;
        let n = self.algebra.group.order();
        let mut m = CMat::zeros(n, n);
        for (g, c) in &self.coeffs {
            m += lambda_matrix(w, *g) * *c;
        }
        m
    }
}

impl TwistedGroupElement<crate::group::FreeAbelianGroup, crate::cocycle::BilinearCocycle> {
    /// `ℓ²(ℤⁿ)` is infinite dimensional.
    pub fn matrix(&self) -> Result<CMat, TgaError> {
        Err(TgaError::InfiniteGroupUnsupported)
    }
}

pub type FiniteTwisted = TwistedAlgebra<FiniteGroup, TwoCocycleU1>;
pub type FiniteElement = TwistedGroupElement<FiniteGroup, TwoCocycleU1>;

/// `λ^(ω)_g ↦ ψ(g)̄ λ^(ω′)_g`, after checking that `ψ` relates `ω` to `ω′`.
pub fn cohomologous_isomorphism(
    psi: &[C64],
    x: &FiniteElement,
    target: &Arc<FiniteTwisted>,
) -> Result<FiniteElement, TgaError> {
    let source = x.algebra().cocycle();
    if !check_cohomologous(source, target.cocycle(), psi) {
        let residual = crate::cocycle::cohomology_residual(source, target.cocycle(), psi).unwrap_or(f64::INFINITY);
        return Err(TgaError::NotCohomologous { residual });
    }
    Ok(target.element(x.support().map(|(g, c)| (*g, psi[*g].conj() * c))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{heisenberg_bicharacter, random_real_coboundary, random_u1_coboundary, BilinearCocycle};
    use crate::group::FreeAbelianGroup;
    use crate::linalg::phase;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cocycle(g: &FiniteGroup, seed: u64) -> TwoCocycleU1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_u1_coboundary(g, &mut rng)
            .product(&random_real_coboundary(g, &mut rng, 1.0).exp(1.3))
            .unwrap()
    }

    #[test]
    fn lambda_basics() {
        let z2 = FiniteGroup::cyclic(2);
        let l = lambda_matrix(&TwoCocycleU1::trivial(&z2), 1);
        assert_eq!(l, CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
        let w = random_cocycle(&FiniteGroup::symmetric(3), 1);
        assert_eq!(lambda_matrix(&w, 0), linalg::identity(6));
        let (_, b) = heisenberg_bicharacter(2);
        let (a, bb) = (2, 1); // (1,0) and (0,1)
        let lhs = mul(&lambda_matrix(&b, a), &lambda_matrix(&b, bb));
        let rhs = mul(&lambda_matrix(&b, bb), &lambda_matrix(&b, a)) * C64::new(-1.0, 0.0);
        assert_eq!(max_abs_diff(&lhs, &rhs), 0.0);
    }

    #[test]
    fn relations_hold() {
        let z3 = FiniteGroup::cyclic(3);
        let r = relations_check(&TwoCocycleU1::trivial(&z3));
        assert_eq!(r.max_residual(), 0.0);
        let (_, b) = heisenberg_bicharacter(2);
        assert!(relations_check(&b).max_residual() < 1e-14);
        assert!(relations_check(&random_cocycle(&FiniteGroup::symmetric(3), 2)).passed);
    }

    #[test]
    fn fundamental_unitary_properties() {
        let z2 = FiniteGroup::cyclic(2);
        let w = fundamental_unitary(&TwoCocycleU1::trivial(&z2));
        // δ_h ⊗ δ_k ↦ δ_h ⊗ δ_{h+k}
        let mut expect = CMat::zeros(4, 4);
        for (h, k) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            expect[(h * 2 + (h + k) % 2, h * 2 + k)] = ONE;
        }
        assert_eq!(w, expect);
        let g = heisenberg_bicharacter(3).0;
        let a = random_cocycle(&g, 5).product(&heisenberg_bicharacter(3).1).unwrap();
        let b = random_cocycle(&g, 6);
        assert_eq!(factorization_residual(&a), 0.0);
        assert!(linalg::unitarity_residual(&fundamental_unitary(&a)) < 1e-12);
        assert!(tensor_split_residual(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn yetter_drinfeld_square_commutes() {
        let z3 = FiniteGroup::cyclic(3);
        let t = yetter_drinfeld_check(&TwoCocycleU1::trivial(&z3));
        assert_eq!(t.diagram_residual, 0.0);
        assert!(t.passed);
        assert!(yetter_drinfeld_check(&heisenberg_bicharacter(2).1).passed);
        assert!(yetter_drinfeld_check(&random_cocycle(&FiniteGroup::symmetric(3), 9)).passed);
    }

    #[test]
    fn convolution_matches_untwisted_oracle_and_matrices() {
        let g = FiniteGroup::quaternion();
        let trivial = TwistedAlgebra::new(g.clone(), TwoCocycleU1::trivial(&g));
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rand_vec = |rng: &mut ChaCha8Rng| -> Vec<C64> {
            (0..8).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
        };
        let (xa, ya) = (rand_vec(&mut rng), rand_vec(&mut rng));
        let x = trivial.element(xa.iter().enumerate().map(|(i, c)| (i, *c)));
        let y = trivial.element(ya.iter().enumerate().map(|(i, c)| (i, *c)));
        let xy = x.multiply(&y).unwrap();
        // group-algebra convolution oracle
        let mut oracle = vec![ZERO; 8];
        for a in 0..8 {
            for b in 0..8 {
                oracle[g.mul(a, b)] += xa[a] * ya[b];
            }
        }
        for k in 0..8 {
            assert!((xy.coefficient(&k) - oracle[k]).norm() < 1e-13);
        }
        let twisted = TwistedAlgebra::new(g.clone(), random_cocycle(&g, 3));
        let x = twisted.element(xa.iter().enumerate().map(|(i, c)| (i, *c)));
        let y = twisted.element(ya.iter().enumerate().map(|(i, c)| (i, *c)));
        assert!(max_abs_diff(&x.multiply(&y).unwrap().matrix(), &mul(&x.matrix(), &y.matrix())) < 1e-12);
        assert!(max_abs_diff(&x.involute().matrix(), &x.matrix().adjoint()) < 1e-12);
        assert!((x.standard_trace() - x.matrix()[(0, 0)]).norm() < 1e-12);
        assert!(matches!(x.multiply(&trivial.unit()), Err(TgaError::CocycleMismatch)));
    }

    #[test]
    fn unit_and_trace() {
        let g = FiniteGroup::symmetric(3);
        let alg = TwistedAlgebra::new(g.clone(), random_cocycle(&g, 4));
        let x = alg.element((0..6).map(|i| (i, C64::new(i as f64, 1.0))));
        assert_eq!(alg.unit().multiply(&x).unwrap().distance(&x), 0.0);
        assert_eq!(x.multiply(&alg.unit()).unwrap().distance(&x), 0.0);
        assert_eq!(alg.unit().standard_trace(), ONE);
        assert_eq!(alg.delta(3).standard_trace(), ZERO);
    }

    #[test]
    fn noncommutative_torus_relation() {
        let theta = 0.73;
        let alg = TwistedAlgebra::new(FreeAbelianGroup::new(2), BilinearCocycle::torus(theta));
        let u = alg.delta(vec![1, 0]);
        let v = alg.delta(vec![0, 1]);
        let uv = u.multiply(&v).unwrap();
        let vu = v.multiply(&u).unwrap();
        assert!(uv.distance(&vu.scale(phase(theta))) < 1e-14);
        assert!(u.matrix().is_err());
    }

    #[test]
    fn cohomologous_transport() {
        let (g, w) = heisenberg_bicharacter(2);
        let source = TwistedAlgebra::new(g.clone(), w.conjugate());
        let target = TwistedAlgebra::new(g.clone(), w.opposite());
        let psi = w.antipode_map();
        for a in g.elements() {
            for b in g.elements() {
                let (x, y) = (source.delta(a), source.delta(b));
                let image_of_product = cohomologous_isomorphism(&psi, &x.multiply(&y).unwrap(), &target).unwrap();
                let product_of_images = cohomologous_isomorphism(&psi, &x, &target)
                    .unwrap()
                    .multiply(&cohomologous_isomorphism(&psi, &y, &target).unwrap())
                    .unwrap();
                assert!(image_of_product.distance(&product_of_images) < 1e-12);
                let star = cohomologous_isomorphism(&psi, &x.involute(), &target).unwrap();
                let star2 = cohomologous_isomorphism(&psi, &x, &target).unwrap().involute();
                assert!(star.distance(&star2) < 1e-12);
            }
        }
        let bad = cohomologous_isomorphism(&vec![ONE; 4], &source.delta(1), &target);
        assert!(matches!(bad, Err(TgaError::NotCohomologous { .. })));
    }
}
