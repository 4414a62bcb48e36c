//! Even equivariant spectral triples at finite dimension, their
//! isospectral deformation, and the index pairing `tr(γp)`.
//!
//! Only even triples are implemented; an odd triple becomes even after a
//! graded tensor product with the standard two-dimensional Clifford triple.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cocycle::{TwoCocycleReal, TwoCocycleU1};
use crate::deform::{embed, DeformError};
use crate::graded::{BundleError, FellBundle};
use crate::group::FiniteGroup;
use crate::k0::{block_decompose, K0Error, K0Signature, MatrixAlgebra};
use crate::linalg::{self, commutator, hermitian_eigen, kron, max_abs, max_abs_diff, mul, null_space, operator_norm, CMat, CVec, C64};
use crate::tol;
use crate::twisted::left_regular;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Algebra(#[from] K0Error),
    #[error("grading has {found} entries for a space of dimension {expected}")]
    GradingLength { expected: usize, found: usize },
    #[error("grading entry {index} is not a group element")]
    GradingOutOfRange { index: usize },
    #[error("basis element {element} of degree {degree} sends H_{from} outside H_{expected} (residual {residual:.3e})")]
    GradingIncompatible {
        element: usize,
        degree: usize,
        from: usize,
        expected: usize,
        residual: f64,
    },
    #[error("operator {what} has the wrong shape")]
    Shape { what: &'static str },
    #[error("{what} fails (residual {residual:.3e})")]
    InvariantViolated { what: &'static str, residual: f64 },
    #[error("not a projection (residual {residual:.3e})")]
    NotAProjection { residual: f64 },
    #[error("graded trace {trace} is not within tolerance of an integer")]
    NonIntegerPairing { trace: f64 },
    #[error("spectral gap {gap:.3e} at theta = {theta} is below the threshold")]
    GapClosed { theta: f64, gap: f64 },
}

/// `(A, H = ℂ^M, D, γ)` with `H = ⊕_g H_g` spanned by coordinate vectors.
#[derive(Debug, Clone)]
pub struct EquivariantTriple {
    bundle: FellBundle,
    grading: Vec<usize>,
    dirac: CMat,
    gamma: CMat,
}

fn grading_projection(grading: &[usize], g: usize) -> CMat {
    let m = grading.len();
    CMat::from_diagonal(&CVec::from_iterator(
        m,
        grading.iter().map(|&d| if d == g { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }),
    ))
}

/// Checks that each homogeneous basis element of degree `g` maps `H_h`
/// into `H_{gh}`.
pub fn check_degree_rule(bundle: &FellBundle, grading: &[usize]) -> Result<(), SpectralError> {
    let grp = bundle.group();
    let m = bundle.ambient_dim();
    if grading.len() != m {
        return Err(SpectralError::GradingLength {
            expected: m,
            found: grading.len(),
        });
    }
    if let Some(index) = grading.iter().position(|&g| g >= grp.order()) {
        return Err(SpectralError::GradingOutOfRange { index });
    }
    for (i, (b, &g)) in bundle.basis().iter().zip(bundle.degrees()).enumerate() {
        for col in 0..m {
            let h = grading[col];
            let expected = grp.mul(g, h);
            let stray = (0..m)
                .filter(|&row| grading[row] != expected)
                .map(|row| b[(row, col)].norm())
                .fold(0.0, f64::max);
            if stray > tol::CLOSURE * max_abs(b).max(1.0) {
                return Err(SpectralError::GradingIncompatible {
                    element: i,
                    degree: g,
                    from: h,
                    expected,
                    residual: stray,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    /// `(δ ⊗ ι)(X) − X₁₃X₂₃`.
    pub coproduct_residual: f64,
    /// `X*(1 ⊗ a)X − α(a)` over the basis.
    pub coaction_residual: f64,
    pub unitarity_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `X = Σ_g λ_g* ⊗ P_g` on `ℓ²(Γ) ⊗ H`.
pub fn covariant_unitary(bundle: &FellBundle, grading: &[usize]) -> Result<(CMat, CovarianceReport), SpectralError> {
    check_degree_rule(bundle, grading)?;
    let grp = bundle.group();
    let n = grp.order();
    let m = grading.len();
    let projections: Vec<CMat> = grp.elements().map(|g| grading_projection(grading, g)).collect();
    let lambdas_adj: Vec<CMat> = grp.elements().map(|g| left_regular(grp, g).adjoint()).collect();
    let mut x = CMat::zeros(n * m, n * m);
    let mut coproduct = CMat::zeros(n * n * m, n * n * m);
    for g in grp.elements() {
        x += kron(&lambdas_adj[g], &projections[g]);
        coproduct += kron(&kron(&lambdas_adj[g], &lambdas_adj[g]), &projections[g]);
    }
    let dims = [n, n, m];
    let x13 = linalg::on_legs(&dims, &x, &[0, 2]);
    let x23 = linalg::on_legs(&dims, &x, &[1, 2]);
    let coproduct_residual = max_abs_diff(&coproduct, &mul(&x13, &x23));
    let x_adj = x.adjoint();
    let mut coaction_residual: f64 = 0.0;
    for b in bundle.basis() {
        let lhs = mul(&x_adj, &mul(&kron(&linalg::identity(n), b), &x));
        coaction_residual = coaction_residual.max(max_abs_diff(&lhs, &bundle.coaction_matrix(b)?));
    }
    let unitarity_residual = linalg::unitarity_residual(&x);
    let passed = coproduct_residual.max(coaction_residual) <= tol::CLOSURE && unitarity_residual <= tol::UNITARY;
    Ok((
        x,
        CovarianceReport {
            coproduct_residual,
            coaction_residual,
            unitarity_residual,
            tolerance: tol::CLOSURE,
            passed,
        },
    ))
}

impl EquivariantTriple {
    pub fn new(bundle: FellBundle, grading: Vec<usize>, dirac: CMat, gamma: CMat) -> Result<Self, SpectralError> {
        check_degree_rule(&bundle, &grading)?;
        let m = grading.len();
        if dirac.shape() != (m, m) {
            return Err(SpectralError::Shape { what: "D" });
        }
        if gamma.shape() != (m, m) {
            return Err(SpectralError::Shape { what: "gamma" });
        }
        let grp = bundle.group();
        let checks = [
            ("D self-adjoint", linalg::hermiticity_residual(&dirac)),
            ("gamma self-adjoint", linalg::hermiticity_residual(&gamma)),
            ("gamma unitary", linalg::unitarity_residual(&gamma)),
            (
                "D equivariant",
                grp.elements()
                    .map(|g| max_abs(&commutator(&dirac, &grading_projection(&grading, g))))
                    .fold(0.0, f64::max),
            ),
            (
                "gamma equivariant",
                grp.elements()
                    .map(|g| max_abs(&commutator(&gamma, &grading_projection(&grading, g))))
                    .fold(0.0, f64::max),
            ),
            ("gamma D gamma = -D", max_abs(&(mul(&gamma, &mul(&dirac, &gamma)) + &dirac))),
            (
                "gamma commutes with the algebra",
                bundle.basis().iter().map(|b| max_abs(&commutator(&gamma, b))).fold(0.0, f64::max),
            ),
        ];
        for (what, residual) in checks {
            if residual > tol::CLOSURE {
                return Err(SpectralError::InvariantViolated { what, residual });
            }
        }
        Ok(Self {
            bundle,
            grading,
            dirac,
            gamma,
        })
    }

    pub fn bundle(&self) -> &FellBundle {
        &self.bundle
    }

    pub fn grading(&self) -> &[usize] {
        &self.grading
    }

    pub fn dirac(&self) -> &CMat {
        &self.dirac
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.grading.len()
    }

    pub fn grading_projection(&self, g: usize) -> CMat {
        grading_projection(&self.grading, g)
    }

    pub fn covariant_unitary(&self) -> Result<(CMat, CovarianceReport), SpectralError> {
        covariant_unitary(&self.bundle, &self.grading)
    }

    /// `(dim H⁺, dim H⁻)`.
    pub fn graded_dims(&self) -> (usize, usize) {
        let (values, _) = hermitian_eigen(&self.gamma);
        let plus = values.iter().filter(|&&v| v > 0.0).count();
        (plus, values.len() - plus)
    }

    /// `π_ω(a) = Σ_k Σ_g ω(k, g) a_k P_g` for the degree components `a_k`.
    pub fn deformed_action(&self, omega: &TwoCocycleU1, a: &CMat) -> Result<CMat, SpectralError> {
        let parts = self.bundle.components(a)?;
        let m = self.dim();
        let mut out = CMat::zeros(m, m);
        for (k, part) in parts.iter().enumerate() {
            if max_abs(part) == 0.0 {
                continue;
            }
            let phases = CMat::from_diagonal(&CVec::from_iterator(m, self.grading.iter().map(|&g| omega.value(k, g))));
            out += mul(part, &phases);
        }
        Ok(out)
    }

    /// Algebra, grading and γ preserved; every residual is recorded.
    pub fn deform(&self, omega: &TwoCocycleU1) -> Result<(EquivariantTriple, TripleDeformReport), SpectralError> {
        let grp = self.bundle.group();
        if grp != omega.group() {
            return Err(SpectralError::Deform(DeformError::GroupMismatch));
        }
        let basis: Vec<CMat> = self
            .bundle
            .basis()
            .iter()
            .map(|b| self.deformed_action(omega, b))
            .collect::<Result<_, _>>()?;
        let deformed_bundle = FellBundle::new(grp, basis, self.bundle.degrees().to_vec())?;
        let triple = EquivariantTriple::new(deformed_bundle, self.grading.clone(), self.dirac.clone(), self.gamma.clone())?;
        // J ξ = Σ_g δ_g ⊗ P_g ξ identifies H with X*(δ_e ⊗ H)
        let n = grp.order();
        let m = self.dim();
        let mut j = CMat::zeros(n * m, m);
        for (col, &g) in self.grading.iter().enumerate() {
            j[(g * m + col, col)] = C64::new(1.0, 0.0);
        }
        let mut restriction_residual: f64 = 0.0;
        for (b, pb) in self.bundle.basis().iter().zip(triple.bundle.basis()) {
            let lifted = embed(&self.bundle, omega, b)?;
            restriction_residual = restriction_residual.max(max_abs_diff(&mul(&lifted, &j), &mul(&j, pb)));
        }
        let before = hermitian_eigen(&self.dirac).0;
        let after = hermitian_eigen(&triple.dirac).0;
        let commutator_norms = triple
            .bundle
            .basis()
            .iter()
            .map(|b| operator_norm(&commutator(&triple.dirac, b)))
            .collect();
        let report = TripleDeformReport {
            restriction_residual,
            isospectral: before == after,
            commutator_norms,
            passed: restriction_residual <= tol::CLOSURE && before == after,
        };
        Ok((triple, report))
    }

    /// `F = sign(D)` with the kernel sent to `+1`; the flag is set when `D`
    /// has a kernel.
    pub fn fredholm_operator(&self) -> (CMat, bool) {
        let (values, vectors) = hermitian_eigen(&self.dirac);
        let kernel = values.iter().any(|v| v.abs() <= tol::GAP);
        let signs = CVec::from_iterator(
            values.len(),
            values.iter().map(|&v| C64::new(if v < -tol::GAP { -1.0 } else { 1.0 }, 0.0)),
        );
        let f = &vectors * CMat::from_diagonal(&signs) * vectors.adjoint();
        (f, kernel)
    }

    pub fn signature(&self, seed: u64) -> Result<K0Signature, SpectralError> {
        Ok(block_decompose(&MatrixAlgebra::from_bundle(&self.bundle), seed)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleDeformReport {
    /// `d_ω(b) J − J π_ω(b)` over the basis.
    pub restriction_residual: f64,
    pub isospectral: bool,
    /// `‖[D, π_ω(b_i)]‖`.
    pub commutator_norms: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FredholmPairing {
    pub index: i64,
    pub trace: f64,
    pub plus_dim: f64,
    pub minus_dim: f64,
}

/// `⟨[F], [p]⟩ = tr(γp) = dim pH⁺ − dim pH⁻`.
pub fn index_pairing(triple: &EquivariantTriple, p: &CMat) -> Result<FredholmPairing, SpectralError> {
    let m = triple.dim();
    if p.shape() != (m, m) {
        return Err(SpectralError::Shape { what: "projection" });
    }
    let residual = linalg::hermiticity_residual(p).max(max_abs_diff(&mul(p, p), p));
    if residual > tol::PROJECTION {
        return Err(SpectralError::NotAProjection { residual });
    }
    let gamma = triple.gamma();
    let id = linalg::identity(m);
    let plus = (&id + gamma).scale(0.5);
    let minus = (&id - gamma).scale(0.5);
    let plus_dim = mul(&plus, p).trace().re;
    let minus_dim = mul(&minus, p).trace().re;
    let trace = mul(gamma, p).trace().re;
    let index = trace.round();
    let integral = [trace, plus_dim, minus_dim].iter().all(|t| (t - t.round()).abs() < tol::INTEGRALITY);
    if !integral {
        return Err(SpectralError::NonIntegerPairing { trace });
    }
    Ok(FredholmPairing {
        index: index as i64,
        trace,
        plus_dim,
        minus_dim,
    })
}

/// `p_θ` is the spectral projection of `π_{ω_θ}(a) + π_{ω_θ}(a)*` below `cut`.
#[derive(Debug, Clone)]
pub struct ProjectionRule {
    pub element: CMat,
    pub cut: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexPoint {
    pub theta: f64,
    pub index: i64,
    pub trace: f64,
    pub gap: f64,
    /// Span residual of `p_θ` in the deformed algebra.
    pub membership_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexPath {
    pub points: Vec<IndexPoint>,
    pub constant: bool,
}

pub fn index_invariance_along_path(
    triple: &EquivariantTriple,
    omega0: &TwoCocycleReal,
    grid: &[f64],
    rule: &ProjectionRule,
) -> Result<IndexPath, SpectralError> {
    let mut points = Vec::with_capacity(grid.len());
    for &theta in grid {
        let omega = omega0.exp(theta);
        let (deformed, _) = triple.deform(&omega)?;
        let x = triple.deformed_action(&omega, &rule.element)?;
        let h = &x + x.adjoint();
        let (values, vectors) = hermitian_eigen(&h);
        let gap = values.iter().map(|v| (v - rule.cut).abs()).fold(f64::INFINITY, f64::min);
        if gap < tol::GAP {
            return Err(SpectralError::GapClosed { theta, gap });
        }
        let below = values.iter().filter(|&&v| v < rule.cut).count();
        let v = vectors.columns(0, below).into_owned();
        let p = &v * v.adjoint();
        let membership_residual = deformed.bundle().coords().residual(&p);
        let pairing = index_pairing(&deformed, &p)?;
        points.push(IndexPoint {
            theta,
            index: pairing.index,
            trace: pairing.trace,
            gap,
            membership_residual,
        });
    }
    let constant = points.windows(2).all(|w| w[0].index == w[1].index);
    Ok(IndexPath { points, constant })
}

/// A unitary `U` with `U s_i U* = t_i` for all `i`, found from the
/// commutant equation `T s_i = t_i T` and a polar decomposition.
pub fn find_intertwiner(source: &[CMat], target: &[CMat], seed: u64) -> Option<(CMat, f64)> {
    let m = source.first()?.nrows();
    let id = linalg::identity(m);
    let mut system = CMat::zeros(source.len() * m * m, m * m);
    for (i, (s, t)) in source.iter().zip(target).enumerate() {
        // vec(T s) = (sᵀ ⊗ 1) vec T, vec(t T) = (1 ⊗ t) vec T
        let block = kron(&s.transpose(), &id) - kron(&id, t);
        system.view_mut((i * m * m, 0), (m * m, m * m)).copy_from(&block);
    }
    let kernel = null_space(&system, tol::INDEPENDENCE);
    if kernel.ncols() == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = CVec::from_iterator(
        kernel.ncols(),
        (0..kernel.ncols()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    );
    let v = &kernel * w;
    let t = CMat::from_column_slice(m, m, v.as_slice());
    let svd = t.svd(true, true);
    if svd.singular_values.iter().any(|&s| s < tol::INDEPENDENCE) {
        return None;
    }
    let u = svd.u? * svd.v_t?;
    let residual = source
        .iter()
        .zip(target)
        .map(|(s, t)| max_abs_diff(&linalg::conjugate_by(&u, s), t))
        .fold(0.0, f64::max);
    (residual <= tol::CLOSURE).then_some((u, residual))
}

/// `C*(Γ)` on `ℓ²(Γ) ⊕ ℂ` with `γ = 1 ⊕ −1`, the ancilla in degree `e`,
/// and `D` coupling `δ_e` to the ancilla.
pub fn ancilla_triple(group: &FiniteGroup, coupling: f64) -> EquivariantTriple {
    let n = group.order();
    let bundle = FellBundle::group_algebra_with_ancilla(group);
    let mut grading: Vec<usize> = group.elements().collect();
    grading.push(group.identity());
    let mut dirac = CMat::zeros(n + 1, n + 1);
    dirac[(group.identity(), n)] = C64::new(coupling, 0.0);
    dirac[(n, group.identity())] = C64::new(coupling, 0.0);
    let mut gamma = linalg::identity(n + 1);
    gamma[(n, n)] = C64::new(-1.0, 0.0);
    EquivariantTriple::new(bundle, grading, dirac, gamma).expect("ancilla triple is equivariant")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{heisenberg_bicharacter, random_real_coboundary};
    use crate::DEFAULT_SEED;
    use proptest::prelude::*;
    use rand::Rng;

    fn regular_z2() -> EquivariantTriple {
        let z2 = FiniteGroup::cyclic(2);
        let bundle = FellBundle::group_algebra(&z2);
        EquivariantTriple::new(bundle, vec![0, 1], CMat::zeros(2, 2), linalg::identity(2)).unwrap()
    }

    #[test]
    fn covariant_unitaries() {
        let t = FiniteGroup::trivial();
        let (x, r) = covariant_unitary(&FellBundle::full_matrix(&t, 2), &[0, 0]).unwrap();
        assert_eq!(x, linalg::identity(2));
        assert!(r.passed);
        let (_, r) = regular_z2().covariant_unitary().unwrap();
        assert_eq!((r.coproduct_residual, r.coaction_residual), (0.0, 0.0));
    }

    #[test]
    fn pauli_admits_no_grading_of_c2() {
        let (g, _) = heisenberg_bicharacter(2);
        let pauli = FellBundle::pauli(&g).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!(matches!(
                    covariant_unitary(&pauli, &[a, b]),
                    Err(SpectralError::GradingIncompatible { .. })
                ));
            }
        }
    }

    #[test]
    fn trivial_deformation_is_identity() {
        let t = regular_z2();
        let (d, r) = t.deform(&TwoCocycleU1::trivial(t.bundle().group())).unwrap();
        assert!(r.passed);
        assert_eq!(d.bundle().basis(), t.bundle().basis());
    }

    #[test]
    fn coboundary_deformation_is_unitarily_equivalent() {
        let t = regular_z2();
        let z2 = t.bundle().group().clone();
        let psi = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let omega = TwoCocycleU1::coboundary(&z2, &psi).unwrap();
        assert_eq!(omega.value(1, 1), C64::new(-1.0, 0.0));
        let (d, r) = t.deform(&omega).unwrap();
        assert!(r.passed && r.isospectral);
        let target: Vec<CMat> = d
            .bundle()
            .basis()
            .iter()
            .zip(d.bundle().degrees())
            .map(|(b, &g)| b * psi[g].conj())
            .collect();
        let (u, res) = find_intertwiner(t.bundle().basis(), &target, DEFAULT_SEED).unwrap();
        assert!(res < 1e-10);
        assert!(linalg::unitarity_residual(&u) < 1e-12);
        assert!(find_intertwiner(t.bundle().basis(), d.bundle().basis(), DEFAULT_SEED).is_none());
    }

    #[test]
    fn bicharacter_deformation_of_regular_klein() {
        let (g, w) = heisenberg_bicharacter(2);
        let bundle = FellBundle::group_algebra(&g);
        let t = EquivariantTriple::new(bundle, g.elements().collect(), CMat::zeros(4, 4), linalg::identity(4)).unwrap();
        assert_eq!(t.signature(DEFAULT_SEED).unwrap().rank, 4);
        let (d, r) = t.deform(&w).unwrap();
        assert!(r.passed);
        assert_eq!(d.signature(DEFAULT_SEED).unwrap().block_dims, vec![2]);
    }

    #[test]
    fn pairings() {
        let t = ancilla_triple(&FiniteGroup::cyclic(4), 1.0);
        assert_eq!(t.graded_dims(), (4, 1));
        assert_eq!(index_pairing(&t, &CMat::zeros(5, 5)).unwrap().index, 0);
        assert_eq!(index_pairing(&t, &linalg::identity(5)).unwrap().index, 3);
        let mut e0 = CMat::zeros(5, 5);
        e0[(2, 2)] = C64::new(1.0, 0.0);
        assert_eq!(index_pairing(&t, &e0).unwrap().index, 1);
        let half = linalg::identity(5).scale(0.5);
        assert!(matches!(index_pairing(&t, &half), Err(SpectralError::NotAProjection { .. })));
        let (f, kernel) = t.fredholm_operator();
        assert!(kernel);
        assert!(max_abs_diff(&mul(&f, &f), &linalg::identity(5)) < 1e-12);
    }

    #[test]
    fn index_paths() {
        let z4 = FiniteGroup::cyclic(4);
        let t = ancilla_triple(&z4, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w0 = random_real_coboundary(&z4, &mut rng, 1.0);
        // the degree-e part keeps the ℓ² spectrum inside [0.8, 1.2] for every θ
        let b = t.bundle().basis();
        let a = b[0].scale(0.5) + &b[1] * C64::new(0.07, 0.07) + b[4].scale(0.1);
        let rule = ProjectionRule { element: a, cut: 0.5 };
        let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.2).collect();
        let path = index_invariance_along_path(&t, &w0, &grid, &rule).unwrap();
        assert!(path.constant);
        assert_eq!(path.points[0].index, -1);
        assert!(path.points.iter().all(|p| p.membership_residual < 1e-8));
        let flat = index_invariance_along_path(&t, &TwoCocycleReal::zero(&z4), &grid, &rule).unwrap();
        assert_eq!(flat.points[0].index, path.points[0].index);
        let degenerate = ProjectionRule {
            element: t.bundle().basis()[0].clone(),
            cut: 2.0,
        };
        assert!(matches!(
            index_invariance_along_path(&t, &w0, &grid, &degenerate),
            Err(SpectralError::GapClosed { .. })
        ));
    }

    #[test]
    fn rejects_bad_operators() {
        let z2 = FiniteGroup::cyclic(2);
        let bundle = FellBundle::group_algebra(&z2);
        let off = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(
            EquivariantTriple::new(bundle.clone(), vec![0, 1], off, linalg::identity(2)),
            Err(SpectralError::InvariantViolated { what: "D equivariant", .. })
        ));
        assert!(matches!(
            EquivariantTriple::new(bundle, vec![0, 0], CMat::zeros(2, 2), linalg::identity(2)),
            Err(SpectralError::GradingIncompatible { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pairing_is_additive(split in 1usize..4, seed in 0u64..500) {
            let t = ancilla_triple(&FiniteGroup::cyclic(4), 1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw = CMat::from_fn(5, 5, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            // a projection commuting with γ: rotate inside H⁺ only
            let mut u = linalg::identity(5);
            let q = raw.view((0, 0), (4, 4)).into_owned().qr().q();
            u.view_mut((0, 0), (4, 4)).copy_from(&q);
            let proj = |range: std::ops::Range<usize>| {
                let mut d = CMat::zeros(5, 5);
                for i in range { d[(i, i)] = C64::new(1.0, 0.0); }
                linalg::conjugate_by(&u, &d)
            };
            let p = proj(0..split);
            let q = proj(split..5);
            let total = index_pairing(&t, &(&p + &q)).unwrap().trace;
            let parts = index_pairing(&t, &p).unwrap().trace + index_pairing(&t, &q).unwrap().trace;
            prop_assert!((total - parts).abs() < 1e-6);
        }

        #[test]
        fn deformation_is_isospectral(seed in 0u64..200, theta in 0.0f64..3.0) {
            let z4 = FiniteGroup::cyclic(4);
            let t = ancilla_triple(&z4, 0.5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w0 = random_real_coboundary(&z4, &mut rng, 1.0);
            let (d, r) = t.deform(&w0.exp(theta)).unwrap();
            prop_assert!(r.isospectral);
            prop_assert!(r.restriction_residual < 1e-10);
            prop_assert_eq!(d.dirac(), t.dirac());
            let (_, cov) = d.covariant_unitary().unwrap();
            prop_assert!(cov.passed);
        }
    }
}
