//! Fell bundles over finite groups realized as graded unital *-subalgebras of
//! `M_N(ℂ)` with a homogeneous basis.

use serde::Serialize;
use thiserror::Error;

use crate::group::{FiniteGroup, Subgroup};
use crate::linalg::{self, kron, max_abs, singular_values, vectorize, CMat, CVec, SpanCoords, C64, ONE, ZERO};
use crate::tol;
use crate::twisted::left_regular;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("bundle basis is empty")]
    Empty,
    #[error("basis element {index} has shape {found:?}, expected {dim}x{dim}")]
    Shape { index: usize, found: (usize, usize), dim: usize },
    #[error("{degrees} degrees given for {basis} basis elements")]
    DegreeCount { degrees: usize, basis: usize },
    #[error("degree {degree} of basis element {index} is not a group element")]
    BadDegree { index: usize, degree: usize },
    #[error("basis is linearly dependent: smallest singular value {smallest:.3e} (element {index})")]
    DependentBasis { index: usize, smallest: f64 },
    #[error("adjoint of basis element {index} leaves the degree-{target} span (residual {residual:.3e})")]
    NotStarClosed { index: usize, target: usize, residual: f64 },
    #[error("product of basis elements {left} and {right} leaves the degree-{target} span (residual {residual:.3e})")]
    NotGraded { left: usize, right: usize, target: usize, residual: f64 },
    #[error("identity is not in the degree-e span (residual {residual:.3e})")]
    NotUnital { residual: f64 },
    #[error("matrix is not in the algebra (residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },
}

/// A graded basis element together with its degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousElement {
    pub matrix: CMat,
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct FellBundle {
    group: FiniteGroup,
    dim: usize,
    basis: Vec<CMat>,
    degrees: Vec<usize>,
    coords: SpanCoords,
}

/// Expansion residuals recorded during validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BundleHealth {
    pub smallest_singular_value: f64,
    pub star_residual: f64,
    pub grading_residual: f64,
    pub unit_residual: f64,
}

impl FellBundle {
    /// Validates every invariant exhaustively over basis pairs.
    pub fn new(group: &FiniteGroup, basis: Vec<CMat>, degrees: Vec<usize>) -> Result<Self, BundleError> {
        let bundle = Self::unchecked(group, basis, degrees)?;
        bundle.health()?;
        Ok(bundle)
    }

    /// Shape, degree and independence checks only.
    fn unchecked(group: &FiniteGroup, basis: Vec<CMat>, degrees: Vec<usize>) -> Result<Self, BundleError> {
        let first = basis.first().ok_or(BundleError::Empty)?;
        let dim = first.nrows();
        if degrees.len() != basis.len() {
            return Err(BundleError::DegreeCount {
                degrees: degrees.len(),
                basis: basis.len(),
            });
        }
        for (index, b) in basis.iter().enumerate() {
            if b.shape() != (dim, dim) {
                return Err(BundleError::Shape {
                    index,
                    found: b.shape(),
                    dim,
                });
            }
            if degrees[index] >= group.order() {
                return Err(BundleError::BadDegree {
                    index,
                    degree: degrees[index],
                });
            }
        }
        let sv = singular_values(&vectorize(&basis));
        let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if basis.len() > dim * dim || smallest <= tol::INDEPENDENCE {
            let index = match SpanCoords::new(basis.clone(), tol::INDEPENDENCE) {
                Err(linalg::SpanError::Dependent { index, .. }) => index,
                _ => basis.len() - 1,
            };
            return Err(BundleError::DependentBasis { index, smallest });
        }
        let coords = SpanCoords::new(basis.clone(), 1e-12).map_err(|e| match e {
            linalg::SpanError::Dependent { index, .. } => BundleError::DependentBasis { index, smallest },
            _ => BundleError::Empty,
        })?;
        Ok(Self {
            group: group.clone(),
            dim,
            basis,
            degrees,
            coords,
        })
    }

    /// Largest coefficient outside degree `target` plus reconstruction residual.
    fn off_degree(&self, m: &CMat, target: usize) -> (CVec, f64) {
        let (c, residual) = self.coords.expand(m);
        let scale = max_abs(m).max(1.0);
        let off = c
            .iter()
            .zip(&self.degrees)
            .filter(|(_, &d)| d != target)
            .map(|(z, _)| z.norm() / scale)
            .fold(0.0, f64::max);
        (c, residual.max(off))
    }

    /// Re-runs the invariant checks and reports the worst residuals.
    pub fn health(&self) -> Result<BundleHealth, BundleError> {
        let g = &self.group;
        let mut star_residual: f64 = 0.0;
        for (index, b) in self.basis.iter().enumerate() {
            let target = g.inv(self.degrees[index]);
            let (_, r) = self.off_degree(&b.adjoint(), target);
            if r > tol::CLOSURE {
                return Err(BundleError::NotStarClosed { index, target, residual: r });
            }
            star_residual = star_residual.max(r);
        }
        let mut grading_residual: f64 = 0.0;
        for (left, a) in self.basis.iter().enumerate() {
            for (right, b) in self.basis.iter().enumerate() {
                let target = g.mul(self.degrees[left], self.degrees[right]);
                let (_, r) = self.off_degree(&(a * b), target);
                if r > tol::CLOSURE {
                    return Err(BundleError::NotGraded {
                        left,
                        right,
                        target,
                        residual: r,
                    });
                }
                grading_residual = grading_residual.max(r);
            }
        }
        let (_, unit_residual) = self.off_degree(&linalg::identity(self.dim), g.identity());
        if unit_residual > tol::CLOSURE {
            return Err(BundleError::NotUnital { residual: unit_residual });
        }
        let sv = singular_values(&vectorize(&self.basis));
        Ok(BundleHealth {
            smallest_singular_value: sv.iter().cloned().fold(f64::INFINITY, f64::min),
            star_residual,
            grading_residual,
            unit_residual,
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// Ambient matrix size `N`.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Linear dimension of the algebra.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn coords(&self) -> &SpanCoords {
        &self.coords
    }

    pub fn homogeneous(&self, i: usize) -> HomogeneousElement {
        HomogeneousElement {
            matrix: self.basis[i].clone(),
            degree: self.degrees[i],
        }
    }

    /// Basis coefficients of `a`.
    pub fn coefficients(&self, a: &CMat) -> Result<CVec, BundleError> {
        if a.shape() != (self.dim, self.dim) {
            return Err(BundleError::NotInAlgebra { residual: f64::INFINITY });
        }
        let (c, residual) = self.coords.expand(a);
        if residual > tol::SPAN {
            return Err(BundleError::NotInAlgebra { residual });
        }
        Ok(c)
    }

    pub fn combine(&self, coeffs: &CVec) -> CMat {
        self.coords.combine(coeffs)
    }

    /// Degree-`g` part of a coefficient vector.
    pub fn component_coeffs(&self, coeffs: &CVec, g: usize) -> CVec {
        CVec::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.degrees)
                .map(|(c, &d)| if d == g { *c } else { ZERO }),
        )
    }

    /// `α^(g)(a)`.
    pub fn spectral_component(&self, a: &CMat, g: usize) -> Result<HomogeneousElement, BundleError> {
        let c = self.coefficients(a)?;
        Ok(HomogeneousElement {
            matrix: self.combine(&self.component_coeffs(&c, g)),
            degree: g,
        })
    }

    /// All components, indexed by group element.
    pub fn components(&self, a: &CMat) -> Result<Vec<CMat>, BundleError> {
        let c = self.coefficients(a)?;
        Ok(self
            .group
            .elements()
            .map(|g| self.combine(&self.component_coeffs(&c, g)))
            .collect())
    }

    /// `α(a) = Σ_g λ_g ⊗ α^(g)(a)` on `ℓ²(Γ) ⊗ ℂ^N`.
    pub fn coaction_matrix(&self, a: &CMat) -> Result<CMat, BundleError> {
        let parts = self.components(a)?;
        let n = self.group.order();
        let mut out = CMat::zeros(n * self.dim, n * self.dim);
        for (g, part) in parts.iter().enumerate() {
            if max_abs(part) > 0.0 {
                out += kron(&left_regular(&self.group, g), part);
            }
        }
        Ok(out)
    }

    /// Same bundle with every basis element conjugated by a unitary.
    pub fn conjugated(&self, u: &CMat) -> Result<Self, BundleError> {
        let basis = self.basis.iter().map(|b| linalg::conjugate_by(u, b)).collect();
        Self::new(&self.group, basis, self.degrees.clone())
    }

    /// Forgets the grading: every basis element gets degree `e`.
    pub fn ungraded(&self) -> Self {
        let degrees = vec![self.group.identity(); self.basis.len()];
        Self::unchecked(&self.group, self.basis.clone(), degrees).expect("basis already validated")
    }

    /// `C*(Γ)` on `ℓ²(Γ)`, with `λ_g` in degree `g`.
    pub fn group_algebra(group: &FiniteGroup) -> Self {
        let basis = group.elements().map(|g| left_regular(group, g)).collect();
        Self::new(group, basis, group.elements().collect()).expect("group algebra is a Fell bundle")
    }

    /// `C*(H)` on `ℓ²(H)` for a subgroup `H ⊆ Γ`, `λ_h` in degree `h`.
    pub fn subgroup_algebra(subgroup: &Subgroup) -> Self {
        let parent = subgroup.parent();
        let members = subgroup.members();
        let m = members.len();
        let pos = |g: usize| members.binary_search(&g).expect("closed subgroup");
        let basis = members
            .iter()
            .map(|&h| {
                let mut l = CMat::zeros(m, m);
                for &k in members {
                    l[(pos(parent.mul(h, k)), pos(k))] = ONE;
                }
                l
            })
            .collect();
        Self::new(parent, basis, members.to_vec()).expect("subgroup algebra is a Fell bundle")
    }

    /// `M_n(ℂ)` with all matrix units in degree `e`.
    pub fn full_matrix(group: &FiniteGroup, n: usize) -> Self {
        let basis = (0..n * n)
            .map(|k| {
                let mut m = CMat::zeros(n, n);
                m[(k / n, k % n)] = ONE;
                m
            })
            .collect();
        Self::new(group, basis, vec![group.identity(); n * n]).expect("matrix units span M_n")
    }

    /// `ℂ^n` as diagonal matrices, all in degree `e`.
    pub fn diagonal(group: &FiniteGroup, n: usize) -> Self {
        let basis = (0..n).map(|k| crate::twisted::delta_projection(&FiniteGroup::cyclic(n), k)).collect();
        Self::new(group, basis, vec![group.identity(); n]).expect("diagonal units span ℂ^n")
    }

    /// `M₂(ℂ)` graded by `ℤ₂ × ℤ₂` via `I, X, Y, Z` in degrees
    /// `(0,0), (1,0), (1,1), (0,1)`. The group must be
    /// `cyclic(2).direct_product(&cyclic(2))`.
    pub fn pauli(group: &FiniteGroup) -> Result<Self, BundleError> {
        let i = C64::new(0.0, 1.0);
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let y = CMat::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]);
        let z = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        Self::new(group, vec![linalg::identity(2), x, y, z], vec![0, 2, 3, 1])
    }

    /// `M_n(ℂ)` graded by `ℤ_n × ℤ_n`: `S^a C^b` in degree `(a, b)` with
    /// `S` the cyclic shift and `C` the clock matrix. The group must be
    /// `cyclic(n).direct_product(&cyclic(n))`.
    pub fn clock_shift(group: &FiniteGroup, n: usize) -> Result<Self, BundleError> {
        let zn = FiniteGroup::cyclic(n);
        let shift = left_regular(&zn, 1);
        let clock = CMat::from_diagonal(&CVec::from_iterator(
            n,
            (0..n).map(|k| crate::cocycle::phase_from_turns(k as i64, n as i64).expect("n > 0")),
        ));
        let mut basis = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let sa = (0..a).fold(linalg::identity(n), |acc, _| &acc * &shift);
                let cb = (0..b).fold(linalg::identity(n), |acc, _| &acc * &clock);
                basis.push(&sa * &cb);
            }
        }
        Self::new(group, basis, (0..n * n).collect())
    }

    /// `M₂(ℂ)` over `ℤ₂`: diagonal units in degree 0, off-diagonal in degree 1.
    pub fn off_diagonal_m2(group: &FiniteGroup) -> Result<Self, BundleError> {
        let unit = |r, c| {
            let mut m = CMat::zeros(2, 2);
            m[(r, c)] = ONE;
            m
        };
        Self::new(group, vec![unit(0, 0), unit(1, 1), unit(0, 1), unit(1, 0)], vec![0, 0, 1, 1])
    }

    /// `C*(Γ)` on `ℓ²(Γ) ⊕ ℂ`: `λ_g ⊕ 0` in degree `g`, plus the ancilla
    /// projection `0 ⊕ 1` in degree `e`.
    pub fn group_algebra_with_ancilla(group: &FiniteGroup) -> Self {
        let n = group.order();
        let mut basis: Vec<CMat> = group
            .elements()
            .map(|g| {
                let mut m = CMat::zeros(n + 1, n + 1);
                m.view_mut((0, 0), (n, n)).copy_from(&left_regular(group, g));
                m
            })
            .collect();
        let mut anc = CMat::zeros(n + 1, n + 1);
        anc[(n, n)] = ONE;
        basis.push(anc);
        let mut degrees: Vec<usize> = group.elements().collect();
        degrees.push(group.identity());
        Self::new(group, basis, degrees).expect("ancilla extension is a Fell bundle")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::folner_witness;
    use crate::linalg::{max_abs_diff, mul};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn klein() -> FiniteGroup {
        let z2 = FiniteGroup::cyclic(2);
        z2.direct_product(&z2)
    }

    fn random_element(b: &FellBundle, rng: &mut ChaCha8Rng) -> CMat {
        let c = CVec::from_iterator(
            b.len(),
            (0..b.len()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        b.combine(&c)
    }

    #[test]
    fn example_bundles_validate() {
        let t = FiniteGroup::trivial();
        assert_eq!(FellBundle::full_matrix(&t, 2).len(), 4);
        let z2 = FiniteGroup::cyclic(2);
        let ga = FellBundle::group_algebra(&z2);
        assert_eq!(ga.degrees(), &[0, 1]);
        assert!(FellBundle::pauli(&klein()).is_ok());
        let z3 = FiniteGroup::cyclic(3);
        assert!(FellBundle::clock_shift(&z3.direct_product(&z3), 3).is_ok());
        assert!(FellBundle::off_diagonal_m2(&z2).is_ok());
        assert_eq!(FellBundle::group_algebra_with_ancilla(&FiniteGroup::cyclic(4)).len(), 5);
        let q8 = FiniteGroup::quaternion();
        let h = q8.subgroup_closure(&[1]).unwrap();
        assert_eq!(FellBundle::subgroup_algebra(&h).len(), 2);
    }

    #[test]
    fn invalid_bundles_are_refused() {
        let z2 = FiniteGroup::cyclic(2);
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let e01 = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        // a projection alone is closed but not unital
        let e00 = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        assert!(matches!(
            FellBundle::new(&z2, vec![e00], vec![0]),
            Err(BundleError::NotUnital { .. })
        ));
        // e01 without its adjoint
        assert!(matches!(
            FellBundle::new(&z2, vec![linalg::identity(2), e01.clone()], vec![0, 1]),
            Err(BundleError::NotStarClosed { .. })
        ));
        // X and 2X are parallel
        assert!(matches!(
            FellBundle::new(&z2, vec![linalg::identity(2), x.clone(), &x * C64::new(2.0, 0.0)], vec![0, 1, 1]),
            Err(BundleError::DependentBasis { .. })
        ));
        let e10 = e01.transpose();
        let units = vec![linalg::identity(2), e01, e10];
        assert!(matches!(
            FellBundle::new(&z2, units, vec![0, 1, 1]),
            Err(BundleError::NotGraded { .. })
        ));
    }

    #[test]
    fn pauli_components_and_coaction() {
        let p = FellBundle::pauli(&klein()).unwrap();
        let (x, z) = (p.basis()[1].clone(), p.basis()[3].clone());
        let c = p.spectral_component(&(&x + &z), 2).unwrap();
        assert!(max_abs_diff(&c.matrix, &x) < 1e-14);
        let ax = p.coaction_matrix(&x).unwrap();
        let az = p.coaction_matrix(&z).unwrap();
        let axz = p.coaction_matrix(&(&x * &z)).unwrap();
        assert!(max_abs_diff(&mul(&ax, &az), &axz) < 1e-12);
        assert!(max_abs_diff(&p.coaction_matrix(&linalg::identity(2)).unwrap(), &linalg::identity(8)) < 1e-14);
        assert!(matches!(p.coefficients(&linalg::identity(3)), Err(BundleError::NotInAlgebra { .. })));
    }

    #[test]
    fn group_algebra_coaction_is_the_coproduct() {
        let z2 = FiniteGroup::cyclic(2);
        let ga = FellBundle::group_algebra(&z2);
        for g in z2.elements() {
            let l = left_regular(&z2, g);
            assert_eq!(ga.coaction_matrix(&l).unwrap(), kron(&l, &l));
        }
    }

    #[test]
    fn components_form_a_projection_system() {
        let z3 = FiniteGroup::cyclic(3);
        let g = z3.direct_product(&z3);
        let b = FellBundle::clock_shift(&g, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, y) = (random_element(&b, &mut rng), random_element(&b, &mut rng));
        let xs = b.components(&x).unwrap();
        let ys = b.components(&y).unwrap();
        let xys = b.components(&(&x * &y)).unwrap();
        let total = xs.iter().fold(CMat::zeros(3, 3), |acc, m| acc + m);
        assert!(max_abs_diff(&total, &x) < 1e-10);
        for k in g.elements() {
            let mut conv = CMat::zeros(3, 3);
            for a in g.elements() {
                conv += &xs[a] * &ys[g.mul(g.inv(a), k)];
            }
            assert!(max_abs_diff(&conv, &xys[k]) < 1e-10);
            let twice = b.spectral_component(&xs[k], k).unwrap().matrix;
            assert!(max_abs_diff(&twice, &xs[k]) < 1e-10);
            for other in g.elements().filter(|&o| o != k) {
                assert!(max_abs(&b.spectral_component(&xs[k], other).unwrap().matrix) < 1e-10);
            }
            let adj = b.components(&x.adjoint()).unwrap();
            assert!(max_abs_diff(&xs[k].adjoint(), &adj[g.inv(k)]) < 1e-10);
        }
    }

    #[test]
    fn coaction_is_injective_on_the_basis() {
        let p = FellBundle::pauli(&klein()).unwrap();
        let images: Vec<CMat> = p.basis().iter().map(|b| p.coaction_matrix(b).unwrap()).collect();
        let sv = singular_values(&vectorize(&images));
        assert!(sv.iter().all(|&s| s > 1e-8));
    }

    #[test]
    fn folner_witness_reproduces_homogeneous_elements() {
        let g = klein();
        let p = FellBundle::pauli(&g).unwrap();
        let w = folner_witness(&g);
        for (b, &d) in p.basis().iter().zip(p.degrees()) {
            assert!(max_abs_diff(&w.approximate(d, b), b) < 1e-15);
        }
    }
}
