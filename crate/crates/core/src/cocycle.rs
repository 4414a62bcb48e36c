//! Normalized 2-cocycles with values in U(1) or ℝ.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::group::{DiscreteGroup, FiniteGroup, FreeAbelianGroup, Subgroup};
use crate::linalg::{phase, C64, ONE};
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("cocycle table is {rows}x{cols}, group has order {order}")]
    DimensionMismatch { rows: usize, cols: usize, order: usize },
    #[error("cocycles live on different groups")]
    GroupMismatch,
    #[error("no coboundary solution: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NoSolution { residual: f64, tolerance: f64 },
    #[error("form matrix is not skew-symmetric (deviation {deviation:.3e})")]
    NotSkewSymmetric { deviation: f64 },
    #[error("map ψ has {len} values, group has order {order}")]
    MapLength { len: usize, order: usize },
    #[error("rational angle {num}/{den} has zero denominator")]
    ZeroDenominator { num: i64, den: i64 },
}

/// Evaluation interface used by generic twisted convolution.
pub trait Cocycle<G: DiscreteGroup> {
    fn value(&self, g: &G::Elem, h: &G::Elem) -> C64;
}

/// Outcome of [`TwoCocycleU1::validate`] or [`TwoCocycleReal::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CocycleReport {
    pub identity_residual: f64,
    pub normalization_residual: f64,
    /// Deviation of `|ω(g,h)|` from 1; absent for real cocycles.
    pub modulus_residual: Option<f64>,
    /// Triple with the worst identity residual when that residual fails.
    pub witness: Option<(usize, usize, usize)>,
    pub tolerance: f64,
    pub passed: bool,
}

impl CocycleReport {
    pub fn max_residual(&self) -> f64 {
        self.identity_residual
            .max(self.normalization_residual)
            .max(self.modulus_residual.unwrap_or(0.0))
    }
}

/// `e^{2πi p/q}`, exact when `4p/q` is an integer.
pub fn phase_from_turns(num: i64, den: i64) -> Result<C64, CocycleError> {
    if den == 0 {
        return Err(CocycleError::ZeroDenominator { num, den });
    }
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    let p = num.rem_euclid(den);
    if (4 * p) % den == 0 {
        return Ok(match 4 * p / den {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        });
    }
    Ok(phase(std::f64::consts::TAU * p as f64 / den as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoCocycleU1 {
    #[serde(skip)]
    group: FiniteGroup,
    table: Vec<C64>,
}

impl TwoCocycleU1 {
    /// Wraps a table without validating it; see [`Self::validate`].
    pub fn from_table(group: &FiniteGroup, table: &[Vec<C64>]) -> Result<Self, CocycleError> {
        let n = group.order();
        let cols = table.first().map_or(0, Vec::len);
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(CocycleError::DimensionMismatch {
                rows: table.len(),
                cols,
                order: n,
            });
        }
        Ok(Self {
            group: group.clone(),
            table: table.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(group: &FiniteGroup, f: impl Fn(usize, usize) -> C64) -> Self {
        let n = group.order();
        Self {
            group: group.clone(),
            table: (0..n * n).map(|i| f(i / n, i % n)).collect(),
        }
    }

    pub fn trivial(group: &FiniteGroup) -> Self {
        Self::from_fn(group, |_, _| ONE)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn value(&self, g: usize, h: usize) -> C64 {
        self.table[g * self.group.order() + h]
    }

    pub fn table(&self) -> Vec<Vec<C64>> {
        self.table.chunks(self.group.order()).map(|r| r.to_vec()).collect()
    }

    pub fn validate(&self) -> CocycleReport {
        let g = &self.group;
        let e = g.identity();
        let w = |a, b| self.value(a, b);
        let mut identity_residual: f64 = 0.0;
        let mut witness = (0, 0, 0);
        for a in g.elements() {
            for b in g.elements() {
                for c in g.elements() {
                    let lhs = w(a, b) * w(g.mul(a, b), c);
                    let rhs = w(b, c) * w(a, g.mul(b, c));
                    let r = (lhs - rhs).norm();
                    if r > identity_residual {
                        identity_residual = r;
                        witness = (a, b, c);
                    }
                }
            }
        }
        let normalization_residual = g
            .elements()
            .map(|a| (w(a, e) - ONE).norm().max((w(e, a) - ONE).norm()))
            .fold(0.0, f64::max);
        let modulus_residual = self.table.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
        let passed = identity_residual <= tol::COCYCLE
            && normalization_residual <= tol::COCYCLE
            && modulus_residual <= tol::COCYCLE;
        CocycleReport {
            identity_residual,
            normalization_residual,
            modulus_residual: Some(modulus_residual),
            witness: (identity_residual > tol::COCYCLE).then_some(witness),
            tolerance: tol::COCYCLE,
            passed,
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            group: self.group.clone(),
            table: self.table.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `ω̃(g,h) = ω(h⁻¹, g⁻¹)`.
    pub fn opposite(&self) -> Self {
        let g = &self.group;
        Self::from_fn(g, |a, b| self.value(g.inv(b), g.inv(a)))
    }

    pub fn product(&self, other: &Self) -> Result<Self, CocycleError> {
        if self.group != other.group {
            return Err(CocycleError::GroupMismatch);
        }
        Ok(Self {
            group: self.group.clone(),
            table: self.table.iter().zip(&other.table).map(|(a, b)| a * b).collect(),
        })
    }

    /// The map `g ↦ ω(g, g⁻¹)` relating `ω̄` and `ω̃`.
    pub fn antipode_map(&self) -> Vec<C64> {
        self.group.elements().map(|g| self.value(g, self.group.inv(g))).collect()
    }

    /// `max |ω(g,h) - 1|`.
    pub fn distance_from_trivial(&self) -> f64 {
        self.table.iter().map(|z| (z - ONE).norm()).fold(0.0, f64::max)
    }

    /// `ψ(g)ψ(h)ψ(gh)̄ ω(g,h)`, the cocycle transported by `ψ`.
    pub fn transport(&self, psi: &[C64]) -> Result<Self, CocycleError> {
        let g = &self.group;
        if psi.len() != g.order() {
            return Err(CocycleError::MapLength {
                len: psi.len(),
                order: g.order(),
            });
        }
        let e = g.identity();
        Ok(Self::from_fn(g, |a, b| {
            if a == e || b == e {
                // |ψ|² = 1 analytically; keep normalization exact
                psi[e] * self.value(a, b)
            } else {
                psi[a] * psi[b] * psi[g.mul(a, b)].conj() * self.value(a, b)
            }
        }))
    }

    /// Coboundary `∂ψ(g,h) = ψ(g)ψ(h)ψ(gh)̄` of a map with `ψ(e) = 1`.
    pub fn coboundary(group: &FiniteGroup, psi: &[C64]) -> Result<Self, CocycleError> {
        Self::trivial(group).transport(psi)
    }
}

impl Cocycle<FiniteGroup> for TwoCocycleU1 {
    fn value(&self, g: &usize, h: &usize) -> C64 {
        TwoCocycleU1::value(self, *g, *h)
    }
}

/// Largest deviation of `ψ(g)ψ(h)ω(g,h)ψ(gh)̄` from `ω′(g,h)`.
pub fn cohomology_residual(omega: &TwoCocycleU1, omega_prime: &TwoCocycleU1, psi: &[C64]) -> Result<f64, CocycleError> {
    if omega.group != omega_prime.group {
        return Err(CocycleError::GroupMismatch);
    }
    let moved = omega.transport(psi)?;
    Ok(moved
        .table
        .iter()
        .zip(&omega_prime.table)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// True iff `ψ` carries `ω` to `ω′` within the cohomology tolerance.
pub fn check_cohomologous(omega: &TwoCocycleU1, omega_prime: &TwoCocycleU1, psi: &[C64]) -> bool {
    cohomology_residual(omega, omega_prime, psi).is_ok_and(|r| r <= tol::COHOMOLOGOUS)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoCocycleReal {
    #[serde(skip)]
    group: FiniteGroup,
    table: Vec<f64>,
}

impl TwoCocycleReal {
    pub fn from_table(group: &FiniteGroup, table: &[Vec<f64>]) -> Result<Self, CocycleError> {
        let n = group.order();
        let cols = table.first().map_or(0, Vec::len);
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(CocycleError::DimensionMismatch {
                rows: table.len(),
                cols,
                order: n,
            });
        }
        Ok(Self {
            group: group.clone(),
            table: table.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(group: &FiniteGroup, f: impl Fn(usize, usize) -> f64) -> Self {
        let n = group.order();
        Self {
            group: group.clone(),
            table: (0..n * n).map(|i| f(i / n, i % n)).collect(),
        }
    }

    pub fn zero(group: &FiniteGroup) -> Self {
        Self::from_fn(group, |_, _| 0.0)
    }

    /// `∂φ(g,h) = φ(g) − φ(gh) + φ(h)`.
    pub fn coboundary(group: &FiniteGroup, phi: &[f64]) -> Self {
        assert_eq!(phi.len(), group.order());
        Self::from_fn(group, |a, b| phi[a] - phi[group.mul(a, b)] + phi[b])
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn value(&self, g: usize, h: usize) -> f64 {
        self.table[g * self.group.order() + h]
    }

    pub fn table(&self) -> Vec<Vec<f64>> {
        self.table.chunks(self.group.order()).map(|r| r.to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.table.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> CocycleReport {
        let g = &self.group;
        let e = g.identity();
        let w = |a, b| self.value(a, b);
        let mut identity_residual: f64 = 0.0;
        let mut witness = (0, 0, 0);
        for a in g.elements() {
            for b in g.elements() {
                for c in g.elements() {
                    let r = (w(a, b) + w(g.mul(a, b), c) - w(b, c) - w(a, g.mul(b, c))).abs();
                    if r > identity_residual {
                        identity_residual = r;
                        witness = (a, b, c);
                    }
                }
            }
        }
        let normalization_residual = g
            .elements()
            .map(|a| w(a, e).abs().max(w(e, a).abs()))
            .fold(0.0, f64::max);
        let passed = identity_residual <= tol::COCYCLE && normalization_residual <= tol::COCYCLE;
        CocycleReport {
            identity_residual,
            normalization_residual,
            modulus_residual: None,
            witness: (identity_residual > tol::COCYCLE).then_some(witness),
            tolerance: tol::COCYCLE,
            passed,
        }
    }

    /// `ω_θ = e^{iθω₀}`.
    pub fn exp(&self, theta: f64) -> TwoCocycleU1 {
        let mut out = TwoCocycleU1::from_fn(&self.group, |a, b| phase(theta * self.value(a, b)));
        // keep normalization exact even if the table has -0.0 or tiny noise
        let e = self.group.identity();
        for a in self.group.elements() {
            out.table[a * self.group.order() + e] = ONE;
            out.table[e * self.group.order() + a] = ONE;
        }
        out
    }

    /// `ω̃₀(g,h) = ω₀(h⁻¹, g⁻¹)`.
    pub fn opposite(&self) -> Self {
        let g = &self.group;
        Self::from_fn(g, |a, b| self.value(g.inv(b), g.inv(a)))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            group: self.group.clone(),
            table: self.table.iter().map(|x| s * x).collect(),
        }
    }

    /// Solves `ω₀(h₀,h₁) = φ(h₀) − φ(h₀h₁) + φ(h₁)` on `H` by least squares.
    pub fn coboundary_solve(&self, subgroup: &Subgroup) -> Result<CoboundaryWitness, CocycleError> {
        if subgroup.parent() != &self.group {
            return Err(CocycleError::GroupMismatch);
        }
        let g = &self.group;
        let members = subgroup.members();
        let e = g.identity();
        let unknowns: Vec<usize> = members.iter().copied().filter(|&h| h != e).collect();
        let col = |h: usize| unknowns.iter().position(|&u| u == h);
        let rows = members.len() * members.len();
        let mut a = DMatrix::<f64>::zeros(rows, unknowns.len());
        let mut b = DVector::<f64>::zeros(rows);
        for (i, &h0) in members.iter().enumerate() {
            for (j, &h1) in members.iter().enumerate() {
                let r = i * members.len() + j;
                if let Some(c) = col(h0) {
                    a[(r, c)] += 1.0;
                }
                if let Some(c) = col(g.mul(h0, h1)) {
                    a[(r, c)] -= 1.0;
                }
                if let Some(c) = col(h1) {
                    a[(r, c)] += 1.0;
                }
                b[r] = self.value(h0, h1);
            }
        }
        let solution = if unknowns.is_empty() {
            DVector::zeros(0)
        } else {
            a.clone()
                .svd(true, true)
                .solve(&b, 1e-12)
                .map_err(|_| CocycleError::NoSolution {
                    residual: f64::INFINITY,
                    tolerance: tol::COHOMOLOGOUS,
                })?
        };
        let phi: Vec<f64> = members
            .iter()
            .map(|&h| col(h).map_or(0.0, |c| solution[c]))
            .collect();
        let witness = CoboundaryWitness {
            subgroup: subgroup.clone(),
            phi,
        };
        let residual = witness.residual(self);
        if residual > tol::COHOMOLOGOUS {
            return Err(CocycleError::NoSolution {
                residual,
                tolerance: tol::COHOMOLOGOUS,
            });
        }
        Ok(witness)
    }
}

/// A map `φ: H → ℝ`, `φ(e) = 0`, whose coboundary is a given real cocycle on `H`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoboundaryWitness {
    subgroup: Subgroup,
    /// Values aligned with `subgroup.members()`.
    phi: Vec<f64>,
}

impl CoboundaryWitness {
    pub fn new(subgroup: &Subgroup, phi: Vec<f64>) -> Self {
        assert_eq!(phi.len(), subgroup.order());
        Self {
            subgroup: subgroup.clone(),
            phi,
        }
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// `φ(h)`; panics when `h ∉ H`.
    pub fn phi(&self, h: usize) -> f64 {
        let i = self.subgroup.members().binary_search(&h).expect("element of the subgroup");
        self.phi[i]
    }

    /// `max_{h₀,h₁ ∈ H} |φ(h₀) − φ(h₀h₁) + φ(h₁) − ω(h₀,h₁)|`, with `|φ(e)|` folded in.
    pub fn residual(&self, omega: &TwoCocycleReal) -> f64 {
        let g = self.subgroup.parent();
        let members = self.subgroup.members();
        let mut r = self.phi(g.identity()).abs();
        for &h0 in members {
            for &h1 in members {
                let d = self.phi(h0) - self.phi(g.mul(h0, h1)) + self.phi(h1);
                r = r.max((d - omega.value(h0, h1)).abs());
            }
        }
        r
    }
}

/// `ω(x,y) = e^{i⟨θx, y⟩}` on `ℤⁿ`, with `⟨θx, y⟩ = yᵀθx`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearCocycle {
    theta: DMatrix<f64>,
}

impl BilinearCocycle {
    pub fn new(theta: DMatrix<f64>) -> Result<Self, CocycleError> {
        assert!(theta.is_square(), "form matrix must be square");
        let deviation = (&theta + theta.transpose()).camax();
        if deviation > tol::COCYCLE {
            return Err(CocycleError::NotSkewSymmetric { deviation });
        }
        Ok(Self { theta })
    }

    /// The form on `ℤ²` whose generators satisfy `uv = e^{iθ} vu`.
    pub fn torus(theta: f64) -> Self {
        Self::new(DMatrix::from_row_slice(2, 2, &[0.0, -theta / 2.0, theta / 2.0, 0.0])).expect("skew")
    }

    pub fn rank(&self) -> usize {
        self.theta.nrows()
    }

    pub fn form(&self, x: &[i64], y: &[i64]) -> f64 {
        let n = self.rank();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += y[i] as f64 * self.theta[(i, j)] * x[j] as f64;
            }
        }
        s
    }

    pub fn eval(&self, x: &[i64], y: &[i64]) -> C64 {
        phase(self.form(x, y))
    }
}

impl Cocycle<FreeAbelianGroup> for BilinearCocycle {
    fn value(&self, g: &Vec<i64>, h: &Vec<i64>) -> C64 {
        self.eval(g, h)
    }
}

/// `ω₀ = ∂φ` with `φ(e) = 0` and other values uniform in `[-scale, scale]`.
pub fn random_real_coboundary<R: Rng>(group: &FiniteGroup, rng: &mut R, scale: f64) -> TwoCocycleReal {
    let e = group.identity();
    let phi: Vec<f64> = group
        .elements()
        .map(|g| if g == e { 0.0 } else { rng.random_range(-scale..=scale) })
        .collect();
    TwoCocycleReal::coboundary(group, &phi)
}

/// `∂ψ` for `ψ(e) = 1` and other values uniformly random on the circle.
pub fn random_u1_coboundary<R: Rng>(group: &FiniteGroup, rng: &mut R) -> TwoCocycleU1 {
    let e = group.identity();
    let psi: Vec<C64> = group
        .elements()
        .map(|g| if g == e { ONE } else { phase(rng.random_range(0.0..std::f64::consts::TAU)) })
        .collect();
    TwoCocycleU1::coboundary(group, &psi).expect("length matches")
}

/// `ω((x₁,x₂),(y₁,y₂)) = ζ^{x₂y₁}` on `ℤ_n × ℤ_n` built by
/// [`FiniteGroup::direct_product`], with `ζ = e^{2πi/n}`.
pub fn heisenberg_bicharacter(n: usize) -> (FiniteGroup, TwoCocycleU1) {
    let zn = FiniteGroup::cyclic(n);
    let g = zn.direct_product(&zn);
    let n64 = n as i64;
    let omega = TwoCocycleU1::from_fn(&g, |a, b| {
        let x2 = (a % n) as i64;
        let y1 = (b / n) as i64;
        phase_from_turns(x2 * y1, n64).expect("nonzero modulus")
    });
    (g, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn klein_bicharacter() -> (FiniteGroup, TwoCocycleU1) {
        heisenberg_bicharacter(2)
    }

    #[test]
    fn exact_quadrant_phases() {
        assert_eq!(phase_from_turns(1, 4).unwrap(), C64::new(0.0, 1.0));
        assert_eq!(phase_from_turns(-1, 2).unwrap(), C64::new(-1.0, 0.0));
        assert_eq!(phase_from_turns(3, 3).unwrap(), ONE);
        assert!((phase_from_turns(1, 3).unwrap() - phase(std::f64::consts::TAU / 3.0)).norm() < 1e-15);
        assert!(phase_from_turns(1, 0).is_err());
    }

    #[test]
    fn trivial_cocycle_validates_with_zero_residual() {
        let r = TwoCocycleU1::trivial(&FiniteGroup::symmetric(3)).validate();
        assert!(r.passed);
        assert_eq!(r.max_residual(), 0.0);
    }

    #[test]
    fn klein_bicharacter_passes_and_negated_entry_fails() {
        let (g, w) = klein_bicharacter();
        // oracle: the 64 triples by hand from the closed form
        let val = |a: usize, b: usize| if (a % 2) * (b / 2) == 1 { -1.0 } else { 1.0 };
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(w.value(a, b), C64::new(val(a, b), 0.0));
            }
        }
        assert!(w.validate().passed);
        let mut t = w.table();
        t[1][2] = -t[1][2];
        let bad = TwoCocycleU1::from_table(&g, &t).unwrap().validate();
        assert!(!bad.passed);
        let (a, b, c) = bad.witness.unwrap();
        let ww = |x: usize, y: usize| t[x][y];
        let lhs = ww(a, b) * ww(g.mul(a, b), c);
        let rhs = ww(b, c) * ww(a, g.mul(b, c));
        assert!((lhs - rhs).norm() > 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let g = FiniteGroup::cyclic(3);
        assert!(matches!(
            TwoCocycleU1::from_table(&g, &[vec![ONE; 3], vec![ONE; 3]]),
            Err(CocycleError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exp_special_values() {
        let g = FiniteGroup::cyclic(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w0 = random_real_coboundary(&g, &mut rng, 1.0);
        assert_eq!(w0.exp(0.0).distance_from_trivial(), 0.0);
        assert!(w0.exp(1.0).validate().passed);
        let integer = TwoCocycleReal::coboundary(&g, &[0.0, 2.0, -1.0]);
        assert!(integer.exp(std::f64::consts::TAU).distance_from_trivial() < 1e-12);
    }

    #[test]
    fn opposite_of_klein_bicharacter() {
        let (_, w) = klein_bicharacter();
        let op = w.opposite();
        let val = |a: usize, b: usize| if (b % 2) * (a / 2) == 1 { -1.0 } else { 1.0 };
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(op.value(a, b), C64::new(val(a, b), 0.0));
            }
        }
        assert!(op.validate().passed);
        assert_eq!(op.opposite(), w);
    }

    #[test]
    fn products_and_conjugates() {
        let (g, w) = klein_bicharacter();
        assert_eq!(w.product(&w).unwrap().distance_from_trivial(), 0.0);
        assert_eq!(w.product(&w.conjugate()).unwrap().distance_from_trivial(), 0.0);
        assert_eq!(TwoCocycleU1::trivial(&g).conjugate(), TwoCocycleU1::trivial(&g));
        let other = TwoCocycleU1::trivial(&FiniteGroup::cyclic(4));
        assert_eq!(w.product(&other), Err(CocycleError::GroupMismatch));
    }

    #[test]
    fn conjugate_and_opposite_are_cohomologous_via_antipode() {
        let (g, w) = klein_bicharacter();
        assert!(check_cohomologous(&w, &w, &vec![ONE; 4]));
        assert!(check_cohomologous(&w.conjugate(), &w.opposite(), &w.antipode_map()));
        assert!(!check_cohomologous(&w.conjugate(), &w.opposite(), &vec![ONE; g.order()]));
    }

    #[test]
    fn coboundary_roundtrip_on_z4() {
        let g = FiniteGroup::cyclic(4);
        let zero = TwoCocycleReal::zero(&g).coboundary_solve(&g.whole()).unwrap();
        assert!(g.elements().all(|h| zero.phi(h).abs() < 1e-14));
        let phi_star = [0.0, 0.7, -1.3, 0.25];
        let w0 = TwoCocycleReal::coboundary(&g, &phi_star);
        let witness = w0.coboundary_solve(&g.whole()).unwrap();
        let rebuilt = TwoCocycleReal::coboundary(&g, &(0..4).map(|h| witness.phi(h)).collect::<Vec<_>>());
        for a in 0..4 {
            for b in 0..4 {
                assert!((rebuilt.value(a, b) - w0.value(a, b)).abs() < 1e-10);
            }
        }
        let mut t = w0.table();
        t[1][2] += 0.5;
        let broken = TwoCocycleReal::from_table(&g, &t).unwrap();
        assert!(!broken.validate().passed);
        assert!(matches!(broken.coboundary_solve(&g.whole()), Err(CocycleError::NoSolution { .. })));
    }

    #[test]
    fn bilinear_form() {
        use nalgebra::DMatrix;
        let zero = BilinearCocycle::new(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(zero.eval(&[1, 2], &[3, -4]), ONE);
        assert!(matches!(
            BilinearCocycle::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])),
            Err(CocycleError::NotSkewSymmetric { .. })
        ));
        let t = 0.37;
        let w = BilinearCocycle::new(DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0])).unwrap();
        let (x, y) = ([2, -1], [1, 3]);
        let form = w.form(&x, &y);
        let ratio = w.eval(&x, &y) * w.eval(&y, &x).conj();
        assert!((ratio - phase(2.0 * form)).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut v = || [rng.random_range(-20..=20), rng.random_range(-20..=20)];
            let (a, b, c) = (v(), v(), v());
            let ab = [a[0] + b[0], a[1] + b[1]];
            let bc = [b[0] + c[0], b[1] + c[1]];
            let lhs = w.eval(&a, &b) * w.eval(&ab, &c);
            let rhs = w.eval(&b, &c) * w.eval(&a, &bc);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    fn corpus_group(k: usize) -> FiniteGroup {
        match k % 5 {
            0 => FiniteGroup::cyclic(4),
            1 => FiniteGroup::symmetric(3),
            2 => FiniteGroup::quaternion(),
            3 => FiniteGroup::dihedral(4),
            _ => heisenberg_bicharacter(3).0,
        }
    }

    proptest! {
        #[test]
        fn exp_is_additive_in_theta(k in 0usize..5, seed in any::<u64>(), t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            let g = corpus_group(k);
            let w0 = random_real_coboundary(&g, &mut ChaCha8Rng::seed_from_u64(seed), 2.0);
            let sum = w0.exp(t1 + t2);
            let prod = w0.exp(t1).product(&w0.exp(t2)).unwrap();
            for a in g.elements() {
                for b in g.elements() {
                    prop_assert!((sum.value(a, b) - prod.value(a, b)).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn derived_cocycles_stay_valid(k in 0usize..5, seed in any::<u64>()) {
            let g = corpus_group(k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_u1_coboundary(&g, &mut rng).product(&random_real_coboundary(&g, &mut rng, 1.0).exp(0.8)).unwrap();
            prop_assert!(w.validate().passed);
            prop_assert!(w.opposite().validate().passed);
            prop_assert!(w.conjugate().validate().passed);
            prop_assert!(check_cohomologous(&w.conjugate(), &w.opposite(), &w.antipode_map()));
            let psi: Vec<C64> = g.elements().map(|h| if h == g.identity() { ONE } else { phase(h as f64 * 0.3) }).collect();
            prop_assert!(w.transport(&psi).unwrap().validate().passed);
        }

        #[test]
        fn real_cocycles_are_coboundaries_on_every_subgroup(k in 0usize..5, seed in any::<u64>()) {
            let g = corpus_group(k);
            let w0 = random_real_coboundary(&g, &mut ChaCha8Rng::seed_from_u64(seed), 3.0).opposite();
            for h in g.all_subgroups() {
                prop_assert!(w0.coboundary_solve(&h).is_ok());
            }
        }
    }
}
