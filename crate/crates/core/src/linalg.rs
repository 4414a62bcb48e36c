//! Dense complex matrix helpers shared by every algebra model.
//!
//! Operators on tensor products use row-major leg ordering: for leg dimensions
//! `[d0, d1, ...]` the basis vector `e_{i0} ⊗ e_{i1} ⊗ ...` sits at index
//! `((i0 * d1) + i1) * d2 + ...`, which is what `DMatrix::kronecker` produces.

use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Unit-modulus complex number `e^{i t}`.
pub fn phase(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm_sqr())).sqrt()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm_sqr()))
        .sqrt()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `max(|U U* - 1|, |U* U - 1|)` entrywise.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    let id = identity(n);
    let ua = u.adjoint();
    max_abs_diff(&mul(u, &ua), &id).max(max_abs_diff(&mul(&ua, u), &id))
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

fn nonzeros(m: &CMat) -> usize {
    m.iter().filter(|z| **z != ZERO).count()
}

/// Matrix product that skips zero entries when either factor is sparse.
///
/// Operators built from group elements (λ_g, ρ_k, δ_h, W, and `λ_g ⊗ b`)
/// have at most one nonzero block per column, so most products here cost
/// `nnz · n` instead of `n³`.
pub fn mul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "dimension mismatch in mul");
    let (n, inner, m) = (a.nrows(), a.ncols(), b.ncols());
    if let Some((rows, vals)) = monomial_parts(a) {
        let mut out = CMat::zeros(n, m);
        for j in 0..m {
            for k in 0..inner {
                out[(rows[k], j)] = vals[k] * b[(k, j)];
            }
        }
        return out;
    }
    if let Some((rows, vals)) = monomial_parts(b) {
        let mut out = CMat::zeros(n, m);
        for j in 0..m {
            let v = vals[j];
            out.column_mut(j).zip_apply(&a.column(rows[j]), |o, x| *o = x * v);
        }
        return out;
    }
    let dense_cost = n * inner * m;
    let nnz_b = nonzeros(b);
    let nnz_a = nonzeros(a);
    if nnz_b * n <= nnz_a * m && nnz_b * n * 4 < dense_cost {
        let mut out = CMat::zeros(n, m);
        for j in 0..m {
            for k in 0..inner {
                let s = b[(k, j)];
                if s != ZERO {
                    out.column_mut(j).axpy(s, &a.column(k), ONE);
                }
            }
        }
        return out;
    }
    if nnz_a * m * 4 < dense_cost {
        let mut out = CMat::zeros(n, m);
        for k in 0..inner {
            for i in 0..n {
                let s = a[(i, k)];
                if s != ZERO {
                    for j in 0..m {
                        out[(i, j)] += s * b[(k, j)];
                    }
                }
            }
        }
        return out;
    }
    a * b
}

/// For a matrix with exactly one nonzero per column in distinct rows,
/// the row and value of each column's entry.
pub fn monomial_parts(m: &CMat) -> Option<(Vec<usize>, Vec<C64>)> {
    let n = m.ncols();
    if m.nrows() != n {
        return None;
    }
    let mut rows = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for j in 0..n {
        let mut found = None;
        for (i, &z) in m.column(j).iter().enumerate() {
            if z != ZERO {
                if found.is_some() {
                    return None;
                }
                found = Some((i, z));
            }
        }
        let (i, z) = found?;
        if std::mem::replace(&mut seen[i], true) {
            return None;
        }
        rows.push(i);
        vals.push(z);
    }
    Some((rows, vals))
}

/// `u x u*`.
pub fn conjugate_by(u: &CMat, x: &CMat) -> CMat {
    if let Some((rows, vals)) = monomial_parts(u) {
        let n = x.nrows();
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            let cj = vals[j].conj();
            for i in 0..n {
                let v = x[(i, j)];
                if v != ZERO {
                    out[(rows[i], rows[j])] = vals[i] * v * cj;
                }
            }
        }
        return out;
    }
    mul(&mul(u, x), &u.adjoint())
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    mul(a, b) - mul(b, a)
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn undigits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// The operator acting as `op` on the listed legs (in the listed order) and as
/// the identity on every other leg.
///
/// `on_legs(&[a, b, c], &w, &[0, 2])` is the usual leg notation `w_{13}`.
pub fn on_legs(dims: &[usize], op: &CMat, legs: &[usize]) -> CMat {
    let op_dims: Vec<usize> = legs.iter().map(|&l| dims[l]).collect();
    let op_size: usize = op_dims.iter().product();
    assert_eq!(op.shape(), (op_size, op_size), "operator does not fit the legs");
    let rest: Vec<usize> = (0..dims.len()).filter(|l| !legs.contains(l)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&l| dims[l]).collect();
    let rest_size: usize = rest_dims.iter().product();
    let total: usize = dims.iter().product();
    let mut out = CMat::zeros(total, total);
    let mut full = vec![0; dims.len()];
    for c in 0..op_size {
        let cd = digits(c, &op_dims);
        for r in 0..op_size {
            let v = op[(r, c)];
            if v == ZERO {
                continue;
            }
            let rd = digits(r, &op_dims);
            for s in 0..rest_size {
                let sd = digits(s, &rest_dims);
                for (k, &l) in rest.iter().enumerate() {
                    full[l] = sd[k];
                }
                for (k, &l) in legs.iter().enumerate() {
                    full[l] = rd[k];
                }
                let row = undigits(&full, dims);
                for (k, &l) in legs.iter().enumerate() {
                    full[l] = cd[k];
                }
                let col = undigits(&full, dims);
                out[(row, col)] = v;
            }
        }
    }
    out
}

/// Reorders tensor legs: leg `i` of the result is leg `perm[i]` of `m`.
/// Returns the result together with its leg dimensions.
pub fn permute_legs(m: &CMat, dims: &[usize], perm: &[usize]) -> (CMat, Vec<usize>) {
    assert_eq!(dims.len(), perm.len());
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    assert_eq!(m.shape(), (total, total));
    let map: Vec<usize> = (0..total)
        .map(|old| {
            let d = digits(old, dims);
            let nd: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
            undigits(&nd, &new_dims)
        })
        .collect();
    let mut out = CMat::zeros(total, total);
    for c in 0..total {
        for r in 0..total {
            let v = m[(r, c)];
            if v != ZERO {
                out[(map[r], map[c])] = v;
            }
        }
    }
    (out, new_dims)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(m.nrows(), order.len());
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Splits ascending values into runs whose consecutive gaps are at most `tol`.
/// Returns the runs as index ranges plus the gaps that separate them.
pub fn cluster_sorted(values: &[f64], tol: f64) -> (Vec<std::ops::Range<usize>>, Vec<f64>) {
    let mut clusters = Vec::new();
    let mut gaps = Vec::new();
    if values.is_empty() {
        return (clusters, gaps);
    }
    let mut start = 0;
    for i in 1..values.len() {
        let gap = values[i] - values[i - 1];
        if gap > tol {
            clusters.push(start..i);
            gaps.push(gap);
            start = i;
        }
    }
    clusters.push(start..values.len());
    (clusters, gaps)
}

/// Orthonormal basis (as columns) of the null space of `m`, using singular
/// values below `rel_tol * σ_max`.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    null_space_scaled(m, rel_tol, f64::MIN_POSITIVE)
}

/// Like [`null_space`] with threshold `rel_tol * max(σ_max, scale)`, for
/// systems that may be pure roundoff.
pub fn null_space_scaled(m: &CMat, rel_tol: f64, scale: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    // Pad so the SVD returns a full right singular basis.
    let padded = if m.nrows() < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let threshold = rel_tol * sigma_max.max(scale);
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    let mut out = CMat::zeros(cols, kept.len());
    for (k, &i) in kept.iter().enumerate() {
        let row = v_t.row(i).adjoint();
        out.set_column(k, &row);
    }
    out
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().cloned().collect()
}

/// Largest singular value, read off `m*m` one connected sparsity block at a time.
pub fn operator_norm(m: &CMat) -> f64 {
    let gram = mul(&m.adjoint(), m);
    let n = gram.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..j {
            if gram[(i, j)] != ZERO {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        blocks.entry(r).or_default().push(i);
    }
    let mut top: f64 = 0.0;
    for idx in blocks.values() {
        let sub = CMat::from_fn(idx.len(), idx.len(), |a, b| gram[(idx[a], idx[b])]);
        let sub = (&sub + sub.adjoint()).scale(0.5);
        top = top.max(sub.symmetric_eigenvalues().iter().cloned().fold(0.0, f64::max));
    }
    top.max(0.0).sqrt()
}

/// Stacks matrices as columns of their column-major vectorizations.
pub fn vectorize(basis: &[CMat]) -> CMat {
    let len = basis.first().map_or(0, |b| b.len());
    let mut out = CMat::zeros(len, basis.len());
    for (k, b) in basis.iter().enumerate() {
        for (i, z) in b.iter().enumerate() {
            out[(i, k)] = *z;
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpanError {
    #[error("span basis is empty")]
    Empty,
    #[error("basis element {index} has shape {found:?}, expected {expected:?}")]
    Shape {
        index: usize,
        found: (usize, usize),
        expected: (usize, usize),
    },
    #[error("basis element {index} is linearly dependent on its predecessors (relative pivot {pivot:.3e})")]
    Dependent { index: usize, pivot: f64 },
}

/// Coordinates with respect to a fixed basis of a linear span of matrices.
///
/// Gaussian elimination with row pivoting on the vectorized basis selects one
/// matrix entry per basis element such that the square "pivot" system is
/// nonsingular. Coordinates of anything inside the span are then read off
/// those entries alone, so expanding a product `a·b` only needs `dim` entries
/// of the product. `residual` reconstructs the full matrix to measure
/// distance from the span.
#[derive(Debug, Clone)]
pub struct SpanCoords {
    shape: (usize, usize),
    basis: Vec<CMat>,
    pivots: Vec<(usize, usize)>,
    pivot_lu: LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    min_pivot: f64,
}

impl SpanCoords {
    /// Fails if the basis is empty, ragged, or has a relative elimination
    /// pivot below `tol`.
    pub fn new(basis: Vec<CMat>, tol: f64) -> Result<Self, SpanError> {
        let first = basis.first().ok_or(SpanError::Empty)?;
        let shape = first.shape();
        for (index, b) in basis.iter().enumerate() {
            if b.shape() != shape {
                return Err(SpanError::Shape {
                    index,
                    found: b.shape(),
                    expected: shape,
                });
            }
        }
        let mut reduced: Vec<Vec<C64>> = Vec::with_capacity(basis.len());
        let mut pivots_flat: Vec<usize> = Vec::with_capacity(basis.len());
        let mut min_pivot = f64::INFINITY;
        for (index, b) in basis.iter().enumerate() {
            let scale = max_abs(b).max(f64::MIN_POSITIVE);
            let mut r: Vec<C64> = b.iter().cloned().collect();
            for (u, &p) in reduced.iter().zip(&pivots_flat) {
                let coef = r[p] / u[p];
                if coef != ZERO {
                    for (x, y) in r.iter_mut().zip(u) {
                        *x -= coef * y;
                    }
                }
            }
            let (p, best) = r
                .iter()
                .enumerate()
                .map(|(i, z)| (i, z.norm()))
                .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            let rel = best / scale;
            if rel < tol {
                return Err(SpanError::Dependent { index, pivot: rel });
            }
            min_pivot = min_pivot.min(rel);
            pivots_flat.push(p);
            reduced.push(r);
        }
        let d = basis.len();
        let pivots: Vec<(usize, usize)> = pivots_flat
            .iter()
            .map(|&p| (p % shape.0, p / shape.0))
            .collect();
        let mut system = CMat::zeros(d, d);
        for (t, &(r, c)) in pivots.iter().enumerate() {
            for (k, b) in basis.iter().enumerate() {
                system[(t, k)] = b[(r, c)];
            }
        }
        Ok(Self {
            shape,
            basis,
            pivots,
            pivot_lu: system.lu(),
            min_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    /// Smallest relative elimination pivot; a conditioning indicator.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    fn solve(&self, rhs: CVec) -> CVec {
        self.pivot_lu
            .solve(&rhs)
            .expect("pivot system is nonsingular by construction")
    }

    /// Coordinates of `m`, exact when `m` lies in the span.
    pub fn coords(&self, m: &CMat) -> CVec {
        assert_eq!(m.shape(), self.shape);
        let rhs = CVec::from_iterator(self.pivots.len(), self.pivots.iter().map(|&(r, c)| m[(r, c)]));
        self.solve(rhs)
    }

    /// Coordinates of `a·b` computed from the pivot entries of the product only.
    pub fn coords_of_product(&self, a: &CMat, b: &CMat) -> CVec {
        let rhs = CVec::from_iterator(
            self.pivots.len(),
            self.pivots
                .iter()
                .map(|&(r, c)| (0..a.ncols()).map(|m| a[(r, m)] * b[(m, c)]).sum::<C64>()),
        );
        self.solve(rhs)
    }

    pub fn combine(&self, coeffs: &CVec) -> CMat {
        let mut out = CMat::zeros(self.shape.0, self.shape.1);
        for (b, &c) in self.basis.iter().zip(coeffs.iter()) {
            if c != ZERO {
                out.zip_apply(b, |o, x| *o += c * x);
            }
        }
        out
    }

    /// Coordinates together with the relative reconstruction residual
    /// `max|m - Σ c_k b_k| / max(1, max|m|)`.
    pub fn expand(&self, m: &CMat) -> (CVec, f64) {
        let c = self.coords(m);
        let rebuilt = self.combine(&c);
        let residual = max_abs_diff(m, &rebuilt) / max_abs(m).max(1.0);
        (c, residual)
    }

    pub fn residual(&self, m: &CMat) -> f64 {
        self.expand(m).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sparse_paths_match_dense_product() {
        let perm = CMat::from_row_slice(3, 3, &[ZERO, ONE, ZERO, ZERO, ZERO, c(0.0, 1.0), ONE, ZERO, ZERO]);
        let dense = CMat::from_fn(3, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        assert!(max_abs_diff(&mul(&dense, &perm), &(&dense * &perm)) < 1e-15);
        assert!(max_abs_diff(&mul(&perm, &dense), &(&perm * &dense)) < 1e-15);
        assert!(max_abs_diff(&mul(&dense, &dense), &(&dense * &dense)) < 1e-12);
    }

    #[test]
    fn on_legs_matches_kronecker_products() {
        let a = CMat::from_fn(2, 2, |i, j| c((i * 2 + j) as f64, 1.0));
        let b = CMat::from_fn(3, 3, |i, j| c(i as f64, j as f64));
        let dims = [2, 3];
        assert!(max_abs_diff(&on_legs(&dims, &a, &[0]), &kron(&a, &identity(3))) < 1e-15);
        assert!(max_abs_diff(&on_legs(&dims, &b, &[1]), &kron(&identity(2), &b)) < 1e-15);
        let ab = kron(&a, &b);
        assert!(max_abs_diff(&on_legs(&dims, &ab, &[0, 1]), &ab) < 1e-15);
        // w_{13} on three legs equals the swap-conjugate of w ⊗ 1.
        let dims3 = [2, 2, 3];
        let w = kron(&a, &b);
        let direct = on_legs(&dims3, &w, &[0, 2]);
        let (swapped, _) = permute_legs(&kron(&w, &identity(2)), &[2, 3, 2], &[0, 2, 1]);
        assert!(max_abs_diff(&direct, &swapped) < 1e-15);
    }

    #[test]
    fn monomial_conjugation_matches_dense() {
        let u = CMat::from_row_slice(3, 3, &[ZERO, c(0.0, 1.0), ZERO, ZERO, ZERO, -ONE, ONE, ZERO, ZERO]);
        assert!(monomial_parts(&u).is_some());
        assert!(monomial_parts(&identity(2).scale(0.5).insert_column(1, ONE)).is_none());
        let x = CMat::from_fn(3, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let dense = &u * &x * u.adjoint();
        assert!(max_abs_diff(&conjugate_by(&u, &x), &dense) < 1e-15);
        assert!(max_abs_diff(&mul(&u, &x), &(&u * &x)) < 1e-15);
        assert!(max_abs_diff(&mul(&x, &u), &(&x * &u)) < 1e-15);
    }

    #[test]
    fn operator_norm_matches_svd() {
        let dense = CMat::from_fn(5, 5, |i, j| c((i * 3 + j) as f64 % 7.0 - 3.0, (i as f64 - j as f64) * 0.5));
        let svd = singular_values(&dense).into_iter().fold(0.0, f64::max);
        assert!((operator_norm(&dense) - svd).abs() < 1e-12 * svd);
        let blocky = kron(&identity(3), &dense);
        assert!((operator_norm(&blocky) - svd).abs() < 1e-12 * svd);
        assert_eq!(operator_norm(&CMat::zeros(3, 3)), 0.0);
    }

    #[test]
    fn permute_legs_swaps_kronecker_factors() {
        let a = CMat::from_fn(2, 2, |i, j| c(i as f64, 2.0 * j as f64 + 1.0));
        let b = CMat::from_fn(3, 3, |i, j| c((i + j) as f64, -(i as f64)));
        let (p, dims) = permute_legs(&kron(&a, &b), &[2, 3], &[1, 0]);
        assert_eq!(dims, vec![3, 2]);
        assert!(max_abs_diff(&p, &kron(&b, &a)) < 1e-15);
    }

    #[test]
    fn span_coords_recover_coefficients_and_flag_dependence() {
        let basis = vec![
            CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
            CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        ];
        let span = SpanCoords::new(basis.clone(), 1e-8).unwrap();
        let target = &basis[0] * c(0.5, 1.0) + &basis[2] * c(-2.0, 0.0);
        let (coef, res) = span.expand(&target);
        assert!(res < 1e-14);
        assert!((coef[0] - c(0.5, 1.0)).norm() < 1e-14);
        assert!(coef[1].norm() < 1e-14);
        assert!((coef[2] - c(-2.0, 0.0)).norm() < 1e-14);
        let outside = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(span.residual(&outside) > 0.1);
        let prod = span.coords_of_product(&basis[1], &basis[2]);
        let full = span.coords(&(&basis[1] * &basis[2]));
        assert!((prod - full).norm() < 1e-14);

        let mut dependent = basis.clone();
        dependent.push(&basis[0] + &basis[2]);
        assert!(matches!(
            SpanCoords::new(dependent, 1e-8),
            Err(SpanError::Dependent { index: 3, .. })
        ));
    }

    #[test]
    fn clustering_splits_on_gaps() {
        let (clusters, gaps) = cluster_sorted(&[0.0, 1e-9, 1.0, 1.0 + 5e-8, 3.0], 1e-7);
        assert_eq!(clusters, vec![0..2, 2..4, 4..5]);
        assert_eq!(gaps.len(), 2);
    }

    #[test]
    fn null_space_of_rank_deficient_matrix() {
        let m = CMat::from_row_slice(2, 3, &[ONE, ONE, ZERO, ZERO, ZERO, ONE]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 1);
        assert!((&m * &ns).norm() < 1e-12);
    }
}
