//! Numerical Wedderburn decomposition of finite-dimensional *-algebras of
//! matrices, and the resulting K₀ signatures.
//!
//! K₀ of `⊕ M_{m_i}(ℂ)` is `ℤ^r` with `r` the number of blocks; K₁ is zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cocycle::TwoCocycleReal;
use crate::deform::{deform, DeformError, DeformedAlgebra};
use crate::graded::FellBundle;
use crate::linalg::{self, cluster_sorted, hermitian_eigen, mul, null_space_scaled, CMat, CVec, SpanCoords, SpanError, C64};
use crate::tol;

/// Rank of K₁ for every finite-dimensional C*-algebra.
pub const K1_RANK: usize = 0;

/// Above this many flops the closure check samples random products.
const EXHAUSTIVE_CLOSURE_BUDGET: f64 = 2e8;
const CLOSURE_SAMPLES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum K0Error {
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error("span is not closed under the adjoint (residual {residual:.3e})")]
    NotStarClosed { residual: f64 },
    #[error("span does not contain the identity (residual {residual:.3e})")]
    NotUnital { residual: f64 },
    #[error("cannot separate the blocks numerically: expected {expected} clusters, found {found}; gaps {gaps:?}")]
    NotSemisimpleNumerically {
        expected: usize,
        found: usize,
        gaps: Vec<f64>,
    },
}

/// A linear span of square matrices with a set of algebra generators.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    coords: SpanCoords,
    generators: Vec<CMat>,
}

impl MatrixAlgebra {
    pub fn new(basis: Vec<CMat>) -> Result<Self, K0Error> {
        let generators = basis.clone();
        Self::with_generators(basis, generators)
    }

    /// `generators` must lie in the span and generate it as an algebra;
    /// the center is computed as their commutant.
    pub fn with_generators(basis: Vec<CMat>, generators: Vec<CMat>) -> Result<Self, K0Error> {
        let coords = SpanCoords::new(basis, tol::INDEPENDENCE)?;
        Ok(Self { coords, generators })
    }

    pub fn from_bundle(bundle: &FellBundle) -> Self {
        Self {
            coords: bundle.coords().clone(),
            generators: bundle.basis().to_vec(),
        }
    }

    pub fn from_deformed(algebra: &DeformedAlgebra) -> Self {
        Self {
            coords: algebra.coords().clone(),
            generators: algebra.basis().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    /// Side length of the ambient matrices.
    pub fn size(&self) -> usize {
        self.coords.shape().0
    }

    pub fn basis(&self) -> &[CMat] {
        self.coords.basis()
    }

    pub fn generators(&self) -> &[CMat] {
        &self.generators
    }

    pub fn coords(&self) -> &SpanCoords {
        &self.coords
    }

    /// Worst relative span residual of products; exhaustive over basis
    /// pairs when cheap, otherwise over seeded random pairs.
    pub fn closure_residual(&self, seed: u64) -> f64 {
        let d = self.dim() as f64;
        let n = self.size() as f64;
        let basis = self.basis();
        if d * d * n * n * n <= EXHAUSTIVE_CLOSURE_BUDGET {
            let mut worst: f64 = 0.0;
            for a in basis {
                for b in basis {
                    worst = worst.max(self.coords.residual(&mul(a, b)));
                }
            }
            return worst;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..CLOSURE_SAMPLES)
            .map(|_| {
                let x = self.random_element(&mut rng);
                let y = self.random_element(&mut rng);
                self.coords.residual(&(&x * &y))
            })
            .fold(0.0, f64::max)
    }

    pub fn star_residual(&self) -> f64 {
        self.basis()
            .iter()
            .map(|b| self.coords.residual(&b.adjoint()))
            .fold(0.0, f64::max)
    }

    pub fn unit_residual(&self) -> f64 {
        self.coords.residual(&linalg::identity(self.size()))
    }

    fn random_element(&self, rng: &mut ChaCha8Rng) -> CMat {
        let c = CVec::from_iterator(
            self.dim(),
            (0..self.dim()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        self.coords.combine(&c)
    }

    fn random_hermitian(&self, rng: &mut ChaCha8Rng) -> CMat {
        let x = self.random_element(rng);
        (&x + x.adjoint()).scale(0.5)
    }

    /// Basis of the center as coordinate columns.
    pub fn center(&self) -> CMat {
        let d = self.dim();
        let basis = self.basis();
        let mut system = CMat::zeros(d * self.generators.len(), d);
        for (j, x) in self.generators.iter().enumerate() {
            for (a, e) in basis.iter().enumerate() {
                let col = self.coords.coords_of_product(e, x) - self.coords.coords_of_product(x, e);
                system.view_mut((j * d, a), (d, 1)).copy_from(&col);
            }
        }
        // commutators of unit-size generators: an all-roundoff system means a commutative algebra
        null_space_scaled(&system, tol::INDEPENDENCE, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K0Signature {
    /// Sorted ascending.
    pub block_dims: Vec<usize>,
    pub rank: usize,
    /// Normalized trace of a minimal projection in each block, aligned with `block_dims`.
    pub trace_vector: Vec<f64>,
    /// Ambient multiplicity of each block.
    pub multiplicities: Vec<usize>,
    pub dimension: usize,
    /// Smallest gap between central eigenvalue clusters.
    pub min_gap: f64,
    pub k1_rank: usize,
    pub seed: u64,
}

impl K0Signature {
    /// `Σ m_i k_i / n`, which is 1 for a unital algebra.
    pub fn unit_trace(&self) -> f64 {
        self.block_dims
            .iter()
            .zip(&self.trace_vector)
            .map(|(&m, &t)| m as f64 * t)
            .sum()
    }
}

fn min_cluster_gap(gaps: &[f64]) -> f64 {
    gaps.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Splits a *-closed unital matrix span into its simple summands.
pub fn block_decompose(algebra: &MatrixAlgebra, seed: u64) -> Result<K0Signature, K0Error> {
    let star = algebra.star_residual();
    if star > tol::SPAN {
        return Err(K0Error::NotStarClosed { residual: star });
    }
    let unit = algebra.unit_residual();
    if unit > tol::SPAN {
        return Err(K0Error::NotUnital { residual: unit });
    }
    let n = algebra.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = algebra.center();
    let z_dim = center.ncols();
    let weights = CVec::from_iterator(
        z_dim,
        (0..z_dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    );
    let z = algebra.coords.combine(&(&center * weights));
    // real and imaginary parts are both central; mix them so that
    // conjugate characters do not collide
    let re = (&z + z.adjoint()).scale(0.5);
    let im = (&z - z.adjoint()) * C64::new(0.0, -0.5);
    let z = re + im.scale(rng.random_range(0.5..1.5));
    let (values, vectors) = hermitian_eigen(&z);
    let (ranges, gaps) = cluster_sorted(&values, tol::CLUSTER);
    if ranges.len() != z_dim {
        return Err(K0Error::NotSemisimpleNumerically {
            expected: z_dim,
            found: ranges.len(),
            gaps,
        });
    }
    let min_gap = min_cluster_gap(&gaps);
    let probe = algebra.random_hermitian(&mut rng);
    let mut blocks: Vec<(usize, usize)> = Vec::with_capacity(ranges.len());
    for r in &ranges {
        let v = vectors.columns(r.start, r.len()).into_owned();
        let compressed = mul(&v.adjoint(), &mul(&probe, &v));
        let (inner, _) = hermitian_eigen(&compressed);
        let (inner_ranges, inner_gaps) = cluster_sorted(&inner, tol::CLUSTER);
        let k = inner_ranges[0].len();
        if inner_ranges.iter().any(|ir| ir.len() != k) {
            return Err(K0Error::NotSemisimpleNumerically {
                expected: r.len(),
                found: inner_ranges.len(),
                gaps: inner_gaps,
            });
        }
        blocks.push((inner_ranges.len(), k));
    }
    let total: usize = blocks.iter().map(|(m, _)| m * m).sum();
    if total != algebra.dim() {
        return Err(K0Error::NotSemisimpleNumerically {
            expected: algebra.dim(),
            found: total,
            gaps,
        });
    }
    blocks.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    Ok(K0Signature {
        block_dims: blocks.iter().map(|b| b.0).collect(),
        rank: blocks.len(),
        trace_vector: blocks.iter().map(|b| b.1 as f64 / n as f64).collect(),
        multiplicities: blocks.iter().map(|b| b.1).collect(),
        dimension: algebra.dim(),
        min_gap,
        k1_rank: K1_RANK,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K0Comparison {
    pub left: K0Signature,
    pub right: K0Signature,
    pub rank_equal: bool,
    pub blocks_equal: bool,
    /// `K₀` groups isomorphic, i.e. equal rank.
    pub isomorphic: bool,
}

pub fn k0_compare(a: &MatrixAlgebra, b: &MatrixAlgebra, seed: u64) -> Result<K0Comparison, K0Error> {
    let left = block_decompose(a, seed)?;
    let right = block_decompose(b, seed)?;
    let rank_equal = left.rank == right.rank;
    Ok(K0Comparison {
        blocks_equal: left.block_dims == right.block_dims,
        rank_equal,
        isomorphic: rank_equal,
        left,
        right,
    })
}

/// Equal number of blocks, the finite-dimensional shadow of Morita equivalence.
pub fn morita_rank_check(a: &MatrixAlgebra, iterated: &MatrixAlgebra, seed: u64) -> Result<bool, K0Error> {
    Ok(block_decompose(a, seed)?.rank == block_decompose(iterated, seed)?.rank)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K0Path {
    pub thetas: Vec<f64>,
    pub signatures: Vec<K0Signature>,
    pub ranks_constant: bool,
    pub blocks_constant: bool,
}

/// Signature of `A_{e^{iθω₀}}` at each grid point.
pub fn k0_along_path(bundle: &FellBundle, omega0: &TwoCocycleReal, grid: &[f64], seed: u64) -> Result<K0Path, K0Error> {
    let mut signatures = Vec::with_capacity(grid.len());
    for &theta in grid {
        let algebra = deform(bundle, &omega0.exp(theta))?;
        signatures.push(block_decompose(&MatrixAlgebra::from_deformed(&algebra), seed)?);
    }
    let ranks_constant = signatures.windows(2).all(|w| w[0].rank == w[1].rank);
    let blocks_constant = signatures.windows(2).all(|w| w[0].block_dims == w[1].block_dims);
    Ok(K0Path {
        thetas: grid.to_vec(),
        signatures,
        ranks_constant,
        blocks_constant,
    })
}
