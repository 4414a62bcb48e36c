//! Randomized invariants over small groups.

use deform_core::cocycle::{check_cohomologous, heisenberg_bicharacter, random_real_coboundary, random_u1_coboundary};
use deform_core::crossed::{untwist_isomorphism, v_multiplicativity_check};
use deform_core::deform::{deform, iterate_check, twisted_structure_constants};
use deform_core::k0::{block_decompose, MatrixAlgebra};
use deform_core::spectral::{ancilla_triple, index_pairing};
use deform_core::twisted::relations_check;
use deform_core::{linalg, FellBundle, FiniteGroup, TwoCocycleU1};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn groups() -> Vec<FiniteGroup> {
    vec![
        FiniteGroup::cyclic(2),
        FiniteGroup::cyclic(3),
        FiniteGroup::cyclic(2).direct_product(&FiniteGroup::cyclic(2)),
        FiniteGroup::symmetric(3),
        FiniteGroup::quaternion(),
    ]
}

fn setup(index: usize, seed: u64) -> (FiniteGroup, TwoCocycleU1, ChaCha8Rng) {
    let g = groups()[index % groups().len()].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_u1_coboundary(&g, &mut rng);
    let r = random_real_coboundary(&g, &mut rng, 1.0);
    let w = u.product(&r.exp(1.0)).unwrap();
    (g, w, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cocycle_operations_stay_cocycles(i in 0usize..5, seed: u64) {
        let (_, w, _) = setup(i, seed);
        for c in [w.clone(), w.conjugate(), w.opposite(), w.product(&w.conjugate()).unwrap()] {
            prop_assert!(c.validate().max_residual() < 1e-12);
        }
        prop_assert!(check_cohomologous(&w.conjugate(), &w.opposite(), &w.antipode_map()));
    }

    #[test]
    fn twisted_relations_hold(i in 0usize..5, seed: u64) {
        let (_, w, _) = setup(i, seed);
        prop_assert!(relations_check(&w).max_residual() < 1e-12);
        prop_assert!(v_multiplicativity_check(&w).passed);
    }

    #[test]
    fn deformation_matches_closed_form(i in 0usize..5, seed: u64) {
        let (g, w, mut rng) = setup(i, seed);
        let b = FellBundle::group_algebra(&g);
        let a = deform(&b, &w).unwrap();
        let r = a.report();
        prop_assert!(r.closure_residual < 1e-10 && r.star_residual < 1e-10 && r.unit_residual < 1e-10);
        let d = a.structure_constants().max_abs_diff(&twisted_structure_constants(&b, &w).unwrap());
        prop_assert!(d < 1e-10, "oracle {d:e}");
        let eta = random_u1_coboundary(&g, &mut rng);
        prop_assert!(iterate_check(&b, &w, &eta).unwrap().passed);
        prop_assert!(untwist_isomorphism(&b, &w).unwrap().1.passed);
    }

    #[test]
    fn k0_rank_survives_coboundary_twists(i in 0usize..5, seed: u64, theta in 0.0f64..1.0) {
        let (g, _, mut rng) = setup(i, seed);
        let b = FellBundle::group_algebra(&g);
        let w = random_real_coboundary(&g, &mut rng, 1.0).exp(theta);
        let plain = block_decompose(&MatrixAlgebra::from_bundle(&b), 1).unwrap();
        let twisted = block_decompose(&MatrixAlgebra::from_deformed(&deform(&b, &w).unwrap()), 1).unwrap();
        prop_assert_eq!(plain.block_dims, twisted.block_dims);
    }

    #[test]
    fn ancilla_index_is_stable(i in 0usize..5, seed: u64) {
        let (g, w, _) = setup(i, seed);
        let t = ancilla_triple(&g, 1.0);
        let (td, rep) = t.deform(&w).unwrap();
        prop_assert!(rep.isospectral);
        let one = linalg::identity(td.dim());
        prop_assert_eq!(index_pairing(&td, &one).unwrap().index, index_pairing(&t, &one).unwrap().index);
    }
}

/// Nondegenerate bicharacters turn `C*(ℤₙ×ℤₙ)` into a full matrix algebra.
#[test]
fn bicharacter_twist_is_simple() {
    for (n, rank) in [(2, 4), (3, 9)] {
        let (g, w) = heisenberg_bicharacter(n);
        let b = FellBundle::group_algebra(&g);
        assert_eq!(block_decompose(&MatrixAlgebra::from_bundle(&b), 3).unwrap().rank, rank);
        let twisted = block_decompose(&MatrixAlgebra::from_deformed(&deform(&b, &w).unwrap()), 3).unwrap();
        assert_eq!((twisted.rank, twisted.block_dims.clone()), (1, vec![n]));
    }
}
