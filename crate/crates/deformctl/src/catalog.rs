//! Builtin scenarios and the shared test corpus.

use deform_core::cocycle::{heisenberg_bicharacter, random_real_coboundary, random_u1_coboundary};
use deform_core::{FellBundle, FiniteGroup, TwoCocycleReal, TwoCocycleU1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    pub toml: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "trivial-everything",
        summary: "M2 over the trivial group; every suite",
        toml: r#"
name = "trivial-everything"
group = "builtin:trivial"
bundle = { builtin = "full-matrix", n = 2 }
"#,
    },
    Builtin {
        name: "z2",
        summary: "C*(Z2) with a seeded coboundary cocycle",
        toml: r#"
name = "z2"
group = "builtin:z2"
cocycle = "builtin:random-coboundary"
bundle = "builtin:group-algebra"
expect = { k0_isomorphic = true }
"#,
    },
    Builtin {
        name: "z4",
        summary: "C*(Z4) with a seeded coboundary cocycle",
        toml: r#"
name = "z4"
group = "builtin:z4"
cocycle = "builtin:random-coboundary"
bundle = "builtin:group-algebra"
expect = { k0_isomorphic = true }
"#,
    },
    Builtin {
        name: "z2z2-bicharacter",
        summary: "C*(Z2xZ2) twisted by the nondegenerate bicharacter: K0 rank 4 vs 1",
        toml: r#"
name = "z2z2-bicharacter"
group = "builtin:z2xz2"
cocycle = "builtin:bicharacter"
bundle = "builtin:group-algebra"
expect = { k0_isomorphic = false }
"#,
    },
    Builtin {
        name: "z3z3-bicharacter",
        summary: "C*(Z3xZ3) twisted by the nondegenerate bicharacter: K0 rank 9 vs 1",
        toml: r#"
name = "z3z3-bicharacter"
group = "builtin:z3xz3"
cocycle = "builtin:bicharacter"
bundle = "builtin:group-algebra"
suites = ["cocycle", "tga", "deform", "crossed", "k0"]
expect = { k0_isomorphic = false }
"#,
    },
    Builtin {
        name: "s3-coboundary",
        summary: "C*(Z2) inside S3 with a seeded coboundary cocycle",
        toml: r#"
name = "s3-coboundary"
group = "builtin:s3"
cocycle = "builtin:random-coboundary"
bundle = { builtin = "subgroup-algebra", subgroup = ["021"] }
expect = { k0_isomorphic = true }
"#,
    },
    Builtin {
        name: "q8-coboundary",
        summary: "C*(Z2) inside Q8 with a seeded coboundary cocycle",
        toml: r#"
name = "q8-coboundary"
group = "builtin:q8"
cocycle = "builtin:random-coboundary"
bundle = { builtin = "subgroup-algebra", subgroup = ["-1"] }
expect = { k0_isomorphic = true }
"#,
    },
    Builtin {
        name: "d4-coboundary",
        summary: "C*(Z2) inside D4 with a seeded coboundary cocycle",
        toml: r#"
name = "d4-coboundary"
group = "builtin:d4"
cocycle = "builtin:random-coboundary"
bundle = { builtin = "subgroup-algebra", subgroup = ["s"] }
expect = { k0_isomorphic = true }
"#,
    },
    Builtin {
        name: "pauli",
        summary: "Pauli grading of M2 over Z2xZ2, twisted by the bicharacter",
        toml: r#"
name = "pauli"
group = "builtin:z2xz2"
cocycle = "builtin:bicharacter"
bundle = "builtin:pauli"
expect = { k0_isomorphic = false }
"#,
    },
    Builtin {
        name: "z2-triple",
        summary: "regular even triple over Z2 with D = 0",
        toml: r#"
name = "z2-triple"
group = "builtin:z2"
cocycle = "builtin:random-coboundary"
suites = ["triple"]
triple = "builtin:regular"
"#,
    },
    Builtin {
        name: "nc-torus-z2",
        summary: "noncommutative torus relations on Z^2",
        toml: r#"
name = "nc-torus-z2"
group = "builtin:z^2"
suites = ["cocycle", "tga"]
cocycle = { kind = "bilinear", theta = [[0, "-1/20"], ["1/20", 0]] }
"#,
    },
];

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

/// One group of the acceptance corpus with the bundles exercised on it.
pub struct CorpusGroup {
    pub name: &'static str,
    pub group: FiniteGroup,
    pub bundles: Vec<(&'static str, FellBundle)>,
    /// Nondegenerate bicharacter, when the group has one in the corpus.
    pub bicharacter: Option<TwoCocycleU1>,
}

fn z2_subgroup_algebra(g: &FiniteGroup, label: &str) -> FellBundle {
    let x = g.find_label(label).expect("corpus label exists");
    FellBundle::subgroup_algebra(&g.subgroup_closure(&[x]).expect("valid generator"))
}

/// Groups and bundles shared by the acceptance and integration tests.
pub fn corpus() -> Vec<CorpusGroup> {
    let z = FiniteGroup::cyclic;
    let (klein, klein_w) = heisenberg_bicharacter(2);
    let (z3z3, z3z3_w) = heisenberg_bicharacter(3);
    let s3 = FiniteGroup::symmetric(3);
    let q8 = FiniteGroup::quaternion();
    let d4 = FiniteGroup::dihedral(4);
    vec![
        CorpusGroup {
            name: "trivial",
            bundles: vec![("M2", FellBundle::full_matrix(&FiniteGroup::trivial(), 2))],
            group: FiniteGroup::trivial(),
            bicharacter: None,
        },
        CorpusGroup {
            name: "z2",
            bundles: vec![("C*(G)", FellBundle::group_algebra(&z(2)))],
            group: z(2),
            bicharacter: None,
        },
        CorpusGroup {
            name: "z4",
            bundles: vec![("C*(G)", FellBundle::group_algebra(&z(4)))],
            group: z(4),
            bicharacter: None,
        },
        CorpusGroup {
            name: "z2xz2",
            bundles: vec![
                ("C*(G)", FellBundle::group_algebra(&klein)),
                ("pauli", FellBundle::pauli(&klein).expect("klein group")),
            ],
            group: klein,
            bicharacter: Some(klein_w),
        },
        CorpusGroup {
            name: "z3xz3",
            bundles: vec![
                ("clock-shift", FellBundle::clock_shift(&z3z3, 3).expect("z3xz3")),
                ("C", FellBundle::diagonal(&z3z3, 1)),
            ],
            group: z3z3,
            bicharacter: Some(z3z3_w),
        },
        CorpusGroup {
            name: "s3",
            bundles: vec![("C*(Z2)", z2_subgroup_algebra(&s3, "021")), ("C", FellBundle::diagonal(&s3, 1))],
            group: s3,
            bicharacter: None,
        },
        CorpusGroup {
            name: "q8",
            bundles: vec![("C*(Z2)", z2_subgroup_algebra(&q8, "-1")), ("C", FellBundle::diagonal(&q8, 1))],
            group: q8,
            bicharacter: None,
        },
        CorpusGroup {
            name: "d4",
            bundles: vec![("C*(Z2)", z2_subgroup_algebra(&d4, "s")), ("C", FellBundle::diagonal(&d4, 1))],
            group: d4,
            bicharacter: None,
        },
    ]
}

/// `count` seeded cocycles of the form `∂ψ · exp(i·∂φ)`, all cohomologically trivial.
pub fn random_cocycles(group: &FiniteGroup, seed: u64, count: usize) -> Vec<TwoCocycleU1> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = random_u1_coboundary(group, &mut rng);
            let r = random_real_coboundary(group, &mut rng, 1.0);
            u.product(&r.exp(1.0)).expect("same group")
        })
        .collect()
}

pub fn random_real_cocycles(group: &FiniteGroup, seed: u64, count: usize) -> Vec<TwoCocycleReal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_real_coboundary(group, &mut rng, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Context, Overrides};

    #[test]
    fn builtins_load() {
        for b in BUILTINS {
            let ctx = Context::from_toml(b.toml, b.name, &Overrides::default()).unwrap_or_else(|e| panic!("{}: {e}", b.name));
            assert_eq!(ctx.name, b.name);
        }
        assert!(builtin("z2").is_some());
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn corpus_subgroups_have_order_two() {
        for c in corpus() {
            for (_, b) in &c.bundles {
                assert_eq!(b.group(), &c.group);
            }
        }
        let s3 = FiniteGroup::symmetric(3);
        assert_eq!(s3.element_order(s3.find_label("021").unwrap()), 2);
        let q8 = FiniteGroup::quaternion();
        assert_eq!(q8.element_order(q8.find_label("-1").unwrap()), 2);
    }
}
