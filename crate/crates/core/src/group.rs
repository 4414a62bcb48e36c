//! Finite groups as validated Cayley tables, plus `ℤⁿ` for algebraic checks.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::CMat;

/// The group axiom a table failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    Identity,
    Inverse,
    Associativity,
    Latin,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Identity => "two-sided identity",
            Axiom::Inverse => "two-sided inverses",
            Axiom::Associativity => "associativity",
            Axiom::Latin => "rows and columns are permutations",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("Cayley table is empty")]
    Empty,
    #[error("Cayley table row {row} has {len} entries, expected {order}")]
    Ragged { row: usize, len: usize, order: usize },
    #[error("entry {value} at ({row}, {col}) is out of range for order {order}")]
    OutOfRange {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },
    #[error("not a group: {axiom} fails at {witness:?}")]
    NotAGroup {
        axiom: Axiom,
        witness: (usize, usize, usize),
    },
    #[error("{labels} labels given for a group of order {order}")]
    LabelCount { labels: usize, order: usize },
    #[error("element {0} is not in the group")]
    UnknownElement(usize),
    #[error("this operation needs a finite group")]
    InfiniteGroupUnsupported,
}

/// A finite group with elements `0..order`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteGroup {
    order: usize,
    cayley: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl FiniteGroup {
    /// Validates a Cayley table. Checks run in the order range, identity,
    /// inverses, associativity, Latin property; the first failure is reported
    /// with a witness triple.
    pub fn from_table(table: &[Vec<usize>], labels: Option<Vec<String>>) -> Result<Self, GroupError> {
        let order = table.len();
        if order == 0 {
            return Err(GroupError::Empty);
        }
        for (row, r) in table.iter().enumerate() {
            if r.len() != order {
                return Err(GroupError::Ragged { row, len: r.len(), order });
            }
            for (col, &value) in r.iter().enumerate() {
                if value >= order {
                    return Err(GroupError::OutOfRange { row, col, value, order });
                }
            }
        }
        if let Some(l) = &labels {
            if l.len() != order {
                return Err(GroupError::LabelCount { labels: l.len(), order });
            }
        }
        let m = |a: usize, b: usize| table[a][b];
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| m(e, g) == g && m(g, e) == g))
            .ok_or(GroupError::NotAGroup {
                axiom: Axiom::Identity,
                witness: (0, 0, 0),
            })?;
        let mut inverse = Vec::with_capacity(order);
        for g in 0..order {
            let inv = (0..order)
                .find(|&h| m(g, h) == identity && m(h, g) == identity)
                .ok_or(GroupError::NotAGroup {
                    axiom: Axiom::Inverse,
                    witness: (g, g, g),
                })?;
            inverse.push(inv);
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if m(m(a, b), c) != m(a, m(b, c)) {
                        return Err(GroupError::NotAGroup {
                            axiom: Axiom::Associativity,
                            witness: (a, b, c),
                        });
                    }
                }
            }
        }
        for a in 0..order {
            let row: BTreeSet<usize> = (0..order).map(|b| m(a, b)).collect();
            let col: BTreeSet<usize> = (0..order).map(|b| m(b, a)).collect();
            if row.len() != order || col.len() != order {
                return Err(GroupError::NotAGroup {
                    axiom: Axiom::Latin,
                    witness: (a, a, a),
                });
            }
        }
        Ok(Self {
            order,
            cayley: table.iter().flatten().copied().collect(),
            identity,
            inverse,
            labels,
        })
    }

    /// Builds a group from a closed multiplication on `0..order`.
    pub fn from_fn(order: usize, mul: impl Fn(usize, usize) -> usize, labels: Option<Vec<String>>) -> Result<Self, GroupError> {
        let table: Vec<Vec<usize>> = (0..order).map(|a| (0..order).map(|b| mul(a, b)).collect()).collect();
        Self::from_table(&table, labels)
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group needs positive order");
        let labels = (0..n).map(|k| k.to_string()).collect();
        Self::from_fn(n, |a, b| (a + b) % n, Some(labels)).expect("ℤ_n is a group")
    }

    /// Dihedral group of order `2n`: element `s^f r^k` has index `f·n + k`.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 1);
        let mul = |a: usize, b: usize| {
            let (fa, ka) = (a / n, a % n);
            let (fb, kb) = (b / n, b % n);
            // r^ka s^fb = s^fb r^{±ka}
            let k = if fb == 0 { (ka + kb) % n } else { (n - ka % n + kb) % n };
            ((fa + fb) % 2) * n + k
        };
        let labels = (0..2 * n)
            .map(|i| {
                let (f, k) = (i / n, i % n);
                match (f, k) {
                    (0, 0) => "e".to_string(),
                    (0, k) => format!("r{k}"),
                    (_, 0) => "s".to_string(),
                    (_, k) => format!("sr{k}"),
                }
            })
            .collect();
        Self::from_fn(2 * n, mul, Some(labels)).expect("dihedral table is a group")
    }

    /// Symmetric group on `n` letters, elements in lexicographic order of
    /// their one-line notation; `(p·q)(i) = p(q(i))`.
    pub fn symmetric(n: usize) -> Self {
        let mut start: Vec<usize> = (0..n).collect();
        let mut all = Vec::new();
        permutations(&mut start, 0, &mut all);
        all.sort();
        let index = |p: &[usize]| all.iter().position(|q| q == p).expect("closed");
        let labels = all
            .iter()
            .map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
            .collect();
        let table: Vec<Vec<usize>> = all
            .iter()
            .map(|p| {
                all.iter()
                    .map(|q| {
                        let pq: Vec<usize> = q.iter().map(|&i| p[i]).collect();
                        index(&pq)
                    })
                    .collect()
            })
            .collect();
        Self::from_table(&table, Some(labels)).expect("S_n is a group")
    }

    /// Quaternion group: `±1, ±i, ±j, ±k` in that order.
    pub fn quaternion() -> Self {
        // unit quaternion index u ∈ {1,i,j,k} = 0..4, sign s; element = 2u + s
        let unit_mul = |a: usize, b: usize| -> (usize, bool) {
            // returns (unit, negative)
            match (a, b) {
                (0, x) => (x, false),
                (x, 0) => (x, false),
                (x, y) if x == y => (0, true),
                (1, 2) => (3, false),
                (2, 3) => (1, false),
                (3, 1) => (2, false),
                (2, 1) => (3, true),
                (3, 2) => (1, true),
                (1, 3) => (2, true),
                _ => unreachable!(),
            }
        };
        let mul = |a: usize, b: usize| {
            let (u, neg) = unit_mul(a / 2, b / 2);
            let sign = (a % 2) ^ (b % 2) ^ usize::from(neg);
            2 * u + sign
        };
        let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].iter().map(|s| s.to_string()).collect();
        Self::from_fn(8, mul, Some(labels)).expect("Q8 is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, g: usize) -> String {
        match &self.labels {
            Some(l) => l[g].clone(),
            None => g.to_string(),
        }
    }

    /// Index of the element with the given label.
    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.labels.as_ref().and_then(|l| l.iter().position(|x| x == label))
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.cayley.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// `G × H` with `(g, h)` at index `g·|H| + h`.
    pub fn direct_product(&self, other: &FiniteGroup) -> FiniteGroup {
        let m = other.order;
        let labels = (0..self.order * m)
            .map(|i| format!("({},{})", self.label(i / m), other.label(i % m)))
            .collect();
        FiniteGroup::from_fn(
            self.order * m,
            |a, b| self.mul(a / m, b / m) * m + other.mul(a % m, b % m),
            Some(labels),
        )
        .expect("direct product of groups is a group")
    }

    /// Smallest subgroup containing `generators`.
    pub fn subgroup_closure(&self, generators: &[usize]) -> Result<Subgroup, GroupError> {
        if let Some(&bad) = generators.iter().find(|&&g| g >= self.order) {
            return Err(GroupError::UnknownElement(bad));
        }
        let mut members: BTreeSet<usize> = BTreeSet::from([self.identity]);
        let mut frontier: Vec<usize> = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in generators {
                let y = self.mul(x, g);
                if members.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Ok(Subgroup {
            parent: self.clone(),
            members: members.into_iter().collect(),
        })
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup {
            parent: self.clone(),
            members: self.elements().collect(),
        }
    }

    /// Every subgroup, each listed once, ordered by (size, members).
    pub fn all_subgroups(&self) -> Vec<Subgroup> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue: Vec<Vec<usize>> = Vec::new();
        for g in self.elements() {
            let s = self.subgroup_closure(&[g]).expect("valid element").members;
            if found.insert(s.clone()) {
                queue.push(s);
            }
        }
        while let Some(s) = queue.pop() {
            for g in self.elements() {
                if s.binary_search(&g).is_ok() {
                    continue;
                }
                let mut gens = s.clone();
                gens.push(g);
                let t = self.subgroup_closure(&gens).expect("valid elements").members;
                if found.insert(t.clone()) {
                    queue.push(t);
                }
            }
        }
        let mut all: Vec<Vec<usize>> = found.into_iter().collect();
        all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        all.into_iter()
            .map(|members| Subgroup {
                parent: self.clone(),
                members,
            })
            .collect()
    }
}

fn permutations(current: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == current.len() {
        out.push(current.clone());
        return;
    }
    for i in k..current.len() {
        current.swap(k, i);
        permutations(current, k + 1, out);
        current.swap(k, i);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subgroup {
    #[serde(skip)]
    parent: FiniteGroup,
    members: Vec<usize>,
}

impl Subgroup {
    pub fn parent(&self) -> &FiniteGroup {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    /// Exhaustive check of the subgroup axioms.
    pub fn is_valid(&self) -> bool {
        let g = &self.parent;
        self.contains(g.identity())
            && self.members.iter().all(|&a| {
                self.contains(g.inv(a)) && self.members.iter().all(|&b| self.contains(g.mul(a, b)))
            })
    }
}

/// Abstract group interface shared by finite groups and `ℤⁿ`.
pub trait DiscreteGroup {
    type Elem: Clone + Ord + Hash + fmt::Debug;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    /// `Some(order)` for finite groups.
    fn finite_order(&self) -> Option<usize>;
    /// Dense index of an element; only meaningful for finite groups.
    fn index_of(&self, a: &Self::Elem) -> Option<usize>;
}

impl DiscreteGroup for FiniteGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        self.identity
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        FiniteGroup::mul(self, *a, *b)
    }

    fn inv(&self, a: &usize) -> usize {
        FiniteGroup::inv(self, *a)
    }

    fn finite_order(&self) -> Option<usize> {
        Some(self.order)
    }

    fn index_of(&self, a: &usize) -> Option<usize> {
        Some(*a)
    }
}

/// `ℤⁿ` with integer-vector elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreeAbelianGroup {
    rank: usize,
}

impl FreeAbelianGroup {
    pub fn new(rank: usize) -> Self {
        assert!(rank > 0, "rank must be positive");
        Self { rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Standard basis vector `e_i`.
    pub fn unit(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0; self.rank];
        v[i] = 1;
        v
    }
}

impl DiscreteGroup for FreeAbelianGroup {
    type Elem = Vec<i64>;

    fn identity(&self) -> Vec<i64> {
        vec![0; self.rank]
    }

    fn mul(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn inv(&self, a: &Vec<i64>) -> Vec<i64> {
        a.iter().map(|x| -x).collect()
    }

    fn finite_order(&self) -> Option<usize> {
        None
    }

    fn index_of(&self, _: &Vec<i64>) -> Option<usize> {
        None
    }
}

/// The exact approximating function of a finite group: `a(g) = |Γ|^{-1/2}·1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FolnerWitness {
    group: FiniteGroup,
    value: f64,
}

impl FolnerWitness {
    pub fn new(group: &FiniteGroup) -> Self {
        Self {
            group: group.clone(),
            value: (group.order() as f64).sqrt().recip(),
        }
    }

    /// The scalar multiple of the unit at `g`.
    pub fn coefficient(&self, _g: usize) -> f64 {
        self.value
    }

    /// `‖Σ_g a(g)* a(g)‖`, which is 1 for this witness.
    pub fn bound(&self) -> f64 {
        self.group.elements().map(|g| self.coefficient(g).powi(2)).sum()
    }

    /// `Σ_h a(gh)* b a(h)`, evaluated term by term.
    pub fn approximate(&self, g: usize, b: &CMat) -> CMat {
        let mut out = CMat::zeros(b.nrows(), b.ncols());
        for h in self.group.elements() {
            let left = self.coefficient(self.group.mul(g, h));
            let right = self.coefficient(h);
            out += b * crate::linalg::C64::new(left * right, 0.0);
        }
        out
    }
}

pub fn folner_witness(group: &FiniteGroup) -> FolnerWitness {
    FolnerWitness::new(group)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_first_nonassociative(t: &[Vec<usize>]) -> Option<(usize, usize, usize)> {
        let n = t.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if t[t[a][b]][c] != t[a][t[b][c]] {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    #[test]
    fn trivial_and_z2_tables() {
        let g = FiniteGroup::from_table(&[vec![0]], None).unwrap();
        assert_eq!((g.order(), g.identity()), (1, 0));
        let z2 = FiniteGroup::from_table(&[vec![0, 1], vec![1, 0]], None).unwrap();
        assert_eq!(z2.inv(1), 1);
    }

    #[test]
    fn perturbed_z4_names_a_nonassociative_triple() {
        let mut t: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect();
        // keep identity row/column and two-sided inverses, break the rest
        t[1][1] = 0;
        t[1][3] = 0;
        t[3][1] = 0;
        let expected = brute_first_nonassociative(&t).expect("perturbation breaks associativity");
        match FiniteGroup::from_table(&t, None) {
            Err(GroupError::NotAGroup {
                axiom: Axiom::Associativity,
                witness,
            }) => assert_eq!(witness, expected),
            other => panic!("expected associativity failure, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_and_ragged_tables_are_rejected() {
        assert!(matches!(
            FiniteGroup::from_table(&[vec![0, 2], vec![1, 0]], None),
            Err(GroupError::OutOfRange { .. })
        ));
        assert!(matches!(
            FiniteGroup::from_table(&[vec![0, 1], vec![1]], None),
            Err(GroupError::Ragged { .. })
        ));
    }

    #[test]
    fn direct_products() {
        let z2 = FiniteGroup::cyclic(2);
        let z3 = FiniteGroup::cyclic(3);
        let klein = z2.direct_product(&z2);
        assert_eq!(klein.order(), 4);
        assert!(klein.elements().all(|g| klein.inv(g) == g));
        let z3z3 = z3.direct_product(&z3);
        assert_eq!((z3z3.order(), z3z3.identity()), (9, 0));
        let z6 = z2.direct_product(&z3);
        let one_one = z6.find_label("(1,1)").unwrap();
        // brute force: smallest k with k·(1,1) = 0
        let mut x = one_one;
        let mut k = 1;
        while x != z6.identity() {
            x = z6.mul(x, one_one);
            k += 1;
        }
        assert_eq!(k, 6);
        assert_eq!(z6.element_order(one_one), 6);
    }

    #[test]
    fn closures() {
        let z4 = FiniteGroup::cyclic(4);
        assert_eq!(z4.subgroup_closure(&[]).unwrap().members(), &[0]);
        assert_eq!(z4.subgroup_closure(&[2]).unwrap().members(), &[0, 2]);
        let s3 = FiniteGroup::symmetric(3);
        let transposition = s3.find_label("102").unwrap();
        let three_cycle = s3.find_label("120").unwrap();
        let h = s3.subgroup_closure(&[transposition, three_cycle]).unwrap();
        assert_eq!(h.order(), 6);
        assert!(h.is_valid());
    }

    #[test]
    fn named_groups_have_expected_shape() {
        assert_eq!(FiniteGroup::symmetric(3).order(), 6);
        assert!(!FiniteGroup::symmetric(3).is_abelian());
        let q8 = FiniteGroup::quaternion();
        assert!(!q8.is_abelian());
        assert_eq!(q8.elements().filter(|&g| q8.element_order(g) == 4).count(), 6);
        let d4 = FiniteGroup::dihedral(4);
        assert_eq!(d4.order(), 8);
        assert_eq!(d4.elements().filter(|&g| d4.element_order(g) == 2).count(), 5);
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(FiniteGroup::cyclic(4).all_subgroups().len(), 3);
        assert_eq!(FiniteGroup::symmetric(3).all_subgroups().len(), 6);
        assert_eq!(FiniteGroup::quaternion().all_subgroups().len(), 6);
        assert_eq!(FiniteGroup::dihedral(4).all_subgroups().len(), 10);
        let z2 = FiniteGroup::cyclic(2);
        assert_eq!(z2.direct_product(&z2).all_subgroups().len(), 5);
    }

    #[test]
    fn folner_witness_is_exact() {
        use crate::linalg::{max_abs_diff, C64};
        let z2 = FiniteGroup::cyclic(2);
        let w = folner_witness(&z2);
        assert!((w.bound() - 1.0).abs() < 1e-15);
        let b = CMat::from_fn(2, 2, |i, j| C64::new(i as f64, j as f64 + 1.0));
        for g in z2.elements() {
            assert!(max_abs_diff(&w.approximate(g, &b), &b) < 1e-15);
        }
        let t = folner_witness(&FiniteGroup::trivial());
        assert_eq!(t.coefficient(0), 1.0);
    }

    #[test]
    fn free_abelian_arithmetic() {
        let z2 = FreeAbelianGroup::new(2);
        let x = vec![3, -1];
        assert_eq!(z2.mul(&x, &z2.inv(&x)), z2.identity());
    }
}
