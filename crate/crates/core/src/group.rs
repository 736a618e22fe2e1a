//! Finite permutation groups with fully materialized element sets.
//!
//! Elements are indexed in lexicographic order of their image arrays, so
//! index 0 is always the identity and every "pick a representative" step is
//! deterministic. Products go through a dense multiplication table.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;

use crate::error::GroupError;
use crate::perm::Perm;

/// Default bound on group orders; `LOCALITY_LAB_MAX_ORDER` overrides it.
pub const DEFAULT_MAX_ORDER: usize = 2000;

pub fn max_order() -> usize {
    std::env::var("LOCALITY_LAB_MAX_ORDER")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_ORDER)
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Largest power of `p` dividing `n`.
pub fn p_part(n: usize, p: u32) -> usize {
    let p = p as usize;
    let mut n = n;
    let mut part = 1;
    while n > 0 && n % p == 0 {
        n /= p;
        part *= p;
    }
    part
}

pub fn is_p_power(n: usize, p: u32) -> bool {
    n >= 1 && p_part(n, p) == n
}

/// A subset of a group's elements, closed under products and inverses.
///
/// The parent group is not stored; callers pass it alongside.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subgroup {
    members: FixedBitSet,
    order: usize,
}

impl Subgroup {
    pub(crate) fn from_bits(members: FixedBitSet) -> Self {
        let order = members.count_ones(..);
        Subgroup { members, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.contains(g)
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    pub fn element_vec(&self) -> Vec<usize> {
        self.members.ones().collect()
    }

    pub fn is_subset(&self, other: &Subgroup) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn intersection(&self, other: &Subgroup) -> Subgroup {
        let mut m = self.members.clone();
        m.intersect_with(&other.members);
        Subgroup::from_bits(m)
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Order first, then the sorted element list.
impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order
            .cmp(&other.order)
            .then_with(|| self.members.ones().cmp(other.members.ones()))
    }
}

pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    index: HashMap<Perm, u32>,
    mul: Vec<u32>,
    inv: Vec<u32>,
    subgroups: OnceLock<Vec<Subgroup>>,
}

impl std::fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("generators", &self.generators)
            .finish()
    }
}

impl PermGroup {
    pub fn generate(degree: usize, generators: Vec<Perm>) -> Result<Self, GroupError> {
        Self::generate_bounded(degree, generators, max_order())
    }

    pub fn generate_bounded(
        degree: usize,
        generators: Vec<Perm>,
        bound: usize,
    ) -> Result<Self, GroupError> {
        for g in &generators {
            if g.degree() != degree {
                return Err(GroupError::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
        }
        let id = Perm::identity(degree);
        let mut seen: HashSet<Perm> = HashSet::new();
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = x.mul(g);
                if seen.insert(y.clone()) {
                    if seen.len() > bound {
                        return Err(GroupError::SizeBoundExceeded { bound });
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<Perm> = seen.into_iter().collect();
        elements.sort();
        Ok(Self::from_sorted(degree, generators, elements))
    }

    /// Builds the group from a complete, closed element list.
    fn from_sorted(degree: usize, generators: Vec<Perm>, elements: Vec<Perm>) -> Self {
        let n = elements.len();
        let index: HashMap<Perm, u32> = elements
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let mut mul = vec![0u32; n * n];
        for (a, pa) in elements.iter().enumerate() {
            for (b, pb) in elements.iter().enumerate() {
                mul[a * n + b] = index[&pa.mul(pb)];
            }
        }
        let inv = elements.iter().map(|p| index[&p.inverse()]).collect();
        PermGroup {
            degree,
            generators,
            elements,
            index,
            mul,
            inv,
            subgroups: OnceLock::new(),
        }
    }

    /// Right regular representation of a group given by its multiplication
    /// table (`table[a][b] = ab`, element 0 need not be the identity).
    ///
    /// Returns the group and the map from table index to group index.
    pub fn regular(table: &[Vec<usize>]) -> Result<(Self, Vec<usize>), GroupError> {
        let n = table.len();
        let perms = table
            .iter()
            .enumerate()
            .map(|(a, _)| {
                let images: Vec<usize> = (0..n).map(|i| table[i][a]).collect();
                Perm::from_images(&images)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut sorted = perms.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n {
            return Err(GroupError::NotABijection { degree: n });
        }
        let group = Self::from_sorted(n, perms.clone(), sorted);
        let map = perms.iter().map(|p| group.index[p] as usize).collect();
        Ok((group, map))
    }

    /// A group from a complete list of its elements. The list must be closed
    /// under products; this is not re-checked.
    pub fn from_elements(degree: usize, mut elements: Vec<Perm>) -> Self {
        elements.sort();
        elements.dedup();
        let generators = elements.clone();
        Self::from_sorted(degree, generators, elements)
    }

    /// The subgroup `sub` as a group in its own right, with the map from
    /// new indices to indices of `self`.
    pub fn subgroup_as_group(&self, sub: &Subgroup) -> (PermGroup, Vec<usize>) {
        let elements: Vec<Perm> = sub.elements().map(|i| self.elements[i].clone()).collect();
        let generators = elements.clone();
        let embed = sub.element_vec();
        (
            Self::from_sorted(self.degree, generators, elements),
            embed,
        )
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.index.get(p).map(|&i| i as usize)
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order() + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// `g⁻¹ x g`
    #[inline]
    pub fn conj(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn whole(&self) -> Subgroup {
        let mut m = FixedBitSet::with_capacity(self.order());
        m.insert_range(..);
        Subgroup::from_bits(m)
    }

    pub fn trivial(&self) -> Subgroup {
        self.closure(&[])
    }

    /// Smallest subgroup containing `gens`.
    pub fn closure(&self, gens: &[usize]) -> Subgroup {
        let n = self.order();
        let mut members = FixedBitSet::with_capacity(n);
        members.insert(0);
        let mut list = vec![0usize];
        let gens: Vec<usize> = gens.iter().copied().filter(|&g| g != 0).collect();
        let mut k = 0;
        while k < list.len() {
            let x = list[k];
            k += 1;
            for &g in &gens {
                let y = self.mul(x, g);
                if !members.put(y) {
                    list.push(y);
                }
            }
        }
        Subgroup::from_bits(members)
    }

    pub fn closure_of_set(&self, set: &FixedBitSet) -> Subgroup {
        let gens: Vec<usize> = set.ones().collect();
        self.closure(&gens)
    }

    pub fn subgroup_from_perms(&self, perms: &[Perm]) -> Result<Subgroup, GroupError> {
        let gens = perms
            .iter()
            .map(|p| {
                self.index_of(p)
                    .ok_or_else(|| GroupError::ElementNotInGroup(p.to_cycles()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.closure(&gens))
    }

    pub fn is_subgroup(&self, set: &FixedBitSet) -> bool {
        if !set.contains(0) {
            return false;
        }
        set.ones()
            .all(|a| set.contains(self.inv(a)) && set.ones().all(|b| set.contains(self.mul(a, b))))
    }

    pub fn conjugate_subgroup(&self, h: &Subgroup, g: usize) -> Subgroup {
        let mut m = FixedBitSet::with_capacity(self.order());
        for x in h.elements() {
            m.insert(self.conj(x, g));
        }
        Subgroup::from_bits(m)
    }

    pub fn conjugate_subgroup_by(&self, h: &Subgroup, g: &Perm) -> Result<Subgroup, GroupError> {
        let gi = self
            .index_of(g)
            .ok_or_else(|| GroupError::ElementNotInGroup(g.to_cycles()))?;
        Ok(self.conjugate_subgroup(h, gi))
    }

    pub fn normalizer(&self, h: &Subgroup) -> Subgroup {
        self.normalizer_in(&self.whole(), h)
    }

    /// `N_K(H)` for subgroups `K`, `H`.
    pub fn normalizer_in(&self, k: &Subgroup, h: &Subgroup) -> Subgroup {
        let mut m = FixedBitSet::with_capacity(self.order());
        for g in k.elements() {
            if h.elements().all(|x| h.contains(self.conj(x, g))) {
                m.insert(g);
            }
        }
        Subgroup::from_bits(m)
    }

    pub fn centralizer(&self, h: &Subgroup) -> Subgroup {
        self.centralizer_in(&self.whole(), h)
    }

    pub fn centralizer_in(&self, k: &Subgroup, h: &Subgroup) -> Subgroup {
        let mut m = FixedBitSet::with_capacity(self.order());
        for g in k.elements() {
            if h.elements().all(|x| self.mul(x, g) == self.mul(g, x)) {
                m.insert(g);
            }
        }
        Subgroup::from_bits(m)
    }

    pub fn center(&self) -> Subgroup {
        self.centralizer(&self.whole())
    }

    pub fn is_normal(&self, h: &Subgroup) -> bool {
        self.generators_or_all()
            .into_iter()
            .all(|g| h.elements().all(|x| h.contains(self.conj(x, g))))
    }

    fn generators_or_all(&self) -> Vec<usize> {
        let gens: Vec<usize> = self
            .generators
            .iter()
            .filter_map(|g| self.index_of(g))
            .collect();
        if gens.is_empty() && self.order() > 1 {
            (0..self.order()).collect()
        } else {
            gens
        }
    }

    /// Largest normal subgroup of `self` contained in `h`.
    pub fn core(&self, h: &Subgroup) -> Subgroup {
        let mut acc = h.clone();
        for g in 0..self.order() {
            acc = acc.intersection(&self.conjugate_subgroup(h, g));
        }
        acc
    }

    /// Smallest normal subgroup containing `set`.
    pub fn normal_closure(&self, set: &[usize]) -> Subgroup {
        let mut gens: Vec<usize> = Vec::new();
        let mut seen = FixedBitSet::with_capacity(self.order());
        for &x in set {
            for g in 0..self.order() {
                let y = self.conj(x, g);
                if !seen.put(y) {
                    gens.push(y);
                }
            }
        }
        self.closure(&gens)
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut done = FixedBitSet::with_capacity(n);
        let mut classes = Vec::new();
        for x in 0..n {
            if done.contains(x) {
                continue;
            }
            let mut class = FixedBitSet::with_capacity(n);
            for g in 0..n {
                class.insert(self.conj(x, g));
            }
            done.union_with(&class);
            classes.push(class.ones().collect());
        }
        classes
    }

    /// A Sylow `p`-subgroup, grown one step at a time inside normalizers.
    pub fn sylow(&self, p: u32) -> Subgroup {
        let target = p_part(self.order(), p);
        let mut current = self.trivial();
        while current.order() < target {
            let norm = self.normalizer(&current);
            let step = norm.elements().find_map(|y| {
                if current.contains(y) {
                    return None;
                }
                // Strip the p'-part of the order of y.
                let ord = self.element_order(y);
                let pp = p_part(ord, p);
                let mut x = 0;
                for _ in 0..ord / pp {
                    x = self.mul(x, y);
                }
                if current.contains(x) {
                    return None;
                }
                let mut gens: Vec<usize> = current.elements().collect();
                gens.push(x);
                let cand = self.closure(&gens);
                is_p_power(cand.order(), p).then_some(cand)
            });
            match step {
                Some(next) => current = next,
                None => break,
            }
        }
        current
    }

    /// All `G`-conjugates of `h`, sorted and deduplicated.
    pub fn conjugates(&self, h: &Subgroup) -> Vec<Subgroup> {
        let mut out: Vec<Subgroup> = (0..self.order())
            .map(|g| self.conjugate_subgroup(h, g))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Every normal subgroup, ordered by order and then element list.
    pub fn normal_subgroups(&self) -> Result<Vec<Subgroup>, GroupError> {
        let bound = max_order();
        if self.order() > bound {
            return Err(GroupError::SizeBoundExceeded { bound });
        }
        let classes = self.conjugacy_classes();
        let principal: Vec<Subgroup> = classes.iter().map(|c| self.normal_closure(c)).collect();
        let mut found: HashSet<Subgroup> = HashSet::new();
        let trivial = self.trivial();
        found.insert(trivial.clone());
        let mut queue = VecDeque::from([trivial]);
        while let Some(n) = queue.pop_front() {
            for p in &principal {
                if p.is_subset(&n) {
                    continue;
                }
                let mut gens: Vec<usize> = n.elements().collect();
                gens.extend(p.elements());
                let join = self.closure(&gens);
                if found.insert(join.clone()) {
                    queue.push_back(join);
                }
            }
        }
        let mut out: Vec<Subgroup> = found.into_iter().collect();
        out.sort();
        Ok(out)
    }

    /// The full subgroup lattice, computed once as joins of cyclic subgroups.
    pub fn subgroups(&self) -> &[Subgroup] {
        self.subgroups.get_or_init(|| {
            let mut cyclic: Vec<Subgroup> = (0..self.order()).map(|g| self.closure(&[g])).collect();
            cyclic.sort();
            cyclic.dedup();
            let mut found: HashSet<Subgroup> = cyclic.iter().cloned().collect();
            let mut queue: VecDeque<Subgroup> = cyclic.iter().cloned().collect();
            while let Some(h) = queue.pop_front() {
                for c in &cyclic {
                    if c.is_subset(&h) {
                        continue;
                    }
                    let mut gens: Vec<usize> = h.elements().collect();
                    gens.extend(c.elements());
                    let join = self.closure(&gens);
                    if found.insert(join.clone()) {
                        queue.push_back(join);
                    }
                }
            }
            let mut out: Vec<Subgroup> = found.into_iter().collect();
            out.sort();
            out
        })
    }

    /// `O_p(G)`: the largest normal p-subgroup.
    pub fn big_o_p(&self, p: u32) -> Subgroup {
        // Intersection of the Sylow p-subgroups.
        let s = self.sylow(p);
        self.core(&s)
    }

    /// `O^p(G)`: the smallest normal subgroup with p-group quotient.
    pub fn o_super_p(&self, p: u32) -> Subgroup {
        // Generated by the p'-elements.
        let gens: Vec<usize> = (0..self.order())
            .filter(|&g| p_part(self.element_order(g), p) == 1)
            .collect();
        self.closure(&gens)
    }

    /// `C_G(O_p(G)) <= O_p(G)`.
    pub fn is_characteristic_p(&self, p: u32) -> bool {
        let op = self.big_o_p(p);
        self.centralizer(&op).is_subset(&op)
    }

    /// Human-readable list of the elements of `h` in cycle notation.
    pub fn describe(&self, h: &Subgroup) -> String {
        let parts: Vec<String> = h.elements().map(|i| self.elements[i].to_cycles()).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    /// Brute force: unions of conjugacy classes that happen to be subgroups.
    fn normal_subgroups_oracle(g: &PermGroup) -> Vec<Subgroup> {
        let classes = g.conjugacy_classes();
        let k = classes.len();
        let mut out = Vec::new();
        for mask in 0u64..(1 << k) {
            let mut set = FixedBitSet::with_capacity(g.order());
            for (i, c) in classes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for &x in c {
                        set.insert(x);
                    }
                }
            }
            if g.is_subgroup(&set) {
                out.push(Subgroup::from_bits(set));
            }
        }
        out.sort();
        out
    }

    fn orders(v: &[Subgroup]) -> Vec<usize> {
        v.iter().map(Subgroup::order).collect()
    }

    #[test]
    fn sylow_orders() {
        let s4 = catalog::symmetric(4);
        assert_eq!(s4.sylow(2).order(), 8);
        assert_eq!(s4.sylow(3).order(), 3);
        assert_eq!(s4.sylow(5).order(), 1);
        let c5 = catalog::cyclic(5);
        assert_eq!(c5.sylow(5), c5.whole());
    }

    #[test]
    fn sylow_of_sl23_is_quaternion() {
        let g = catalog::sl23();
        let s = g.sylow(2);
        assert_eq!(s.order(), 8);
        // Q8: a unique involution and six elements of order 4.
        let mut ords: Vec<usize> = s.elements().map(|x| g.element_order(x)).collect();
        ords.sort();
        assert_eq!(ords, vec![1, 2, 4, 4, 4, 4, 4, 4]);
    }

    #[test]
    fn normalizer_and_centralizer_basics() {
        let s4 = catalog::symmetric(4);
        let v4 = s4.big_o_p(2);
        assert_eq!(v4.order(), 4);
        assert_eq!(s4.centralizer(&v4), v4);
        assert_eq!(s4.normalizer(&s4.whole()), s4.whole());
        let h = s4.sylow(2);
        assert_eq!(s4.conjugate_subgroup(&h, 0), h);
        assert!(s4
            .conjugate_subgroup_by(&h, &Perm::identity(5))
            .is_err());
    }

    #[test]
    fn normal_subgroups_match_oracle() {
        for g in [
            catalog::symmetric(4),
            catalog::alternating(4),
            catalog::sl23(),
            catalog::dihedral8(),
            catalog::quaternion8(),
            catalog::symmetric(3),
            catalog::c2_x_s3(),
        ] {
            assert_eq!(g.normal_subgroups().unwrap(), normal_subgroups_oracle(&g));
        }
        assert_eq!(
            orders(&catalog::symmetric(4).normal_subgroups().unwrap()),
            vec![1, 4, 12, 24]
        );
        assert_eq!(
            orders(&catalog::quaternion8().normal_subgroups().unwrap()),
            vec![1, 2, 4, 4, 4, 8]
        );
        assert_eq!(orders(&catalog::cyclic(7).normal_subgroups().unwrap()), vec![1, 7]);
    }

    #[test]
    fn o_p_and_o_super_p() {
        let s4 = catalog::symmetric(4);
        assert_eq!(s4.big_o_p(2).order(), 4);
        assert_eq!(s4.o_super_p(2).order(), 12);
        let d8 = catalog::dihedral8();
        assert_eq!(d8.big_o_p(2), d8.whole());
        assert_eq!(d8.o_super_p(2).order(), 1);
    }

    #[test]
    fn characteristic_p() {
        assert!(catalog::symmetric(4).is_characteristic_p(2));
        assert!(catalog::dihedral8().is_characteristic_p(2));
        assert!(catalog::sl23().is_characteristic_p(2));
        assert!(!catalog::c2_x_s3().is_characteristic_p(2));
        assert!(!catalog::alternating(5).is_characteristic_p(2));
    }

    #[test]
    fn sylow_conjugacy_and_core() {
        for (g, p) in [
            (catalog::symmetric(4), 2),
            (catalog::symmetric(4), 3),
            (catalog::sl23(), 2),
            (catalog::sl23(), 3),
            (catalog::c2_x_s3(), 2),
        ] {
            let s = g.sylow(p);
            let conj = g.conjugates(&s);
            // Every p-subgroup of maximal order is one of the conjugates.
            let maximal: Vec<&Subgroup> = g
                .subgroups()
                .iter()
                .filter(|h| h.order() == s.order())
                .collect();
            assert_eq!(maximal.len(), conj.len());
            // O_p is the intersection of all Sylow subgroups, computed
            // independently of `core`.
            let mut inter = g.whole();
            for c in &conj {
                inter = inter.intersection(c);
            }
            assert_eq!(inter, g.big_o_p(p));
            // O_p is the largest normal p-subgroup.
            let largest = g
                .normal_subgroups()
                .unwrap()
                .into_iter()
                .filter(|n| is_p_power(n.order(), p))
                .max_by_key(Subgroup::order)
                .unwrap();
            assert_eq!(largest, g.big_o_p(p));
        }
    }

    #[test]
    fn normalizer_contains_and_centralizer_normal() {
        let g = catalog::symmetric(4);
        for h in g.subgroups() {
            let n = g.normalizer(h);
            let c = g.centralizer(h);
            assert!(h.is_subset(&n));
            assert!(c.is_subset(&n));
            for x in c.elements() {
                for y in n.elements() {
                    assert!(c.contains(g.conj(x, y)));
                }
            }
        }
    }

    #[test]
    fn subgroup_lattice_of_s4() {
        assert_eq!(catalog::symmetric(4).subgroups().len(), 30);
        assert_eq!(catalog::dihedral8().subgroups().len(), 10);
    }

    #[test]
    fn size_bound_enforced() {
        let s = catalog::symmetric(4);
        let err = PermGroup::generate_bounded(4, s.generators().to_vec(), 10).unwrap_err();
        assert_eq!(err, GroupError::SizeBoundExceeded { bound: 10 });
    }

    #[test]
    fn regular_representation() {
        // Z/4 by table.
        let table: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect();
        let (g, map) = PermGroup::regular(&table).unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(map[0], 0);
        assert_eq!(g.element_order(map[1]), 4);
        assert_eq!(g.mul(map[1], map[3]), map[0]);
    }
}
