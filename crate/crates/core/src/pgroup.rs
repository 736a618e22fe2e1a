//! Small p-groups (at most 64 elements) with subgroups encoded as `u64`
//! bit masks over element indices. Fusion systems and localities work in
//! this representation.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::LocalityError;
use crate::group::{is_p_power, PermGroup, Subgroup};

pub type Mask = u64;

/// Ascending-element-list order: smaller subgroups first, then the one
/// containing the lowest differing element.
pub fn cmp_masks(a: Mask, b: Mask) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| {
        if a == b {
            Ordering::Equal
        } else if a >> (a ^ b).trailing_zeros() & 1 == 1 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    })
}

pub fn sort_masks(v: &mut [Mask]) {
    v.sort_by(|&a, &b| cmp_masks(a, b));
}

pub fn bits(mask: Mask) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

#[derive(Clone, Debug)]
pub struct PGroup {
    p: u32,
    n: usize,
    mul: Vec<u8>,
    inv: Vec<u8>,
    labels: Vec<String>,
    subgroups: Vec<Mask>,
    sub_index: HashMap<Mask, usize>,
}

impl PGroup {
    /// `table[a][b] = ab` with element 0 the identity.
    pub fn from_table(p: u32, table: &[Vec<usize>], labels: Vec<String>) -> Result<Self, LocalityError> {
        let n = table.len();
        if n > 64 {
            return Err(LocalityError::SylowTooLarge(n));
        }
        assert!(is_p_power(n, p), "order {n} is not a power of {p}");
        assert_eq!(labels.len(), n);
        let mut mul = vec![0u8; n * n];
        let mut inv = vec![0u8; n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = table[a][b] as u8;
                if table[a][b] == 0 {
                    inv[a] = b as u8;
                }
            }
        }
        let mut g = PGroup {
            p,
            n,
            mul,
            inv,
            labels,
            subgroups: Vec::new(),
            sub_index: HashMap::new(),
        };
        g.subgroups = g.enumerate_subgroups();
        g.sub_index = g
            .subgroups
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i))
            .collect();
        Ok(g)
    }

    /// The subgroup `s` of `g`, with index `i` standing for the `i`-th
    /// element of `s` in `g`'s order. Returns the embedding as well.
    pub fn from_subgroup(g: &PermGroup, s: &Subgroup, p: u32) -> Result<(Self, Vec<usize>), LocalityError> {
        let embed = s.element_vec();
        if embed.len() > 64 {
            return Err(LocalityError::SylowTooLarge(embed.len()));
        }
        let pos: HashMap<usize, usize> = embed.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let table: Vec<Vec<usize>> = embed
            .iter()
            .map(|&a| embed.iter().map(|&b| pos[&g.mul(a, b)]).collect())
            .collect();
        let labels = embed.iter().map(|&x| g.element(x).to_cycles()).collect();
        Ok((Self::from_table(p, &table, labels)?, embed))
    }

    fn enumerate_subgroups(&self) -> Vec<Mask> {
        let mut cyclic: Vec<Mask> = (0..self.n).map(|g| self.closure(1 << g)).collect();
        sort_masks(&mut cyclic);
        cyclic.dedup();
        let mut found: HashSet<Mask> = cyclic.iter().copied().collect();
        found.insert(1);
        let mut queue: VecDeque<Mask> = cyclic.iter().copied().collect();
        while let Some(h) = queue.pop_front() {
            for &c in &cyclic {
                if c & !h == 0 {
                    continue;
                }
                let j = self.closure(h | c);
                if found.insert(j) {
                    queue.push_back(j);
                }
            }
        }
        let mut out: Vec<Mask> = found.into_iter().collect();
        sort_masks(&mut out);
        out
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn full(&self) -> Mask {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
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

    pub fn closure(&self, seed: Mask) -> Mask {
        let mut m: Mask = 1 | seed;
        loop {
            let mut next = m;
            for a in bits(m) {
                for b in bits(seed | 1) {
                    next |= 1 << self.mul(a, b);
                }
            }
            if next == m {
                return m;
            }
            m = next;
        }
    }

    pub fn is_subgroup(&self, m: Mask) -> bool {
        self.sub_index.contains_key(&m)
    }

    pub fn join(&self, a: Mask, b: Mask) -> Mask {
        self.closure(a | b)
    }

    /// Every subgroup, in [`cmp_masks`] order.
    pub fn subgroups(&self) -> &[Mask] {
        &self.subgroups
    }

    pub fn subgroup_index(&self, m: Mask) -> Option<usize> {
        self.sub_index.get(&m).copied()
    }

    pub fn subgroups_of(&self, m: Mask) -> impl Iterator<Item = Mask> + '_ {
        self.subgroups.iter().copied().filter(move |&h| h & !m == 0)
    }

    pub fn conj_mask(&self, m: Mask, g: usize) -> Mask {
        bits(m).fold(0, |acc, x| acc | 1 << self.conj(x, g))
    }

    pub fn normalizer(&self, m: Mask) -> Mask {
        self.normalizer_in(self.full(), m)
    }

    pub fn normalizer_in(&self, k: Mask, m: Mask) -> Mask {
        bits(k)
            .filter(|&g| self.conj_mask(m, g) == m)
            .fold(0, |acc, g| acc | 1 << g)
    }

    pub fn centralizer(&self, m: Mask) -> Mask {
        self.centralizer_in(self.full(), m)
    }

    pub fn centralizer_in(&self, k: Mask, m: Mask) -> Mask {
        bits(k)
            .filter(|&g| bits(m).all(|x| self.mul(x, g) == self.mul(g, x)))
            .fold(0, |acc, g| acc | 1 << g)
    }

    pub fn center_of(&self, m: Mask) -> Mask {
        self.centralizer_in(m, m)
    }

    pub fn is_normal_in(&self, h: Mask, k: Mask) -> bool {
        bits(k).all(|g| self.conj_mask(h, g) == h)
    }

    /// `{x, y, ...}` in element labels.
    pub fn describe(&self, m: Mask) -> String {
        let parts: Vec<&str> = bits(m).map(|i| self.labels[i].as_str()).collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Compact id: `<order>#<position among subgroups>`.
    pub fn subgroup_id(&self, m: Mask) -> String {
        match self.subgroup_index(m) {
            Some(i) => format!("{}#{}", m.count_ones(), i),
            None => format!("{}#?", m.count_ones()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use proptest::prelude::*;

    fn d8() -> PGroup {
        let g = catalog::dihedral8();
        PGroup::from_subgroup(&g, &g.whole(), 2).unwrap().0
    }

    #[test]
    fn d8_lattice() {
        let s = d8();
        assert_eq!(s.subgroups().len(), 10);
        assert_eq!(s.subgroups()[0], 1);
        assert_eq!(*s.subgroups().last().unwrap(), s.full());
        assert_eq!(s.center_of(s.full()).count_ones(), 2);
    }

    #[test]
    fn matches_permgroup_lattice() {
        for (g, p) in [(catalog::sl23(), 2), (catalog::symmetric(4), 2), (catalog::quaternion8(), 2)] {
            let syl = g.sylow(p);
            let (s, embed) = PGroup::from_subgroup(&g, &syl, p).unwrap();
            let mut expected: Vec<Mask> = g
                .subgroups()
                .iter()
                .filter(|h| h.is_subset(&syl))
                .map(|h| {
                    h.elements()
                        .map(|x| 1u64 << embed.iter().position(|&e| e == x).unwrap())
                        .fold(0, |a, b| a | b)
                })
                .collect();
            sort_masks(&mut expected);
            assert_eq!(s.subgroups(), &expected[..]);
        }
    }

    proptest! {
        #[test]
        fn closure_is_a_subgroup(seed in any::<u8>()) {
            let s = d8();
            let m = s.closure(seed as Mask);
            prop_assert!(s.is_subgroup(m));
            prop_assert_eq!(m & seed as Mask, seed as Mask);
            // Minimal: every subgroup containing the seed contains m.
            for &h in s.subgroups() {
                if h & seed as Mask == seed as Mask {
                    prop_assert_eq!(h & m, m);
                }
            }
        }

        #[test]
        fn mask_order_is_total(a in 0u64..256, b in 0u64..256) {
            let ab = cmp_masks(a, b);
            prop_assert_eq!(ab.reverse(), cmp_masks(b, a));
            prop_assert_eq!(ab == Ordering::Equal, a == b);
        }
    }
}
