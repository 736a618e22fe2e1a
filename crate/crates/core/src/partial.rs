//! Partial groups: an inversion, a domain `D` of words and a product
//! `Π: D → L`.
//!
//! Elements are integer ids with 0 the identity. Pairs in `D` and their
//! products live in a dense table; membership of longer words is decided
//! either trivially (every word, for groups) or by threading through an
//! object set: `w ∈ D` iff the subgroup `S_w` of `S` is an object.

use std::collections::HashSet;
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;

use crate::error::PartialGroupError;
use crate::pgroup::{Mask, PGroup};
use crate::report::Report;

/// Marks an undefined product or conjugate.
pub const NONE: u32 = u32::MAX;
/// Marks an element of `S` outside `D(f)` in a conjugation table.
pub const UNDEF: u8 = 0xFF;

/// Data deciding word membership through objects.
#[derive(Clone, Debug)]
pub struct Threading {
    m: usize,
    /// `conj[f * m + s]` is the index of `s^f` in `S`, or [`UNDEF`].
    conj: Vec<u8>,
    objects: HashSet<Mask>,
}

impl Threading {
    pub fn new(m: usize, conj: Vec<u8>, objects: impl IntoIterator<Item = Mask>) -> Self {
        assert_eq!(conj.len() % m.max(1), 0);
        Threading {
            m,
            conj,
            objects: objects.into_iter().collect(),
        }
    }

    pub fn sylow_order(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn s_conj(&self, f: u32, s: usize) -> Option<usize> {
        match self.conj[f as usize * self.m + s] {
            UNDEF => None,
            t => Some(t as usize),
        }
    }

    pub fn conj_row(&self, f: u32) -> &[u8] {
        &self.conj[f as usize * self.m..(f as usize + 1) * self.m]
    }

    /// `S_w`: the elements of `S` that stay in `S` while conjugated along `w`.
    pub fn s_w(&self, word: &[u32]) -> Mask {
        let mut out = 0;
        'outer: for s in 0..self.m {
            let mut x = s;
            for &f in word {
                match self.s_conj(f, x) {
                    Some(y) => x = y,
                    None => continue 'outer,
                }
            }
            out |= 1 << s;
        }
        out
    }

    pub fn objects(&self) -> &HashSet<Mask> {
        &self.objects
    }

    pub fn contains_word(&self, word: &[u32]) -> bool {
        self.objects.contains(&self.s_w(word))
    }
}

#[derive(Clone, Debug)]
pub struct PartialGroup {
    labels: Vec<String>,
    inv: Vec<u32>,
    prod: Vec<u32>,
    threading: Option<Threading>,
    conj_full: OnceLock<Vec<u32>>,
}

impl PartialGroup {
    /// A partial group from its pair table. Without `threading` every word is
    /// in the domain, so the table must be total.
    pub fn new(
        labels: Vec<String>,
        inv: Vec<u32>,
        prod: Vec<u32>,
        threading: Option<Threading>,
    ) -> Result<Self, PartialGroupError> {
        let n = labels.len();
        if inv.len() != n || prod.len() != n * n || n == 0 {
            return Err(PartialGroupError::Inconsistent(format!(
                "{n} labels, {} inverses, {} table entries",
                inv.len(),
                prod.len()
            )));
        }
        if let Some(t) = &threading {
            if t.conj.len() != n * t.m {
                return Err(PartialGroupError::Inconsistent(
                    "conjugation table has the wrong size".into(),
                ));
            }
        } else if prod.contains(&NONE) {
            return Err(PartialGroupError::Inconsistent(
                "undefined product without an object set".into(),
            ));
        }
        Ok(PartialGroup {
            labels,
            inv,
            prod,
            threading,
            conj_full: OnceLock::new(),
        })
    }

    /// A group given by its multiplication table (`table[a][b] = ab`, 0 the
    /// identity).
    pub fn from_group_table(labels: Vec<String>, table: &[Vec<usize>]) -> Self {
        let n = table.len();
        let prod: Vec<u32> = table.iter().flatten().map(|&x| x as u32).collect();
        let inv = (0..n)
            .map(|a| (0..n).find(|&b| table[a][b] == 0).expect("inverse") as u32)
            .collect();
        PartialGroup::new(labels, inv, prod, None).expect("group table")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn identity(&self) -> u32 {
        0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, f: u32) -> &str {
        &self.labels[f as usize]
    }

    pub fn threading(&self) -> Option<&Threading> {
        self.threading.as_ref()
    }

    #[inline]
    pub fn inv(&self, f: u32) -> u32 {
        self.inv[f as usize]
    }

    /// `Π(f, g)` when `(f, g) ∈ D`.
    #[inline]
    pub fn pair(&self, f: u32, g: u32) -> Option<u32> {
        match self.prod[f as usize * self.len() + g as usize] {
            NONE => None,
            h => Some(h),
        }
    }

    pub fn pair_table(&self) -> &[u32] {
        &self.prod
    }

    pub fn in_domain(&self, word: &[u32]) -> bool {
        match &self.threading {
            None => true,
            Some(t) => match word {
                [] => t.contains_word(word),
                [f] => t.contains_word(&[*f]),
                [f, g] => self.pair(*f, *g).is_some(),
                _ => t.contains_word(word),
            },
        }
    }

    /// Left fold over the pair table, without a membership check.
    fn fold(&self, word: &[u32]) -> Option<u32> {
        let mut it = word.iter();
        let mut acc = match it.next() {
            None => return Some(0),
            Some(&f) => f,
        };
        for &f in it {
            acc = self.pair(acc, f)?;
        }
        Some(acc)
    }

    pub fn product(&self, word: &[u32]) -> Result<u32, PartialGroupError> {
        if let Some(&bad) = word.iter().find(|&&f| f as usize >= self.len()) {
            return Err(PartialGroupError::NoSuchElement(bad));
        }
        if !self.in_domain(word) {
            return Err(PartialGroupError::NotInDomain(word.to_vec()));
        }
        self.fold(word).ok_or_else(|| {
            PartialGroupError::Inconsistent(format!(
                "word {} is in D but a partial product is undefined",
                self.show(word)
            ))
        })
    }

    /// `(f₁,…,fₙ)` in labels.
    pub fn show(&self, word: &[u32]) -> String {
        let parts: Vec<&str> = word.iter().map(|&f| self.label(f)).collect();
        format!("({})", parts.join(", "))
    }

    /// `table[g * n + x] = x^g = Π(g⁻¹, x, g)`, or [`NONE`].
    pub fn conj_table(&self) -> &[u32] {
        self.conj_full.get_or_init(|| {
            let n = self.len();
            let mut t = vec![NONE; n * n];
            for g in 0..n as u32 {
                let gi = self.inv(g);
                for x in 0..n as u32 {
                    let w = [gi, x, g];
                    if self.in_domain(&w) {
                        if let Some(y) = self.fold(&w) {
                            t[g as usize * n + x as usize] = y;
                        }
                    }
                }
            }
            t
        })
    }

    #[inline]
    pub fn conj_or_none(&self, x: u32, g: u32) -> Option<u32> {
        match self.conj_table()[g as usize * self.len() + x as usize] {
            NONE => None,
            y => Some(y),
        }
    }

    pub fn conjugate(&self, x: u32, g: u32) -> Result<u32, PartialGroupError> {
        self.conj_or_none(x, g)
            .ok_or(PartialGroupError::NotConjugatable { x, g })
    }

    /// `D(g) = {x : (g⁻¹, x, g) ∈ D}`.
    pub fn d_of(&self, g: u32) -> Vec<u32> {
        (0..self.len() as u32)
            .filter(|&x| self.conj_or_none(x, g).is_some())
            .collect()
    }

    /// `S_g = {s ∈ S ∩ D(g) : s^g ∈ S}` for a subgroup `S` given by ids.
    pub fn s_sub_g(&self, s: &[u32], g: u32) -> Vec<u32> {
        let in_s: HashSet<u32> = s.iter().copied().collect();
        s.iter()
            .copied()
            .filter(|&x| self.conj_or_none(x, g).is_some_and(|y| in_s.contains(&y)))
            .collect()
    }

    pub fn set_of(&self, ids: impl IntoIterator<Item = u32>) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.len());
        for i in ids {
            b.insert(i as usize);
        }
        b
    }

    /// `None` if `h` is a partial subgroup, otherwise a witness.
    pub fn partial_subgroup_witness(&self, h: &FixedBitSet) -> Option<String> {
        if !h.contains(0) {
            return Some("identity missing".into());
        }
        for a in h.ones() {
            let ai = self.inv(a as u32);
            if !h.contains(ai as usize) {
                return Some(format!("inverse of {} missing", self.label(a as u32)));
            }
            for b in h.ones() {
                if let Some(c) = self.pair(a as u32, b as u32) {
                    if !h.contains(c as usize) {
                        return Some(format!(
                            "{} = {} missing",
                            self.show(&[a as u32, b as u32]),
                            self.label(c)
                        ));
                    }
                }
            }
        }
        None
    }

    pub fn is_partial_subgroup(&self, h: &FixedBitSet) -> bool {
        self.partial_subgroup_witness(h).is_none()
    }

    /// Smallest partial subgroup containing `seed`. Closing under pairs is
    /// enough: products of longer words in `D` are iterated pair products.
    pub fn partial_subgroup_closure(&self, seed: &FixedBitSet) -> FixedBitSet {
        let mut h = FixedBitSet::with_capacity(self.len());
        h.insert(0);
        let mut list: Vec<u32> = vec![0];
        let add = |h: &mut FixedBitSet, list: &mut Vec<u32>, x: u32| {
            if !h.put(x as usize) {
                list.push(x);
            }
        };
        for x in seed.ones() {
            add(&mut h, &mut list, x as u32);
        }
        let mut k = 0;
        while k < list.len() {
            let a = list[k];
            k += 1;
            add(&mut h, &mut list, self.inv(a));
            let mut j = 0;
            while j < list.len() {
                let b = list[j];
                j += 1;
                if let Some(c) = self.pair(a, b) {
                    add(&mut h, &mut list, c);
                }
                if let Some(c) = self.pair(b, a) {
                    add(&mut h, &mut list, c);
                }
            }
        }
        h
    }

    /// `None` if `n` is closed under all defined conjugations, otherwise a
    /// witness. Assumes `n` is a partial subgroup.
    fn conj_closure_witness(&self, n: &FixedBitSet) -> Option<String> {
        for f in 0..self.len() as u32 {
            for x in n.ones() {
                if let Some(y) = self.conj_or_none(x as u32, f) {
                    if !n.contains(y as usize) {
                        return Some(format!(
                            "{}^{} = {} leaves the subset",
                            self.label(x as u32),
                            self.label(f),
                            self.label(y)
                        ));
                    }
                }
            }
        }
        None
    }

    pub fn is_partial_normal(&self, n: &FixedBitSet) -> Result<bool, PartialGroupError> {
        if let Some(w) = self.partial_subgroup_witness(n) {
            return Err(PartialGroupError::NotAPartialSubgroup(w));
        }
        Ok(self.conj_closure_witness(n).is_none())
    }

    /// Smallest partial normal subgroup containing `seed`.
    pub fn partial_normal_closure(&self, seed: &FixedBitSet) -> FixedBitSet {
        let mut cur = seed.clone();
        loop {
            let mut h = self.partial_subgroup_closure(&cur);
            let mut grew = false;
            for f in 0..self.len() as u32 {
                for x in h.clone().ones() {
                    if let Some(y) = self.conj_or_none(x as u32, f) {
                        grew |= !h.put(y as usize);
                    }
                }
            }
            if !grew {
                return h;
            }
            cur = h;
        }
    }

    /// Orbits of the partial conjugation action, each sorted, in order of
    /// their least member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut seen = FixedBitSet::with_capacity(n);
        let mut classes = Vec::new();
        for x in 0..n as u32 {
            if seen.contains(x as usize) {
                continue;
            }
            let mut class = vec![x];
            seen.insert(x as usize);
            let mut k = 0;
            while k < class.len() {
                let y = class[k];
                k += 1;
                for f in 0..n as u32 {
                    if let Some(z) = self.conj_or_none(y, f) {
                        if !seen.put(z as usize) {
                            class.push(z);
                        }
                    }
                }
            }
            class.sort();
            classes.push(class);
        }
        classes
    }

    /// A copy with `Π(a, b)` overwritten by `c`; used to build negative
    /// controls.
    pub fn with_edited_product(&self, a: u32, b: u32, c: u32) -> Self {
        let mut out = self.clone();
        out.prod[a as usize * self.len() + b as usize] = c;
        out.conj_full = OnceLock::new();
        out
    }

    /// Checks the partial-group axioms on every word of length at most
    /// `max_len` (and on the words they force, such as `w⁻¹∘w`).
    pub fn check_axioms(&self, max_len: usize) -> Report {
        let n = self.len() as u32;
        let mut report = Report::new();

        let mut w1 = None;
        if !self.in_domain(&[]) {
            w1 = Some("empty word not in D".to_string());
        }
        for f in 0..n {
            if w1.is_some() {
                break;
            }
            if !self.in_domain(&[f]) || self.fold(&[f]) != Some(f) {
                w1 = Some(format!("({}) not in D or Π differs", self.label(f)));
            }
        }
        report.witness("pg.length-one", w1);

        let w2 = (0..n).find(|&f| self.inv(self.inv(f)) != f).map(|f| {
            format!("({}⁻¹)⁻¹ ≠ {}", self.label(f), self.label(f))
        });
        report.witness("pg.inversion-involution", w2);

        let mut sub = None;
        let mut contract = None;
        let mut cancel = None;
        let mut word = Vec::with_capacity(max_len);
        self.for_each_word(max_len, &mut word, &mut |w| {
            if !self.in_domain(w) {
                return sub.is_none() || contract.is_none() || cancel.is_none();
            }
            if sub.is_none() {
                for i in 0..=w.len() {
                    if !self.in_domain(&w[..i]) || !self.in_domain(&w[i..]) {
                        sub = Some(format!(
                            "{} ∈ D but {} or {} is not",
                            self.show(w),
                            self.show(&w[..i]),
                            self.show(&w[i..])
                        ));
                        break;
                    }
                }
            }
            let whole = self.fold(w);
            if contract.is_none() {
                'c: for i in 0..=w.len() {
                    for j in i..=w.len() {
                        let Some(v) = self.fold(&w[i..j]) else {
                            contract = Some(format!("Π{} undefined", self.show(&w[i..j])));
                            break 'c;
                        };
                        let mut c: Vec<u32> = w[..i].to_vec();
                        c.push(v);
                        c.extend_from_slice(&w[j..]);
                        if !self.in_domain(&c) || self.fold(&c) != whole || whole.is_none() {
                            contract = Some(format!(
                                "{} ∈ D but contracting {} gives {} with a different product",
                                self.show(w),
                                self.show(&w[i..j]),
                                self.show(&c)
                            ));
                            break 'c;
                        }
                    }
                }
            }
            if cancel.is_none() {
                let mut c: Vec<u32> = w.iter().rev().map(|&f| self.inv(f)).collect();
                c.extend_from_slice(w);
                if !self.in_domain(&c) || self.fold(&c) != Some(0) {
                    cancel = Some(format!("{} ∈ D but w⁻¹∘w fails", self.show(w)));
                }
            }
            sub.is_none() || contract.is_none() || cancel.is_none()
        });
        report.witness("pg.subword-closure", sub);
        report.witness("pg.contraction", contract);
        report.witness("pg.inverse-cancellation", cancel);
        report
    }

    /// Visits all words of length `1..=max_len`; stops when `visit` returns
    /// false.
    fn for_each_word(
        &self,
        max_len: usize,
        word: &mut Vec<u32>,
        visit: &mut dyn FnMut(&[u32]) -> bool,
    ) -> bool {
        if word.len() == max_len {
            return true;
        }
        for f in 0..self.len() as u32 {
            word.push(f);
            let go = visit(word) && self.for_each_word(max_len, word, visit);
            word.pop();
            if !go {
                return false;
            }
        }
        true
    }

    /// Words of `D` of length exactly `len`, found by extending prefixes
    /// (prefixes of words in `D` lie in `D`).
    pub fn domain_words(&self, len: usize) -> Vec<Vec<u32>> {
        let mut level: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &level {
                for f in 0..self.len() as u32 {
                    let mut v = w.clone();
                    v.push(f);
                    if self.in_domain(&v) {
                        next.push(v);
                    }
                }
            }
            level = next;
        }
        level
    }
}

/// Word length used by default for exhaustive checks: 3 for small
/// structures, 2 otherwise.
pub fn default_word_bound(n: usize) -> usize {
    if n <= 64 {
        3
    } else {
        2
    }
}

/// `None` if `map` (indexed by ids of `src`) is a homomorphism of partial
/// groups on words of `D` up to length `max_len`; otherwise a witness.
pub fn homomorphism_witness(
    src: &PartialGroup,
    dst: &PartialGroup,
    map: &[u32],
    max_len: usize,
) -> Option<String> {
    if map[0] != 0 {
        return Some(format!("identity maps to {}", dst.label(map[0])));
    }
    for len in 1..=max_len {
        for w in src.domain_words(len) {
            let img: Vec<u32> = w.iter().map(|&f| map[f as usize]).collect();
            let lhs = src.product(&w).ok().map(|x| map[x as usize]);
            let rhs = dst.product(&img).ok();
            if rhs.is_none() || lhs != rhs {
                return Some(format!(
                    "{} ∈ D maps to {} with mismatched product",
                    src.show(&w),
                    dst.show(&img)
                ));
            }
        }
    }
    None
}

/// Ids of the elements of `S` seen through a locality's `s_elem` map.
pub fn mask_to_ids(s_elem: &[u32], m: Mask) -> Vec<u32> {
    crate::pgroup::bits(m).map(|i| s_elem[i]).collect()
}

/// The trivial partial group on one element.
pub fn trivial_partial_group() -> PartialGroup {
    PartialGroup::from_group_table(vec!["1".into()], &[vec![0]])
}

/// The partial group of a p-group, as a group.
pub fn of_pgroup(s: &PGroup) -> PartialGroup {
    let n = s.order();
    let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| s.mul(a, b)).collect()).collect();
    PartialGroup::from_group_table(s.labels().to_vec(), &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::group::PermGroup;
    use proptest::prelude::*;

    fn group_pg(g: &PermGroup) -> PartialGroup {
        let n = g.order();
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| g.mul(a, b)).collect()).collect();
        let labels = g.elements().iter().map(|p| p.to_cycles()).collect();
        PartialGroup::from_group_table(labels, &table)
    }

    #[test]
    fn group_axioms_pass() {
        let pg = group_pg(&catalog::symmetric(3));
        let r = pg.check_axioms(3);
        assert!(r.all_pass(), "{r}");
        assert_eq!(r.checks.len(), 5);
        assert_eq!(pg.product(&[]).unwrap(), 0);
    }

    #[test]
    fn mutation_breaks_contraction() {
        let pg = group_pg(&catalog::symmetric(3));
        let right = pg.pair(1, 2).unwrap();
        let bad = pg.with_edited_product(1, 2, (right + 1) % 6);
        let r = bad.check_axioms(3);
        match r.get("pg.contraction").unwrap() {
            crate::report::Verdict::Fail(w) => assert!(w.contains("contracting")),
            v => panic!("expected failure, got {v:?}"),
        }
    }

    #[test]
    fn conjugation_basics() {
        let g = catalog::symmetric(4);
        let pg = group_pg(&g);
        for f in 0..g.order() as u32 {
            assert_eq!(pg.conjugate(0, f).unwrap(), 0);
            assert_eq!(pg.conjugate(f, 0).unwrap(), f);
            assert_eq!(pg.conjugate(f, 5).unwrap(), g.conj(f as usize, 5) as u32);
        }
        assert_eq!(pg.d_of(3).len(), 24);
    }

    #[test]
    fn normal_subgroups_are_partial_normal() {
        let g = catalog::symmetric(4);
        let pg = group_pg(&g);
        for h in g.subgroups() {
            let set = pg.set_of(h.elements().map(|x| x as u32));
            assert!(pg.is_partial_subgroup(&set));
            assert_eq!(pg.is_partial_normal(&set).unwrap(), g.is_normal(h));
        }
        let mut odd = FixedBitSet::with_capacity(24);
        odd.insert(0);
        odd.insert(1);
        odd.insert(2);
        assert!(pg.is_partial_normal(&odd).is_err());
    }

    #[test]
    fn classes_partition() {
        let pg = group_pg(&catalog::symmetric(4));
        let classes = pg.conjugacy_classes();
        assert_eq!(classes.len(), 5);
        assert_eq!(classes.iter().map(Vec::len).sum::<usize>(), 24);
    }

    proptest! {
        #[test]
        fn closure_is_minimal(seed in proptest::collection::vec(0u32..24, 0..3)) {
            let g = catalog::symmetric(4);
            let pg = group_pg(&g);
            let seed_set = pg.set_of(seed.iter().copied());
            let h = pg.partial_subgroup_closure(&seed_set);
            prop_assert!(pg.is_partial_subgroup(&h));
            prop_assert!(seed_set.is_subset(&h));
            let gens: Vec<usize> = seed.iter().map(|&x| x as usize).collect();
            let expected = g.closure(&gens);
            prop_assert_eq!(h.ones().collect::<Vec<_>>(), expected.element_vec());
        }

        #[test]
        fn conjugation_is_a_bijection(f in 0u32..24) {
            let pg = group_pg(&catalog::symmetric(4));
            let fi = pg.inv(f);
            for x in pg.d_of(f) {
                let y = pg.conjugate(x, f).unwrap();
                prop_assert_eq!(pg.conjugate(y, fi).unwrap(), x);
            }
        }
    }
}
