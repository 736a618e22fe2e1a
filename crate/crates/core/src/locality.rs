//! Localities `(L, Δ, S)`.
//!
//! A locality is a [`PartialGroup`] whose domain threads through the object
//! set `Δ`, together with the Sylow subgroup `S` (as a [`PGroup`]) and the
//! ids of its elements in `L`. Localities built from a finite group keep the
//! group around as a realization, which later constructions use to compare
//! against the ambient group.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;

use crate::error::{FusionError, LocalityError, PartialGroupError};
use crate::fusion::{FusionSystem, Mor};
use crate::group::{is_prime, p_part, PermGroup, Subgroup};
use crate::partial::{default_word_bound, PartialGroup, Threading, NONE, UNDEF};
use crate::pgroup::{bits, sort_masks, Mask, PGroup};
use crate::report::{Report, Verdict};

/// A sorted, duplicate-free set of subgroups of `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectSet {
    masks: Vec<Mask>,
    lookup: HashSet<Mask>,
}

impl ObjectSet {
    pub fn new(masks: impl IntoIterator<Item = Mask>) -> Self {
        let lookup: HashSet<Mask> = masks.into_iter().collect();
        let mut masks: Vec<Mask> = lookup.iter().copied().collect();
        sort_masks(&mut masks);
        ObjectSet { masks, lookup }
    }

    pub fn contains(&self, m: Mask) -> bool {
        self.lookup.contains(&m)
    }

    pub fn masks(&self) -> &[Mask] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn is_subset(&self, other: &ObjectSet) -> bool {
        self.masks.iter().all(|&m| other.contains(m))
    }

    /// Members with no proper subgroup in the set.
    pub fn minimal_members(&self) -> Vec<Mask> {
        self.masks
            .iter()
            .copied()
            .filter(|&m| !self.masks.iter().any(|&k| k != m && k & m == k))
            .collect()
    }
}

/// Which object set to build a locality on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeltaSelector {
    /// Overgroups of conjugates of centric radical subgroups.
    CrClosure,
    Centric,
    Quasicentric,
    Subcentric,
    /// Every subgroup of `S`.
    All,
    /// Closure of the given subgroups under conjugation and overgroups.
    Generated(Vec<Mask>),
}

impl DeltaSelector {
    pub fn resolve(&self, f: &FusionSystem) -> Result<Vec<Mask>, FusionError> {
        let classes = || f.subgroup_classes();
        Ok(match self {
            DeltaSelector::CrClosure => f.f_closure(&classes()?.centric_radical),
            DeltaSelector::Centric => classes()?.centric,
            DeltaSelector::Quasicentric => classes()?.quasicentric,
            DeltaSelector::Subcentric => classes()?.subcentric,
            DeltaSelector::All => f.objects(),
            DeltaSelector::Generated(seed) => f.f_closure(seed),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            DeltaSelector::CrClosure => "cr-closure",
            DeltaSelector::Centric => "centric",
            DeltaSelector::Quasicentric => "quasicentric",
            DeltaSelector::Subcentric => "subcentric",
            DeltaSelector::All => "all",
            DeltaSelector::Generated(_) => "explicit",
        }
    }
}

/// A finite group with a chosen Sylow subgroup, the data every
/// group-derived construction starts from.
#[derive(Debug)]
pub struct GroupModel {
    pub group: Arc<PermGroup>,
    pub p: u32,
    pub s: Arc<PGroup>,
    /// Index of each element of `S` in `group`.
    pub s_embed: Vec<usize>,
    pos: HashMap<usize, usize>,
    fusion: OnceLock<FusionSystem>,
}

impl GroupModel {
    pub fn new(group: Arc<PermGroup>, p: u32) -> Result<Self, LocalityError> {
        if !is_prime(p) {
            return Err(crate::error::GroupError::NotPrime(p).into());
        }
        let syl = group.sylow(p);
        let (s, s_embed) = PGroup::from_subgroup(&group, &syl, p)?;
        let pos = s_embed.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        Ok(GroupModel {
            group,
            p,
            s: Arc::new(s),
            s_embed,
            pos,
            fusion: OnceLock::new(),
        })
    }

    /// `F_S(G)`.
    pub fn fusion(&self) -> &FusionSystem {
        self.fusion.get_or_init(|| {
            FusionSystem::of_group_elements(
                self.s.clone(),
                &self.s_embed,
                &self.group,
                0..self.group.order(),
                self.s.full(),
            )
            .expect("conjugation maps are injective homomorphisms")
        })
    }

    pub fn s_index(&self, g: usize) -> Option<usize> {
        self.pos.get(&g).copied()
    }

    /// `H ∩ S` as a mask.
    pub fn mask_of(&self, h: &Subgroup) -> Mask {
        h.elements()
            .filter_map(|x| self.s_index(x))
            .fold(0, |a, i| a | 1 << i)
    }

    pub fn subgroup_of(&self, m: Mask) -> Subgroup {
        let gens: Vec<usize> = bits(m).map(|i| self.s_embed[i]).collect();
        self.group.closure(&gens)
    }

    /// `S_g = {s ∈ S : s^g ∈ S}`.
    pub fn s_of(&self, g: usize) -> Mask {
        (0..self.s.order())
            .filter(|&i| self.s_index(self.group.conj(self.s_embed[i], g)).is_some())
            .fold(0, |a, i| a | 1 << i)
    }

    pub fn resolve(&self, sel: &DeltaSelector) -> Result<Vec<Mask>, LocalityError> {
        Ok(sel.resolve(self.fusion())?)
    }

    /// `L_Γ(G)`.
    pub fn locality(&self, gamma: &[Mask]) -> Result<Locality, LocalityError> {
        Locality::from_group(self, gamma)
    }

    pub fn locality_for(&self, sel: &DeltaSelector) -> Result<Locality, LocalityError> {
        Locality::from_group(self, &self.resolve(sel)?)
    }
}

/// How a locality sits inside a finite group.
#[derive(Clone, Debug)]
pub struct Realization {
    pub group: Arc<PermGroup>,
    /// Group index of each element id.
    pub ids: Vec<usize>,
}

/// `N_L(P)` as a group, with the ids of its elements.
#[derive(Debug)]
pub struct NormalizerGroup {
    pub group: PermGroup,
    /// `ids[i]` is the element of `L` at index `i` of `group`.
    pub ids: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct Locality {
    pg: PartialGroup,
    s: Arc<PGroup>,
    s_elem: Vec<u32>,
    elem_s: Vec<u8>,
    delta: ObjectSet,
    realization: Option<Realization>,
    fusion: OnceLock<FusionSystem>,
}

impl Locality {
    /// Assembles a locality from its parts. The partial group must thread
    /// through `delta`; the axioms are not checked here.
    pub fn new(
        pg: PartialGroup,
        s: Arc<PGroup>,
        s_elem: Vec<u32>,
        delta: ObjectSet,
        realization: Option<Realization>,
    ) -> Result<Self, LocalityError> {
        let t = pg.threading().ok_or_else(|| {
            PartialGroupError::Inconsistent("a locality needs an object set".into())
        })?;
        if t.sylow_order() != s.order() || s_elem.len() != s.order() {
            return Err(PartialGroupError::Inconsistent("Sylow size mismatch".into()).into());
        }
        if delta.is_empty() {
            return Err(LocalityError::EmptyObjectSet);
        }
        if t.objects().len() != delta.len() || !delta.masks().iter().all(|m| t.objects().contains(m)) {
            return Err(PartialGroupError::Inconsistent("object sets differ".into()).into());
        }
        let mut elem_s = vec![UNDEF; pg.len()];
        for (i, &f) in s_elem.iter().enumerate() {
            if f as usize >= pg.len() {
                return Err(PartialGroupError::NoSuchElement(f).into());
            }
            elem_s[f as usize] = i as u8;
        }
        if s_elem[0] != 0 {
            return Err(PartialGroupError::Inconsistent("identity of S is not 1".into()).into());
        }
        Ok(Locality {
            pg,
            s,
            s_elem,
            elem_s,
            delta,
            realization,
            fusion: OnceLock::new(),
        })
    }

    /// `L_Γ(M) = {g ∈ M : S ∩ S^g ∈ Γ}` with words threading through `Γ`.
    pub fn from_group(model: &GroupModel, gamma: &[Mask]) -> Result<Self, LocalityError> {
        let g = &model.group;
        let s = &model.s;
        let m = s.order();
        if gamma.is_empty() {
            return Err(LocalityError::EmptyObjectSet);
        }
        let delta = ObjectSet::new(gamma.iter().copied());
        for &p in delta.masks() {
            if !s.is_subgroup(p) {
                return Err(LocalityError::GammaNotClosed(format!("{:#x} is not a subgroup", p)));
            }
            if let Some(h) = s.subgroups().iter().find(|&&h| h & p == p && !delta.contains(h)) {
                return Err(LocalityError::GammaNotClosed(format!(
                    "overgroup {} of {} missing",
                    s.describe(*h),
                    s.describe(p)
                )));
            }
            for x in 0..g.order() {
                if model.s_of(x) & p == p {
                    let q = bits(p).fold(0, |a, i| {
                        a | 1 << model.s_index(g.conj(model.s_embed[i], x)).unwrap()
                    });
                    if !delta.contains(q) {
                        return Err(LocalityError::GammaNotClosed(format!(
                            "conjugate {} of {} missing",
                            s.describe(q),
                            s.describe(p)
                        )));
                    }
                }
            }
        }
        let ids: Vec<usize> = (0..g.order()).filter(|&x| delta.contains(model.s_of(x))).collect();
        let n = ids.len();
        let lid: HashMap<usize, u32> = ids.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        let mut conj = vec![UNDEF; n * m];
        for (f, &x) in ids.iter().enumerate() {
            for i in 0..m {
                if let Some(j) = model.s_index(g.conj(model.s_embed[i], x)) {
                    conj[f * m + i] = j as u8;
                }
            }
        }
        let threading = Threading::new(m, conj, delta.masks().iter().copied());
        let mut prod = vec![NONE; n * n];
        for (a, &x) in ids.iter().enumerate() {
            for (b, &y) in ids.iter().enumerate() {
                if delta.contains(threading.s_w(&[a as u32, b as u32])) {
                    prod[a * n + b] = *lid.get(&g.mul(x, y)).ok_or_else(|| {
                        PartialGroupError::Inconsistent("product leaves L".into())
                    })?;
                }
            }
        }
        let inv = ids.iter().map(|&x| lid[&g.inv(x)]).collect();
        let labels = ids.iter().map(|&x| g.element(x).to_cycles()).collect();
        let pg = PartialGroup::new(labels, inv, prod, Some(threading))?;
        let s_elem = model.s_embed.iter().map(|x| lid[x]).collect();
        Locality::new(
            pg,
            s.clone(),
            s_elem,
            delta,
            Some(Realization {
                group: g.clone(),
                ids,
            }),
        )
    }

    pub fn pg(&self) -> &PartialGroup {
        &self.pg
    }

    pub fn len(&self) -> usize {
        self.pg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pg.is_empty()
    }

    pub fn prime(&self) -> u32 {
        self.s.prime()
    }

    pub fn sylow(&self) -> &Arc<PGroup> {
        &self.s
    }

    pub fn s_elem(&self) -> &[u32] {
        &self.s_elem
    }

    pub fn delta(&self) -> &ObjectSet {
        &self.delta
    }

    pub fn realization(&self) -> Option<&Realization> {
        self.realization.as_ref()
    }

    /// The element id of a group element, through the realization.
    pub fn id_of_group_element(&self, g: usize) -> Option<u32> {
        let ids = &self.realization.as_ref()?.ids;
        ids.binary_search(&g).ok().map(|i| i as u32)
    }

    fn threading(&self) -> &Threading {
        self.pg.threading().expect("locality threads through objects")
    }

    /// Index in `S` of the element `f`, if `f ∈ S`.
    pub fn s_index(&self, f: u32) -> Option<usize> {
        match self.elem_s[f as usize] {
            UNDEF => None,
            i => Some(i as usize),
        }
    }

    pub fn s_of(&self, f: u32) -> Mask {
        self.threading().s_w(&[f])
    }

    pub fn s_w(&self, word: &[u32]) -> Mask {
        self.threading().s_w(word)
    }

    pub fn conj_s(&self, f: u32, i: usize) -> Option<usize> {
        self.threading().s_conj(f, i)
    }

    /// `P^f` when `P ≤ S_f`.
    pub fn conj_mask(&self, p: Mask, f: u32) -> Option<Mask> {
        bits(p).try_fold(0, |a, i| self.conj_s(f, i).map(|j| a | 1 << j))
    }

    pub fn ids_of(&self, m: Mask) -> Vec<u32> {
        bits(m).map(|i| self.s_elem[i]).collect()
    }

    pub fn set_of_mask(&self, m: Mask) -> FixedBitSet {
        self.pg.set_of(self.ids_of(m))
    }

    /// `H ∩ S` as a mask.
    pub fn mask_of_set(&self, h: &FixedBitSet) -> Mask {
        h.ones()
            .filter_map(|f| self.s_index(f as u32))
            .fold(0, |a, i| a | 1 << i)
    }

    /// `{f : P ≤ S_f, P^f = P}`.
    pub fn normalizer_ids(&self, p: Mask) -> Vec<u32> {
        (0..self.len() as u32)
            .filter(|&f| self.conj_mask(p, f) == Some(p))
            .collect()
    }

    /// `N_L(P)` as a group; `P` must be an object.
    pub fn normalizer_subgroup(&self, p: Mask) -> Result<NormalizerGroup, LocalityError> {
        if !self.delta.contains(p) {
            return Err(LocalityError::ObjectNotInDelta(self.s.describe(p)));
        }
        let ids = self.normalizer_ids(p);
        let pos: HashMap<u32, usize> = ids.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut table = vec![vec![0usize; ids.len()]; ids.len()];
        for (a, &f) in ids.iter().enumerate() {
            for (b, &g) in ids.iter().enumerate() {
                let h = self.pg.pair(f, g).ok_or_else(|| {
                    PartialGroupError::NotInDomain(vec![f, g])
                })?;
                table[a][b] = *pos.get(&h).ok_or_else(|| {
                    PartialGroupError::Inconsistent(format!(
                        "N_L({}) is not closed",
                        self.s.describe(p)
                    ))
                })?;
            }
        }
        let (group, map) = PermGroup::regular(&table)?;
        let mut by_index = vec![0u32; ids.len()];
        for (a, &gi) in map.iter().enumerate() {
            by_index[gi] = ids[a];
        }
        Ok(NormalizerGroup {
            group,
            ids: by_index,
        })
    }

    /// `C_L(R) = {f : R ≤ S_f, r^f = r for r ∈ R}`.
    pub fn centralizer_partial(&self, r: Mask) -> FixedBitSet {
        let ids = (0..self.len() as u32)
            .filter(|&f| bits(r).all(|i| self.conj_s(f, i) == Some(i)));
        self.pg.set_of(ids)
    }

    /// `c_f: S_f → S`.
    pub fn conj_map(&self, f: u32) -> Mor {
        self.threading().conj_row(f).into()
    }

    /// `F_S(L)`.
    pub fn fusion_system(&self) -> &FusionSystem {
        self.fusion.get_or_init(|| {
            let seeds: HashSet<Mor> = (0..self.len() as u32).map(|f| self.conj_map(f)).collect();
            FusionSystem::generate(self.s.clone(), self.s.full(), seeds)
                .expect("conjugation maps are injective homomorphisms")
        })
    }

    /// `F_{H∩S}(H)`, generated by `c_h: S_h ∩ H → H ∩ S`.
    pub fn fusion_of_partial_subgroup(&self, h: &FixedBitSet) -> Result<FusionSystem, FusionError> {
        let t = self.mask_of_set(h);
        let seeds: HashSet<Mor> = h
            .ones()
            .map(|f| {
                self.conj_map(f as u32)
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| {
                        if t >> i & 1 == 1 && j != UNDEF && t >> j & 1 == 1 {
                            j
                        } else {
                            UNDEF
                        }
                    })
                    .collect()
            })
            .collect();
        FusionSystem::generate(self.s.clone(), t, seeds)
    }

    /// The locality axioms, plus the partial-group axioms on short words.
    pub fn check_axioms(&self, max_len: usize) -> Report {
        let mut report = self.pg.check_axioms(max_len);
        report.witness("loc.L1-sylow", self.l1_witness());
        report.witness("loc.L2-domain", self.l2_witness());
        report.witness("loc.L3-overgroups", self.l3_witness());
        report
    }

    pub fn check_axioms_default(&self) -> Report {
        self.check_axioms(default_word_bound(self.len()))
    }

    fn l1_witness(&self) -> Option<String> {
        let s = &self.s;
        for a in 0..s.order() {
            for b in 0..s.order() {
                let want = self.s_elem[s.mul(a, b)];
                if self.pg.pair(self.s_elem[a], self.s_elem[b]) != Some(want) {
                    return Some(format!("S not a subgroup at ({}, {})", s.label(a), s.label(b)));
                }
            }
        }
        let n = self.normalizer_ids(s.full());
        let part = p_part(n.len(), s.prime());
        (part != s.order()).then(|| {
            format!(
                "|N_L(S)| = {} has p-part {} > |S| = {}; S is not maximal",
                n.len(),
                part,
                s.order()
            )
        })
    }

    fn l2_witness(&self) -> Option<String> {
        let n = self.len() as u32;
        let t = self.threading();
        for f in 0..n {
            if !self.delta.contains(t.s_w(&[f])) {
                return Some(format!("S_{} is not an object", self.pg.label(f)));
            }
            for g in 0..n {
                let via = self.delta.contains(t.s_w(&[f, g]));
                if via != self.pg.pair(f, g).is_some() {
                    return Some(format!(
                        "{}: pair table says {}, objects say {}",
                        self.pg.show(&[f, g]),
                        self.pg.pair(f, g).is_some(),
                        via
                    ));
                }
            }
        }
        // Conjugation data must agree with products.
        for f in 0..n {
            let fi = self.pg.inv(f);
            for i in 0..self.s.order() {
                let x = self.s_elem[i];
                let via = self
                    .pg
                    .pair(fi, x)
                    .and_then(|y| self.pg.pair(y, f))
                    .filter(|_| self.pg.in_domain(&[fi, x, f]))
                    .and_then(|z| self.s_index(z));
                if via != t.s_conj(f, i) {
                    return Some(format!(
                        "{}^{} disagrees with the product {}",
                        self.s.label(i),
                        self.pg.label(f),
                        self.pg.show(&[fi, x, f])
                    ));
                }
            }
        }
        None
    }

    fn l3_witness(&self) -> Option<String> {
        for f in 0..self.len() as u32 {
            let sf = self.s_of(f);
            for &p in self.delta.masks() {
                if p & sf != p {
                    continue;
                }
                let q0 = self.conj_mask(p, f).expect("P ≤ S_f");
                if let Some(&q) = self
                    .s
                    .subgroups()
                    .iter()
                    .find(|&&q| q & q0 == q0 && !self.delta.contains(q))
                {
                    return Some(format!(
                        "P = {}, g = {}: overgroup {} of P^g is not an object",
                        self.s.describe(p),
                        self.pg.label(f),
                        self.s.describe(q)
                    ));
                }
            }
        }
        None
    }

    /// The same locality with `Δ` restricted to `sub`.
    pub fn restrict(&self, sub: &[Mask]) -> Result<Locality, LocalityError> {
        let sub = ObjectSet::new(sub.iter().copied());
        if sub.is_empty() {
            return Err(LocalityError::EmptyObjectSet);
        }
        if let Some(&p) = sub.masks().iter().find(|&&p| !self.delta.contains(p)) {
            return Err(LocalityError::NotASubObjectSet(self.s.describe(p)));
        }
        for &p in sub.masks() {
            if let Some(&q) = self.s.subgroups().iter().find(|&&q| q & p == p && !sub.contains(q)) {
                return Err(LocalityError::GammaNotClosed(format!(
                    "overgroup {} missing",
                    self.s.describe(q)
                )));
            }
            for f in 0..self.len() as u32 {
                if let Some(q) = self.conj_mask(p, f) {
                    if !sub.contains(q) {
                        return Err(LocalityError::GammaNotClosed(format!(
                            "conjugate {} missing",
                            self.s.describe(q)
                        )));
                    }
                }
            }
        }
        let t = self.threading();
        let keep: Vec<u32> = (0..self.len() as u32)
            .filter(|&f| sub.contains(t.s_w(&[f])))
            .collect();
        let n = keep.len();
        let m = self.s.order();
        let new_id: HashMap<u32, u32> = keep.iter().enumerate().map(|(i, &f)| (f, i as u32)).collect();
        let mut conj = Vec::with_capacity(n * m);
        for &f in &keep {
            conj.extend_from_slice(t.conj_row(f));
        }
        let threading = Threading::new(m, conj, sub.masks().iter().copied());
        let mut prod = vec![NONE; n * n];
        for (a, &f) in keep.iter().enumerate() {
            for (b, &g) in keep.iter().enumerate() {
                if sub.contains(t.s_w(&[f, g])) {
                    let h = self.pg.pair(f, g).ok_or_else(|| {
                        PartialGroupError::Inconsistent("restricted product undefined".into())
                    })?;
                    prod[a * n + b] = new_id[&h];
                }
            }
        }
        let inv = keep.iter().map(|&f| new_id[&self.pg.inv(f)]).collect();
        let labels = keep.iter().map(|&f| self.pg.label(f).to_string()).collect();
        let pg = PartialGroup::new(labels, inv, prod, Some(threading))?;
        let s_elem = self.s_elem.iter().map(|f| new_id[f]).collect();
        let realization = self.realization.as_ref().map(|r| Realization {
            group: r.group.clone(),
            ids: keep.iter().map(|&f| r.ids[f as usize]).collect(),
        });
        Locality::new(pg, self.s.clone(), s_elem, sub, realization)
    }

    /// `None` when the locality is proper; otherwise the reason.
    pub fn proper_witness(&self) -> Option<String> {
        let f = self.fusion_system();
        let classes = match f.subgroup_classes() {
            Ok(c) => c,
            Err(e) => return Some(e.to_string()),
        };
        if let Some(&p) = classes.centric_radical.iter().find(|&&p| !self.delta.contains(p)) {
            return Some(format!("centric radical {} is not an object", self.s.describe(p)));
        }
        if let Some(&p) = self.delta.masks().iter().find(|p| !classes.subcentric.contains(p)) {
            return Some(format!("object {} is not subcentric", self.s.describe(p)));
        }
        for &p in self.delta.masks() {
            match self.normalizer_subgroup(p) {
                Ok(n) if n.group.is_characteristic_p(self.prime()) => {}
                Ok(n) => {
                    return Some(format!(
                        "N_L({}) of order {} is not of characteristic {}",
                        self.s.describe(p),
                        n.group.order(),
                        self.prime()
                    ))
                }
                Err(e) => return Some(e.to_string()),
            }
        }
        None
    }

    pub fn is_proper(&self) -> bool {
        self.proper_witness().is_none()
    }

    /// A word `(n₁,…,n_k) ∈ D` with `Π = f`, `S_w = S_f` and each `nᵢ`
    /// normalizing an object `Qᵢ`, by breadth-first search.
    pub fn alperin_decompose(&self, f: u32, bound: usize) -> Result<Vec<(Mask, u32)>, LocalityError> {
        let target = (f, self.s_of(f));
        // Letters: (Q, n) with n ∈ N_L(Q).
        let mut letters: Vec<(Mask, u32)> = Vec::new();
        let mut seen_n = HashSet::new();
        // Larger objects first, so that S-letters come out as (S, f).
        for &q in self.delta.masks().iter().rev() {
            for n in self.normalizer_ids(q) {
                if seen_n.insert((q, n)) {
                    letters.push((q, n));
                }
            }
        }
        let start = (0u32, self.s.full());
        let mut prev: HashMap<(u32, Mask), ((u32, Mask), (Mask, u32))> = HashMap::new();
        let mut queue = VecDeque::from([(start, 0usize)]);
        let mut visited = HashSet::from([start]);
        if target == start {
            return Ok(vec![(self.s.full(), 0)]);
        }
        while let Some(((g, x), depth)) = queue.pop_front() {
            if (g, x) == target {
                let mut word = Vec::new();
                let mut cur = (g, x);
                while cur != start {
                    let (p, letter) = prev[&cur];
                    word.push(letter);
                    cur = p;
                }
                word.reverse();
                return Ok(word);
            }
            if depth == bound {
                continue;
            }
            let y = self.conj_mask(x, g).expect("S_w maps into S");
            for &(q, n) in &letters {
                if q & y != q {
                    continue;
                }
                let Some(h) = self.pg.pair(g, n) else { continue };
                let sn = self.s_of(n);
                let x2 = bits(x)
                    .filter(|&i| sn >> self.conj_s(g, i).unwrap() & 1 == 1)
                    .fold(0, |a, i| a | 1 << i);
                if !self.delta.contains(x2) {
                    continue;
                }
                let state = (h, x2);
                if visited.insert(state) {
                    prev.insert(state, ((g, x), (q, n)));
                    queue.push_back((state, depth + 1));
                }
            }
        }
        Err(LocalityError::DecompositionNotFound { element: f, bound })
    }

    /// Exhaustive check of the basic properties of localities on words of
    /// length at most `max_len`.
    pub fn check_properties(&self, max_len: usize) -> Report {
        let mut r = Report::new();
        r.witness("lp.a-normalizers-are-groups", self.prop_a());
        r.witness("lp.b-conjugation-isomorphisms", self.prop_b());
        r.witness("lp.c-composed-conjugation", self.prop_c(max_len));
        r.witness("lp.d-s_f-objects", self.prop_d());
        r.witness("lp.e-conjugation-bijective", self.prop_e());
        r.witness("lp.f-s_w-and-domain", self.prop_f(max_len));
        r.witness("lp.g-sylow-normalizers", self.prop_g());
        r
    }

    fn prop_a(&self) -> Option<String> {
        for &p in self.delta.masks() {
            let ids = match self.normalizer_subgroup(p) {
                Ok(n) => n.ids,
                Err(e) => return Some(e.to_string()),
            };
            if ids.len().pow(3) <= 1 << 18 {
                for &a in &ids {
                    for &b in &ids {
                        for &c in &ids {
                            if !self.pg.in_domain(&[a, b, c]) {
                                return Some(format!(
                                    "{} in W(N_L({})) is not in D",
                                    self.pg.show(&[a, b, c]),
                                    self.s.describe(p)
                                ));
                            }
                        }
                    }
                }
            }
        }
        None
    }

    fn prop_b(&self) -> Option<String> {
        for &p in self.delta.masks() {
            let np = self.normalizer_ids(p);
            for g in 0..self.len() as u32 {
                let Some(q) = self.conj_mask(p, g) else { continue };
                if !self.delta.contains(q) {
                    return Some(format!("{}^{} is not an object", self.s.describe(p), self.pg.label(g)));
                }
                let nq: HashSet<u32> = self.normalizer_ids(q).into_iter().collect();
                let mut image = HashSet::new();
                for &x in &np {
                    match self.pg.conj_or_none(x, g) {
                        Some(y) if nq.contains(&y) => {
                            image.insert(y);
                        }
                        _ => {
                            return Some(format!(
                                "c_{} does not map {} into N_L(P^g)",
                                self.pg.label(g),
                                self.pg.label(x)
                            ))
                        }
                    }
                }
                if image.len() != nq.len() {
                    return Some(format!("c_{} is not onto N_L(P^g)", self.pg.label(g)));
                }
                for &x in &np {
                    for &y in &np {
                        let xy = self.pg.pair(x, y).unwrap();
                        let lhs = self.pg.conj_or_none(xy, g);
                        let rhs = self
                            .pg
                            .pair(self.pg.conj_or_none(x, g).unwrap(), self.pg.conj_or_none(y, g).unwrap());
                        if lhs != rhs {
                            return Some(format!("c_{} is not multiplicative", self.pg.label(g)));
                        }
                    }
                }
            }
        }
        None
    }

    fn prop_c(&self, max_len: usize) -> Option<String> {
        for len in 2..=max_len {
            for w in self.pg.domain_words(len) {
                let x0 = self.s_w(&w);
                let pi = self.pg.product(&w).ok()?;
                for x in self.normalizer_ids(x0) {
                    let stepwise = w.iter().try_fold(x, |acc, &g| self.pg.conj_or_none(acc, g));
                    if stepwise != self.pg.conj_or_none(x, pi) {
                        return Some(format!(
                            "conjugating {} along {} differs from conjugating by the product",
                            self.pg.label(x),
                            self.pg.show(&w)
                        ));
                    }
                }
            }
        }
        None
    }

    fn prop_d(&self) -> Option<String> {
        for f in 0..self.len() as u32 {
            let sf = self.s_of(f);
            if !self.delta.contains(sf) {
                return Some(format!("S_{} is not an object", self.pg.label(f)));
            }
            if self.conj_mask(sf, f) != Some(self.s_of(self.pg.inv(f))) {
                return Some(format!("S_f^f ≠ S_(f⁻¹) for f = {}", self.pg.label(f)));
            }
        }
        None
    }

    fn prop_e(&self) -> Option<String> {
        for g in 0..self.len() as u32 {
            let gi = self.pg.inv(g);
            let dg = self.pg.d_of(g);
            let dgi: HashSet<u32> = self.pg.d_of(gi).into_iter().collect();
            let mut image = HashSet::new();
            for x in dg {
                let y = self.pg.conj_or_none(x, g).unwrap();
                if !dgi.contains(&y) || self.pg.conj_or_none(y, gi) != Some(x) {
                    return Some(format!("c_{} fails at {}", self.pg.label(g), self.pg.label(x)));
                }
                image.insert(y);
            }
            if image.len() != dgi.len() {
                return Some(format!("c_{} is not onto D(g⁻¹)", self.pg.label(g)));
            }
        }
        None
    }

    fn prop_f(&self, max_len: usize) -> Option<String> {
        let n = self.len() as u32;
        for f in 0..n {
            for g in 0..n {
                let w = [f, g];
                if self.delta.contains(self.s_w(&w)) != self.pg.pair(f, g).is_some() {
                    return Some(format!("S_w ∈ Δ and w ∈ D disagree at {}", self.pg.show(&w)));
                }
            }
        }
        for len in 1..=max_len {
            for w in self.pg.domain_words(len) {
                let pi = self.pg.product(&w).ok()?;
                let sw = self.s_w(&w);
                if sw & !self.s_of(pi) != 0 {
                    return Some(format!("S_w ⊄ S_Π(w) for {}", self.pg.show(&w)));
                }
            }
        }
        None
    }

    fn prop_g(&self) -> Option<String> {
        let f = self.fusion_system();
        for &q in self.delta.masks() {
            if !f.is_fully_normalized(q) {
                continue;
            }
            let nl = self.normalizer_ids(q).len();
            let ns = self.s.normalizer(q);
            if p_part(nl, self.prime()) != ns.count_ones() as usize {
                return Some(format!("N_S({}) is not Sylow in N_L", self.s.describe(q)));
            }
            for p in f.class_of(q) {
                let nsp = self.s.normalizer(p);
                let found = (0..self.len() as u32).any(|g| {
                    self.conj_mask(p, g) == Some(q) && self.s_of(g) & nsp == nsp
                });
                if !found {
                    return Some(format!(
                        "no f with {}^f = {} and N_S(P) ≤ S_f",
                        self.s.describe(p),
                        self.s.describe(q)
                    ));
                }
            }
        }
        None
    }

    /// A copy whose object set drops `p`; a negative control for (L3).
    pub fn with_object_removed(&self, p: Mask) -> Result<Locality, LocalityError> {
        let delta = ObjectSet::new(self.delta.masks().iter().copied().filter(|&m| m != p));
        let t = self.threading();
        let conj: Vec<u8> = (0..self.len() as u32).flat_map(|f| t.conj_row(f).to_vec()).collect();
        let threading = Threading::new(self.s.order(), conj, delta.masks().iter().copied());
        let pg = PartialGroup::new(
            self.pg.labels().to_vec(),
            (0..self.len() as u32).map(|f| self.pg.inv(f)).collect(),
            self.pg.pair_table().to_vec(),
            Some(threading),
        )?;
        Locality::new(pg, self.s.clone(), self.s_elem.clone(), delta, self.realization.clone())
    }

    /// A copy with one entry of the pair table overwritten.
    pub fn with_edited_product(&self, a: u32, b: u32, c: u32) -> Locality {
        let mut out = self.clone();
        out.pg = self.pg.with_edited_product(a, b, c);
        out.fusion = OnceLock::new();
        out
    }

    /// `None` if both localities have identical element tables, objects and
    /// Sylow embedding; otherwise the first difference.
    pub fn structure_difference(&self, other: &Locality) -> Option<String> {
        if self.pg.labels() != other.pg.labels() {
            return Some("element labels differ".into());
        }
        if self.pg.pair_table() != other.pg.pair_table() {
            return Some("pair tables differ".into());
        }
        if (0..self.len() as u32).any(|f| self.pg.inv(f) != other.pg.inv(f)) {
            return Some("inversions differ".into());
        }
        if self.delta != other.delta {
            return Some("object sets differ".into());
        }
        if self.s_elem != other.s_elem {
            return Some("Sylow embeddings differ".into());
        }
        let t = (0..self.len() as u32).any(|f| self.threading().conj_row(f) != other.threading().conj_row(f));
        t.then(|| "conjugation tables differ".into())
    }

    /// Short verdict for reports.
    pub fn verdict_proper(&self) -> Verdict {
        Verdict::from_witness(self.proper_witness())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn model(g: PermGroup, p: u32) -> GroupModel {
        GroupModel::new(Arc::new(g), p).unwrap()
    }

    #[test]
    fn overgroups_of_v4_give_all_of_s4() {
        let m = model(catalog::symmetric(4), 2);
        let v4 = m.mask_of(&m.group.big_o_p(2));
        let gamma = m.fusion().f_closure(&[v4]);
        let l = m.locality(&gamma).unwrap();
        assert_eq!(l.len(), 24);
        let r = l.check_axioms(3);
        assert!(r.all_pass(), "{r}");
        // A length-3 word through objects multiplies as in S4.
        let g = &m.group;
        let real = l.realization().unwrap();
        for w in l.pg().domain_words(3).into_iter().step_by(97) {
            let pi = l.pg().product(&w).unwrap();
            let expect = g.mul(g.mul(real.ids[w[0] as usize], real.ids[w[1] as usize]), real.ids[w[2] as usize]);
            assert_eq!(real.ids[pi as usize], expect);
        }
    }

    #[test]
    fn sylow_only_gives_normalizer() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality(&[m.s.full()]).unwrap();
        assert_eq!(l.len(), 8);
        assert!(l.check_axioms(3).all_pass());
    }

    #[test]
    fn gamma_must_be_closed() {
        let m = model(catalog::symmetric(4), 2);
        let z = m.s.center_of(m.s.full());
        let err = m.locality(&[z, m.s.full()]).unwrap_err();
        assert!(matches!(err, LocalityError::GammaNotClosed(_)));
    }

    #[test]
    fn restriction_matches_direct_build() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let v4 = m.mask_of(&m.group.big_o_p(2));
        let sub = m.fusion().f_closure(&[v4]);
        let r = l.restrict(&sub).unwrap();
        assert_eq!(r.structure_difference(&m.locality(&sub).unwrap()), None);
        assert_eq!(l.restrict(l.delta().masks()).unwrap().structure_difference(&l), None);
        let top = [m.s.full()];
        assert_eq!(
            r.restrict(&top).unwrap().structure_difference(&l.restrict(&top).unwrap()),
            None
        );
        assert!(matches!(
            r.restrict(&[1]),
            Err(LocalityError::NotASubObjectSet(_)) | Err(LocalityError::GammaNotClosed(_))
        ));
    }

    #[test]
    fn normalizers_and_centralizers() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let ns = l.normalizer_subgroup(m.s.full()).unwrap();
        assert_eq!(ns.group.order(), 8);
        assert_eq!(l.centralizer_partial(1).count_ones(..), 24);
        let cs = l.centralizer_partial(m.s.full());
        assert_eq!(l.mask_of_set(&cs), m.s.center_of(m.s.full()));
        let sub = l.restrict(&[m.s.full()]).unwrap();
        assert!(matches!(sub.normalizer_subgroup(1), Err(LocalityError::ObjectNotInDelta(_))));
    }

    #[test]
    fn fusion_of_locality_is_group_fusion() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::Centric).unwrap();
        assert_eq!(l.fusion_system(), m.fusion());
        let trivial = l.pg().set_of([0]);
        assert_eq!(l.fusion_of_partial_subgroup(&trivial).unwrap().support(), 1);
    }

    #[test]
    fn properness() {
        let m = model(catalog::symmetric(4), 2);
        assert!(m.locality_for(&DeltaSelector::Subcentric).unwrap().is_proper());
        let m = model(catalog::c2_x_s3(), 2);
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let w = l.proper_witness().unwrap();
        assert!(w.contains("characteristic"), "{w}");
        let m = model(catalog::dihedral8(), 2);
        assert!(m.locality_for(&DeltaSelector::Subcentric).unwrap().is_proper());
    }

    #[test]
    fn alperin_words() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::Centric).unwrap();
        for f in 0..l.len() as u32 {
            let w = l.alperin_decompose(f, 6).unwrap();
            assert!(w.len() <= 3);
            let letters: Vec<u32> = w.iter().map(|&(_, n)| n).collect();
            assert_eq!(l.pg().product(&letters).unwrap(), f);
            assert_eq!(l.s_w(&letters), l.s_of(f));
            for &(q, n) in &w {
                assert_eq!(l.conj_mask(q, n), Some(q));
            }
        }
        let s1 = l.s_elem()[1];
        assert_eq!(l.alperin_decompose(s1, 6).unwrap(), vec![(m.s.full(), s1)]);
    }

    #[test]
    fn removed_overgroup_fails_l3() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let bad = l.with_object_removed(m.s.full()).unwrap();
        match bad.check_axioms(2).get("loc.L3-overgroups").unwrap() {
            Verdict::Fail(w) => assert!(w.contains("overgroup")),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn properties_hold_on_s4() {
        let m = model(catalog::symmetric(4), 2);
        for sel in [DeltaSelector::CrClosure, DeltaSelector::Subcentric] {
            let l = m.locality_for(&sel).unwrap();
            let r = l.check_properties(3);
            assert!(r.all_pass(), "{r}");
        }
    }
}
