//! Fusion systems over a small p-group `S`.
//!
//! A system lives on a support `T ≤ S` and is stored as its isomorphisms,
//! keyed by source subgroup. Every morphism `P → Q` is an isomorphism onto its
//! image followed by an inclusion, so isomorphisms carry all the data. Maps
//! are image tables over the indices of `S`, with [`UNDEF`] outside the
//! source.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use crate::error::FusionError;
use crate::group::{p_part, PermGroup};
use crate::partial::UNDEF;
use crate::perm::Perm;
use crate::pgroup::{bits, cmp_masks, sort_masks, Mask, PGroup};

pub type Mor = Box<[u8]>;

pub fn mor_source(f: &[u8]) -> Mask {
    f.iter()
        .enumerate()
        .filter(|(_, &y)| y != UNDEF)
        .fold(0, |acc, (x, _)| acc | 1 << x)
}

pub fn mor_image(f: &[u8]) -> Mask {
    f.iter().filter(|&&y| y != UNDEF).fold(0, |acc, &y| acc | 1 << y)
}

/// Image of the subgroup `p ≤ source(f)`.
pub fn mor_image_of(f: &[u8], p: Mask) -> Mask {
    bits(p).fold(0, |acc, x| acc | 1 << f[x])
}

/// `f` followed by `g`; defined where `f` lands in the source of `g`.
pub fn compose(f: &[u8], g: &[u8]) -> Mor {
    f.iter()
        .map(|&y| if y == UNDEF { UNDEF } else { g[y as usize] })
        .collect()
}

pub fn inverse(f: &[u8]) -> Mor {
    let mut out = vec![UNDEF; f.len()];
    for (x, &y) in f.iter().enumerate() {
        if y != UNDEF {
            out[y as usize] = x as u8;
        }
    }
    out.into_boxed_slice()
}

pub fn restrict(f: &[u8], p: Mask) -> Mor {
    f.iter()
        .enumerate()
        .map(|(x, &y)| if p >> x & 1 == 1 { y } else { UNDEF })
        .collect()
}

pub fn identity_mor(m: usize, p: Mask) -> Mor {
    (0..m)
        .map(|x| if p >> x & 1 == 1 { x as u8 } else { UNDEF })
        .collect()
}

/// `c_g` on `p`, for `g ∈ S`.
pub fn conj_mor(s: &PGroup, p: Mask, g: usize) -> Mor {
    (0..s.order())
        .map(|x| if p >> x & 1 == 1 { s.conj(x, g) as u8 } else { UNDEF })
        .collect()
}

pub fn show_mor(s: &PGroup, f: &[u8]) -> String {
    let parts: Vec<String> = f
        .iter()
        .enumerate()
        .filter(|(_, &y)| y != UNDEF)
        .map(|(x, &y)| format!("{}->{}", s.label(x), s.label(y as usize)))
        .collect();
    format!("[{}]", parts.join(", "))
}

/// `None` if `f` is an injective homomorphism on a subgroup of `S`.
fn seed_witness(s: &PGroup, f: &[u8]) -> Option<String> {
    if f.len() != s.order() {
        return Some(format!("table has {} entries", f.len()));
    }
    let src = mor_source(f);
    if !s.is_subgroup(src) {
        return Some(format!("source {} is not a subgroup", s.describe(src)));
    }
    if f.iter().any(|&y| y != UNDEF && y as usize >= s.order()) {
        return Some("image outside S".into());
    }
    if mor_image(f).count_ones() != src.count_ones() {
        return Some(format!("{} is not injective", show_mor(s, f)));
    }
    for a in bits(src) {
        for b in bits(src) {
            if f[s.mul(a, b)] as usize != s.mul(f[a] as usize, f[b] as usize) {
                return Some(format!("{} is not a homomorphism", show_mor(s, f)));
            }
        }
    }
    None
}

/// Subgroup classes of a saturated fusion system.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubgroupClasses {
    pub centric: Vec<Mask>,
    pub radical: Vec<Mask>,
    pub centric_radical: Vec<Mask>,
    pub quasicentric: Vec<Mask>,
    pub subcentric: Vec<Mask>,
}

#[derive(Clone, Debug)]
pub struct FusionSystem {
    s: Arc<PGroup>,
    support: Mask,
    isos: BTreeMap<Mask, BTreeSet<Mor>>,
    classes: OnceLock<Result<SubgroupClasses, FusionError>>,
}

impl PartialEq for FusionSystem {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support && self.isos == other.isos
    }
}

impl Eq for FusionSystem {}

impl FusionSystem {
    /// Least system over `support` containing the inner fusion of `support`
    /// and the `seeds`, closed under restriction, composition and inverses.
    pub fn generate(
        s: Arc<PGroup>,
        support: Mask,
        seeds: impl IntoIterator<Item = Mor>,
    ) -> Result<Self, FusionError> {
        if !s.is_subgroup(support) {
            return Err(FusionError::NonInjectiveSeed(format!(
                "support {} is not a subgroup",
                s.describe(support)
            )));
        }
        let mut gen = Closure::new(&s);
        for f in seeds {
            if let Some(w) = seed_witness(&s, &f) {
                return Err(FusionError::NonInjectiveSeed(w));
            }
            if mor_source(&f) & !support != 0 || mor_image(&f) & !support != 0 {
                return Err(FusionError::NonInjectiveSeed(format!(
                    "{} leaves the support",
                    show_mor(&s, &f)
                )));
            }
            gen.add(f);
        }
        for t in bits(support) {
            gen.add(conj_mor(&s, support, t));
        }
        gen.run();
        let isos = gen.finish();
        Ok(FusionSystem {
            s,
            support,
            isos,
            classes: OnceLock::new(),
        })
    }

    /// Inner fusion `F_T(T)`.
    pub fn inner(s: Arc<PGroup>, support: Mask) -> Self {
        Self::generate(s, support, []).expect("inner fusion")
    }

    /// `F_{S∩H}(H)` for a group `H` given by elements of an ambient group in
    /// which `S` sits via `s_embed`.
    pub fn of_group_elements(
        s: Arc<PGroup>,
        s_embed: &[usize],
        g: &PermGroup,
        elements: impl IntoIterator<Item = usize>,
        support: Mask,
    ) -> Result<Self, FusionError> {
        let pos: HashMap<usize, usize> = s_embed.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut seeds = BTreeSet::new();
        for h in elements {
            let f: Mor = (0..s.order())
                .map(|x| {
                    if support >> x & 1 == 0 {
                        return UNDEF;
                    }
                    match pos.get(&g.conj(s_embed[x], h)) {
                        Some(&y) if support >> y & 1 == 1 => y as u8,
                        _ => UNDEF,
                    }
                })
                .collect();
            seeds.insert(f);
        }
        Self::generate(s, support, seeds)
    }

    pub fn sylow(&self) -> &Arc<PGroup> {
        &self.s
    }

    pub fn support(&self) -> Mask {
        self.support
    }

    pub fn num_isos(&self) -> usize {
        self.isos.values().map(BTreeSet::len).sum()
    }

    pub fn isos(&self) -> impl Iterator<Item = &Mor> {
        self.isos.values().flatten()
    }

    pub fn isos_from(&self, p: Mask) -> impl Iterator<Item = &Mor> {
        self.isos.get(&p).into_iter().flatten()
    }

    pub fn contains(&self, f: &[u8]) -> bool {
        self.isos
            .get(&mor_source(f))
            .is_some_and(|set| set.contains(f))
    }

    pub fn is_subsystem_of(&self, other: &FusionSystem) -> bool {
        self.support & !other.support == 0 && self.isos().all(|f| other.contains(f))
    }

    /// All subgroups of the support.
    pub fn objects(&self) -> Vec<Mask> {
        self.s.subgroups_of(self.support).collect()
    }

    pub fn aut(&self, p: Mask) -> Vec<&Mor> {
        self.isos_from(p).filter(|f| mor_image(f) == p).collect()
    }

    /// `Aut_T(P)`, induced by `N_T(P)`.
    pub fn aut_support(&self, p: Mask) -> BTreeSet<Mor> {
        bits(self.s.normalizer_in(self.support, p))
            .map(|g| conj_mor(&self.s, p, g))
            .collect()
    }

    /// The class `P^F`, sorted.
    pub fn class_of(&self, p: Mask) -> Vec<Mask> {
        let mut v: Vec<Mask> = self.isos_from(p).map(|f| mor_image(f)).collect();
        sort_masks(&mut v);
        v.dedup();
        v
    }

    /// Classes of subgroups of the support, ordered by their least members.
    pub fn classes(&self) -> Vec<Vec<Mask>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in self.objects() {
            if seen.contains(&p) {
                continue;
            }
            let class = self.class_of(p);
            seen.extend(class.iter().copied());
            out.push(class);
        }
        out
    }

    pub fn is_fully_normalized(&self, p: Mask) -> bool {
        let n = |q: Mask| self.s.normalizer_in(self.support, q).count_ones();
        let own = n(p);
        self.class_of(p).into_iter().all(|q| n(q) <= own)
    }

    pub fn is_fully_centralized(&self, p: Mask) -> bool {
        let c = |q: Mask| self.s.centralizer_in(self.support, q).count_ones();
        let own = c(p);
        self.class_of(p).into_iter().all(|q| c(q) <= own)
    }

    /// The fully normalized member of `P^F` with the largest normalizer,
    /// ties broken by subgroup order.
    pub fn fully_normalized_rep(&self, p: Mask) -> Mask {
        self.class_of(p)
            .into_iter()
            .max_by(|&a, &b| {
                let na = self.s.normalizer_in(self.support, a).count_ones();
                let nb = self.s.normalizer_in(self.support, b).count_ones();
                na.cmp(&nb).then_with(|| cmp_masks(b, a))
            })
            .expect("class is nonempty")
    }

    /// `None` when the system is saturated; otherwise a witness.
    pub fn saturation_witness(&self) -> Option<String> {
        let s = &self.s;
        for p in self.objects() {
            if !self.is_fully_normalized(p) {
                continue;
            }
            let aut_f = self.aut(p).len();
            let aut_t = self.aut_support(p);
            if aut_t.len() != p_part(aut_f, s.prime()) {
                return Some(format!(
                    "{} is fully normalized but not fully automized: |Aut_T| = {}, |Aut_F| = {}",
                    s.describe(p),
                    aut_t.len(),
                    aut_f
                ));
            }
            for q in self.class_of(p) {
                for phi in self.isos_from(q).filter(|f| mor_image(f) == p) {
                    let phi_inv = inverse(phi);
                    let n_phi = bits(s.normalizer_in(self.support, q))
                        .filter(|&g| {
                            let c = compose(&compose(&phi_inv, &conj_mor(s, q, g)), phi);
                            aut_t.contains(&c)
                        })
                        .fold(0, |acc, g| acc | 1 << g);
                    let extends = self
                        .isos_from(n_phi)
                        .any(|f| restrict(f, q)[..] == phi[..]);
                    if !extends {
                        return Some(format!(
                            "{} does not extend to N_phi = {} (target {} is fully normalized)",
                            show_mor(s, phi),
                            s.describe(n_phi),
                            s.describe(p)
                        ));
                    }
                }
            }
        }
        None
    }

    pub fn is_saturated(&self) -> bool {
        self.saturation_witness().is_none()
    }

    fn require_saturated(&self) -> Result<(), FusionError> {
        match self.saturation_witness() {
            None => Ok(()),
            Some(w) => Err(FusionError::NotSaturated(w)),
        }
    }

    pub fn is_centric(&self, p: Mask) -> bool {
        self.class_of(p)
            .into_iter()
            .all(|q| self.s.centralizer_in(self.support, q) & !q == 0)
    }

    /// `Aut_F(P)` as permutations of the elements of `P`, with the subgroup
    /// `Inn(P)`.
    pub fn aut_group(&self, p: Mask) -> (PermGroup, Vec<usize>) {
        let local: Vec<usize> = bits(p).collect();
        let pos = |x: usize| local.iter().position(|&y| y == x).unwrap();
        let to_perm = |f: &[u8]| {
            let images: Vec<usize> = local.iter().map(|&x| pos(f[x] as usize)).collect();
            Perm::from_images(&images).expect("automorphism")
        };
        let elements: Vec<Perm> = self.aut(p).into_iter().map(|f| to_perm(f)).collect();
        let g = PermGroup::from_elements(local.len(), elements);
        let mut inn: Vec<usize> = bits(p)
            .map(|x| g.index_of(&to_perm(&conj_mor(&self.s, p, x))).unwrap())
            .collect();
        inn.sort();
        inn.dedup();
        (g, inn)
    }

    /// `O_p(Aut_F(P)) = Inn(P)`.
    pub fn is_radical(&self, p: Mask) -> bool {
        let (g, inn) = self.aut_group(p);
        g.big_o_p(self.s.prime()).element_vec() == inn
    }

    /// `C_F(Q)`: the system over `C_T(Q)` generated by the morphisms that
    /// extend to morphisms fixing `Q` pointwise.
    pub fn centralizer_system(&self, q: Mask) -> FusionSystem {
        let c = self.s.centralizer_in(self.support, q);
        let seeds: BTreeSet<Mor> = self
            .isos()
            .filter(|f| {
                let src = mor_source(f);
                src & q == q && bits(q).all(|x| f[x] as usize == x)
            })
            .map(|f| restrict(f, mor_source(f) & c))
            .filter(|f| self.s.is_subgroup(mor_source(f)))
            .collect();
        Self::generate(self.s.clone(), c, seeds).expect("restrictions of morphisms")
    }

    /// `N_F(P)` over `N_T(P)`.
    pub fn normalizer_system(&self, p: Mask) -> Result<FusionSystem, FusionError> {
        if !self.is_fully_normalized(p) {
            return Err(FusionError::NotFullyNormalized(self.s.describe(p)));
        }
        Ok(self.normalizer_system_unchecked(p))
    }

    fn normalizer_system_unchecked(&self, p: Mask) -> FusionSystem {
        let n = self.s.normalizer_in(self.support, p);
        let seeds: Vec<Mor> = self
            .isos()
            .filter(|f| {
                let src = mor_source(f);
                src & p == p && src & !n == 0 && mor_image_of(f, p) == p && mor_image(f) & !n == 0
            })
            .cloned()
            .collect();
        Self::generate(self.s.clone(), n, seeds).expect("restrictions of morphisms")
    }

    pub fn is_strongly_closed(&self, t: Mask) -> bool {
        self.strong_closure_witness(t).is_none()
    }

    fn strong_closure_witness(&self, t: Mask) -> Option<String> {
        self.isos()
            .find(|f| mor_source(f) & !t == 0 && mor_image(f) & !t != 0)
            .map(|f| format!("{} maps out of {}", show_mor(&self.s, f), self.s.describe(t)))
    }

    /// Closed under `F`-conjugates and overgroups in the support.
    pub fn is_f_closed(&self, delta: &[Mask]) -> bool {
        let set: HashSet<Mask> = delta.iter().copied().collect();
        delta.iter().all(|&p| {
            self.class_of(p).iter().all(|q| set.contains(q))
                && self
                    .s
                    .subgroups_of(self.support)
                    .filter(|&h| h & p == p)
                    .all(|h| set.contains(&h))
        })
    }

    /// Whether `u` is normal: every morphism extends to one on the product
    /// with `u` that leaves `u` invariant.
    pub fn is_normal_subgroup(&self, u: Mask) -> bool {
        if !self.s.is_normal_in(u, self.support) || !self.is_strongly_closed(u) {
            return false;
        }
        self.isos().all(|f| {
            let src = mor_source(f);
            let big = self.s.join(src, u);
            self.isos_from(big)
                .any(|g| mor_image_of(g, u) == u && restrict(g, src)[..] == f[..])
        })
    }

    /// `O_p(F)`: the largest normal subgroup.
    pub fn o_p(&self) -> Mask {
        let normal: Vec<Mask> = self
            .objects()
            .into_iter()
            .filter(|&u| self.is_normal_subgroup(u))
            .collect();
        let top = normal.iter().fold(1, |acc, &u| self.s.join(acc, u));
        debug_assert!(normal.contains(&top));
        top
    }

    /// Subgroup classes; fails when the system is not saturated.
    pub fn subgroup_classes(&self) -> Result<SubgroupClasses, FusionError> {
        self.classes.get_or_init(|| self.compute_classes()).clone()
    }

    fn compute_classes(&self) -> Result<SubgroupClasses, FusionError> {
        self.require_saturated()?;
        let s = &self.s;
        let mut out = SubgroupClasses::default();
        for class in self.classes() {
            let p = class[0];
            let centric = self.is_centric(p);
            let radical = self.is_radical(p);
            let quasicentric = class
                .iter()
                .filter(|&&q| self.is_fully_centralized(q))
                .all(|&q| {
                    let c = s.centralizer_in(self.support, q);
                    self.centralizer_system(q) == FusionSystem::inner(s.clone(), c)
                });
            let subcentric = class
                .iter()
                .filter(|&&q| self.is_fully_normalized(q))
                .all(|&q| {
                    let n = self.normalizer_system_unchecked(q);
                    let u = n.o_p();
                    s.centralizer_in(n.support(), u) & !u == 0
                });
            for &q in &class {
                if centric {
                    out.centric.push(q);
                }
                if radical {
                    out.radical.push(q);
                }
                if centric && radical {
                    out.centric_radical.push(q);
                }
                if quasicentric {
                    out.quasicentric.push(q);
                }
                if subcentric {
                    out.subcentric.push(q);
                }
            }
        }
        for v in [
            &mut out.centric,
            &mut out.radical,
            &mut out.centric_radical,
            &mut out.quasicentric,
            &mut out.subcentric,
        ] {
            sort_masks(v);
        }
        Ok(out)
    }

    /// Smallest `F`-closed set containing `seed`: conjugates and overgroups.
    pub fn f_closure(&self, seed: &[Mask]) -> Vec<Mask> {
        let mut set: HashSet<Mask> = HashSet::new();
        for &p in seed {
            for q in self.class_of(p) {
                for h in self.s.subgroups_of(self.support) {
                    if h & q == q {
                        set.insert(h);
                    }
                }
            }
        }
        let mut v: Vec<Mask> = set.into_iter().collect();
        sort_masks(&mut v);
        v
    }

    /// `F|_Δ`: the subsystem generated by the morphisms between members of
    /// an `F`-closed set.
    pub fn restricted_to(&self, delta: &[Mask]) -> FusionSystem {
        let keep: HashSet<Mask> = delta.iter().copied().collect();
        let seeds: Vec<Mor> = self
            .isos()
            .filter(|f| keep.contains(&mor_source(f)))
            .cloned()
            .collect();
        Self::generate(self.s.clone(), self.support, seeds).expect("morphisms of the system")
    }

    /// `None` when `e` is a normal subsystem; otherwise the first failing
    /// condition with a witness.
    pub fn normal_subsystem_witness(&self, e: &FusionSystem) -> Option<String> {
        let s = &self.s;
        let t = e.support;
        if !e.is_subsystem_of(self) {
            return Some("not a subsystem".into());
        }
        if let Some(w) = self.strong_closure_witness(t) {
            return Some(format!("support not strongly closed: {w}"));
        }
        if let Some(w) = e.saturation_witness() {
            return Some(format!("subsystem not saturated: {w}"));
        }
        let aut_t: Vec<&Mor> = self.aut(t);
        // Invariance.
        for alpha in &aut_t {
            let alpha_inv = inverse(alpha);
            for phi in e.isos() {
                let src = mor_image_of(alpha, mor_source(phi));
                let conj = compose(&compose(&restrict(&alpha_inv, src), phi), alpha);
                if !e.contains(&conj) {
                    return Some(format!(
                        "invariance: {} conjugated by {} is not in E",
                        show_mor(s, phi),
                        show_mor(s, alpha)
                    ));
                }
            }
        }
        // Frattini.
        for phi in self.isos().filter(|f| mor_source(f) & !t == 0) {
            let ok = aut_t.iter().any(|alpha| {
                let alpha_inv = inverse(alpha);
                e.contains(&compose(phi, &alpha_inv))
            });
            if !ok {
                return Some(format!("Frattini: {} does not factor", show_mor(s, phi)));
            }
        }
        // Extension.
        let c = s.centralizer(t);
        let tc = s.join(t, c);
        let z = s.center_of(t);
        for alpha in e.aut(t) {
            let ok = self.isos_from(tc).any(|bar| {
                mor_image(bar) == tc
                    && restrict(bar, t)[..] == alpha[..]
                    && bits(c).all(|x| z >> s.mul(s.inv(x), bar[x] as usize) & 1 == 1)
            });
            if !ok {
                return Some(format!("extension: {} has no extension to TC_S(T)", show_mor(s, alpha)));
            }
        }
        None
    }

    pub fn is_normal_subsystem(&self, e: &FusionSystem) -> Result<bool, FusionError> {
        if let Some(w) = self.strong_closure_witness(e.support) {
            return Err(FusionError::SupportNotStronglyClosed(w));
        }
        if let Some(w) = e.saturation_witness() {
            return Err(FusionError::SubsystemNotSaturated(w));
        }
        Ok(self.normal_subsystem_witness(e).is_none())
    }

    /// Largest `X ≤ space` such that every isomorphism of `maps` extends to a
    /// morphism of `self` on `PX` acting trivially on `X`. The passing sets
    /// are closed under products, so the join of all of them passes too.
    fn largest_centralized(&self, maps: &FusionSystem, space: Mask) -> Mask {
        let s = &self.s;
        let passes = |x: Mask| {
            maps.isos().all(|f| {
                let src = mor_source(f);
                let big = s.join(src, x);
                self.isos_from(big).any(|g| {
                    restrict(g, src)[..] == f[..] && bits(x).all(|y| g[y] as usize == y)
                })
            })
        };
        let good: Vec<Mask> = s.subgroups_of(space).filter(|&x| passes(x)).collect();
        let top = good.iter().fold(1, |acc, &x| s.join(acc, x));
        debug_assert!(good.contains(&top));
        top
    }

    /// `Z(F)` of this system, relative to its own support.
    pub fn center(&self) -> Mask {
        self.largest_centralized(self, self.s.center_of(self.support))
    }

    /// `C_S(E)` for a subsystem `E` of `self`.
    pub fn cs_of_subsystem(&self, e: &FusionSystem) -> Mask {
        self.largest_centralized(e, self.s.centralizer_in(self.support, e.support))
    }
}

/// Worklist closure under inverses, restrictions and composition.
struct Closure<'a> {
    s: &'a PGroup,
    set: HashSet<Mor>,
    by_src: HashMap<Mask, Vec<Mor>>,
    by_img: HashMap<Mask, Vec<Mor>>,
    queue: Vec<Mor>,
    maximal: HashMap<Mask, Vec<Mask>>,
}

impl<'a> Closure<'a> {
    fn new(s: &'a PGroup) -> Self {
        Closure {
            s,
            set: HashSet::new(),
            by_src: HashMap::new(),
            by_img: HashMap::new(),
            queue: Vec::new(),
            maximal: HashMap::new(),
        }
    }

    fn add(&mut self, f: Mor) {
        if self.set.insert(f.clone()) {
            self.by_src.entry(mor_source(&f)).or_default().push(f.clone());
            self.by_img.entry(mor_image(&f)).or_default().push(f.clone());
            self.queue.push(f);
        }
    }

    fn maximal_subgroups(&mut self, p: Mask) -> Vec<Mask> {
        let s = self.s;
        self.maximal
            .entry(p)
            .or_insert_with(|| {
                let target = p.count_ones() / s.prime();
                s.subgroups_of(p)
                    .filter(|h| h.count_ones() == target)
                    .collect()
            })
            .clone()
    }

    fn run(&mut self) {
        while let Some(f) = self.queue.pop() {
            let src = mor_source(&f);
            let img = mor_image(&f);
            self.add(inverse(&f));
            for h in self.maximal_subgroups(src) {
                self.add(restrict(&f, h));
            }
            let after = self.by_src.get(&img).cloned().unwrap_or_default();
            for g in after {
                self.add(compose(&f, &g));
            }
            let before = self.by_img.get(&src).cloned().unwrap_or_default();
            for g in before {
                self.add(compose(&g, &f));
            }
        }
    }

    fn finish(self) -> BTreeMap<Mask, BTreeSet<Mor>> {
        let mut out: BTreeMap<Mask, BTreeSet<Mor>> = BTreeMap::new();
        for f in self.set {
            out.entry(mor_source(&f)).or_default().insert(f);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::group::Subgroup;

    struct Inst {
        g: PermGroup,
        s: Arc<PGroup>,
        embed: Vec<usize>,
        f: FusionSystem,
    }

    fn inst(g: PermGroup, p: u32) -> Inst {
        let syl = g.sylow(p);
        let (s, embed) = PGroup::from_subgroup(&g, &syl, p).unwrap();
        let s = Arc::new(s);
        let f = FusionSystem::of_group_elements(s.clone(), &embed, &g, 0..g.order(), s.full()).unwrap();
        Inst { g, s, embed, f }
    }

    fn mask_of(i: &Inst, h: &Subgroup) -> Mask {
        h.elements()
            .filter_map(|x| i.embed.iter().position(|&e| e == x))
            .fold(0, |a, b| a | 1 << b)
    }

    /// Hom_F(P, S) computed directly: all c_g with P^g ≤ S.
    fn direct_isos(i: &Inst) -> BTreeSet<Mor> {
        let mut out = BTreeSet::new();
        for &p in i.s.subgroups() {
            for g in 0..i.g.order() {
                let f: Option<Mor> = (0..i.s.order())
                    .map(|x| {
                        if p >> x & 1 == 0 {
                            return Some(UNDEF);
                        }
                        let y = i.g.conj(i.embed[x], g);
                        i.embed.iter().position(|&e| e == y).map(|k| k as u8)
                    })
                    .collect();
                if let Some(f) = f {
                    out.insert(f);
                }
            }
        }
        out
    }

    #[test]
    fn generated_matches_direct_hom_sets() {
        for (g, p) in [(catalog::symmetric(4), 2), (catalog::sl23(), 2), (catalog::alternating(4), 2), (catalog::symmetric(3), 3)] {
            let i = inst(g, p);
            let got: BTreeSet<Mor> = i.f.isos().cloned().collect();
            assert_eq!(got, direct_isos(&i));
        }
    }

    #[test]
    fn regeneration_is_idempotent() {
        let i = inst(catalog::symmetric(4), 2);
        let again = FusionSystem::generate(i.s.clone(), i.s.full(), i.f.isos().cloned()).unwrap();
        assert_eq!(again, i.f);
        let inner = FusionSystem::inner(i.s.clone(), i.s.full());
        assert!(inner.is_subsystem_of(&i.f));
    }

    #[test]
    fn rejects_bad_seed() {
        let i = inst(catalog::dihedral8(), 2);
        let mut bad = vec![UNDEF; 8];
        bad[0] = 0;
        bad[1] = 0;
        assert!(FusionSystem::generate(i.s.clone(), i.s.full(), [bad.into_boxed_slice()]).is_err());
    }

    #[test]
    fn group_systems_are_saturated() {
        for (g, p) in [
            (catalog::symmetric(4), 2),
            (catalog::alternating(4), 2),
            (catalog::sl23(), 2),
            (catalog::dihedral8(), 2),
            (catalog::quaternion8(), 2),
            (catalog::symmetric(3), 3),
            (catalog::c2_x_s3(), 2),
            (catalog::psl27(), 2),
        ] {
            let i = inst(g, p);
            assert_eq!(i.f.saturation_witness(), None);
        }
    }

    #[test]
    fn missing_extension_breaks_saturation() {
        // Drop every isomorphism defined on S from F_{D8}(S4): the inner
        // automorphisms of V4 induced by S no longer extend.
        let i = inst(catalog::symmetric(4), 2);
        let mut broken = i.f.clone();
        broken.isos.remove(&i.s.full());
        let w = broken.saturation_witness().expect("must fail");
        assert!(!w.is_empty());
    }

    #[test]
    fn s4_subgroup_classes() {
        let i = inst(catalog::symmetric(4), 2);
        let c = i.f.subgroup_classes().unwrap();
        let v4 = mask_of(&i, &i.g.big_o_p(2));
        assert_eq!(c.centric_radical, vec![v4, i.s.full()]);
        assert_eq!(c.centric.len(), 4);
        assert_eq!(c.quasicentric.len(), i.s.subgroups().len() - 1);
        assert_eq!(c.subcentric.len(), i.s.subgroups().len());
        for (a, b) in [(&c.centric_radical, &c.centric), (&c.centric, &c.quasicentric), (&c.quasicentric, &c.subcentric)] {
            assert!(a.iter().all(|x| b.contains(x)));
        }
    }

    #[test]
    fn strong_closure() {
        let i = inst(catalog::symmetric(4), 2);
        let v4 = mask_of(&i, &i.g.big_o_p(2));
        assert!(i.f.is_strongly_closed(i.s.full()));
        assert!(i.f.is_strongly_closed(v4));
        let z = i.s.center_of(i.s.full());
        assert!(!i.f.is_strongly_closed(z));
    }

    #[test]
    fn normal_subsystems_of_s4() {
        let i = inst(catalog::symmetric(4), 2);
        let v4 = i.g.big_o_p(2);
        let a4 = i.g.o_super_p(2);
        let t = mask_of(&i, &v4);
        let e_v4 = FusionSystem::inner(i.s.clone(), t);
        let e_a4 = FusionSystem::of_group_elements(i.s.clone(), &i.embed, &i.g, a4.elements(), t).unwrap();
        assert_eq!(i.f.is_normal_subsystem(&e_v4), Ok(true));
        assert_eq!(i.f.is_normal_subsystem(&e_a4), Ok(true));
        assert_eq!(i.f.is_normal_subsystem(&i.f), Ok(true));
        assert_eq!(e_a4.center(), 1);
        assert_eq!(e_v4.center(), t);
        assert_eq!(i.f.cs_of_subsystem(&e_a4), 1);
        // C2 fused to the center is not strongly closed.
        let z = i.s.center_of(i.s.full());
        assert!(matches!(
            i.f.is_normal_subsystem(&FusionSystem::inner(i.s.clone(), z)),
            Err(FusionError::SupportNotStronglyClosed(_))
        ));
    }

    #[test]
    fn local_subsystems() {
        let i = inst(catalog::symmetric(4), 2);
        let v4 = mask_of(&i, &i.g.big_o_p(2));
        assert_eq!(i.f.normalizer_system(v4).unwrap(), i.f);
        let n_s = i.f.normalizer_system(i.s.full()).unwrap();
        assert_eq!(n_s, FusionSystem::inner(i.s.clone(), i.s.full()));
        let z = i.s.center_of(i.s.full());
        // The center of D8 is not fully normalized... it is: N_S(Z) = S.
        assert!(i.f.normalizer_system(z).is_ok());
        let c = i.s.subgroups().iter().copied().find(|&h| {
            h.count_ones() == 2 && !i.f.is_fully_normalized(h)
        });
        if let Some(c) = c {
            assert!(matches!(i.f.normalizer_system(c), Err(FusionError::NotFullyNormalized(_))));
        }
        assert_eq!(i.f.o_p(), v4);
    }
}
