//! Partial normal subgroups against normal subsystems.
//!
//! `Ψ_L: N ↦ F_{S∩N}(N)` is checked against an oracle list of normal
//! subsystems computed without reference to `L`: from the normal subgroups of
//! a model when one is given, and otherwise by a bounded search over
//! subsystems of `F`.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;

use crate::constructions::product_pns;
use crate::error::{CorrespondenceError, FusionError};
use crate::fusion::{mor_image, mor_source, FusionSystem, Mor};
use crate::group::Subgroup;
use crate::locality::{GroupModel, Locality};
use crate::pgroup::{bits, Mask};
use crate::report::{Report, Verdict};

/// Localities up to this size get the class-union audit.
pub const DEFAULT_AUDIT_BOUND: usize = 60;
/// Largest locality `enumerate_pns` accepts.
pub const DEFAULT_SIZE_BOUND: usize = 2000;
/// Subsystem candidates the model-free oracle may visit.
pub const DEFAULT_CANDIDATE_BOUND: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialNormalSubgroup {
    pub elements: FixedBitSet,
    /// `T = N ∩ S`.
    pub support: Mask,
}

impl PartialNormalSubgroup {
    pub fn len(&self) -> usize {
        self.elements.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.elements.is_subset(&other.elements)
    }

    pub fn ids(&self) -> Vec<u32> {
        self.elements.ones().map(|x| x as u32).collect()
    }
}

#[derive(Clone, Debug)]
pub struct PnsEnumeration {
    pub items: Vec<PartialNormalSubgroup>,
    pub audit: Verdict,
}

fn wrap(l: &Locality, elements: FixedBitSet) -> PartialNormalSubgroup {
    let support = l.mask_of_set(&elements);
    PartialNormalSubgroup { elements, support }
}

/// Every partial normal subgroup, as joins of the partial normal closures of
/// conjugacy classes. Up to `audit_bound` elements the list is compared with
/// a filter over all unions of conjugacy classes.
pub fn enumerate_pns(l: &Locality, audit_bound: usize) -> Result<PnsEnumeration, CorrespondenceError> {
    if l.len() > DEFAULT_SIZE_BOUND {
        return Err(CorrespondenceError::SizeBoundExceeded {
            size: l.len(),
            bound: DEFAULT_SIZE_BOUND,
        });
    }
    let pg = l.pg();
    let classes = pg.conjugacy_classes();
    let mut found: Vec<FixedBitSet> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut push = |x: FixedBitSet, found: &mut Vec<FixedBitSet>| {
        if seen.insert(x.ones().collect()) {
            found.push(x);
        }
    };
    push(pg.set_of([0]), &mut found);
    for c in &classes {
        push(pg.partial_normal_closure(&pg.set_of(c.iter().copied())), &mut found);
    }
    let principal = found.clone();
    let mut i = 0;
    while i < found.len() {
        for p in &principal {
            let mut u = found[i].clone();
            u.union_with(p);
            let j = pg.partial_normal_closure(&u);
            push(j, &mut found);
        }
        i += 1;
    }
    for x in &found {
        if !pg.is_partial_normal(x)? {
            return Err(CorrespondenceError::AuditMismatch(
                "a partial normal closure is not partial normal".into(),
            ));
        }
    }
    let audit = if l.len() > audit_bound {
        Verdict::Skipped(format!("|L| = {} exceeds the audit bound {}", l.len(), audit_bound))
    } else if classes.len() > 20 {
        Verdict::Skipped(format!("{} conjugacy classes", classes.len()))
    } else {
        let id_class = classes.iter().position(|c| c.contains(&0)).unwrap();
        let others: Vec<usize> = (0..classes.len()).filter(|&c| c != id_class).collect();
        let mut brute: HashSet<Vec<usize>> = HashSet::new();
        for bitsel in 0u32..1 << others.len() {
            let ids = classes[id_class].iter().copied().chain(
                others
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| bitsel >> k & 1 == 1)
                    .flat_map(|(_, &c)| classes[c].iter().copied()),
            );
            let set = pg.set_of(ids);
            if pg.is_partial_subgroup(&set) && pg.is_partial_normal(&set)? {
                brute.insert(set.ones().collect());
            }
        }
        let mine: HashSet<Vec<usize>> = found.iter().map(|x| x.ones().collect()).collect();
        if brute != mine {
            return Err(CorrespondenceError::AuditMismatch(format!(
                "closure search found {}, class-union filter found {}",
                mine.len(),
                brute.len()
            )));
        }
        Verdict::Pass
    };
    let mut items: Vec<PartialNormalSubgroup> = found.into_iter().map(|x| wrap(l, x)).collect();
    items.sort_by_key(|n| (n.len(), n.elements.ones().collect::<Vec<_>>()));
    Ok(PnsEnumeration { items, audit })
}

/// Fails unless `F^q ⊆ Δ ⊆ F^s`.
pub fn check_regime(l: &Locality) -> Result<(), CorrespondenceError> {
    let classes = l.fusion_system().subgroup_classes()?;
    let delta = l.delta();
    let fq_in = classes.quasicentric.iter().all(|&p| delta.contains(p));
    let in_fs = delta.masks().iter().all(|p| classes.subcentric.contains(p));
    if fq_in && in_fs {
        Ok(())
    } else {
        Err(CorrespondenceError::DeltaRegimeUnsupported)
    }
}

/// `Ψ_L(N) = F_{S∩N}(N)`, required to be normal in `F_S(L)`.
pub fn psi(l: &Locality, n: &PartialNormalSubgroup) -> Result<FusionSystem, CorrespondenceError> {
    check_regime(l)?;
    psi_unchecked(l, n)
}

fn psi_unchecked(l: &Locality, n: &PartialNormalSubgroup) -> Result<FusionSystem, CorrespondenceError> {
    let e = l.fusion_of_partial_subgroup(&n.elements)?;
    match l.fusion_system().normal_subsystem_witness(&e) {
        None => Ok(e),
        Some(w) => Err(CorrespondenceError::ImageNotNormal(w)),
    }
}

/// Normal subsystems `F_{S∩N}(N)` for `N ⊴ G`, with the first normal
/// subgroup realizing each.
pub fn normal_subsystems_from_model(
    model: &GroupModel,
) -> Result<Vec<(FusionSystem, Subgroup)>, CorrespondenceError> {
    if !model.group.is_characteristic_p(model.p) {
        return Err(FusionError::ModelMismatch(format!(
            "model of order {} is not of characteristic {}",
            model.group.order(),
            model.p
        ))
        .into());
    }
    let f = model.fusion();
    let mut out: Vec<(FusionSystem, Subgroup)> = Vec::new();
    for n in model.group.normal_subgroups()? {
        let e = FusionSystem::of_group_elements(
            model.s.clone(),
            &model.s_embed,
            &model.group,
            n.elements(),
            model.mask_of(&n),
        )?;
        if out.iter().any(|(x, _)| *x == e) {
            continue;
        }
        if f.normal_subsystem_witness(&e).is_none() {
            out.push((e, n));
        }
    }
    Ok(out)
}

/// The oracle list. With a model it comes from normal subgroups; without
/// one, from joins of `Aut_F(T)`-invariant principal subsystems over each
/// strongly closed `T`, filtered by normality.
pub fn enumerate_normal_subsystems(
    f: &FusionSystem,
    model: Option<&GroupModel>,
    bound: usize,
) -> Result<Vec<FusionSystem>, CorrespondenceError> {
    if let Some(m) = model {
        if m.fusion() != f {
            return Err(FusionError::ModelMismatch("F_S(G) differs from F".into()).into());
        }
        return Ok(normal_subsystems_from_model(m)?.into_iter().map(|x| x.0).collect());
    }
    let s = f.sylow().clone();
    let mut out = Vec::new();
    let mut visited = 0usize;
    for t in f.objects() {
        if !f.is_strongly_closed(t) {
            continue;
        }
        let auts: Vec<&Mor> = f.aut(t);
        let inside: Vec<&Mor> = f
            .isos()
            .filter(|g| (mor_source(g) | mor_image(g)) & !t == 0)
            .collect();
        let mut principal: Vec<FusionSystem> = Vec::new();
        let mut covered: HashSet<Mor> = HashSet::new();
        for phi in inside {
            if covered.contains(phi) {
                continue;
            }
            let orbit: Vec<Mor> = auts.iter().map(|a| conjugate_mor(phi, a)).collect();
            covered.extend(orbit.iter().cloned());
            let e = FusionSystem::generate(s.clone(), t, orbit)?;
            if !principal.contains(&e) {
                principal.push(e);
            }
        }
        let mut lattice: Vec<FusionSystem> = vec![FusionSystem::inner(s.clone(), t)];
        let mut i = 0;
        while i < lattice.len() {
            for p in &principal {
                if p.is_subsystem_of(&lattice[i]) {
                    continue;
                }
                let j = FusionSystem::generate(s.clone(), t, lattice[i].isos().chain(p.isos()).cloned())?;
                if !lattice.contains(&j) {
                    visited += 1;
                    if visited > bound {
                        return Err(FusionError::NoModelAndBoundExceeded(bound).into());
                    }
                    lattice.push(j);
                }
            }
            i += 1;
        }
        out.extend(lattice.into_iter().filter(|e| f.normal_subsystem_witness(e).is_none()));
    }
    Ok(out)
}

/// `φ^α = α⁻¹φα`, as a map `(Pα) → (Qα)`.
fn conjugate_mor(phi: &[u8], alpha: &[u8]) -> Mor {
    let mut out = vec![crate::partial::UNDEF; phi.len()];
    let src = mor_source(phi);
    for x in bits(src) {
        out[alpha[x] as usize] = alpha[phi[x] as usize];
    }
    out.into_boxed_slice()
}

#[derive(Debug)]
pub struct CorrespondenceReport {
    pub pns: Vec<PartialNormalSubgroup>,
    pub images: Vec<FusionSystem>,
    pub oracle: Vec<FusionSystem>,
    pub audit: Verdict,
    pub report: Report,
}

/// Runs the five checks of the correspondence: injectivity, agreement with
/// the oracle, inclusion in both directions, and uniqueness.
pub fn verify_bijection(
    l: &Locality,
    oracle: &[FusionSystem],
    audit_bound: usize,
) -> Result<CorrespondenceReport, CorrespondenceError> {
    check_regime(l)?;
    let en = enumerate_pns(l, audit_bound)?;
    let pns = en.items;
    let mut report = Report::new();
    let mut images = Vec::new();
    for n in &pns {
        images.push(psi_unchecked(l, n)?);
    }
    let k = pns.len();
    let pairs = || (0..k).flat_map(|a| (0..k).map(move |b| (a, b)));
    let name = |a: usize| format!("N[{}] (|N| = {}, T = {})", a, pns[a].len(), l.sylow().describe(pns[a].support));

    report.witness(
        "bij.injective",
        pairs()
            .find(|&(a, b)| a < b && images[a] == images[b])
            .map(|(a, b)| format!("{} and {} have the same image", name(a), name(b))),
    );
    let surj = oracle
        .iter()
        .position(|e| !images.contains(e))
        .map(|i| format!("oracle subsystem {} over {} is not hit", i, l.sylow().describe(oracle[i].support())))
        .or_else(|| {
            images
                .iter()
                .position(|e| !oracle.contains(e))
                .map(|a| format!("Ψ({}) is not in the oracle list", name(a)))
        });
    report.witness("bij.surjective", surj);
    report.witness(
        "bij.inclusion-preserving",
        pairs()
            .find(|&(a, b)| pns[a].is_subset(&pns[b]) && !images[a].is_subsystem_of(&images[b]))
            .map(|(a, b)| format!("{} ⊆ {} but images are not nested", name(a), name(b))),
    );
    report.witness(
        "bij.inverse-inclusion-preserving",
        pairs()
            .find(|&(a, b)| images[a].is_subsystem_of(&images[b]) && !pns[a].is_subset(&pns[b]))
            .map(|(a, b)| format!("Ψ({}) ⊆ Ψ({}) but {} ⊄ {}", a, b, name(a), name(b))),
    );
    let s = l.sylow();
    report.witness(
        "bij.uniqueness",
        pairs()
            .find(|&(a, b)| {
                let t = pns[a].support;
                a < b
                    && t == pns[b].support
                    && l.delta().contains(s.join(t, s.centralizer(t)))
                    && images[a] == images[b]
            })
            .map(|(a, b)| format!("{} and {} share support and fusion", name(a), name(b))),
    );
    Ok(CorrespondenceReport {
        pns,
        images,
        oracle: oracle.to_vec(),
        audit: en.audit,
        report,
    })
}

/// The ids of `L = L⁺|_Δ` inside `L⁺`, after checking that restricting
/// `lplus` really gives `l`.
pub fn restriction_embedding(lplus: &Locality, l: &Locality) -> Result<Vec<u32>, CorrespondenceError> {
    if !l.delta().is_subset(lplus.delta()) {
        return Err(CorrespondenceError::NotARestrictionPair("Δ ⊄ Δ⁺".into()));
    }
    let r = lplus
        .restrict(l.delta().masks())
        .map_err(|e| CorrespondenceError::NotARestrictionPair(e.to_string()))?;
    if let Some(d) = r.structure_difference(l) {
        return Err(CorrespondenceError::NotARestrictionPair(d));
    }
    Ok((0..lplus.len() as u32)
        .filter(|&f| l.delta().contains(lplus.s_of(f)))
        .collect())
}

/// `Φ_{L⁺,L}(N⁺) = N⁺ ∩ L`.
pub fn phi_restrict(
    lplus: &Locality,
    l: &Locality,
    nplus: &PartialNormalSubgroup,
) -> Result<PartialNormalSubgroup, CorrespondenceError> {
    let embed = restriction_embedding(lplus, l)?;
    phi_with(l, &embed, nplus)
}

fn phi_with(
    l: &Locality,
    embed: &[u32],
    nplus: &PartialNormalSubgroup,
) -> Result<PartialNormalSubgroup, CorrespondenceError> {
    let ids = (0..l.len() as u32).filter(|&f| nplus.elements.contains(embed[f as usize] as usize));
    let n = wrap(l, l.pg().set_of(ids));
    if !l.pg().is_partial_normal(&n.elements)? {
        return Err(CorrespondenceError::NotARestrictionPair(
            "N⁺ ∩ L is not partial normal".into(),
        ));
    }
    Ok(n)
}

/// `Φ` is a bijection, inclusion-preserving both ways, and
/// `Ψ_{L⁺} = Ψ_L ∘ Φ`.
pub fn verify_restriction(
    lplus: &Locality,
    l: &Locality,
    audit_bound: usize,
) -> Result<Report, CorrespondenceError> {
    check_regime(lplus)?;
    check_regime(l)?;
    let embed = restriction_embedding(lplus, l)?;
    let big = enumerate_pns(lplus, audit_bound)?.items;
    let small = enumerate_pns(l, audit_bound)?.items;
    let mut phi = Vec::new();
    for n in &big {
        phi.push(phi_with(l, &embed, n)?);
    }
    let mut report = Report::new();
    let distinct: HashSet<Vec<usize>> = phi.iter().map(|n| n.elements.ones().collect()).collect();
    let onto = small.iter().all(|n| phi.contains(n));
    report.witness(
        "res.phi-bijective",
        (distinct.len() != big.len() || !onto || big.len() != small.len()).then(|| {
            format!(
                "{} partial normal subgroups above, {} below, {} distinct images",
                big.len(),
                small.len(),
                distinct.len()
            )
        }),
    );
    let mut nested = None;
    for a in 0..big.len() {
        for b in 0..big.len() {
            if big[a].is_subset(&big[b]) != phi[a].is_subset(&phi[b]) {
                nested.get_or_insert(format!("inclusion of N⁺[{a}] in N⁺[{b}] is not reflected by Φ"));
            }
        }
    }
    report.witness("res.phi-inclusion-both-ways", nested);
    let mut comp = None;
    for (a, n) in big.iter().enumerate() {
        if psi_unchecked(lplus, n)? != psi_unchecked(l, &phi[a])? {
            comp.get_or_insert(format!("Ψ_L⁺(N⁺[{a}]) ≠ Ψ_L(Φ(N⁺[{a}]))"));
        }
    }
    report.witness("res.composition", comp);
    Ok(report)
}

/// The partial normal subgroup with `Ψ(N) = e`.
pub fn lift<'a>(
    l: &Locality,
    pns: &'a [PartialNormalSubgroup],
    e: &FusionSystem,
) -> Result<&'a PartialNormalSubgroup, CorrespondenceError> {
    for n in pns {
        if n.support == e.support() && psi_unchecked(l, n)? == *e {
            return Ok(n);
        }
    }
    Err(CorrespondenceError::LiftNotFound(l.sylow().describe(e.support())))
}

/// `E₁E₂ = Ψ(Ψ⁻¹(E₁) Ψ⁻¹(E₂))`.
pub fn product_subsystems(
    l: &Locality,
    pns: &[PartialNormalSubgroup],
    e1: &FusionSystem,
    e2: &FusionSystem,
) -> Result<FusionSystem, CorrespondenceError> {
    check_regime(l)?;
    let a = lift(l, pns, e1)?;
    let b = lift(l, pns, e2)?;
    let ab = product_pns(l, &a.elements, &b.elements)?;
    psi_unchecked(l, &wrap(l, ab))
}

/// `None` when `e` is normal over `S₁S₂`, contains both factors and lies in
/// every oracle subsystem over `S₁S₂` containing both.
pub fn product_witness(
    f: &FusionSystem,
    e: &FusionSystem,
    e1: &FusionSystem,
    e2: &FusionSystem,
    oracle: &[FusionSystem],
) -> Option<String> {
    let s = f.sylow();
    let t = s.join(e1.support(), e2.support());
    if e.support() != t {
        return Some(format!("support {} instead of {}", s.describe(e.support()), s.describe(t)));
    }
    if let Some(w) = f.normal_subsystem_witness(e) {
        return Some(format!("product is not normal: {w}"));
    }
    if !e1.is_subsystem_of(e) || !e2.is_subsystem_of(e) {
        return Some("product does not contain both factors".into());
    }
    oracle
        .iter()
        .find(|x| x.support() == t && e1.is_subsystem_of(x) && e2.is_subsystem_of(x) && !e.is_subsystem_of(x))
        .map(|_| "a smaller normal subsystem over S₁S₂ contains both factors".into())
}

/// Lemma suite for one normal subsystem `E ⊴ F`.
pub fn subsystem_lemmas(f: &FusionSystem, e: &FusionSystem) -> Report {
    let s = f.sylow();
    let t = e.support();
    let z = e.center();
    let cs = f.cs_of_subsystem(e);
    let mut r = Report::new();
    r.witness(
        "sub.center-normal",
        (!f.is_normal_subgroup(z)).then(|| format!("Z(E) = {} is not normal in F", s.describe(z))),
    );
    r.witness(
        "sub.cs-meets-t",
        (cs & t != z).then(|| format!("C_S(E) ∩ T = {}, Z(E) = {}", s.describe(cs & t), s.describe(z))),
    );
    let classes = (e.subgroup_classes(), f.subgroup_classes());
    match classes {
        (Ok(ec), Ok(fc)) if cs & !t == 0 => {
            r.witness(
                "sub.es-in-fs",
                ec.subcentric
                    .iter()
                    .find(|p| !fc.subcentric.contains(p))
                    .map(|&p| format!("{} ∈ E^s \\ F^s", s.describe(p))),
            );
            r.witness(
                "sub.ec-in-fq",
                ec.centric
                    .iter()
                    .find(|p| !fc.quasicentric.contains(p))
                    .map(|&p| format!("{} ∈ E^c \\ F^q", s.describe(p))),
            );
        }
        (Ok(_), Ok(_)) => {
            for id in ["sub.es-in-fs", "sub.ec-in-fq"] {
                r.push(id, Verdict::Skipped(format!("C_S(E) of order {} is not inside T", cs.count_ones())));
            }
        }
        (Err(x), _) | (_, Err(x)) => r.witness("sub.es-in-fs", Some(x.to_string())),
    }
    let mut local = None;
    for p in s.subgroups_of(t) {
        if !f.is_fully_normalized(p) {
            continue;
        }
        match (e.normalizer_system(p), f.normalizer_system(p)) {
            (Ok(ne), Ok(nf)) => {
                if let Some(w) = nf.normal_subsystem_witness(&ne) {
                    local.get_or_insert(format!("N_E({}) is not normal in N_F: {w}", s.describe(p)));
                }
            }
            (Err(x), _) | (_, Err(x)) => {
                local.get_or_insert(x.to_string());
            }
        }
    }
    r.witness("sub.local-normal", local);
    r
}

/// `P₁P₂ ∈ Δ` for `P₁ ∈ E^c` and `P₂ ∈ C_F(E)^c`, with `C_F(E)` taken as
/// `F_{C_S(N)}(C_G(N))` for the normal subgroup `N` of a model realizing `E`.
pub fn property_star(l: &Locality, e: &FusionSystem, realized: Option<(&GroupModel, &Subgroup)>) -> Verdict {
    let Some((model, n)) = realized else {
        return Verdict::Skipped("C_F(E) needs a model".into());
    };
    let c = model.group.centralizer(n);
    let cf = match FusionSystem::of_group_elements(
        model.s.clone(),
        &model.s_embed,
        &model.group,
        c.elements(),
        model.mask_of(&c),
    ) {
        Ok(x) => x,
        Err(x) => return Verdict::Fail(x.to_string()),
    };
    let (ec, cc) = match (e.subgroup_classes(), cf.subgroup_classes()) {
        (Ok(a), Ok(b)) => (a.centric, b.centric),
        (Err(x), _) | (_, Err(x)) => return Verdict::Fail(x.to_string()),
    };
    let s = l.sylow();
    for &p1 in &ec {
        for &p2 in &cc {
            let j = s.join(p1, p2);
            if !l.delta().contains(j) {
                return Verdict::Fail(format!("{}·{} = {} ∉ Δ", s.describe(p1), s.describe(p2), s.describe(j)));
            }
        }
    }
    Verdict::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::locality::DeltaSelector;
    use std::sync::Arc;

    fn model(g: crate::group::PermGroup, p: u32) -> GroupModel {
        GroupModel::new(Arc::new(g), p).unwrap()
    }

    #[test]
    fn s4_pns_are_the_normal_subgroups() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let en = enumerate_pns(&l, DEFAULT_AUDIT_BOUND).unwrap();
        assert_eq!(en.audit, Verdict::Pass);
        let sizes: Vec<usize> = en.items.iter().map(|n| n.len()).collect();
        assert_eq!(sizes, vec![1, 4, 12, 24]);
        let oracle = enumerate_normal_subsystems(m.fusion(), Some(&m), DEFAULT_CANDIDATE_BOUND).unwrap();
        assert_eq!(oracle.len(), 4);
        let rep = verify_bijection(&l, &oracle, DEFAULT_AUDIT_BOUND).unwrap();
        assert!(rep.report.all_pass(), "{}", rep.report);
        // Ψ of the A4-supported member is F_{V4}(A4).
        let a4 = &rep.pns[2];
        let e = psi(&l, a4).unwrap();
        assert_eq!(e.support().count_ones(), 4);
        assert_eq!(e.aut(e.support()).len(), 3);
    }

    #[test]
    fn model_free_oracle_agrees_with_model() {
        for (g, p) in [
            (catalog::symmetric(4), 2),
            (catalog::sl23(), 2),
            (catalog::dihedral8(), 2),
            (catalog::symmetric3(), 3),
        ] {
            let m = model(g, p);
            let with: HashSet<_> = enumerate_normal_subsystems(m.fusion(), Some(&m), DEFAULT_CANDIDATE_BOUND)
                .unwrap()
                .into_iter()
                .map(|e| format!("{:?}", e.isos().collect::<Vec<_>>()))
                .collect();
            let without: HashSet<_> = enumerate_normal_subsystems(m.fusion(), None, DEFAULT_CANDIDATE_BOUND)
                .unwrap()
                .into_iter()
                .map(|e| format!("{:?}", e.isos().collect::<Vec<_>>()))
                .collect();
            assert_eq!(with, without);
        }
    }

    #[test]
    fn model_free_bound_is_reported() {
        let m = model(catalog::symmetric(4), 2);
        let err = enumerate_normal_subsystems(m.fusion(), None, 0).unwrap_err();
        assert!(matches!(err, CorrespondenceError::Fusion(FusionError::NoModelAndBoundExceeded(0))));
    }

    #[test]
    fn regime_is_enforced() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::CrClosure).unwrap();
        let en = enumerate_pns(&l, DEFAULT_AUDIT_BOUND).unwrap();
        assert!(matches!(psi(&l, &en.items[0]), Err(CorrespondenceError::DeltaRegimeUnsupported)));
    }

    #[test]
    fn restriction_from_subcentric_to_quasicentric() {
        let m = model(catalog::symmetric(4), 2);
        let ls = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let lq = m.locality_for(&DeltaSelector::Quasicentric).unwrap();
        let r = verify_restriction(&ls, &lq, DEFAULT_AUDIT_BOUND).unwrap();
        assert!(r.all_pass(), "{r}");
        let one = enumerate_pns(&ls, 0).unwrap().items[0].clone();
        assert_eq!(phi_restrict(&ls, &lq, &one).unwrap().len(), 1);
        assert!(restriction_embedding(&lq, &ls).is_err());
    }

    #[test]
    fn products_and_lemmas_on_s4() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let pns = enumerate_pns(&l, DEFAULT_AUDIT_BOUND).unwrap().items;
        let oracle = enumerate_normal_subsystems(m.fusion(), Some(&m), DEFAULT_CANDIDATE_BOUND).unwrap();
        for e1 in &oracle {
            let r = subsystem_lemmas(m.fusion(), e1);
            assert!(r.all_pass(), "{r}");
            for e2 in &oracle {
                let e = product_subsystems(&l, &pns, e1, e2).unwrap();
                assert_eq!(product_witness(m.fusion(), &e, e1, e2, &oracle), None);
            }
        }
    }

    #[test]
    fn property_star_with_model() {
        let m = model(catalog::symmetric(4), 2);
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        for (e, n) in normal_subsystems_from_model(&m).unwrap() {
            assert_eq!(property_star(&l, &e, Some((&m, &n))), Verdict::Pass);
        }
        let e = m.fusion().clone();
        assert!(matches!(property_star(&l, &e, None), Verdict::Skipped(_)));
    }

    #[test]
    fn psl27_without_a_model() {
        let m = model(catalog::psl27(), 2);
        let oracle = enumerate_normal_subsystems(m.fusion(), None, DEFAULT_CANDIDATE_BOUND).unwrap();
        // Simple group: only the trivial subsystem and F itself.
        assert_eq!(oracle.len(), 2);
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let rep = verify_bijection(&l, &oracle, DEFAULT_AUDIT_BOUND).unwrap();
        assert!(matches!(rep.audit, Verdict::Skipped(_)));
        assert!(rep.report.all_pass(), "{}", rep.report);
    }

    mod props {
        use super::*;
        use crate::constructions::product_pns;
        use proptest::prelude::*;
        use std::sync::OnceLock;

        fn setup() -> &'static (Locality, Vec<PartialNormalSubgroup>) {
            static L: OnceLock<(Locality, Vec<PartialNormalSubgroup>)> = OnceLock::new();
            L.get_or_init(|| {
                let m = GroupModel::new(Arc::new(catalog::sl23()), 2).unwrap();
                let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
                let pns = enumerate_pns(&l, 0).unwrap().items;
                (l, pns)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn closures_are_enumerated(seed in proptest::collection::vec(0u32..24, 0..4)) {
                let (l, pns) = setup();
                let c = l.pg().partial_normal_closure(&l.pg().set_of(seed));
                prop_assert!(pns.iter().any(|n| n.elements == c));
            }

            #[test]
            fn products_are_enumerated_and_psi_is_monotone(a in 0usize..4, b in 0usize..4) {
                let (l, pns) = setup();
                let ab = product_pns(l, &pns[a].elements, &pns[b].elements).unwrap();
                let n = pns.iter().find(|n| n.elements == ab);
                prop_assert!(n.is_some());
                let e = psi(l, n.unwrap()).unwrap();
                prop_assert!(psi(l, &pns[a]).unwrap().is_subsystem_of(&e));
                prop_assert!(psi(l, &pns[b]).unwrap().is_subsystem_of(&e));
            }
        }
    }
}
