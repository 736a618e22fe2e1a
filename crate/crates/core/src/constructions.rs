//! Expansions `L⁺(R, M)`, glued homomorphisms, quotients `L/N` and
//! products of partial normal subgroups.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use petgraph::unionfind::UnionFind;

use crate::error::ConstructionError;
use crate::fusion::FusionSystem;
use crate::group::{p_part, PermGroup, Subgroup};
use crate::locality::{Locality, ObjectSet};
use crate::partial::{homomorphism_witness, PartialGroup, Threading, NONE, UNDEF};
use crate::pgroup::{bits, Mask, PGroup};
use crate::report::Report;

fn hyp(clause: &str, witness: impl Into<String>) -> ConstructionError {
    ConstructionError::HypothesisViolation {
        clause: clause.into(),
        witness: witness.into(),
    }
}

/// The group `M` of an expansion and how it overlaps `L`.
#[derive(Clone, Debug)]
pub struct ExpansionData {
    pub r: Mask,
    pub m: Arc<PermGroup>,
    /// Index in `M` of each element of `N_S(R)`; `None` elsewhere.
    pub s_in_m: Vec<Option<usize>>,
    /// Index in `M` of each element of `N_L(R)`.
    pub nl_in_m: HashMap<u32, usize>,
}

impl ExpansionData {
    /// Data for `M ≤ G` when `L` is realized inside `G`.
    pub fn from_realization(l: &Locality, r: Mask, m: &Subgroup) -> Result<Self, ConstructionError> {
        let real = l
            .realization()
            .ok_or_else(|| ConstructionError::Inconsistent("locality has no realization".into()))?;
        let (mg, embed) = real.group.subgroup_as_group(m);
        let pos: HashMap<usize, usize> = embed.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let s = l.sylow();
        let ns = s.normalizer(r);
        let s_in_m = (0..s.order())
            .map(|i| {
                (ns >> i & 1 == 1)
                    .then(|| pos.get(&real.ids[l.s_elem()[i] as usize]).copied())
                    .flatten()
            })
            .collect();
        let mut nl_in_m = HashMap::new();
        for f in l.normalizer_ids(r) {
            let mi = pos.get(&real.ids[f as usize]).ok_or_else(|| {
                hyp("2", format!("{} ∈ N_L(R) is not in M", l.pg().label(f)))
            })?;
            nl_in_m.insert(f, *mi);
        }
        Ok(ExpansionData {
            r,
            m: Arc::new(mg),
            s_in_m,
            nl_in_m,
        })
    }

    fn s_embed_dummy(&self) -> Vec<usize> {
        self.s_in_m.iter().map(|x| x.unwrap_or(usize::MAX)).collect()
    }
}

/// Checks every clause of the expansion hypothesis.
pub fn check_expansion_hypothesis(
    l: &Locality,
    f: &FusionSystem,
    data: &ExpansionData,
) -> Result<(), ConstructionError> {
    let s = l.sylow();
    let r = data.r;
    let m = &data.m;
    if !s.is_subgroup(r) {
        return Err(hyp("R", format!("{:#x} is not a subgroup of S", r)));
    }
    if !f.is_f_closed(l.delta().masks()) {
        return Err(hyp("natural", "object set is not F-closed"));
    }
    if *l.fusion_system() != f.restricted_to(l.delta().masks()) {
        return Err(hyp("natural", "F_S(L) differs from F restricted to the objects"));
    }
    if !f.is_fully_normalized(r) {
        return Err(hyp("R", format!("{} is not fully normalized", s.describe(r))));
    }
    let class = f.class_of(r);
    for (i, &u) in class.iter().enumerate() {
        for &v in &class[i + 1..] {
            let j = s.join(u, v);
            if !l.delta().contains(j) {
                return Err(hyp(
                    "1",
                    format!("<{}, {}> = {} is not an object", s.describe(u), s.describe(v), s.describe(j)),
                ));
            }
        }
    }
    // N_S(R) sits in M as a Sylow subgroup.
    let ns = s.normalizer(r);
    for a in bits(ns) {
        let Some(ma) = data.s_in_m[a] else {
            return Err(hyp("2", format!("{} ∈ N_S(R) has no image in M", s.label(a))));
        };
        for b in bits(ns) {
            if data.s_in_m[s.mul(a, b)] != Some(m.mul(ma, data.s_in_m[b].unwrap_or(0))) {
                return Err(hyp("2", "N_S(R) does not embed in M as a subgroup"));
            }
        }
    }
    if p_part(m.order(), s.prime()) != ns.count_ones() as usize {
        return Err(hyp("2", format!("N_S(R) is not Sylow in M of order {}", m.order())));
    }
    let m_to_s: HashMap<usize, usize> = bits(ns).map(|a| (data.s_in_m[a].unwrap(), a)).collect();
    let r_in_m: HashSet<usize> = bits(r).map(|a| data.s_in_m[a].unwrap()).collect();
    for &x in &r_in_m {
        for g in 0..m.order() {
            if !r_in_m.contains(&m.conj(x, g)) {
                return Err(hyp("2", format!("R is not normal in M: {}", m.element(g))));
            }
        }
    }
    let nf = f.normalizer_system(r)?;
    let fm = FusionSystem::of_group_elements(s.clone(), &data.s_embed_dummy(), m, 0..m.order(), ns)?;
    if nf != fm {
        return Err(hyp("2", "N_F(R) differs from the fusion system of M"));
    }
    // L_{Δ_R}(M) = N_L(R) as partial groups.
    let delta_r: HashSet<Mask> = l
        .delta()
        .masks()
        .iter()
        .copied()
        .filter(|&p| p & r == r && s.is_normal_in(r, p))
        .collect();
    let sm = |word: &[usize]| -> Mask {
        bits(ns)
            .filter(|&a| {
                let mut x = data.s_in_m[a].unwrap();
                word.iter().all(|&g| {
                    x = m.conj(x, g);
                    m_to_s.contains_key(&x)
                })
            })
            .fold(0, |acc, a| acc | 1 << a)
    };
    let lm: HashSet<usize> = (0..m.order()).filter(|&g| delta_r.contains(&sm(&[g]))).collect();
    let image: HashSet<usize> = data.nl_in_m.values().copied().collect();
    if image.len() != data.nl_in_m.len() || image != lm {
        return Err(hyp("2", "N_L(R) and L_{Δ_R}(M) have different elements"));
    }
    for (&a, &ma) in &data.nl_in_m {
        for (&b, &mb) in &data.nl_in_m {
            let in_m = delta_r.contains(&sm(&[ma, mb]));
            match l.pg().pair(a, b) {
                Some(c) if in_m && data.nl_in_m.get(&c) == Some(&m.mul(ma, mb)) => {}
                None if !in_m => {}
                _ => {
                    return Err(hyp(
                        "2",
                        format!("N_L(R) and L_{{Δ_R}}(M) differ at {}", l.pg().show(&[a, b])),
                    ))
                }
            }
        }
    }
    Ok(())
}

/// `L⁺ = (L ∪ Θ)/≈` with `L` occupying the first ids.
#[derive(Debug)]
pub struct Expansion {
    pub locality: Locality,
    pub data: ExpansionData,
    /// `ψ: M → N_{L⁺}(R)`, `m ↦ [1, m, 1]`.
    pub psi: Vec<u32>,
    /// Number of elements of `L`.
    pub base_len: usize,
    /// `X = {x : R ≤ S_x, N_{S_x}(R)^x = N_S(R^x)}`; triples are `(x⁻¹, g, y)`
    /// with `x, y ∈ X`.
    xs: Vec<u32>,
    theta_class: Vec<u32>,
    /// Exhaustive checks of the construction's well-definedness lemmas.
    pub report: Report,
}

impl Expansion {
    /// Number of triples in `Θ`.
    pub fn theta_len(&self) -> usize {
        self.theta_class.len()
    }

    /// The class `[x⁻¹, g, y]`, if the triple is in `Θ`.
    pub fn class_of_triple(&self, x: u32, g: usize, y: u32) -> Option<u32> {
        let xi = self.xs.binary_search(&x).ok()?;
        let yi = self.xs.binary_search(&y).ok()?;
        let nx = self.xs.len();
        Some(self.theta_class[(xi * self.data.m.order() + g) * nx + yi])
    }

    fn triple(&self, t: usize) -> (u32, usize, u32) {
        let nx = self.xs.len();
        let mo = self.data.m.order();
        (self.xs[t / nx / mo], t / nx % mo, self.xs[t % nx])
    }
}

struct Classes<'a> {
    l: &'a Locality,
    m: &'a PermGroup,
    nl: &'a HashMap<u32, usize>,
    xs: &'a [u32],
    theta_class: &'a [u32],
    /// Θ members of each class as `(xi, g, yi)`.
    reps: Vec<Vec<(usize, usize, usize)>>,
}

impl Classes<'_> {
    fn class(&self, xi: usize, g: usize, yi: usize) -> u32 {
        let nx = self.xs.len();
        self.theta_class[(xi * self.m.order() + g) * nx + yi]
    }

    /// `Π(y, x⁻¹)` in `M` when defined and in `N_L(R)`.
    fn link(&self, yi: usize, xi: usize) -> Option<usize> {
        let pg = self.l.pg();
        let h = pg.pair(self.xs[yi], pg.inv(self.xs[xi]))?;
        self.nl.get(&h).copied()
    }

    /// `Π₀⁺` by dynamic programming over representatives. `Err` carries a
    /// witness of ill-definedness.
    fn prod0(&self, word: &[u32]) -> Result<Option<u32>, String> {
        // state: y endpoint -> (x₁, accumulated element of M)
        let mut states: HashMap<usize, (usize, usize)> = HashMap::new();
        for &(xi, g, yi) in &self.reps[word[0] as usize] {
            states.entry(yi).or_insert((xi, g));
        }
        for &c in &word[1..] {
            let mut next = HashMap::new();
            for (&y, &(x1, acc)) in &states {
                for &(xi, g, yi) in &self.reps[c as usize] {
                    if next.contains_key(&yi) {
                        continue;
                    }
                    if let Some(k) = self.link(y, xi) {
                        next.insert(yi, (x1, self.m.mul(self.m.mul(acc, k), g)));
                    }
                }
            }
            states = next;
        }
        let mut out: Option<u32> = None;
        for (&y, &(x1, acc)) in &states {
            let c = self.class(x1, acc, y);
            match out {
                Some(o) if o != c => {
                    return Err(format!("two products for the word of classes {:?}", word));
                }
                _ => out = Some(c),
            }
        }
        Ok(out)
    }
}

/// Builds `L⁺(R, M)` after checking the hypothesis.
pub fn expand(l: &Locality, f: &FusionSystem, data: ExpansionData) -> Result<Expansion, ConstructionError> {
    check_expansion_hypothesis(l, f, &data)?;
    let s = l.sylow().clone();
    let r = data.r;
    let m = data.m.clone();
    let pg = l.pg();
    let n = l.len();
    let mo = m.order();
    let xs: Vec<u32> = (0..n as u32)
        .filter(|&x| {
            let sx = l.s_of(x);
            if sx & r != r {
                return false;
            }
            let rx = l.conj_mask(r, x).unwrap();
            l.conj_mask(s.normalizer_in(sx, r), x) == Some(s.normalizer(rx))
        })
        .collect();
    let nx = xs.len();
    let theta_len = nx * mo * nx;
    let mut report = Report::new();

    // ∼₀: compare against a fixed representative of each R-conjugate.
    let rx: Vec<Mask> = xs.iter().map(|&x| l.conj_mask(r, x).unwrap()).collect();
    let mut bucket_rep: HashMap<Mask, usize> = HashMap::new();
    for (i, &c) in rx.iter().enumerate() {
        bucket_rep.entry(c).or_insert(i);
    }
    let buckets: HashMap<Mask, Vec<usize>> = rx.iter().enumerate().fold(HashMap::new(), |mut acc, (i, &c)| {
        acc.entry(c).or_default().push(i);
        acc
    });
    // link[a][b] = Π(x_a, x_b⁻¹) in M, for x_a, x_b in one bucket.
    let mut link = vec![None; nx * nx];
    for idx in buckets.values() {
        for &a in idx {
            for &b in idx {
                let h = pg.pair(xs[a], pg.inv(xs[b])).ok_or_else(|| {
                    ConstructionError::Inconsistent(format!(
                        "({}, {}⁻¹) is not in D",
                        pg.label(xs[a]),
                        pg.label(xs[b])
                    ))
                })?;
                let mh = data.nl_in_m.get(&h).ok_or_else(|| {
                    ConstructionError::Inconsistent(format!("{} is not in N_L(R)", pg.label(h)))
                })?;
                link[a * nx + b] = Some(*mh);
            }
        }
    }
    let tid = |xi: usize, g: usize, yi: usize| (xi * mo + g) * nx + yi;
    let related = |xb: usize, xi: usize, g: usize, yb: usize, yi: usize| {
        // the unique ḡ with Π(x̄,x⁻¹)·g = ḡ·Π(ȳ,y⁻¹)
        let a = link[xb * nx + xi].unwrap();
        let b = link[yb * nx + yi].unwrap();
        m.mul(m.mul(a, g), m.inv(b))
    };
    let canon = |t: usize| {
        let (xi, g, yi) = (t / nx / mo, t / nx % mo, t % nx);
        let xb = bucket_rep[&rx[xi]];
        let yb = bucket_rep[&rx[yi]];
        tid(xb, related(xb, xi, g, yb, yi), yb)
    };
    let canon_of: Vec<usize> = (0..theta_len).map(canon).collect();
    let mut sim0 = None;
    'outer: for t in 0..theta_len {
        let (xi, g, yi) = (t / nx / mo, t / nx % mo, t % nx);
        for &xb in &buckets[&rx[xi]] {
            for &yb in &buckets[&rx[yi]] {
                let t2 = tid(xb, related(xb, xi, g, yb, yi), yb);
                if canon_of[t2] != canon_of[t] {
                    sim0 = Some(format!("∼₀ is not transitive at triple {t}"));
                    break 'outer;
                }
            }
        }
    }
    report.witness("exp.sim0-equivalence", sim0);

    let mut uf: UnionFind<usize> = UnionFind::new(n + theta_len);
    for t in 0..theta_len {
        uf.union(n + t, n + canon_of[t]);
    }
    let m_to_l: HashMap<usize, u32> = data.nl_in_m.iter().map(|(&f, &g)| (g, f)).collect();
    for t in 0..theta_len {
        let (xi, g, yi) = (t / nx / mo, t / nx % mo, t % nx);
        let Some(&gl) = m_to_l.get(&g) else { continue };
        let w = [pg.inv(xs[xi]), gl, xs[yi]];
        if pg.in_domain(&w) {
            let fv = pg.product(&w)?;
            uf.union(fv as usize, n + t);
        }
    }
    let mut class_id: HashMap<usize, u32> = HashMap::new();
    let mut embed_witness = None;
    for fv in 0..n {
        let root = uf.find(fv);
        if let Some(&other) = class_id.get(&root) {
            embed_witness.get_or_insert(format!(
                "{} ≈ {}",
                pg.label(other),
                pg.label(fv as u32)
            ));
        } else {
            class_id.insert(root, fv as u32);
        }
    }
    report.witness("exp.l-embeds", embed_witness);
    let mut next = n as u32;
    let mut theta_class = vec![0u32; theta_len];
    for (t, slot) in theta_class.iter_mut().enumerate() {
        let root = uf.find(n + t);
        *slot = *class_id.entry(root).or_insert_with(|| {
            next += 1;
            next - 1
        });
    }
    let total = next as usize;
    let mut reps: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); total];
    for t in 0..theta_len {
        reps[theta_class[t] as usize].push((t / nx / mo, t / nx % mo, t % nx));
    }
    let mut refine = None;
    // Classes meeting L may join several ∼₀-classes through ⊢; the others
    // must be single ∼₀-classes.
    for members in &reps[n..] {
        if let Some(&(a, b, c)) = members.first() {
            let c0 = canon_of[tid(a, b, c)];
            if members.iter().any(|&(x, g, y)| canon_of[tid(x, g, y)] != c0) {
                refine.get_or_insert("a class outside L meets two ∼₀-classes".to_string());
            }
        }
    }
    report.witness("exp.theta-classes", refine);

    let cl = Classes {
        l,
        m: &m,
        nl: &data.nl_in_m,
        xs: &xs,
        theta_class: &theta_class,
        reps,
    };
    // Labels and inverses.
    let mut labels: Vec<String> = pg.labels().to_vec();
    let mut inv = vec![0u32; total];
    let mut inv_witness = None;
    for c in 0..total {
        let via_theta = cl.reps[c]
            .first()
            .map(|&(x, g, y)| cl.class(y, m.inv(g), x));
        if c < n {
            inv[c] = pg.inv(c as u32);
            if via_theta.is_some_and(|v| v != inv[c]) {
                inv_witness.get_or_insert(format!("inverse of {} disagrees", pg.label(c as u32)));
            }
        } else {
            let (x, g, y) = cl.reps[c][0];
            inv[c] = via_theta.unwrap();
            labels.push(format!(
                "[{}⁻¹,{},{}]",
                pg.label(xs[x]),
                m.element(g).to_cycles(),
                pg.label(xs[y])
            ));
        }
    }
    // Pair table on D ∪ D₀⁺.
    let mut prod = vec![NONE; total * total];
    let mut well_defined = inv_witness;
    let mut agree = None;
    for a in 0..total as u32 {
        for b in 0..total as u32 {
            let from_l = if (a as usize) < n && (b as usize) < n { pg.pair(a, b) } else { None };
            let from0 = match cl.prod0(&[a, b]) {
                Ok(v) => v,
                Err(w) => {
                    well_defined.get_or_insert(w);
                    None
                }
            };
            if let (Some(x), Some(y)) = (from_l, from0) {
                if x != y {
                    agree.get_or_insert(format!("Π⁺ and Π differ at ({}, {})", labels[a as usize], labels[b as usize]));
                }
            }
            if let Some(v) = from_l.or(from0) {
                prod[a as usize * total + b as usize] = v;
            }
        }
    }
    // Conjugation of S: s^C = Π⁺(C⁻¹, s, C) when it lies in S.
    let so = s.order();
    let mut conj = vec![UNDEF; total * so];
    for c in 0..total as u32 {
        for i in 0..so {
            let sid = l.s_elem()[i];
            let from_l = if (c as usize) < n { l.conj_s(c, i) } else { None };
            let from0 = match cl.prod0(&[inv[c as usize], sid, c]) {
                Ok(v) => v.filter(|&v| (v as usize) < n).and_then(|v| l.s_index(v)),
                Err(w) => {
                    well_defined.get_or_insert(w);
                    None
                }
            };
            if let (Some(x), Some(y)) = (from_l, from0) {
                if x != y {
                    agree.get_or_insert(format!("conjugation of {} by {} differs", s.label(i), labels[c as usize]));
                }
            }
            if let Some(j) = from_l.or(from0) {
                conj[c as usize * so + i] = j as u8;
            }
        }
    }
    report.witness("exp.product-well-defined", well_defined);
    report.witness("exp.agrees-on-d", agree);

    let mut delta_plus: HashSet<Mask> = l.delta().masks().iter().copied().collect();
    delta_plus.extend(f.f_closure(&[r]));
    let delta_plus = ObjectSet::new(delta_plus);
    let threading = Threading::new(so, conj, delta_plus.masks().iter().copied());
    let new_pg = PartialGroup::new(labels, inv, prod, Some(threading))?;
    let locality = Locality::new(new_pg, s.clone(), l.s_elem().to_vec(), delta_plus, None)?;

    let one = xs.binary_search(&0).map_err(|_| ConstructionError::Inconsistent("1 ∉ X".into()))?;
    let psi: Vec<u32> = (0..mo).map(|g| cl.class(one, g, one)).collect();
    let mut psi_witness = None;
    let image: HashSet<u32> = psi.iter().copied().collect();
    let nlp: HashSet<u32> = locality.normalizer_ids(r).into_iter().collect();
    if image.len() != mo {
        psi_witness = Some("ψ is not injective".to_string());
    } else if image != nlp {
        psi_witness = Some(format!("ψ(M) has {} elements, N_L⁺(R) has {}", image.len(), nlp.len()));
    } else if let Some((a, b)) = (0..mo)
        .flat_map(|a| (0..mo).map(move |b| (a, b)))
        .find(|&(a, b)| locality.pg().pair(psi[a], psi[b]) != Some(psi[m.mul(a, b)]))
    {
        psi_witness = Some(format!("ψ({}·{}) ≠ ψ·ψ", m.element(a), m.element(b)));
    } else if let Some((&fv, _)) = data.nl_in_m.iter().find(|(&fv, &g)| psi[g] != fv) {
        psi_witness = Some(format!("ψ does not fix {} ∈ N_L(R)", pg.label(fv)));
    }
    report.witness("exp.nlplusr-psi", psi_witness);
    let expected = f.restricted_to(locality.delta().masks());
    report.witness(
        "exp.fusion",
        (*locality.fusion_system() != expected).then(|| "F_S(L⁺) differs from F restricted to Δ⁺".into()),
    );
    Ok(Expansion {
        locality,
        data,
        psi,
        base_len: n,
        xs,
        theta_class,
        report,
    })
}

/// A homomorphism `L⁺ → L̃` with its checks.
#[derive(Debug)]
pub struct Glued {
    pub map: Vec<u32>,
    pub report: Report,
}

/// `φ` with `φ|_L = φ₁` and `[x⁻¹,g,y]φ = Π̃(x⁻¹φ₁, gφ₂, yφ₁)`.
pub fn glue_homomorphism(
    exp: &Expansion,
    l: &Locality,
    target: &Locality,
    phi1: &[u32],
    phi2: &[u32],
    max_len: usize,
) -> Result<Glued, ConstructionError> {
    let data = &exp.data;
    let m = &data.m;
    let tp = target.pg();
    for (&fv, &g) in &data.nl_in_m {
        if phi1[fv as usize] != phi2[g] {
            return Err(ConstructionError::AgreementFailure(format!(
                "{} maps to {} and {}",
                l.pg().label(fv),
                tp.label(phi1[fv as usize]),
                tp.label(phi2[g])
            )));
        }
    }
    let mut rt: Mask = 0;
    for a in bits(data.r) {
        let img = phi1[l.s_elem()[a] as usize];
        let via2 = phi2[data.s_in_m[a].unwrap()];
        match target.s_index(img) {
            Some(j) if via2 == img => rt |= 1 << j,
            _ => {
                return Err(ConstructionError::ImageObjectMissing(format!(
                    "{} maps outside S̃",
                    l.sylow().label(a)
                )))
            }
        }
    }
    if !target.delta().contains(rt) {
        return Err(ConstructionError::ImageObjectMissing(target.sylow().describe(rt)));
    }
    let total = exp.locality.len();
    let mut map: Vec<Option<u32>> = vec![None; total];
    for (fv, slot) in map.iter_mut().enumerate().take(exp.base_len) {
        *slot = Some(phi1[fv]);
    }
    for t in 0..exp.theta_len() {
        let (x, g, y) = exp.triple(t);
        let w = [phi1[l.pg().inv(x) as usize], phi2[g], phi1[y as usize]];
        let v = tp.product(&w).map_err(|_| {
            ConstructionError::Inconsistent(format!("{} is not in D̃", tp.show(&w)))
        })?;
        let c = exp.theta_class[t] as usize;
        match map[c] {
            Some(old) if old != v => {
                return Err(ConstructionError::Inconsistent(format!(
                    "φ is not constant on {}",
                    exp.locality.pg().label(c as u32)
                )))
            }
            _ => map[c] = Some(v),
        }
    }
    let map: Vec<u32> = map.into_iter().map(|v| v.expect("every class is hit")).collect();
    let mut report = Report::new();
    report.witness(
        "glue.homomorphism",
        homomorphism_witness(exp.locality.pg(), tp, &map, max_len),
    );
    // Aut_{ker φ}(R) against Aut_{ker φ₂}(R).
    let r_bits: Vec<usize> = bits(data.r).collect();
    let lp = &exp.locality;
    let from_kernel: HashSet<Vec<Option<usize>>> = lp
        .normalizer_ids(data.r)
        .into_iter()
        .filter(|&c| map[c as usize] == 0)
        .map(|c| r_bits.iter().map(|&a| lp.conj_s(c, a)).collect())
        .collect();
    let m_to_s: HashMap<usize, usize> = data
        .s_in_m
        .iter()
        .enumerate()
        .filter_map(|(a, x)| x.map(|x| (x, a)))
        .collect();
    let from_k2: HashSet<Vec<Option<usize>>> = (0..m.order())
        .filter(|&g| phi2[g] == 0)
        .map(|g| {
            r_bits
                .iter()
                .map(|&a| m_to_s.get(&m.conj(data.s_in_m[a].unwrap(), g)).copied())
                .collect()
        })
        .collect();
    report.witness(
        "glue.kernel-automizer",
        (from_kernel != from_k2).then(|| {
            format!(
                "|Aut_ker φ(R)| = {}, |Aut_ker φ₂(R)| = {}",
                from_kernel.len(),
                from_k2.len()
            )
        }),
    );
    Ok(Glued { map, report })
}

/// `None` if `map: a → b` is a rigid isomorphism: a bijection fixing `S`
/// elementwise that matches inverses, domains, products and objects.
pub fn rigid_isomorphism_witness(a: &Locality, b: &Locality, map: &[u32]) -> Option<String> {
    if a.len() != b.len() || map.len() != a.len() {
        return Some(format!("sizes {} and {}", a.len(), b.len()));
    }
    let image: HashSet<u32> = map.iter().copied().collect();
    if image.len() != map.len() {
        return Some("map is not injective".into());
    }
    if a.sylow().order() != b.sylow().order() {
        return Some("Sylow subgroups differ".into());
    }
    for (i, &sa) in a.s_elem().iter().enumerate() {
        if map[sa as usize] != b.s_elem()[i] {
            return Some(format!("{} is not fixed", a.sylow().label(i)));
        }
    }
    if a.delta() != b.delta() {
        return Some("object sets differ".into());
    }
    let (pa, pb) = (a.pg(), b.pg());
    for f in 0..a.len() as u32 {
        let mf = map[f as usize];
        if map[pa.inv(f) as usize] != pb.inv(mf) {
            return Some(format!("inverse of {}", pa.label(f)));
        }
        for i in 0..a.sylow().order() {
            if a.conj_s(f, i) != b.conj_s(mf, i) {
                return Some(format!("conjugation by {}", pa.label(f)));
            }
        }
        for g in 0..a.len() as u32 {
            let lhs = pa.pair(f, g).map(|h| map[h as usize]);
            if lhs != pb.pair(mf, map[g as usize]) {
                return Some(format!("product {}", pa.show(&[f, g])));
            }
        }
    }
    None
}

/// `L/N` with the projection `σ`.
#[derive(Debug)]
pub struct Quotient {
    pub locality: Locality,
    pub sigma: Vec<u32>,
    /// The maximal cosets, indexed by element of `L/N`.
    pub cosets: Vec<FixedBitSet>,
}

/// Quotient by a partial normal subgroup, through maximal cosets `Nf`.
pub fn quotient(l: &Locality, n_set: &FixedBitSet) -> Result<Quotient, ConstructionError> {
    let pg = l.pg();
    if !pg.is_partial_normal(n_set)? {
        return Err(ConstructionError::NotPartialNormal(format!(
            "{} elements",
            n_set.count_ones(..)
        )));
    }
    let size = l.len();
    let cosets: Vec<FixedBitSet> = (0..size as u32)
        .map(|f| pg.set_of(n_set.ones().filter_map(|x| pg.pair(x as u32, f))))
        .collect();
    let maximal: Vec<usize> = (0..size)
        .filter(|&f| {
            !(0..size).any(|g| cosets[f].is_subset(&cosets[g]) && cosets[f] != cosets[g])
        })
        .collect();
    let mut distinct: Vec<FixedBitSet> = Vec::new();
    for &f in &maximal {
        if !distinct.contains(&cosets[f]) {
            distinct.push(cosets[f].clone());
        }
    }
    distinct.sort_by_key(|c| c.ones().next());
    let mut sigma = vec![u32::MAX; size];
    for (i, c) in distinct.iter().enumerate() {
        for f in c.ones() {
            if sigma[f] != u32::MAX {
                return Err(ConstructionError::Inconsistent(format!(
                    "{} lies in two maximal cosets",
                    pg.label(f as u32)
                )));
            }
            sigma[f] = i as u32;
        }
    }
    if let Some(f) = sigma.iter().position(|&x| x == u32::MAX) {
        return Err(ConstructionError::Inconsistent(format!(
            "{} lies in no maximal coset",
            pg.label(f as u32)
        )));
    }
    let q = distinct.len();
    let inconsistent = |what: &str| ConstructionError::Inconsistent(format!("quotient {what} is not well defined"));
    // The image of S.
    let s = l.sylow();
    let mut sbar_ids: Vec<u32> = Vec::new();
    let mut s_pos = vec![0usize; s.order()];
    for (i, &sid) in l.s_elem().iter().enumerate() {
        let c = sigma[sid as usize];
        s_pos[i] = match sbar_ids.iter().position(|&x| x == c) {
            Some(j) => j,
            None => {
                sbar_ids.push(c);
                sbar_ids.len() - 1
            }
        };
    }
    let k = sbar_ids.len();
    let mut table = vec![vec![usize::MAX; k]; k];
    for a in 0..s.order() {
        for b in 0..s.order() {
            let v = s_pos[s.mul(a, b)];
            let slot = &mut table[s_pos[a]][s_pos[b]];
            if *slot != usize::MAX && *slot != v {
                return Err(inconsistent("Sylow product"));
            }
            *slot = v;
        }
    }
    let sbar_labels: Vec<String> = sbar_ids.iter().map(|&c| label_of(pg, &distinct[c as usize])).collect();
    let sbar = Arc::new(PGroup::from_table(s.prime(), &table, sbar_labels)?);
    let mask_bar = |p: Mask| bits(p).fold(0u64, |acc, i| acc | 1 << s_pos[i]);
    let delta = ObjectSet::new(l.delta().masks().iter().map(|&p| mask_bar(p)));

    let mut prod = vec![NONE; q * q];
    for f in 0..size as u32 {
        for g in 0..size as u32 {
            if let Some(h) = pg.pair(f, g) {
                let slot = &mut prod[sigma[f as usize] as usize * q + sigma[g as usize] as usize];
                if *slot != NONE && *slot != sigma[h as usize] {
                    return Err(inconsistent("product"));
                }
                *slot = sigma[h as usize];
            }
        }
    }
    let mut inv = vec![u32::MAX; q];
    for f in 0..size as u32 {
        let slot = &mut inv[sigma[f as usize] as usize];
        let v = sigma[pg.inv(f) as usize];
        if *slot != u32::MAX && *slot != v {
            return Err(inconsistent("inversion"));
        }
        *slot = v;
    }
    let mut conj = vec![UNDEF; q * k];
    for f in 0..size as u32 {
        for i in 0..s.order() {
            if let Some(j) = l.conj_s(f, i) {
                let slot = &mut conj[sigma[f as usize] as usize * k + s_pos[i]];
                let v = s_pos[j] as u8;
                if *slot != UNDEF && *slot != v {
                    return Err(inconsistent("conjugation"));
                }
                *slot = v;
            }
        }
    }
    let labels = distinct.iter().map(|c| label_of(pg, c)).collect();
    let threading = Threading::new(k, conj, delta.masks().iter().copied());
    let qpg = PartialGroup::new(labels, inv, prod, Some(threading))?;
    let locality = Locality::new(qpg, sbar, sbar_ids, delta, None)?;
    Ok(Quotient {
        locality,
        sigma,
        cosets: distinct,
    })
}

fn label_of(pg: &PartialGroup, coset: &FixedBitSet) -> String {
    format!("N{}", pg.label(coset.ones().next().unwrap_or(0) as u32))
}

/// `None` if `σ` is a homomorphism with kernel exactly `N`.
pub fn quotient_witness(l: &Locality, q: &Quotient, n_set: &FixedBitSet, max_len: usize) -> Option<String> {
    if let Some(w) = homomorphism_witness(l.pg(), q.locality.pg(), &q.sigma, max_len) {
        return Some(w);
    }
    let kernel = l.pg().set_of((0..l.len() as u32).filter(|&f| q.sigma[f as usize] == 0));
    (kernel != *n_set).then(|| {
        format!(
            "kernel has {} elements, N has {}",
            kernel.count_ones(..),
            n_set.count_ones(..)
        )
    })
}

/// `MN = {Π(m, n) : (m, n) ∈ D}`.
pub fn product_pns(l: &Locality, a: &FixedBitSet, b: &FixedBitSet) -> Result<FixedBitSet, ConstructionError> {
    let pg = l.pg();
    for x in [a, b] {
        if !pg.is_partial_normal(x)? {
            return Err(ConstructionError::NotPartialNormal(format!(
                "{} elements",
                x.count_ones(..)
            )));
        }
    }
    let out = pg.set_of(
        a.ones()
            .flat_map(|m| b.ones().filter_map(move |n| pg.pair(m as u32, n as u32))),
    );
    if !pg.is_partial_normal(&out)? {
        return Err(ConstructionError::Inconsistent("MN is not partial normal".into()));
    }
    Ok(out)
}

/// `None` when `(MN) ∩ S = (M ∩ S)(N ∩ S)`.
pub fn product_support_witness(l: &Locality, a: &FixedBitSet, b: &FixedBitSet, ab: &FixedBitSet) -> Option<String> {
    let s = l.sylow();
    let (ta, tb, tab) = (l.mask_of_set(a), l.mask_of_set(b), l.mask_of_set(ab));
    let joined = s.join(ta, tb);
    (joined != tab).then(|| format!("(MN)∩S = {}, (M∩S)(N∩S) = {}", s.describe(tab), s.describe(joined)))
}

/// Deletes the object `1` from a realized locality, expands back at `R = 1`
/// inside the whole group, glues onto the original and checks that the glued
/// map is a rigid isomorphism. Returns the expansion, gluing and rigidity
/// checks in one report.
pub fn expansion_round_trip(full: &Locality, f: &FusionSystem, max_len: usize) -> Result<Report, ConstructionError> {
    let real = full
        .realization()
        .ok_or_else(|| ConstructionError::Inconsistent("locality has no realization".into()))?;
    if !full.delta().contains(1) {
        return Err(ConstructionError::HypothesisViolation {
            clause: "R".into(),
            witness: "1 is not an object".into(),
        });
    }
    let sub: Vec<Mask> = full.delta().masks().iter().copied().filter(|&p| p != 1).collect();
    if sub.is_empty() {
        return Err(ConstructionError::HypothesisViolation {
            clause: "R".into(),
            witness: "no object besides 1".into(),
        });
    }
    let l = full.restrict(&sub)?;
    let g = real.group.clone();
    let data = ExpansionData::from_realization(&l, 1, &g.whole())?;
    let exp = expand(&l, f, data)?;
    let phi1: Vec<u32> = l
        .realization()
        .expect("restriction keeps the realization")
        .ids
        .iter()
        .map(|&x| full.id_of_group_element(x).expect("L is inside the full locality"))
        .collect();
    let phi2 = (0..g.order())
        .map(|x| full.id_of_group_element(x))
        .collect::<Option<Vec<u32>>>()
        .ok_or_else(|| ConstructionError::Inconsistent("the group is larger than the locality".into()))?;
    let glued = glue_homomorphism(&exp, &l, full, &phi1, &phi2, max_len)?;
    let mut r = Report::new();
    r.extend(exp.report);
    r.extend(glued.report);
    r.witness("exp.rigid-isomorphism", rigid_isomorphism_witness(&exp.locality, full, &glued.map));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::locality::{DeltaSelector, GroupModel};

    fn s4() -> GroupModel {
        GroupModel::new(Arc::new(catalog::symmetric(4)), 2).unwrap()
    }

    fn phi_by_realization(src: &Locality, target: &Locality) -> Vec<u32> {
        let ids = &src.realization().unwrap().ids;
        ids.iter().map(|&g| target.id_of_group_element(g).unwrap()).collect()
    }

    #[test]
    fn expansion_adds_the_trivial_subgroup() {
        let model = s4();
        let f = model.fusion();
        let full = model.locality_for(&DeltaSelector::Subcentric).unwrap();
        let sub: Vec<Mask> = full.delta().masks().iter().copied().filter(|&p| p != 1).collect();
        let l = full.restrict(&sub).unwrap();
        let data = ExpansionData::from_realization(&l, 1, &model.group.whole()).unwrap();
        let exp = expand(&l, f, data).unwrap();
        assert!(exp.report.all_pass(), "{}", exp.report);
        assert_eq!(exp.locality.len(), 24);
        assert!(exp.locality.check_axioms(3).all_pass());
        let phi1 = phi_by_realization(&l, &full);
        let phi2: Vec<u32> = (0..24).map(|g| full.id_of_group_element(g).unwrap()).collect();
        let glued = glue_homomorphism(&exp, &l, &full, &phi1, &phi2, 3).unwrap();
        assert!(glued.report.all_pass(), "{}", glued.report);
        assert_eq!(rigid_isomorphism_witness(&exp.locality, &full, &glued.map), None);
    }

    #[test]
    fn round_trip_through_the_trivial_subgroup() {
        for g in [catalog::symmetric(4), catalog::sl23(), catalog::alternating(4), catalog::quaternion8()] {
            let model = GroupModel::new(Arc::new(g), 2).unwrap();
            let full = model.locality_for(&DeltaSelector::Subcentric).unwrap();
            let r = expansion_round_trip(&full, model.fusion(), 3).unwrap();
            assert!(r.all_pass(), "{r}");
        }
    }

    #[test]
    fn expansion_by_a_central_involution() {
        let model = s4();
        let f = model.fusion();
        let full = model.locality_for(&DeltaSelector::Subcentric).unwrap();
        let z = model.s.center_of(model.s.full());
        let drop: HashSet<Mask> = f.class_of(z).into_iter().chain([1]).collect();
        let sub: Vec<Mask> = full.delta().masks().iter().copied().filter(|p| !drop.contains(p)).collect();
        let l = full.restrict(&sub).unwrap();
        let c = model.group.centralizer(&model.subgroup_of(z));
        let data = ExpansionData::from_realization(&l, z, &c).unwrap();
        let exp = expand(&l, f, data).unwrap();
        assert!(exp.report.all_pass(), "{}", exp.report);
        let target = full.restrict(&f.f_closure(&sub.iter().copied().chain([z]).collect::<Vec<_>>())).unwrap();
        assert_eq!(exp.locality.delta(), target.delta());
        let phi1 = phi_by_realization(&l, &target);
        let cg = c.element_vec();
        let phi2: Vec<u32> = cg.iter().map(|&g| target.id_of_group_element(g).unwrap()).collect();
        let glued = glue_homomorphism(&exp, &l, &target, &phi1, &phi2, 3).unwrap();
        assert!(glued.report.all_pass(), "{}", glued.report);
        assert_eq!(rigid_isomorphism_witness(&exp.locality, &target, &glued.map), None);
    }

    #[test]
    fn degenerate_expansion_is_rigidly_the_same() {
        let model = s4();
        let f = model.fusion();
        let l = model.locality_for(&DeltaSelector::Subcentric).unwrap();
        let v4 = model.mask_of(&model.group.big_o_p(2));
        let data = ExpansionData::from_realization(&l, v4, &model.group.whole()).unwrap();
        let exp = expand(&l, f, data).unwrap();
        assert!(exp.report.all_pass(), "{}", exp.report);
        let id: Vec<u32> = (0..l.len() as u32).collect();
        assert_eq!(exp.locality.len(), l.len());
        assert_eq!(rigid_isomorphism_witness(&exp.locality, &l, &id), None);
    }

    #[test]
    fn hypothesis_is_a_gate() {
        let model = s4();
        let f = model.fusion();
        let l = model.locality_for(&DeltaSelector::Centric).unwrap();
        // M too small to contain N_S(R) as a Sylow subgroup.
        let data = ExpansionData::from_realization(&l, 1, &model.group.big_o_p(2));
        let err = data.and_then(|d| expand(&l, f, d)).unwrap_err();
        assert!(matches!(err, ConstructionError::HypothesisViolation { .. }), "{err}");
    }

    #[test]
    fn gluing_to_the_trivial_partial_group() {
        let model = s4();
        let f = model.fusion();
        let full = model.locality_for(&DeltaSelector::Subcentric).unwrap();
        let sub: Vec<Mask> = full.delta().masks().iter().copied().filter(|&p| p != 1).collect();
        let l = full.restrict(&sub).unwrap();
        let exp = expand(&l, f, ExpansionData::from_realization(&l, 1, &model.group.whole()).unwrap()).unwrap();
        let one = quotient(&full, &full.pg().set_of(0..24)).unwrap();
        let glued = glue_homomorphism(&exp, &l, &one.locality, &vec![0; l.len()], &[0; 24], 3).unwrap();
        assert!(glued.map.iter().all(|&x| x == 0));
        assert!(glued.report.all_pass());
    }

    #[test]
    fn quotients_of_s4() {
        let model = s4();
        let l = model.locality_for(&DeltaSelector::Subcentric).unwrap();
        for h in model.group.normal_subgroups().unwrap() {
            let n = l.pg().set_of(h.elements().map(|g| l.id_of_group_element(g).unwrap()));
            let q = quotient(&l, &n).unwrap();
            assert_eq!(q.locality.len(), 24 / h.order());
            assert_eq!(quotient_witness(&l, &q, &n, 3), None);
            assert!(q.locality.check_axioms(3).all_pass(), "{}", q.locality.check_axioms(3));
            let t = model.mask_of(&h).count_ones() as usize;
            assert_eq!(q.locality.sylow().order(), 8 / t);
        }
        let not_normal = l.pg().set_of([0, 1]);
        assert!(matches!(quotient(&l, &not_normal), Err(ConstructionError::NotPartialNormal(_))));
    }

    #[test]
    fn products_absorb() {
        let model = s4();
        let l = model.locality_for(&DeltaSelector::Subcentric).unwrap();
        let sets: Vec<FixedBitSet> = model
            .group
            .normal_subgroups()
            .unwrap()
            .iter()
            .map(|h| l.pg().set_of(h.elements().map(|g| l.id_of_group_element(g).unwrap())))
            .collect();
        for a in &sets {
            for b in &sets {
                let ab = product_pns(&l, a, b).unwrap();
                let bigger = if a.is_subset(b) { b } else { a };
                if a.is_subset(b) || b.is_subset(a) {
                    assert_eq!(&ab, bigger);
                }
                assert_eq!(product_support_witness(&l, a, b, &ab), None);
            }
        }
    }
}
