use locality_lab::constructions::{expansion_round_trip, quotient, quotient_witness};
use locality_lab::correspondence::{
    self as corr, check_regime, enumerate_normal_subsystems, enumerate_pns, normal_subsystems_from_model,
    product_subsystems, product_witness, property_star, subsystem_lemmas, verify_bijection, PartialNormalSubgroup,
};
use locality_lab::error::{ConstructionError, CorrespondenceError};
use locality_lab::fusion::FusionSystem;
use locality_lab::report::{Report, Verdict};
use locality_lab::Subgroup;

use crate::instance::{self, Instance};
use crate::render::Outcome;
use crate::{Common, Failure};

pub const ALL_CHECKS: [&str; 6] = ["axioms", "lemma-props", "bijection", "products", "expansion", "quotient"];

/// Bound on word length for homomorphism and product checks.
const WORD_BOUND: usize = 3;

fn echo_instance(out: &mut Outcome, inst: &Instance) {
    let l = &inst.locality;
    out.echo("group", &inst.name);
    out.echo("prime", l.prime());
    out.echo("delta", &inst.delta);
    out.echo("elements", l.len());
    out.echo("objects", l.delta().len());
    out.echo("sylow-order", l.sylow().order());
}

fn corr_failure(e: CorrespondenceError) -> Failure {
    Failure::Precondition(e.to_string())
}

pub fn build(c: &Common) -> Result<Outcome, Failure> {
    let inst = instance::load(c)?;
    let l = &inst.locality;
    let mut out = Outcome::new("build");
    echo_instance(&mut out, &inst);
    let f = l.fusion_system();
    let classes = f.classes().into_iter().filter(|cl| l.delta().contains(cl[0])).count();
    out.echo("object-classes", classes);
    match l.proper_witness() {
        None => out.echo("proper", "true"),
        Some(w) => {
            out.echo("proper", "false");
            out.echo("proper-witness", w);
        }
    }
    Ok(out)
}

/// `(subsystems, realizing normal subgroups, source)`.
type Oracle = (Vec<FusionSystem>, Vec<Option<Subgroup>>, &'static str);

fn oracle(inst: &Instance) -> Result<Oracle, Failure> {
    if let Some(m) = inst.model.as_ref().filter(|m| m.group.is_characteristic_p(m.p)) {
        let (es, ns): (Vec<_>, Vec<_>) = normal_subsystems_from_model(m)
            .map_err(corr_failure)?
            .into_iter()
            .map(|(e, n)| (e, Some(n)))
            .unzip();
        return Ok((es, ns, "model"));
    }
    let es = enumerate_normal_subsystems(inst.locality.fusion_system(), None, corr::DEFAULT_CANDIDATE_BOUND)
        .map_err(corr_failure)?;
    let n = es.len();
    Ok((es, vec![None; n], "search"))
}

/// The theorem needs a proper locality with `F^q ⊆ Δ ⊆ F^s`.
fn correspondence_preconditions(inst: &Instance) -> Result<(), Failure> {
    if let Some(w) = inst.locality.proper_witness() {
        return Err(Failure::Precondition(format!("locality is not proper: {w}")));
    }
    check_regime(&inst.locality).map_err(corr_failure)
}

pub fn verify(c: &Common, checks: Option<&str>) -> Result<Outcome, Failure> {
    let selected: Vec<&str> = match checks {
        None => ALL_CHECKS.to_vec(),
        Some(s) => s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect(),
    };
    if let Some(bad) = selected.iter().find(|x| !ALL_CHECKS.contains(x)) {
        return Err(Failure::Input(format!("unknown check {bad:?}")));
    }
    let inst = instance::load(c)?;
    let l = &inst.locality;
    let mut out = Outcome::new("verify");
    echo_instance(&mut out, &inst);
    out.echo("checks", selected.join(","));
    let wants = |x: &str| selected.contains(&x);
    let mut r = Report::new();
    if wants("axioms") {
        r.extend(l.check_axioms_default());
    }
    if wants("lemma-props") {
        r.extend(l.check_properties(WORD_BOUND));
    }
    if wants("bijection") || wants("products") || wants("quotient") {
        let pns = enumerate_pns(l, c.audit_bound).map_err(corr_failure)?;
        if wants("quotient") {
            quotient_checks(l, &pns.items, &mut r);
        }
        if wants("bijection") || wants("products") {
            correspondence_preconditions(&inst)?;
            let (es, ns, source) = oracle(&inst)?;
            out.echo("oracle", source);
            if wants("bijection") {
                let rep = verify_bijection(l, &es, c.audit_bound).map_err(corr_failure)?;
                r.extend(rep.report);
                r.push("bij.audit", rep.audit);
            }
            if wants("products") {
                product_checks(&inst, &pns.items, &es, &ns, &mut r)?;
            }
        }
    }
    if wants("expansion") {
        match expansion_round_trip(l, l.fusion_system(), WORD_BOUND) {
            Ok(rep) => r.extend(rep),
            Err(e @ ConstructionError::HypothesisViolation { .. }) => r.push("exp.round-trip", Verdict::Skipped(e.to_string())),
            Err(ConstructionError::Inconsistent(e)) if l.realization().is_none() => {
                r.push("exp.round-trip", Verdict::Skipped(e))
            }
            Err(e) => r.push("exp.round-trip", Verdict::Fail(e.to_string())),
        }
    }
    out.report = r;
    Ok(out)
}

fn quotient_checks(l: &locality_lab::locality::Locality, pns: &[PartialNormalSubgroup], r: &mut Report) {
    for (k, n) in pns.iter().enumerate() {
        let w = match quotient(l, &n.elements) {
            Err(e) => Some(e.to_string()),
            Ok(q) => quotient_witness(l, &q, &n.elements, WORD_BOUND).or_else(|| {
                q.locality
                    .check_axioms(WORD_BOUND)
                    .failures()
                    .next()
                    .map(|c| format!("quotient fails {}: {:?}", c.id, c.verdict))
            }),
        };
        r.witness(format!("quot.N{k:02}"), w);
    }
}

fn product_checks(
    inst: &Instance,
    pns: &[PartialNormalSubgroup],
    es: &[FusionSystem],
    ns: &[Option<Subgroup>],
    r: &mut Report,
) -> Result<(), Failure> {
    let l = &inst.locality;
    let f = l.fusion_system();
    for (i, e1) in es.iter().enumerate() {
        for c in subsystem_lemmas(f, e1).checks {
            r.push(format!("{}.E{i:02}", c.id), c.verdict);
        }
        let realized = match (&inst.model, &ns[i]) {
            (Some(m), Some(n)) => Some((m, n)),
            _ => None,
        };
        r.push(format!("star.E{i:02}"), property_star(l, e1, realized));
        for (j, e2) in es.iter().enumerate().skip(i) {
            let w = match product_subsystems(l, pns, e1, e2) {
                Ok(e) => product_witness(f, &e, e1, e2, es),
                Err(e) => Some(e.to_string()),
            };
            r.witness(format!("prod.E{i:02}.E{j:02}"), w);
        }
    }
    Ok(())
}

/// FNV-1a, for short stable ids.
fn fnv(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes
        .into_iter()
        .fold(0xcbf29ce484222325, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

fn generators(l: &locality_lab::locality::Locality, n: &PartialNormalSubgroup) -> Vec<String> {
    let pg = l.pg();
    let mut chosen = Vec::new();
    let mut have = pg.set_of([0]);
    for f in n.elements.ones() {
        if !have.contains(f) {
            chosen.push(f as u32);
            have = pg.partial_subgroup_closure(&pg.set_of(chosen.iter().copied()));
        }
    }
    chosen.iter().map(|&f| pg.label(f).to_string()).collect()
}

pub fn enumerate(c: &Common, pns_wanted: bool) -> Result<Outcome, Failure> {
    let inst = instance::load(c)?;
    let l = &inst.locality;
    let s = l.sylow();
    let mut out = Outcome::new(if pns_wanted { "enumerate pns" } else { "enumerate subsystems" });
    echo_instance(&mut out, &inst);
    let pns = enumerate_pns(l, c.audit_bound).map_err(corr_failure)?;
    out.report.push("enum.audit", pns.audit.clone());
    let pairing = correspondence_preconditions(&inst);
    let (es, _, source) = oracle(&inst)?;
    out.echo("oracle", source);
    // psi[k] = index of Ψ(N_k) in the oracle list.
    let psi: Vec<Option<usize>> = match &pairing {
        Ok(()) => pns
            .items
            .iter()
            .map(|n| corr::psi(l, n).ok().and_then(|e| es.iter().position(|x| *x == e)))
            .collect(),
        Err(Failure::Precondition(w) | Failure::Input(w)) => {
            out.echo("pairing", format!("unavailable: {w}"));
            vec![None; pns.items.len()]
        }
    };
    if pns_wanted {
        out.echo("count", pns.items.len());
        for (k, n) in pns.items.iter().enumerate() {
            let labels: Vec<&str> = n.elements.ones().map(|f| l.pg().label(f as u32)).collect();
            let id = fnv(labels.join("|").into_bytes());
            out.items.push((
                format!("N{k:02}"),
                vec![
                    ("size".into(), n.len().to_string()),
                    ("support".into(), s.subgroup_id(n.support)),
                    ("generators".into(), generators(l, n).join(" ")),
                    ("id".into(), format!("{id:016x}")),
                    ("psi".into(), psi[k].map_or("-".into(), |j| format!("E{j:02}"))),
                ],
            ));
        }
    } else {
        out.echo("count", es.len());
        for (j, e) in es.iter().enumerate() {
            let id = fnv(e.isos().flat_map(|m| m.iter().copied().chain([0xFE])));
            let pre = psi.iter().position(|&x| x == Some(j));
            out.items.push((
                format!("E{j:02}"),
                vec![
                    ("support".into(), s.subgroup_id(e.support())),
                    ("support-order".into(), e.support().count_ones().to_string()),
                    ("isomorphisms".into(), e.num_isos().to_string()),
                    ("id".into(), format!("{id:016x}")),
                    ("pns".into(), pre.map_or("-".into(), |k| format!("N{k:02}"))),
                ],
            ));
        }
    }
    Ok(out)
}
