use std::sync::Arc;

use locality_lab::error::GroupError;
use locality_lab::group::is_prime;
use locality_lab::io::{self, GroupSpec};
use locality_lab::locality::{DeltaSelector, GroupModel, Locality};
use locality_lab::pgroup::Mask;

use crate::{Common, Failure};

/// A built or loaded locality, with its group when one is known.
pub struct Instance {
    pub name: String,
    pub spec: Option<GroupSpec>,
    pub model: Option<GroupModel>,
    pub locality: Locality,
    pub delta: String,
}

fn read(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn group_failure(e: GroupError) -> Failure {
    match e {
        GroupError::SizeBoundExceeded { .. } | GroupError::DegreeTooLarge { .. } => Failure::Precondition(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

fn pre(e: impl std::fmt::Display) -> Failure {
    Failure::Precondition(e.to_string())
}

/// `explicit:` members, each a comma-separated list of cycle generators,
/// separated by `;`.
fn parse_explicit(model: &GroupModel, text: &str) -> Result<Vec<Mask>, Failure> {
    let g = &model.group;
    let mut out = Vec::new();
    for member in text.split(';').map(str::trim).filter(|m| !m.is_empty()) {
        let perms = member
            .split(',')
            .map(|c| locality_lab::Perm::from_cycles(g.degree(), c.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Input(e.to_string()))?;
        let h = g.subgroup_from_perms(&perms).map_err(group_failure)?;
        let m = model.mask_of(&h);
        if m.count_ones() as usize != h.order() {
            return Err(Failure::Precondition(format!("{member} does not lie in the Sylow subgroup")));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(Failure::Input("explicit delta has no members".into()));
    }
    Ok(out)
}

pub fn selector(model: &GroupModel, text: &str) -> Result<DeltaSelector, Failure> {
    Ok(match text {
        "cr-closure" => DeltaSelector::CrClosure,
        "centric" => DeltaSelector::Centric,
        "quasicentric" => DeltaSelector::Quasicentric,
        "subcentric" => DeltaSelector::Subcentric,
        "all" => DeltaSelector::All,
        other => match other.strip_prefix("explicit:") {
            Some(rest) => DeltaSelector::Generated(parse_explicit(model, rest)?),
            None => return Err(Failure::Input(format!("unknown delta selector {other:?}"))),
        },
    })
}

pub fn load(c: &Common) -> Result<Instance, Failure> {
    let inst = match &c.load {
        Some(path) => from_dump(&read(path)?)?,
        None => from_group(c)?,
    };
    if let Some(path) = &c.dump {
        let text = io::dump(&inst.locality, inst.spec.as_ref());
        std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(inst)
}

fn from_group(c: &Common) -> Result<Instance, Failure> {
    let path = c.group.as_ref().expect("clap requires --group or --load");
    let spec = GroupSpec::parse(&read(path)?).map_err(|e| Failure::Input(e.to_string()))?;
    let p = c
        .prime
        .or(spec.prime)
        .ok_or_else(|| Failure::Input("no prime: pass --prime or add a `prime:` line".into()))?;
    if !is_prime(p) {
        return Err(Failure::Input(format!("{p} is not prime")));
    }
    let g = spec.build().map_err(group_failure)?;
    if g.order() % p as usize != 0 {
        return Err(Failure::Precondition(format!("{p} does not divide |G| = {}", g.order())));
    }
    let model = GroupModel::new(Arc::new(g), p).map_err(pre)?;
    let delta_text = c.delta.as_deref().unwrap_or("subcentric");
    let sel = selector(&model, delta_text)?;
    let locality = model.locality_for(&sel).map_err(pre)?;
    Ok(Instance {
        name: spec.name.clone(),
        delta: delta_text.to_string(),
        spec: Some(spec),
        model: Some(model),
        locality,
    })
}

fn from_dump(text: &str) -> Result<Instance, Failure> {
    let d = io::load(text).map_err(|e| Failure::Input(e.to_string()))?;
    let l = d.locality;
    // The model is used for oracles only when it induces the same fusion.
    let model = match l.realization() {
        Some(r) => GroupModel::new(r.group.clone(), l.prime())
            .ok()
            .filter(|m| m.fusion() == l.fusion_system()),
        None => None,
    };
    Ok(Instance {
        name: d.group.as_ref().map_or_else(|| "loaded".into(), |g| g.name.clone()),
        spec: d.group,
        model,
        locality: l,
        delta: "loaded".into(),
    })
}
