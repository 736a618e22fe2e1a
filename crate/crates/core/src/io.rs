//! Group files and locality dumps.
//!
//! A group file is a list of `key: value` lines:
//!
//! ```text
//! # the symmetric group of degree 4
//! name: s4
//! degree: 4
//! gens: (1 2);(1 2 3 4)
//! ```
//!
//! A dump records the element labels, inverses, product table, Sylow
//! embedding, conjugation rows and object set of a locality, plus the group
//! it came from when there is one.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{GroupError, InputError};
use crate::group::PermGroup;
use crate::locality::{Locality, ObjectSet, Realization};
use crate::partial::{PartialGroup, Threading, NONE, UNDEF};
use crate::perm::Perm;
use crate::pgroup::{Mask, PGroup};

pub const DUMP_HEADER: &str = "locality-lab-dump v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub name: String,
    pub degree: usize,
    /// Generators in 1-based cycle notation.
    pub gens: Vec<String>,
    /// Optional `prime:` line.
    pub prime: Option<u32>,
}

impl GroupSpec {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let (mut name, mut degree, mut gens, mut prime) = (None, None, None, None);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |reason: String| InputError::Syntax { line: i + 1, reason };
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| syntax(format!("expected `key: value`, found {line:?}")))?;
            let value = value.trim();
            match key.trim() {
                "name" => {
                    if value.is_empty() || value.contains(char::is_whitespace) {
                        return Err(syntax(format!("name must be a single token, found {value:?}")));
                    }
                    name = Some(value.to_string());
                }
                "degree" => {
                    degree = Some(value.parse::<usize>().map_err(|e| syntax(format!("degree: {e}")))?);
                }
                "gens" => {
                    gens = Some(value.split(';').map(|g| g.trim().to_string()).filter(|g| !g.is_empty()).collect());
                }
                "prime" => {
                    prime = Some(value.parse::<u32>().map_err(|e| syntax(format!("prime: {e}")))?);
                }
                other => return Err(syntax(format!("unknown field {other:?}"))),
            }
        }
        let spec = GroupSpec {
            name: name.ok_or(InputError::Missing("name"))?,
            degree: degree.ok_or(InputError::Missing("degree"))?,
            gens: gens.ok_or(InputError::Missing("gens"))?,
            prime,
        };
        spec.perms()?;
        Ok(spec)
    }

    pub fn perms(&self) -> Result<Vec<Perm>, GroupError> {
        self.gens.iter().map(|g| Perm::from_cycles(self.degree, g)).collect()
    }

    /// Generates the group, honouring `LOCALITY_LAB_MAX_ORDER`.
    pub fn build(&self) -> Result<PermGroup, GroupError> {
        PermGroup::generate(self.degree, self.perms()?)
    }

    pub fn render(&self) -> String {
        let mut out = format!("name: {}\ndegree: {}\ngens: {}\n", self.name, self.degree, self.gens.join(";"));
        if let Some(p) = self.prime {
            let _ = writeln!(out, "prime: {p}");
        }
        out
    }
}

/// A loaded dump.
#[derive(Debug)]
pub struct Dump {
    pub group: Option<GroupSpec>,
    pub locality: Locality,
}

fn cell(x: u32) -> String {
    if x == NONE {
        "-".into()
    } else {
        x.to_string()
    }
}

/// Text form of `l`; `group` is recorded so that a load can restore the
/// realization.
pub fn dump(l: &Locality, group: Option<&GroupSpec>) -> String {
    let pg = l.pg();
    let n = pg.len();
    let mut out = String::new();
    let _ = writeln!(out, "{DUMP_HEADER}");
    if let Some(g) = group {
        let _ = writeln!(out, "group-name: {}", g.name);
        let _ = writeln!(out, "group-degree: {}", g.degree);
        let _ = writeln!(out, "group-gens: {}", g.gens.join(";"));
    }
    let _ = writeln!(out, "prime: {}", l.prime());
    let _ = writeln!(out, "elements: {n}");
    for f in 0..n as u32 {
        let _ = writeln!(out, "label {f}: {}", pg.label(f));
    }
    let inv: Vec<String> = (0..n as u32).map(|f| pg.inv(f).to_string()).collect();
    let _ = writeln!(out, "inv: {}", inv.join(" "));
    for f in 0..n {
        let row: Vec<String> = pg.pair_table()[f * n..(f + 1) * n].iter().map(|&x| cell(x)).collect();
        let _ = writeln!(out, "prod {f}: {}", row.join(" "));
    }
    let s: Vec<String> = l.s_elem().iter().map(|x| x.to_string()).collect();
    let _ = writeln!(out, "sylow: {}", s.join(" "));
    let t = pg.threading().expect("locality threads through objects");
    for f in 0..n as u32 {
        let row: Vec<String> = t
            .conj_row(f)
            .iter()
            .map(|&x| if x == UNDEF { "-".into() } else { x.to_string() })
            .collect();
        let _ = writeln!(out, "conj {f}: {}", row.join(" "));
    }
    let objs: Vec<String> = l.delta().masks().iter().map(|m| format!("{m:x}")).collect();
    let _ = writeln!(out, "objects: {}", objs.join(" "));
    if let (Some(r), Some(_)) = (l.realization(), group) {
        for (f, &g) in r.ids.iter().enumerate() {
            let _ = writeln!(out, "realize {f}: {}", r.group.element(g).to_cycles());
        }
    }
    out
}

struct Lines<'a> {
    it: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn peek_key(&mut self) -> Option<&'a str> {
        self.it.peek().and_then(|(_, l)| l.split_once(':')).map(|(k, _)| k.trim())
    }

    /// The value of the next line, which must have key `key`.
    fn take(&mut self, key: &str) -> Result<(usize, &'a str), InputError> {
        match self.it.next() {
            Some((i, l)) => match l.split_once(':') {
                Some((k, v)) if k.trim() == key => Ok((i + 1, v.trim())),
                _ => Err(InputError::Syntax {
                    line: i + 1,
                    reason: format!("expected `{key}:`"),
                }),
            },
            None => Err(InputError::Missing("dump line")),
        }
    }
}

fn numbers<T: std::str::FromStr + Copy>(line: usize, v: &str, blank: T) -> Result<Vec<T>, InputError> {
    v.split_whitespace()
        .map(|x| {
            if x == "-" {
                Ok(blank)
            } else {
                x.parse::<T>().map_err(|_| InputError::Syntax {
                    line,
                    reason: format!("bad number {x:?}"),
                })
            }
        })
        .collect()
}

fn expect_len<T>(line: usize, v: &[T], n: usize) -> Result<(), InputError> {
    if v.len() != n {
        return Err(InputError::Syntax {
            line,
            reason: format!("expected {n} entries, found {}", v.len()),
        });
    }
    Ok(())
}

/// Reads a dump back. The tables are taken as given; the axioms are not
/// checked here, so a hand-edited dump loads and then fails verification.
pub fn load(text: &str) -> Result<Dump, InputError> {
    let mut lines = Lines {
        it: text.lines().enumerate().peekable(),
    };
    match lines.it.next() {
        Some((_, h)) if h.trim() == DUMP_HEADER => {}
        _ => {
            return Err(InputError::Syntax {
                line: 1,
                reason: format!("expected header {DUMP_HEADER:?}"),
            })
        }
    }
    let group = if lines.peek_key() == Some("group-name") {
        let name = lines.take("group-name")?.1.to_string();
        let (ln, d) = lines.take("group-degree")?;
        let degree = d.parse().map_err(|_| InputError::Syntax {
            line: ln,
            reason: "bad degree".into(),
        })?;
        let gens = lines.take("group-gens")?.1.split(';').map(|g| g.trim().to_string()).collect();
        Some(GroupSpec {
            name,
            degree,
            gens,
            prime: None,
        })
    } else {
        None
    };
    let (ln, p) = lines.take("prime")?;
    let p: u32 = p.parse().map_err(|_| InputError::Syntax {
        line: ln,
        reason: "bad prime".into(),
    })?;
    let (ln, n) = lines.take("elements")?;
    let n: usize = n.parse().map_err(|_| InputError::Syntax {
        line: ln,
        reason: "bad element count".into(),
    })?;
    let mut labels = Vec::with_capacity(n);
    for f in 0..n {
        labels.push(lines.take(&format!("label {f}"))?.1.to_string());
    }
    let (ln, v) = lines.take("inv")?;
    let inv = numbers(ln, v, NONE)?;
    expect_len(ln, &inv, n)?;
    let mut prod = Vec::with_capacity(n * n);
    for f in 0..n {
        let (ln, v) = lines.take(&format!("prod {f}"))?;
        let row = numbers(ln, v, NONE)?;
        expect_len(ln, &row, n)?;
        prod.extend(row);
    }
    let (ln, v) = lines.take("sylow")?;
    let s_elem: Vec<u32> = numbers(ln, v, NONE)?;
    let m = s_elem.len();
    if m == 0 || s_elem.iter().any(|&x| x as usize >= n) {
        return Err(InputError::Dump("Sylow elements out of range".into()));
    }
    let mut conj = Vec::with_capacity(n * m);
    for f in 0..n {
        let (ln, v) = lines.take(&format!("conj {f}"))?;
        let row: Vec<u8> = numbers(ln, v, UNDEF)?;
        expect_len(ln, &row, m)?;
        conj.extend(row);
    }
    let (ln, v) = lines.take("objects")?;
    let objects = v
        .split_whitespace()
        .map(|x| {
            Mask::from_str_radix(x, 16).map_err(|_| InputError::Syntax {
                line: ln,
                reason: format!("bad mask {x:?}"),
            })
        })
        .collect::<Result<Vec<Mask>, _>>()?;
    let mut realized = Vec::new();
    while lines.it.peek().is_some() {
        let f = realized.len();
        realized.push(lines.take(&format!("realize {f}"))?.1.to_string());
    }

    let s = sylow_from_tables(p, &s_elem, &labels, &prod, n)?;
    let pg = PartialGroup::new(labels, inv, prod, Some(Threading::new(m, conj, objects.iter().copied())))
        .map_err(|e| InputError::Dump(e.to_string()))?;
    let realization = match (&group, realized.is_empty()) {
        (Some(g), false) => Some(realization(g, &realized, n)?),
        (_, true) => None,
        (None, false) => return Err(InputError::Dump("realization without a group".into())),
    };
    let locality = Locality::new(pg, Arc::new(s), s_elem, ObjectSet::new(objects), realization)
        .map_err(|e| InputError::Dump(e.to_string()))?;
    Ok(Dump { group, locality })
}

fn sylow_from_tables(p: u32, s_elem: &[u32], labels: &[String], prod: &[u32], n: usize) -> Result<PGroup, InputError> {
    let m = s_elem.len();
    if !crate::group::is_prime(p) || !crate::group::is_p_power(m, p) {
        return Err(InputError::Dump(format!("{m} is not a power of {p}")));
    }
    let pos = |f: u32| s_elem.iter().position(|&x| x == f);
    let mut table = vec![vec![0usize; m]; m];
    for a in 0..m {
        for b in 0..m {
            let c = prod[s_elem[a] as usize * n + s_elem[b] as usize];
            table[a][b] = pos(c).ok_or_else(|| InputError::Dump("Sylow subgroup is not closed".into()))?;
        }
    }
    let s_labels = s_elem.iter().map(|&f| labels[f as usize].clone()).collect();
    PGroup::from_table(p, &table, s_labels).map_err(|e| InputError::Dump(e.to_string()))
}

fn realization(g: &GroupSpec, realized: &[String], n: usize) -> Result<Realization, InputError> {
    if realized.len() != n {
        return Err(InputError::Dump("realization does not cover every element".into()));
    }
    let group = g.build()?;
    let ids = realized
        .iter()
        .map(|c| {
            let perm = Perm::from_cycles(g.degree, c)?;
            group
                .index_of(&perm)
                .ok_or_else(|| GroupError::ElementNotInGroup(c.clone()))
        })
        .collect::<Result<Vec<usize>, GroupError>>()?;
    if ids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(InputError::Dump("realization is not in group order".into()));
    }
    Ok(Realization {
        group: Arc::new(group),
        ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locality::{DeltaSelector, GroupModel};

    const S4: &str = "# symmetric group\nname: s4\ndegree: 4\ngens: (1 2);(1 2 3 4)\n";

    #[test]
    fn parses_group_files() {
        let g = GroupSpec::parse(S4).unwrap();
        assert_eq!(g.gens, vec!["(1 2)", "(1 2 3 4)"]);
        assert_eq!(g.build().unwrap().order(), 24);
        assert_eq!(GroupSpec::parse(&g.render()).unwrap(), g);
        assert!(matches!(GroupSpec::parse("name: x\ndegree: 3\n"), Err(InputError::Missing("gens"))));
        assert!(matches!(
            GroupSpec::parse("name: x\ndegree: 3\ngens: (1 4)\n"),
            Err(InputError::Group(_))
        ));
        assert!(matches!(
            GroupSpec::parse("name: x\ncolour: red\n"),
            Err(InputError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn dump_round_trip() {
        let spec = GroupSpec::parse(S4).unwrap();
        let m = GroupModel::new(Arc::new(spec.build().unwrap()), 2).unwrap();
        for d in [DeltaSelector::CrClosure, DeltaSelector::Subcentric] {
            let l = m.locality_for(&d).unwrap();
            let text = dump(&l, Some(&spec));
            let back = load(&text).unwrap();
            assert_eq!(back.locality.structure_difference(&l), None);
            assert_eq!(back.locality.realization().unwrap().ids, l.realization().unwrap().ids);
            assert_eq!(back.locality.fusion_system(), l.fusion_system());
            assert_eq!(
                back.locality.check_axioms_default().to_string(),
                l.check_axioms_default().to_string()
            );
            assert_eq!(dump(&back.locality, back.group.as_ref()), text);
        }
    }

    #[test]
    fn edited_dump_loads_and_fails_axioms() {
        let spec = GroupSpec::parse(S4).unwrap();
        let m = GroupModel::new(Arc::new(spec.build().unwrap()), 2).unwrap();
        let l = m.locality_for(&DeltaSelector::Subcentric).unwrap();
        let text = dump(&l, None);
        // Swap two entries in the row of element 1.
        let edited: String = text
            .lines()
            .map(|line| {
                if let Some(row) = line.strip_prefix("prod 1: ") {
                    let mut v: Vec<&str> = row.split(' ').collect();
                    v.swap(2, 3);
                    format!("prod 1: {}\n", v.join(" "))
                } else {
                    format!("{line}\n")
                }
            })
            .collect();
        let back = load(&edited).unwrap();
        assert!(!back.locality.check_axioms_default().all_pass());
        assert!(load("nonsense").is_err());
    }
}
