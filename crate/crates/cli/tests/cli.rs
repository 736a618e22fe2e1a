use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locality-lab"))
        .args(args)
        .env_remove("LOCALITY_LAB_MAX_ORDER")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Compares with `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "golden {name} differs");
}

fn group(name: &str) -> String {
    fixture(&format!("{name}.grp")).display().to_string()
}

/// `[check id]` headers of a structured report, with verdicts.
fn verdicts(report: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut lines = report.lines();
    while let Some(l) = lines.next() {
        if let Some(id) = l.strip_prefix("[check ").and_then(|x| x.strip_suffix(']')) {
            let v = lines.next().unwrap().trim_start_matches("verdict: ").to_string();
            out.push((id.to_string(), v));
        }
    }
    out
}

#[test]
fn build_reports_properness() {
    let o = run(&["build", "--group", &group("s4"), "--prime", "2", "--delta", "subcentric"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("proper         true"));

    let o = run(&["build", "--group", &group("c2xs3"), "--prime", "2", "--delta", "subcentric"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("proper         false"));
    assert!(text.contains("proper-witness"));

    // A p-group is its own model.
    let o = run(&["build", "--group", &group("d8"), "--prime", "2"]);
    assert!(stdout(&o).contains("proper         true"));
}

#[test]
fn verify_s4_everything_passes() {
    let o = run(&["verify", "--group", &group("s4"), "--prime", "2", "--delta", "subcentric", "--emit", "structured"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    let v = verdicts(&text);
    let ids: Vec<&String> = v.iter().map(|x| &x.0).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted, "checks are sorted by id");
    assert!(v.iter().all(|(_, x)| x != "fail"));
    golden("verify_s4_subcentric.txt", &text);
}

#[test]
fn empty_check_list_is_trivially_green() {
    let o = run(&["verify", "--group", &group("s4"), "--prime", "2", "--checks", "", "--emit", "structured"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(verdicts(&text).is_empty());
    assert!(text.contains("checks: 0"));
}

#[test]
fn mutated_dump_fails_with_a_witness() {
    let dump = fixture("s4_mutated.dump").display().to_string();
    let o = run(&["verify", "--load", &dump, "--checks", "axioms", "--emit", "structured"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("verdict: fail"));
    assert!(text.contains("witness: "));
    golden("verify_s4_mutated.txt", &text);
}

#[test]
fn dump_and_load_agree() {
    let dir = std::env::temp_dir().join(format!("locality-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sl23.dump");
    let p = path.display().to_string();
    let built = run(&["verify", "--group", &group("sl23"), "--prime", "2", "--emit", "structured", "--dump", &p]);
    assert_eq!(code(&built), 0);
    let loaded = run(&["verify", "--load", &p, "--emit", "structured"]);
    assert_eq!(code(&loaded), 0);
    assert_eq!(verdicts(&stdout(&built)), verdicts(&stdout(&loaded)));
    // Dumping the loaded locality reproduces the file.
    let again = dir.join("again.dump");
    run(&["build", "--load", &p, "--dump", &again.display().to_string()]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), std::fs::read_to_string(&again).unwrap());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn enumerations() {
    let o = run(&["enumerate", "pns", "--group", &group("s4"), "--prime", "2", "--emit", "structured"]);
    assert_eq!(code(&o), 0);
    let pns = stdout(&o);
    assert!(pns.contains("[item N00]\nsize: 1\n"));
    assert!(pns.contains("size: 24\n"));
    golden("enumerate_s4_pns.txt", &pns);

    let o = run(&["enumerate", "subsystems", "--group", &group("s4"), "--prime", "2", "--emit", "structured"]);
    let subs = stdout(&o);
    let count = |t: &str| t.lines().find(|l| l.starts_with("count: ")).unwrap().to_string();
    assert_eq!(count(&pns), count(&subs));
    golden("enumerate_s4_subsystems.txt", &subs);

    let o = run(&["enumerate", "pns", "--group", &group("sl23"), "--prime", "2", "--emit", "structured"]);
    assert!(stdout(&o).contains("size: 8\nsupport: 8#"), "Q8 is a partial normal subgroup");
}

#[test]
fn exit_codes() {
    let bad = run(&["build", "--group", &group("bad_syntax"), "--prime", "2"]);
    assert_eq!(code(&bad), 2);
    let missing = run(&["build", "--group", "/no/such/file", "--prime", "2"]);
    assert_eq!(code(&missing), 2);
    let unknown = run(&["verify", "--group", &group("s4"), "--prime", "2", "--checks", "nonsense"]);
    assert_eq!(code(&unknown), 2);
    let coprime = run(&["build", "--group", &group("s4"), "--prime", "5"]);
    assert_eq!(code(&coprime), 3);
    let improper = run(&["verify", "--group", &group("c2xs3"), "--checks", "bijection"]);
    assert_eq!(code(&improper), 3);
    let outside = run(&["verify", "--group", &group("s4"), "--prime", "2", "--delta", "centric", "--checks", "bijection"]);
    assert_eq!(code(&outside), 3);
    let bounded = Command::new(env!("CARGO_BIN_EXE_locality-lab"))
        .args(["build", "--group", &group("s4"), "--prime", "2"])
        .env("LOCALITY_LAB_MAX_ORDER", "10")
        .output()
        .unwrap();
    assert_eq!(code(&bounded), 3);
}

#[test]
fn model_free_oracle_on_psl27() {
    let o = run(&["verify", "--group", &group("psl27"), "--prime", "2", "--checks", "bijection", "--emit", "structured"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("oracle: search"));
}
