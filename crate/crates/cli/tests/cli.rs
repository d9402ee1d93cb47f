use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opacity_cli::{parse_nts, serialize_nts};
use opacity_core::fixtures::{self, FixtureCatalog};
use tempfile::TempDir;

fn opacity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opacity"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes every catalog entry into a temporary directory.
struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let cat = FixtureCatalog::new();
        for id in cat.ids() {
            fs::write(
                dir.path().join(format!("{id}.nts")),
                serialize_nts(&cat.system(id).unwrap()),
            )
            .unwrap();
        }
        Workspace { dir }
    }

    fn sys(&self, id: &str) -> PathBuf {
        self.dir.path().join(format!("{id}.nts"))
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, text).unwrap();
        path
    }
}

#[test]
fn check_reports_verdicts_with_exit_codes() {
    let w = Workspace::new();
    let o = opacity(&["check", "--notion", "initso", p(&w.sys("prop-3.5-sigma2"))]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("InitSO: not opaque"));
    assert!(stdout(&o).contains("witness"));

    let o = opacity(&[
        "check",
        "--notion",
        "kso",
        "--k",
        "1",
        p(&w.sys("thm4.1-fig8")),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "KSO(1): opaque\n");

    let garbage = w.file("garbage.nts", "this is not a system\n");
    assert_eq!(
        code(&opacity(&["check", "--notion", "infso", p(&garbage)])),
        2
    );
    let missing = w.dir.path().join("missing.nts");
    assert_eq!(
        code(&opacity(&["check", "--notion", "infso", p(&missing)])),
        2
    );
}

#[test]
fn full_witness_is_replayed() {
    let w = Workspace::new();
    let o = opacity(&[
        "check",
        "--notion",
        "cso,infso",
        "--witness",
        p(&w.sys("thm4.1-fig9")),
    ]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert_eq!(out.matches("replay: ok").count(), 2, "{out}");
}

#[test]
fn usage_errors_exit_two() {
    let w = Workspace::new();
    let f = w.sys("exam4");
    assert_eq!(code(&opacity(&[])), 2);
    assert_eq!(code(&opacity(&["frobnicate"])), 2);
    assert_eq!(code(&opacity(&["check", "--notion", "kso", p(&f)])), 2);
    assert_eq!(
        code(&opacity(&["check", "--notion", "kso", "--k", "0", p(&f)])),
        2
    );
    assert_eq!(code(&opacity(&["check", "--notion", "nope", p(&f)])), 2);
    assert_eq!(code(&opacity(&["fixtures", "dump", "no-such-id"])), 2);
    assert_eq!(
        code(&opacity(&[
            "random",
            "--states",
            "0",
            "--inputs",
            "1",
            "--outputs",
            "1",
            "--density",
            "0.5",
            "--secret-frac",
            "0.5",
            "--seed",
            "1"
        ])),
        2
    );
}

#[test]
fn resource_cap_exits_three() {
    let w = Workspace::new();
    let f = w.sys("exam4");
    assert_eq!(
        code(&opacity(&[
            "check",
            "--notion",
            "infso",
            "--state-cap",
            "1",
            p(&f)
        ])),
        3
    );
    assert_eq!(code(&opacity(&["observer", "--state-cap", "1", p(&f)])), 3);
}

#[test]
fn fixture_verdicts_through_the_binary() {
    let w = Workspace::new();
    let cases: [(&str, &str, Option<&str>, i32); 10] = [
        ("prop-3.5-sigma1", "initso", None, 0),
        ("prop-3.5-sigma2", "cso", None, 1),
        ("thm4.1-fig7", "cso", None, 0),
        ("thm4.1-fig7", "initso", None, 1),
        ("thm4.1-fig8", "kso", Some("2"), 1),
        ("thm4.1-fig9", "initso", None, 0),
        ("thm4.1-fig10", "kso", Some("1"), 0),
        ("thm4.1-fig10", "initso", None, 1),
        ("exam4", "infso", None, 0),
        ("eq5-quotient", "infso", None, 0),
    ];
    for (id, notion, k, expected) in cases {
        let f = w.sys(id);
        let mut args = vec!["check", "--notion", notion];
        if let Some(k) = k {
            args.extend(["--k", k]);
        }
        args.push(p(&f));
        assert_eq!(code(&opacity(&args)), expected, "{id} {notion}");
    }
}

#[test]
fn quotient_matches_golden_file() {
    let w = Workspace::new();
    let part = w.file("exam4.part", "1 5\n2 6\n3 7\n4 8\n");
    let out = w.dir.path().join("q.nts");
    let o = opacity(&[
        "quotient",
        "--partition",
        p(&part),
        "--check-initsop",
        "--check-infsop",
        "--out",
        p(&out),
        p(&w.sys("exam4")),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("InitSOP condition: holds"));
    assert!(stdout(&o).contains("InfSOP condition: holds"));
    let golden = include_str!("golden/fig5_quotient.nts");
    let produced = fs::read_to_string(&out).unwrap();
    assert_eq!(produced, golden);
    assert_eq!(parse_nts(golden).unwrap(), fixtures::fig5_quotient());
}

#[test]
fn quotient_with_mixed_secrecy_fails_its_checks() {
    let w = Workspace::new();
    let part = w.file("mixed.part", "1 3\n2 6\n5 7\n4 8\n");
    let o = opacity(&[
        "quotient",
        "--partition",
        p(&part),
        "--check-infsop",
        p(&w.sys("exam4")),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("not secret-compatible"));
    let bad = w.file("bad.part", "1 2\n3 4 5 6 7 8\n");
    assert_eq!(
        code(&opacity(&[
            "quotient",
            "--partition",
            p(&bad),
            p(&w.sys("exam4"))
        ])),
        2
    );
}

#[test]
fn relation_kinds() {
    let w = Workspace::new();
    let rel = w.file("prop.rel", "1' 1\n2' 2\n3' 1\n4' 2\n");
    let (l, r) = (w.sys("prop-3.5-sigma1"), w.sys("prop-3.5-sigma2"));
    let run = |kind: &str| opacity(&["relation", "--kind", kind, p(&l), p(&r), p(&rel)]);
    assert_eq!(code(&run("sim")), 0);
    assert_eq!(code(&run("bisim")), 0);
    let o = run("initsop-sim");
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("clause 1a"));
    let o = run("infsop-bisim");
    assert_eq!(code(&o), 1);
    for c in ["1b", "2b", "2c"] {
        assert!(stdout(&o).contains(&format!("clause {c}:")), "{c}");
    }
    let unknown = w.file("bad.rel", "z 1\n");
    assert_eq!(
        code(&opacity(&[
            "relation",
            "--kind",
            "sim",
            p(&l),
            p(&r),
            p(&unknown)
        ])),
        2
    );
}

#[test]
fn refine_augment_random_and_fixtures() {
    let w = Workspace::new();
    let o = opacity(&["refine", p(&w.sys("exam4"))]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "1 5\n2 6\n3 7\n4 8\n");

    let o = opacity(&["augment", p(&w.sys("thm4.1-fig8"))]);
    assert_eq!(code(&o), 0);
    let aug = parse_nts(&stdout(&o)).unwrap();
    assert!(opacity_core::is_total(&aug));
    assert!(aug.state_index(opacity_core::PHI).is_some());

    let args = [
        "random",
        "--states",
        "4",
        "--inputs",
        "2",
        "--outputs",
        "2",
        "--density",
        "0.4",
        "--secret-frac",
        "0.5",
        "--seed",
        "11",
    ];
    let a = opacity(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&opacity(&args)));
    assert_eq!(parse_nts(&stdout(&a)).unwrap().num_states(), 4);

    let list = stdout(&opacity(&["fixtures", "list"]));
    assert!(list.lines().any(|l| l == "thm4.1-fig7"));
    assert!(list.contains("partition:exam4"));
    let dumped = stdout(&opacity(&["fixtures", "dump", "example-2.1"]));
    assert_eq!(parse_nts(&dumped).unwrap(), fixtures::example_2_1());
    assert_eq!(
        stdout(&opacity(&["fixtures", "dump", "partition:exam4"])),
        "1 5\n2 6\n3 7\n4 8\n"
    );
}

#[test]
fn observer_and_dot_outputs() {
    let w = Workspace::new();
    let dot = w.dir.path().join("obs.dot");
    let o = opacity(&[
        "observer",
        "--notion",
        "initso",
        "--dot",
        p(&dot),
        p(&w.sys("prop-3.5-sigma2")),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("observer: 4 states"));
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("fillcolor"));

    let o = opacity(&["observer", "--forward-only", p(&w.sys("exam4"))]);
    assert!(stdout(&o).starts_with("forward component: 2 states"));
    assert_eq!(
        code(&opacity(&[
            "observer",
            "--forward-only",
            "--backward-only",
            p(&w.sys("exam4"))
        ])),
        2
    );
}

#[test]
fn pwa_demo_prints_quotient_and_verdicts() {
    let w = Workspace::new();
    let dot = w.dir.path().join("pwa.dot");
    let o = opacity(&["demo", "pwa", "--dot", p(&dot)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("0 exceptions"));
    assert_eq!(parse_nts(&out).unwrap(), fixtures::eq5_quotient());
    for n in ["InitSO", "CSO", "KSO(8)", "InfSO"] {
        assert!(out.contains(&format!("# {n}: opaque")), "{n}");
    }
    assert!(fs::read_to_string(&dot)
        .unwrap()
        .contains("\"A1\" [label=\"A1/1\", peripheries=2]"));
}
