use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("instances")
        .join(name)
}

fn romdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_romdd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_example() {
    let out = romdd(&[
        "solve",
        path(&instance("pairs.csp")),
        "--stats-format",
        "kv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("outcome=solution\n"));
    assert!(text.contains("solution=1 3\n"));
    assert!(text.contains("constraint.1.nodes=4\n"));
}

#[test]
fn solve_forced_assignment() {
    let out = romdd(&[
        "solve",
        path(&instance("at_least_once.csp")),
        "--stats-format",
        "kv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("solution=2 2 2 1\n"));
}

#[test]
fn solve_contradiction_is_unsat() {
    for reduce in ["true", "false"] {
        let out = romdd(&[
            "solve",
            path(&instance("contradiction.csp")),
            "--full-reduce",
            reduce,
            "--validate",
        ]);
        assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
        assert!(stdout(&out).starts_with("outcome"));
    }
}

#[test]
fn solve_limit() {
    let out = romdd(&[
        "solve",
        path(&instance("first_is_minimum.csp")),
        "--max-phases",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn malformed_instance_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csp");
    std::fs::write(&bad, "csp 1\ndom 1 1 2\nfrobnicate\nend\n").unwrap();
    let out = romdd(&["solve", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn kv_stats_list_each_key_once() {
    let out = romdd(&[
        "solve",
        path(&instance("contradiction.csp")),
        "--stats-format",
        "kv",
    ]);
    let text = stdout(&out);
    let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
    let mut unique = keys.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(keys.len(), unique.len());
    assert!(text.lines().all(|l| l.contains('=')));
}

#[test]
fn compile_example() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("pairs.mdd");
    let out = romdd(&["compile", path(&instance("pairs.csp")), path(&out_file)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("4 nodes, 6 edges, 5 arcs"));
    let mdd = romdd::Mdd::from_text(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    assert!(romdd::structural_equal(&mdd, &romdd::families::example()));
}

#[test]
fn compile_empty_table_is_unsatisfiable() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("empty.csp");
    std::fs::write(
        &src,
        "csp 2\ndom 1 1 2\ndom 2 1 2\nctuples 2 1 2\nend\nend\n",
    )
    .unwrap();
    let out = romdd(&["compile", path(&src), path(&dir.path().join("x.mdd"))]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("unsatisfiable"));
    assert!(!dir.path().join("x.mdd").exists());
}

#[test]
fn conjoin_with_true_keeps_the_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("with_true.csp");
    let text = std::fs::read_to_string(instance("pairs.csp")).unwrap();
    let body = text.trim_end().strip_suffix("end").unwrap();
    let all_pairs: String = (1..=4)
        .flat_map(|a| (1..=3).map(move |b| format!("{a} {b}\n")))
        .collect();
    std::fs::write(&src, format!("{body}ctuples 2 1 2\n{all_pairs}end\nend\n")).unwrap();
    let alone = dir.path().join("alone.mdd");
    let conj = dir.path().join("conj.mdd");
    assert_eq!(
        romdd(&["compile", path(&instance("pairs.csp")), path(&alone)])
            .status
            .code(),
        Some(0)
    );
    let out = romdd(&["compile", path(&src), path(&conj), "--conjoin-all"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        std::fs::read_to_string(alone).unwrap(),
        std::fs::read_to_string(conj).unwrap()
    );
}

#[test]
fn compile_conjunction_of_contradiction() {
    let dir = tempfile::tempdir().unwrap();
    let out = romdd(&[
        "compile",
        path(&instance("contradiction.csp")),
        path(&dir.path().join("c.mdd")),
        "--conjoin-all",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unsatisfiable"));
    let split = dir.path().join("parts");
    let out = romdd(&[
        "compile",
        path(&instance("contradiction.csp")),
        path(&split),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(split.join("c1.mdd").exists() && split.join("c2.mdd").exists());
}

#[test]
fn compile_edge_limit() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("x.mdd");
    let out = romdd(&[
        "compile",
        path(&instance("first_is_minimum.csp")),
        path(&target),
        "--conjoin-all",
        "--max-edges",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!target.exists());
}

#[test]
fn check_bundled_instances() {
    for name in [
        "pairs.csp",
        "contradiction.csp",
        "at_least_once.csp",
        "first_is_minimum.csp",
    ] {
        for reduce in ["true", "false"] {
            let out = romdd(&["check", path(&instance(name)), "--full-reduce", reduce]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{name}: {}{}",
                stdout(&out),
                stderr(&out)
            );
            assert!(stdout(&out).starts_with("ok: 200 scripts"));
        }
    }
}

#[test]
fn check_zero_trials_is_a_no_op() {
    let out = romdd(&["check", path(&instance("pairs.csp")), "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("ok: 0 scripts, 0 operations"));
}

#[test]
fn check_seed_is_reproducible() {
    let run = |seed: &str| {
        stdout(&romdd(&[
            "check",
            path(&instance("pairs.csp")),
            "--trials",
            "5",
            "--seed",
            seed,
            "--print-scripts",
        ]))
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn check_replays_a_script_file() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.txt");
    std::fs::write(&script, "push\nremove 2:3\nassign 1:4\npop\nassign 1:4\n").unwrap();
    let out = romdd(&[
        "check",
        path(&instance("pairs.csp")),
        "--replay",
        path(&script),
        "--validate",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}{}",
        stdout(&out),
        stderr(&out)
    );
    assert_eq!(stdout(&out), "ok: 5 operations\n");
    std::fs::write(&script, "assign 3:1\n").unwrap();
    let out = romdd(&[
        "check",
        path(&instance("pairs.csp")),
        "--replay",
        path(&script),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
