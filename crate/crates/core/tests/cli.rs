//! CLI contract tests: output lines and exit codes.

use std::process::{Command, Output};

fn write(dir: &std::path::Path, name: &str, content: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamsem")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn eval_exit_codes_and_result_lines() {
    let dir = std::env::temp_dir().join("teamsem-cli-eval");
    std::fs::create_dir_all(&dir).unwrap();
    let m = write(&dir, "m.structure", "domain: a b c d\nrel P/1: a b c\n");
    let m4 = write(&dir, "m4.structure", "domain: a b c d\nrel P/1: a b c d\n");
    let unit = write(&dir, "unit.team", "vars:\n-\n");
    let empty = write(&dir, "empty.team", "vars: x\n");

    // exactly-three holds on a structure with |P| = 3
    let out = run(&[
        "eval",
        "--structure",
        m.to_str().unwrap(),
        "--team",
        unit.to_str().unwrap(),
        "--expr",
        "(Q.exactly3 x) P(x)",
    ]);
    assert_eq!(stdout(&out).trim(), "RESULT true");
    assert_eq!(out.status.code(), Some(0));

    // the empty team satisfies everything
    let out = run(&[
        "eval",
        "--structure",
        m.to_str().unwrap(),
        "--team",
        empty.to_str().unwrap(),
        "--expr",
        "(Q.exactly3 x) (P(x) & ~P(x))",
    ]);
    assert_eq!(stdout(&out).trim(), "RESULT true");
    assert_eq!(out.status.code(), Some(0));

    // the bounded clause rejects the enlarging witness when |P| = 4
    let out = run(&[
        "eval",
        "--bounded",
        "--structure",
        m4.to_str().unwrap(),
        "--team",
        unit.to_str().unwrap(),
        "--expr",
        "(Q.exactly3 x) P(x)",
    ]);
    assert_eq!(stdout(&out).trim(), "RESULT false");
    assert_eq!(out.status.code(), Some(1));

    // malformed input: exit 2
    let out = run(&[
        "eval",
        "--structure",
        m.to_str().unwrap(),
        "--team",
        unit.to_str().unwrap(),
        "--expr",
        "(E x",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equiv_rewrite_and_primality() {
    let out = run(&["equiv", "(A x/{y}) P(x)", "(A x) P(x)"]);
    assert!(stdout(&out).starts_with("RESULT true cases="));
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["equiv", "(E x) P(x)", "(A x) P(x)"]);
    let text = stdout(&out);
    assert!(text.starts_with("RESULT false"));
    // counterexample block re-parses: structure, team, formulas, note
    assert!(text.contains("domain:") && text.contains("vars:") && text.contains("note:"));
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["rewrite", "--expr", "((E x) P(x) | Q(y))", "--rule", "weak_extract"]);
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().starts_with("RULE weak_extract AT - Z={x}"));
    assert_eq!(text.lines().last().unwrap(), "(E x) (P(x) | /{x} Q(y))");
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["prenex", "--expr", "((E x) P(x) & (E x) Q(x))"]);
    assert!(stdout(&out).contains("RULE and_extract"));
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["primality", "--expr", "(E x)(E y/{x}) R(x,y)"]);
    assert!(stdout(&out).starts_with("REDUCED"));
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["primality", "--expr", "(A x)(A y)(E z/{x}) R(x,y,z)"]);
    assert!(stdout(&out).starts_with("STUCK"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_and_qinfo() {
    let out = run(&["check", "empty_team", "--size", "2"]);
    let first = stdout(&out);
    let first = first.lines().next().unwrap();
    assert!(first.starts_with("SUITE empty_team HOLDS cases="));
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["check", "no_such_suite"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["qinfo", "most", "--size", "3"]);
    let text = stdout(&out);
    assert!(text.contains("TABLE"));
    assert!(text.contains("monotone=true"));
    assert!(text.contains("emptyset_free=true"));
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["qinfo", "hat_exists", "--size", "2"]);
    assert!(stdout(&out).contains("team_monotone=true"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn quantifier_config_file() {
    let dir = std::env::temp_dir().join("teamsem-cli-qcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let q = write(
        &dir,
        "q.quantifiers",
        "mostowski my_most = 2*card(S) >= card(M)\nteam lifted = liftE(exactly2)\n",
    );
    let m = write(&dir, "m.structure", "domain: a b c\nrel P/1: a b\n");
    let unit = write(&dir, "unit.team", "vars:\n-\n");
    let out = run(&[
        "eval",
        "--quantifiers",
        q.to_str().unwrap(),
        "--structure",
        m.to_str().unwrap(),
        "--team",
        unit.to_str().unwrap(),
        "--expr",
        "(Q.my_most x) P(x)",
    ]);
    assert_eq!(stdout(&out).trim(), "RESULT true");

    let out = run(&[
        "eval",
        "--quantifiers",
        q.to_str().unwrap(),
        "--structure",
        m.to_str().unwrap(),
        "--team",
        unit.to_str().unwrap(),
        "--expr",
        "(TQ.lifted x) P(x)",
    ]);
    assert_eq!(stdout(&out).trim(), "RESULT true");
    assert_eq!(out.status.code(), Some(0));
}
