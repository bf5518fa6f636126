//! Golden tests of the command-line front end: verdict lines, witnesses and
//! the exit-code contract.

use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json")).display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_arboreal")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn with_fixtures(args: &[&str]) -> (i32, String, String) {
    let owned: Vec<String> =
        args.iter().map(|a| if a.ends_with(".json") { fixture(a.trim_end_matches(".json")) } else { a.to_string() }).collect();
    let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
    run(&refs)
}

#[test]
fn check_verdicts() {
    assert_eq!(with_fixtures(&["check", "--rel", "cltr", "-k", "3", "fix1.json", "fix2.json"]), (0, "TRUE\n".into(), String::new()));
    let (code, out, _) = with_fixtures(&["check", "--rel", "bisim", "-k", "2", "fix1.json", "fix2.json"]);
    assert_eq!(code, 1);
    assert_eq!(out, "FALSE\nSPOILER left -a-> a1, reply b1; left -c-> a3, no reply\n");
    let (code, out, _) = with_fixtures(&["check", "--rel", "cltr", "--exact", "fix3.json", "fix4.json"]);
    assert_eq!((code, out.as_str()), (1, "FALSE\nleft: {} -a-> {}!\n"));
    let (code, out, _) = with_fixtures(&["check", "--rel", "gltr", "-k", "1", "fix1.json", "fix2.json"]);
    assert_eq!((code, out.as_str()), (1, "FALSE\n{} -a-> {} runs 1 vs 2\n"));
    let (code, out, _) = with_fixtures(&["check", "--rel", "tr", "-k", "2", "fix1.json", "fix3.json"]);
    assert_eq!((code, out.as_str()), (1, "FALSE\nleft: {} -a-> {} -c-> {}\n"));
}

#[test]
fn distinguish_outputs() {
    assert_eq!(
        with_fixtures(&["distinguish", "--fragment", "bot", "fix3.json", "fix4.json"]).1,
        "(dia a (deadlock))\n"
    );
    assert_eq!(with_fixtures(&["distinguish", "--fragment", "bot", "fix3.json", "fix3.json"]), (0, "equivalent\n".into(), String::new()));
    assert_eq!(
        with_fixtures(&["distinguish", "--fragment", "graded", "-k", "1", "fix2.json", "fix1.json"]).1,
        "(gdia >= 2 a tt)\n"
    );
    assert_eq!(
        with_fixtures(&["distinguish", "--fragment", "diamond", "-k", "2", "fix1.json", "fix3.json"]).1,
        "(dia a (dia c tt))\n"
    );
    let (code, _, err) = with_fixtures(&["distinguish", "--fragment", "graded", "fix2.json", "fix1.json"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: "));
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("valid JSON")
}

#[test]
fn unravel_outputs() {
    let (code, out, _) = with_fixtures(&["unravel", "--comonad", "ML", "-k", "2", "fix4.json"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["universe"], serde_json::json!(["root", "m0.1", "m0.2"]));
    assert_eq!(v["forest"]["origin"]["m0.2"], "d2");
    let v = json(&with_fixtures(&["unravel", "--comonad", "PR", "-k", "1", "--len", "2", "loop.json"]).1);
    assert_eq!(v["forest"]["roots"], serde_json::json!(["s0.1", "s1.1"]));
    assert_eq!(v["universe"].as_array().unwrap().len(), 3);
    let v = json(&with_fixtures(&["unravel", "--comonad", "GRAFT", "-k", "1", "loop.json"]).1);
    assert_eq!(v["universe"].as_array().unwrap().len(), 2);
    assert_eq!(with_fixtures(&["unravel", "--comonad", "PR", "-k", "1", "loop.json"]).0, 2);
}

#[test]
fn games_and_eval() {
    let (code, out, _) = with_fixtures(&["game", "--type", "ef", "-r", "2", "chain2.json", "chain3.json"]);
    assert_eq!((code, out.as_str()), (1, "SPOILER\nleft x0, reply y0; right y2, reply x0 loses\n"));
    assert_eq!(with_fixtures(&["game", "--type", "ef", "-r", "1", "chain2.json", "chain3.json"]).1, "DUPLICATOR\n");
    assert_eq!(with_fixtures(&["game", "--type", "bf", "-k", "2", "fix1.json", "fix2.json"]).0, 0);
    assert_eq!(with_fixtures(&["game", "--type", "bf", "-k", "2", "--comonad", "TREE", "fix1.json", "fix2.json"]).0, 1);
    assert_eq!(with_fixtures(&["game", "--type", "ppeb", "-k", "1", "-n", "2", "chain2.json", "chain3.json"]).0, 0);
    assert_eq!(with_fixtures(&["eval", "--formula", "(deadlock)", "terminal.json"]), (0, "TRUE\n".into(), String::new()));
    assert_eq!(with_fixtures(&["eval", "--formula", "(dia a tt)", "terminal.json"]).0, 1);
    let (code, _, err) = with_fixtures(&["eval", "--formula", "(gdia > 1 a tt)", "fix1.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("offset 6"), "{err}");
}

#[test]
fn verify_and_errors() {
    let (code, out, _) = run(&["verify", "--suite", "prop85", "--size", "3", "-k", "3", "--samples", "100", "--seed", "7"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("SUITE prop85 SAMPLES 100 AGREE 100 FAIL 0\n"));
    assert_eq!(run(&["verify", "--suite", "nope"]).0, 2);
    assert_eq!(run(&["verify", "--suite", "cor74", "--size", "4"]).0, 2);
    assert_eq!(run(&["check", "--rel", "cltr", "-k", "1", "/nonexistent.json", "/nonexistent.json"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["verify", "--suite", "thm61", "--size", "3", "-k", "2", "--samples", "30", "--seed", "4"],
        vec!["unravel", "--comonad", "TREE", "-k", "3", "fix2.json"],
        vec!["distinguish", "--fragment", "graded", "-k", "2", "fix3.json", "fix4.json"],
    ] {
        assert_eq!(with_fixtures(&args), with_fixtures(&args));
    }
}
