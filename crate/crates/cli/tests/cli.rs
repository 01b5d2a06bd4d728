use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.chop"));
    p.to_string_lossy().into_owned()
}

fn chop(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_chop"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_accepts_the_worked_example() {
    let o = chop(&["check", &corpus("cloud_server")], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn exit_codes_distinguish_failures() {
    let syntax = chop(&["check", "-"], Some("proc M () (z:1) = close"));
    assert_eq!(syntax.status.code(), Some(2));
    assert!(stderr(&syntax).starts_with("-:"), "{}", stderr(&syntax));
    let ty = chop(&["check", "-"], Some("proc M () (z:1) = wait z. close z"));
    assert_eq!(ty.status.code(), Some(1));
    let fuel = chop(&["run", "--fuel", "2", &corpus("cloud_server")], None);
    assert_eq!(fuel.status.code(), Some(3));
    assert!(stdout(&fuel).ends_with("FuelExhausted after 2 steps\n"));
}

#[test]
fn json_diagnostics_carry_position_and_kind() {
    let o = chop(&["check", "--json", "-"], Some("proc M () (z:1) = close"));
    let rec: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(rec["kind"], "SyntaxError");
    assert_eq!((rec["line"].as_u64(), rec["col"].as_u64()), (Some(1), Some(24)));
}

#[test]
fn run_reaches_the_normal_form() {
    let o = chop(&["run", &corpus("close_wait")], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[1], "-> [1⊥ @ root] close z");
    assert_eq!(lines[2], "NormalForm after 1 steps");
}

#[test]
fn translation_checks_in_the_first_order_fragment() {
    for name in ["cloud_server", "chop_invoke", "sugar_procedure", "open_invoke"] {
        let t = chop(&["translate", &corpus(name)], None);
        assert_eq!(t.status.code(), Some(0), "{name}: {}", stderr(&t));
        let c = chop(&["check", "--cp", "-"], Some(&stdout(&t)));
        assert_eq!(c.status.code(), Some(0), "{name}: {}\n{}", stdout(&t), stderr(&c));
    }
}

#[test]
fn higher_order_source_is_not_first_order() {
    let o = chop(&["check", "--cp", &corpus("ho_exchange")], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn correspondence_report() {
    let ok = chop(&["translate", "--correspondence", &corpus("chop_invoke")], None);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).lines().all(|l| l.contains("found in")));
    let gap = chop(&["translate", "--correspondence", "--json", &corpus("ho_forward")], None);
    assert_eq!(gap.status.code(), Some(1));
    let recs: Vec<serde_json::Value> = stdout(&gap).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(recs.iter().any(|r| r["found"] == false && r["rule"] == "η-⌈⌉"));
}

#[test]
fn runs_are_deterministic_per_seed() {
    let a = chop(&["trace", "--seed", "7", &corpus("server_twice")], None);
    let b = chop(&["trace", "--seed", "7", &corpus("server_twice")], None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn trace_records_every_step() {
    let o = chop(&["trace", "--json", &corpus("close_wait")], None);
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["rule"], "1⊥");
    assert_eq!(rec["family"], "Principal");
    assert_eq!(rec["term"], "close z");
}

#[test]
fn printed_programs_parse_and_check_again() {
    for (cmd, name) in
        [("desugar", "sugar_procedure"), ("desugar", "sugar_ho_parameter"), ("eliminate-chops", "chop_nested")]
    {
        let o = chop(&[cmd, &corpus(name)], None);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        if cmd == "eliminate-chops" {
            assert!(!stdout(&o).contains("let "), "{}", stdout(&o));
        }
        let c = chop(&["check", "-"], Some(&stdout(&o)));
        assert_eq!(c.status.code(), Some(0), "{cmd} {name}: {}\n{}", stdout(&o), stderr(&c));
    }
}
