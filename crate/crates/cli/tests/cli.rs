use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn samples(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples");
    root.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_widthmin"))
        .args(args)
        .output()
        .unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_widthmin"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn minimize_reaches_width_two() {
    let o = run(&["minimize", &samples("adler5.fo")]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let f = widthmin::parse(line.trim()).unwrap();
    assert_eq!(f.width(), 2);
}

#[test]
fn width_from_stdin() {
    let o = run_stdin(&["width", "-"], "R(x,y)\n");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "2\n");
}

#[test]
fn equivalence_both_ways() {
    let a = samples("path_start.fo");
    let b = samples("path_end.fo");
    let o = run(&["equiv", &a, &b, "--semantic", "--max-domain", "2"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "equivalent\n"));
    let o = run(&["equiv", &a, &b]);
    assert_eq!(stdout(&o), "equivalent\n");
    let o = run(&["equiv", &a, &samples("reordering.fo")]);
    assert_eq!(stdout(&o), "not equivalent\n");
}

#[test]
fn report_is_json() {
    let o = run(&["minimize", &samples("reordering.fo"), "--report", "-"]);
    let text = stdout(&o);
    let json_start = text.find('{').unwrap();
    let v: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(
        (v["input_width"].as_u64(), v["output_width"].as_u64()),
        (Some(3), Some(2))
    );
}

#[test]
fn normalize_potentials_csv() {
    let o = run(&["normalize", &samples("path_start.fo"), "--potentials"]);
    let text = stdout(&o);
    let csv: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("step,")).collect();
    assert_eq!(csv[0], "step,rule,y_potential,yprime_potential");
    let ys: Vec<u64> = csv[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(ys.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn trace_replays() {
    let o = run(&["minimize", &samples("path_start.fo"), "--trace"]);
    let text = stdout(&o);
    let trace: widthmin::Trace = text.lines().skip(1).collect::<Vec<_>>().join("\n").parse().unwrap();
    let start = widthmin::parse(&std::fs::read_to_string(samples("path_start.fo")).unwrap()).unwrap();
    let nf = widthmin::replay(&start, &trace).unwrap();
    assert_eq!(nf, widthmin::y_normal_form(&start).unwrap().formula);
}

#[test]
fn tree_decomposition_output() {
    let o = run(&["tw", &samples("cycle.gr")]);
    let text = stdout(&o);
    assert!(text.starts_with("c width 2 (exact)\n"));
    let td_text: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    let (td, n) = widthmin::treewidth::io::read_td(&td_text).unwrap();
    assert_eq!(n, 5);
    let gr = widthmin::treewidth::io::read_gr(&std::fs::read_to_string(samples("cycle.gr")).unwrap()).unwrap();
    assert!(widthmin::treewidth::validate(&gr.hypergraph, &td).is_empty());
}

#[test]
fn evaluation_modes() {
    let f = samples("path_end.fo");
    let s = samples("small.st");
    assert_eq!(stdout(&run(&["eval", &f, &s])), "true\n");
    let open = run_stdin(&["eval", "-", &s, "--rows"], "exists y. E(x,y)\n");
    assert_eq!(stdout(&open), "x\n0\n1\n2\n");
    let count = run_stdin(&["eval", "-", &s, "--count"], "E(x,y)\n");
    assert_eq!(stdout(&count), "4\n");
}

#[test]
fn bench_reports_widths() {
    let o = run(&[
        "bench",
        &samples("adler4.fo"),
        &samples("adler4_d10.st"),
        "--repeats",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        (v["width_before"].as_u64(), v["width_after"].as_u64()),
        (Some(5), Some(2))
    );
    assert_eq!(v["agree"], true);
}

#[test]
fn jobs_keep_input_order() {
    let files = [samples("reordering.fo"), samples("adler5.fo"), samples("path_start.fo")];
    let serial = run(&["width", &files[0], &files[1], &files[2]]);
    let parallel = run(&["width", "--jobs", "3", &files[0], &files[1], &files[2]]);
    assert_eq!(serial.stdout, parallel.stdout);
    assert!(stdout(&serial).contains("adler5.fo <==\n6\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["width", "/nonexistent.fo"]).status.code(), Some(2));
    let bad = run_stdin(&["width", "-"], "R(x,\n");
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("-:"));
    let big = run(&["minimize", &samples("adler5.fo"), "--exact-threshold", "1"]);
    assert_eq!(big.status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["minimize", &samples("path_start.fo"), "--trace"]);
    let b = run(&["minimize", &samples("path_start.fo"), "--trace"]);
    assert_eq!(a.stdout, b.stdout);
}
