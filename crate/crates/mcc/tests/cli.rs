use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcc")).args(args).output().unwrap()
}

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compile_writes_assembly() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("avg.cm");
    fs::copy(corpus("average.cm"), &src).unwrap();
    let o = mcc(&["compile", path(&src)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let asm = fs::read_to_string(dir.path().join("avg.s")).unwrap();
    assert!(asm.contains(".function \"average\""), "{asm}");
    assert!(asm.contains(".main \"main\""));

    let out = dir.path().join("x.s");
    assert!(mcc(&["compile", path(&src), "-o", path(&out)]).status.success());
    assert_eq!(fs::read_to_string(out).unwrap(), asm);
}

#[test]
fn dumps_are_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.s");
    let o = mcc(&["compile", path(&corpus("fib.cm")), "-o", path(&out), "--dump", "rtl", "--dump", "mach"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let rtl = s.find("== rtl ==").unwrap();
    let mach = s.find("== mach ==").unwrap();
    assert!(rtl < mach);

    let o = mcc(&["compile", path(&corpus("fib.cm")), "-o", path(&out), "--dump", "rtl-cse", "--no-cse"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("== rtl-cse == (stage disabled)"));
}

#[test]
fn run_prints_trace_and_behavior() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.s");
    let (src, world) = (corpus("externals.cm"), corpus("externals.world"));
    let mut outputs = Vec::new();
    for stage in ["cminor", "rtl", "asm"] {
        let o = mcc(&["compile", path(&src), "-o", path(&out), "--world", path(&world), "--run", stage]);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
        outputs.push(stdout(&o));
    }
    assert!(outputs[0].contains("read_int() -> 3"), "{}", outputs[0]);
    assert!(outputs.iter().all(|o| *o == outputs[0]));
}

#[test]
fn disabled_optimizations_keep_behavior() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.s");
    let src = corpus("gcd.cm");
    let world = corpus("gcd.world");
    let base = mcc(&["compile", path(&src), "-o", path(&out), "--world", path(&world), "--run", "asm"]);
    let off = mcc(&[
        "compile",
        path(&src),
        "-o",
        path(&out),
        "--world",
        path(&world),
        "--run",
        "asm",
        "--no-constprop",
        "--no-cse",
        "--no-tunnel",
    ]);
    assert!(base.status.success() && off.status.success());
    assert_eq!(stdout(&base), stdout(&off));
    let o = mcc(&["compile", path(&src), "-o", path(&out), "--run", "rtl-constprop", "--no-constprop"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cm");
    fs::write(&bad, "\"main\"() : -> int { return 1.0; }\n").unwrap();
    let o = mcc(&["compile", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("typecheck"));
    assert_eq!(mcc(&["compile", path(&dir.path().join("missing.cm"))]).status.code(), Some(1));
    assert_eq!(mcc(&["compile", path(&bad), "--dump", "nonsense"]).status.code(), Some(1));
    assert_eq!(mcc(&["--help"]).status.code(), Some(0));
}

#[test]
fn diff_reports_every_stage() {
    let o = mcc(&["diff", path(&corpus("switch.cm")), "--world", path(&corpus("switch.world"))]);
    assert!(o.status.success(), "{}", stdout(&o));
    let s = stdout(&o);
    for stage in ["cminor", "sel", "rtl", "ltl", "ltlin", "linear", "mach", "asm"] {
        assert!(s.contains(stage), "{stage} missing from {s}");
    }
}

#[test]
fn fuzz_is_deterministic_and_clean() {
    let dir = tempfile::tempdir().unwrap();
    let fail = dir.path().join("fail");
    let run = || mcc(&["fuzz", "--seeds", "20", "--size", "25", "--start", "7", "--jobs", "2", "--out", path(&fail)]);
    let a = run();
    assert!(a.status.success(), "{}", stdout(&a));
    assert_eq!(stdout(&a), stdout(&run()));
    assert!(stdout(&a).contains("20 seeds, 0 failures"));
    assert!(!fail.exists());
}

#[test]
fn gen_output_compiles_and_converges() {
    let dir = tempfile::tempdir().unwrap();
    let world = dir.path().join("p.world");
    let o = mcc(&["gen", "--seed", "11", "--size", "20", "--world", path(&world)]);
    assert!(o.status.success());
    let src = dir.path().join("p.cm");
    fs::write(&src, stdout(&o)).unwrap();
    assert_eq!(stdout(&o), stdout(&mcc(&["gen", "--seed", "11", "--size", "20"])));
    let d = mcc(&["diff", path(&src), "--world", path(&world)]);
    assert_eq!(d.status.code(), Some(0), "{}", stdout(&d));
}
