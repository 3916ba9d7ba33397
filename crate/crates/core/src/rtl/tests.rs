use alloc::vec;
use alloc::vec::Vec;

use super::gen::transl_function_ctx;
use super::typing::{check, infer, type_function};
use super::*;
use crate::base::{Behavior, Signature, Typ, Value};
use crate::cminor::{self, parse_program};
use crate::ops::{Comparison, Condition, Operation};
use crate::selection::{self, sel_program, SelFunction};
use crate::testutil::{sample, CORPUS};

fn sel_of(src: &str) -> selection::SelProgram {
    sel_program(&parse_program(src).unwrap())
}

fn main_of(p: &selection::SelProgram) -> &SelFunction {
    p.internal("main").unwrap()
}

fn rtl_main(src: &str) -> RtlFunction {
    transl_function(main_of(&sel_of(src))).unwrap()
}

#[test]
fn skip_adds_no_node() {
    let a = rtl_main(r#""main"() : -> int { return 0; }"#);
    let b = rtl_main(r#""main"() : -> int { skip; skip; return 0; }"#);
    assert_eq!(a.code.len(), b.code.len());
}

#[test]
fn loop_is_a_reserved_nop() {
    let f = rtl_main(r#""main"() : -> int { vars i; i = 0; loop { i = i + 1; } }"#);
    let nops: Vec<_> = f.code.iter().filter(|(_, i)| matches!(i, Instr::Nop(_))).collect();
    assert_eq!(nops.len(), 1);
    let (&n, Instr::Nop(body)) = nops[0] else { unreachable!() };
    // The body's last instruction jumps back to the nop.
    assert!(matches!(f.code[body], Instr::Op(Operation::AddImm(1), _, _, s) if s == n));
}

#[test]
fn exit_wires_to_enclosing_block_end() {
    let f = rtl_main(r#""main"() : -> int { vars x; block { block { exit(1); } x = 5; } return 7; }"#);
    // `x = 5` is skipped entirely: the entry computes 7 directly.
    assert!(matches!(&f.code[&f.entrypoint], Instr::Op(Operation::IntConst(7), ..)));
    let reachable = f.reachable();
    assert!(!f.code.iter().any(|(n, i)| matches!(i, Instr::Op(Operation::IntConst(5), ..)) && reachable.contains(n)));
}

#[test]
fn self_assignment_is_one_move() {
    let f = rtl_main(r#""main"() : -> int { vars x; x = x; return 0; }"#);
    let moves = f.code.values().filter(|i| matches!(i, Instr::Op(Operation::Move, ..))).count();
    assert_eq!(moves, 1);
}

#[test]
fn generation_errors() {
    use crate::structured::Stmt;
    let mut p = sel_of(r#""main"() : -> int { vars x; x = 1; return x; }"#);
    let f = main_of(&p).clone();
    let mut bad = f.clone();
    bad.body = Stmt::Assign("y".into(), selection::SelExpr::int(1));
    assert!(transl_function(&bad).unwrap_err().contains("undeclared"));
    let mut dup = f.clone();
    dup.body = Stmt::seq(
        Stmt::Label("l".into(), alloc::boxed::Box::new(Stmt::Skip)),
        Stmt::Label("l".into(), alloc::boxed::Box::new(Stmt::Skip)),
    );
    assert!(transl_function(&dup).unwrap_err().contains("duplicate label"));
    let mut twice = f;
    twice.vars.push("x".into());
    assert!(transl_function(&twice).is_err());
    p.functions.clear();
}

#[test]
fn generation_context_is_monotone_and_closed() {
    for s in CORPUS {
        let p = sel_of(s.src);
        for (name, fd) in &p.functions {
            let crate::base::FunDef::Internal(f) = fd else {
                continue;
            };
            let (rf, ctx, checks) = transl_function_ctx(f, true).unwrap_or_else(|e| panic!("{}/{name}: {e}", s.name));
            assert!(checks > 0);
            rf.check_closed().unwrap();
            assert!(rf.max_reg() < ctx.next_reg);
            assert!(rf.code.keys().all(|&n| n < ctx.next_node));
        }
    }
}

#[test]
fn corpus_behaves_identically() {
    for s in CORPUS {
        let cm = parse_program(s.src).unwrap();
        let sel = sel_program(&cm);
        let rtl = transl_program(&sel).unwrap();
        let fuel = 3_000_000;
        let b0 = cminor::run_program(&cm, s.world(), fuel).unwrap().behavior;
        let b1 = selection::run_program(&sel, s.world(), fuel).unwrap().behavior;
        let b2 = run_program(&rtl, s.world(), fuel).unwrap().behavior;
        assert!(b0.agrees_with(&b1), "{}: sel {b1} vs {b0}", s.name);
        assert!(b0.agrees_with(&b2), "{}: rtl {b2} vs {b0}", s.name);
        if s.name != "spin" {
            assert_eq!(b0, b2, "{}", s.name);
        }
    }
}

#[test]
fn switch_tree_matches_table_lookup() {
    let src = r#"
"f"(x) : int -> int {
  block { block { block { block {
    switch (x) { case 9: exit(0); case -3: exit(1); case 4: exit(2); case 9: exit(1); case 100: exit(0); case 5: exit(2); default: exit(3); }
  } return 1; } return 2; } return 3; }
  return 4;
}
"main"() : -> int { return 0; }"#;
    let cm = parse_program(src).unwrap();
    let rtl = transl_program(&sel_program(&cm)).unwrap();
    let table = [(9, 1), (-3, 2), (4, 3), (100, 1), (5, 3)];
    let interp = RtlInterp::new(&rtl).unwrap();
    let f = rtl.internal("f").unwrap();
    let mut probes: Vec<i32> = table.iter().flat_map(|&(k, _)| [k - 1, k, k + 1]).collect();
    probes.extend([i32::MIN, i32::MAX, 0]);
    for x in probes {
        let expected = table.iter().find(|&&(k, _)| k == x).map_or(4, |&(_, r)| r);
        let got = run_function(&interp, f, x);
        assert_eq!(got, Some(expected), "x = {x}");
    }
}

/// Runs `f(x)` directly from its entry point.
fn run_function(interp: &RtlInterp<'_>, f: &RtlFunction, x: i32) -> Option<i32> {
    use crate::base::{Mem, Semantics, World};
    let mut mem = Mem::new();
    let b = mem.alloc(0, f.stacksize);
    let mut regs = Regs::default();
    regs.set(f.params[0], Value::Int(x));
    let mut st = interp::RtlState::State { stack: Vec::new(), f, sp: Value::Ptr(b, 0), pc: f.entrypoint, regs, mem };
    let mut world = World::default();
    for _ in 0..1000 {
        if let interp::RtlState::Return { v: Value::Int(n), .. } = st {
            return Some(n);
        }
        st = interp.step(st, &mut world)?.1;
    }
    None
}

#[test]
fn type_reconstruction() {
    for s in CORPUS {
        let rtl = transl_program(&sel_program(&parse_program(s.src).unwrap())).unwrap();
        for (name, fd) in &rtl.functions {
            if let crate::base::FunDef::Internal(f) = fd {
                type_function(f).unwrap_or_else(|e| panic!("{}/{name}: {e}", s.name));
            }
        }
    }
    let rtl = transl_program(&sel_program(&parse_program(sample("average").src).unwrap())).unwrap();
    let f = rtl.internal("average").unwrap();
    let env = infer(f);
    assert!(check(f, &env).is_ok());
    // A float move is accepted; addf over an int register is not.
    let mut g = RtlFunction {
        sig: Signature { args: vec![Typ::Float], res: Some(Typ::Float) },
        params: vec![1],
        stacksize: 0,
        entrypoint: 1,
        code: [(1, Instr::Op(Operation::Move, vec![1], 2, 2)), (2, Instr::Return(Some(2)))].into_iter().collect(),
    };
    let env = infer(&g);
    assert_eq!(env[&2], Typ::Float);
    assert!(check(&g, &env).is_ok());
    g.code.insert(2, Instr::Op(Operation::AddF, vec![1, 3], 2, 3));
    g.code.insert(3, Instr::Return(Some(2)));
    let mut env = infer(&g);
    env.insert(3, Typ::Int);
    assert!(check(&g, &env).is_err());
    assert!(check(&g, &infer(&g)).is_ok());
}

#[test]
fn dump_format() {
    let rtl =
        transl_program(&sel_of(r#""main"() : -> int { vars x; x = 3; if (x < 4) x = x + 1; return x; }"#)).unwrap();
    let text = print_program(&rtl);
    assert!(text.contains("entry: "), "{text}");
    assert!(text.contains("cond lti[4](x1), succ 4 else 3"), "{text}");
    let lines: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit())).collect();
    let nodes: Vec<u32> = lines.iter().map(|l| l.trim().split(':').next().unwrap().parse().unwrap()).collect();
    assert!(nodes.windows(2).all(|w| w[0] > w[1]));
    let _ = (Comparison::Lt, Condition::Comp(Comparison::Lt), Behavior::Diverges(vec![]));
}
