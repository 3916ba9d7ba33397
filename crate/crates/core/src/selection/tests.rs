use alloc::format;
use alloc::vec;

use super::smart as sc;
use super::*;
use crate::base::{Behavior, Value, World};
use crate::cminor::{self, parse_expr, parse_program};
use crate::ops::{Addressing, Comparison, Condition, Operation};

fn var(x: &str) -> SelExpr {
    SelExpr::Var(x.into())
}

fn sel(src: &str) -> SelExpr {
    sel_expr(&parse_expr(src).unwrap())
}

#[test]
fn add_of_scaled_increment_becomes_muli_then_addi() {
    let e = sel("8 + (x + 1) * 4");
    assert_eq!(e, SelExpr::op(Operation::AddImm(12), vec![SelExpr::op(Operation::MulImm(4), vec![var("x")])]));
}

#[test]
fn rotate_idiom_becomes_single_rolm() {
    let e = sel("(x << 3) | (x >>u 29)");
    assert_eq!(e, SelExpr::op(Operation::Rolm(3, -1), vec![var("x")]));
}

#[test]
fn documented_constructor_cases() {
    assert_eq!(sc::and(var("x"), SelExpr::int(7)), SelExpr::op(Operation::Rolm(0, 7), vec![var("x")]));
    assert_eq!(
        sc::shl(var("x"), SelExpr::int(3)),
        SelExpr::op(Operation::Rolm(3, 0xFFFF_FFF8u32 as i32), vec![var("x")])
    );
    let r = |m| SelExpr::op(Operation::Rolm(3, m), vec![var("x")]);
    assert_eq!(sc::or(r(0xF0), r(0x0F)), r(0xFF));
    // Different subterms are not merged.
    let other = SelExpr::op(Operation::Rolm(3, 0x0F), vec![var("y")]);
    assert!(matches!(sc::or(r(0xF0), other), SelExpr::Op(Operation::Or, _)));
    let inner = sc::rolm(5, 0x0FF0, var("x"));
    assert_eq!(sc::rolm(4, 0xFF00, inner), SelExpr::op(Operation::Rolm(9, 0x0FF0 << 4 & 0xFF00), vec![var("x")]));
}

#[test]
fn immediates_and_folding() {
    assert_eq!(sel("x - 5"), SelExpr::op(Operation::AddImm(-5), vec![var("x")]));
    assert_eq!(sel("5 - x"), SelExpr::op(Operation::SubImm(5), vec![var("x")]));
    assert_eq!(sel("3 < x"), SelExpr::op(Operation::Cmp(Condition::CompImm(Comparison::Gt, 3)), vec![var("x")]));
    assert_eq!(sel("(2 + 3) * 4"), SelExpr::int(20));
    assert_eq!(sel("7 / 0"), SelExpr::op(Operation::Div, vec![SelExpr::int(7), SelExpr::int(0)]));
    assert_eq!(sel("~x"), SelExpr::op(Operation::XorImm(-1), vec![var("x")]));
    assert_eq!(sel("!(x < y)"), SelExpr::op(Operation::Cmp(Condition::Comp(Comparison::Ge)), vec![var("x"), var("y")]));
    // Modulus is synthesized from division.
    assert!(matches!(sel("x % y"), SelExpr::Op(Operation::Sub, _)));
}

#[test]
fn addressing_modes() {
    let load = |src| match sel(src) {
        SelExpr::Load(_, mode, args) => (mode, args.len()),
        e => panic!("not a load: {e}"),
    };
    assert_eq!(load("int32[\"g\" + 8]"), (Addressing::Global("g".into(), 8), 0));
    assert_eq!(load("int32[\"g\" + i]"), (Addressing::Based("g".into(), 0), 1));
    assert_eq!(load("int32[p + 4]"), (Addressing::Indexed(4), 1));
    assert_eq!(load("int32[p + i * 4]"), (Addressing::Indexed2, 2));
    assert_eq!(load("int32[addrstack(8)]"), (Addressing::Stack(8), 0));
    assert_eq!(load("int32[p]"), (Addressing::Indexed(0), 1));
}

#[test]
fn conditions() {
    assert_eq!(sc::cond(sel("x == 0")), CondExpr::Cond(Condition::CompImm(Comparison::Eq, 0), vec![var("x")]));
    assert_eq!(sc::cond(sel("1")), CondExpr::True);
    assert_eq!(sc::cond(sel("x")), CondExpr::Cond(Condition::CompImm(Comparison::Ne, 0), vec![var("x")]));
}

#[test]
fn random_soundness_smoke() {
    let r = check::check_operators(1, 300);
    assert!(r.failures.is_empty(), "{:#?}", r.failures);
    assert!(r.defined * 4 > r.trials, "too few defined trials: {} of {}", r.defined, r.trials);
    let r = check::check_rolm_law(2, 1000);
    assert!(r.failures.is_empty(), "{:#?}", r.failures);
}

#[test]
fn selection_preserves_behavior() {
    let src = r#"
var "tab" { int32 1, int32 2, int32 3, int32 4 }
extern "print_int" : int -> void;

"f"(x) : int -> int
{
  vars i, s;
  s = 0;
  i = 0;
  block { loop {
    if (i >= 4) { exit(0); } else { skip; }
    s = s + int32["tab" + i * 4] * ((i << 2) | (i >>u 30)) - (s % 7);
    "print_int"(s) : int -> void;
    i = i + 1;
  } }
  return s & 0xFF;
}

"main"() : -> int
{
  vars r;
  r = "f"(3) : int -> int;
  return r;
}
"#;
    let p = parse_program(src).unwrap();
    let world = || World::parse("int 0\n".repeat(8).as_str()).unwrap();
    let expected = cminor::run_program(&p, world(), 10_000).unwrap().behavior;
    let got = run_program(&sel_program(&p), world(), 10_000).unwrap().behavior;
    assert!(matches!(expected, Behavior::Converges(_, _)), "{expected}");
    assert_eq!(expected, got);
    let dump = print_program(&sel_program(&p));
    assert!(dump.contains("call \"print_int\""), "{dump}");
    let _ = format!("{}", Value::Int(0));
}
