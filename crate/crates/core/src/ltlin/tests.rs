use ::alloc::vec;
use ::alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::linearize::{check_enum, reachable};
use super::*;
use crate::base::{FunDef, Program, Signature, Typ};
use crate::locs::{Loc, MReg};
use crate::ltl::{self, LtlFunction};
use crate::ops::{Comparison, Condition, Operation};
use crate::testutil::{ltl_of, CORPUS};

fn r(n: u8) -> Loc {
    Loc::Reg(MReg::R(n))
}

fn func(code: Vec<(u32, ltl::Instr)>) -> LtlFunction {
    LtlFunction {
        sig: Signature { args: vec![Typ::Int], res: Some(Typ::Int) },
        params: vec![r(3)],
        stacksize: 0,
        entrypoint: 1,
        code: code.into_iter().collect(),
    }
}

fn konst(n: i32, s: u32) -> ltl::Instr {
    ltl::Instr::Op(Operation::IntConst(n), vec![], r(3), s)
}

/// 1: if r3 < 0 then 2 else 3; 2: r3 = 1 -> 4; 3: r3 = 2 -> 4; 4: return.
fn diamond() -> LtlFunction {
    let c = Condition::CompImm(Comparison::Lt, 0);
    func(vec![
        (1, ltl::Instr::Cond(c, vec![r(3)], 2, 3)),
        (2, konst(1, 4)),
        (3, konst(2, 4)),
        (4, ltl::Instr::Return(Some(r(3)))),
    ])
}

fn program(f: LtlFunction) -> Program<LtlFunction> {
    Program { functions: vec![("main".into(), crate::base::FunDef::Internal(f))], globals: vec![], main: "main".into() }
}

fn program_lin(f: LtlinFunction) -> LtlinProgram {
    Program { functions: vec![("main".into(), FunDef::Internal(f))], globals: vec![], main: "main".into() }
}

#[test]
fn diamond_places_then_arm_after_cond() {
    let f = diamond();
    let order = enumerate(&f);
    assert_eq!(order, vec![1, 2, 4, 3]);
    let g = linearize(&f, &order);
    let c = Condition::CompImm(Comparison::Ge, 0);
    assert_eq!(
        g.code,
        vec![
            Instr::Cond(c, vec![r(3)], 3),
            Instr::Op(Operation::IntConst(1), vec![], r(3)),
            Instr::Label(4),
            Instr::Return(Some(r(3))),
            Instr::Label(3),
            Instr::Op(Operation::IntConst(2), vec![], r(3)),
            Instr::Goto(4),
        ]
    );
}

#[test]
fn straight_line_has_no_gotos() {
    let f = func(vec![(1, konst(1, 2)), (2, ltl::Instr::Nop(3)), (3, ltl::Instr::Return(Some(r(3))))]);
    let g = linearize(&f, &enumerate(&f));
    assert_eq!(g.code, vec![Instr::Op(Operation::IntConst(1), vec![], r(3)), Instr::Return(Some(r(3)))]);
}

#[test]
fn enumeration_validator() {
    let f = diamond();
    assert!(validate_enum(&f, &[1, 2, 3, 4]));
    assert!(validate_enum(&f, &[4, 3, 2, 1]));
    assert!(!validate_enum(&f, &[1, 2, 4]), "missing reachable node");
    assert!(!validate_enum(&f, &[1, 2, 3, 4, 2]), "duplicate");
    assert!(!validate_enum(&f, &[1, 2, 3, 4, 9]), "unknown node");
    let mut g = diamond();
    g.code.insert(7, ltl::Instr::Nop(4));
    assert!(validate_enum(&g, &[1, 2, 3, 4]), "unreachable node may be omitted");
    assert!(validate_enum(&g, &[1, 2, 3, 4, 7]), "extra unreachable node is allowed");
    assert_eq!(reachable(&g).into_iter().collect::<Vec<_>>(), vec![1, 2, 3, 4]);
}

#[test]
fn entry_not_first_gets_a_jump() {
    let f = diamond();
    let g = linearize(&f, &[3, 4, 2, 1]);
    assert_eq!(g.code[0], Instr::Goto(1));
    for x in [-5, 5] {
        let mut m = f.clone();
        m.sig.args.clear();
        m.params.clear();
        m.code.insert(0, ltl::Instr::Op(Operation::IntConst(x), vec![], r(3), 1));
        m.entrypoint = 0;
        let expect = ltl::run_program(&program(m.clone()), Default::default(), 100).unwrap().behavior;
        assert!(matches!(expect, crate::base::Behavior::Converges(_, 1 | 2)));
        let q = program_lin(linearize(&m, &[3, 4, 2, 1, 0]));
        assert_eq!(run_program(&q, Default::default(), 100).unwrap().behavior, expect);
    }
}

/// Any valid enumeration yields an equivalent LTLin program.
#[test]
fn corpus_random_orders_preserve_behavior() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut gotos = (0, 0);
    for s in CORPUS {
        let p = ltl_of(s.src);
        let expect = ltl::run_program(&p, s.world(), 3_000_000).unwrap().behavior;
        let q = transl_program(&p).unwrap();
        let b = run_program(&q, s.world(), 3_000_000).unwrap().behavior;
        assert!(expect.agrees_with(&b), "{}: {b} vs {expect}", s.name);
        for _ in 0..5 {
            let q = p
                .transform(|_, f| {
                    let mut order: Vec<u32> = f.code.keys().copied().collect();
                    order.shuffle(&mut rng);
                    check_enum(f, &order).map(|_| linearize(f, &order))
                })
                .unwrap();
            let b = run_program(&q, s.world(), 3_000_000).unwrap().behavior;
            assert!(expect.agrees_with(&b), "{}: {b} vs {expect}", s.name);
            gotos.1 += q
                .functions
                .iter()
                .filter_map(|(_, f)| match f {
                    FunDef::Internal(f) => Some(linearize::goto_count(f)),
                    _ => None,
                })
                .sum::<usize>();
        }
        gotos.0 += 5 * q
            .functions
            .iter()
            .filter_map(|(_, f)| match f {
                FunDef::Internal(f) => Some(linearize::goto_count(f)),
                _ => None,
            })
            .sum::<usize>();
    }
    assert!(gotos.0 < gotos.1, "depth-first order should need fewer jumps than random: {gotos:?}");
}
