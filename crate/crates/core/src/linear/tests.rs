use ::alloc::vec;
use ::alloc::vec::Vec;

use super::ast::Instr;
use super::interp::{entryfun, exitfun};
use super::parmove::parallel_assign;
use super::*;
use crate::base::{Signature, Typ, Value};
use crate::locs::{Loc, LocMap, MReg, Slot, SlotKind};
use crate::ltlin::{self, LtlinFunction};
use crate::ops::Operation;
use crate::rtl::FnRef;
use crate::testutil::{linear_of, ltl_of, ltlin_of, CORPUS};

fn r(n: u8) -> Loc {
    Loc::Reg(MReg::R(n))
}

fn local(ofs: i32) -> Slot {
    Slot::new(SlotKind::Local, Typ::Int, ofs)
}

fn lin(sig: Signature, params: Vec<Loc>, code: Vec<ltlin::Instr>) -> LtlinFunction {
    LtlinFunction { sig, params, stacksize: 0, code }
}

fn sig(args: Vec<Typ>) -> Signature {
    Signature { args, res: Some(Typ::Int) }
}

fn tmp(ty: Typ) -> Loc {
    Loc::Reg(crate::locs::temps(ty)[2])
}

/// All destination sets and source assignments over `locs`; checks the
/// emitted sequence against simultaneous assignment on every location.
fn check_all_moves(locs: &[Loc]) -> usize {
    let n = locs.len();
    let mut count = 0;
    for mask in 0u32..(1 << n) {
        let dsts: Vec<Loc> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| locs[i]).collect();
        let k = dsts.len();
        for code in 0..n.pow(k as u32) {
            let srcs: Vec<Loc> = (0..k).map(|j| locs[(code / n.pow(j as u32)) % n]).collect();
            let mut init = LocMap::new();
            for (i, l) in locs.iter().enumerate() {
                init.set(*l, if l.typ() == Typ::Int { Value::Int(i as i32 + 1) } else { Value::Float(i as f64 + 0.5) });
            }
            let mut expect = init.clone();
            parallel_assign(&mut expect, &srcs, &dsts);
            let mut got = init;
            let moves = parallel_move(&srcs, &dsts, tmp);
            for (s, d) in &moves {
                assert!(!locs.contains(d) || dsts.contains(d), "{srcs:?} -> {dsts:?} writes {d}");
                got.set(*d, got.get(*s));
            }
            for l in locs {
                assert_eq!(got.get(*l), expect.get(*l), "{srcs:?} -> {dsts:?}: {moves:?}");
            }
            count += 1;
        }
    }
    count
}

#[test]
fn parallel_moves_exhaustive_small() {
    let mixed = [r(3), r(4), Loc::local(Typ::Int, 0), Loc::Reg(MReg::F(1)), Loc::Reg(MReg::F(2))];
    assert!(check_all_moves(&mixed) > 1000);
}

#[test]
fn op_on_slots_is_reloaded_and_spilled() {
    let add = ltlin::Instr::Op(Operation::Add, vec![Loc::Slot(local(0)), r(3)], Loc::Slot(local(1)));
    let f = spill_reload(&lin(sig(vec![]), vec![], vec![add]));
    let t = crate::locs::INT_TEMPS[0];
    assert_eq!(
        f.code,
        vec![
            Instr::GetStack(local(0), t),
            Instr::Op(Operation::Add, vec![t, MReg::R(3)], t),
            Instr::SetStack(t, local(1))
        ]
    );
    let two = ltlin::Instr::Op(Operation::Add, vec![Loc::Slot(local(0)), Loc::Slot(local(1))], r(3));
    let f = spill_reload(&lin(sig(vec![]), vec![], vec![two]));
    assert_eq!(f.code[..2], [Instr::GetStack(local(0), MReg::R(11)), Instr::GetStack(local(1), MReg::R(12))]);
}

#[test]
fn register_operands_are_unchanged() {
    let i = ltlin::Instr::Op(Operation::Add, vec![r(3), r(4)], r(5));
    let f = spill_reload(&lin(sig(vec![]), vec![], vec![i, ltlin::Instr::Return(Some(r(3)))]));
    assert_eq!(f.code, vec![Instr::Op(Operation::Add, vec![MReg::R(3), MReg::R(4)], MReg::R(5)), Instr::Return]);
    let mv = ltlin::Instr::Op(Operation::Move, vec![r(7)], r(7));
    assert!(spill_reload(&lin(sig(vec![]), vec![], vec![mv])).code.is_empty());
}

#[test]
fn call_moves_arguments_and_result() {
    let s = sig(vec![Typ::Int, Typ::Int]);
    let call = ltlin::Instr::Call(s.clone(), FnRef::Symbol("f".into()), vec![r(4), r(3)], Some(Loc::Slot(local(0))));
    let f = spill_reload(&lin(sig(vec![]), vec![], vec![call]));
    let mv = |a, b| Instr::Op(Operation::Move, vec![MReg::R(a)], MReg::R(b));
    assert_eq!(
        f.code,
        vec![
            mv(4, 13),
            mv(3, 4),
            mv(13, 3),
            Instr::Call(s, FnRef::Symbol("f".into())),
            Instr::SetStack(MReg::R(3), local(0))
        ]
    );
}

#[test]
fn entry_moves_parameters() {
    let s = sig(vec![Typ::Int; 10]);
    let params: Vec<Loc> = (0..10).map(|i| if i < 5 { r(14 + i as u8) } else { Loc::local(Typ::Int, i) }).collect();
    let f = spill_reload(&lin(s, params, vec![]));
    let inc = |ofs| Slot::new(SlotKind::Incoming, Typ::Int, ofs);
    assert!(f.code.contains(&Instr::Op(Operation::Move, vec![MReg::R(3)], MReg::R(14))));
    assert!(f.code.contains(&Instr::GetStack(inc(1), MReg::R(12))));
    assert!(f.code.contains(&Instr::SetStack(MReg::R(12), local(9))));
}

#[test]
fn incoming_is_callers_outgoing() {
    let out = |ty, ofs| Loc::Slot(Slot::new(SlotKind::Outgoing, ty, ofs));
    let inc = |ty, ofs| Loc::Slot(Slot::new(SlotKind::Incoming, ty, ofs));
    let mut caller = LocMap::new();
    caller.set(out(Typ::Int, 0), Value::Int(5));
    caller.set(out(Typ::Float, 2), Value::Float(1.5));
    caller.set(Loc::local(Typ::Int, 0), Value::Int(9));
    caller.set(r(14), Value::Int(14));
    caller.set(r(3), Value::Int(3));
    let mut callee = entryfun(&caller);
    assert_eq!(callee.get(inc(Typ::Int, 0)), Value::Int(5));
    assert_eq!(callee.get(inc(Typ::Float, 2)), Value::Float(1.5));
    assert_eq!(callee.get(Loc::local(Typ::Int, 0)), Value::Undef);
    assert_eq!(callee.get(r(14)), Value::Int(14));
    callee.set(r(14), Value::Int(0));
    callee.set(r(3), Value::Int(33));
    callee.set(Loc::local(Typ::Int, 0), Value::Int(0));
    let back = exitfun(&caller, &callee);
    assert_eq!(back.get(r(14)), Value::Int(14));
    assert_eq!(back.get(r(3)), Value::Int(33));
    assert_eq!(back.get(Loc::local(Typ::Int, 0)), Value::Int(9));
    assert_eq!(back.get(out(Typ::Int, 0)), Value::Int(5));
}

#[test]
fn linear_code_uses_only_allocatable_or_temporary_registers() {
    for s in CORPUS {
        let p = linear_of(s.src);
        for (_, fd) in &p.functions {
            let crate::base::FunDef::Internal(f) = fd else {
                continue;
            };
            for i in &f.code {
                for r in i.regs() {
                    assert!(!r.is_reserved(), "{}: {i:?}", s.name);
                }
            }
        }
    }
}

#[test]
fn corpus_linear_agrees_with_ltl() {
    let mut spills = 0;
    for s in CORPUS {
        let l = ltl_of(s.src);
        let b0 = crate::ltl::run_program(&l, s.world(), 3_000_000).unwrap().behavior;
        let b1 = ltlin::run_program(&ltlin_of(s.src), s.world(), 3_000_000).unwrap().behavior;
        let q = linear_of(s.src);
        let b2 = run_program(&q, s.world(), 3_000_000).unwrap().behavior;
        assert!(b0.agrees_with(&b1), "{}: ltlin {b1} vs {b0}", s.name);
        assert!(b0.agrees_with(&b2), "{}: linear {b2} vs {b0}", s.name);
        spills += print_program(&q).matches("getstack").count();
    }
    assert!(spills > 0);
}

#[test]
fn tailcall_with_stack_arguments_becomes_call() {
    let s = sig(vec![Typ::Int; 9]);
    let args: Vec<Loc> = (3..12).map(r).collect();
    let f = spill_reload(&lin(
        sig(vec![]),
        vec![],
        vec![ltlin::Instr::Tailcall(s.clone(), FnRef::Symbol("g".into()), args)],
    ));
    assert_eq!(f.code[f.code.len() - 2..], [Instr::Call(s, FnRef::Symbol("g".into())), Instr::Return]);
}
