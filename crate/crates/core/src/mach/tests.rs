use ::alloc::format;
use ::alloc::string::String;
use ::alloc::vec;
use ::alloc::vec::Vec;

use proptest::prelude::*;

use super::layout::{layout_usage, outgoing_ofs, Entry, Usage};
use super::*;
use crate::base::{Behavior, FunDef, Program, Signature, Typ};
use crate::linear::{self, LinearFunction};
use crate::locs::{MReg, Slot, SlotKind};
use crate::ops::Operation;
use crate::testutil::{linear_of, mach_of, CORPUS};

fn local(ty: Typ, ofs: i32) -> Slot {
    Slot::new(SlotKind::Local, ty, ofs)
}

fn main_sig() -> Signature {
    Signature { args: vec![], res: Some(Typ::Int) }
}

fn program<F>(f: F) -> Program<F> {
    Program { functions: vec![("main".into(), FunDef::Internal(f))], globals: vec![], main: "main".into() }
}

#[test]
fn layout_example() {
    let u = Usage {
        stacksize: 8,
        outgoing_words: 0,
        slots: [local(Typ::Int, 0)].into_iter().collect(),
        callee_save: [MReg::R(14), MReg::R(15)].into_iter().collect(),
    };
    let l = layout_usage(&u).unwrap();
    assert_eq!(l.delta[&Entry::Link], -4);
    assert_eq!(l.delta[&Entry::RetAddr], -8);
    assert_eq!(l.delta[&Entry::Slot(local(Typ::Int, 0))], -12);
    assert_eq!(l.delta[&Entry::Saved(MReg::R(14))], -16);
    assert_eq!(l.delta[&Entry::Saved(MReg::R(15))], -20);
    assert_eq!((l.stack_low, l.stack_high), (-24, 8));
    let empty = layout_usage(&Usage::default()).unwrap();
    assert_eq!((empty.stack_low, empty.delta.len()), (-8, 2));
}

#[test]
fn oversized_frames_are_rejected() {
    assert!(layout_usage(&Usage { outgoing_words: 1 << 29, ..Usage::default() }).is_err());
    assert!(layout_usage(&Usage { outgoing_words: (1 << 29) - 4, ..Usage::default() }).is_ok());
    assert!(layout_usage(&Usage { outgoing_words: (1 << 29) - 4, stacksize: 16, ..Usage::default() }).is_err());
}

/// Byte intervals of all entries and of the Cminor data are disjoint and
/// below zero, and fields are aligned to their size. Outgoing slots of
/// different calls share one area and are checked against its bounds.
fn check_layout(u: &Usage, l: &FrameLayout) -> Result<(), String> {
    let area = (-8 - 4 * u.outgoing_words, -8i64);
    let mut iv: Vec<(i64, i64)> = vec![(0, u.stacksize as i64), area];
    for (e, &o) in &l.delta {
        let size = e.size();
        if o >= 0 || o < l.stack_low || o + size > 0 {
            return Err(format!("{e:?} at {o} outside frame"));
        }
        if o % 4 != 0 || (size == 8 && o % 8 != 0) {
            return Err(format!("{e:?} at {o} misaligned"));
        }
        let span = (o as i64, o as i64 + size as i64);
        match e {
            Entry::Slot(s) if s.kind == SlotKind::Outgoing => {
                if span.0 < area.0 || span.1 > area.1 {
                    return Err(format!("{e:?} outside outgoing area"));
                }
            }
            _ => iv.push(span),
        }
    }
    for s in &u.slots {
        if !l.delta.contains_key(&Entry::Slot(*s)) {
            return Err(format!("{s} missing"));
        }
    }
    iv.sort();
    for w in iv.windows(2) {
        if w[0].1 > w[1].0 {
            return Err(format!("overlap {:?} {:?}", w[0], w[1]));
        }
    }
    Ok(())
}

fn usage_strategy() -> impl Strategy<Value = Usage> {
    let slot = (0..3u8, 0..12i32).prop_map(|(k, o)| match k {
        0 => local(Typ::Int, o),
        1 => local(Typ::Float, 2 * o),
        _ => Slot::new(SlotKind::Outgoing, if o % 2 == 0 { Typ::Float } else { Typ::Int }, o),
    });
    let reg = prop_oneof![(14u8..32).prop_map(MReg::R), (14u8..29).prop_map(MReg::F)];
    (0..64i32, proptest::collection::btree_set(slot, 0..12), proptest::collection::btree_set(reg, 0..8)).prop_map(
        |(ss, slots, cs)| {
            let ow = slots
                .iter()
                .filter(|s| s.kind == SlotKind::Outgoing)
                .map(|s| (s.ofs + s.words()) as i64)
                .max()
                .unwrap_or(0);
            Usage { stacksize: 4 * ss, outgoing_words: ow, slots, callee_save: cs }
        },
    )
}

proptest! {
    #[test]
    fn layouts_are_disjoint_and_aligned(u in usage_strategy()) {
        let l = layout_usage(&u).unwrap();
        prop_assert_eq!(check_layout(&u, &l), Ok(()));
    }
}

#[test]
fn corpus_layouts_are_disjoint_and_aligned() {
    for s in CORPUS {
        for (name, fd) in &linear_of(s.src).functions {
            let FunDef::Internal(f) = fd else { continue };
            let u = layout::usage(f);
            check_layout(&u, &layout(f).unwrap()).unwrap_or_else(|e| panic!("{}/{name}: {e}", s.name));
        }
    }
}

#[test]
fn stacking_examples() {
    let inc = Slot::new(SlotKind::Incoming, Typ::Int, 0);
    let f = LinearFunction {
        sig: main_sig(),
        stacksize: 0,
        code: vec![
            linear::Instr::GetStack(inc, MReg::R(14)),
            linear::Instr::SetStack(MReg::R(14), local(Typ::Int, 0)),
            linear::Instr::Return,
        ],
    };
    let m = transl_function(&f).unwrap();
    assert_eq!(
        m.code,
        vec![
            Instr::SetStack(MReg::R(14), -16, Typ::Int),
            Instr::GetParent(-12, Typ::Int, MReg::R(14)),
            Instr::SetStack(MReg::R(14), -12, Typ::Int),
            Instr::GetStack(-16, Typ::Int, MReg::R(14)),
            Instr::Return,
        ]
    );
    assert_eq!(outgoing_ofs(Typ::Int, 0), -12);
    assert_eq!(outgoing_ofs(Typ::Float, 2), -24);
    let plain = LinearFunction {
        sig: main_sig(),
        stacksize: 4,
        code: vec![linear::Instr::Op(Operation::IntConst(3), vec![], MReg::R(3)), linear::Instr::Return],
    };
    let m = transl_function(&plain).unwrap();
    assert_eq!(m.code, vec![Instr::Op(Operation::IntConst(3), vec![], MReg::R(3)), Instr::Return]);
    assert_eq!((m.stack_low, m.stack_high), (-8, 4));
}

fn mach(code: Vec<Instr>) -> MachFunction {
    MachFunction { sig: main_sig(), stack_low: -8, stack_high: 0, link_ofs: -4, retaddr_ofs: -8, code }
}

#[test]
fn frame_link_and_return_address_must_survive() {
    let ok = mach(vec![Instr::Op(Operation::IntConst(7), vec![], MReg::R(3)), Instr::Return]);
    assert_eq!(run_program(&program(ok), Default::default(), 100).unwrap().behavior, Behavior::Converges(vec![], 7));
    for ofs in [-4, -8] {
        let bad = mach(vec![
            Instr::Op(Operation::IntConst(7), vec![], MReg::R(3)),
            Instr::SetStack(MReg::R(3), ofs, Typ::Int),
            Instr::Return,
        ]);
        assert_eq!(run_program(&program(bad), Default::default(), 100).unwrap().behavior, Behavior::GoesWrong(vec![]));
    }
}

#[test]
fn corpus_mach_agrees_with_linear_and_preserves_callee_save() {
    let mut checked = 0;
    for s in CORPUS {
        let b0 = linear::run_program(&linear_of(s.src), s.world(), 3_000_000).unwrap().behavior;
        let m = mach_of(s.src);
        let b1 = run_program(&m, s.world(), 3_000_000).unwrap().behavior;
        assert!(b0.agrees_with(&b1), "{}: mach {b1} vs {b0}", s.name);
        checked += check_callee_save(&MachInterp::new(&m).unwrap(), s.world(), 3_000_000)
            .unwrap_or_else(|e| panic!("{}: {e}", s.name));
    }
    assert!(checked > 100);
}
