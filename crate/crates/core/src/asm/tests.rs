use ::alloc::format;
use ::alloc::string::String;
use ::alloc::vec;
use ::alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gen::check_size;
use super::sim::{MachineState, PReg};
use super::*;
use crate::base::events::dump_trace;
use crate::base::int::{high, low};
use crate::base::{Behavior, FunDef, Program, Semantics, Signature, Typ, Value, World};
use crate::locs::MReg;
use crate::mach::{self, MachFunction, MachInterp};
use crate::ops::{Comparison, Condition, Operation};
use crate::testutil::{asm_of, mach_of, CORPUS};

fn main_sig() -> Signature {
    Signature { args: vec![], res: Some(Typ::Int) }
}

fn program<F>(f: F) -> Program<F> {
    Program { functions: vec![("main".into(), FunDef::Internal(f))], globals: vec![], main: "main".into() }
}

fn r(n: u8) -> MReg {
    MReg::R(n)
}

#[test]
fn high_low_examples() {
    assert_eq!((high(0x12345), low(0x12345)), (1, 0x2345));
    assert_eq!((high(-1), low(-1)), (0, -1));
    assert_eq!((high(0x8000), low(0x8000)), (1, -0x8000));
}

#[test]
fn high_low_identity_and_range() {
    let mut ns: Vec<i32> = vec![0, 1, -1, i32::MIN, i32::MAX, 0x7FFF, 0x8000, -0x8000, -0x8001, 0xFFFF, 0x10000];
    // 2^16 samples, one per high half, with a low half drawn from a stride.
    ns.extend((0..1u32 << 16).map(|h| ((h << 16) | (h.wrapping_mul(40503) & 0xFFFF)) as i32));
    for n in ns {
        let (h, l) = (high(n), low(n));
        assert!((-0x8000..0x8000).contains(&l), "{n:#x}");
        assert!((-0x8000..0x8000).contains(&h), "{n:#x}");
        assert_eq!(h.wrapping_shl(16).wrapping_add(l), n, "{n:#x}");
    }
}

#[test]
fn smart_constructor_examples() {
    assert_eq!(loadimm(r(5), 42), vec![Instr::Addi(r(5), r(0), Imm::Cst(42))]);
    assert_eq!(loadimm(r(5), 0x10000), vec![Instr::Addis(r(5), r(0), Imm::Cst(1))]);
    assert_eq!(
        addimm(r(5), r(0), 0x12345),
        vec![Instr::Addis(r(2), r(0), Imm::Cst(1)), Instr::Ori(r(2), r(2), 0x2345), Instr::Add(r(5), r(0), r(2))]
    );
    assert_eq!(addimm(r(5), r(6), -3), vec![Instr::Addi(r(5), r(6), Imm::Cst(-3))]);
    assert_eq!(
        addimm(r(5), r(6), 0x18000),
        vec![Instr::Addis(r(5), r(6), Imm::Cst(2)), Instr::Addi(r(5), r(5), Imm::Cst(-0x8000))]
    );
}

/// Runs `code` as the body of `main` from a register file where every
/// integer register holds a distinct value; returns the registers before
/// and after.
fn run_straight(code: Vec<Instr>, rng: &mut impl Rng) -> (sim::Regs, sim::Regs) {
    let n = code.len();
    let p = program(AsmFunction { sig: main_sig(), code });
    let sem = AsmSim::new(&p).unwrap();
    let mut st: MachineState = sem.initial_state().unwrap();
    for k in 0..32 {
        st.regs.set_gpr(r(k), Value::Int(rng.gen()));
    }
    let before = st.regs.clone();
    let mut world = World::default();
    for _ in 0..n {
        st = sem.step(st, &mut world).expect("straight-line code runs").1;
    }
    (before, st.regs)
}

fn changed(before: &sim::Regs, after: &sim::Regs) -> Vec<PReg> {
    let mut keys: Vec<PReg> = before.iter().chain(after.iter()).map(|(k, _)| *k).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|k| *k != PReg::Pc && before.get(*k) != after.get(*k)).collect()
}

#[test]
fn loadimm_and_addimm_in_the_simulator() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..10_000 {
        let n: i32 = match k % 4 {
            0 => rng.gen(),
            1 => rng.gen_range(-0x10000..0x10000),
            2 => rng.gen::<i32>() & !0xFFFF,
            _ => rng.gen::<i16>() as i32,
        };
        let rd = r(rng.gen_range(0..32));
        let rs = r(rng.gen_range(0..32));
        let (b, a) = run_straight(loadimm(rd, n), &mut rng);
        assert_eq!(a.gpr(rd), Value::Int(n), "loadimm {rd} {n:#x}");
        assert!(changed(&b, &a).iter().all(|p| *p == PReg::G(rd) || *p == PReg::G(r(2))), "loadimm {n:#x}");
        let (b, a) = run_straight(addimm(rd, rs, n), &mut rng);
        let Value::Int(x) = b.gpr(rs) else { unreachable!() };
        let expect = if rs == r(2) && (rd == r(0) || rs == r(0)) { None } else { Some(x.wrapping_add(n)) };
        if let Some(e) = expect {
            assert_eq!(a.gpr(rd), Value::Int(e), "addimm {rd} {rs} {n:#x}");
        }
        assert!(changed(&b, &a).iter().all(|p| *p == PReg::G(rd) || *p == PReg::G(r(2))), "addimm {n:#x}");
    }
}

fn mach_main(code: Vec<mach::Instr>) -> MachFunction {
    MachFunction { sig: main_sig(), stack_low: -8, stack_high: 0, link_ofs: -4, retaddr_ofs: -8, code }
}

fn both(m: MachFunction) -> (Behavior, Behavior) {
    let a = program(transl_function(&m).unwrap());
    let m = program(m);
    (
        mach::run_program(&m, World::default(), 1000).unwrap().behavior,
        run_program(&a, World::default(), 1000).unwrap().behavior,
    )
}

#[test]
fn rolm_becomes_rlwinm() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let (x, m): (i32, i32) = (rng.gen(), rng.gen());
        let f = mach_main(vec![
            mach::Instr::Op(Operation::IntConst(x), vec![], r(4)),
            mach::Instr::Op(Operation::Rolm(3, m), vec![r(4)], r(3)),
            mach::Instr::Return,
        ]);
        let a = transl_function(&f).unwrap();
        assert!(a.code.contains(&Instr::Rlwinm(r(3), r(4), 3, m)));
        let (bm, ba) = both(f);
        assert_eq!(bm, Behavior::Converges(vec![], x.rotate_left(3) & m));
        assert_eq!(ba, bm);
    }
}

#[test]
fn compare_immediate_branches_on_eq() {
    let c = Condition::CompImm(Comparison::Eq, 5);
    let (code, bit, sense) = gen::transl_cond(&c, &[r(4)]);
    assert_eq!((code, bit, sense), (vec![Instr::Cmpwi(r(4), 5)], CrBit::Eq, true));
    for x in [5, 6, -5] {
        let f = mach_main(vec![
            mach::Instr::Op(Operation::IntConst(x), vec![], r(4)),
            mach::Instr::Op(Operation::IntConst(1), vec![], r(3)),
            mach::Instr::Cond(c.clone(), vec![r(4)], 1),
            mach::Instr::Op(Operation::IntConst(2), vec![], r(3)),
            mach::Instr::Label(1),
            mach::Instr::Return,
        ]);
        let a = transl_function(&f).unwrap();
        assert!(a.code.windows(2).any(|w| w == [Instr::Cmpwi(r(4), 5), Instr::Bt(CrBit::Eq, 1)]));
        let (bm, ba) = both(f);
        assert_eq!(bm, Behavior::Converges(vec![], if x == 5 { 1 } else { 2 }));
        assert_eq!(ba, bm);
    }
}

/// Every comparison, signed and unsigned, register and immediate, on
/// boundary operands.
#[test]
fn all_integer_conditions_agree_with_mach() {
    let vals = [0, 1, -1, 5, 0x7FFF, 0x8000, -0x8000, 0x12345, i32::MIN, i32::MAX];
    let cmps = [Comparison::Eq, Comparison::Ne, Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge];
    for c in cmps {
        for &x in &vals {
            for &y in &vals {
                for cond in
                    [Condition::Comp(c), Condition::CompU(c), Condition::CompImm(c, y), Condition::CompUImm(c, y)]
                {
                    let args = if cond.arity() == 2 { vec![r(4), r(5)] } else { vec![r(4)] };
                    let f = mach_main(vec![
                        mach::Instr::Op(Operation::IntConst(x), vec![], r(4)),
                        mach::Instr::Op(Operation::IntConst(y), vec![], r(5)),
                        mach::Instr::Op(Operation::Cmp(cond.clone()), args, r(3)),
                        mach::Instr::Return,
                    ]);
                    let (bm, ba) = both(f);
                    assert_eq!(ba, bm, "{cond} {x} {y}");
                }
            }
        }
    }
}

#[test]
fn float_conditions_agree_with_mach() {
    let vals = [0.0, -0.0, 1.5, -2.0, f64::NAN, f64::INFINITY];
    let cmps = [Comparison::Eq, Comparison::Ne, Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge];
    for c in cmps {
        for &x in &vals {
            for &y in &vals {
                for cond in [Condition::CompF(c), Condition::NotCompF(c)] {
                    let f = mach_main(vec![
                        mach::Instr::Op(Operation::FloatConst(crate::ops::F64Bits::new(x)), vec![], MReg::F(1)),
                        mach::Instr::Op(Operation::FloatConst(crate::ops::F64Bits::new(y)), vec![], MReg::F(2)),
                        mach::Instr::Op(Operation::Cmp(cond.clone()), vec![MReg::F(1), MReg::F(2)], r(3)),
                        mach::Instr::Return,
                    ]);
                    let (bm, ba) = both(f);
                    assert_eq!(ba, bm, "{cond} {x} {y}");
                }
            }
        }
    }
}

#[test]
fn trivial_program_converges() {
    let p = program(AsmFunction { sig: main_sig(), code: vec![Instr::Addi(r(3), r(0), Imm::Cst(0)), Instr::Blr] });
    assert_eq!(run_program(&p, World::default(), 10).unwrap().behavior, Behavior::Converges(vec![], 0));
}

#[test]
fn oversized_functions_are_rejected() {
    assert!(check_size((1 << 31) - 1).is_ok());
    assert!(check_size(1 << 31).is_err());
}

#[test]
fn corpus_asm_agrees_with_mach() {
    for s in CORPUS {
        let m = mach_of(s.src);
        let (a, pos) = transl_program_with_positions(&m).unwrap();
        let mut mi = MachInterp::new(&m).unwrap();
        mi.retaddr = retaddr_map(&m, &pos);
        let bm = crate::base::run(&mi, s.world(), 3_000_000).behavior;
        let ba = run_program(&a, s.world(), 3_000_000).unwrap().behavior;
        assert!(ba.agrees_with(&bm), "{}: asm {ba} vs mach {bm}", s.name);
        if !matches!(bm, Behavior::Diverges(_)) {
            assert_eq!(ba, bm, "{}", s.name);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for s in CORPUS {
        let a = asm_of(s.src);
        let dumps: Vec<String> = (0..2)
            .map(|_| {
                let b = run_program(&a, s.world(), 1_000_000).unwrap().behavior;
                format!("{b}\n{}", dump_trace(b.trace()))
            })
            .collect();
        assert_eq!(dumps[0], dumps[1], "{}", s.name);
    }
}

#[test]
fn emit_parse_round_trip() {
    for s in CORPUS {
        let a = asm_of(s.src);
        let text = emit_text(&a);
        assert_eq!(parse_text(&text).unwrap(), a, "{}", s.name);
        assert_eq!(emit_text(&asm_of(s.src)), text, "{}", s.name);
        for line in text.lines().filter(|l| l.starts_with('L')) {
            assert!(line.ends_with(':'), "{line}");
        }
    }
    let f = AsmFunction { sig: main_sig(), code: vec![Instr::Allocframe(-24, 8, -4, -8), Instr::Label(3)] };
    let text = emit_text(&program(f));
    assert!(text.contains("\tallocframe -24, 8, -4, -8\nL3:\n"), "{text}");
    assert!(parse_text(".function \"main\" : -> int\n\tfrobnicate r1\n.end\n").is_err());
    assert_eq!(parse_text(".function \"main\" : -> int\n\taddi r3, r0, 1\n\tbogus\n.end\n").unwrap_err().line, 3);
}

/// Tail calls free the frame before jumping, so a long chain of them
/// never holds more than a couple of frames.
#[test]
fn tailcalls_run_in_constant_stack() {
    let src = r#"
"count"(n, acc) : int, int -> int { if (n == 0) return acc; tailcall "count"(n - 1, acc + 2) : int, int -> int; }
"main"() : -> int { vars r; r = "count"(5000, 0) : int, int -> int; return r; }"#;
    let a = asm_of(src);
    assert!(emit_text(&a).contains("\tb \"count\""));
    let sem = AsmSim::new(&a).unwrap();
    let mut st = sem.initial_state().unwrap();
    let mut world = World::default();
    let (mut steps, mut deepest) = (0, 0);
    while sem.final_state(&st).is_none() {
        st = sem.step(st, &mut world).unwrap().1;
        let live = (1..st.mem.next_block()).filter(|b| st.mem.valid_block(*b)).count();
        deepest = deepest.max(live);
        steps += 1;
        assert!(steps < 1_000_000);
    }
    assert_eq!(sem.final_state(&st), Some(10_000));
    assert!(deepest <= 2, "{deepest} live frames");
}
