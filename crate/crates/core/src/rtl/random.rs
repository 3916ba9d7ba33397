//! Random RTL control-flow graphs for analysis and validator properties.
//! The graphs are closed and typed (registers 1..=8 are int, 9..=10 float)
//! but are not meant to run.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{FnRef, Instr, Node, Reg, RtlFunction};
use crate::base::{Chunk, Signature, Typ};
use crate::ops::{Addressing, Comparison, Condition, F64Bits, Operation};

const INT_REGS: u32 = 8;

fn ireg(rng: &mut impl Rng) -> Reg {
    rng.gen_range(1..=INT_REGS)
}

fn freg(rng: &mut impl Rng) -> Reg {
    rng.gen_range(INT_REGS + 1..=INT_REGS + 2)
}

fn cmp(rng: &mut impl Rng) -> Comparison {
    [Comparison::Eq, Comparison::Ne, Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge]
        [rng.gen_range(0..6)]
}

fn small(rng: &mut impl Rng) -> i32 {
    rng.gen_range(-4..=4)
}

fn random_instr(rng: &mut impl Rng, n: u32) -> Instr {
    let mut succ = || rng.gen_range(1..=n);
    let s = succ();
    let t = succ();
    match rng.gen_range(0..16) {
        0 => Instr::Nop(s),
        1 => Instr::Op(Operation::IntConst(small(rng)), vec![], ireg(rng), s),
        2 => Instr::Op(Operation::Move, vec![ireg(rng)], ireg(rng), s),
        3 => Instr::Op(Operation::Add, vec![ireg(rng), ireg(rng)], ireg(rng), s),
        4 => Instr::Op(Operation::AddImm(small(rng)), vec![ireg(rng)], ireg(rng), s),
        5 => Instr::Op(Operation::Mul, vec![ireg(rng), ireg(rng)], ireg(rng), s),
        6 => Instr::Op(Operation::AddrSymbol("g".into(), 4 * small(rng)), vec![], ireg(rng), s),
        7 => Instr::Op(Operation::Cmp(Condition::Comp(cmp(rng))), vec![ireg(rng), ireg(rng)], ireg(rng), s),
        8 => Instr::Op(Operation::FloatConst(F64Bits::new(small(rng) as f64)), vec![], freg(rng), s),
        9 => Instr::Op(Operation::AddF, vec![freg(rng), freg(rng)], freg(rng), s),
        10 => Instr::Load(Chunk::Int32, Addressing::Indexed(4 * small(rng)), vec![ireg(rng)], ireg(rng), s),
        11 => Instr::Store(Chunk::Int32, Addressing::Indexed2, vec![ireg(rng), ireg(rng)], ireg(rng), s),
        12 => Instr::Cond(Condition::Comp(cmp(rng)), vec![ireg(rng), ireg(rng)], s, t),
        13 => Instr::Cond(Condition::CompImm(cmp(rng), small(rng)), vec![ireg(rng)], s, t),
        14 => {
            let sig = Signature { args: vec![Typ::Int], res: Some(Typ::Int) };
            Instr::Call(sig, FnRef::Symbol("f".into()), vec![ireg(rng)], Some(ireg(rng)), s)
        }
        _ => Instr::Return(Some(ireg(rng))),
    }
}

/// A function of `n >= 1` nodes numbered 1..=n with entry 1.
pub fn random_function(rng: &mut impl Rng, n: u32) -> RtlFunction {
    let mut code: alloc::collections::BTreeMap<Node, Instr> = (1..=n).map(|l| (l, random_instr(rng, n))).collect();
    let last = rng.gen_range(1..=n);
    code.insert(last, Instr::Return(Some(ireg(rng))));
    RtlFunction {
        sig: Signature { args: vec![Typ::Int, Typ::Int], res: Some(Typ::Int) },
        params: vec![1, 2],
        stacksize: 0,
        entrypoint: 1,
        code,
    }
}

/// All registers the generator may mention.
pub fn registers() -> Vec<Reg> {
    (1..=INT_REGS + 2).collect()
}
