//! Mach: Linear with stack slots resolved to byte offsets in a concrete
//! activation record.

use alloc::vec::Vec;

use crate::base::{Chunk, Program, Signature, Typ};
use crate::locs::MReg;
use crate::ltlin::Label;
use crate::ops::{Addressing, Condition, Operation};
use crate::rtl::FnRef;

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    /// Load from the current frame at a byte offset from `sp`.
    GetStack(i32, Typ, MReg),
    SetStack(MReg, i32, Typ),
    /// Load from the caller's frame, reached through the back link.
    GetParent(i32, Typ, MReg),
    Op(Operation, Vec<MReg>, MReg),
    Load(Chunk, Addressing, Vec<MReg>, MReg),
    Store(Chunk, Addressing, Vec<MReg>, MReg),
    Call(Signature, FnRef<MReg>),
    Tailcall(Signature, FnRef<MReg>),
    Label(Label),
    Goto(Label),
    Cond(Condition, Vec<MReg>, Label),
    Return,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MachFunction {
    pub sig: Signature,
    /// The frame block is `[stack_low, stack_high)` with `sp` at offset 0.
    pub stack_low: i32,
    pub stack_high: i32,
    pub link_ofs: i32,
    pub retaddr_ofs: i32,
    pub code: Vec<Instr>,
}

pub type MachProgram = Program<MachFunction>;

pub fn find_label(code: &[Instr], l: Label) -> Option<usize> {
    code.iter().position(|i| *i == Instr::Label(l))
}
