//! Linear: LTLin with operands restricted to machine registers, explicit
//! stack-slot moves and calling conventions.

use alloc::vec::Vec;

use crate::base::{Chunk, Program, Signature};
use crate::locs::{MReg, Slot};
use crate::ltlin::Label;
use crate::ops::{Addressing, Condition, Operation};
use crate::rtl::FnRef;

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    GetStack(Slot, MReg),
    SetStack(MReg, Slot),
    Op(Operation, Vec<MReg>, MReg),
    Load(Chunk, Addressing, Vec<MReg>, MReg),
    Store(Chunk, Addressing, Vec<MReg>, MReg),
    /// Arguments in `loc_arguments(sig)`, result in `loc_result(sig)`.
    Call(Signature, FnRef<MReg>),
    Tailcall(Signature, FnRef<MReg>),
    Label(Label),
    Goto(Label),
    Cond(Condition, Vec<MReg>, Label),
    /// The result, if any, is already in `loc_result`.
    Return,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFunction {
    pub sig: Signature,
    pub stacksize: i32,
    pub code: Vec<Instr>,
}

pub type LinearProgram = Program<LinearFunction>;

pub fn find_label(code: &[Instr], l: Label) -> Option<usize> {
    code.iter().position(|i| *i == Instr::Label(l))
}

impl Instr {
    /// Registers read or written by the instruction, excluding the
    /// calling-convention registers implicit in calls and returns.
    pub fn regs(&self) -> Vec<MReg> {
        match self {
            Instr::GetStack(_, r) | Instr::SetStack(r, _) => alloc::vec![*r],
            Instr::Op(_, args, d) | Instr::Load(_, _, args, d) | Instr::Store(_, _, args, d) => {
                let mut v = args.clone();
                v.push(*d);
                v
            }
            Instr::Call(_, FnRef::Reg(r)) | Instr::Tailcall(_, FnRef::Reg(r)) => alloc::vec![*r],
            Instr::Cond(_, args, _) => args.clone(),
            _ => Vec::new(),
        }
    }
}
