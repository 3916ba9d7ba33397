//! LTLin: LTL code laid out as an instruction list with explicit labels.

use alloc::vec::Vec;

use crate::base::{Chunk, Program, Signature};
use crate::locs::Loc;
use crate::ops::{Addressing, Condition, Operation};
use crate::rtl::FnRef;

pub type Label = u32;

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Op(Operation, Vec<Loc>, Loc),
    Load(Chunk, Addressing, Vec<Loc>, Loc),
    Store(Chunk, Addressing, Vec<Loc>, Loc),
    Call(Signature, FnRef<Loc>, Vec<Loc>, Option<Loc>),
    Tailcall(Signature, FnRef<Loc>, Vec<Loc>),
    Label(Label),
    Goto(Label),
    /// Jumps when the condition holds, falls through otherwise.
    Cond(Condition, Vec<Loc>, Label),
    Return(Option<Loc>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LtlinFunction {
    pub sig: Signature,
    pub params: Vec<Loc>,
    pub stacksize: i32,
    pub code: Vec<Instr>,
}

pub type LtlinProgram = Program<LtlinFunction>;

impl Instr {
    pub fn as_label(&self) -> Option<Label> {
        match self {
            Instr::Label(l) => Some(*l),
            _ => None,
        }
    }
}

/// Index of `label(l)` in `code`.
pub fn find_label(code: &[Instr], l: Label) -> Option<usize> {
    code.iter().position(|i| i.as_label() == Some(l))
}
