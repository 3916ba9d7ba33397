//! LTL: RTL control-flow graphs over locations instead of pseudo-registers.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::base::{Chunk, Program, Signature};
use crate::locs::Loc;
use crate::ops::{Addressing, Condition, Operation};
use crate::rtl::FnRef;

pub type Node = u32;

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Nop(Node),
    Op(Operation, Vec<Loc>, Loc, Node),
    Load(Chunk, Addressing, Vec<Loc>, Loc, Node),
    Store(Chunk, Addressing, Vec<Loc>, Loc, Node),
    Call(Signature, FnRef<Loc>, Vec<Loc>, Option<Loc>, Node),
    Tailcall(Signature, FnRef<Loc>, Vec<Loc>),
    Cond(Condition, Vec<Loc>, Node, Node),
    Return(Option<Loc>),
}

impl Instr {
    pub fn successors(&self) -> Vec<Node> {
        match self {
            Instr::Nop(s) | Instr::Op(.., s) | Instr::Load(.., s) | Instr::Store(.., s) | Instr::Call(.., s) => {
                vec![*s]
            }
            Instr::Cond(_, _, t, f) => vec![*t, *f],
            Instr::Tailcall(..) | Instr::Return(_) => vec![],
        }
    }

    pub fn successors_mut(&mut self) -> Vec<&mut Node> {
        match self {
            Instr::Nop(s) | Instr::Op(.., s) | Instr::Load(.., s) | Instr::Store(.., s) | Instr::Call(.., s) => vec![s],
            Instr::Cond(_, _, t, f) => vec![t, f],
            Instr::Tailcall(..) | Instr::Return(_) => vec![],
        }
    }

    /// Every location the instruction reads or writes.
    pub fn locs(&self) -> Vec<Loc> {
        let mut v = Vec::new();
        match self {
            Instr::Nop(_) => {}
            Instr::Op(_, args, d, _) | Instr::Load(_, _, args, d, _) | Instr::Store(_, _, args, d, _) => {
                v.extend(args);
                v.push(*d);
            }
            Instr::Call(_, f, args, d, _) => {
                v.extend(f.reg());
                v.extend(args);
                v.extend(d);
            }
            Instr::Tailcall(_, f, args) => {
                v.extend(f.reg());
                v.extend(args);
            }
            Instr::Cond(_, args, ..) => v.extend(args),
            Instr::Return(r) => v.extend(r),
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LtlFunction {
    pub sig: Signature,
    pub params: Vec<Loc>,
    pub stacksize: i32,
    pub entrypoint: Node,
    pub code: BTreeMap<Node, Instr>,
}

impl LtlFunction {
    pub fn successor_map(&self) -> BTreeMap<Node, Vec<Node>> {
        self.code.iter().map(|(&n, i)| (n, i.successors())).collect()
    }
}

pub type LtlProgram = Program<LtlFunction>;
