//! RTL: control-flow graphs of three-address instructions over an
//! unbounded supply of pseudo-registers.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::base::{Chunk, Ident, Program, Signature};
use crate::ops::{Addressing, Condition, Operation};

pub type Node = u32;
/// Pseudo-registers are positive.
pub type Reg = u32;

#[derive(Clone, Debug, PartialEq)]
pub enum FnRef<R> {
    Reg(R),
    Symbol(Ident),
}

impl<R: Copy> FnRef<R> {
    pub fn reg(&self) -> Option<R> {
        match self {
            FnRef::Reg(r) => Some(*r),
            FnRef::Symbol(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Nop(Node),
    Op(Operation, Vec<Reg>, Reg, Node),
    Load(Chunk, Addressing, Vec<Reg>, Reg, Node),
    Store(Chunk, Addressing, Vec<Reg>, Reg, Node),
    /// The destination is absent when the result is discarded.
    Call(Signature, FnRef<Reg>, Vec<Reg>, Option<Reg>, Node),
    Tailcall(Signature, FnRef<Reg>, Vec<Reg>),
    Cond(Condition, Vec<Reg>, Node, Node),
    Return(Option<Reg>),
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

    pub fn uses(&self) -> Vec<Reg> {
        match self {
            Instr::Nop(_) => vec![],
            Instr::Op(_, args, ..) | Instr::Load(_, _, args, ..) | Instr::Cond(_, args, ..) => args.clone(),
            Instr::Store(_, _, args, src, _) => {
                let mut v = args.clone();
                v.push(*src);
                v
            }
            Instr::Call(_, f, args, ..) | Instr::Tailcall(_, f, args) => {
                let mut v: Vec<Reg> = f.reg().into_iter().collect();
                v.extend(args);
                v
            }
            Instr::Return(r) => r.iter().copied().collect(),
        }
    }

    pub fn def(&self) -> Option<Reg> {
        match self {
            Instr::Op(_, _, d, _) | Instr::Load(_, _, _, d, _) => Some(*d),
            Instr::Call(_, _, _, d, _) => *d,
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RtlFunction {
    pub sig: Signature,
    pub params: Vec<Reg>,
    pub stacksize: i32,
    pub entrypoint: Node,
    pub code: BTreeMap<Node, Instr>,
}

impl RtlFunction {
    /// Largest register mentioned, or 0.
    pub fn max_reg(&self) -> Reg {
        let mut m = self.params.iter().copied().max().unwrap_or(0);
        for i in self.code.values() {
            m = m.max(i.uses().into_iter().max().unwrap_or(0)).max(i.def().unwrap_or(0));
        }
        m
    }

    /// Predecessor lists, including only edges between present nodes.
    pub fn predecessors(&self) -> BTreeMap<Node, Vec<Node>> {
        let mut preds: BTreeMap<Node, Vec<Node>> = self.code.keys().map(|&n| (n, Vec::new())).collect();
        for (&n, i) in &self.code {
            for s in i.successors() {
                if let Some(p) = preds.get_mut(&s) {
                    p.push(n);
                }
            }
        }
        preds
    }

    /// Nodes reachable from the entry point, in depth-first preorder.
    pub fn reachable(&self) -> Vec<Node> {
        let mut seen = alloc::collections::BTreeSet::new();
        let mut order = Vec::new();
        let mut stack = vec![self.entrypoint];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            order.push(n);
            if let Some(i) = self.code.get(&n) {
                for s in i.successors().into_iter().rev() {
                    stack.push(s);
                }
            }
        }
        order
    }

    /// Entry point and all successors are defined.
    pub fn check_closed(&self) -> Result<(), alloc::string::String> {
        if !self.code.contains_key(&self.entrypoint) {
            return Err(alloc::format!("entry point {} undefined", self.entrypoint));
        }
        for (n, i) in &self.code {
            for s in i.successors() {
                if !self.code.contains_key(&s) {
                    return Err(alloc::format!("node {n}: successor {s} undefined"));
                }
            }
        }
        Ok(())
    }
}

pub type RtlProgram = Program<RtlFunction>;
