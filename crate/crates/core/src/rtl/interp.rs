//! Small-step semantics of RTL.

use alloc::vec::Vec;

use super::ast::{FnRef, Instr, Node, Reg, RtlFunction, RtlProgram};
use crate::base::{globalenv, Event, FunDef, Genv, Mem, Semantics, Signature, Value, World};
use crate::ops::{eval_addressing, eval_condition, eval_op};

/// Register file; unset registers read as `Undef`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Regs(Vec<Value>);

impl Regs {
    pub fn get(&self, r: Reg) -> Value {
        self.0.get(r as usize).copied().unwrap_or(Value::Undef)
    }

    pub fn set(&mut self, r: Reg, v: Value) {
        let i = r as usize;
        if i >= self.0.len() {
            self.0.resize(i + 1, Value::Undef);
        }
        self.0[i] = v;
    }

    pub fn list(&self, rs: &[Reg]) -> Vec<Value> {
        rs.iter().map(|&r| self.get(r)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Frame<'a> {
    pub dest: Option<Reg>,
    pub f: &'a RtlFunction,
    pub sp: Value,
    pub pc: Node,
    pub regs: Regs,
}

#[derive(Clone, Debug)]
pub enum RtlState<'a> {
    State { stack: Vec<Frame<'a>>, f: &'a RtlFunction, sp: Value, pc: Node, regs: Regs, mem: Mem },
    Call { stack: Vec<Frame<'a>>, fd: usize, args: Vec<Value>, mem: Mem },
    Return { stack: Vec<Frame<'a>>, v: Value, mem: Mem },
}

pub struct RtlInterp<'a> {
    pub prog: &'a RtlProgram,
    pub genv: Genv,
    init_mem: Mem,
}

impl<'a> RtlInterp<'a> {
    pub fn new(prog: &'a RtlProgram) -> Result<Self, alloc::string::String> {
        let (genv, init_mem) = globalenv(prog)?;
        Ok(RtlInterp { prog, genv, init_mem })
    }

    fn sig_of(&self, fd: usize) -> &'a Signature {
        match &self.prog.functions[fd].1 {
            FunDef::Internal(f) => &f.sig,
            FunDef::External(ef) => &ef.sig,
        }
    }

    /// Resolves a callee whose signature must equal `sig`.
    pub fn find_function(&self, fr: &FnRef<Reg>, regs: &Regs, sig: &Signature) -> Option<usize> {
        let v = match fr {
            FnRef::Reg(r) => regs.get(*r),
            FnRef::Symbol(id) => self.genv.symbol_address(id, 0)?,
        };
        let fd = self.genv.find_funct(v)?;
        (self.sig_of(fd) == sig).then_some(fd)
    }

    fn exec(
        &self,
        mut stack: Vec<Frame<'a>>,
        f: &'a RtlFunction,
        sp: Value,
        pc: Node,
        mut regs: Regs,
        mut mem: Mem,
    ) -> Option<RtlState<'a>> {
        let next = |pc, regs, mem, stack| Some(RtlState::State { stack, f, sp, pc, regs, mem });
        match f.code.get(&pc)? {
            Instr::Nop(s) => next(*s, regs, mem, stack),
            Instr::Op(op, args, d, s) => {
                let v = eval_op(&self.genv, sp, op, &regs.list(args))?;
                regs.set(*d, v);
                next(*s, regs, mem, stack)
            }
            Instr::Load(chunk, mode, args, d, s) => {
                let a = eval_addressing(&self.genv, sp, mode, &regs.list(args))?;
                let v = mem.loadv(*chunk, a)?;
                regs.set(*d, v);
                next(*s, regs, mem, stack)
            }
            Instr::Store(chunk, mode, args, src, s) => {
                let a = eval_addressing(&self.genv, sp, mode, &regs.list(args))?;
                mem.storev(*chunk, a, regs.get(*src))?;
                next(*s, regs, mem, stack)
            }
            Instr::Call(sig, fr, args, d, s) => {
                let fd = self.find_function(fr, &regs, sig)?;
                let args = regs.list(args);
                stack.push(Frame { dest: *d, f, sp, pc: *s, regs });
                Some(RtlState::Call { stack, fd, args, mem })
            }
            Instr::Tailcall(sig, fr, args) => {
                let fd = self.find_function(fr, &regs, sig)?;
                let args = regs.list(args);
                if let Value::Ptr(b, _) = sp {
                    mem.free(b);
                }
                Some(RtlState::Call { stack, fd, args, mem })
            }
            Instr::Cond(c, args, t, e) => {
                let b = eval_condition(c, &regs.list(args))?;
                next(if b { *t } else { *e }, regs, mem, stack)
            }
            Instr::Return(r) => {
                if r.is_some() != f.sig.res.is_some() {
                    return None;
                }
                let v = r.map_or(Value::Undef, |r| regs.get(r));
                if let Value::Ptr(b, _) = sp {
                    mem.free(b);
                }
                Some(RtlState::Return { stack, v, mem })
            }
        }
    }
}

impl<'a> Semantics for RtlInterp<'a> {
    type State = RtlState<'a>;

    fn initial_state(&self) -> Option<RtlState<'a>> {
        let b = self.genv.find_symbol(&self.prog.main)?;
        let fd = self.genv.find_funct_ptr(b)?;
        if !self.sig_of(fd).args.is_empty() {
            return None;
        }
        Some(RtlState::Call { stack: Vec::new(), fd, args: Vec::new(), mem: self.init_mem.clone() })
    }

    fn step(&self, st: RtlState<'a>, world: &mut World) -> Option<(Option<Event>, RtlState<'a>)> {
        match st {
            RtlState::State { stack, f, sp, pc, regs, mem } => {
                self.exec(stack, f, sp, pc, regs, mem).map(|s| (None, s))
            }
            RtlState::Call { stack, fd, args, mut mem } => match &self.prog.functions[fd].1 {
                FunDef::Internal(f) => {
                    if args.len() != f.params.len() {
                        return None;
                    }
                    let b = mem.alloc(0, f.stacksize);
                    let mut regs = Regs::default();
                    for (&p, a) in f.params.iter().zip(args) {
                        regs.set(p, a);
                    }
                    Some((None, RtlState::State { stack, f, sp: Value::Ptr(b, 0), pc: f.entrypoint, regs, mem }))
                }
                FunDef::External(ef) => {
                    let (ev, v) = world.call(ef, &args)?;
                    Some((Some(ev), RtlState::Return { stack, v, mem }))
                }
            },
            RtlState::Return { mut stack, v, mem } => {
                let Frame { dest, f, sp, pc, mut regs } = stack.pop()?;
                if let Some(d) = dest {
                    regs.set(d, v);
                }
                Some((None, RtlState::State { stack, f, sp, pc, regs, mem }))
            }
        }
    }

    fn final_state(&self, st: &RtlState<'a>) -> Option<i32> {
        match st {
            RtlState::Return { stack, v: Value::Int(n), .. } if stack.is_empty() => Some(*n),
            _ => None,
        }
    }
}
