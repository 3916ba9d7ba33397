//! Small-step semantics of LTL. Each activation owns a location map; at a
//! call the caller's map loses its temporaries and caller-save registers.

use alloc::vec::Vec;

use super::ast::{Instr, LtlFunction, LtlProgram, Node};
use crate::base::{globalenv, Event, FunDef, Genv, Mem, Semantics, Signature, Value, World};
use crate::locs::{Loc, LocMap};
use crate::ops::{eval_addressing, eval_condition, eval_op};
use crate::rtl::FnRef;

#[derive(Clone, Debug)]
pub struct Frame<'a> {
    pub dest: Option<Loc>,
    pub f: &'a LtlFunction,
    pub sp: Value,
    pub pc: Node,
    pub locs: LocMap,
}

#[derive(Clone, Debug)]
pub enum LtlState<'a> {
    State { stack: Vec<Frame<'a>>, f: &'a LtlFunction, sp: Value, pc: Node, locs: LocMap, mem: Mem },
    Call { stack: Vec<Frame<'a>>, fd: usize, args: Vec<Value>, mem: Mem },
    Return { stack: Vec<Frame<'a>>, v: Value, mem: Mem },
}

pub struct LtlInterp<'a> {
    pub prog: &'a LtlProgram,
    pub genv: Genv,
    init_mem: Mem,
}

impl<'a> LtlInterp<'a> {
    pub fn new(prog: &'a LtlProgram) -> Result<Self, alloc::string::String> {
        let (genv, init_mem) = globalenv(prog)?;
        Ok(LtlInterp { prog, genv, init_mem })
    }

    fn sig_of(&self, fd: usize) -> &'a Signature {
        match &self.prog.functions[fd].1 {
            FunDef::Internal(f) => &f.sig,
            FunDef::External(ef) => &ef.sig,
        }
    }

    fn find_function(&self, fr: &FnRef<Loc>, locs: &LocMap, sig: &Signature) -> Option<usize> {
        let v = match fr {
            FnRef::Reg(l) => locs.get(*l),
            FnRef::Symbol(id) => self.genv.symbol_address(id, 0)?,
        };
        let fd = self.genv.find_funct(v)?;
        (self.sig_of(fd) == sig).then_some(fd)
    }

    fn exec(
        &self,
        mut stack: Vec<Frame<'a>>,
        f: &'a LtlFunction,
        sp: Value,
        pc: Node,
        mut locs: LocMap,
        mut mem: Mem,
    ) -> Option<LtlState<'a>> {
        let next = |pc, locs, mem, stack| Some(LtlState::State { stack, f, sp, pc, locs, mem });
        match f.code.get(&pc)? {
            Instr::Nop(s) => next(*s, locs, mem, stack),
            Instr::Op(op, args, d, s) => {
                let v = eval_op(&self.genv, sp, op, &locs.list(args))?;
                locs.set(*d, v);
                next(*s, locs, mem, stack)
            }
            Instr::Load(chunk, mode, args, d, s) => {
                let a = eval_addressing(&self.genv, sp, mode, &locs.list(args))?;
                let v = mem.loadv(*chunk, a)?;
                locs.set(*d, v);
                next(*s, locs, mem, stack)
            }
            Instr::Store(chunk, mode, args, src, s) => {
                let a = eval_addressing(&self.genv, sp, mode, &locs.list(args))?;
                mem.storev(*chunk, a, locs.get(*src))?;
                next(*s, locs, mem, stack)
            }
            Instr::Call(sig, fr, args, d, s) => {
                let fd = self.find_function(fr, &locs, sig)?;
                let args = locs.list(args);
                stack.push(Frame { dest: *d, f, sp, pc: *s, locs: locs.postcall() });
                Some(LtlState::Call { stack, fd, args, mem })
            }
            Instr::Tailcall(sig, fr, args) => {
                let fd = self.find_function(fr, &locs, sig)?;
                let args = locs.list(args);
                if let Value::Ptr(b, _) = sp {
                    mem.free(b);
                }
                Some(LtlState::Call { stack, fd, args, mem })
            }
            Instr::Cond(c, args, t, e) => {
                let b = eval_condition(c, &locs.list(args))?;
                next(if b { *t } else { *e }, locs, mem, stack)
            }
            Instr::Return(r) => {
                if r.is_some() != f.sig.res.is_some() {
                    return None;
                }
                let v = r.map_or(Value::Undef, |r| locs.get(r));
                if let Value::Ptr(b, _) = sp {
                    mem.free(b);
                }
                Some(LtlState::Return { stack, v, mem })
            }
        }
    }
}

impl<'a> Semantics for LtlInterp<'a> {
    type State = LtlState<'a>;

    fn initial_state(&self) -> Option<LtlState<'a>> {
        let b = self.genv.find_symbol(&self.prog.main)?;
        let fd = self.genv.find_funct_ptr(b)?;
        if !self.sig_of(fd).args.is_empty() {
            return None;
        }
        Some(LtlState::Call { stack: Vec::new(), fd, args: Vec::new(), mem: self.init_mem.clone() })
    }

    fn step(&self, st: LtlState<'a>, world: &mut World) -> Option<(Option<Event>, LtlState<'a>)> {
        match st {
            LtlState::State { stack, f, sp, pc, locs, mem } => {
                self.exec(stack, f, sp, pc, locs, mem).map(|s| (None, s))
            }
            LtlState::Call { stack, fd, args, mut mem } => match &self.prog.functions[fd].1 {
                FunDef::Internal(f) => {
                    if args.len() != f.params.len() {
                        return None;
                    }
                    let b = mem.alloc(0, f.stacksize);
                    let mut locs = LocMap::new();
                    for (&p, a) in f.params.iter().zip(args) {
                        locs.set(p, a);
                    }
                    Some((None, LtlState::State { stack, f, sp: Value::Ptr(b, 0), pc: f.entrypoint, locs, mem }))
                }
                FunDef::External(ef) => {
                    let (ev, v) = world.call(ef, &args)?;
                    Some((Some(ev), LtlState::Return { stack, v, mem }))
                }
            },
            LtlState::Return { mut stack, v, mem } => {
                let Frame { dest, f, sp, pc, mut locs } = stack.pop()?;
                if let Some(d) = dest {
                    locs.set(d, v);
                }
                Some((None, LtlState::State { stack, f, sp, pc, locs, mem }))
            }
        }
    }

    fn final_state(&self, st: &LtlState<'a>) -> Option<i32> {
        match st {
            LtlState::Return { stack, v: Value::Int(n), .. } if stack.is_empty() => Some(*n),
            _ => None,
        }
    }
}
