//! Small-step semantics of LTLin. Identical to LTL except that control is
//! a position in the instruction list; a label is a no-op step.

use alloc::vec::Vec;

use super::ast::{find_label, Instr, LtlinFunction, LtlinProgram};
use crate::base::{globalenv, Event, FunDef, Genv, Mem, Semantics, Signature, Value, World};
use crate::locs::{Loc, LocMap};
use crate::ops::{eval_addressing, eval_condition, eval_op};
use crate::rtl::FnRef;

#[derive(Clone, Debug)]
pub struct Frame<'a> {
    pub dest: Option<Loc>,
    pub f: &'a LtlinFunction,
    pub sp: Value,
    pub pc: usize,
    pub locs: LocMap,
}

#[derive(Clone, Debug)]
pub enum LtlinState<'a> {
    State { stack: Vec<Frame<'a>>, f: &'a LtlinFunction, sp: Value, pc: usize, locs: LocMap, mem: Mem },
    Call { stack: Vec<Frame<'a>>, fd: usize, args: Vec<Value>, mem: Mem },
    Return { stack: Vec<Frame<'a>>, v: Value, mem: Mem },
}

pub struct LtlinInterp<'a> {
    pub prog: &'a LtlinProgram,
    pub genv: Genv,
    init_mem: Mem,
}

impl<'a> LtlinInterp<'a> {
    pub fn new(prog: &'a LtlinProgram) -> Result<Self, alloc::string::String> {
        let (genv, init_mem) = globalenv(prog)?;
        Ok(LtlinInterp { prog, genv, init_mem })
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
        f: &'a LtlinFunction,
        sp: Value,
        pc: usize,
        mut locs: LocMap,
        mut mem: Mem,
    ) -> Option<LtlinState<'a>> {
        let next = |pc, locs, mem, stack| Some(LtlinState::State { stack, f, sp, pc, locs, mem });
        match f.code.get(pc)? {
            Instr::Label(_) => next(pc + 1, locs, mem, stack),
            Instr::Goto(l) => next(find_label(&f.code, *l)?, locs, mem, stack),
            Instr::Op(op, args, d) => {
                let v = eval_op(&self.genv, sp, op, &locs.list(args))?;
                locs.set(*d, v);
                next(pc + 1, locs, mem, stack)
            }
            Instr::Load(chunk, mode, args, d) => {
                let a = eval_addressing(&self.genv, sp, mode, &locs.list(args))?;
                let v = mem.loadv(*chunk, a)?;
                locs.set(*d, v);
                next(pc + 1, locs, mem, stack)
            }
            Instr::Store(chunk, mode, args, src) => {
                let a = eval_addressing(&self.genv, sp, mode, &locs.list(args))?;
                mem.storev(*chunk, a, locs.get(*src))?;
                next(pc + 1, locs, mem, stack)
            }
            Instr::Call(sig, fr, args, d) => {
                let fd = self.find_function(fr, &locs, sig)?;
                let args = locs.list(args);
                stack.push(Frame { dest: *d, f, sp, pc: pc + 1, locs: locs.postcall() });
                Some(LtlinState::Call { stack, fd, args, mem })
            }
            Instr::Tailcall(sig, fr, args) => {
                let fd = self.find_function(fr, &locs, sig)?;
                let args = locs.list(args);
                if let Value::Ptr(b, _) = sp {
                    mem.free(b);
                }
                Some(LtlinState::Call { stack, fd, args, mem })
            }
            Instr::Cond(c, args, l) => {
                if eval_condition(c, &locs.list(args))? {
                    next(find_label(&f.code, *l)?, locs, mem, stack)
                } else {
                    next(pc + 1, locs, mem, stack)
                }
            }
            Instr::Return(r) => {
                if r.is_some() != f.sig.res.is_some() {
                    return None;
                }
                let v = r.map_or(Value::Undef, |r| locs.get(r));
                if let Value::Ptr(b, _) = sp {
                    mem.free(b);
                }
                Some(LtlinState::Return { stack, v, mem })
            }
        }
    }
}

impl<'a> Semantics for LtlinInterp<'a> {
    type State = LtlinState<'a>;

    fn initial_state(&self) -> Option<LtlinState<'a>> {
        let b = self.genv.find_symbol(&self.prog.main)?;
        let fd = self.genv.find_funct_ptr(b)?;
        if !self.sig_of(fd).args.is_empty() {
            return None;
        }
        Some(LtlinState::Call { stack: Vec::new(), fd, args: Vec::new(), mem: self.init_mem.clone() })
    }

    fn step(&self, st: LtlinState<'a>, world: &mut World) -> Option<(Option<Event>, LtlinState<'a>)> {
        match st {
            LtlinState::State { stack, f, sp, pc, locs, mem } => {
                self.exec(stack, f, sp, pc, locs, mem).map(|s| (None, s))
            }
            LtlinState::Call { stack, fd, args, mut mem } => match &self.prog.functions[fd].1 {
                FunDef::Internal(f) => {
                    if args.len() != f.params.len() {
                        return None;
                    }
                    let b = mem.alloc(0, f.stacksize);
                    let mut locs = LocMap::new();
                    for (&p, a) in f.params.iter().zip(args) {
                        locs.set(p, a);
                    }
                    Some((None, LtlinState::State { stack, f, sp: Value::Ptr(b, 0), pc: 0, locs, mem }))
                }
                FunDef::External(ef) => {
                    let (ev, v) = world.call(ef, &args)?;
                    Some((Some(ev), LtlinState::Return { stack, v, mem }))
                }
            },
            LtlinState::Return { mut stack, v, mem } => {
                let Frame { dest, f, sp, pc, mut locs } = stack.pop()?;
                if let Some(d) = dest {
                    locs.set(d, v);
                }
                Some((None, LtlinState::State { stack, f, sp, pc, locs, mem }))
            }
        }
    }

    fn final_state(&self, st: &LtlinState<'a>) -> Option<i32> {
        match st {
            LtlinState::Return { stack, v: Value::Int(n), .. } if stack.is_empty() => Some(*n),
            _ => None,
        }
    }
}
