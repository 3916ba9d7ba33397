//! Small-step semantics of Linear. One location map flows through calls:
//! the callee sees the caller's registers and, as its incoming slots, the
//! caller's outgoing slots; at return the caller recovers its callee-save
//! registers, locals and incoming slots.

use alloc::vec::Vec;

use super::ast::{find_label, Instr, LinearFunction, LinearProgram};
use crate::base::{globalenv, Event, FunDef, Genv, Mem, Semantics, Signature, Value, World};
use crate::locs::{loc_arguments, loc_result, Loc, LocMap, MReg, Slot, SlotKind};
use crate::ops::{eval_addressing, eval_condition, eval_op};
use crate::rtl::FnRef;

#[derive(Clone, Debug)]
pub struct Frame<'a> {
    pub f: &'a LinearFunction,
    pub sp: Value,
    pub pc: usize,
    pub locs: LocMap,
}

#[derive(Clone, Debug)]
pub enum LinearState<'a> {
    State { stack: Vec<Frame<'a>>, f: &'a LinearFunction, sp: Value, pc: usize, locs: LocMap, mem: Mem },
    Call { stack: Vec<Frame<'a>>, fd: usize, locs: LocMap, mem: Mem },
    Return { stack: Vec<Frame<'a>>, locs: LocMap, mem: Mem },
}

fn with_kind(s: &Slot, kind: SlotKind) -> Loc {
    Loc::Slot(Slot { kind, ..*s })
}

/// Locations seen by a callee on entry.
pub fn entryfun(l: &LocMap) -> LocMap {
    let mut out = LocMap::new();
    for (loc, v) in l.iter() {
        match loc {
            Loc::Reg(_) => out.set(*loc, *v),
            Loc::Slot(s) if s.kind == SlotKind::Outgoing => out.set(with_kind(s, SlotKind::Incoming), *v),
            Loc::Slot(_) => {}
        }
    }
    out
}

/// Locations seen by the caller, whose map at the call was `caller`, when
/// the callee returns with `callee`.
pub fn exitfun(caller: &LocMap, callee: &LocMap) -> LocMap {
    let mut out = LocMap::new();
    for (loc, v) in caller.iter() {
        match loc {
            Loc::Reg(r) if r.is_callee_save() => out.set(*loc, *v),
            Loc::Slot(s) if s.kind != SlotKind::Outgoing => out.set(*loc, *v),
            _ => {}
        }
    }
    for (loc, v) in callee.iter() {
        match loc {
            Loc::Reg(r) if !r.is_callee_save() => out.set(*loc, *v),
            Loc::Slot(s) if s.kind == SlotKind::Incoming => out.set(with_kind(s, SlotKind::Outgoing), *v),
            _ => {}
        }
    }
    out
}

fn parent_locs(stack: &[Frame<'_>]) -> LocMap {
    stack.last().map(|fr| fr.locs.clone()).unwrap_or_default()
}

pub struct LinearInterp<'a> {
    pub prog: &'a LinearProgram,
    pub genv: Genv,
    init_mem: Mem,
}

impl<'a> LinearInterp<'a> {
    pub fn new(prog: &'a LinearProgram) -> Result<Self, alloc::string::String> {
        let (genv, init_mem) = globalenv(prog)?;
        Ok(LinearInterp { prog, genv, init_mem })
    }

    fn sig_of(&self, fd: usize) -> &'a Signature {
        match &self.prog.functions[fd].1 {
            FunDef::Internal(f) => &f.sig,
            FunDef::External(ef) => &ef.sig,
        }
    }

    fn find_function(&self, fr: &FnRef<MReg>, locs: &LocMap, sig: &Signature) -> Option<usize> {
        let v = match fr {
            FnRef::Reg(r) => locs.get(Loc::Reg(*r)),
            FnRef::Symbol(id) => self.genv.symbol_address(id, 0)?,
        };
        let fd = self.genv.find_funct(v)?;
        (self.sig_of(fd) == sig).then_some(fd)
    }

    fn exec(
        &self,
        mut stack: Vec<Frame<'a>>,
        f: &'a LinearFunction,
        sp: Value,
        pc: usize,
        mut locs: LocMap,
        mut mem: Mem,
    ) -> Option<LinearState<'a>> {
        let next = |pc, locs, mem, stack| Some(LinearState::State { stack, f, sp, pc, locs, mem });
        let regs = |locs: &LocMap, rs: &[MReg]| rs.iter().map(|r| locs.get(Loc::Reg(*r))).collect::<Vec<_>>();
        match f.code.get(pc)? {
            Instr::Label(_) => next(pc + 1, locs, mem, stack),
            Instr::Goto(l) => next(find_label(&f.code, *l)?, locs, mem, stack),
            Instr::GetStack(s, r) => {
                locs.set(Loc::Reg(*r), locs.get(Loc::Slot(*s)));
                next(pc + 1, locs, mem, stack)
            }
            Instr::SetStack(r, s) => {
                locs.set(Loc::Slot(*s), locs.get(Loc::Reg(*r)));
                next(pc + 1, locs, mem, stack)
            }
            Instr::Op(op, args, d) => {
                let v = eval_op(&self.genv, sp, op, &regs(&locs, args))?;
                locs.set(Loc::Reg(*d), v);
                next(pc + 1, locs, mem, stack)
            }
            Instr::Load(chunk, mode, args, d) => {
                let a = eval_addressing(&self.genv, sp, mode, &regs(&locs, args))?;
                let v = mem.loadv(*chunk, a)?;
                locs.set(Loc::Reg(*d), v);
                next(pc + 1, locs, mem, stack)
            }
            Instr::Store(chunk, mode, args, src) => {
                let a = eval_addressing(&self.genv, sp, mode, &regs(&locs, args))?;
                mem.storev(*chunk, a, locs.get(Loc::Reg(*src)))?;
                next(pc + 1, locs, mem, stack)
            }
            Instr::Call(sig, fr) => {
                let fd = self.find_function(fr, &locs, sig)?;
                stack.push(Frame { f, sp, pc: pc + 1, locs: locs.clone() });
                Some(LinearState::Call { stack, fd, locs, mem })
            }
            Instr::Tailcall(sig, fr) => {
                let fd = self.find_function(fr, &locs, sig)?;
                let locs = exitfun(&parent_locs(&stack), &locs);
                if let Value::Ptr(b, _) = sp {
                    mem.free(b);
                }
                Some(LinearState::Call { stack, fd, locs, mem })
            }
            Instr::Cond(c, args, l) => {
                if eval_condition(c, &regs(&locs, args))? {
                    next(find_label(&f.code, *l)?, locs, mem, stack)
                } else {
                    next(pc + 1, locs, mem, stack)
                }
            }
            Instr::Return => {
                let locs = exitfun(&parent_locs(&stack), &locs);
                if let Value::Ptr(b, _) = sp {
                    mem.free(b);
                }
                Some(LinearState::Return { stack, locs, mem })
            }
        }
    }
}

impl<'a> Semantics for LinearInterp<'a> {
    type State = LinearState<'a>;

    fn initial_state(&self) -> Option<LinearState<'a>> {
        let b = self.genv.find_symbol(&self.prog.main)?;
        let fd = self.genv.find_funct_ptr(b)?;
        if !self.sig_of(fd).args.is_empty() {
            return None;
        }
        Some(LinearState::Call { stack: Vec::new(), fd, locs: LocMap::new(), mem: self.init_mem.clone() })
    }

    fn step(&self, st: LinearState<'a>, world: &mut World) -> Option<(Option<Event>, LinearState<'a>)> {
        match st {
            LinearState::State { stack, f, sp, pc, locs, mem } => {
                self.exec(stack, f, sp, pc, locs, mem).map(|s| (None, s))
            }
            LinearState::Call { stack, fd, locs, mut mem } => match &self.prog.functions[fd].1 {
                FunDef::Internal(f) => {
                    let b = mem.alloc(0, f.stacksize);
                    Some((
                        None,
                        LinearState::State { stack, f, sp: Value::Ptr(b, 0), pc: 0, locs: entryfun(&locs), mem },
                    ))
                }
                FunDef::External(ef) => {
                    let args = locs.list(&loc_arguments(&ef.sig));
                    let (ev, v) = world.call(ef, &args)?;
                    let mut locs = locs;
                    if let Some(r) = loc_result(&ef.sig) {
                        locs.set(Loc::Reg(r), v);
                    }
                    Some((Some(ev), LinearState::Return { stack, locs, mem }))
                }
            },
            LinearState::Return { mut stack, locs, mem } => {
                let Frame { f, sp, pc, .. } = stack.pop()?;
                Some((None, LinearState::State { stack, f, sp, pc, locs, mem }))
            }
        }
    }

    fn final_state(&self, st: &LinearState<'a>) -> Option<i32> {
        match st {
            LinearState::Return { stack, locs, .. } if stack.is_empty() => match locs.get(Loc::Reg(MReg::R(3))) {
                Value::Int(n) => Some(n),
                _ => None,
            },
            _ => None,
        }
    }
}
