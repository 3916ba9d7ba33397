//! Small-step semantics of Mach. The register file is global; frames are
//! real memory blocks holding the back link and return address, which
//! must still be intact when the function returns.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::ast::{find_label, Instr, MachFunction, MachProgram};
use super::layout::outgoing_ofs;
use crate::base::{globalenv, Chunk, Event, FunDef, Genv, Mem, Semantics, Signature, Value, World};
use crate::locs::{loc_arguments, loc_result, Loc, LocMap, MReg};
use crate::ops::{eval_addressing, eval_condition, eval_op};
use crate::rtl::FnRef;

/// Link and return address of the outermost activation.
pub const NULL: Value = Value::Int(0);

#[derive(Clone, Debug)]
pub struct Frame<'a> {
    pub fd: usize,
    pub f: &'a MachFunction,
    pub sp: Value,
    pub ra: Value,
    pub pc: usize,
}

#[derive(Clone, Debug)]
pub enum MachState<'a> {
    State { stack: Vec<Frame<'a>>, fd: usize, f: &'a MachFunction, sp: Value, pc: usize, regs: LocMap, mem: Mem },
    Call { stack: Vec<Frame<'a>>, fd: usize, regs: LocMap, mem: Mem },
    Return { stack: Vec<Frame<'a>>, regs: LocMap, mem: Mem },
}

fn offset(v: Value, d: i32) -> Option<Value> {
    match v {
        Value::Ptr(b, o) => Some(Value::Ptr(b, o.wrapping_add(d))),
        _ => None,
    }
}

fn parent_sp(stack: &[Frame<'_>]) -> Value {
    stack.last().map_or(NULL, |fr| fr.sp)
}

fn parent_ra(stack: &[Frame<'_>]) -> Value {
    stack.last().map_or(NULL, |fr| fr.ra)
}

pub struct MachInterp<'a> {
    pub prog: &'a MachProgram,
    pub genv: Genv,
    init_mem: Mem,
    /// Return address of a call at `(function, pc)`, as a byte offset in the
    /// function's code; defaults to `pc + 1`.
    pub retaddr: BTreeMap<(usize, usize), i32>,
}

impl<'a> MachInterp<'a> {
    pub fn new(prog: &'a MachProgram) -> Result<Self, alloc::string::String> {
        let (genv, init_mem) = globalenv(prog)?;
        Ok(MachInterp { prog, genv, init_mem, retaddr: BTreeMap::new() })
    }

    fn sig_of(&self, fd: usize) -> &'a Signature {
        match &self.prog.functions[fd].1 {
            FunDef::Internal(f) => &f.sig,
            FunDef::External(ef) => &ef.sig,
        }
    }

    fn find_function(&self, fr: &FnRef<MReg>, regs: &LocMap, sig: &Signature) -> Option<usize> {
        let v = match fr {
            FnRef::Reg(r) => regs.get(Loc::Reg(*r)),
            FnRef::Symbol(id) => self.genv.symbol_address(id, 0)?,
        };
        let fd = self.genv.find_funct(v)?;
        (self.sig_of(fd) == sig).then_some(fd)
    }

    fn return_address(&self, fd: usize, pc: usize) -> Value {
        let ofs = self.retaddr.get(&(fd, pc)).copied().unwrap_or(pc as i32);
        Value::Ptr(Genv::funct_block(fd), ofs)
    }

    /// Checks the link and return address slots, then frees the frame.
    fn leave(&self, stack: &[Frame<'a>], f: &MachFunction, sp: Value, mem: &mut Mem) -> Option<()> {
        if mem.loadv(Chunk::Int32, offset(sp, f.link_ofs)?)? != parent_sp(stack) {
            return None;
        }
        if mem.loadv(Chunk::Int32, offset(sp, f.retaddr_ofs)?)? != parent_ra(stack) {
            return None;
        }
        let Value::Ptr(b, _) = sp else { return None };
        mem.free(b);
        Some(())
    }

    #[allow(clippy::too_many_arguments)]
    fn exec(
        &self,
        mut stack: Vec<Frame<'a>>,
        fd: usize,
        f: &'a MachFunction,
        sp: Value,
        pc: usize,
        mut regs: LocMap,
        mut mem: Mem,
    ) -> Option<MachState<'a>> {
        let next = |pc, regs, mem, stack| Some(MachState::State { stack, fd, f, sp, pc, regs, mem });
        let vals = |regs: &LocMap, rs: &[MReg]| rs.iter().map(|r| regs.get(Loc::Reg(*r))).collect::<Vec<_>>();
        match f.code.get(pc)? {
            Instr::Label(_) => next(pc + 1, regs, mem, stack),
            Instr::Goto(l) => next(find_label(&f.code, *l)?, regs, mem, stack),
            Instr::GetStack(ofs, ty, r) => {
                let v = mem.loadv(Chunk::of_typ(*ty), offset(sp, *ofs)?)?;
                regs.set(Loc::Reg(*r), v);
                next(pc + 1, regs, mem, stack)
            }
            Instr::SetStack(r, ofs, ty) => {
                mem.storev(Chunk::of_typ(*ty), offset(sp, *ofs)?, regs.get(Loc::Reg(*r)))?;
                next(pc + 1, regs, mem, stack)
            }
            Instr::GetParent(ofs, ty, r) => {
                let psp = mem.loadv(Chunk::Int32, offset(sp, f.link_ofs)?)?;
                let v = mem.loadv(Chunk::of_typ(*ty), offset(psp, *ofs)?)?;
                regs.set(Loc::Reg(*r), v);
                next(pc + 1, regs, mem, stack)
            }
            Instr::Op(op, args, d) => {
                let v = eval_op(&self.genv, sp, op, &vals(&regs, args))?;
                regs.set(Loc::Reg(*d), v);
                next(pc + 1, regs, mem, stack)
            }
            Instr::Load(chunk, mode, args, d) => {
                let a = eval_addressing(&self.genv, sp, mode, &vals(&regs, args))?;
                let v = mem.loadv(*chunk, a)?;
                regs.set(Loc::Reg(*d), v);
                next(pc + 1, regs, mem, stack)
            }
            Instr::Store(chunk, mode, args, src) => {
                let a = eval_addressing(&self.genv, sp, mode, &vals(&regs, args))?;
                mem.storev(*chunk, a, regs.get(Loc::Reg(*src)))?;
                next(pc + 1, regs, mem, stack)
            }
            Instr::Call(sig, fr) => {
                let callee = self.find_function(fr, &regs, sig)?;
                let ra = self.return_address(fd, pc + 1);
                stack.push(Frame { fd, f, sp, ra, pc: pc + 1 });
                Some(MachState::Call { stack, fd: callee, regs, mem })
            }
            Instr::Tailcall(sig, fr) => {
                let callee = self.find_function(fr, &regs, sig)?;
                self.leave(&stack, f, sp, &mut mem)?;
                Some(MachState::Call { stack, fd: callee, regs, mem })
            }
            Instr::Cond(c, args, l) => {
                if eval_condition(c, &vals(&regs, args))? {
                    next(find_label(&f.code, *l)?, regs, mem, stack)
                } else {
                    next(pc + 1, regs, mem, stack)
                }
            }
            Instr::Return => {
                self.leave(&stack, f, sp, &mut mem)?;
                Some(MachState::Return { stack, regs, mem })
            }
        }
    }
}

impl<'a> Semantics for MachInterp<'a> {
    type State = MachState<'a>;

    fn initial_state(&self) -> Option<MachState<'a>> {
        let b = self.genv.find_symbol(&self.prog.main)?;
        let fd = self.genv.find_funct_ptr(b)?;
        if !self.sig_of(fd).args.is_empty() {
            return None;
        }
        Some(MachState::Call { stack: Vec::new(), fd, regs: LocMap::new(), mem: self.init_mem.clone() })
    }

    fn step(&self, st: MachState<'a>, world: &mut World) -> Option<(Option<Event>, MachState<'a>)> {
        match st {
            MachState::State { stack, fd, f, sp, pc, regs, mem } => {
                self.exec(stack, fd, f, sp, pc, regs, mem).map(|s| (None, s))
            }
            MachState::Call { stack, fd, mut regs, mut mem } => match &self.prog.functions[fd].1 {
                FunDef::Internal(f) => {
                    let b = mem.alloc(f.stack_low, f.stack_high);
                    let sp = Value::Ptr(b, 0);
                    mem.storev(Chunk::Int32, offset(sp, f.link_ofs)?, parent_sp(&stack))?;
                    mem.storev(Chunk::Int32, offset(sp, f.retaddr_ofs)?, parent_ra(&stack))?;
                    Some((None, MachState::State { stack, fd, f, sp, pc: 0, regs, mem }))
                }
                FunDef::External(ef) => {
                    let psp = parent_sp(&stack);
                    let mut args = Vec::new();
                    for l in loc_arguments(&ef.sig) {
                        args.push(match l {
                            Loc::Reg(r) => regs.get(Loc::Reg(r)),
                            Loc::Slot(s) => mem.loadv(Chunk::of_typ(s.ty), offset(psp, outgoing_ofs(s.ty, s.ofs))?)?,
                        });
                    }
                    let (ev, v) = world.call(ef, &args)?;
                    if let Some(r) = loc_result(&ef.sig) {
                        regs.set(Loc::Reg(r), v);
                    }
                    Some((Some(ev), MachState::Return { stack, regs, mem }))
                }
            },
            MachState::Return { mut stack, regs, mem } => {
                let Frame { fd, f, sp, pc, .. } = stack.pop()?;
                Some((None, MachState::State { stack, fd, f, sp, pc, regs, mem }))
            }
        }
    }

    fn final_state(&self, st: &MachState<'a>) -> Option<i32> {
        match st {
            MachState::Return { stack, regs, .. } if stack.is_empty() => match regs.get(Loc::Reg(MReg::R(3))) {
                Value::Int(n) => Some(n),
                _ => None,
            },
            _ => None,
        }
    }
}

/// Runs the program and checks that every internal function returns (or
/// tail calls) with the callee-save registers it was entered with.
/// Returns the number of checked exits.
pub fn check_callee_save(sem: &MachInterp<'_>, mut world: World, fuel: u64) -> Result<usize, alloc::string::String> {
    let snapshot = |regs: &LocMap| regs.filter(|l| matches!(l, Loc::Reg(r) if r.is_callee_save()));
    let mut saved: Vec<LocMap> = Vec::new();
    let mut checked = 0;
    let Some(mut st) = sem.initial_state() else {
        return Ok(0);
    };
    for _ in 0..fuel {
        let exiting = match &st {
            MachState::State { f, pc, .. } => {
                matches!(f.code.get(*pc), Some(Instr::Return | Instr::Tailcall(..)))
            }
            _ => false,
        };
        let entering =
            matches!(&st, MachState::Call { fd, .. } if matches!(sem.prog.functions[*fd].1, FunDef::Internal(_)));
        let Some((_, next)) = sem.step(st, &mut world) else {
            break;
        };
        match &next {
            MachState::State { regs, .. } if entering => saved.push(snapshot(regs)),
            MachState::Return { regs, .. } | MachState::Call { regs, .. } if exiting => {
                let s = saved.pop().ok_or("exit without entry")?;
                if s != snapshot(regs) {
                    return Err(alloc::format!("callee-save registers changed: {s:?} vs {:?}", snapshot(regs)));
                }
                checked += 1;
            }
            _ => {}
        }
        st = next;
    }
    Ok(checked)
}
