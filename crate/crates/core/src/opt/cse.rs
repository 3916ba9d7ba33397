//! Common subexpression elimination by value numbering over extended
//! basic blocks. Merge points start from the empty numbering.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::base::{Chunk, Value};
use crate::dataflow::{ebb_solve, Direction, Lattice, Problem, Solution, TopLattice};
use crate::ops::{Addressing, Operation};
use crate::rtl::{Instr, Node, Reg, RtlFunction};

pub type ValNum = u32;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rhs {
    Op(Operation, Vec<ValNum>),
    Load(Chunk, Addressing, Vec<ValNum>),
}

/// Registers to value numbers, equations `v = rhs`, and the next fresh
/// number. All numbers used are below `next`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Numbering {
    pub next: ValNum,
    pub regs: BTreeMap<Reg, ValNum>,
    pub eqs: BTreeSet<(ValNum, Rhs)>,
}

impl Numbering {
    pub fn is_empty(&self) -> bool {
        self.regs.is_empty() && self.eqs.is_empty()
    }

    fn fresh(&mut self) -> ValNum {
        let v = self.next;
        self.next += 1;
        v
    }

    /// The number of `r`, allocating one if `r` has none.
    pub fn valnum_reg(&mut self, r: Reg) -> ValNum {
        if let Some(&v) = self.regs.get(&r) {
            return v;
        }
        let v = self.fresh();
        self.regs.insert(r, v);
        v
    }

    pub fn valnum_regs(&mut self, rs: &[Reg]) -> Vec<ValNum> {
        rs.iter().map(|&r| self.valnum_reg(r)).collect()
    }

    pub fn find_rhs(&self, rhs: &Rhs) -> Option<ValNum> {
        self.eqs.iter().find(|(_, e)| e == rhs).map(|(v, _)| *v)
    }

    /// Binds `d` to the number of `rhs`, adding an equation if needed.
    fn add_rhs(&mut self, d: Reg, rhs: Rhs) {
        let v = match self.find_rhs(&rhs) {
            Some(v) => v,
            None => {
                let v = self.fresh();
                self.eqs.insert((v, rhs));
                v
            }
        };
        self.regs.insert(d, v);
    }

    /// The smallest register currently holding number `v`.
    pub fn reg_holding(&self, v: ValNum) -> Option<Reg> {
        self.regs.iter().find(|(_, &w)| w == v).map(|(&r, _)| r)
    }

    fn lookup_regs(&self, rs: &[Reg]) -> Option<Vec<ValNum>> {
        rs.iter().map(|r| self.regs.get(r).copied()).collect()
    }
}

impl Lattice for Numbering {
    fn ge(&self, other: &Numbering) -> bool {
        self.is_empty() || self == other
    }
}

impl TopLattice for Numbering {
    fn top() -> Numbering {
        Numbering::default()
    }
}

/// Numbering after executing node `l`. Argument registers without a
/// number receive fresh ones first, so callers can observe them.
pub fn transfer(f: &RtlFunction, l: Node, n: &Numbering) -> Numbering {
    let mut n = n.clone();
    match f.code.get(&l) {
        Some(Instr::Op(Operation::Move, args, d, _)) if args.len() == 1 => {
            let v = n.valnum_reg(args[0]);
            n.regs.insert(*d, v);
        }
        Some(Instr::Op(op, args, d, _)) => {
            let vs = n.valnum_regs(args);
            n.add_rhs(*d, Rhs::Op(op.clone(), vs));
        }
        Some(Instr::Load(chunk, mode, args, d, _)) => {
            let vs = n.valnum_regs(args);
            n.add_rhs(*d, Rhs::Load(*chunk, mode.clone(), vs));
        }
        Some(Instr::Store(..)) => n.eqs.retain(|(_, rhs)| !matches!(rhs, Rhs::Load(..))),
        Some(Instr::Call(..)) => {
            n.regs.clear();
            n.eqs.clear();
        }
        _ => {}
    }
    n
}

pub fn analyze(f: &RtlFunction) -> Option<Solution<Numbering>> {
    let succs = super::constprop::successor_map(f);
    let t = |l: Node, n: &Numbering| transfer(f, l, n);
    let p = Problem {
        successors: &succs,
        transfer: &t,
        cstrs: vec![(f.entrypoint, Numbering::top())],
        direction: Direction::Forward,
    };
    ebb_solve(&p)
}

pub fn transform_instr(i: &Instr, n: &Numbering) -> Instr {
    let (rhs, d, s) = match i {
        Instr::Op(op, args, d, s) if *op != Operation::Move && !args.is_empty() => match n.lookup_regs(args) {
            Some(vs) => (Rhs::Op(op.clone(), vs), *d, *s),
            None => return i.clone(),
        },
        Instr::Load(chunk, mode, args, d, s) => match n.lookup_regs(args) {
            Some(vs) => (Rhs::Load(*chunk, mode.clone(), vs), *d, *s),
            None => return i.clone(),
        },
        _ => return i.clone(),
    };
    match n.find_rhs(&rhs).and_then(|v| n.reg_holding(v)) {
        Some(r) => Instr::Op(Operation::Move, vec![r], d, s),
        None => i.clone(),
    }
}

pub fn cse(f: &RtlFunction) -> RtlFunction {
    let Some(sol) = analyze(f) else {
        return f.clone();
    };
    let mut g = f.clone();
    for (l, i) in g.code.iter_mut() {
        *i = transform_instr(i, &sol[l]);
    }
    g
}

/// Dynamic check that the numberings are satisfiable along a run: a
/// valuation of value numbers, logged as numbers are created, must agree
/// with register contents and make every equation true. Returns the number
/// of facts checked.
pub fn check_satisfaction(p: &crate::rtl::RtlProgram, world: crate::base::World, fuel: u64) -> Result<usize, String> {
    use crate::base::{FunDef, Genv, Mem, Semantics};
    use crate::ops::{eval_addressing, eval_op};
    use crate::rtl::interp::RtlState;
    use crate::rtl::Regs;

    type Valuation = BTreeMap<ValNum, Value>;

    fn holds(genv: &Genv, sp: Value, mem: &Mem, regs: &Regs, n: &Numbering, val: &Valuation) -> Result<usize, String> {
        let mut checks = 0;
        for (r, v) in &n.regs {
            checks += 1;
            if val.get(v) != Some(&regs.get(*r)) {
                return Err(format!("x{r} = {} but its number {v} is {:?}", regs.get(*r), val.get(v)));
            }
        }
        for (v, rhs) in &n.eqs {
            let args = |vs: &[ValNum]| vs.iter().map(|w| val.get(w).copied()).collect::<Option<Vec<Value>>>();
            let lhs = val.get(v).copied();
            let got = match rhs {
                Rhs::Op(op, vs) => args(vs).and_then(|a| eval_op(genv, sp, op, &a)),
                Rhs::Load(chunk, mode, vs) => {
                    args(vs).and_then(|a| eval_addressing(genv, sp, mode, &a)).and_then(|addr| mem.loadv(*chunk, addr))
                }
            };
            checks += 1;
            if lhs.is_none() || got != lhs {
                return Err(format!("equation {v} = {rhs:?} fails: {got:?} vs {lhs:?}"));
            }
        }
        Ok(checks)
    }

    let interp = crate::rtl::RtlInterp::new(p)?;
    let analyses: BTreeMap<*const RtlFunction, Solution<Numbering>> = p
        .functions
        .iter()
        .filter_map(|(_, fd)| match fd {
            FunDef::Internal(f) => analyze(f).map(|s| (f as *const RtlFunction, s)),
            FunDef::External(_) => None,
        })
        .collect();
    let mut world = world;
    let Some(mut st) = interp.initial_state() else {
        return Ok(0);
    };
    // One valuation per activation; the last belongs to the running function.
    let mut vals: Vec<Valuation> = Vec::new();
    let mut checks = 0;
    for _ in 0..fuel {
        let from = match &st {
            RtlState::State { f, sp, pc, regs, mem, .. } => {
                let sol = &analyses[&(*f as *const RtlFunction)];
                let val = vals.last_mut().ok_or("no activation")?;
                checks += holds(&interp.genv, *sp, mem, regs, &sol[pc], val).map_err(|e| format!("node {pc}: {e}"))?;
                // Numbers given to unnumbered arguments take their current values.
                let mut pre = sol[pc].clone();
                if let Some(i) = f.code.get(pc) {
                    if matches!(i, Instr::Op(..) | Instr::Load(..)) {
                        for r in i.uses() {
                            let v = pre.valnum_reg(r);
                            val.entry(v).or_insert(regs.get(r));
                        }
                    }
                }
                Some((*f, *pc, depth(&st)))
            }
            _ => None,
        };
        let Some((_, next)) = interp.step(st, &mut world) else {
            break;
        };
        let d = depth(&next);
        vals.truncate(d);
        while vals.len() < d {
            vals.push(Valuation::new());
        }
        if let RtlState::State { f, pc, regs, .. } = &next {
            let val = vals.last_mut().unwrap();
            match from {
                Some((f0, l, d0)) if core::ptr::eq(*f, f0) && d0 == d => {
                    let sol = &analyses[&(*f as *const RtlFunction)];
                    let after = transfer(f, l, &sol[&l]);
                    if sol[pc] == after && !after.is_empty() {
                        for (r, v) in &after.regs {
                            val.entry(*v).or_insert(regs.get(*r));
                        }
                    } else {
                        val.clear();
                    }
                }
                _ => val.clear(),
            }
        }
        st = next;
    }
    Ok(checks)
}

fn depth(st: &crate::rtl::interp::RtlState<'_>) -> usize {
    use crate::rtl::interp::RtlState;
    match st {
        RtlState::State { stack, .. } => stack.len() + 1,
        RtlState::Call { stack, .. } | RtlState::Return { stack, .. } => stack.len(),
    }
}
