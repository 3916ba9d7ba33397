//! RTL to LTL: per-instruction substitution of locations for registers,
//! turning coalesced moves and dead computations into nops.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::coloring::{color, Coloring};
use super::interference::{build, Graph};
use super::liveness::{analyze, RegSet};
use super::validate::check;
use crate::dataflow::Solution;
use crate::locs::Loc;
use crate::ltl::{self, LtlFunction};
use crate::ops::Operation;
use crate::rtl::typing::{type_function, RegTypes};
use crate::rtl::{FnRef, Instr, Reg, RtlFunction};

/// Everything computed while allocating one function.
#[derive(Clone, Debug)]
pub struct Allocation {
    pub types: RegTypes,
    pub live: Solution<RegSet>,
    pub graph: Graph,
    pub coloring: Coloring,
}

pub fn apply_alloc(f: &RtlFunction, phi: &Coloring, live: &Solution<RegSet>) -> LtlFunction {
    let loc = |r: &Reg| phi.get(r).copied().unwrap_or(Loc::Reg(crate::locs::MReg::R(0)));
    let locs = |rs: &[Reg]| rs.iter().map(loc).collect::<Vec<Loc>>();
    let fnref = |fr: &FnRef<Reg>| match fr {
        FnRef::Reg(r) => FnRef::Reg(loc(r)),
        FnRef::Symbol(id) => FnRef::Symbol(id.clone()),
    };
    let empty = RegSet::default();
    let code = f
        .code
        .iter()
        .map(|(&l, i)| {
            let dead = |d: &Reg| !live.get(&l).unwrap_or(&empty).0.contains(d);
            let j = match i {
                Instr::Nop(s) => ltl::Instr::Nop(*s),
                Instr::Op(Operation::Move, args, d, s) if args.len() == 1 && loc(&args[0]) == loc(d) => {
                    ltl::Instr::Nop(*s)
                }
                Instr::Op(_, _, d, s) | Instr::Load(_, _, _, d, s) if dead(d) => ltl::Instr::Nop(*s),
                Instr::Op(op, args, d, s) => ltl::Instr::Op(op.clone(), locs(args), loc(d), *s),
                Instr::Load(c, m, args, d, s) => ltl::Instr::Load(*c, m.clone(), locs(args), loc(d), *s),
                Instr::Store(c, m, args, src, s) => ltl::Instr::Store(*c, m.clone(), locs(args), loc(src), *s),
                Instr::Call(sig, fr, args, d, s) => {
                    ltl::Instr::Call(sig.clone(), fnref(fr), locs(args), d.as_ref().map(loc), *s)
                }
                Instr::Tailcall(sig, fr, args) => ltl::Instr::Tailcall(sig.clone(), fnref(fr), locs(args)),
                Instr::Cond(c, args, t, e) => ltl::Instr::Cond(c.clone(), locs(args), *t, *e),
                Instr::Return(r) => ltl::Instr::Return(r.as_ref().map(loc)),
            };
            (l, j)
        })
        .collect::<BTreeMap<_, _>>();
    LtlFunction { sig: f.sig.clone(), params: locs(&f.params), stacksize: f.stacksize, entrypoint: f.entrypoint, code }
}

/// Types, liveness, interference, coloring and its validation, then LTL
/// generation. Fails if the types or the coloring do not validate.
pub fn allocate_function(f: &RtlFunction) -> Result<(LtlFunction, Allocation), String> {
    allocate_function_with(f, |_, _, _| {})
}

/// Coloring hook for fault injection: `tamper` may edit the candidate
/// coloring before it is validated.
pub type Tamper = fn(&Graph, &RegTypes, &mut Coloring);

pub fn allocate_function_with(
    f: &RtlFunction,
    tamper: impl Fn(&Graph, &RegTypes, &mut Coloring),
) -> Result<(LtlFunction, Allocation), String> {
    let types = type_function(f)?;
    let live = analyze(f);
    let graph = build(f, &live);
    let mut coloring = color(&graph, &types);
    tamper(&graph, &types, &mut coloring);
    check(&graph, &types, &coloring).map_err(|e| alloc::format!("register allocation: {e}"))?;
    let g = apply_alloc(f, &coloring, &live);
    Ok((g, Allocation { types, live, graph, coloring }))
}
