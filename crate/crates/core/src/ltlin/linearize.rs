//! LTL to LTLin: an untrusted enumeration of the CFG nodes, its validator,
//! and code emission that omits jumps to the next instruction.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ast::{Instr, Label, LtlinFunction};
use crate::dataflow::{kildall_solve, Direction, JoinLattice, Lattice, Problem};
use crate::ltl::{self, LtlFunction, Node};

/// Depth-first preorder from the entry, visiting the successor that should
/// follow a node first: the only one, or the true arm of a condition.
pub fn enumerate(f: &LtlFunction) -> Vec<Node> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    let mut stack = vec![f.entrypoint];
    while let Some(n) = stack.pop() {
        if !f.code.contains_key(&n) || !seen.insert(n) {
            continue;
        }
        order.push(n);
        for s in f.code[&n].successors().into_iter().rev() {
            stack.push(s);
        }
    }
    order
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Reached(bool);

impl Lattice for Reached {
    fn ge(&self, other: &Reached) -> bool {
        self.0 || !other.0
    }
}

impl JoinLattice for Reached {
    fn bot() -> Reached {
        Reached(false)
    }
    fn lub(&self, other: &Reached) -> Reached {
        Reached(self.0 || other.0)
    }
}

/// Nodes reachable from the entry, by a forward dataflow analysis.
pub fn reachable(f: &LtlFunction) -> BTreeSet<Node> {
    let succs = f.successor_map();
    let t = |_: Node, a: &Reached| *a;
    let p = Problem {
        successors: &succs,
        transfer: &t,
        cstrs: vec![(f.entrypoint, Reached(true))],
        direction: Direction::Forward,
    };
    match kildall_solve(&p) {
        Some(sol) => sol.into_iter().filter(|(_, r)| r.0).map(|(n, _)| n).collect(),
        None => f.code.keys().copied().collect(),
    }
}

/// Accepts `order` iff no node appears twice, every node of `order` exists
/// in `f`, and every reachable node appears.
pub fn check_enum(f: &LtlFunction, order: &[Node]) -> Result<(), String> {
    let mut seen = BTreeSet::new();
    for &n in order {
        if !seen.insert(n) {
            return Err(format!("node {n} enumerated twice"));
        }
        if !f.code.contains_key(&n) {
            return Err(format!("node {n} does not exist"));
        }
    }
    if let Some(n) = reachable(f).into_iter().find(|n| !seen.contains(n)) {
        return Err(format!("reachable node {n} not enumerated"));
    }
    Ok(())
}

pub fn validate_enum(f: &LtlFunction, order: &[Node]) -> bool {
    check_enum(f, order).is_ok()
}

/// Emits the nodes of a validated `order`, then drops unreferenced labels.
pub fn linearize(f: &LtlFunction, order: &[Node]) -> LtlinFunction {
    let mut code = Vec::new();
    if order.first() != Some(&f.entrypoint) {
        code.push(Instr::Goto(f.entrypoint));
    }
    for (k, &n) in order.iter().enumerate() {
        let next = order.get(k + 1).copied();
        let goto = |code: &mut Vec<Instr>, s: Node| {
            if Some(s) != next {
                code.push(Instr::Goto(s));
            }
        };
        code.push(Instr::Label(n));
        match &f.code[&n] {
            ltl::Instr::Nop(s) => goto(&mut code, *s),
            ltl::Instr::Op(op, args, d, s) => {
                code.push(Instr::Op(op.clone(), args.clone(), *d));
                goto(&mut code, *s);
            }
            ltl::Instr::Load(c, m, args, d, s) => {
                code.push(Instr::Load(*c, m.clone(), args.clone(), *d));
                goto(&mut code, *s);
            }
            ltl::Instr::Store(c, m, args, src, s) => {
                code.push(Instr::Store(*c, m.clone(), args.clone(), *src));
                goto(&mut code, *s);
            }
            ltl::Instr::Call(sig, fr, args, d, s) => {
                code.push(Instr::Call(sig.clone(), fr.clone(), args.clone(), *d));
                goto(&mut code, *s);
            }
            ltl::Instr::Tailcall(sig, fr, args) => code.push(Instr::Tailcall(sig.clone(), fr.clone(), args.clone())),
            ltl::Instr::Cond(c, args, t, e) => {
                if Some(*e) == next {
                    code.push(Instr::Cond(c.clone(), args.clone(), *t));
                } else if Some(*t) == next {
                    code.push(Instr::Cond(c.negate(), args.clone(), *e));
                } else {
                    code.push(Instr::Cond(c.clone(), args.clone(), *t));
                    code.push(Instr::Goto(*e));
                }
            }
            ltl::Instr::Return(r) => code.push(Instr::Return(*r)),
        }
    }
    let used: BTreeSet<Label> = code
        .iter()
        .filter_map(|i| match i {
            Instr::Goto(l) | Instr::Cond(.., l) => Some(*l),
            _ => None,
        })
        .collect();
    code.retain(|i| !matches!(i, Instr::Label(l) if !used.contains(l)));
    LtlinFunction { sig: f.sig.clone(), params: f.params.clone(), stacksize: f.stacksize, code }
}

/// Enumeration, validation, emission. Fails if the enumeration is invalid.
pub fn transl_function(f: &LtlFunction) -> Result<LtlinFunction, String> {
    let order = enumerate(f);
    check_enum(f, &order).map_err(|e| format!("linearization: {e}"))?;
    Ok(linearize(f, &order))
}

/// Counts instructions of each kind; used by dumps and tests.
pub fn goto_count(f: &LtlinFunction) -> usize {
    f.code.iter().filter(|i| matches!(i, Instr::Goto(_))).count()
}
