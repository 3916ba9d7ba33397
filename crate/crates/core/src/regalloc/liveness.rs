//! Backward liveness over pseudo-registers. The solution maps each node to
//! the registers live after it.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::dataflow::{kildall_solve, Direction, JoinLattice, Lattice, Problem, Solution};
use crate::rtl::{Instr, Node, Reg, RtlFunction};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegSet(pub BTreeSet<Reg>);

impl Lattice for RegSet {
    fn ge(&self, other: &RegSet) -> bool {
        self.0.is_superset(&other.0)
    }
}

impl JoinLattice for RegSet {
    fn bot() -> RegSet {
        RegSet::default()
    }

    fn lub(&self, other: &RegSet) -> RegSet {
        RegSet(self.0.union(&other.0).copied().collect())
    }
}

/// Registers live before `i` given those live after it. An op or load
/// whose result is dead uses nothing, since it will be deleted.
pub fn transfer_instr(i: Option<&Instr>, after: &RegSet) -> RegSet {
    let mut s = after.0.clone();
    let Some(i) = i else { return after.clone() };
    match i {
        Instr::Op(_, _, d, _) | Instr::Load(_, _, _, d, _) if !s.contains(d) => {}
        _ => {
            if let Some(d) = i.def() {
                s.remove(&d);
            }
            s.extend(i.uses());
        }
    }
    RegSet(s)
}

pub fn transfer(f: &RtlFunction, l: Node, after: &RegSet) -> RegSet {
    transfer_instr(f.code.get(&l), after)
}

pub fn problem<'a>(
    succs: &'a alloc::collections::BTreeMap<Node, Vec<Node>>,
    t: &'a dyn Fn(Node, &RegSet) -> RegSet,
) -> Problem<'a, RegSet> {
    Problem { successors: succs, transfer: t, cstrs: Vec::new(), direction: Direction::Backward }
}

/// Live-after sets; every register is live everywhere if the solver fails.
pub fn analyze(f: &RtlFunction) -> Solution<RegSet> {
    let succs = crate::opt::constprop::successor_map(f);
    let t = |l: Node, a: &RegSet| transfer(f, l, a);
    match kildall_solve(&problem(&succs, &t)) {
        Some(sol) => sol,
        None => {
            let all = RegSet((1..=f.max_reg()).collect());
            f.code.keys().map(|&n| (n, all.clone())).collect()
        }
    }
}

/// Registers live on entry to the function.
pub fn live_at_entry(f: &RtlFunction, live: &Solution<RegSet>) -> RegSet {
    let after = live.get(&f.entrypoint).cloned().unwrap_or_default();
    transfer(f, f.entrypoint, &after)
}
