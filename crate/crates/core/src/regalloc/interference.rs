//! Interference graphs: conflicts between pseudo-registers, conflicts with
//! machine registers, and move affinities used for coalescing.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;

use super::liveness::{live_at_entry, RegSet};
use crate::dataflow::Solution;
use crate::locs::{loc_arguments, loc_parameters, loc_result, Loc, MReg};
use crate::ops::Operation;
use crate::rtl::{Instr, Reg, RtlFunction};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Graph {
    /// Unordered pairs stored with the smaller register first.
    pub edges: BTreeSet<(Reg, Reg)>,
    pub mach: BTreeSet<(Reg, MReg)>,
    pub affinities: BTreeSet<(Reg, Reg)>,
    pub preferences: BTreeSet<(Reg, MReg)>,
}

impl Graph {
    pub fn add_edge(&mut self, a: Reg, b: Reg) {
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
    }

    pub fn interferes(&self, a: Reg, b: Reg) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn add_affinity(&mut self, a: Reg, b: Reg) {
        if a != b {
            self.affinities.insert((a.min(b), a.max(b)));
        }
    }

    fn prefer(&mut self, r: Reg, l: Loc) {
        if let Loc::Reg(m) = l {
            self.preferences.insert((r, m));
        }
    }

    /// Sorted edge list, one per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (a, b) in &self.edges {
            out.push_str(&format!("x{a} -- x{b}\n"));
        }
        for (a, m) in &self.mach {
            out.push_str(&format!("x{a} -- {m}\n"));
        }
        for (a, b) in &self.affinities {
            out.push_str(&format!("x{a} ~~ x{b}\n"));
        }
        for (a, m) in &self.preferences {
            out.push_str(&format!("x{a} ~~ {m}\n"));
        }
        out
    }
}

pub fn build(f: &RtlFunction, live: &Solution<RegSet>) -> Graph {
    let mut g = Graph::default();
    let empty = RegSet::default();
    for (l, i) in &f.code {
        let after = live.get(l).unwrap_or(&empty);
        match i {
            Instr::Op(Operation::Move, args, d, _) if args.len() == 1 => {
                if after.0.contains(d) {
                    for &r in &after.0 {
                        if r != args[0] {
                            g.add_edge(*d, r);
                        }
                    }
                    g.add_affinity(args[0], *d);
                }
            }
            Instr::Op(_, _, d, _) | Instr::Load(_, _, _, d, _) => {
                if after.0.contains(d) {
                    for &r in &after.0 {
                        g.add_edge(*d, r);
                    }
                }
            }
            Instr::Call(sig, _, args, d, _) => {
                // The result is written at return even when it is dead.
                for &r in &after.0 {
                    if Some(r) != *d {
                        for m in crate::locs::MReg::all().filter(|m| m.is_caller_save()) {
                            g.mach.insert((r, m));
                        }
                    }
                    if let Some(d) = d {
                        g.add_edge(*d, r);
                    }
                }
                for (&a, l) in args.iter().zip(loc_arguments(sig)) {
                    g.prefer(a, l);
                }
                if let (Some(d), Some(m)) = (d, loc_result(sig)) {
                    g.prefer(*d, Loc::Reg(m));
                }
            }
            Instr::Tailcall(sig, _, args) => {
                for (&a, l) in args.iter().zip(loc_arguments(sig)) {
                    g.prefer(a, l);
                }
            }
            Instr::Return(Some(r)) => {
                if let Some(m) = loc_result(&f.sig) {
                    g.prefer(*r, Loc::Reg(m));
                }
            }
            _ => {}
        }
    }
    // Parameters are defined simultaneously on entry.
    let entry = live_at_entry(f, live);
    for (i, &p) in f.params.iter().enumerate() {
        for &q in &f.params[i + 1..] {
            g.add_edge(p, q);
        }
        for &r in &entry.0 {
            if !f.params.contains(&r) {
                g.add_edge(p, r);
            }
        }
    }
    for (&p, l) in f.params.iter().zip(loc_parameters(&f.sig)) {
        g.prefer(p, l);
    }
    g
}
