//! Single-fault injection into the artifacts checked by validators: register
//! colorings, node enumerations and RTL register typings. Every mutant
//! must be rejected and every original accepted.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::base::Typ;
use crate::locs::{temps, Loc, MReg, Slot, SlotKind};
use crate::ltl::{LtlFunction, Node};
use crate::ltlin::linearize::{enumerate, reachable, validate_enum};
use crate::regalloc::{allocate_function, validate_coloring, Coloring, Graph};
use crate::rtl::typing::{self, RegTypes};
use crate::rtl::{FnRef, Instr, Reg, RtlFunction, RtlProgram};

pub const COLOR_CLASH: &str = "coloring: interfering registers share a location";
pub const COLOR_TYPE: &str = "coloring: location of the wrong type";
pub const COLOR_INVALID: &str = "coloring: temporary, reserved or non-local location";
pub const ENUM_DUPLICATE: &str = "enumeration: node listed twice";
pub const ENUM_MISSING: &str = "enumeration: reachable node missing";
pub const TYPE_ENV: &str = "typing: register given the other type";
pub const TYPE_OPERAND: &str = "typing: operand replaced by one of the other type";

pub const CLASSES: [&str; 7] =
    [COLOR_CLASH, COLOR_TYPE, COLOR_INVALID, ENUM_DUPLICATE, ENUM_MISSING, TYPE_ENV, TYPE_OPERAND];

fn other(t: Typ) -> Typ {
    match t {
        Typ::Int => Typ::Float,
        Typ::Float => Typ::Int,
    }
}

/// Mutants that each break exactly one condition of the coloring check.
pub fn coloring_mutants(g: &Graph, types: &RegTypes, phi: &Coloring) -> Vec<(&'static str, Coloring)> {
    let mut out = Vec::new();
    let with = |r: Reg, l: Loc| {
        let mut m = phi.clone();
        m.insert(r, l);
        m
    };
    for &(a, b) in &g.edges {
        if types.get(&a) == types.get(&b) {
            out.push((COLOR_CLASH, with(a, phi[&b])));
        }
    }
    for &(r, m) in &g.mach {
        if types.get(&r) == Some(&m.typ()) && !m.is_temporary() && !m.is_reserved() {
            out.push((COLOR_CLASH, with(r, Loc::Reg(m))));
        }
    }
    for (k, (&r, &t)) in types.iter().enumerate() {
        // Far above every real slot, so only the type is wrong.
        let far = 1 << 20;
        out.push((COLOR_TYPE, with(r, Loc::local(other(t), far + 2 * k as i32))));
        let bad = [
            Loc::Reg(temps(t)[k % 3]),
            Loc::Reg(if t == Typ::Int { MReg::R(1) } else { MReg::F(0) }),
            Loc::Slot(Slot::new(SlotKind::Incoming, t, far)),
            Loc::Slot(Slot::new(SlotKind::Outgoing, t, far)),
        ];
        out.push((COLOR_INVALID, with(r, bad[k % bad.len()])));
    }
    out
}

/// Mutants of a valid enumeration violating one of its two conditions.
pub fn enum_mutants(f: &LtlFunction, order: &[Node]) -> Vec<(&'static str, Vec<Node>)> {
    let mut out = Vec::new();
    for (i, &n) in order.iter().enumerate() {
        let mut m = order.to_vec();
        m.insert((i * 7 + 3) % (order.len() + 1), n);
        out.push((ENUM_DUPLICATE, m));
    }
    for n in reachable(f) {
        out.push((ENUM_MISSING, order.iter().copied().filter(|&x| x != n).collect()));
    }
    out
}

fn regs_mut(i: &mut Instr) -> Vec<&mut Reg> {
    let mut v: Vec<&mut Reg> = Vec::new();
    match i {
        Instr::Nop(_) => {}
        Instr::Op(_, args, d, _) | Instr::Load(_, _, args, d, _) | Instr::Store(_, _, args, d, _) => {
            v.extend(args.iter_mut());
            v.push(d);
        }
        Instr::Call(_, f, args, d, _) => {
            if let FnRef::Reg(r) = f {
                v.push(r);
            }
            v.extend(args.iter_mut());
            v.extend(d.iter_mut());
        }
        Instr::Tailcall(_, f, args) => {
            if let FnRef::Reg(r) = f {
                v.push(r);
            }
            v.extend(args.iter_mut());
        }
        Instr::Cond(_, args, ..) => v.extend(args.iter_mut()),
        Instr::Return(r) => v.extend(r.iter_mut()),
    }
    v
}

/// Registers whose type some instruction or the signature pins down: all
/// mentioned registers except those appearing only in `x := x`.
fn constrained(f: &RtlFunction) -> Vec<Reg> {
    let mut rs: Vec<Reg> = f.params.clone();
    for i in f.code.values() {
        match i {
            Instr::Op(crate::ops::Operation::Move, args, d, _) if args.first() == Some(d) => {}
            _ => {
                let mut i = i.clone();
                rs.extend(regs_mut(&mut i).into_iter().map(|r| *r));
            }
        }
    }
    rs.sort_unstable();
    rs.dedup();
    rs
}

/// Ill-typed variants of a well-typed function and its typing.
pub fn typing_mutants(f: &RtlFunction, env: &RegTypes) -> Vec<(&'static str, RtlFunction, RegTypes)> {
    let mut out = Vec::new();
    for r in constrained(f) {
        let mut e = env.clone();
        e.insert(r, other(env[&r]));
        out.push((TYPE_ENV, f.clone(), e));
    }
    let fresh = f.max_reg() + 1;
    for (&n, i) in &f.code {
        let k = regs_mut(&mut i.clone()).len();
        for pos in 0..k {
            let mut g = f.clone();
            let slot = regs_mut(g.code.get_mut(&n).unwrap()).into_iter().nth(pos).unwrap();
            let t = other(env[slot]);
            *slot = fresh;
            let mut e = env.clone();
            e.insert(fresh, t);
            out.push((TYPE_OPERAND, g, e));
        }
    }
    out
}

/// Injected and rejected mutants per class, and accepted originals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MutationReport {
    pub classes: BTreeMap<&'static str, (usize, usize)>,
    pub originals: usize,
    pub originals_accepted: usize,
    pub escaped: Vec<String>,
}

impl MutationReport {
    fn record(&mut self, class: &'static str, rejected: bool, what: impl FnOnce() -> String) {
        let e = self.classes.entry(class).or_default();
        e.0 += 1;
        if rejected {
            e.1 += 1;
        } else if self.escaped.len() < 10 {
            self.escaped.push(what());
        }
    }

    fn original(&mut self, accepted: bool) {
        self.originals += 1;
        self.originals_accepted += accepted as usize;
    }

    pub fn perfect(&self) -> bool {
        self.originals == self.originals_accepted
            && CLASSES.iter().all(|c| matches!(self.classes.get(c), Some(&(n, k)) if n > 0 && n == k))
    }

    pub fn merge(&mut self, other: &MutationReport) {
        for (c, (n, k)) in &other.classes {
            let e = self.classes.entry(c).or_default();
            e.0 += n;
            e.1 += k;
        }
        self.originals += other.originals;
        self.originals_accepted += other.originals_accepted;
        self.escaped.extend(other.escaped.iter().cloned());
    }
}

/// Runs the three validators on every internal function of `p` and on all
/// single-fault mutants of their artifacts.
pub fn run_suite(p: &RtlProgram) -> Result<MutationReport, String> {
    let mut rep = MutationReport::default();
    for (name, f) in p.internal_functions() {
        let env = typing::infer(f);
        rep.original(typing::check(f, &env).is_ok());
        for (c, g, e) in typing_mutants(f, &env) {
            rep.record(c, typing::check(&g, &e).is_err(), || format!("{name}: {c}"));
        }
        let (ltl, a) = allocate_function(f)?;
        rep.original(validate_coloring(&a.graph, &a.types, &a.coloring));
        for (c, phi) in coloring_mutants(&a.graph, &a.types, &a.coloring) {
            rep.record(c, !validate_coloring(&a.graph, &a.types, &phi), || format!("{name}: {c}"));
        }
        let order = enumerate(&ltl);
        rep.original(validate_enum(&ltl, &order));
        for (c, o) in enum_mutants(&ltl, &order) {
            rep.record(c, !validate_enum(&ltl, &o), || format!("{name}: {c} {o:?}"));
        }
    }
    Ok(rep)
}
