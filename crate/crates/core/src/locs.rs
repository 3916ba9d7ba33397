//! Machine registers, abstract stack slots, location maps and the calling
//! conventions shared by LTL, LTLin, Linear and Mach.
//!
//! Register file: R1 is the stack pointer, R0 reads as zero in address
//! computations, R2 and F13 are scratch registers of the assembly generator,
//! R11-R13 and F29-F31 are spill temporaries. Everything else in R3-R31 and
//! F1-F28 is allocatable.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::base::{Signature, Typ, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MReg {
    R(u8),
    F(u8),
}

impl MReg {
    pub fn typ(self) -> Typ {
        match self {
            MReg::R(_) => Typ::Int,
            MReg::F(_) => Typ::Float,
        }
    }

    pub fn is_temporary(self) -> bool {
        matches!(self, MReg::R(11..=13) | MReg::F(29..=31))
    }

    /// Not allocatable and not a temporary: R0-R2, F0, F13.
    pub fn is_reserved(self) -> bool {
        matches!(self, MReg::R(0..=2) | MReg::F(0) | MReg::F(13))
    }

    pub fn is_caller_save(self) -> bool {
        matches!(self, MReg::R(3..=10) | MReg::F(1..=12))
    }

    pub fn is_callee_save(self) -> bool {
        matches!(self, MReg::R(14..=31) | MReg::F(14..=28))
    }

    /// Registers whose value does not survive a call.
    pub fn destroyed_at_call(self) -> bool {
        self.is_caller_save() || self.is_temporary()
    }

    pub fn all() -> impl Iterator<Item = MReg> {
        (0..32).map(MReg::R).chain((0..32).map(MReg::F))
    }
}

impl fmt::Display for MReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MReg::R(n) => write!(f, "R{n}"),
            MReg::F(n) => write!(f, "F{n}"),
        }
    }
}

/// Spill temporaries of each class, in the order `regs_for` hands them out.
pub const INT_TEMPS: [MReg; 3] = [MReg::R(11), MReg::R(12), MReg::R(13)];
pub const FLOAT_TEMPS: [MReg; 3] = [MReg::F(29), MReg::F(30), MReg::F(31)];

pub fn temps(ty: Typ) -> [MReg; 3] {
    match ty {
        Typ::Int => INT_TEMPS,
        Typ::Float => FLOAT_TEMPS,
    }
}

/// Allocatable registers of a class: caller-save ones first.
pub fn allocatable(ty: Typ) -> Vec<MReg> {
    let all: Vec<MReg> = match ty {
        Typ::Int => (0..32).map(MReg::R).collect(),
        Typ::Float => (0..32).map(MReg::F).collect(),
    };
    let ok = |r: &MReg| !r.is_reserved() && !r.is_temporary();
    let mut v: Vec<MReg> = all.iter().copied().filter(|r| ok(r) && r.is_caller_save()).collect();
    v.extend(all.iter().copied().filter(|r| ok(r) && r.is_callee_save()));
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotKind {
    Local,
    Incoming,
    Outgoing,
}

/// A stack slot of type `ty` at word index `ofs` of its area. Int slots
/// span one word, float slots two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub kind: SlotKind,
    pub ofs: i32,
    pub ty: Typ,
}

pub fn typ_words(ty: Typ) -> i32 {
    match ty {
        Typ::Int => 1,
        Typ::Float => 2,
    }
}

impl Slot {
    pub fn new(kind: SlotKind, ty: Typ, ofs: i32) -> Slot {
        Slot { kind, ofs, ty }
    }

    pub fn words(&self) -> i32 {
        typ_words(self.ty)
    }

    pub fn overlaps(&self, other: &Slot) -> bool {
        self.kind == other.kind && self.ofs < other.ofs + other.words() && other.ofs < self.ofs + self.words()
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            SlotKind::Local => "local",
            SlotKind::Incoming => "incoming",
            SlotKind::Outgoing => "outgoing",
        };
        write!(f, "{k}({},{})", self.ty, self.ofs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Loc {
    Reg(MReg),
    Slot(Slot),
}

impl Loc {
    pub fn typ(&self) -> Typ {
        match self {
            Loc::Reg(r) => r.typ(),
            Loc::Slot(s) => s.ty,
        }
    }

    /// Distinct registers never overlap; slots overlap by word range.
    pub fn overlaps(&self, other: &Loc) -> bool {
        match (self, other) {
            (Loc::Reg(a), Loc::Reg(b)) => a == b,
            (Loc::Slot(a), Loc::Slot(b)) => a.overlaps(b),
            _ => false,
        }
    }

    pub fn reg(&self) -> Option<MReg> {
        match self {
            Loc::Reg(r) => Some(*r),
            Loc::Slot(_) => None,
        }
    }

    pub fn local(ty: Typ, ofs: i32) -> Loc {
        Loc::Slot(Slot::new(SlotKind::Local, ty, ofs))
    }
}

impl From<MReg> for Loc {
    fn from(r: MReg) -> Loc {
        Loc::Reg(r)
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loc::Reg(r) => r.fmt(f),
            Loc::Slot(s) => s.fmt(f),
        }
    }
}

/// Total map from locations to values; absent locations hold `Undef`.
/// Writing a slot invalidates every slot it partially overlaps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LocMap(BTreeMap<Loc, Value>);

impl LocMap {
    pub fn new() -> LocMap {
        LocMap::default()
    }

    pub fn get(&self, l: Loc) -> Value {
        self.0.get(&l).copied().unwrap_or(Value::Undef)
    }

    pub fn set(&mut self, l: Loc, v: Value) {
        if let Loc::Slot(s) = l {
            self.0.retain(|k, _| !matches!(k, Loc::Slot(t) if t.overlaps(&s)));
        }
        if v == Value::Undef {
            self.0.remove(&l);
        } else {
            self.0.insert(l, v);
        }
    }

    pub fn list(&self, ls: &[Loc]) -> Vec<Value> {
        ls.iter().map(|&l| self.get(l)).collect()
    }

    /// Defined entries, in location order.
    pub fn iter(&self) -> impl Iterator<Item = (&Loc, &Value)> {
        self.0.iter()
    }

    /// Sets temporaries and caller-save registers to `Undef`.
    pub fn postcall(&self) -> LocMap {
        LocMap(
            self.0
                .iter()
                .filter(|(l, _)| !matches!(l, Loc::Reg(r) if r.destroyed_at_call()))
                .map(|(l, v)| (*l, *v))
                .collect(),
        )
    }

    /// Keeps only the entries satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(&Loc) -> bool) -> LocMap {
        LocMap(self.0.iter().filter(|(l, _)| keep(l)).map(|(l, v)| (*l, *v)).collect())
    }
}

const INT_PARAM_REGS: [u8; 8] = [3, 4, 5, 6, 7, 8, 9, 10];
const FLOAT_PARAM_REGS: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

/// Argument locations: integers in R3-R10, floats in F1-F8, the rest in
/// outgoing slots from left to right, floats at even word indices.
pub fn loc_arguments(sig: &Signature) -> Vec<Loc> {
    let (mut ni, mut nf, mut ofs) = (0, 0, 0);
    sig.args
        .iter()
        .map(|&ty| match ty {
            Typ::Int if ni < INT_PARAM_REGS.len() => {
                ni += 1;
                Loc::Reg(MReg::R(INT_PARAM_REGS[ni - 1]))
            }
            Typ::Float if nf < FLOAT_PARAM_REGS.len() => {
                nf += 1;
                Loc::Reg(MReg::F(FLOAT_PARAM_REGS[nf - 1]))
            }
            _ => {
                if ty == Typ::Float && ofs % 2 != 0 {
                    ofs += 1;
                }
                let s = Slot::new(SlotKind::Outgoing, ty, ofs);
                ofs += typ_words(ty);
                Loc::Slot(s)
            }
        })
        .collect()
}

/// Argument locations as seen by the callee.
pub fn loc_parameters(sig: &Signature) -> Vec<Loc> {
    loc_arguments(sig)
        .into_iter()
        .map(|l| match l {
            Loc::Slot(s) => Loc::Slot(Slot { kind: SlotKind::Incoming, ..s }),
            r => r,
        })
        .collect()
}

/// Words of outgoing area needed by a call with this signature.
pub fn outgoing_words(sig: &Signature) -> i32 {
    loc_arguments(sig)
        .iter()
        .map(|l| match l {
            Loc::Slot(s) => s.ofs + s.words(),
            Loc::Reg(_) => 0,
        })
        .max()
        .unwrap_or(0)
}

/// Absent for void signatures.
pub fn loc_result(sig: &Signature) -> Option<MReg> {
    sig.res.map(|ty| match ty {
        Typ::Int => MReg::R(3),
        Typ::Float => MReg::F(1),
    })
}
