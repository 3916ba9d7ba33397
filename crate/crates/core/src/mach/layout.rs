//! Activation-record layout. From offset 0 downward: back link, return
//! address, outgoing arguments, integer locals, saved integer registers,
//! padding to 8, float locals, saved float registers. Cminor stack data
//! lives above, in `[0, stacksize)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::base::Typ;
use crate::linear::{Instr, LinearFunction};
use crate::locs::{loc_arguments, typ_words, Loc, MReg, Slot, SlotKind};

pub const LINK_OFS: i32 = -4;
pub const RETADDR_OFS: i32 = -8;

/// Byte offset of `outgoing(ty, ofs)`, which is also where the callee finds
/// `incoming(ty, ofs)` relative to the caller's stack pointer.
pub fn outgoing_ofs(ty: Typ, ofs: i32) -> i32 {
    RETADDR_OFS - 4 * (ofs + typ_words(ty))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Entry {
    Link,
    RetAddr,
    Slot(Slot),
    Saved(MReg),
}

impl Entry {
    pub fn size(&self) -> i32 {
        match self {
            Entry::Link | Entry::RetAddr => 4,
            Entry::Slot(s) => 4 * s.words(),
            Entry::Saved(r) => 4 * typ_words(r.typ()),
        }
    }
}

/// What a function needs from its frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Usage {
    pub stacksize: i32,
    pub outgoing_words: i64,
    pub slots: BTreeSet<Slot>,
    pub callee_save: BTreeSet<MReg>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameLayout {
    pub delta: BTreeMap<Entry, i32>,
    pub stack_low: i32,
    pub stack_high: i32,
    int_locals: i32,
    float_locals: i32,
    /// Saved registers in save order.
    pub saved: Vec<(MReg, i32)>,
}

impl FrameLayout {
    /// Offset of a local or outgoing slot; incoming slots are in the caller.
    pub fn slot_ofs(&self, s: Slot) -> Option<i32> {
        match (s.kind, s.ty) {
            (SlotKind::Local, Typ::Int) => Some(self.int_locals - 4 * (s.ofs + 1)),
            (SlotKind::Local, Typ::Float) => Some(self.float_locals - 4 * (s.ofs + 2)),
            (SlotKind::Outgoing, ty) => Some(outgoing_ofs(ty, s.ofs)),
            (SlotKind::Incoming, _) => None,
        }
    }
}

pub fn usage(f: &LinearFunction) -> Usage {
    let mut u = Usage { stacksize: f.stacksize, ..Usage::default() };
    let note = |r: MReg, u: &mut Usage| {
        if r.is_callee_save() {
            u.callee_save.insert(r);
        }
    };
    for i in &f.code {
        for r in i.regs() {
            note(r, &mut u);
        }
        match i {
            Instr::GetStack(s, _) | Instr::SetStack(_, s) if s.kind != SlotKind::Incoming => {
                u.slots.insert(*s);
            }
            Instr::Call(sig, _) | Instr::Tailcall(sig, _) => {
                for l in loc_arguments(sig) {
                    if let Loc::Slot(s) = l {
                        u.slots.insert(s);
                        u.outgoing_words = u.outgoing_words.max((s.ofs + s.words()) as i64);
                    }
                }
            }
            _ => {}
        }
    }
    for s in &u.slots {
        if s.kind == SlotKind::Outgoing {
            u.outgoing_words = u.outgoing_words.max((s.ofs + s.words()) as i64);
        }
    }
    u
}

pub fn layout_usage(u: &Usage) -> Result<FrameLayout, String> {
    let mut delta = BTreeMap::new();
    delta.insert(Entry::Link, LINK_OFS);
    delta.insert(Entry::RetAddr, RETADDR_OFS);
    let mut ofs: i64 = RETADDR_OFS as i64 - 4 * u.outgoing_words;
    let words = |ty: Typ| {
        u.slots
            .iter()
            .filter(|s| s.kind == SlotKind::Local && s.ty == ty)
            .map(|s| (s.ofs + s.words()) as i64)
            .max()
            .unwrap_or(0)
    };
    let int_locals = ofs;
    ofs -= 4 * words(Typ::Int);
    let mut saved = Vec::new();
    for r in u.callee_save.iter().filter(|r| r.typ() == Typ::Int) {
        ofs -= 4;
        saved.push((*r, ofs));
    }
    ofs = ofs.div_euclid(8) * 8;
    let float_locals = ofs;
    ofs -= 4 * words(Typ::Float);
    for r in u.callee_save.iter().filter(|r| r.typ() == Typ::Float) {
        ofs -= 8;
        saved.push((*r, ofs));
    }
    if -ofs + u.stacksize as i64 >= 1 << 31 || ofs < i32::MIN as i64 {
        return Err(format!("activation record of {} bytes is too large", -ofs + u.stacksize as i64));
    }
    let mut l = FrameLayout {
        delta: BTreeMap::new(),
        stack_low: ofs as i32,
        stack_high: u.stacksize,
        int_locals: int_locals as i32,
        float_locals: float_locals as i32,
        saved: saved.into_iter().map(|(r, o)| (r, o as i32)).collect(),
    };
    for s in &u.slots {
        if let Some(o) = l.slot_ofs(*s) {
            delta.insert(Entry::Slot(*s), o);
        }
    }
    for (r, o) in &l.saved {
        delta.insert(Entry::Saved(*r), *o);
    }
    l.delta = delta;
    Ok(l)
}

pub fn layout(f: &LinearFunction) -> Result<FrameLayout, String> {
    layout_usage(&usage(f))
}
