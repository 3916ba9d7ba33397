//! Validation of a candidate coloring against the interference graph and
//! the register types.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use super::coloring::Coloring;
use super::interference::Graph;
use crate::base::Typ;
use crate::locs::{Loc, SlotKind};
use crate::rtl::Reg;

/// Checks that interfering registers get non-overlapping locations, that
/// every location has the register's type, and that every location is a
/// local slot or an allocatable machine register.
pub fn check(g: &Graph, types: &BTreeMap<Reg, Typ>, phi: &Coloring) -> Result<(), String> {
    let loc = |r: Reg| phi.get(&r).copied().ok_or_else(|| format!("x{r} has no location"));
    for (&r, &t) in types {
        let l = loc(r)?;
        if l.typ() != t {
            return Err(format!("x{r} of type {t} mapped to {l}"));
        }
        match l {
            Loc::Reg(m) if m.is_temporary() || m.is_reserved() => return Err(format!("x{r} mapped to reserved {m}")),
            Loc::Slot(s) if s.kind != SlotKind::Local => return Err(format!("x{r} mapped to {s}")),
            _ => {}
        }
    }
    for &(a, b) in &g.edges {
        let (la, lb) = (loc(a)?, loc(b)?);
        if la.overlaps(&lb) {
            return Err(format!("interfering x{a} and x{b} share {la}/{lb}"));
        }
    }
    for &(r, m) in &g.mach {
        if loc(r)? == Loc::Reg(m) {
            return Err(format!("x{r} mapped to {m}, which it interferes with"));
        }
    }
    Ok(())
}

pub fn validate_coloring(g: &Graph, types: &BTreeMap<Reg, Typ>, phi: &Coloring) -> bool {
    check(g, types, phi).is_ok()
}
