//! Linear to Mach: slots become frame offsets, callee-save registers are
//! saved in the prologue and restored before every return and tail call.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Instr, MachFunction};
use super::layout::{layout, outgoing_ofs, FrameLayout, LINK_OFS, RETADDR_OFS};
use crate::linear::{self, LinearFunction};
use crate::locs::SlotKind;

fn restores(l: &FrameLayout, out: &mut Vec<Instr>) {
    for (r, o) in &l.saved {
        out.push(Instr::GetStack(*o, r.typ(), *r));
    }
}

pub fn transl_function(f: &LinearFunction) -> Result<MachFunction, String> {
    let l = layout(f)?;
    let mut code = Vec::new();
    for (r, o) in &l.saved {
        code.push(Instr::SetStack(*r, *o, r.typ()));
    }
    for i in &f.code {
        match i {
            linear::Instr::GetStack(s, r) if s.kind == SlotKind::Incoming => {
                code.push(Instr::GetParent(outgoing_ofs(s.ty, s.ofs), s.ty, *r))
            }
            linear::Instr::GetStack(s, r) => code.push(Instr::GetStack(l.slot_ofs(*s).unwrap(), s.ty, *r)),
            linear::Instr::SetStack(_, s) if s.kind == SlotKind::Incoming => return Err(format!("store to {s}")),
            linear::Instr::SetStack(r, s) => code.push(Instr::SetStack(*r, l.slot_ofs(*s).unwrap(), s.ty)),
            linear::Instr::Op(op, args, d) => code.push(Instr::Op(op.clone(), args.clone(), *d)),
            linear::Instr::Load(c, m, args, d) => code.push(Instr::Load(*c, m.clone(), args.clone(), *d)),
            linear::Instr::Store(c, m, args, s) => code.push(Instr::Store(*c, m.clone(), args.clone(), *s)),
            linear::Instr::Call(sig, fr) => code.push(Instr::Call(sig.clone(), fr.clone())),
            linear::Instr::Tailcall(sig, fr) => {
                restores(&l, &mut code);
                code.push(Instr::Tailcall(sig.clone(), fr.clone()));
            }
            linear::Instr::Label(lb) => code.push(Instr::Label(*lb)),
            linear::Instr::Goto(lb) => code.push(Instr::Goto(*lb)),
            linear::Instr::Cond(c, args, lb) => code.push(Instr::Cond(c.clone(), args.clone(), *lb)),
            linear::Instr::Return => {
                restores(&l, &mut code);
                code.push(Instr::Return);
            }
        }
    }
    Ok(MachFunction {
        sig: f.sig.clone(),
        stack_low: l.stack_low,
        stack_high: l.stack_high,
        link_ofs: LINK_OFS,
        retaddr_ofs: RETADDR_OFS,
        code,
    })
}
