//! LTLin to Linear: operands in stack slots are reloaded into the reserved
//! temporaries before each use and spilled after each definition; calls,
//! returns and the function entry move values to and from the conventional
//! locations with parallel moves.

use alloc::vec;
use alloc::vec::Vec;

use super::ast::{Instr, LinearFunction};
use super::parmove::parallel_move;
use crate::base::{Signature, Typ};
use crate::locs::{loc_arguments, loc_parameters, loc_result, temps, Loc, MReg};
use crate::ltlin::{self, LtlinFunction};
use crate::ops::Operation;
use crate::rtl::FnRef;

/// Holds the function pointer of an indirect call while arguments move.
pub const CALL_REG: MReg = MReg::R(11);

fn cycle_temp(ty: Typ) -> Loc {
    Loc::Reg(temps(ty)[2])
}

/// `dst := src` for arbitrary locations; slot-to-slot goes through the
/// second temporary, which parallel moves never hold.
pub fn move_loc(src: Loc, dst: Loc, out: &mut Vec<Instr>) {
    match (src, dst) {
        _ if src == dst => {}
        (Loc::Reg(s), Loc::Reg(d)) => out.push(Instr::Op(Operation::Move, vec![s], d)),
        (Loc::Reg(s), Loc::Slot(d)) => out.push(Instr::SetStack(s, d)),
        (Loc::Slot(s), Loc::Reg(d)) => out.push(Instr::GetStack(s, d)),
        (Loc::Slot(s), Loc::Slot(d)) => {
            let t = temps(s.ty)[1];
            out.push(Instr::GetStack(s, t));
            out.push(Instr::SetStack(t, d));
        }
    }
}

fn moves(srcs: &[Loc], dsts: &[Loc], out: &mut Vec<Instr>) {
    for (s, d) in parallel_move(srcs, dsts, cycle_temp) {
        move_loc(s, d, out);
    }
}

/// Registers for the operands `args`, reloading slots into distinct
/// temporaries of their class.
fn regs_for(args: &[Loc], out: &mut Vec<Instr>) -> Vec<MReg> {
    let (mut ni, mut nf) = (0, 0);
    args.iter()
        .map(|a| match a {
            Loc::Reg(r) => *r,
            Loc::Slot(s) => {
                let k = if s.ty == Typ::Int { &mut ni } else { &mut nf };
                assert!(*k < 3, "more slot operands than temporaries");
                let t = temps(s.ty)[*k];
                *k += 1;
                out.push(Instr::GetStack(*s, t));
                t
            }
        })
        .collect()
}

/// Register receiving a result destined for `d`.
fn reg_for(d: Loc) -> MReg {
    match d {
        Loc::Reg(r) => r,
        Loc::Slot(s) => temps(s.ty)[0],
    }
}

fn spill(r: MReg, d: Loc, out: &mut Vec<Instr>) {
    if let Loc::Slot(s) = d {
        out.push(Instr::SetStack(r, s));
    }
}

fn fnref(fr: &FnRef<Loc>, out: &mut Vec<Instr>) -> FnRef<MReg> {
    match fr {
        FnRef::Symbol(id) => FnRef::Symbol(id.clone()),
        FnRef::Reg(l) => {
            move_loc(*l, Loc::Reg(CALL_REG), out);
            FnRef::Reg(CALL_REG)
        }
    }
}

fn result_loc(sig: &Signature) -> Option<Loc> {
    loc_result(sig).map(Loc::Reg)
}

fn transl_instr(f: &LtlinFunction, i: &ltlin::Instr, out: &mut Vec<Instr>) {
    match i {
        ltlin::Instr::Op(Operation::Move, args, d) if args.len() == 1 => move_loc(args[0], *d, out),
        ltlin::Instr::Op(op, args, d) => {
            let rs = regs_for(args, out);
            let r = reg_for(*d);
            out.push(Instr::Op(op.clone(), rs, r));
            spill(r, *d, out);
        }
        ltlin::Instr::Load(c, m, args, d) => {
            let rs = regs_for(args, out);
            let r = reg_for(*d);
            out.push(Instr::Load(*c, m.clone(), rs, r));
            spill(r, *d, out);
        }
        ltlin::Instr::Store(c, m, args, src) => {
            let mut all = args.clone();
            all.push(*src);
            let mut rs = regs_for(&all, out);
            let r = rs.pop().unwrap();
            out.push(Instr::Store(*c, m.clone(), rs, r));
        }
        ltlin::Instr::Call(sig, fr, args, d) => {
            let fr = fnref(fr, out);
            moves(args, &loc_arguments(sig), out);
            out.push(Instr::Call(sig.clone(), fr));
            if let (Some(d), Some(r)) = (d, result_loc(sig)) {
                move_loc(r, *d, out);
            }
        }
        ltlin::Instr::Tailcall(sig, fr, args) => {
            let locs = loc_arguments(sig);
            let fr = fnref(fr, out);
            moves(args, &locs, out);
            if locs.iter().any(|l| matches!(l, Loc::Slot(_))) {
                // Stack arguments would live in this frame's outgoing area,
                // which a tail call frees: call and return instead.
                out.push(Instr::Call(sig.clone(), fr));
                out.push(Instr::Return);
            } else {
                out.push(Instr::Tailcall(sig.clone(), fr));
            }
        }
        ltlin::Instr::Label(l) => out.push(Instr::Label(*l)),
        ltlin::Instr::Goto(l) => out.push(Instr::Goto(*l)),
        ltlin::Instr::Cond(c, args, l) => {
            let rs = regs_for(args, out);
            out.push(Instr::Cond(c.clone(), rs, *l));
        }
        ltlin::Instr::Return(r) => {
            if let (Some(r), Some(d)) = (r, result_loc(&f.sig)) {
                move_loc(*r, d, out);
            }
            out.push(Instr::Return);
        }
    }
}

pub fn spill_reload(f: &LtlinFunction) -> LinearFunction {
    let mut code = Vec::new();
    moves(&loc_parameters(&f.sig), &f.params, &mut code);
    for i in &f.code {
        transl_instr(f, i, &mut code);
    }
    LinearFunction { sig: f.sig.clone(), stacksize: f.stacksize, code }
}
