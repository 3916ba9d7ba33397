//! Mach to Asm by expansion into canned instruction sequences.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ast::{AsmFunction, CrBit, Imm, Instr, LoadOp, StoreOp};
use crate::base::int::{fits_s16, fits_u16, high, low};
use crate::base::{Chunk, Typ};
use crate::locs::MReg;
use crate::mach::{self, MachFunction};
use crate::ops::{Addressing, Comparison, Condition, Operation};
use crate::rtl::FnRef;

pub const R0: MReg = MReg::R(0);
pub const SP: MReg = MReg::R(1);
pub const SCRATCH: MReg = MReg::R(2);

/// `r = n`.
pub fn loadimm(r: MReg, n: i32) -> Vec<Instr> {
    if high(n) == 0 {
        vec![Instr::Addi(r, R0, Imm::Cst(n))]
    } else if low(n) == 0 {
        vec![Instr::Addis(r, R0, Imm::Cst(high(n)))]
    } else {
        // `ori` zero-extends, so the halves are the unsigned ones.
        vec![Instr::Addis(r, R0, Imm::Cst((n as u32 >> 16) as i16 as i32)), Instr::Ori(r, r, n & 0xFFFF)]
    }
}

/// `rd = rs + n`.
pub fn addimm(rd: MReg, rs: MReg, n: i32) -> Vec<Instr> {
    if rd == R0 || rs == R0 {
        let mut v = loadimm(SCRATCH, n);
        v.push(Instr::Add(rd, rs, SCRATCH));
        v
    } else if high(n) == 0 {
        vec![Instr::Addi(rd, rs, Imm::Cst(n))]
    } else if low(n) == 0 {
        vec![Instr::Addis(rd, rs, Imm::Cst(high(n)))]
    } else {
        vec![Instr::Addis(rd, rs, Imm::Cst(high(n))), Instr::Addi(rd, rd, Imm::Cst(low(n)))]
    }
}

/// `rd = rs op n` for the unsigned-immediate logical operations.
fn logimm(
    lo: fn(MReg, MReg, i32) -> Instr,
    hi: fn(MReg, MReg, i32) -> Instr,
    rd: MReg,
    rs: MReg,
    n: i32,
) -> Vec<Instr> {
    let (h, l) = ((n as u32 >> 16) as i32, n & 0xFFFF);
    match (h, l) {
        (0, _) => vec![lo(rd, rs, l)],
        (_, 0) => vec![hi(rd, rs, h)],
        _ => vec![lo(rd, rs, l), hi(rd, rd, h)],
    }
}

/// Instructions setting a condition bit and the bit with the sense in
/// which it must be tested.
pub fn transl_cond(c: &Condition, args: &[MReg]) -> (Vec<Instr>, CrBit, bool) {
    let int_bit = |c: Comparison| match c {
        Comparison::Eq => (CrBit::Eq, true),
        Comparison::Ne => (CrBit::Eq, false),
        Comparison::Lt => (CrBit::Lt, true),
        Comparison::Le => (CrBit::Gt, false),
        Comparison::Gt => (CrBit::Gt, true),
        Comparison::Ge => (CrBit::Lt, false),
    };
    let float = |c: Comparison, sense: bool| {
        let mut v = vec![Instr::Fcmpu(args[0], args[1])];
        let (bit, s) = match c {
            Comparison::Eq => (CrBit::Eq, true),
            Comparison::Ne => (CrBit::Eq, false),
            Comparison::Lt => (CrBit::Lt, true),
            Comparison::Gt => (CrBit::Gt, true),
            Comparison::Le => {
                v.push(Instr::Cror(CrBit::So, CrBit::Lt, CrBit::Eq));
                (CrBit::So, true)
            }
            Comparison::Ge => {
                v.push(Instr::Cror(CrBit::So, CrBit::Gt, CrBit::Eq));
                (CrBit::So, true)
            }
        };
        (v, bit, s == sense)
    };
    match *c {
        Condition::Comp(k) => {
            let (b, s) = int_bit(k);
            (vec![Instr::Cmpw(args[0], args[1])], b, s)
        }
        Condition::CompImm(k, n) => {
            let (b, s) = int_bit(k);
            if fits_s16(n) {
                (vec![Instr::Cmpwi(args[0], n)], b, s)
            } else {
                let mut v = loadimm(SCRATCH, n);
                v.push(Instr::Cmpw(args[0], SCRATCH));
                (v, b, s)
            }
        }
        Condition::CompU(k) => {
            let (b, s) = int_bit(k);
            (vec![Instr::Cmplw(args[0], args[1])], b, s)
        }
        Condition::CompUImm(k, n) => {
            let (b, s) = int_bit(k);
            if fits_u16(n) {
                (vec![Instr::Cmplwi(args[0], n)], b, s)
            } else {
                let mut v = loadimm(SCRATCH, n);
                v.push(Instr::Cmplw(args[0], SCRATCH));
                (v, b, s)
            }
        }
        Condition::CompF(k) => float(k, true),
        Condition::NotCompF(k) => float(k, false),
    }
}

fn load_op(chunk: Chunk) -> LoadOp {
    match chunk {
        Chunk::Int8S | Chunk::Int8U => LoadOp::Lbz,
        Chunk::Int16S => LoadOp::Lha,
        Chunk::Int16U => LoadOp::Lhz,
        Chunk::Int32 => LoadOp::Lwz,
        Chunk::Float32 => LoadOp::Lfs,
        Chunk::Float64 => LoadOp::Lfd,
    }
}

fn store_op(chunk: Chunk) -> StoreOp {
    match chunk {
        Chunk::Int8S | Chunk::Int8U => StoreOp::Stb,
        Chunk::Int16S | Chunk::Int16U => StoreOp::Sth,
        Chunk::Int32 => StoreOp::Stw,
        Chunk::Float32 => StoreOp::Stfs,
        Chunk::Float64 => StoreOp::Stfd,
    }
}

/// An access `mk(imm, base)` at `base + ofs` for any 32-bit `ofs`.
fn at_offset(base: MReg, ofs: i32, mk: impl FnOnce(Imm, MReg) -> Instr) -> Vec<Instr> {
    if fits_s16(ofs) {
        vec![mk(Imm::Cst(ofs), base)]
    } else {
        vec![Instr::Addis(SCRATCH, base, Imm::Cst(high(ofs))), mk(Imm::Cst(low(ofs)), SCRATCH)]
    }
}

/// An access `mk(imm, base)` or `mkx(ra, rb)` for a Mach addressing mode.
fn addressing(
    mode: &Addressing,
    args: &[MReg],
    mk: impl FnOnce(Imm, MReg) -> Instr,
    mkx: impl FnOnce(MReg, MReg) -> Instr,
) -> Vec<Instr> {
    match mode {
        Addressing::Indexed(n) => at_offset(args[0], *n, mk),
        Addressing::Indexed2 => vec![mkx(args[0], args[1])],
        Addressing::Global(id, d) => {
            vec![Instr::Addis(SCRATCH, R0, Imm::Hi(id.clone(), *d)), mk(Imm::Lo(id.clone(), *d), SCRATCH)]
        }
        Addressing::Based(id, d) => {
            vec![Instr::Addis(SCRATCH, args[0], Imm::Hi(id.clone(), *d)), mk(Imm::Lo(id.clone(), *d), SCRATCH)]
        }
        Addressing::Stack(d) => at_offset(SP, *d, mk),
    }
}

fn transl_op(op: &Operation, a: &[MReg], rd: MReg) -> Vec<Instr> {
    use Operation::*;
    match op {
        Move if a[0] == rd => vec![],
        Move if rd.typ() == Typ::Float => vec![Instr::Fmr(rd, a[0])],
        Move => vec![Instr::Mr(rd, a[0])],
        IntConst(n) => loadimm(rd, *n),
        FloatConst(x) => vec![Instr::Lfi(rd, *x)],
        AddrSymbol(id, d) => {
            vec![Instr::Addis(rd, R0, Imm::Hi(id.clone(), *d)), Instr::Addi(rd, rd, Imm::Lo(id.clone(), *d))]
        }
        AddrStack(d) => addimm(rd, SP, *d),
        Cast8Signed => vec![Instr::Extsb(rd, a[0])],
        Cast16Signed => vec![Instr::Extsh(rd, a[0])],
        Add => vec![Instr::Add(rd, a[0], a[1])],
        AddImm(n) => addimm(rd, a[0], *n),
        Sub => vec![Instr::Subfc(rd, a[1], a[0])],
        SubImm(n) if fits_s16(*n) => vec![Instr::Subfic(rd, a[0], *n)],
        SubImm(n) => {
            let mut v = loadimm(SCRATCH, *n);
            v.push(Instr::Subfc(rd, a[0], SCRATCH));
            v
        }
        Mul => vec![Instr::Mullw(rd, a[0], a[1])],
        MulImm(n) if fits_s16(*n) => vec![Instr::Mulli(rd, a[0], *n)],
        MulImm(n) => {
            let mut v = loadimm(SCRATCH, *n);
            v.push(Instr::Mullw(rd, a[0], SCRATCH));
            v
        }
        Div => vec![Instr::Divw(rd, a[0], a[1])],
        DivU => vec![Instr::Divwu(rd, a[0], a[1])],
        And => vec![Instr::And(rd, a[0], a[1])],
        Or => vec![Instr::Or(rd, a[0], a[1])],
        OrImm(n) => logimm(Instr::Ori, Instr::Oris, rd, a[0], *n),
        Xor => vec![Instr::Xor(rd, a[0], a[1])],
        XorImm(n) => logimm(Instr::Xori, Instr::Xoris, rd, a[0], *n),
        Shl => vec![Instr::Slw(rd, a[0], a[1])],
        Shr => vec![Instr::Sraw(rd, a[0], a[1])],
        ShrImm(n) => vec![Instr::Srawi(rd, a[0], *n)],
        ShrU => vec![Instr::Srw(rd, a[0], a[1])],
        Rolm(n, m) => vec![Instr::Rlwinm(rd, a[0], *n, *m)],
        NegF => vec![Instr::Fneg(rd, a[0])],
        AbsF => vec![Instr::Fabs(rd, a[0])],
        AddF => vec![Instr::Fadd(rd, a[0], a[1])],
        SubF => vec![Instr::Fsub(rd, a[0], a[1])],
        MulF => vec![Instr::Fmul(rd, a[0], a[1])],
        DivF => vec![Instr::Fdiv(rd, a[0], a[1])],
        SingleOfFloat => vec![Instr::Frsp(rd, a[0])],
        IntOfFloat => vec![Instr::Fcti(rd, a[0])],
        IntUOfFloat => vec![Instr::Fctiu(rd, a[0])],
        FloatOfInt => vec![Instr::Ictf(rd, a[0])],
        FloatOfIntU => vec![Instr::Iuctf(rd, a[0])],
        Cmp(c) => {
            let (mut v, bit, sense) = transl_cond(c, a);
            v.push(Instr::Mfcrbit(rd, bit));
            if !sense {
                v.push(Instr::Xori(rd, rd, 1));
            }
            v
        }
    }
}

/// Restores the return address and pops the frame.
fn epilogue(f: &MachFunction) -> Vec<Instr> {
    vec![
        Instr::Load(LoadOp::Lwz, SCRATCH, Imm::Cst(f.retaddr_ofs), SP),
        Instr::Mtlr(SCRATCH),
        Instr::Freeframe(f.link_ofs),
    ]
}

fn transl_instr(f: &MachFunction, i: &mach::Instr) -> Vec<Instr> {
    let lop = |ty: Typ| {
        if ty == Typ::Int {
            LoadOp::Lwz
        } else {
            LoadOp::Lfd
        }
    };
    let sop = |ty: Typ| {
        if ty == Typ::Int {
            StoreOp::Stw
        } else {
            StoreOp::Stfd
        }
    };
    match i {
        mach::Instr::GetStack(ofs, ty, r) => at_offset(SP, *ofs, |im, b| Instr::Load(lop(*ty), *r, im, b)),
        mach::Instr::SetStack(r, ofs, ty) => at_offset(SP, *ofs, |im, b| Instr::Store(sop(*ty), *r, im, b)),
        mach::Instr::GetParent(ofs, ty, r) => {
            let via = if *ty == Typ::Int { *r } else { SCRATCH };
            let mut v = vec![Instr::Load(LoadOp::Lwz, via, Imm::Cst(f.link_ofs), SP)];
            v.extend(at_offset(via, *ofs, |im, b| Instr::Load(lop(*ty), *r, im, b)));
            v
        }
        mach::Instr::Op(op, args, rd) => transl_op(op, args, *rd),
        mach::Instr::Load(chunk, mode, args, rd) => {
            let op = load_op(*chunk);
            let mut v = addressing(mode, args, |im, b| Instr::Load(op, *rd, im, b), |a, b| Instr::LoadX(op, *rd, a, b));
            if *chunk == Chunk::Int8S {
                v.push(Instr::Extsb(*rd, *rd));
            }
            v
        }
        mach::Instr::Store(chunk, mode, args, src) => {
            let op = store_op(*chunk);
            addressing(mode, args, |im, b| Instr::Store(op, *src, im, b), |a, b| Instr::StoreX(op, *src, a, b))
        }
        mach::Instr::Call(_, FnRef::Symbol(id)) => vec![Instr::Bl(id.clone())],
        mach::Instr::Call(_, FnRef::Reg(r)) => vec![Instr::Mtctr(*r), Instr::Bctrl],
        mach::Instr::Tailcall(_, FnRef::Symbol(id)) => {
            let mut v = epilogue(f);
            v.push(Instr::Bs(id.clone()));
            v
        }
        mach::Instr::Tailcall(_, FnRef::Reg(r)) => {
            let mut v = vec![Instr::Mtctr(*r)];
            v.extend(epilogue(f));
            v.push(Instr::Bctr);
            v
        }
        mach::Instr::Label(l) => vec![Instr::Label(*l)],
        mach::Instr::Goto(l) => vec![Instr::B(*l)],
        mach::Instr::Cond(c, args, l) => {
            let (mut v, bit, sense) = transl_cond(c, args);
            v.push(if sense { Instr::Bt(bit, *l) } else { Instr::Bf(bit, *l) });
            v
        }
        mach::Instr::Return => {
            let mut v = epilogue(f);
            v.push(Instr::Blr);
            v
        }
    }
}

/// Largest function size, in instructions.
pub const MAX_CODE: usize = 1 << 31;

pub fn check_size(len: usize) -> Result<(), String> {
    if len >= MAX_CODE {
        return Err(format!("function of {len} instructions is too large"));
    }
    Ok(())
}

/// The code and, for each Mach instruction index (and the end), the
/// position of its first Asm instruction.
pub fn transl_function_with_positions(f: &MachFunction) -> Result<(AsmFunction, Vec<usize>), String> {
    let mut code = vec![Instr::Allocframe(f.stack_low, f.stack_high, f.link_ofs, f.retaddr_ofs)];
    let mut pos = Vec::with_capacity(f.code.len() + 1);
    for i in &f.code {
        pos.push(code.len());
        code.extend(transl_instr(f, i));
    }
    pos.push(code.len());
    check_size(code.len())?;
    Ok((AsmFunction { sig: f.sig.clone(), code }, pos))
}

pub fn transl_function(f: &MachFunction) -> Result<AsmFunction, String> {
    transl_function_with_positions(f).map(|(a, _)| a)
}
