//! The target: a subset of PowerPC plus a few macro-instructions, with
//! every instruction (labels included) occupying one byte of code.

use alloc::vec::Vec;
use core::fmt;

use crate::base::{Chunk, Ident, Program, Signature};
use crate::locs::MReg;
use crate::ltlin::Label;
use crate::ops::F64Bits;

/// An immediate: a constant or a half of a symbol's address. The two
/// halves of `&id + d` add up to that address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Imm {
    Cst(i32),
    Hi(Ident, i32),
    Lo(Ident, i32),
}

/// Condition bits of CR0. `So` receives the unordered outcome of float
/// comparisons and the result of `cror`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CrBit {
    Lt,
    Gt,
    Eq,
    So,
}

impl CrBit {
    pub const ALL: [CrBit; 4] = [CrBit::Lt, CrBit::Gt, CrBit::Eq, CrBit::So];

    pub fn name(self) -> &'static str {
        match self {
            CrBit::Lt => "lt",
            CrBit::Gt => "gt",
            CrBit::Eq => "eq",
            CrBit::So => "so",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadOp {
    Lbz,
    Lha,
    Lhz,
    Lwz,
    Lfs,
    Lfd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoreOp {
    Stb,
    Sth,
    Stw,
    Stfs,
    Stfd,
}

impl LoadOp {
    pub const ALL: [LoadOp; 6] = [LoadOp::Lbz, LoadOp::Lha, LoadOp::Lhz, LoadOp::Lwz, LoadOp::Lfs, LoadOp::Lfd];

    pub fn chunk(self) -> Chunk {
        match self {
            LoadOp::Lbz => Chunk::Int8U,
            LoadOp::Lha => Chunk::Int16S,
            LoadOp::Lhz => Chunk::Int16U,
            LoadOp::Lwz => Chunk::Int32,
            LoadOp::Lfs => Chunk::Float32,
            LoadOp::Lfd => Chunk::Float64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LoadOp::Lbz => "lbz",
            LoadOp::Lha => "lha",
            LoadOp::Lhz => "lhz",
            LoadOp::Lwz => "lwz",
            LoadOp::Lfs => "lfs",
            LoadOp::Lfd => "lfd",
        }
    }
}

impl StoreOp {
    pub const ALL: [StoreOp; 5] = [StoreOp::Stb, StoreOp::Sth, StoreOp::Stw, StoreOp::Stfs, StoreOp::Stfd];

    pub fn chunk(self) -> Chunk {
        match self {
            StoreOp::Stb => Chunk::Int8U,
            StoreOp::Sth => Chunk::Int16U,
            StoreOp::Stw => Chunk::Int32,
            StoreOp::Stfs => Chunk::Float32,
            StoreOp::Stfd => Chunk::Float64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StoreOp::Stb => "stb",
            StoreOp::Sth => "sth",
            StoreOp::Stw => "stw",
            StoreOp::Stfs => "stfs",
            StoreOp::Stfd => "stfd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    Add(MReg, MReg, MReg),
    /// `rd = ra + imm`, with `R0` as `ra` reading as zero.
    Addi(MReg, MReg, Imm),
    /// `rd = ra + (imm << 16)`; a `Hi` immediate is not shifted.
    Addis(MReg, MReg, Imm),
    /// `rd = rb - ra`.
    Subfc(MReg, MReg, MReg),
    /// `rd = imm - ra`.
    Subfic(MReg, MReg, i32),
    Mullw(MReg, MReg, MReg),
    Mulli(MReg, MReg, i32),
    Divw(MReg, MReg, MReg),
    Divwu(MReg, MReg, MReg),
    And(MReg, MReg, MReg),
    Or(MReg, MReg, MReg),
    Xor(MReg, MReg, MReg),
    /// Unsigned 16-bit immediates.
    Ori(MReg, MReg, i32),
    Oris(MReg, MReg, i32),
    Xori(MReg, MReg, i32),
    Xoris(MReg, MReg, i32),
    Slw(MReg, MReg, MReg),
    Sraw(MReg, MReg, MReg),
    Srawi(MReg, MReg, i32),
    Srw(MReg, MReg, MReg),
    /// Rotate left then mask; the mask is an arbitrary 32-bit value.
    Rlwinm(MReg, MReg, i32, i32),
    Extsb(MReg, MReg),
    Extsh(MReg, MReg),
    Mr(MReg, MReg),
    /// `rd = mem[ra + imm]`.
    Load(LoadOp, MReg, Imm, MReg),
    /// `rd = mem[ra + rb]`.
    LoadX(LoadOp, MReg, MReg, MReg),
    Store(StoreOp, MReg, Imm, MReg),
    StoreX(StoreOp, MReg, MReg, MReg),
    Fadd(MReg, MReg, MReg),
    Fsub(MReg, MReg, MReg),
    Fmul(MReg, MReg, MReg),
    Fdiv(MReg, MReg, MReg),
    Fneg(MReg, MReg),
    Fabs(MReg, MReg),
    Frsp(MReg, MReg),
    Fmr(MReg, MReg),
    Cmpw(MReg, MReg),
    Cmpwi(MReg, i32),
    Cmplw(MReg, MReg),
    Cmplwi(MReg, i32),
    Fcmpu(MReg, MReg),
    /// `bd = ba | bb`.
    Cror(CrBit, CrBit, CrBit),
    B(Label),
    Bt(CrBit, Label),
    Bf(CrBit, Label),
    Bl(Ident),
    /// Branch to a function without linking.
    Bs(Ident),
    Blr,
    Bctr,
    Bctrl,
    Mflr(MReg),
    Mtlr(MReg),
    Mtctr(MReg),
    Label(Label),
    /// Allocates `[lo, hi)`, stores `R1` at `link` and `LR` at `retaddr`
    /// in the new block, and points `R1` to it.
    Allocframe(i32, i32, i32, i32),
    /// Frees the block of `R1` and reloads `R1` from its `link` slot.
    Freeframe(i32),
    Lfi(MReg, F64Bits),
    /// Float to signed and unsigned integer, and back.
    Fcti(MReg, MReg),
    Fctiu(MReg, MReg),
    Ictf(MReg, MReg),
    Iuctf(MReg, MReg),
    /// Copies one condition bit into an integer register as 0 or 1.
    Mfcrbit(MReg, CrBit),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsmFunction {
    pub sig: Signature,
    pub code: Vec<Instr>,
}

pub type AsmProgram = Program<AsmFunction>;

pub fn find_label(code: &[Instr], l: Label) -> Option<usize> {
    code.iter().position(|i| *i == Instr::Label(l))
}

impl fmt::Display for Imm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Imm::Cst(n) => write!(f, "{n}"),
            Imm::Hi(id, d) => write!(f, "hi16(\"{id}\"{d:+})"),
            Imm::Lo(id, d) => write!(f, "lo16(\"{id}\"{d:+})"),
        }
    }
}
