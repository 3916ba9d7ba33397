//! A compiler from Cminor to an idealized PowerPC assembly language.
//!
//! Every intermediate language (Cminor, CminorSel, RTL, LTL, LTLin, Linear,
//! Mach, Asm) has an executable small-step semantics, so each pass can be
//! checked by running the program before and after it. Untrusted heuristics
//! (register coloring, code linearization, type reconstruction) are guarded
//! by validators that abort compilation when their output is unsound.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asm;
pub mod base;
pub mod cminor;
pub mod dataflow;
pub mod driver;
pub mod fuzz;
pub mod linear;
pub mod locs;
pub mod ltl;
pub mod ltlin;
pub mod mach;
pub mod mutate;
pub mod ops;
pub mod opt;
pub mod regalloc;
pub mod rtl;
pub mod selection;
pub mod structured;
#[cfg(test)]
pub(crate) mod testutil;
