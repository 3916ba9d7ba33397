//! RTL: generation, semantics, type reconstruction.

pub mod ast;
pub mod gen;
pub mod interp;
pub mod print;
pub mod random;
pub mod typing;

pub use ast::{FnRef, Instr, Node, Reg, RtlFunction, RtlProgram};
pub use gen::{transl_function, transl_program};
pub use interp::{Regs, RtlInterp};
pub use print::print_program;

use crate::base::{run, Outcome, World};

pub fn run_program(p: &RtlProgram, world: World, fuel: u64) -> Result<Outcome, alloc::string::String> {
    Ok(run(&RtlInterp::new(p)?, world, fuel))
}

#[cfg(test)]
mod tests;
