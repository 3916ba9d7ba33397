//! LTLin and the linearization pass from LTL.

pub mod ast;
pub mod interp;
pub mod linearize;
pub mod print;

#[cfg(test)]
mod tests;

pub use ast::{Instr, Label, LtlinFunction, LtlinProgram};
pub use interp::LtlinInterp;
pub use linearize::{enumerate, linearize, transl_function, validate_enum};
pub use print::print_program;

use crate::base::{run, Outcome, World};
use crate::ltl::LtlProgram;

pub fn run_program(p: &LtlinProgram, world: World, fuel: u64) -> Result<Outcome, alloc::string::String> {
    Ok(run(&LtlinInterp::new(p)?, world, fuel))
}

pub fn transl_program(p: &LtlProgram) -> Result<LtlinProgram, alloc::string::String> {
    p.transform(|name, f| transl_function(f).map_err(|e| alloc::format!("{name}: {e}")))
}
