//! Mach, activation-record layout and the stacking pass from Linear.

pub mod ast;
pub mod interp;
pub mod layout;
pub mod print;
pub mod stacking;

#[cfg(test)]
mod tests;

pub use ast::{Instr, MachFunction, MachProgram};
pub use interp::{check_callee_save, MachInterp};
pub use layout::{layout, FrameLayout};
pub use print::print_program;
pub use stacking::transl_function;

use crate::base::{run, Outcome, World};
use crate::linear::LinearProgram;

pub fn run_program(p: &MachProgram, world: World, fuel: u64) -> Result<Outcome, alloc::string::String> {
    Ok(run(&MachInterp::new(p)?, world, fuel))
}

pub fn transl_program(p: &LinearProgram) -> Result<MachProgram, alloc::string::String> {
    p.transform(|name, f| transl_function(f).map_err(|e| alloc::format!("{name}: {e}")))
}
