//! Linear, its semantics, parallel moves and the spilling pass from LTLin.

pub mod ast;
pub mod interp;
pub mod parmove;
pub mod print;
pub mod reload;

#[cfg(test)]
mod tests;

pub use ast::{Instr, LinearFunction, LinearProgram};
pub use interp::LinearInterp;
pub use parmove::parallel_move;
pub use print::print_program;
pub use reload::spill_reload;

use crate::base::{run, Outcome, World};
use crate::ltlin::LtlinProgram;

pub fn run_program(p: &LinearProgram, world: World, fuel: u64) -> Result<Outcome, alloc::string::String> {
    Ok(run(&LinearInterp::new(p)?, world, fuel))
}

pub fn transl_program(p: &LtlinProgram) -> LinearProgram {
    let Ok(q) = p.transform(|_, f| Ok::<_, core::convert::Infallible>(spill_reload(f)));
    q
}
