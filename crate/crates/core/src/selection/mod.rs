//! Instruction selection and the CminorSel language.

pub mod ast;
pub mod check;
pub mod print;
pub mod select;
pub mod smart;

pub use ast::{Callee, CondExpr, Sel, SelExpr, SelFunction, SelProgram, SelStmt};
pub use print::print_program;
pub use select::{sel_expr, sel_program};

use crate::base::{run, Outcome, World};
use crate::structured::Interp;

pub fn run_program(p: &SelProgram, world: World, fuel: u64) -> Result<Outcome, alloc::string::String> {
    Ok(run(&Interp::new(p)?, world, fuel))
}

#[cfg(test)]
mod tests;
