//! LTL: semantics, dump and branch tunneling.

pub mod ast;
pub mod interp;
pub mod print;
pub mod tunnel;

pub use ast::{Instr, LtlFunction, LtlProgram, Node};
pub use interp::LtlInterp;
pub use print::print_program;
pub use tunnel::tunnel;

use crate::base::{run, Outcome, World};

pub fn run_program(p: &LtlProgram, world: World, fuel: u64) -> Result<Outcome, alloc::string::String> {
    Ok(run(&LtlInterp::new(p)?, world, fuel))
}

pub fn tunnel_program(p: &LtlProgram) -> LtlProgram {
    let Ok(q) = p.transform(|_, f| Ok::<_, core::convert::Infallible>(tunnel(f)));
    q
}
