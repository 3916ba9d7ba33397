//! Assembly generation, the machine simulator and the textual format.

pub mod ast;
pub mod gen;
pub mod sim;
pub mod text;

#[cfg(test)]
mod tests;

pub use ast::{AsmFunction, AsmProgram, CrBit, Imm, Instr};
pub use gen::{addimm, loadimm, transl_function};
pub use sim::AsmSim;
pub use text::{emit_text, parse_text};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::base::{run, FunDef, Ident, Outcome, World};
use crate::mach::MachProgram;

pub fn run_program(p: &AsmProgram, world: World, fuel: u64) -> Result<Outcome, String> {
    Ok(run(&AsmSim::new(p)?, world, fuel))
}

/// Asm positions of each Mach instruction, per function.
pub type Positions = BTreeMap<Ident, Vec<usize>>;

pub fn transl_program_with_positions(p: &MachProgram) -> Result<(AsmProgram, Positions), String> {
    let mut pos = Positions::new();
    let q = p.transform(|name, f| {
        let (a, ps) = gen::transl_function_with_positions(f).map_err(|e| alloc::format!("{name}: {e}"))?;
        pos.insert(name.clone(), ps);
        Ok::<_, String>(a)
    })?;
    Ok((q, pos))
}

pub fn transl_program(p: &MachProgram) -> Result<AsmProgram, String> {
    transl_program_with_positions(p).map(|(q, _)| q)
}

/// Return addresses for the Mach semantics: a call at Mach index `pc`
/// returns to the Asm position of index `pc + 1`.
pub fn retaddr_map(p: &MachProgram, pos: &Positions) -> BTreeMap<(usize, usize), i32> {
    let mut out = BTreeMap::new();
    for (fd, (name, f)) in p.functions.iter().enumerate() {
        if let (FunDef::Internal(_), Some(ps)) = (f, pos.get(name)) {
            for (pc, &q) in ps.iter().enumerate() {
                out.insert((fd, pc), q as i32);
            }
        }
    }
    out
}
