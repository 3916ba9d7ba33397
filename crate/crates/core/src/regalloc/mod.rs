//! Register allocation: liveness, interference, coloring with a validator,
//! and LTL generation.

pub mod alloc;
pub mod coloring;
pub mod interference;
pub mod liveness;
pub mod lockstep;
pub mod validate;

pub use self::alloc::{allocate_function, allocate_function_with, apply_alloc, Allocation, Tamper};
pub use coloring::{color, Coloring};
pub use interference::Graph;
pub use validate::validate_coloring;

use ::alloc::collections::BTreeMap;
use ::alloc::string::String;

use crate::base::Ident;
use crate::ltl::LtlProgram;
use crate::rtl::RtlProgram;

pub fn allocate_program(p: &RtlProgram) -> Result<(LtlProgram, BTreeMap<Ident, Allocation>), String> {
    allocate_program_with(p, |_, _, _| {})
}

pub fn allocate_program_with(
    p: &RtlProgram,
    tamper: Tamper,
) -> Result<(LtlProgram, BTreeMap<Ident, Allocation>), String> {
    let mut allocs = BTreeMap::new();
    let q = p.transform(|name, f| {
        let (g, a) = allocate_function_with(f, tamper).map_err(|e| ::alloc::format!("in \"{name}\": {e}"))?;
        allocs.insert(name.clone(), a);
        Ok::<_, String>(g)
    })?;
    Ok((q, allocs))
}
