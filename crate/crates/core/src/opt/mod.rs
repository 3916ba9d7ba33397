//! RTL-to-RTL optimizations.

pub mod constprop;
pub mod cse;

pub use constprop::constprop;
pub use cse::cse;

use crate::rtl::RtlProgram;

pub fn constprop_program(p: &RtlProgram) -> RtlProgram {
    let Ok(q) = p.transform(|_, f| Ok::<_, core::convert::Infallible>(constprop(f)));
    q
}

pub fn cse_program(p: &RtlProgram) -> RtlProgram {
    let Ok(q) = p.transform(|_, f| Ok::<_, core::convert::Infallible>(cse(f)));
    q
}
