//! Shared infrastructure: machine integers, values, memory, programs,
//! global environments, events and the generic small-step driver.

pub mod events;
pub mod int;
pub mod mem;
pub mod program;
pub mod semantics;
pub mod value;

pub use events::{Behavior, Event, Trace, World};
pub use mem::Mem;
pub use program::{globalenv, ExtFun, FunDef, Genv, GlobalVar, Ident, Program};
pub use semantics::{run, Outcome, Semantics};
pub use value::{cast, BlockId, Chunk, InitData, Signature, Typ, Value};
