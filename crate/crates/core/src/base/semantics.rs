//! Generic driver for deterministic small-step semantics.

use alloc::vec::Vec;

use super::events::{Behavior, Event, World};

/// A deterministic transition system with observable events.
pub trait Semantics {
    type State;

    /// `None` when the program has no initial state (e.g. `main` missing).
    fn initial_state(&self) -> Option<Self::State>;

    /// One transition; `None` when the state is stuck or final.
    fn step(&self, st: Self::State, world: &mut World) -> Option<(Option<Event>, Self::State)>;

    /// The exit code if `st` is final.
    fn final_state(&self, st: &Self::State) -> Option<i32>;
}

/// Result of a bounded run.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub behavior: Behavior,
    pub steps: u64,
}

/// Runs for at most `fuel` steps. Exhausting fuel yields `Diverges` with
/// the trace so far; results are monotone in `fuel`.
pub fn run<S: Semantics>(sem: &S, mut world: World, fuel: u64) -> Outcome {
    let mut trace = Vec::new();
    let Some(mut st) = sem.initial_state() else {
        return Outcome { behavior: Behavior::GoesWrong(trace), steps: 0 };
    };
    let mut steps = 0;
    loop {
        if let Some(code) = sem.final_state(&st) {
            return Outcome { behavior: Behavior::Converges(trace, code), steps };
        }
        if steps >= fuel {
            return Outcome { behavior: Behavior::Diverges(trace), steps };
        }
        match sem.step(st, &mut world) {
            Some((ev, next)) => {
                trace.extend(ev);
                st = next;
                steps += 1;
            }
            None => return Outcome { behavior: Behavior::GoesWrong(trace), steps },
        }
    }
}
