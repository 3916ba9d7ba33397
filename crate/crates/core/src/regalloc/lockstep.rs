//! Paired execution of an RTL program and its allocated LTL version. At
//! every node the value of each register live before the node must be
//! found in its allocated location.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use super::alloc::Allocation;
use super::liveness::transfer;
use crate::base::{Ident, Semantics, World};
use crate::ltl::interp::LtlState;
use crate::ltl::{LtlInterp, LtlProgram};
use crate::rtl::interp::RtlState;
use crate::rtl::{RtlFunction, RtlInterp, RtlProgram};

/// Runs both programs for at most `fuel` steps and returns the number of
/// register/location comparisons made.
pub fn check_lockstep(
    rtl: &RtlProgram,
    ltl: &LtlProgram,
    allocs: &BTreeMap<Ident, Allocation>,
    world: World,
    fuel: u64,
) -> Result<usize, String> {
    let ri = RtlInterp::new(rtl)?;
    let li = LtlInterp::new(ltl)?;
    let names: BTreeMap<*const RtlFunction, &Ident> = rtl
        .functions
        .iter()
        .filter_map(|(n, fd)| match fd {
            crate::base::FunDef::Internal(f) => Some((f as *const RtlFunction, n)),
            _ => None,
        })
        .collect();
    let (mut w1, mut w2) = (world.clone(), world);
    let (Some(mut s1), Some(mut s2)) = (ri.initial_state(), li.initial_state()) else {
        return Err(String::from("no initial state"));
    };
    let mut checks = 0;
    for step in 0..fuel {
        match (&s1, &s2) {
            (RtlState::State { f, pc, regs, .. }, LtlState::State { pc: pc2, locs, .. }) => {
                if pc != pc2 {
                    return Err(format!("step {step}: RTL at node {pc}, LTL at {pc2}"));
                }
                let name = names[&(*f as *const RtlFunction)];
                let a = &allocs[name];
                let before = transfer(f, *pc, a.live.get(pc).unwrap_or(&Default::default()));
                for r in &before.0 {
                    checks += 1;
                    let (v, l) = (regs.get(*r), a.coloring[r]);
                    if locs.get(l) != v {
                        return Err(format!("\"{name}\" node {pc}: x{r} = {v} but {l} = {}", locs.get(l)));
                    }
                }
            }
            (RtlState::Call { fd, args, .. }, LtlState::Call { fd: fd2, args: args2, .. }) => {
                if fd != fd2 || args != args2 {
                    return Err(format!("step {step}: calls differ: {args:?} vs {args2:?}"));
                }
            }
            (RtlState::Return { v, .. }, LtlState::Return { v: v2, .. }) => {
                if v != v2 {
                    return Err(format!("step {step}: returns differ: {v} vs {v2}"));
                }
            }
            _ => return Err(format!("step {step}: states of different kinds")),
        }
        if ri.final_state(&s1).is_some() {
            return Ok(checks);
        }
        let Some((e1, n1)) = ri.step(s1, &mut w1) else {
            return Ok(checks);
        };
        let Some((e2, n2)) = li.step(s2, &mut w2) else {
            return Err(format!("step {step}: LTL stuck, RTL not"));
        };
        if e1 != e2 {
            return Err(format!("step {step}: events differ: {e1:?} vs {e2:?}"));
        }
        s1 = n1;
        s2 = n2;
    }
    Ok(checks)
}
