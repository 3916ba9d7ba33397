//! Sequentialization of parallel moves by cycle decomposition.
//!
//! Precondition: destinations pairwise non-overlapping, and any two
//! locations that overlap are equal (registers, same-typed slots).

use alloc::vec::Vec;

use crate::base::Typ;
use crate::locs::Loc;

/// Elementary moves `(src, dst)` whose sequential execution performs
/// `dsts := srcs` on every location except the temporaries `tmp(ty)`.
pub fn parallel_move(srcs: &[Loc], dsts: &[Loc], tmp: impl Fn(Typ) -> Loc) -> Vec<(Loc, Loc)> {
    assert_eq!(srcs.len(), dsts.len(), "parallel move arity");
    let mut todo: Vec<(Loc, Loc)> = srcs.iter().zip(dsts).filter(|(s, d)| s != d).map(|(s, d)| (*s, *d)).collect();
    let mut out = Vec::new();
    while !todo.is_empty() {
        // A destination nobody still reads can be written now.
        let ready = (0..todo.len()).find(|&i| todo.iter().all(|(s, _)| !s.overlaps(&todo[i].1)));
        match ready {
            Some(i) => out.push(todo.remove(i)),
            None => {
                // Every destination is still read: todo is a union of cycles.
                let s = todo[0].0;
                let t = tmp(s.typ());
                out.push((s, t));
                for m in todo.iter_mut() {
                    if m.0 == s {
                        m.0 = t;
                    }
                }
            }
        }
    }
    out
}

/// Reference semantics: all sources are read before any destination is written.
pub fn parallel_assign(map: &mut crate::locs::LocMap, srcs: &[Loc], dsts: &[Loc]) {
    let vs = map.list(srcs);
    for (d, v) in dsts.iter().zip(vs) {
        map.set(*d, v);
    }
}
