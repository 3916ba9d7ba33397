//! Untrusted graph coloring: simplification in order of increasing degree
//! with optimistic spilling, then selection that tries the colors of
//! affinity partners first. The result must pass `validate::check`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::interference::Graph;
use crate::base::Typ;
use crate::locs::{allocatable, typ_words, Loc, MReg};
use crate::rtl::Reg;

pub type Coloring = BTreeMap<Reg, Loc>;

/// Colors every register of `types`; uncolorable ones get fresh local
/// slots numbered by a word counter shared between types.
pub fn color(g: &Graph, types: &BTreeMap<Reg, Typ>) -> Coloring {
    let mut adj: BTreeMap<Reg, BTreeSet<Reg>> = types.keys().map(|&r| (r, BTreeSet::new())).collect();
    for &(a, b) in &g.edges {
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default().insert(a);
    }
    let mut forbidden: BTreeMap<Reg, BTreeSet<MReg>> = BTreeMap::new();
    for &(r, m) in &g.mach {
        forbidden.entry(r).or_default().insert(m);
    }
    let ty = |r: Reg| types.get(&r).copied().unwrap_or(Typ::Int);
    let budget = |r: Reg| {
        let f = forbidden.get(&r);
        allocatable(ty(r)).iter().filter(|m| f.is_none_or(|f| !f.contains(m))).count()
    };

    // Simplify.
    let mut degree: BTreeMap<Reg, usize> =
        adj.iter().map(|(&r, n)| (r, n.iter().filter(|&&x| ty(x) == ty(r)).count())).collect();
    let mut removed: BTreeSet<Reg> = BTreeSet::new();
    let mut stack: Vec<Reg> = Vec::new();
    while removed.len() < adj.len() {
        let live = degree.iter().filter(|(r, _)| !removed.contains(r));
        let pick = live
            .clone()
            .filter(|(&r, &d)| d < budget(r))
            .min_by_key(|(&r, &d)| (d, r))
            .or_else(|| live.max_by_key(|(&r, &d)| (d, core::cmp::Reverse(r))))
            .map(|(&r, _)| r)
            .expect("nodes remain");
        removed.insert(pick);
        stack.push(pick);
        for n in &adj[&pick] {
            if ty(*n) == ty(pick) {
                if let Some(d) = degree.get_mut(n) {
                    *d = d.saturating_sub(1);
                }
            }
        }
    }

    // Select.
    let mut partners: BTreeMap<Reg, Vec<Reg>> = BTreeMap::new();
    for &(a, b) in &g.affinities {
        partners.entry(a).or_default().push(b);
        partners.entry(b).or_default().push(a);
    }
    let mut prefs: BTreeMap<Reg, Vec<MReg>> = BTreeMap::new();
    for &(r, m) in &g.preferences {
        prefs.entry(r).or_default().push(m);
    }
    let mut phi: Coloring = BTreeMap::new();
    let mut next_slot = 0;
    while let Some(r) = stack.pop() {
        let mut taken: BTreeSet<MReg> = forbidden.get(&r).cloned().unwrap_or_default();
        for n in &adj[&r] {
            if let Some(Loc::Reg(m)) = phi.get(n) {
                taken.insert(*m);
            }
        }
        let classes = allocatable(ty(r));
        let ok = |m: &MReg| classes.contains(m) && !taken.contains(m);
        let from_partners =
            partners.get(&r).into_iter().flatten().filter_map(|p| phi.get(p).and_then(Loc::reg)).find(|m| ok(m));
        let choice = from_partners
            .or_else(|| prefs.get(&r).into_iter().flatten().copied().find(|m| ok(m)))
            .or_else(|| classes.iter().copied().find(|m| ok(m)));
        let loc = match choice {
            Some(m) => Loc::Reg(m),
            None => {
                let t = ty(r);
                if t == Typ::Float && next_slot % 2 != 0 {
                    next_slot += 1;
                }
                let l = Loc::local(t, next_slot);
                next_slot += typ_words(t);
                l
            }
        };
        phi.insert(r, loc);
    }
    phi
}
