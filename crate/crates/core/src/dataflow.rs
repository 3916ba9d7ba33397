//! Generic dataflow solvers over a node-indexed graph and an a posteriori
//! checker for their solutions.
//!
//! A forward solution `A` satisfies `A(s) >= T(l, A(l))` for every edge
//! `l -> s` and `A(l) >= a` for every constraint `(l, a)`. Backward
//! problems are solved on the reversed graph, giving `A(l) >= T(s, A(s))`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

pub type Node = u32;

/// A partially ordered carrier; `ge` must be reflexive and transitive.
pub trait Lattice: Clone + PartialEq {
    fn ge(&self, other: &Self) -> bool;
}

/// Requirements of the worklist solver. `lub` need only be an upper bound.
pub trait JoinLattice: Lattice {
    fn bot() -> Self;
    fn lub(&self, other: &Self) -> Self;
}

/// Requirements of the extended-basic-block solver; `top` must be maximal.
pub trait TopLattice: Lattice {
    fn top() -> Self;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

pub struct Problem<'a, A> {
    /// The domain is the key set; edges to nodes outside it are ignored.
    pub successors: &'a BTreeMap<Node, Vec<Node>>,
    pub transfer: &'a dyn Fn(Node, &A) -> A,
    pub cstrs: Vec<(Node, A)>,
    pub direction: Direction,
}

pub type Solution<A> = BTreeMap<Node, A>;

/// Join operations allowed before giving up.
pub const MAX_JOINS: usize = 1_000_000;

impl<A> Problem<'_, A> {
    /// Edges in the direction information flows, within the domain.
    fn flow_edges(&self) -> BTreeMap<Node, Vec<Node>> {
        let mut out: BTreeMap<Node, Vec<Node>> = self.successors.keys().map(|&n| (n, Vec::new())).collect();
        for (&l, succs) in self.successors {
            for &s in succs {
                if !self.successors.contains_key(&s) {
                    continue;
                }
                match self.direction {
                    Direction::Forward => out.get_mut(&l).unwrap().push(s),
                    Direction::Backward => out.get_mut(&s).unwrap().push(l),
                }
            }
        }
        out
    }
}

/// Worklist solver, extracting the lowest node first.
pub fn kildall_solve<A: JoinLattice>(p: &Problem<'_, A>) -> Option<Solution<A>> {
    kildall_solve_ordered(p, |n| n as u64)
}

/// Worklist solver extracting nodes by increasing `priority`.
pub fn kildall_solve_ordered<A: JoinLattice>(
    p: &Problem<'_, A>,
    priority: impl Fn(Node) -> u64,
) -> Option<Solution<A>> {
    let edges = p.flow_edges();
    let mut sol: Solution<A> = edges.keys().map(|&n| (n, A::bot())).collect();
    for (n, a) in &p.cstrs {
        if let Some(cur) = sol.get_mut(n) {
            *cur = cur.lub(a);
        }
    }
    let mut work: BTreeSet<(u64, Node)> = edges.keys().map(|&n| (priority(n), n)).collect();
    let mut joins = 0usize;
    while let Some((_, l)) = work.pop_first() {
        let out = (p.transfer)(l, &sol[&l]);
        for &s in &edges[&l] {
            joins += 1;
            if joins > MAX_JOINS {
                return None;
            }
            let cur = &sol[&s];
            let new = cur.lub(&out);
            if new != *cur {
                sol.insert(s, new);
                work.insert((priority(s), s));
            }
        }
    }
    Some(sol)
}

/// Propagation along extended basic blocks: a node with exactly one
/// (distinct) flow predecessor and no constraint receives the transfer of
/// that predecessor; every other node, including nodes on cycles not
/// entered from elsewhere, gets top.
pub fn ebb_solve<A: TopLattice>(p: &Problem<'_, A>) -> Option<Solution<A>> {
    let edges = p.flow_edges();
    let mut preds: BTreeMap<Node, BTreeSet<Node>> = edges.keys().map(|&n| (n, BTreeSet::new())).collect();
    for (&l, succs) in &edges {
        for s in succs {
            preds.get_mut(s).unwrap().insert(l);
        }
    }
    let constrained: BTreeSet<Node> = p.cstrs.iter().map(|(n, _)| *n).collect();
    let is_root = |n: &Node| preds[n].len() != 1 || constrained.contains(n);
    let mut sol: Solution<A> = BTreeMap::new();
    let mut work: Vec<Node> = Vec::new();
    for &n in edges.keys() {
        if is_root(&n) {
            sol.insert(n, A::top());
            work.push(n);
        }
    }
    let mut steps = 0usize;
    while let Some(l) = work.pop() {
        steps += 1;
        if steps > MAX_JOINS {
            return None;
        }
        let out = (p.transfer)(l, &sol[&l]);
        for &s in &edges[&l] {
            if !sol.contains_key(&s) && !is_root(&s) {
                sol.insert(s, out.clone());
                work.push(s);
            }
        }
    }
    for &n in edges.keys() {
        sol.entry(n).or_insert_with(A::top);
    }
    Some(sol)
}

/// Whether `sol` satisfies every edge inequation and constraint. Nodes
/// absent from `sol` are not constrained.
pub fn check_solution<A: Lattice>(p: &Problem<'_, A>, sol: &Solution<A>) -> bool {
    for (n, a) in &p.cstrs {
        if let Some(x) = sol.get(n) {
            if !x.ge(a) {
                return false;
            }
        }
    }
    for (l, succs) in &p.flow_edges() {
        let Some(al) = sol.get(l) else { continue };
        let out = (p.transfer)(*l, al);
        for s in succs {
            if let Some(as_) = sol.get(s) {
                if !as_.ge(&out) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Flat lattice of integer constants.
    #[derive(Clone, Copy, Debug, PartialEq)]
    enum Flat {
        Bot,
        Const(i32),
        Top,
    }

    impl Lattice for Flat {
        fn ge(&self, o: &Flat) -> bool {
            matches!((self, o), (Flat::Top, _) | (_, Flat::Bot)) || self == o
        }
    }

    impl JoinLattice for Flat {
        fn bot() -> Flat {
            Flat::Bot
        }
        fn lub(&self, o: &Flat) -> Flat {
            match (self, o) {
                (Flat::Bot, x) | (x, Flat::Bot) => *x,
                (a, b) if a == b => *a,
                _ => Flat::Top,
            }
        }
    }

    impl TopLattice for Flat {
        fn top() -> Flat {
            Flat::Top
        }
    }

    /// Sets under inclusion.
    #[derive(Clone, Debug, PartialEq)]
    struct Set(BTreeSet<u32>);

    impl Lattice for Set {
        fn ge(&self, o: &Set) -> bool {
            self.0.is_superset(&o.0)
        }
    }

    impl JoinLattice for Set {
        fn bot() -> Set {
            Set(BTreeSet::new())
        }
        fn lub(&self, o: &Set) -> Set {
            Set(self.0.union(&o.0).copied().collect())
        }
    }

    fn graph(edges: &[(Node, &[Node])]) -> BTreeMap<Node, Vec<Node>> {
        edges.iter().map(|(n, s)| (*n, s.to_vec())).collect()
    }

    /// Round-robin iteration to a fixpoint, as an independent oracle.
    fn naive<A: JoinLattice>(p: &Problem<'_, A>) -> Solution<A> {
        let edges = p.flow_edges();
        let mut sol: Solution<A> = edges.keys().map(|&n| (n, A::bot())).collect();
        for (n, a) in &p.cstrs {
            let v = sol[n].lub(a);
            sol.insert(*n, v);
        }
        loop {
            let mut changed = false;
            for (l, succs) in &edges {
                let out = (p.transfer)(*l, &sol[l]);
                for s in succs {
                    let v = sol[s].lub(&out);
                    if v != sol[s] {
                        sol.insert(*s, v);
                        changed = true;
                    }
                }
            }
            if !changed {
                return sol;
            }
        }
    }

    #[test]
    fn single_node_constraint() {
        let g = graph(&[(1, &[])]);
        let id = |_: Node, a: &Flat| *a;
        let p =
            Problem { successors: &g, transfer: &id, cstrs: vec![(1, Flat::Const(3))], direction: Direction::Forward };
        let sol = kildall_solve(&p).unwrap();
        assert!(sol[&1].ge(&Flat::Const(3)));
        assert!(check_solution(&p, &sol));
    }

    #[test]
    fn diamond_joins_both_arms() {
        // 1 -> {2, 3} -> 4; node 2 sets 5, node 3 sets 5 or 6.
        let g = graph(&[(1, &[2, 3]), (2, &[4]), (3, &[4]), (4, &[])]);
        for (v3, expect) in [(5, Flat::Const(5)), (6, Flat::Top)] {
            let t = move |n: Node, a: &Flat| match n {
                2 => Flat::Const(5),
                3 => Flat::Const(v3),
                _ => *a,
            };
            let p =
                Problem { successors: &g, transfer: &t, cstrs: vec![(1, Flat::Top)], direction: Direction::Forward };
            let sol = kildall_solve(&p).unwrap();
            assert_eq!(sol[&4], expect);
            assert_eq!(sol, naive(&p));
            assert!(check_solution(&p, &sol));
            let mut bad = sol.clone();
            bad.insert(4, Flat::Bot);
            assert!(!check_solution(&p, &bad));
        }
    }

    #[test]
    fn backward_liveness_chain() {
        // 1: x = 1; 2: y = x; 3: return y
        let g = graph(&[(1, &[2]), (2, &[3]), (3, &[])]);
        let t = |n: Node, live: &Set| {
            let mut s = live.0.clone();
            match n {
                1 => {
                    s.remove(&1);
                }
                2 => {
                    s.remove(&2);
                    s.insert(1);
                }
                _ => {
                    s.insert(2);
                }
            }
            Set(s)
        };
        let p = Problem { successors: &g, transfer: &t, cstrs: vec![], direction: Direction::Backward };
        let sol = kildall_solve(&p).unwrap();
        // Live-out sets.
        assert_eq!(sol[&1], Set([1].into_iter().collect()));
        assert_eq!(sol[&2], Set([2].into_iter().collect()));
        assert_eq!(sol[&3], Set(BTreeSet::new()));
        assert_eq!(sol, naive(&p));
        assert!(check_solution(&p, &sol));
    }

    #[test]
    fn ebb_propagation() {
        let inc = |_: Node, a: &Flat| match a {
            Flat::Const(n) => Flat::Const(n + 1),
            x => *x,
        };
        let line = graph(&[(1, &[2]), (2, &[3]), (3, &[])]);
        let p = Problem { successors: &line, transfer: &inc, cstrs: vec![], direction: Direction::Forward };
        let set = |_: Node, _: &Flat| Flat::Const(0);
        let p2 = Problem { successors: &line, transfer: &set, cstrs: vec![], direction: Direction::Forward };
        let sol = ebb_solve(&p2).unwrap();
        assert_eq!((sol[&1], sol[&2], sol[&3]), (Flat::Top, Flat::Const(0), Flat::Const(0)));
        assert!(check_solution(&p2, &sol));
        assert!(check_solution(&p, &ebb_solve(&p).unwrap()));

        let join = graph(&[(1, &[2, 3]), (2, &[4]), (3, &[4]), (4, &[])]);
        let p = Problem { successors: &join, transfer: &set, cstrs: vec![], direction: Direction::Forward };
        let sol = ebb_solve(&p).unwrap();
        assert_eq!((sol[&2], sol[&3], sol[&4]), (Flat::Const(0), Flat::Const(0), Flat::Top));

        let looped = graph(&[(1, &[2]), (2, &[3]), (3, &[2, 4]), (4, &[]), (5, &[6]), (6, &[5])]);
        let p = Problem { successors: &looped, transfer: &set, cstrs: vec![], direction: Direction::Forward };
        let sol = ebb_solve(&p).unwrap();
        assert_eq!(sol[&2], Flat::Top);
        assert_eq!(sol[&3], Flat::Const(0));
        // An isolated cycle has no root to start from.
        assert_eq!((sol[&5], sol[&6]), (Flat::Top, Flat::Top));
        assert!(check_solution(&p, &sol));
    }

    #[test]
    fn top_everywhere_is_a_solution() {
        let g = graph(&[(1, &[2, 1]), (2, &[3]), (3, &[1])]);
        let t = |n: Node, _: &Flat| Flat::Const(n as i32);
        let p =
            Problem { successors: &g, transfer: &t, cstrs: vec![(1, Flat::Const(9))], direction: Direction::Forward };
        let sol: Solution<Flat> = g.keys().map(|&n| (n, Flat::Top)).collect();
        assert!(check_solution(&p, &sol));
    }

    #[test]
    fn iteration_bound_gives_up() {
        // An infinite ascending chain never stabilizes.
        #[derive(Clone, Debug, PartialEq)]
        struct Up(u64);
        impl Lattice for Up {
            fn ge(&self, o: &Up) -> bool {
                self.0 >= o.0
            }
        }
        impl JoinLattice for Up {
            fn bot() -> Up {
                Up(0)
            }
            fn lub(&self, o: &Up) -> Up {
                Up(self.0.max(o.0))
            }
        }
        let g = graph(&[(1, &[1])]);
        let t = |_: Node, a: &Up| Up(a.0 + 1);
        let p = Problem { successors: &g, transfer: &t, cstrs: vec![], direction: Direction::Forward };
        assert!(kildall_solve(&p).is_none());
    }
}
