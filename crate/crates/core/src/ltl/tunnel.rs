//! Branch tunneling: every successor `l` is replaced by the canonical
//! representative of its class, where `l: nop(l')` merges the classes of
//! `l` and `l'` with the representative of `l'` winning.

use alloc::collections::BTreeMap;

use super::ast::{Instr, LtlFunction, Node};

/// Union-find over nodes; absent nodes are their own representative.
#[derive(Clone, Debug, Default)]
pub struct UnionFind {
    parent: BTreeMap<Node, Node>,
}

impl UnionFind {
    pub fn find(&self, mut n: Node) -> Node {
        while let Some(&p) = self.parent.get(&n) {
            n = p;
        }
        n
    }

    /// Makes the class of `b` absorb that of `a`.
    fn union(&mut self, a: Node, b: Node) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent.insert(ra, rb);
        }
    }
}

/// The branch-target map `D` of a function.
pub fn branch_map(f: &LtlFunction) -> UnionFind {
    let mut uf = UnionFind::default();
    for (&l, i) in &f.code {
        if let Instr::Nop(s) = i {
            uf.union(l, *s);
        }
    }
    uf
}

pub fn tunnel(f: &LtlFunction) -> LtlFunction {
    let uf = branch_map(f);
    let mut g = f.clone();
    for i in g.code.values_mut() {
        for s in i.successors_mut() {
            *s = uf.find(*s);
        }
    }
    g.entrypoint = uf.find(f.entrypoint);
    g
}
