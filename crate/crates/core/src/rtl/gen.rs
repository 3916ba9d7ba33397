//! RTL generation from CminorSel. Translation proceeds backwards: each
//! function receives the node(s) control continues to and returns the node
//! where the translated code starts.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{FnRef, Instr, Node, Reg, RtlFunction, RtlProgram};
use crate::base::Ident;
use crate::ops::{Comparison, Condition, Operation};
use crate::selection::{Callee, CondExpr, SelExpr, SelFunction, SelProgram, SelStmt};
use crate::structured::Stmt;

/// Code under construction plus the fresh node and register supplies.
/// Nodes at or above `next_node` are absent from `code`.
#[derive(Clone, Debug)]
pub struct GenContext {
    pub code: BTreeMap<Node, Instr>,
    pub next_node: Node,
    pub next_reg: Reg,
    /// Reserved but not yet filled.
    reserved: Vec<Node>,
}

impl Default for GenContext {
    fn default() -> Self {
        GenContext { code: BTreeMap::new(), next_node: 1, next_reg: 1, reserved: Vec::new() }
    }
}

type Res<T> = Result<T, String>;

impl GenContext {
    pub fn add_instr(&mut self, i: Instr) -> Node {
        let n = self.next_node;
        self.next_node += 1;
        self.code.insert(n, i);
        n
    }

    pub fn reserve_instr(&mut self) -> Node {
        let n = self.next_node;
        self.next_node += 1;
        self.reserved.push(n);
        n
    }

    pub fn update_instr(&mut self, n: Node, i: Instr) -> Res<()> {
        if self.code.contains_key(&n) || !self.reserved.contains(&n) {
            return Err(format!("node {n} is not a reserved empty node"));
        }
        self.reserved.retain(|&m| m != n);
        self.code.insert(n, i);
        Ok(())
    }

    pub fn new_reg(&mut self) -> Reg {
        let r = self.next_reg;
        self.next_reg += 1;
        r
    }
}

struct Gen {
    ctx: GenContext,
    vars: BTreeMap<Ident, Reg>,
    labels: BTreeMap<Ident, Node>,
    /// When set, every statement translation is checked to only extend the
    /// context; the count of checks performed is recorded.
    audit: Option<usize>,
}

impl Gen {
    fn var(&self, x: &str) -> Res<Reg> {
        self.vars.get(x).copied().ok_or_else(|| format!("undeclared variable `{x}`"))
    }

    /// Target register for an argument: variables are read in place.
    fn alloc_reg(&mut self, e: &SelExpr) -> Res<Reg> {
        match e {
            SelExpr::Var(x) => self.var(x),
            _ => Ok(self.ctx.new_reg()),
        }
    }

    fn alloc_regs(&mut self, es: &[SelExpr]) -> Res<Vec<Reg>> {
        es.iter().map(|e| self.alloc_reg(e)).collect()
    }

    fn add_move(&mut self, src: Reg, dst: Reg, nd: Node) -> Node {
        if src == dst {
            nd
        } else {
            self.ctx.add_instr(Instr::Op(Operation::Move, alloc::vec![src], dst, nd))
        }
    }

    fn expr(&mut self, e: &SelExpr, rd: Reg, nd: Node) -> Res<Node> {
        match e {
            SelExpr::Var(x) => {
                let r = self.var(x)?;
                Ok(self.add_move(r, rd, nd))
            }
            SelExpr::Op(op, args) => {
                let rs = self.alloc_regs(args)?;
                let n = self.ctx.add_instr(Instr::Op(op.clone(), rs.clone(), rd, nd));
                self.exprs(args, &rs, n)
            }
            SelExpr::Load(chunk, mode, args) => {
                let rs = self.alloc_regs(args)?;
                let n = self.ctx.add_instr(Instr::Load(*chunk, mode.clone(), rs.clone(), rd, nd));
                self.exprs(args, &rs, n)
            }
            SelExpr::Condition(c, a, b) => {
                let nt = self.expr(a, rd, nd)?;
                let nf = self.expr(b, rd, nd)?;
                self.cond(c, nt, nf)
            }
        }
    }

    /// Evaluates `es` left to right into `rs`.
    fn exprs(&mut self, es: &[SelExpr], rs: &[Reg], nd: Node) -> Res<Node> {
        let mut n = nd;
        for (e, &r) in es.iter().zip(rs).rev() {
            n = self.expr(e, r, n)?;
        }
        Ok(n)
    }

    fn cond(&mut self, c: &CondExpr, ntrue: Node, nfalse: Node) -> Res<Node> {
        match c {
            CondExpr::True => Ok(ntrue),
            CondExpr::False => Ok(nfalse),
            CondExpr::Cond(cond, args) => {
                let rs = self.alloc_regs(args)?;
                let n = self.ctx.add_instr(Instr::Cond(cond.clone(), rs.clone(), ntrue, nfalse));
                self.exprs(args, &rs, n)
            }
            CondExpr::Conditional(a, b, c) => {
                let nb = self.cond(b, ntrue, nfalse)?;
                let nc = self.cond(c, ntrue, nfalse)?;
                self.cond(a, nb, nc)
            }
        }
    }

    /// Callee evaluation followed by arguments, then `mk` at the end.
    fn call(&mut self, callee: &Callee, args: &[SelExpr], mk: impl FnOnce(FnRef<Reg>, Vec<Reg>) -> Instr) -> Res<Node> {
        let (fref, fe) = match callee {
            Callee::Symbol(id) => (FnRef::Symbol(id.clone()), None),
            Callee::Expr(e) => (FnRef::Reg(self.alloc_reg(e)?), Some(e)),
        };
        let rs = self.alloc_regs(args)?;
        let n = self.ctx.add_instr(mk(fref.clone(), rs.clone()));
        let n = self.exprs(args, &rs, n)?;
        match (fe, fref) {
            (Some(e), FnRef::Reg(r)) => self.expr(e, r, n),
            _ => Ok(n),
        }
    }

    fn switch_tree(&mut self, r: Reg, cases: &[(i32, Node)], ndefault: Node) -> Node {
        match cases.len() {
            0 => ndefault,
            1 => {
                let (k, n) = cases[0];
                self.ctx.add_instr(Instr::Cond(Condition::CompImm(Comparison::Eq, k), alloc::vec![r], n, ndefault))
            }
            len => {
                let mid = len / 2;
                let (k, n) = cases[mid];
                let lo = self.switch_tree(r, &cases[..mid], ndefault);
                let hi = self.switch_tree(r, &cases[mid + 1..], ndefault);
                let split =
                    self.ctx.add_instr(Instr::Cond(Condition::CompImm(Comparison::Lt, k), alloc::vec![r], lo, hi));
                self.ctx.add_instr(Instr::Cond(Condition::CompImm(Comparison::Eq, k), alloc::vec![r], n, split))
            }
        }
    }

    fn stmt(&mut self, s: &SelStmt, nd: Node, nexits: &[Node], nret: Node, rret: Option<Reg>) -> Res<Node> {
        let Some(count) = self.audit else {
            return self.stmt_inner(s, nd, nexits, nret, rret);
        };
        let before = self.ctx.clone();
        let n = self.stmt_inner(s, nd, nexits, nret, rret)?;
        let grew = self.ctx.next_reg >= before.next_reg
            && self.ctx.next_node >= before.next_node
            && before.code.iter().all(|(k, i)| self.ctx.code.get(k) == Some(i))
            && self.ctx.code.keys().all(|&k| k < self.ctx.next_node);
        if !grew {
            return Err(format!("generation context shrank or changed while translating {s:?}"));
        }
        self.audit = Some(self.audit.unwrap_or(count) + 1);
        Ok(n)
    }

    fn stmt_inner(&mut self, s: &SelStmt, nd: Node, nexits: &[Node], nret: Node, rret: Option<Reg>) -> Res<Node> {
        match s {
            Stmt::Skip => Ok(nd),
            Stmt::Assign(x, e) => {
                let r = self.var(x)?;
                match e {
                    // Always one node, even for `x = x`.
                    SelExpr::Var(y) => {
                        let ry = self.var(y)?;
                        Ok(self.ctx.add_instr(Instr::Op(Operation::Move, alloc::vec![ry], r, nd)))
                    }
                    _ => self.expr(e, r, nd),
                }
            }
            Stmt::Store(chunk, (mode, args), e) => {
                let rs = self.alloc_regs(args)?;
                let rv = self.alloc_reg(e)?;
                let n = self.ctx.add_instr(Instr::Store(*chunk, mode.clone(), rs.clone(), rv, nd));
                let n = self.expr(e, rv, n)?;
                self.exprs(args, &rs, n)
            }
            Stmt::Call(dest, sig, callee, args) => {
                let rd = dest.as_ref().map(|x| self.var(x)).transpose()?;
                let sig = sig.clone();
                self.call(callee, args, |f, rs| Instr::Call(sig, f, rs, rd, nd))
            }
            Stmt::Tailcall(sig, callee, args) => {
                let sig = sig.clone();
                self.call(callee, args, |f, rs| Instr::Tailcall(sig, f, rs))
            }
            Stmt::Return(None) => Ok(self.ctx.add_instr(Instr::Return(None))),
            Stmt::Return(Some(e)) => {
                let r = rret.ok_or("return with a value in a void function")?;
                self.expr(e, r, nret)
            }
            Stmt::Seq(a, b) => {
                let nb = self.stmt(b, nd, nexits, nret, rret)?;
                self.stmt(a, nb, nexits, nret, rret)
            }
            Stmt::If(c, a, b) => {
                let na = self.stmt(a, nd, nexits, nret, rret)?;
                let nb = self.stmt(b, nd, nexits, nret, rret)?;
                self.cond(c, na, nb)
            }
            Stmt::Loop(body) => {
                let n = self.ctx.reserve_instr();
                let nb = self.stmt(body, n, nexits, nret, rret)?;
                self.ctx.update_instr(n, Instr::Nop(nb))?;
                Ok(n)
            }
            Stmt::Block(body) => {
                let mut inner = alloc::vec![nd];
                inner.extend_from_slice(nexits);
                self.stmt(body, nd, &inner, nret, rret)
            }
            Stmt::Exit(k) => {
                nexits.get(*k as usize).copied().ok_or_else(|| format!("exit({k}) outside of enough blocks"))
            }
            Stmt::Switch(e, tbl, dfl) => {
                let exit = |k: u32| {
                    nexits.get(k as usize).copied().ok_or_else(|| format!("switch exit({k}) outside of enough blocks"))
                };
                let mut cases: Vec<(i32, Node)> = Vec::new();
                for &(v, k) in tbl {
                    // The first case for a value wins.
                    if !cases.iter().any(|&(w, _)| w == v) {
                        cases.push((v, exit(k)?));
                    }
                }
                cases.sort_by_key(|&(v, _)| v);
                let ndefault = exit(*dfl)?;
                let r = self.alloc_reg(e)?;
                let n = self.switch_tree(r, &cases, ndefault);
                self.expr(e, r, n)
            }
            Stmt::Label(l, body) => {
                let nb = self.stmt(body, nd, nexits, nret, rret)?;
                let n = self.labels[l];
                self.ctx.update_instr(n, Instr::Nop(nb))?;
                Ok(n)
            }
            Stmt::Goto(l) => self.labels.get(l).copied().ok_or_else(|| format!("undefined label `{l}`")),
        }
    }
}

fn collect_labels(s: &SelStmt, out: &mut Vec<Ident>) {
    match s {
        Stmt::Seq(a, b) | Stmt::If(_, a, b) => {
            collect_labels(a, out);
            collect_labels(b, out);
        }
        Stmt::Loop(b) | Stmt::Block(b) => collect_labels(b, out),
        Stmt::Label(l, b) => {
            out.push(l.clone());
            collect_labels(b, out);
        }
        _ => {}
    }
}

/// Translation with the final generation context exposed. With `audit`,
/// also returns how many statement translations were checked for
/// monotonicity.
pub fn transl_function_ctx(f: &SelFunction, audit: bool) -> Res<(RtlFunction, GenContext, usize)> {
    let mut g =
        Gen { ctx: GenContext::default(), vars: BTreeMap::new(), labels: BTreeMap::new(), audit: audit.then_some(0) };
    let mut params = Vec::new();
    for x in f.params.iter().chain(&f.vars) {
        let r = g.ctx.new_reg();
        if g.vars.insert(x.clone(), r).is_some() {
            return Err(format!("variable `{x}` declared twice"));
        }
        if params.len() < f.params.len() {
            params.push(r);
        }
    }
    let rret = f.sig.res.map(|_| g.ctx.new_reg());
    let nret = g.ctx.add_instr(Instr::Return(rret));
    // Falling off the end: fine for void functions, stuck otherwise.
    let nfall = if rret.is_none() { nret } else { g.ctx.add_instr(Instr::Return(None)) };
    let mut labels = Vec::new();
    collect_labels(&f.body, &mut labels);
    for l in labels {
        let n = g.ctx.reserve_instr();
        if g.labels.insert(l.clone(), n).is_some() {
            return Err(format!("duplicate label `{l}`"));
        }
    }
    let entrypoint = g.stmt(&f.body, nfall, &[], nret, rret)?;
    if let Some(n) = g.ctx.reserved.first() {
        return Err(format!("reserved node {n} never filled"));
    }
    let rf = RtlFunction { sig: f.sig.clone(), params, stacksize: f.stacksize, entrypoint, code: g.ctx.code.clone() };
    if rf.max_reg() >= g.ctx.next_reg {
        return Err(format!("register {} beyond the supply", rf.max_reg()));
    }
    rf.check_closed()?;
    Ok((rf, g.ctx, g.audit.unwrap_or(0)))
}

pub fn transl_function(f: &SelFunction) -> Res<RtlFunction> {
    transl_function_ctx(f, false).map(|(rf, ..)| rf)
}

pub fn transl_program(p: &SelProgram) -> Res<RtlProgram> {
    p.transform(|name, f| transl_function(f).map_err(|e| format!("in function `{name}`: {e}")))
}
