//! Structured statements with blocks, exits, labels and continuations.
//!
//! Cminor and CminorSel share this statement language and its small-step
//! semantics; they differ only in their expressions, conditions, store
//! addresses and callees, supplied through [`Lang`].

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::base::{Chunk, Event, FunDef, Genv, Ident, Mem, Program, Semantics, Signature, Value, World};

pub type Env = BTreeMap<Ident, Value>;

/// Evaluation context for pure expressions.
pub struct Ctx<'a> {
    pub genv: &'a Genv,
    pub sp: Value,
    pub env: &'a Env,
    pub mem: &'a Mem,
}

pub trait Lang: Clone + Debug + PartialEq {
    type Expr: Clone + Debug + PartialEq;
    type Cond: Clone + Debug + PartialEq;
    type Addr: Clone + Debug + PartialEq;
    type Callee: Clone + Debug + PartialEq;

    fn eval_expr(ctx: &Ctx<'_>, e: &Self::Expr) -> Option<Value>;
    fn eval_cond(ctx: &Ctx<'_>, c: &Self::Cond) -> Option<bool>;
    /// Address of a store; must be a pointer for the store to proceed.
    fn eval_addr(ctx: &Ctx<'_>, a: &Self::Addr) -> Option<Value>;
    fn eval_callee(ctx: &Ctx<'_>, c: &Self::Callee) -> Option<Value>;
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt<L: Lang> {
    Skip,
    Assign(Ident, L::Expr),
    Store(Chunk, L::Addr, L::Expr),
    Call(Option<Ident>, Signature, L::Callee, Vec<L::Expr>),
    Tailcall(Signature, L::Callee, Vec<L::Expr>),
    Return(Option<L::Expr>),
    Seq(Box<Stmt<L>>, Box<Stmt<L>>),
    If(L::Cond, Box<Stmt<L>>, Box<Stmt<L>>),
    Loop(Box<Stmt<L>>),
    Block(Box<Stmt<L>>),
    /// Leaves the `n+1` innermost enclosing blocks.
    Exit(u32),
    /// Scrutinee, `(value, exit)` table, default exit.
    Switch(L::Expr, Vec<(i32, u32)>, u32),
    Label(Ident, Box<Stmt<L>>),
    Goto(Ident),
}

impl<L: Lang> Stmt<L> {
    pub fn seq(s1: Stmt<L>, s2: Stmt<L>) -> Stmt<L> {
        Stmt::Seq(Box::new(s1), Box::new(s2))
    }

    /// Right-nested sequence of `stmts`; empty is `Skip`.
    pub fn seq_all(mut stmts: Vec<Stmt<L>>) -> Stmt<L> {
        let Some(mut acc) = stmts.pop() else {
            return Stmt::Skip;
        };
        while let Some(s) = stmts.pop() {
            acc = Stmt::seq(s, acc);
        }
        acc
    }

    /// Structure-preserving translation of expressions.
    pub fn map<M: Lang, E>(&self, tr: &mut impl StmtTranslator<L, M, E>) -> Result<Stmt<M>, E> {
        Ok(match self {
            Stmt::Skip => Stmt::Skip,
            Stmt::Assign(x, e) => Stmt::Assign(x.clone(), tr.expr(e)?),
            Stmt::Store(c, a, e) => Stmt::Store(*c, tr.addr(a)?, tr.expr(e)?),
            Stmt::Call(d, sig, f, args) => Stmt::Call(d.clone(), sig.clone(), tr.callee(f)?, tr.exprs(args)?),
            Stmt::Tailcall(sig, f, args) => Stmt::Tailcall(sig.clone(), tr.callee(f)?, tr.exprs(args)?),
            Stmt::Return(e) => Stmt::Return(e.as_ref().map(|e| tr.expr(e)).transpose()?),
            Stmt::Seq(a, b) => Stmt::seq(a.map(tr)?, b.map(tr)?),
            Stmt::If(c, a, b) => Stmt::If(tr.cond(c)?, Box::new(a.map(tr)?), Box::new(b.map(tr)?)),
            Stmt::Loop(s) => Stmt::Loop(Box::new(s.map(tr)?)),
            Stmt::Block(s) => Stmt::Block(Box::new(s.map(tr)?)),
            Stmt::Exit(n) => Stmt::Exit(*n),
            Stmt::Switch(e, tbl, dfl) => Stmt::Switch(tr.expr(e)?, tbl.clone(), *dfl),
            Stmt::Label(l, s) => Stmt::Label(l.clone(), Box::new(s.map(tr)?)),
            Stmt::Goto(l) => Stmt::Goto(l.clone()),
        })
    }
}

/// Expression-level translation used by [`Stmt::map`].
pub trait StmtTranslator<L: Lang, M: Lang, E> {
    fn expr(&mut self, e: &L::Expr) -> Result<M::Expr, E>;
    fn cond(&mut self, c: &L::Cond) -> Result<M::Cond, E>;
    fn addr(&mut self, a: &L::Addr) -> Result<M::Addr, E>;
    fn callee(&mut self, c: &L::Callee) -> Result<M::Callee, E>;
    fn exprs(&mut self, es: &[L::Expr]) -> Result<Vec<M::Expr>, E> {
        es.iter().map(|e| self.expr(e)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function<L: Lang> {
    pub sig: Signature,
    pub params: Vec<Ident>,
    pub vars: Vec<Ident>,
    pub stacksize: i32,
    pub body: Stmt<L>,
}

/// Continuations.
#[derive(Debug)]
pub enum Cont<'a, L: Lang> {
    Stop,
    Seq(&'a Stmt<L>, Rc<Cont<'a, L>>),
    EndBlock(Rc<Cont<'a, L>>),
    ReturnTo(Option<Ident>, &'a Function<L>, Value, Env, Rc<Cont<'a, L>>),
}

/// Strips local continuations up to the enclosing call.
pub fn call_cont<'a, L: Lang>(k: &Rc<Cont<'a, L>>) -> Rc<Cont<'a, L>> {
    let mut k = k.clone();
    loop {
        let next = match &*k {
            Cont::Seq(_, k2) | Cont::EndBlock(k2) => k2.clone(),
            _ => return k,
        };
        k = next;
    }
}

/// The statement under focus: a program statement or one synthesized by a
/// transition.
#[derive(Clone, Copy, Debug)]
pub enum Focus<'a, L: Lang> {
    At(&'a Stmt<L>),
    Skip,
    Exit(u32),
}

#[derive(Debug)]
pub enum State<'a, L: Lang> {
    Regular { f: &'a Function<L>, s: Focus<'a, L>, k: Rc<Cont<'a, L>>, sp: Value, env: Env, mem: Mem },
    Call { fd: usize, args: Vec<Value>, k: Rc<Cont<'a, L>>, mem: Mem },
    Return { v: Value, k: Rc<Cont<'a, L>>, mem: Mem },
}

/// Finds the leftmost statement labeled `lbl` in `s`, together with the
/// continuation in effect there.
pub fn find_label<'a, L: Lang>(
    lbl: &str,
    s: &'a Stmt<L>,
    k: &Rc<Cont<'a, L>>,
) -> Option<(&'a Stmt<L>, Rc<Cont<'a, L>>)> {
    match s {
        Stmt::Seq(s1, s2) => find_label(lbl, s1, &Rc::new(Cont::Seq(s2, k.clone()))).or_else(|| find_label(lbl, s2, k)),
        Stmt::If(_, s1, s2) => find_label(lbl, s1, k).or_else(|| find_label(lbl, s2, k)),
        Stmt::Loop(body) => find_label(lbl, body, &Rc::new(Cont::Seq(s, k.clone()))),
        Stmt::Block(body) => find_label(lbl, body, &Rc::new(Cont::EndBlock(k.clone()))),
        Stmt::Label(l, body) => {
            if l == lbl {
                Some((body, k.clone()))
            } else {
                find_label(lbl, body, k)
            }
        }
        _ => None,
    }
}

/// Executable semantics of a structured program.
pub struct Interp<'a, L: Lang> {
    pub prog: &'a Program<Function<L>>,
    pub genv: Genv,
    init_mem: Mem,
}

impl<'a, L: Lang> Interp<'a, L> {
    pub fn new(prog: &'a Program<Function<L>>) -> Result<Self, alloc::string::String> {
        let (genv, init_mem) = crate::base::globalenv(prog)?;
        Ok(Interp { prog, genv, init_mem })
    }

    fn sig_of(&self, fd: usize) -> &'a Signature {
        match &self.prog.functions[fd].1 {
            FunDef::Internal(f) => &f.sig,
            FunDef::External(ef) => &ef.sig,
        }
    }

    fn eval_list(ctx: &Ctx<'_>, es: &[L::Expr]) -> Option<Vec<Value>> {
        es.iter().map(|e| L::eval_expr(ctx, e)).collect()
    }

    fn regular(
        &self,
        f: &'a Function<L>,
        s: Focus<'a, L>,
        k: Rc<Cont<'a, L>>,
        sp: Value,
        mut env: Env,
        mut mem: Mem,
    ) -> Option<State<'a, L>> {
        let st = |s, k, env, mem| State::Regular { f, s, k, sp, env, mem };
        let stmt = match s {
            Focus::At(stmt) => stmt,
            Focus::Skip => {
                return match &*k {
                    Cont::Seq(s2, k2) => Some(st(Focus::At(*s2), k2.clone(), env, mem)),
                    Cont::EndBlock(k2) => Some(st(Focus::Skip, k2.clone(), env, mem)),
                    Cont::Stop | Cont::ReturnTo(..) if f.sig.res.is_none() => {
                        free_sp(&mut mem, sp);
                        Some(State::Return { v: Value::Undef, k, mem })
                    }
                    _ => None,
                };
            }
            Focus::Exit(n) => {
                return match (&*k, n) {
                    (Cont::Seq(_, k2), _) => Some(st(Focus::Exit(n), k2.clone(), env, mem)),
                    (Cont::EndBlock(k2), 0) => Some(st(Focus::Skip, k2.clone(), env, mem)),
                    (Cont::EndBlock(k2), _) => Some(st(Focus::Exit(n - 1), k2.clone(), env, mem)),
                    _ => None,
                };
            }
        };
        let ctx = Ctx { genv: &self.genv, sp, env: &env, mem: &mem };
        match stmt {
            Stmt::Skip => Some(st(Focus::Skip, k, env, mem)),
            Stmt::Assign(x, e) => {
                let v = L::eval_expr(&ctx, e)?;
                env.insert(x.clone(), v);
                Some(st(Focus::Skip, k, env, mem))
            }
            Stmt::Store(chunk, a, e) => {
                let addr = L::eval_addr(&ctx, a)?;
                let v = L::eval_expr(&ctx, e)?;
                mem.storev(*chunk, addr, v)?;
                Some(st(Focus::Skip, k, env, mem))
            }
            Stmt::Call(dest, sig, callee, args) => {
                let vf = L::eval_callee(&ctx, callee)?;
                let fd = self.genv.find_funct(vf)?;
                if self.sig_of(fd) != sig {
                    return None;
                }
                let args = Self::eval_list(&ctx, args)?;
                let k = Rc::new(Cont::ReturnTo(dest.clone(), f, sp, env, k));
                Some(State::Call { fd, args, k, mem })
            }
            Stmt::Tailcall(sig, callee, args) => {
                let vf = L::eval_callee(&ctx, callee)?;
                let fd = self.genv.find_funct(vf)?;
                if self.sig_of(fd) != sig {
                    return None;
                }
                let args = Self::eval_list(&ctx, args)?;
                free_sp(&mut mem, sp);
                Some(State::Call { fd, args, k: call_cont(&k), mem })
            }
            Stmt::Return(None) => {
                if f.sig.res.is_some() {
                    return None;
                }
                free_sp(&mut mem, sp);
                Some(State::Return { v: Value::Undef, k: call_cont(&k), mem })
            }
            Stmt::Return(Some(e)) => {
                f.sig.res?;
                let v = L::eval_expr(&ctx, e)?;
                free_sp(&mut mem, sp);
                Some(State::Return { v, k: call_cont(&k), mem })
            }
            Stmt::Seq(s1, s2) => Some(st(Focus::At(s1), Rc::new(Cont::Seq(s2, k)), env, mem)),
            Stmt::If(c, s1, s2) => {
                let b = L::eval_cond(&ctx, c)?;
                Some(st(Focus::At(if b { s1 } else { s2 }), k, env, mem))
            }
            Stmt::Loop(body) => Some(st(Focus::At(body), Rc::new(Cont::Seq(stmt, k)), env, mem)),
            Stmt::Block(body) => Some(st(Focus::At(body), Rc::new(Cont::EndBlock(k)), env, mem)),
            Stmt::Exit(n) => Some(st(Focus::Exit(*n), k, env, mem)),
            Stmt::Switch(e, tbl, dfl) => {
                let Value::Int(n) = L::eval_expr(&ctx, e)? else {
                    return None;
                };
                let target = tbl.iter().find(|(v, _)| *v == n).map_or(*dfl, |(_, t)| *t);
                Some(st(Focus::Exit(target), k, env, mem))
            }
            Stmt::Label(_, body) => Some(st(Focus::At(body), k, env, mem)),
            Stmt::Goto(lbl) => {
                let (s2, k2) = find_label(lbl, &f.body, &call_cont(&k))?;
                Some(st(Focus::At(s2), k2, env, mem))
            }
        }
    }
}

fn free_sp(mem: &mut Mem, sp: Value) {
    if let Value::Ptr(b, _) = sp {
        mem.free(b);
    }
}

impl<'a, L: Lang> Semantics for Interp<'a, L> {
    type State = State<'a, L>;

    fn initial_state(&self) -> Option<State<'a, L>> {
        let b = self.genv.find_symbol(&self.prog.main)?;
        let fd = self.genv.find_funct_ptr(b)?;
        if !self.sig_of(fd).args.is_empty() {
            return None;
        }
        Some(State::Call { fd, args: Vec::new(), k: Rc::new(Cont::Stop), mem: self.init_mem.clone() })
    }

    fn step(&self, st: State<'a, L>, world: &mut World) -> Option<(Option<Event>, State<'a, L>)> {
        match st {
            State::Regular { f, s, k, sp, env, mem } => self.regular(f, s, k, sp, env, mem).map(|s| (None, s)),
            State::Call { fd, args, k, mut mem } => match &self.prog.functions[fd].1 {
                FunDef::Internal(f) => {
                    if args.len() != f.params.len() {
                        return None;
                    }
                    let b = mem.alloc(0, f.stacksize);
                    let mut env: Env = f.vars.iter().map(|v| (v.clone(), Value::Undef)).collect();
                    for (p, a) in f.params.iter().zip(args) {
                        env.insert(p.clone(), a);
                    }
                    Some((None, State::Regular { f, s: Focus::At(&f.body), k, sp: Value::Ptr(b, 0), env, mem }))
                }
                FunDef::External(ef) => {
                    let (ev, v) = world.call(ef, &args)?;
                    Some((Some(ev), State::Return { v, k, mem }))
                }
            },
            State::Return { v, k, mem } => match &*k {
                Cont::ReturnTo(dest, f, sp, env, k2) => {
                    let mut env = env.clone();
                    if let Some(x) = dest {
                        env.insert(x.clone(), v);
                    }
                    Some((None, State::Regular { f, s: Focus::Skip, k: k2.clone(), sp: *sp, env, mem }))
                }
                _ => None,
            },
        }
    }

    fn final_state(&self, st: &State<'a, L>) -> Option<i32> {
        match st {
            State::Return { v: Value::Int(n), k, .. } if matches!(**k, Cont::Stop) => Some(*n),
            _ => None,
        }
    }
}
