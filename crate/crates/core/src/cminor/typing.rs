//! Type inference for Cminor variables by unification.
//!
//! Variables carry no declared types; every variable receives `int` or
//! `float` from its uses. A variable with no constraint defaults to `int`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{BinaryOp, CminorProgram, Const, Expr, Function, Stmt, UnaryOp};
use crate::base::{FunDef, Ident, Signature, Typ};

/// Inferred variable types of every internal function, keyed by name.
pub type ProgramTypes = BTreeMap<Ident, BTreeMap<Ident, Typ>>;

#[derive(Clone, Copy, Debug)]
enum Term {
    Known(Typ),
    Var(usize),
}

struct Unifier {
    parent: Vec<usize>,
    ty: Vec<Option<Typ>>,
}

impl Unifier {
    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.ty.push(None);
        self.parent.len() - 1
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn unify(&mut self, a: Term, b: Term) -> Result<(), String> {
        match (a, b) {
            (Term::Known(x), Term::Known(y)) => {
                if x == y {
                    Ok(())
                } else {
                    Err(format!("type mismatch: {x} vs {y}"))
                }
            }
            (Term::Var(v), Term::Known(t)) | (Term::Known(t), Term::Var(v)) => {
                let r = self.find(v);
                match self.ty[r] {
                    Some(u) if u != t => Err(format!("type mismatch: {u} vs {t}")),
                    _ => {
                        self.ty[r] = Some(t);
                        Ok(())
                    }
                }
            }
            (Term::Var(v), Term::Var(w)) => {
                let (r, s) = (self.find(v), self.find(w));
                if r == s {
                    return Ok(());
                }
                match (self.ty[r], self.ty[s]) {
                    (Some(x), Some(y)) if x != y => return Err(format!("type mismatch: {x} vs {y}")),
                    (None, t) => self.ty[r] = t,
                    _ => {}
                }
                self.parent[s] = r;
                Ok(())
            }
        }
    }
}

/// Argument and result type.
pub fn unop_type(op: UnaryOp) -> (Typ, Typ) {
    use Typ::{Float as F, Int as I};
    match op {
        UnaryOp::NegInt | UnaryOp::NotInt | UnaryOp::NotBool => (I, I),
        UnaryOp::Cast8U | UnaryOp::Cast8S | UnaryOp::Cast16U | UnaryOp::Cast16S => (I, I),
        UnaryOp::NegF | UnaryOp::AbsF | UnaryOp::SingleOfFloat => (F, F),
        UnaryOp::IntOfFloat | UnaryOp::IntUOfFloat => (F, I),
        UnaryOp::FloatOfInt | UnaryOp::FloatOfIntU => (I, F),
    }
}

/// Argument and result type.
pub fn binop_type(op: BinaryOp) -> (Typ, Typ) {
    match op {
        BinaryOp::AddF | BinaryOp::SubF | BinaryOp::MulF | BinaryOp::DivF => (Typ::Float, Typ::Float),
        BinaryOp::CmpF(_) => (Typ::Float, Typ::Int),
        _ => (Typ::Int, Typ::Int),
    }
}

struct Checker<'a> {
    prog: &'a CminorProgram,
    fun: &'a Function,
    u: Unifier,
    vars: BTreeMap<Ident, usize>,
    labels: BTreeSet<Ident>,
}

impl Checker<'_> {
    fn var(&self, x: &str) -> Result<Term, String> {
        self.vars.get(x).map(|&v| Term::Var(v)).ok_or_else(|| format!("undeclared variable `{x}`"))
    }

    fn expr(&mut self, e: &Expr) -> Result<Term, String> {
        Ok(match e {
            Expr::Var(x) => self.var(x)?,
            Expr::Const(Const::Float(_)) => Term::Known(Typ::Float),
            Expr::Const(Const::AddrSymbol(id)) => {
                if !self.symbol_exists(id) {
                    return Err(format!("unknown symbol \"{id}\""));
                }
                Term::Known(Typ::Int)
            }
            Expr::Const(_) => Term::Known(Typ::Int),
            Expr::Unop(op, a) => {
                let (arg, res) = unop_type(*op);
                let t = self.expr(a)?;
                self.u.unify(t, Term::Known(arg))?;
                Term::Known(res)
            }
            Expr::Binop(op, a, b) => {
                let (arg, res) = binop_type(*op);
                let ta = self.expr(a)?;
                self.u.unify(ta, Term::Known(arg))?;
                let tb = self.expr(b)?;
                self.u.unify(tb, Term::Known(arg))?;
                Term::Known(res)
            }
            Expr::Load(chunk, a) => {
                let t = self.expr(a)?;
                self.u.unify(t, Term::Known(Typ::Int))?;
                Term::Known(chunk.typ())
            }
            Expr::Cond(c, a, b) => {
                let tc = self.expr(c)?;
                self.u.unify(tc, Term::Known(Typ::Int))?;
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                self.u.unify(ta, tb)?;
                ta
            }
        })
    }

    fn symbol_exists(&self, id: &str) -> bool {
        self.prog.globals.iter().any(|g| g.name == id) || self.prog.function(id).is_some()
    }

    fn call(&mut self, sig: &Signature, f: &Expr, args: &[Expr]) -> Result<(), String> {
        if let Expr::Const(Const::AddrSymbol(id)) = f {
            let callee_sig = match self.prog.function(id) {
                Some(FunDef::Internal(g)) => &g.sig,
                Some(FunDef::External(ef)) => &ef.sig,
                None => return Err(format!("\"{id}\" is not a function")),
            };
            if callee_sig != sig {
                return Err(format!("call to \"{id}\" with signature `{sig}` but it has `{callee_sig}`"));
            }
        }
        let tf = self.expr(f)?;
        self.u.unify(tf, Term::Known(Typ::Int))?;
        if args.len() != sig.args.len() {
            return Err(format!("{} arguments for signature `{sig}`", args.len()));
        }
        for (a, t) in args.iter().zip(&sig.args) {
            let ta = self.expr(a)?;
            self.u.unify(ta, Term::Known(*t))?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, depth: u32) -> Result<(), String> {
        match s {
            Stmt::Skip | Stmt::Goto(_) => {}
            Stmt::Assign(x, e) => {
                let tx = self.var(x)?;
                let te = self.expr(e)?;
                self.u.unify(tx, te)?;
            }
            Stmt::Store(chunk, a, e) => {
                let ta = self.expr(a)?;
                self.u.unify(ta, Term::Known(Typ::Int))?;
                let te = self.expr(e)?;
                self.u.unify(te, Term::Known(chunk.typ()))?;
            }
            Stmt::Call(dest, sig, f, args) => {
                self.call(sig, f, args)?;
                if let Some(x) = dest {
                    let res = sig.res.ok_or_else(|| format!("result of void call assigned to `{x}`"))?;
                    let tx = self.var(x)?;
                    self.u.unify(tx, Term::Known(res))?;
                }
            }
            Stmt::Tailcall(sig, f, args) => {
                self.call(sig, f, args)?;
                if sig.res != self.fun.sig.res {
                    return Err("tail call result type differs from the caller's".into());
                }
            }
            Stmt::Return(e) => match (e, self.fun.sig.res) {
                (None, None) => {}
                (Some(e), Some(t)) => {
                    let te = self.expr(e)?;
                    self.u.unify(te, Term::Known(t))?;
                }
                (None, Some(_)) => return Err("missing return value".into()),
                (Some(_), None) => return Err("return value in void function".into()),
            },
            Stmt::Seq(a, b) => {
                self.stmt(a, depth)?;
                self.stmt(b, depth)?;
            }
            Stmt::If(c, a, b) => {
                let tc = self.expr(c)?;
                self.u.unify(tc, Term::Known(Typ::Int))?;
                self.stmt(a, depth)?;
                self.stmt(b, depth)?;
            }
            Stmt::Loop(b) => self.stmt(b, depth)?,
            Stmt::Block(b) => self.stmt(b, depth + 1)?,
            Stmt::Exit(n) => {
                if *n >= depth {
                    return Err(format!("exit({n}) outside {} enclosing blocks", depth));
                }
            }
            Stmt::Switch(e, tbl, dfl) => {
                let te = self.expr(e)?;
                self.u.unify(te, Term::Known(Typ::Int))?;
                if let Some(n) = tbl.iter().map(|(_, t)| *t).chain([*dfl]).find(|&t| t >= depth) {
                    return Err(format!("switch exit({n}) outside {} enclosing blocks", depth));
                }
            }
            Stmt::Label(l, b) => {
                if !self.labels.insert(l.clone()) {
                    return Err(format!("duplicate label `{l}`"));
                }
                self.stmt(b, depth)?;
            }
        }
        Ok(())
    }
}

fn check_gotos(s: &Stmt, labels: &BTreeSet<Ident>) -> Result<(), String> {
    match s {
        Stmt::Goto(l) if !labels.contains(l) => Err(format!("goto undefined label `{l}`")),
        Stmt::Seq(a, b) | Stmt::If(_, a, b) => {
            check_gotos(a, labels)?;
            check_gotos(b, labels)
        }
        Stmt::Loop(b) | Stmt::Block(b) | Stmt::Label(_, b) => check_gotos(b, labels),
        _ => Ok(()),
    }
}

/// Infers variable types for one function.
pub fn type_function(prog: &CminorProgram, fun: &Function) -> Result<BTreeMap<Ident, Typ>, String> {
    let mut c = Checker {
        prog,
        fun,
        u: Unifier { parent: Vec::new(), ty: Vec::new() },
        vars: BTreeMap::new(),
        labels: BTreeSet::new(),
    };
    for x in fun.params.iter().chain(&fun.vars) {
        let v = c.u.fresh();
        if c.vars.insert(x.clone(), v).is_some() {
            return Err(format!("`{x}` declared twice"));
        }
    }
    if fun.params.len() != fun.sig.args.len() {
        return Err("parameter count differs from signature".into());
    }
    if fun.stacksize < 0 {
        return Err("negative stack size".into());
    }
    for (p, t) in fun.params.iter().zip(&fun.sig.args) {
        let v = c.vars[p];
        c.u.unify(Term::Var(v), Term::Known(*t))?;
    }
    c.stmt(&fun.body, 0)?;
    check_gotos(&fun.body, &c.labels)?;
    let mut out = BTreeMap::new();
    for (x, v) in c.vars.clone() {
        let r = c.u.find(v);
        out.insert(x, c.u.ty[r].unwrap_or(Typ::Int));
    }
    Ok(out)
}

/// Type-checks every internal function and the entry point.
pub fn typecheck_program(prog: &CminorProgram) -> Result<ProgramTypes, String> {
    let mut seen = BTreeSet::new();
    for name in prog.globals.iter().map(|g| &g.name).chain(prog.functions.iter().map(|(n, _)| n)) {
        if !seen.insert(name) {
            return Err(format!("duplicate identifier \"{name}\""));
        }
    }
    match prog.function(&prog.main) {
        Some(FunDef::Internal(f)) if f.sig == (Signature { args: Vec::new(), res: Some(Typ::Int) }) => {}
        Some(_) => return Err(format!("\"{}\" must be an internal function of type `-> int`", prog.main)),
        None => return Err(format!("no \"{}\" function", prog.main)),
    }
    let mut out = BTreeMap::new();
    for (name, fd) in &prog.functions {
        if let FunDef::Internal(f) = fd {
            let tys = type_function(prog, f).map_err(|e| format!("in \"{name}\": {e}"))?;
            out.insert(name.clone(), tys);
        }
    }
    Ok(out)
}
