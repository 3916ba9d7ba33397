//! Prefix-notation dump of CminorSel programs.

use alloc::format;
use alloc::string::String;
use core::fmt;

use super::ast::{Callee, CondExpr, SelExpr, SelFunction, SelProgram, SelStmt};
use crate::base::FunDef;
use crate::structured::Stmt;

fn list(f: &mut fmt::Formatter<'_>, es: &[SelExpr]) -> fmt::Result {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

impl fmt::Display for SelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelExpr::Var(x) => f.write_str(x),
            SelExpr::Op(op, args) if args.is_empty() => write!(f, "{op}"),
            SelExpr::Op(op, args) => {
                write!(f, "{op}(")?;
                list(f, args)?;
                f.write_str(")")
            }
            SelExpr::Load(chunk, mode, args) => {
                write!(f, "{chunk}[{mode}](")?;
                list(f, args)?;
                f.write_str(")")
            }
            SelExpr::Condition(c, a, b) => write!(f, "cond({c}, {a}, {b})"),
        }
    }
}

impl fmt::Display for CondExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondExpr::True => f.write_str("true"),
            CondExpr::False => f.write_str("false"),
            CondExpr::Cond(c, args) => {
                write!(f, "{c}(")?;
                list(f, args)?;
                f.write_str(")")
            }
            CondExpr::Conditional(a, b, c) => write!(f, "cond({a}, {b}, {c})"),
        }
    }
}

impl fmt::Display for Callee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Callee::Symbol(id) => write!(f, "\"{id}\""),
            Callee::Expr(e) => write!(f, "{e}"),
        }
    }
}

pub fn print_program(p: &SelProgram) -> String {
    let mut out = String::new();
    for (name, fd) in &p.functions {
        match fd {
            FunDef::External(ef) => out.push_str(&format!("extern \"{name}\" : {};\n", ef.sig)),
            FunDef::Internal(f) => out.push_str(&print_function(name, f)),
        }
    }
    out
}

pub fn print_function(name: &str, f: &SelFunction) -> String {
    let mut out = format!("\"{name}\"({}) : {}\n", f.params.join(", "), f.sig);
    if !f.vars.is_empty() {
        out.push_str(&format!("  vars {}\n", f.vars.join(", ")));
    }
    if f.stacksize != 0 {
        out.push_str(&format!("  stacksize {}\n", f.stacksize));
    }
    stmt(&mut out, &f.body, 1);
    out
}

fn line(out: &mut String, depth: usize, s: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(s);
    out.push('\n');
}

fn stmt(out: &mut String, s: &SelStmt, d: usize) {
    match s {
        Stmt::Skip => line(out, d, "skip"),
        Stmt::Assign(x, e) => line(out, d, &format!("{x} = {e}")),
        Stmt::Store(c, (mode, args), e) => {
            let args: alloc::vec::Vec<String> = args.iter().map(|a| format!("{a}")).collect();
            line(out, d, &format!("{c}[{mode}]({}) = {e}", args.join(", ")))
        }
        Stmt::Call(dest, sig, fun, args) => {
            let args: alloc::vec::Vec<String> = args.iter().map(|a| format!("{a}")).collect();
            let lhs = dest.as_ref().map(|x| format!("{x} = ")).unwrap_or_default();
            line(out, d, &format!("{lhs}call {fun}({}) : {sig}", args.join(", ")))
        }
        Stmt::Tailcall(sig, fun, args) => {
            let args: alloc::vec::Vec<String> = args.iter().map(|a| format!("{a}")).collect();
            line(out, d, &format!("tailcall {fun}({}) : {sig}", args.join(", ")))
        }
        Stmt::Return(None) => line(out, d, "return"),
        Stmt::Return(Some(e)) => line(out, d, &format!("return {e}")),
        Stmt::Seq(a, b) => {
            stmt(out, a, d);
            stmt(out, b, d);
        }
        Stmt::If(c, a, b) => {
            line(out, d, &format!("if {c}"));
            stmt(out, a, d + 1);
            line(out, d, "else");
            stmt(out, b, d + 1);
        }
        Stmt::Loop(b) => {
            line(out, d, "loop");
            stmt(out, b, d + 1);
        }
        Stmt::Block(b) => {
            line(out, d, "block");
            stmt(out, b, d + 1);
        }
        Stmt::Exit(n) => line(out, d, &format!("exit {n}")),
        Stmt::Switch(e, tbl, dfl) => {
            let cases: alloc::vec::Vec<String> = tbl.iter().map(|(v, t)| format!("{v}: exit {t}")).collect();
            line(out, d, &format!("switch {e} [{}] default: exit {dfl}", cases.join("; ")))
        }
        Stmt::Label(l, b) => {
            line(out, d, &format!("{l}:"));
            stmt(out, b, d);
        }
        Stmt::Goto(l) => line(out, d, &format!("goto {l}")),
    }
}
