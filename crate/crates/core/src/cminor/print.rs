//! Pretty-printer producing concrete syntax accepted by the parser.
//! Printing then parsing yields the original tree.

use alloc::format;
use alloc::string::String;

use super::ast::{Const, Expr, Function, Stmt};
use crate::base::{FunDef, InitData, Program};

pub fn print_program(p: &Program<Function>) -> String {
    let mut out = String::new();
    for gv in &p.globals {
        out.push_str(&format!("var \"{}\" {{", gv.name));
        for (i, d) in gv.init.iter().enumerate() {
            out.push_str(if i == 0 { " " } else { ", " });
            out.push_str(&match d {
                InitData::Int8(n) => format!("int8 {n}"),
                InitData::Int16(n) => format!("int16 {n}"),
                InitData::Int32(n) => format!("int32 {n}"),
                InitData::Float32(x) => format!("float32 {x:?}"),
                InitData::Float64(x) => format!("float64 {x:?}"),
                InitData::Reserve(n) => format!("reserve {n}"),
            });
        }
        out.push_str(" }\n");
    }
    for (name, fd) in &p.functions {
        match fd {
            FunDef::External(ef) => out.push_str(&format!("extern \"{name}\" : {};\n", ef.sig)),
            FunDef::Internal(f) => out.push_str(&print_function(name, f)),
        }
    }
    out
}

pub fn print_function(name: &str, f: &Function) -> String {
    let mut out = format!("\n\"{name}\"({}) : {}\n{{\n", f.params.join(", "), f.sig);
    if !f.vars.is_empty() {
        out.push_str(&format!("  vars {};\n", f.vars.join(", ")));
    }
    if f.stacksize != 0 {
        out.push_str(&format!("  stacksize {};\n", f.stacksize));
    }
    print_seq(&mut out, &f.body, 1);
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Prints `s` as a statement list.
fn print_seq(out: &mut String, s: &Stmt, depth: usize) {
    match s {
        Stmt::Seq(a, b) => {
            if matches!(**a, Stmt::Seq(..)) {
                indent(out, depth);
                out.push_str("{\n");
                print_seq(out, a, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            } else {
                print_stmt(out, a, depth);
            }
            print_seq(out, b, depth);
        }
        _ => print_stmt(out, s, depth),
    }
}

fn print_braced(out: &mut String, s: &Stmt, depth: usize) {
    out.push_str("{\n");
    print_seq(out, s, depth + 1);
    indent(out, depth);
    out.push('}');
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    print_stmt_inline(out, s, depth);
}

fn print_stmt_inline(out: &mut String, s: &Stmt, depth: usize) {
    match s {
        Stmt::Skip => out.push_str("skip;\n"),
        Stmt::Assign(x, e) => out.push_str(&format!("{x} = {};\n", expr(e))),
        Stmt::Store(c, a, e) => out.push_str(&format!("{c}[{}] = {};\n", expr(a), expr(e))),
        Stmt::Call(dest, sig, f, args) => {
            if let Some(x) = dest {
                out.push_str(&format!("{x} = "));
            }
            out.push_str(&format!("{}({}) : {sig};\n", callee(f), exprs(args)));
        }
        Stmt::Tailcall(sig, f, args) => out.push_str(&format!("tailcall {}({}) : {sig};\n", callee(f), exprs(args))),
        Stmt::Return(None) => out.push_str("return;\n"),
        Stmt::Return(Some(e)) => out.push_str(&format!("return {};\n", expr(e))),
        Stmt::Seq(..) => print_braced_line(out, s, depth),
        Stmt::If(c, a, b) => {
            out.push_str(&format!("if ({}) ", expr(c)));
            print_braced(out, a, depth);
            out.push_str(" else ");
            print_braced(out, b, depth);
            out.push('\n');
        }
        Stmt::Loop(b) => {
            out.push_str("loop ");
            print_braced(out, b, depth);
            out.push('\n');
        }
        Stmt::Block(b) => {
            out.push_str("block ");
            print_braced(out, b, depth);
            out.push('\n');
        }
        Stmt::Exit(n) => out.push_str(&format!("exit({n});\n")),
        Stmt::Switch(e, tbl, dfl) => {
            out.push_str(&format!("switch ({}) {{", expr(e)));
            for (v, t) in tbl {
                out.push_str(&format!(" case {v}: exit({t});"));
            }
            out.push_str(&format!(" default: exit({dfl}); }}\n"));
        }
        Stmt::Label(l, body) => {
            out.push_str(&format!("{l}: "));
            print_stmt_inline(out, body, depth);
        }
        Stmt::Goto(l) => out.push_str(&format!("goto {l};\n")),
    }
}

fn print_braced_line(out: &mut String, s: &Stmt, depth: usize) {
    print_braced(out, s, depth);
    out.push('\n');
}

fn exprs(es: &[Expr]) -> String {
    let mut s = String::new();
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&expr(e));
    }
    s
}

fn callee(e: &Expr) -> String {
    match e {
        Expr::Var(_) | Expr::Const(Const::AddrSymbol(_)) => expr(e),
        _ => format!("({})", expr(e)),
    }
}

/// Renders an expression in concrete syntax.
pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Var(x) => x.clone(),
        Expr::Const(Const::Int(n)) => format!("{n}"),
        Expr::Const(Const::Float(x)) => format!("{x:?}"),
        Expr::Const(Const::AddrSymbol(id)) => format!("\"{id}\""),
        Expr::Const(Const::AddrStack(d)) => format!("addrstack({d})"),
        Expr::Unop(op, a) => format!("{}({})", op.name(), expr(a)),
        Expr::Load(c, a) => format!("{c}[{}]", expr(a)),
        Expr::Cond(c, a, b) => {
            format!("{} ? {} : {}", operand(c, 0, false), operand(a, 0, false), operand(b, 0, false))
        }
        Expr::Binop(op, a, b) => {
            let p = op.precedence();
            format!("{} {} {}", operand(a, p, false), op.symbol(), operand(b, p, true))
        }
    }
}

fn operand(e: &Expr, parent: u8, right: bool) -> String {
    let needs = match e {
        Expr::Cond(..) => true,
        Expr::Binop(op, ..) => {
            let p = op.precedence();
            p < parent || (right && p == parent)
        }
        Expr::Const(Const::Int(n)) => *n < 0 && parent > 0,
        Expr::Const(Const::Float(x)) => x.get().is_sign_negative() && parent > 0,
        _ => false,
    };
    if needs {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}
