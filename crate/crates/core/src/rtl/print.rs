//! Textual dump: one instruction per line, nodes in descending order.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{FnRef, Instr, Reg, RtlFunction, RtlProgram};
use crate::base::FunDef;

fn regs(rs: &[Reg]) -> String {
    let v: Vec<String> = rs.iter().map(|r| format!("x{r}")).collect();
    v.join(", ")
}

fn fnref(f: &FnRef<Reg>) -> String {
    match f {
        FnRef::Reg(r) => format!("x{r}"),
        FnRef::Symbol(id) => format!("\"{id}\""),
    }
}

pub fn print_instr(i: &Instr) -> String {
    match i {
        Instr::Nop(s) => format!("nop, succ {s}"),
        Instr::Op(op, args, d, s) if args.is_empty() => format!("{op} -> x{d}, succ {s}"),
        Instr::Op(op, args, d, s) => format!("{op}({}) -> x{d}, succ {s}", regs(args)),
        Instr::Load(c, m, args, d, s) => format!("load {c}[{m}]({}) -> x{d}, succ {s}", regs(args)),
        Instr::Store(c, m, args, src, s) => {
            format!("store {c}[{m}]({}) <- x{src}, succ {s}", regs(args))
        }
        Instr::Call(sig, f, args, d, s) => {
            let d = d.map(|d| format!(" -> x{d}")).unwrap_or_default();
            format!("call {}({}) : {sig}{d}, succ {s}", fnref(f), regs(args))
        }
        Instr::Tailcall(sig, f, args) => format!("tailcall {}({}) : {sig}", fnref(f), regs(args)),
        Instr::Cond(c, args, t, e) => format!("cond {c}({}), succ {t} else {e}", regs(args)),
        Instr::Return(None) => String::from("return"),
        Instr::Return(Some(r)) => format!("return x{r}"),
    }
}

pub fn print_function(name: &str, f: &RtlFunction) -> String {
    let mut out = format!("\"{name}\"({}) : {}\n", regs(&f.params), f.sig);
    if f.stacksize != 0 {
        out.push_str(&format!("  stacksize {}\n", f.stacksize));
    }
    for (n, i) in f.code.iter().rev() {
        out.push_str(&format!("  {n}: {}\n", print_instr(i)));
    }
    out.push_str(&format!("  entry: {}\n", f.entrypoint));
    out
}

pub fn print_program(p: &RtlProgram) -> String {
    let mut out = String::new();
    for (name, fd) in &p.functions {
        if let FunDef::Internal(f) = fd {
            out.push_str(&print_function(name, f));
            out.push('\n');
        }
    }
    out
}
