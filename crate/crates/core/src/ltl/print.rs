//! Textual dump in the layout of the RTL dump, with locations for registers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Instr, LtlFunction, LtlProgram};
use crate::base::FunDef;
use crate::locs::Loc;
use crate::rtl::FnRef;

fn locs(ls: &[Loc]) -> String {
    let v: Vec<String> = ls.iter().map(|l| format!("{l}")).collect();
    v.join(", ")
}

fn fnref(f: &FnRef<Loc>) -> String {
    match f {
        FnRef::Reg(l) => format!("{l}"),
        FnRef::Symbol(id) => format!("\"{id}\""),
    }
}

pub fn print_instr(i: &Instr) -> String {
    match i {
        Instr::Nop(s) => format!("nop, succ {s}"),
        Instr::Op(op, args, d, s) if args.is_empty() => format!("{op} -> {d}, succ {s}"),
        Instr::Op(op, args, d, s) => format!("{op}({}) -> {d}, succ {s}", locs(args)),
        Instr::Load(c, m, args, d, s) => format!("load {c}[{m}]({}) -> {d}, succ {s}", locs(args)),
        Instr::Store(c, m, args, src, s) => {
            format!("store {c}[{m}]({}) <- {src}, succ {s}", locs(args))
        }
        Instr::Call(sig, f, args, d, s) => {
            let d = d.map(|d| format!(" -> {d}")).unwrap_or_default();
            format!("call {}({}) : {sig}{d}, succ {s}", fnref(f), locs(args))
        }
        Instr::Tailcall(sig, f, args) => format!("tailcall {}({}) : {sig}", fnref(f), locs(args)),
        Instr::Cond(c, args, t, e) => format!("cond {c}({}), succ {t} else {e}", locs(args)),
        Instr::Return(None) => String::from("return"),
        Instr::Return(Some(r)) => format!("return {r}"),
    }
}

pub fn print_function(name: &str, f: &LtlFunction) -> String {
    let mut out = format!("\"{name}\"({}) : {}\n", locs(&f.params), f.sig);
    if f.stacksize != 0 {
        out.push_str(&format!("  stacksize {}\n", f.stacksize));
    }
    for (n, i) in f.code.iter().rev() {
        out.push_str(&format!("  {n}: {}\n", print_instr(i)));
    }
    out.push_str(&format!("  entry: {}\n", f.entrypoint));
    out
}

pub fn print_program(p: &LtlProgram) -> String {
    let mut out = String::new();
    for (name, fd) in &p.functions {
        if let FunDef::Internal(f) = fd {
            out.push_str(&print_function(name, f));
            out.push('\n');
        }
    }
    out
}
