//! Textual dump: labels flush left, one instruction per line.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Instr, LtlinFunction, LtlinProgram};
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
        Instr::Label(l) => format!("L{l}:"),
        Instr::Goto(l) => format!("  goto L{l}"),
        Instr::Op(op, args, d) if args.is_empty() => format!("  {op} -> {d}"),
        Instr::Op(op, args, d) => format!("  {op}({}) -> {d}", locs(args)),
        Instr::Load(c, m, args, d) => format!("  load {c}[{m}]({}) -> {d}", locs(args)),
        Instr::Store(c, m, args, src) => format!("  store {c}[{m}]({}) <- {src}", locs(args)),
        Instr::Call(sig, f, args, d) => {
            let d = d.map(|d| format!(" -> {d}")).unwrap_or_default();
            format!("  call {}({}) : {sig}{d}", fnref(f), locs(args))
        }
        Instr::Tailcall(sig, f, args) => format!("  tailcall {}({}) : {sig}", fnref(f), locs(args)),
        Instr::Cond(c, args, l) => format!("  if {c}({}) goto L{l}", locs(args)),
        Instr::Return(None) => String::from("  return"),
        Instr::Return(Some(r)) => format!("  return {r}"),
    }
}

pub fn print_function(name: &str, f: &LtlinFunction) -> String {
    let mut out = format!("\"{name}\"({}) : {}\n", locs(&f.params), f.sig);
    if f.stacksize != 0 {
        out.push_str(&format!("  stacksize {}\n", f.stacksize));
    }
    for i in &f.code {
        out.push_str(&print_instr(i));
        out.push('\n');
    }
    out
}

pub fn print_program(p: &LtlinProgram) -> String {
    let mut out = String::new();
    for (name, fd) in &p.functions {
        if let FunDef::Internal(f) = fd {
            out.push_str(&print_function(name, f));
            out.push('\n');
        }
    }
    out
}
