//! Textual dump: labels flush left, one instruction per line.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Instr, LinearFunction, LinearProgram};
use crate::base::FunDef;
use crate::locs::MReg;
use crate::rtl::FnRef;

fn regs(rs: &[MReg]) -> String {
    let v: Vec<String> = rs.iter().map(|r| format!("{r}")).collect();
    v.join(", ")
}

fn fnref(f: &FnRef<MReg>) -> String {
    match f {
        FnRef::Reg(r) => format!("{r}"),
        FnRef::Symbol(id) => format!("\"{id}\""),
    }
}

pub fn print_instr(i: &Instr) -> String {
    match i {
        Instr::Label(l) => format!("L{l}:"),
        Instr::Goto(l) => format!("  goto L{l}"),
        Instr::GetStack(s, r) => format!("  getstack {s} -> {r}"),
        Instr::SetStack(r, s) => format!("  setstack {r} -> {s}"),
        Instr::Op(op, args, d) if args.is_empty() => format!("  {op} -> {d}"),
        Instr::Op(op, args, d) => format!("  {op}({}) -> {d}", regs(args)),
        Instr::Load(c, m, args, d) => format!("  load {c}[{m}]({}) -> {d}", regs(args)),
        Instr::Store(c, m, args, src) => format!("  store {c}[{m}]({}) <- {src}", regs(args)),
        Instr::Call(sig, f) => format!("  call {} : {sig}", fnref(f)),
        Instr::Tailcall(sig, f) => format!("  tailcall {} : {sig}", fnref(f)),
        Instr::Cond(c, args, l) => format!("  if {c}({}) goto L{l}", regs(args)),
        Instr::Return => String::from("  return"),
    }
}

pub fn print_function(name: &str, f: &LinearFunction) -> String {
    let mut out = format!("\"{name}\" : {}\n", f.sig);
    if f.stacksize != 0 {
        out.push_str(&format!("  stacksize {}\n", f.stacksize));
    }
    for i in &f.code {
        out.push_str(&print_instr(i));
        out.push('\n');
    }
    out
}

pub fn print_program(p: &LinearProgram) -> String {
    let mut out = String::new();
    for (name, fd) in &p.functions {
        if let FunDef::Internal(f) = fd {
            out.push_str(&print_function(name, f));
            out.push('\n');
        }
    }
    out
}
