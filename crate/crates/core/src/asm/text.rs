//! Textual assembly: an emitter and a parser for the same format.
//!
//! ```text
//! .global "tbl" int32 3, int32 4, space 8
//! .extern "print_int" : int -> void
//! .function "main" : -> int
//!     allocframe -8, 0, -4, -8
//! L3:
//!     addi r3, r0, 7
//!     lwz r2, -8(r1)
//!     mtlr r2
//!     freeframe -4
//!     blr
//! .end
//! .main "main"
//! ```
//!
//! Float constants are written as the hexadecimal image of their bits.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{AsmFunction, AsmProgram, CrBit, Imm, Instr, LoadOp, StoreOp};
use crate::base::{ExtFun, FunDef, GlobalVar, InitData, Program, Signature, Typ};
use crate::locs::MReg;
use crate::ops::F64Bits;

fn reg(r: MReg) -> String {
    match r {
        MReg::R(n) => format!("r{n}"),
        MReg::F(n) => format!("f{n}"),
    }
}

fn bits(x: f64) -> String {
    format!("{:#018x}", x.to_bits())
}

pub fn emit_instr(i: &Instr) -> String {
    use Instr::*;
    let r3 = |m: &str, a: &MReg, b: &MReg, c: &MReg| format!("\t{m} {}, {}, {}", reg(*a), reg(*b), reg(*c));
    let r2 = |m: &str, a: &MReg, b: &MReg| format!("\t{m} {}, {}", reg(*a), reg(*b));
    let ri = |m: &str, a: &MReg, b: &MReg, k: &dyn core::fmt::Display| format!("\t{m} {}, {}, {k}", reg(*a), reg(*b));
    match i {
        Add(a, b, c) => r3("add", a, b, c),
        Addi(a, b, k) => ri("addi", a, b, k),
        Addis(a, b, k) => ri("addis", a, b, k),
        Subfc(a, b, c) => r3("subfc", a, b, c),
        Subfic(a, b, k) => ri("subfic", a, b, k),
        Mullw(a, b, c) => r3("mullw", a, b, c),
        Mulli(a, b, k) => ri("mulli", a, b, k),
        Divw(a, b, c) => r3("divw", a, b, c),
        Divwu(a, b, c) => r3("divwu", a, b, c),
        And(a, b, c) => r3("and", a, b, c),
        Or(a, b, c) => r3("or", a, b, c),
        Xor(a, b, c) => r3("xor", a, b, c),
        Ori(a, b, k) => ri("ori", a, b, k),
        Oris(a, b, k) => ri("oris", a, b, k),
        Xori(a, b, k) => ri("xori", a, b, k),
        Xoris(a, b, k) => ri("xoris", a, b, k),
        Slw(a, b, c) => r3("slw", a, b, c),
        Sraw(a, b, c) => r3("sraw", a, b, c),
        Srawi(a, b, k) => ri("srawi", a, b, k),
        Srw(a, b, c) => r3("srw", a, b, c),
        Rlwinm(a, b, k, m) => format!("\trlwinm {}, {}, {k}, {:#x}", reg(*a), reg(*b), *m as u32),
        Extsb(a, b) => r2("extsb", a, b),
        Extsh(a, b) => r2("extsh", a, b),
        Mr(a, b) => r2("mr", a, b),
        Load(op, d, k, a) => format!("\t{} {}, {k}({})", op.name(), reg(*d), reg(*a)),
        LoadX(op, d, a, b) => r3(&format!("{}x", op.name()), d, a, b),
        Store(op, s, k, a) => format!("\t{} {}, {k}({})", op.name(), reg(*s), reg(*a)),
        StoreX(op, s, a, b) => r3(&format!("{}x", op.name()), s, a, b),
        Fadd(a, b, c) => r3("fadd", a, b, c),
        Fsub(a, b, c) => r3("fsub", a, b, c),
        Fmul(a, b, c) => r3("fmul", a, b, c),
        Fdiv(a, b, c) => r3("fdiv", a, b, c),
        Fneg(a, b) => r2("fneg", a, b),
        Fabs(a, b) => r2("fabs", a, b),
        Frsp(a, b) => r2("frsp", a, b),
        Fmr(a, b) => r2("fmr", a, b),
        Cmpw(a, b) => r2("cmpw", a, b),
        Cmpwi(a, k) => format!("\tcmpwi {}, {k}", reg(*a)),
        Cmplw(a, b) => r2("cmplw", a, b),
        Cmplwi(a, k) => format!("\tcmplwi {}, {k}", reg(*a)),
        Fcmpu(a, b) => r2("fcmpu", a, b),
        Cror(d, a, b) => format!("\tcror {}, {}, {}", d.name(), a.name(), b.name()),
        B(l) => format!("\tb L{l}"),
        Bt(c, l) => format!("\tbt {}, L{l}", c.name()),
        Bf(c, l) => format!("\tbf {}, L{l}", c.name()),
        Bl(id) => format!("\tbl \"{id}\""),
        Bs(id) => format!("\tb \"{id}\""),
        Blr => "\tblr".to_string(),
        Bctr => "\tbctr".to_string(),
        Bctrl => "\tbctrl".to_string(),
        Mflr(r) => format!("\tmflr {}", reg(*r)),
        Mtlr(r) => format!("\tmtlr {}", reg(*r)),
        Mtctr(r) => format!("\tmtctr {}", reg(*r)),
        Label(l) => format!("L{l}:"),
        Allocframe(lo, hi, link, ra) => format!("\tallocframe {lo}, {hi}, {link}, {ra}"),
        Freeframe(link) => format!("\tfreeframe {link}"),
        Lfi(d, x) => format!("\tlfi {}, {}", reg(*d), bits(x.get())),
        Fcti(a, b) => r2("fcti", a, b),
        Fctiu(a, b) => r2("fctiu", a, b),
        Ictf(a, b) => r2("ictf", a, b),
        Iuctf(a, b) => r2("iuctf", a, b),
        Mfcrbit(d, c) => format!("\tmfcrbit {}, {}", reg(*d), c.name()),
    }
}

fn emit_init(d: &InitData) -> String {
    match d {
        InitData::Int8(n) => format!("int8 {n}"),
        InitData::Int16(n) => format!("int16 {n}"),
        InitData::Int32(n) => format!("int32 {n}"),
        InitData::Float32(x) => format!("float32 {}", bits(*x)),
        InitData::Float64(x) => format!("float64 {}", bits(*x)),
        InitData::Reserve(n) => format!("space {n}"),
    }
}

pub fn emit_text(p: &AsmProgram) -> String {
    let mut out = String::new();
    for g in &p.globals {
        let items: Vec<String> = g.init.iter().map(emit_init).collect();
        out.push_str(&format!(".global \"{}\" {}\n", g.name, items.join(", ")).replace(" \n", "\n"));
    }
    for (name, fd) in &p.functions {
        match fd {
            FunDef::External(ef) => out.push_str(&format!(".extern \"{name}\" : {}\n", ef.sig)),
            FunDef::Internal(f) => {
                out.push_str(&format!(".function \"{name}\" : {}\n", f.sig));
                for i in &f.code {
                    out.push_str(&emit_instr(i));
                    out.push('\n');
                }
                out.push_str(".end\n");
            }
        }
    }
    out.push_str(&format!(".main \"{}\"\n", p.main));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextError {
    pub line: usize,
    pub msg: String,
}

type R<T> = Result<T, String>;

fn parse_reg(s: &str) -> R<MReg> {
    let s = s.trim();
    let (k, n) = s.split_at(1.min(s.len()));
    let n: u8 = n.parse().map_err(|_| format!("bad register `{s}`"))?;
    match k {
        "r" if n < 32 => Ok(MReg::R(n)),
        "f" if n < 32 => Ok(MReg::F(n)),
        _ => Err(format!("bad register `{s}`")),
    }
}

fn parse_int(s: &str) -> R<i32> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let v: i64 = match body.strip_prefix("0x") {
        Some(h) => i64::from_str_radix(h, 16),
        None => body.parse(),
    }
    .map_err(|_| format!("bad integer `{s}`"))?;
    let v = if neg { -v } else { v };
    if v < i32::MIN as i64 || v > u32::MAX as i64 {
        return Err(format!("integer out of range `{s}`"));
    }
    Ok(v as i32)
}

fn parse_bits(s: &str) -> R<f64> {
    let h = s.trim().strip_prefix("0x").ok_or_else(|| format!("bad float image `{s}`"))?;
    u64::from_str_radix(h, 16).map(f64::from_bits).map_err(|_| format!("bad float image `{s}`"))
}

fn parse_ident(s: &str) -> R<String> {
    let s = s.trim();
    s.strip_prefix('"').and_then(|s| s.strip_suffix('"')).map(String::from).ok_or_else(|| format!("bad name `{s}`"))
}

fn parse_label(s: &str) -> R<u32> {
    s.trim().strip_prefix('L').and_then(|n| n.parse().ok()).ok_or_else(|| format!("bad label `{s}`"))
}

fn parse_bit(s: &str) -> R<CrBit> {
    CrBit::ALL.into_iter().find(|b| b.name() == s.trim()).ok_or_else(|| format!("bad condition bit `{s}`"))
}

/// `hi16("id"+d)`, `lo16("id"+d)` or an integer.
fn parse_imm(s: &str) -> R<Imm> {
    let s = s.trim();
    for (pre, hi) in [("hi16(", true), ("lo16(", false)] {
        if let Some(body) = s.strip_prefix(pre).and_then(|b| b.strip_suffix(')')) {
            let q = body.rfind('"').ok_or_else(|| format!("bad immediate `{s}`"))?;
            let id = parse_ident(&body[..=q])?;
            let d = parse_int(body[q + 1..].trim_start_matches('+'))?;
            return Ok(if hi { Imm::Hi(id, d) } else { Imm::Lo(id, d) });
        }
    }
    parse_int(s).map(Imm::Cst)
}

/// `imm(reg)`.
fn parse_mem(s: &str) -> R<(Imm, MReg)> {
    let s = s.trim();
    let open = s.rfind('(').ok_or_else(|| format!("bad memory operand `{s}`"))?;
    let r = s[open + 1..].strip_suffix(')').ok_or_else(|| format!("bad memory operand `{s}`"))?;
    Ok((parse_imm(&s[..open])?, parse_reg(r)?))
}

fn parse_sig(s: &str) -> R<Signature> {
    let (args, res) = s.split_once("->").ok_or_else(|| format!("bad signature `{s}`"))?;
    let ty = |t: &str| match t.trim() {
        "int" => Ok(Typ::Int),
        "float" => Ok(Typ::Float),
        t => Err(format!("bad type `{t}`")),
    };
    let args = if args.trim().is_empty() { Vec::new() } else { args.split(',').map(ty).collect::<R<Vec<_>>>()? };
    let res = if res.trim() == "void" { None } else { Some(ty(res)?) };
    Ok(Signature { args, res })
}

/// Splits operands at commas that are not inside parentheses or quotes.
fn operands(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut quoted, mut start) = (0, false, 0);
    for (i, c) in s.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '(' if !quoted => depth += 1,
            ')' if !quoted => depth -= 1,
            ',' if !quoted && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        out.push(s[start..].trim());
    }
    out
}

pub fn parse_instr(line: &str) -> R<Instr> {
    use Instr::*;
    let line = line.trim();
    if let Some(l) = line.strip_suffix(':') {
        return Ok(Label(parse_label(l)?));
    }
    let (m, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let ops = operands(rest);
    let want = |n: usize| {
        if ops.len() == n {
            Ok(())
        } else {
            Err(format!("`{m}` expects {n} operands"))
        }
    };
    let g = |k: usize| parse_reg(ops[k]);
    let three = |f: fn(MReg, MReg, MReg) -> Instr| -> R<Instr> {
        want(3)?;
        Ok(f(g(0)?, g(1)?, g(2)?))
    };
    let two = |f: fn(MReg, MReg) -> Instr| -> R<Instr> {
        want(2)?;
        Ok(f(g(0)?, g(1)?))
    };
    let rri = |f: fn(MReg, MReg, i32) -> Instr| -> R<Instr> {
        want(3)?;
        Ok(f(g(0)?, g(1)?, parse_int(ops[2])?))
    };
    let rrm = |f: fn(MReg, MReg, Imm) -> Instr| -> R<Instr> {
        want(3)?;
        Ok(f(g(0)?, g(1)?, parse_imm(ops[2])?))
    };
    if let Some(op) = LoadOp::ALL.into_iter().find(|o| o.name() == m) {
        want(2)?;
        let (k, a) = parse_mem(ops[1])?;
        return Ok(Load(op, g(0)?, k, a));
    }
    if let Some(op) = LoadOp::ALL.into_iter().find(|o| m.strip_suffix('x') == Some(o.name())) {
        want(3)?;
        return Ok(LoadX(op, g(0)?, g(1)?, g(2)?));
    }
    if let Some(op) = StoreOp::ALL.into_iter().find(|o| o.name() == m) {
        want(2)?;
        let (k, a) = parse_mem(ops[1])?;
        return Ok(Store(op, g(0)?, k, a));
    }
    if let Some(op) = StoreOp::ALL.into_iter().find(|o| m.strip_suffix('x') == Some(o.name())) {
        want(3)?;
        return Ok(StoreX(op, g(0)?, g(1)?, g(2)?));
    }
    match m {
        "add" => three(Add),
        "addi" => rrm(Addi),
        "addis" => rrm(Addis),
        "subfc" => three(Subfc),
        "subfic" => rri(Subfic),
        "mullw" => three(Mullw),
        "mulli" => rri(Mulli),
        "divw" => three(Divw),
        "divwu" => three(Divwu),
        "and" => three(And),
        "or" => three(Or),
        "xor" => three(Xor),
        "ori" => rri(Ori),
        "oris" => rri(Oris),
        "xori" => rri(Xori),
        "xoris" => rri(Xoris),
        "slw" => three(Slw),
        "sraw" => three(Sraw),
        "srawi" => rri(Srawi),
        "srw" => three(Srw),
        "rlwinm" => {
            want(4)?;
            Ok(Rlwinm(g(0)?, g(1)?, parse_int(ops[2])?, parse_int(ops[3])?))
        }
        "extsb" => two(Extsb),
        "extsh" => two(Extsh),
        "mr" => two(Mr),
        "fadd" => three(Fadd),
        "fsub" => three(Fsub),
        "fmul" => three(Fmul),
        "fdiv" => three(Fdiv),
        "fneg" => two(Fneg),
        "fabs" => two(Fabs),
        "frsp" => two(Frsp),
        "fmr" => two(Fmr),
        "cmpw" => two(Cmpw),
        "cmplw" => two(Cmplw),
        "fcmpu" => two(Fcmpu),
        "cmpwi" | "cmplwi" => {
            want(2)?;
            let (r, k) = (g(0)?, parse_int(ops[1])?);
            Ok(if m == "cmpwi" { Cmpwi(r, k) } else { Cmplwi(r, k) })
        }
        "cror" => {
            want(3)?;
            Ok(Cror(parse_bit(ops[0])?, parse_bit(ops[1])?, parse_bit(ops[2])?))
        }
        "b" => {
            want(1)?;
            if ops[0].starts_with('"') {
                Ok(Bs(parse_ident(ops[0])?))
            } else {
                Ok(B(parse_label(ops[0])?))
            }
        }
        "bt" | "bf" => {
            want(2)?;
            let (c, l) = (parse_bit(ops[0])?, parse_label(ops[1])?);
            Ok(if m == "bt" { Bt(c, l) } else { Bf(c, l) })
        }
        "bl" => {
            want(1)?;
            Ok(Bl(parse_ident(ops[0])?))
        }
        "blr" | "bctr" | "bctrl" => {
            want(0)?;
            Ok(match m {
                "blr" => Blr,
                "bctr" => Bctr,
                _ => Bctrl,
            })
        }
        "mflr" | "mtlr" | "mtctr" => {
            want(1)?;
            let r = g(0)?;
            Ok(match m {
                "mflr" => Mflr(r),
                "mtlr" => Mtlr(r),
                _ => Mtctr(r),
            })
        }
        "allocframe" => {
            want(4)?;
            Ok(Allocframe(parse_int(ops[0])?, parse_int(ops[1])?, parse_int(ops[2])?, parse_int(ops[3])?))
        }
        "freeframe" => {
            want(1)?;
            Ok(Freeframe(parse_int(ops[0])?))
        }
        "lfi" => {
            want(2)?;
            Ok(Lfi(g(0)?, F64Bits::new(parse_bits(ops[1])?)))
        }
        "fcti" => two(Fcti),
        "fctiu" => two(Fctiu),
        "ictf" => two(Ictf),
        "iuctf" => two(Iuctf),
        "mfcrbit" => {
            want(2)?;
            Ok(Mfcrbit(g(0)?, parse_bit(ops[1])?))
        }
        _ => Err(format!("unknown mnemonic `{m}`")),
    }
}

fn parse_init(s: &str) -> R<InitData> {
    let (k, v) = s.trim().split_once(' ').ok_or_else(|| format!("bad initializer `{s}`"))?;
    Ok(match k {
        "int8" => InitData::Int8(parse_int(v)?),
        "int16" => InitData::Int16(parse_int(v)?),
        "int32" => InitData::Int32(parse_int(v)?),
        "float32" => InitData::Float32(parse_bits(v)?),
        "float64" => InitData::Float64(parse_bits(v)?),
        "space" => InitData::Reserve(parse_int(v)? as u32),
        _ => return Err(format!("bad initializer `{s}`")),
    })
}

/// Splits `"name" rest` into the name and the rest.
fn named(s: &str) -> R<(String, &str)> {
    let s = s.trim();
    let end = s[1..].find('"').map(|i| i + 2).ok_or_else(|| format!("bad name in `{s}`"))?;
    Ok((parse_ident(&s[..end])?, s[end..].trim()))
}

pub fn parse_text(text: &str) -> Result<AsmProgram, TextError> {
    let mut p = Program { globals: Vec::new(), functions: Vec::new(), main: String::new() };
    let mut current: Option<(String, AsmFunction)> = None;
    for (k, raw) in text.lines().enumerate() {
        let err = |msg: String| TextError { line: k + 1, msg };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((_, f)) = &mut current {
            if line == ".end" {
                let (name, f) = current.take().unwrap();
                p.functions.push((name, FunDef::Internal(f)));
            } else {
                f.code.push(parse_instr(line).map_err(err)?);
            }
            continue;
        }
        let (dir, rest) = line.split_once(' ').unwrap_or((line, ""));
        match dir {
            ".global" => {
                let (name, rest) = named(rest).map_err(err)?;
                let init = operands(rest).into_iter().map(parse_init).collect::<R<Vec<_>>>().map_err(err)?;
                p.globals.push(GlobalVar { name, init });
            }
            ".extern" | ".function" => {
                let (name, rest) = named(rest).map_err(err)?;
                let sig = parse_sig(rest.strip_prefix(':').unwrap_or(rest)).map_err(err)?;
                if dir == ".extern" {
                    p.functions.push((name.clone(), FunDef::External(ExtFun { name, sig })));
                } else {
                    current = Some((name, AsmFunction { sig, code: Vec::new() }));
                }
            }
            ".main" => p.main = parse_ident(rest).map_err(err)?,
            _ => return Err(err(format!("unknown directive `{dir}`"))),
        }
    }
    if current.is_some() {
        return Err(TextError { line: text.lines().count(), msg: "missing .end".into() });
    }
    Ok(p)
}
