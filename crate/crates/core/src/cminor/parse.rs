//! Lexer and recursive-descent parser for Cminor concrete syntax.
//! The grammar is documented in `docs/grammar.md`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::ast::{BinaryOp, Const, Expr, Function, Stmt, UnaryOp};
use crate::base::events::parse_int;
use crate::base::{Chunk, ExtFun, FunDef, GlobalVar, Ident, InitData, Program, Signature, Typ};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Float(x) => write!(f, "`{x:?}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const PUNCTS: &[&str] = &[
    ">>u", "<=u", ">=u", "==u", "!=u", "<=f", ">=f", "==f", "!=f", "<<", ">>", "<=", ">=", "==", "!=", "->", "+f",
    "-f", "*f", "/f", "/u", "%u", "<u", ">u", "<f", ">f", "+", "-", "*", "/", "%", "&", "|", "^", "<", ">", "=", "!",
    "~", "?", ":", ";", ",", "(", ")", "{", "}", "[", "]",
];

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            i += 2;
            col += 2;
            loop {
                match chars.get(i) {
                    None => return Err(err(l0, c0, "unterminated comment".into())),
                    Some('*') if chars.get(i + 1) == Some(&'/') => {
                        i += 2;
                        col += 2;
                        break;
                    }
                    Some('\n') => {
                        i += 1;
                        line += 1;
                        col = 1;
                    }
                    Some(_) => {
                        i += 1;
                        col += 1;
                    }
                }
            }
            continue;
        }
        let (l0, c0) = (line, col);
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            if c == '0' && matches!(chars.get(i + 1), Some('x' | 'X')) {
                i += 2;
                while i < chars.len() && chars[i].is_ascii_hexdigit() {
                    i += 1;
                }
            } else {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let mut is_float = false;
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                is_float = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if matches!(chars.get(i), Some('e' | 'E')) {
                let mut j = i + 1;
                if matches!(chars.get(j), Some('+' | '-')) {
                    j += 1;
                }
                if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                    is_float = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            if is_float {
                Tok::Float(text.parse().map_err(|_| err(l0, c0, format!("bad float literal `{text}`")))?)
            } else {
                let n =
                    parse_int(&text).ok_or_else(|| err(l0, c0, format!("integer literal `{text}` out of range")))?;
                let raw = if text.starts_with("0x") || text.starts_with("0X") {
                    n as u32 as i64
                } else {
                    text.parse::<i64>().unwrap_or(n as i64)
                };
                Tok::Int(raw)
            }
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(err(l0, c0, "unterminated string".into()));
            }
            i += 1;
            Tok::Str(chars[start + 1..i - 1].iter().collect())
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let p = PUNCTS
                .iter()
                .find(|p| {
                    rest.starts_with(**p)
                        && !(p.len() > 1
                            && (p.ends_with('u') || p.ends_with('f'))
                            && chars.get(i + p.len()).is_some_and(|&n| is_ident_char(n)))
                })
                .ok_or_else(|| err(l0, c0, format!("unexpected character `{c}`")))?;
            i += p.len();
            Tok::Punct(p)
        };
        col += i - start;
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "skip",
    "if",
    "else",
    "loop",
    "block",
    "exit",
    "switch",
    "case",
    "default",
    "goto",
    "return",
    "tailcall",
    "var",
    "vars",
    "stacksize",
    "extern",
    "int",
    "float",
    "void",
    "reserve",
    "addrstack",
    "int8",
    "int16",
    "int32",
    "float32",
    "float64",
    "int8s",
    "int8u",
    "int16s",
    "int16u",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s) || UnaryOp::from_name(s).is_some()
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError { line: t.line, col: t.col, msg: msg.into() })
    }

    fn unexpected<T>(&self, what: &str) -> PResult<T> {
        self.error(format!("expected {what}, found {}", self.peek()))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("string"),
        }
    }

    /// Integer literal with optional sign, wrapped to 32 bits.
    fn int_lit(&mut self) -> PResult<i32> {
        let neg = self.eat_punct("-");
        match self.peek() {
            Tok::Int(n) => {
                let n = *n as i32;
                self.bump();
                Ok(if neg { n.wrapping_neg() } else { n })
            }
            _ => self.unexpected("integer"),
        }
    }

    fn nat_lit(&mut self) -> PResult<u32> {
        match self.peek() {
            Tok::Int(n) if *n >= 0 && *n <= u32::MAX as i64 => {
                let n = *n as u32;
                self.bump();
                Ok(n)
            }
            _ => self.unexpected("non-negative integer"),
        }
    }

    fn float_lit(&mut self) -> PResult<f64> {
        let neg = self.eat_punct("-");
        let x = match self.peek() {
            Tok::Float(x) => *x,
            Tok::Int(n) => *n as f64,
            _ => return self.unexpected("float"),
        };
        self.bump();
        Ok(if neg { -x } else { x })
    }

    fn typ(&mut self) -> PResult<Typ> {
        if self.eat_kw("int") {
            Ok(Typ::Int)
        } else if self.eat_kw("float") {
            Ok(Typ::Float)
        } else {
            self.unexpected("`int` or `float`")
        }
    }

    fn signature(&mut self) -> PResult<Signature> {
        let mut args = Vec::new();
        if !self.is_punct("->") {
            args.push(self.typ()?);
            while self.eat_punct(",") {
                args.push(self.typ()?);
            }
        }
        self.expect_punct("->")?;
        let res = if self.eat_kw("void") { None } else { Some(self.typ()?) };
        Ok(Signature { args, res })
    }

    fn program(&mut self) -> PResult<Program<Function>> {
        let mut globals = Vec::new();
        let mut functions = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Ident(k) if k == "var" => {
                    self.bump();
                    globals.push(self.global()?);
                }
                Tok::Ident(k) if k == "extern" => {
                    self.bump();
                    let name = self.string()?;
                    self.expect_punct(":")?;
                    let sig = self.signature()?;
                    self.expect_punct(";")?;
                    functions.push((name.clone(), FunDef::External(ExtFun { name, sig })));
                }
                Tok::Str(_) => {
                    let name = self.string()?;
                    functions.push((name, FunDef::Internal(self.function()?)));
                }
                _ => return self.unexpected("`var`, `extern` or a function definition"),
            }
        }
        Ok(Program { globals, functions, main: "main".into() })
    }

    fn global(&mut self) -> PResult<GlobalVar> {
        let name = self.string()?;
        self.expect_punct("{")?;
        let mut init = Vec::new();
        if !self.is_punct("}") {
            loop {
                init.push(self.init_datum()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct("}")?;
        self.eat_punct(";");
        Ok(GlobalVar { name, init })
    }

    fn init_datum(&mut self) -> PResult<InitData> {
        let Tok::Ident(k) = self.peek().clone() else {
            return self.unexpected("initializer");
        };
        self.bump();
        Ok(match k.as_str() {
            "int8" => InitData::Int8(self.int_lit()?),
            "int16" => InitData::Int16(self.int_lit()?),
            "int32" => InitData::Int32(self.int_lit()?),
            "float32" => InitData::Float32(self.float_lit()?),
            "float64" => InitData::Float64(self.float_lit()?),
            "reserve" => InitData::Reserve(self.nat_lit()?),
            _ => {
                self.pos -= 1;
                return self.unexpected("initializer");
            }
        })
    }

    fn function(&mut self) -> PResult<Function> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            params.push(self.ident()?);
            while self.eat_punct(",") {
                params.push(self.ident()?);
            }
        }
        self.expect_punct(")")?;
        self.expect_punct(":")?;
        let sig = self.signature()?;
        if sig.args.len() != params.len() {
            return self.error(format!("{} parameters but signature has {} arguments", params.len(), sig.args.len()));
        }
        self.expect_punct("{")?;
        let mut vars = Vec::new();
        let mut stacksize = 0;
        loop {
            if self.eat_kw("vars") {
                if !self.is_punct(";") {
                    vars.push(self.ident()?);
                    while self.eat_punct(",") {
                        vars.push(self.ident()?);
                    }
                }
                self.expect_punct(";")?;
            } else if self.eat_kw("stacksize") {
                let n = self.nat_lit()?;
                if n > i32::MAX as u32 {
                    return self.error("stack size too large");
                }
                stacksize = n as i32;
                self.expect_punct(";")?;
            } else {
                break;
            }
        }
        let body = self.stmts_until_brace()?;
        Ok(Function { sig, params, vars, stacksize, body })
    }

    /// Statements up to and including the closing brace.
    fn stmts_until_brace(&mut self) -> PResult<Stmt> {
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
        }
        Ok(Stmt::seq_all(stmts))
    }

    fn exit_target(&mut self) -> PResult<u32> {
        if self.eat_punct("(") {
            let n = self.nat_lit()?;
            self.expect_punct(")")?;
            Ok(n)
        } else if matches!(self.peek(), Tok::Int(_)) {
            self.nat_lit()
        } else {
            Ok(0)
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.is_punct(")") {
            args.push(self.expr()?);
            while self.eat_punct(",") {
                args.push(self.expr()?);
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    /// `(args) : sig ;` after a callee.
    fn call_rest(&mut self) -> PResult<(Vec<Expr>, Signature)> {
        let args = self.args()?;
        self.expect_punct(":")?;
        let sig = self.signature()?;
        self.expect_punct(";")?;
        Ok((args, sig))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if self.eat_punct("{") {
            return self.stmts_until_brace();
        }
        let tok = self.peek().clone();
        if let Tok::Ident(k) = &tok {
            match k.as_str() {
                "skip" => {
                    self.bump();
                    self.expect_punct(";")?;
                    return Ok(Stmt::Skip);
                }
                "if" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let c = self.expr()?;
                    self.expect_punct(")")?;
                    let s1 = self.stmt()?;
                    let s2 = if self.eat_kw("else") { self.stmt()? } else { Stmt::Skip };
                    return Ok(Stmt::If(c, Box::new(s1), Box::new(s2)));
                }
                "loop" => {
                    self.bump();
                    return Ok(Stmt::Loop(Box::new(self.stmt()?)));
                }
                "block" => {
                    self.bump();
                    return Ok(Stmt::Block(Box::new(self.stmt()?)));
                }
                "exit" => {
                    self.bump();
                    let n = self.exit_target()?;
                    self.expect_punct(";")?;
                    return Ok(Stmt::Exit(n));
                }
                "goto" => {
                    self.bump();
                    let l = self.ident()?;
                    self.expect_punct(";")?;
                    return Ok(Stmt::Goto(l));
                }
                "return" => {
                    self.bump();
                    if self.eat_punct(";") {
                        return Ok(Stmt::Return(None));
                    }
                    let e = self.expr()?;
                    self.expect_punct(";")?;
                    return Ok(Stmt::Return(Some(e)));
                }
                "tailcall" => {
                    self.bump();
                    let callee = self.unary()?;
                    let (args, sig) = self.call_rest()?;
                    return Ok(Stmt::Tailcall(sig, callee, args));
                }
                "switch" => {
                    self.bump();
                    return self.switch();
                }
                _ => {}
            }
            if let Some(chunk) = Chunk::from_name(k) {
                if matches!(self.peek_at(1), Tok::Punct("[")) {
                    self.bump();
                    self.bump();
                    let addr = self.expr()?;
                    self.expect_punct("]")?;
                    if self.eat_punct("=") {
                        let v = self.expr()?;
                        self.expect_punct(";")?;
                        return Ok(Stmt::Store(chunk, addr, v));
                    }
                    return self.unexpected("`=` after store address");
                }
            }
            if !is_keyword(k) {
                match self.peek_at(1) {
                    Tok::Punct(":") => {
                        let l = self.ident()?;
                        self.bump();
                        return Ok(Stmt::Label(l, Box::new(self.stmt()?)));
                    }
                    Tok::Punct("=") => {
                        let x = self.ident()?;
                        self.bump();
                        let e = self.expr()?;
                        if self.is_punct("(") {
                            let (args, sig) = self.call_rest()?;
                            return Ok(Stmt::Call(Some(x), sig, e, args));
                        }
                        self.expect_punct(";")?;
                        return Ok(Stmt::Assign(x, e));
                    }
                    _ => {}
                }
            }
        }
        let callee = self.unary()?;
        if self.is_punct("(") {
            let (args, sig) = self.call_rest()?;
            return Ok(Stmt::Call(None, sig, callee, args));
        }
        self.unexpected("statement")
    }

    fn switch(&mut self) -> PResult<Stmt> {
        self.expect_punct("(")?;
        let e = self.expr()?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut tbl = Vec::new();
        let dfl;
        loop {
            if self.eat_kw("case") {
                let n = self.int_lit()?;
                self.expect_punct(":")?;
                self.expect_kw("exit")?;
                let t = self.exit_target()?;
                self.expect_punct(";")?;
                tbl.push((n, t));
            } else if self.eat_kw("default") {
                self.expect_punct(":")?;
                self.expect_kw("exit")?;
                dfl = self.exit_target()?;
                self.expect_punct(";")?;
                break;
            } else {
                return self.unexpected("`case` or `default`");
            }
        }
        self.expect_punct("}")?;
        Ok(Stmt::Switch(e, tbl, dfl))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let c = self.binary(0)?;
        if self.eat_punct("?") {
            let a = self.expr()?;
            self.expect_punct(":")?;
            let b = self.expr()?;
            return Ok(Expr::Cond(Box::new(c), Box::new(a), Box::new(b)));
        }
        Ok(c)
    }

    fn binop_here(&self) -> Option<BinaryOp> {
        let Tok::Punct(p) = self.peek() else {
            return None;
        };
        binop_of_symbol(p)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop_here() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::binop(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_punct("-") {
            return Ok(match self.peek().clone() {
                Tok::Int(n) => {
                    self.bump();
                    Expr::int((n as i32).wrapping_neg())
                }
                Tok::Float(x) => {
                    self.bump();
                    Expr::float(-x)
                }
                _ => Expr::unop(UnaryOp::NegInt, self.unary()?),
            });
        }
        if self.eat_punct("~") {
            return Ok(Expr::unop(UnaryOp::NotInt, self.unary()?));
        }
        if self.eat_punct("!") {
            return Ok(Expr::unop(UnaryOp::NotBool, self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::int(n as i32))
            }
            Tok::Float(x) => {
                self.bump();
                Ok(Expr::float(x))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Const(Const::AddrSymbol(s)))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(k) => {
                if let Some(op) = UnaryOp::from_name(&k) {
                    self.bump();
                    self.expect_punct("(")?;
                    let a = self.expr()?;
                    self.expect_punct(")")?;
                    return Ok(Expr::unop(op, a));
                }
                if let Some(chunk) = Chunk::from_name(&k) {
                    self.bump();
                    self.expect_punct("[")?;
                    let a = self.expr()?;
                    self.expect_punct("]")?;
                    return Ok(Expr::Load(chunk, Box::new(a)));
                }
                if k == "addrstack" {
                    self.bump();
                    self.expect_punct("(")?;
                    let n = self.int_lit()?;
                    self.expect_punct(")")?;
                    return Ok(Expr::Const(Const::AddrStack(n)));
                }
                Ok(Expr::Var(self.ident()?))
            }
            _ => self.unexpected("expression"),
        }
    }
}

fn binop_of_symbol(p: &str) -> Option<BinaryOp> {
    BinaryOp::all().find(|op| op.symbol() == p)
}

/// Parses a whole program. `main` names the entry function.
pub fn parse_program(src: &str) -> Result<Program<Function>, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    p.program()
}

/// Parses a single expression (used by tests and tools).
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.unexpected("end of expression");
    }
    Ok(e)
}

impl From<ParseError> for String {
    fn from(e: ParseError) -> String {
        e.to_string()
    }
}
