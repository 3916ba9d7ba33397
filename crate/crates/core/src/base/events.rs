//! Observable events, traces, program behaviors and external worlds.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::program::{ExtFun, Ident};
use super::value::{Typ, Value};

/// One external call: its name, integer/float arguments and result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub tag: Ident,
    pub args: Vec<Value>,
    pub res: Value,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.tag)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ") -> {}", self.res)
    }
}

pub type Trace = Vec<Event>;

/// Renders a trace one event per line.
pub fn dump_trace(t: &[Event]) -> String {
    let mut s = String::new();
    for e in t {
        s.push_str(&format!("{e}\n"));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Behavior {
    Converges(Trace, i32),
    /// Fuel ran out; the trace is the prefix observed so far.
    Diverges(Trace),
    GoesWrong(Trace),
}

impl Behavior {
    pub fn trace(&self) -> &Trace {
        match self {
            Behavior::Converges(t, _) | Behavior::Diverges(t) | Behavior::GoesWrong(t) => t,
        }
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, Behavior::Diverges(_))
    }

    /// Agreement under bounded fuel: terminal behaviors must be identical; a
    /// fuel-exhausted run agrees with anything whose trace extends its own.
    pub fn agrees_with(&self, other: &Behavior) -> bool {
        match (self, other) {
            (Behavior::Diverges(t), b) | (b, Behavior::Diverges(t)) => b.trace().starts_with(t),
            _ => self == other,
        }
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behavior::Converges(t, n) => write!(f, "converges({n}) after {} events", t.len()),
            Behavior::Diverges(t) => write!(f, "diverges after {} events", t.len()),
            Behavior::GoesWrong(t) => write!(f, "goes wrong after {} events", t.len()),
        }
    }
}

/// A deterministic external world: a script of results, consumed one per
/// external call regardless of the callee.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct World {
    script: Vec<Value>,
    pos: usize,
}

impl World {
    pub fn new(script: Vec<Value>) -> World {
        World { script, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    /// Performs an external call. Fails on arity or type mismatch, pointer
    /// or undefined arguments, and script exhaustion.
    pub fn call(&mut self, ef: &ExtFun, args: &[Value]) -> Option<(Event, Value)> {
        if args.len() != ef.sig.args.len() {
            return None;
        }
        for (a, t) in args.iter().zip(&ef.sig.args) {
            match (a, t) {
                (Value::Int(_), Typ::Int) | (Value::Float(_), Typ::Float) => {}
                _ => return None,
            }
        }
        let res = *self.script.get(self.pos)?;
        let ret = match (ef.sig.res, res) {
            (Some(Typ::Int), Value::Int(_)) | (Some(Typ::Float), Value::Float(_)) => res,
            (None, Value::Int(_) | Value::Float(_)) => Value::Undef,
            _ => return None,
        };
        self.pos += 1;
        Some((Event { tag: ef.name.clone(), args: args.to_vec(), res }, ret))
    }

    /// Parses a world script: one `int <n>` or `float <x>` per line; blank
    /// lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<World, String> {
        let mut script = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let kind = it.next().unwrap_or("");
            let arg = it.next().ok_or_else(|| format!("line {}: missing value", i + 1))?;
            if it.next().is_some() {
                return Err(format!("line {}: trailing text", i + 1));
            }
            let v = match kind {
                "int" => Value::Int(parse_int(arg).ok_or_else(|| format!("line {}: bad int `{arg}`", i + 1))?),
                "float" => Value::Float(arg.parse::<f64>().map_err(|_| format!("line {}: bad float `{arg}`", i + 1))?),
                _ => return Err(format!("line {}: expected `int` or `float`", i + 1)),
            };
            script.push(v);
        }
        Ok(World::new(script))
    }

    /// Inverse of [`World::parse`] for the unconsumed part of the script.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for v in &self.script[self.pos..] {
            match v {
                Value::Float(x) => s.push_str(&format!("float {x:?}\n")),
                other => s.push_str(&format!("int {other}\n")),
            }
        }
        s
    }
}

/// Parses a decimal or `0x` hexadecimal 32-bit integer, signed or not.
pub fn parse_int(s: &str) -> Option<i32> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let mag = if let Some(hex) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()?
    } else {
        digits.parse::<u64>().ok()?
    };
    if mag > u32::MAX as u64 {
        return None;
    }
    let n = mag as u32 as i32;
    Some(if neg { n.wrapping_neg() } else { n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::value::Signature;
    use alloc::vec;

    fn print_int() -> ExtFun {
        ExtFun { name: "print_int".into(), sig: Signature { args: vec![Typ::Int], res: Some(Typ::Int) } }
    }

    #[test]
    fn scripted_call() {
        let mut w = World::new(vec![Value::Int(42)]);
        let (ev, v) = w.call(&print_int(), &[Value::Int(7)]).unwrap();
        assert_eq!(v, Value::Int(42));
        assert_eq!(format!("{ev}"), "print_int(7) -> 42");
        assert!(w.call(&print_int(), &[Value::Int(7)]).is_none());
    }

    #[test]
    fn bad_arguments_fail() {
        let mut w = World::new(vec![Value::Int(1), Value::Float(1.0)]);
        assert!(w.call(&print_int(), &[Value::Ptr(1, 0)]).is_none());
        assert!(w.call(&print_int(), &[Value::Float(1.0)]).is_none());
        assert!(w.call(&print_int(), &[]).is_none());
        w.call(&print_int(), &[Value::Int(0)]).unwrap();
        assert!(w.call(&print_int(), &[Value::Int(0)]).is_none(), "float result for int signature");
    }

    #[test]
    fn script_round_trip() {
        let w = World::parse("int 3\n# note\nfloat -0.5\nint 0xFFFFFFFF\n").unwrap();
        assert_eq!(w.script, vec![Value::Int(3), Value::Float(-0.5), Value::Int(-1)]);
        assert_eq!(World::parse(&w.render()).unwrap(), w);
        assert!(World::parse("bool 1").is_err());
    }

    #[test]
    fn agreement() {
        let ev = Event { tag: "p".into(), args: vec![], res: Value::Int(0) };
        let full = Behavior::Converges(vec![ev.clone(), ev.clone()], 0);
        assert!(Behavior::Diverges(vec![ev.clone()]).agrees_with(&full));
        assert!(full.agrees_with(&Behavior::Diverges(vec![])));
        assert!(!Behavior::GoesWrong(vec![ev.clone(), ev]).agrees_with(&full));
    }
}
