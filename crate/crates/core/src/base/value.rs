//! Run-time values, types, signatures and memory quantities.

use alloc::vec::Vec;
use core::fmt;

use super::int;

/// Memory block identifier. Data blocks are positive, function blocks negative.
pub type BlockId = i32;

/// A run-time value. Floats compare bitwise so that traces are comparable.
#[derive(Clone, Copy, Debug)]
pub enum Value {
    Undef,
    Int(i32),
    Float(f64),
    Ptr(BlockId, i32),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Undef, Value::Undef) => true,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Ptr(b1, o1), Value::Ptr(b2, o2)) => b1 == b2 && o1 == o2,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undef => write!(f, "undef"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Ptr(b, o) => write!(f, "ptr({b}, {o})"),
        }
    }
}

impl Value {
    pub const ZERO: Value = Value::Int(0);

    pub fn from_bool(b: bool) -> Value {
        Value::Int(b as i32)
    }

    /// Truth value used by conditionals: pointers and non-zero integers are
    /// true, integer zero is false, anything else is undefined.
    pub fn truth(self) -> Option<bool> {
        match self {
            Value::Int(n) => Some(n != 0),
            Value::Ptr(..) => Some(true),
            _ => None,
        }
    }

    pub fn has_type(self, ty: Typ) -> bool {
        matches!(
            (self, ty),
            (Value::Undef, _) | (Value::Int(_), Typ::Int) | (Value::Ptr(..), Typ::Int) | (Value::Float(_), Typ::Float)
        )
    }
}

/// Value types. Pointers have type `Int`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Typ {
    Int,
    Float,
}

impl fmt::Display for Typ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Typ::Int => "int",
            Typ::Float => "float",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub args: Vec<Typ>,
    pub res: Option<Typ>,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        if !self.args.is_empty() {
            write!(f, " ")?;
        }
        match self.res {
            Some(t) => write!(f, "-> {t}"),
            None => write!(f, "-> void"),
        }
    }
}

/// Memory quantities: what a load or store transfers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chunk {
    Int8S,
    Int8U,
    Int16S,
    Int16U,
    Int32,
    Float32,
    Float64,
}

impl Chunk {
    pub const ALL: [Chunk; 7] =
        [Chunk::Int8S, Chunk::Int8U, Chunk::Int16S, Chunk::Int16U, Chunk::Int32, Chunk::Float32, Chunk::Float64];

    pub fn size(self) -> i32 {
        match self {
            Chunk::Int8S | Chunk::Int8U => 1,
            Chunk::Int16S | Chunk::Int16U => 2,
            Chunk::Int32 | Chunk::Float32 => 4,
            Chunk::Float64 => 8,
        }
    }

    pub fn typ(self) -> Typ {
        match self {
            Chunk::Float32 | Chunk::Float64 => Typ::Float,
            _ => Typ::Int,
        }
    }

    /// The quantity used to spill a value of type `ty`.
    pub fn of_typ(ty: Typ) -> Chunk {
        match ty {
            Typ::Int => Chunk::Int32,
            Typ::Float => Chunk::Float64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Chunk::Int8S => "int8s",
            Chunk::Int8U => "int8u",
            Chunk::Int16S => "int16s",
            Chunk::Int16U => "int16u",
            Chunk::Int32 => "int32",
            Chunk::Float32 => "float32",
            Chunk::Float64 => "float64",
        }
    }

    pub fn from_name(s: &str) -> Option<Chunk> {
        Chunk::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Chunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Normalizes `v` as if stored and reloaded with quantity `chunk`.
/// Kind mismatches yield `Undef`; pointers survive only `Int32`.
pub fn cast(v: Value, chunk: Chunk) -> Value {
    match (chunk, v) {
        (Chunk::Int8S, Value::Int(n)) => Value::Int(int::sign_ext(n, 8)),
        (Chunk::Int8U, Value::Int(n)) => Value::Int(int::zero_ext(n, 8)),
        (Chunk::Int16S, Value::Int(n)) => Value::Int(int::sign_ext(n, 16)),
        (Chunk::Int16U, Value::Int(n)) => Value::Int(int::zero_ext(n, 16)),
        (Chunk::Int32, Value::Int(_) | Value::Ptr(..)) => v,
        (Chunk::Float32, Value::Float(x)) => Value::Float(x as f32 as f64),
        (Chunk::Float64, Value::Float(_)) => v,
        _ => Value::Undef,
    }
}

/// Initial contents of a global variable.
#[derive(Clone, Debug, PartialEq)]
pub enum InitData {
    Int8(i32),
    Int16(i32),
    Int32(i32),
    Float32(f64),
    Float64(f64),
    Reserve(u32),
}

impl InitData {
    pub fn size(&self) -> i32 {
        match self {
            InitData::Int8(_) => 1,
            InitData::Int16(_) => 2,
            InitData::Int32(_) | InitData::Float32(_) => 4,
            InitData::Float64(_) => 8,
            InitData::Reserve(n) => *n as i32,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cast_examples() {
        assert_eq!(cast(Value::Int(300), Chunk::Int8S), Value::Int(44));
        assert_eq!(cast(Value::Int(200), Chunk::Int8S), Value::Int(-56));
        assert_eq!(cast(Value::Int(-1), Chunk::Int16U), Value::Int(0xFFFF));
        assert_eq!(cast(Value::Ptr(1, 4), Chunk::Int32), Value::Ptr(1, 4));
        assert_eq!(cast(Value::Ptr(1, 4), Chunk::Int8U), Value::Undef);
        assert_eq!(cast(Value::Int(1), Chunk::Float64), Value::Undef);
        assert_eq!(cast(Value::Float(0.1), Chunk::Float32), Value::Float(0.1f32 as f64));
    }

    #[test]
    fn nan_values_compare_bitwise() {
        assert_eq!(Value::Float(f64::NAN), Value::Float(f64::NAN));
        assert_ne!(Value::Float(0.0), Value::Float(-0.0));
    }
}
