//! Machine-level operators, addressing modes and conditions shared by every
//! language from CminorSel down to Mach, with their evaluation and typing.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::base::int;
use crate::base::{Genv, Ident, Typ, Value};

/// A float constant compared and ordered by its bit pattern.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct F64Bits(pub u64);

impl F64Bits {
    pub fn new(x: f64) -> F64Bits {
        F64Bits(x.to_bits())
    }

    pub fn get(self) -> f64 {
        f64::from_bits(self.0)
    }
}

impl fmt::Debug for F64Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.get())
    }
}

impl fmt::Display for F64Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.get())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparison {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub const ALL: [Comparison; 6] =
        [Comparison::Eq, Comparison::Ne, Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge];

    pub fn negate(self) -> Comparison {
        match self {
            Comparison::Eq => Comparison::Ne,
            Comparison::Ne => Comparison::Eq,
            Comparison::Lt => Comparison::Ge,
            Comparison::Le => Comparison::Gt,
            Comparison::Gt => Comparison::Le,
            Comparison::Ge => Comparison::Lt,
        }
    }

    /// `c` with its operands exchanged: `a c b == b (swap c) a`.
    pub fn swap(self) -> Comparison {
        match self {
            Comparison::Lt => Comparison::Gt,
            Comparison::Le => Comparison::Ge,
            Comparison::Gt => Comparison::Lt,
            Comparison::Ge => Comparison::Le,
            c => c,
        }
    }

    pub fn eval<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            Comparison::Eq => a == b,
            Comparison::Ne => a != b,
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Gt => a > b,
            Comparison::Ge => a >= b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Comparison::Eq => "eq",
            Comparison::Ne => "ne",
            Comparison::Lt => "lt",
            Comparison::Le => "le",
            Comparison::Gt => "gt",
            Comparison::Ge => "ge",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Comp(Comparison),
    CompImm(Comparison, i32),
    CompU(Comparison),
    CompUImm(Comparison, i32),
    CompF(Comparison),
    /// Negated float comparison; differs from the opposite comparison on NaN.
    NotCompF(Comparison),
}

impl Condition {
    pub fn arity(&self) -> usize {
        match self {
            Condition::CompImm(..) | Condition::CompUImm(..) => 1,
            _ => 2,
        }
    }

    pub fn arg_types(&self) -> Vec<Typ> {
        match self {
            Condition::CompF(_) | Condition::NotCompF(_) => vec![Typ::Float, Typ::Float],
            _ => vec![Typ::Int; self.arity()],
        }
    }

    pub fn negate(&self) -> Condition {
        match *self {
            Condition::Comp(c) => Condition::Comp(c.negate()),
            Condition::CompImm(c, n) => Condition::CompImm(c.negate(), n),
            Condition::CompU(c) => Condition::CompU(c.negate()),
            Condition::CompUImm(c, n) => Condition::CompUImm(c.negate(), n),
            Condition::CompF(c) => Condition::NotCompF(c),
            Condition::NotCompF(c) => Condition::CompF(c),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Comp(c) => write!(f, "{}", c.name()),
            Condition::CompImm(c, n) => write!(f, "{}i[{n}]", c.name()),
            Condition::CompU(c) => write!(f, "{}u", c.name()),
            Condition::CompUImm(c, n) => write!(f, "{}ui[{n}]", c.name()),
            Condition::CompF(c) => write!(f, "{}f", c.name()),
            Condition::NotCompF(c) => write!(f, "not{}f", c.name()),
        }
    }
}

/// Signed comparison, also defined on pointers into the same block and
/// (for equality) on pointers against null or other blocks.
pub fn cmp_signed(c: Comparison, v1: Value, v2: Value) -> Option<bool> {
    match (v1, v2) {
        (Value::Int(a), Value::Int(b)) => Some(c.eval(a, b)),
        (Value::Ptr(b1, o1), Value::Ptr(b2, o2)) => {
            if b1 == b2 {
                Some(c.eval(o1, o2))
            } else {
                cmp_mismatch(c)
            }
        }
        (Value::Ptr(..), Value::Int(0)) | (Value::Int(0), Value::Ptr(..)) => cmp_mismatch(c),
        _ => None,
    }
}

fn cmp_mismatch(c: Comparison) -> Option<bool> {
    match c {
        Comparison::Eq => Some(false),
        Comparison::Ne => Some(true),
        _ => None,
    }
}

pub fn cmp_unsigned(c: Comparison, v1: Value, v2: Value) -> Option<bool> {
    match (v1, v2) {
        (Value::Int(a), Value::Int(b)) => Some(c.eval(a as u32, b as u32)),
        _ => None,
    }
}

pub fn cmp_float(c: Comparison, v1: Value, v2: Value) -> Option<bool> {
    match (v1, v2) {
        (Value::Float(a), Value::Float(b)) => Some(c.eval(a, b)),
        _ => None,
    }
}

pub fn eval_condition(cond: &Condition, args: &[Value]) -> Option<bool> {
    match (cond, args) {
        (Condition::Comp(c), &[a, b]) => cmp_signed(*c, a, b),
        (Condition::CompImm(c, n), &[a]) => cmp_signed(*c, a, Value::Int(*n)),
        (Condition::CompU(c), &[a, b]) => cmp_unsigned(*c, a, b),
        (Condition::CompUImm(c, n), &[a]) => cmp_unsigned(*c, a, Value::Int(*n)),
        (Condition::CompF(c), &[a, b]) => cmp_float(*c, a, b),
        (Condition::NotCompF(c), &[a, b]) => cmp_float(*c, a, b).map(|b| !b),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operation {
    Move,
    IntConst(i32),
    FloatConst(F64Bits),
    AddrSymbol(Ident, i32),
    AddrStack(i32),
    Cast8Signed,
    Cast16Signed,
    Add,
    AddImm(i32),
    Sub,
    /// `n - x`.
    SubImm(i32),
    Mul,
    MulImm(i32),
    Div,
    DivU,
    And,
    Or,
    OrImm(i32),
    Xor,
    XorImm(i32),
    Shl,
    Shr,
    ShrImm(i32),
    ShrU,
    /// `rol(x, n) & m`.
    Rolm(i32, i32),
    NegF,
    AbsF,
    AddF,
    SubF,
    MulF,
    DivF,
    SingleOfFloat,
    IntOfFloat,
    IntUOfFloat,
    FloatOfInt,
    FloatOfIntU,
    /// Materializes a condition as 0 or 1.
    Cmp(Condition),
}

/// Operand and result types of an operator. `Move` is polymorphic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpType {
    Move,
    Fixed(Vec<Typ>, Typ),
}

impl Operation {
    pub fn typ(&self) -> OpType {
        use Operation::*;
        use Typ::{Float as F, Int as I};
        let (args, res) = match self {
            Move => return OpType::Move,
            IntConst(_) | AddrSymbol(..) | AddrStack(_) => (vec![], I),
            FloatConst(_) => (vec![], F),
            Cast8Signed | Cast16Signed | AddImm(_) | SubImm(_) | MulImm(_) | OrImm(_) | XorImm(_) | ShrImm(_)
            | Rolm(..) => (vec![I], I),
            Add | Sub | Mul | Div | DivU | And | Or | Xor | Shl | Shr | ShrU => (vec![I, I], I),
            NegF | AbsF | SingleOfFloat => (vec![F], F),
            AddF | SubF | MulF | DivF => (vec![F, F], F),
            IntOfFloat | IntUOfFloat => (vec![F], I),
            FloatOfInt | FloatOfIntU => (vec![I], F),
            Cmp(c) => (c.arg_types(), I),
        };
        OpType::Fixed(args, res)
    }

    pub fn arity(&self) -> usize {
        match self.typ() {
            OpType::Move => 1,
            OpType::Fixed(args, _) => args.len(),
        }
    }

    /// Result type; `Move` reports `None`.
    pub fn result_type(&self) -> Option<Typ> {
        match self.typ() {
            OpType::Move => None,
            OpType::Fixed(_, t) => Some(t),
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Operation::*;
        match self {
            Move => f.write_str("move"),
            IntConst(n) => write!(f, "int[{n}]"),
            FloatConst(x) => write!(f, "float[{x}]"),
            AddrSymbol(id, d) => write!(f, "addrsymbol[\"{id}\"+{d}]"),
            AddrStack(d) => write!(f, "addrstack[{d}]"),
            Cast8Signed => f.write_str("cast8s"),
            Cast16Signed => f.write_str("cast16s"),
            Add => f.write_str("add"),
            AddImm(n) => write!(f, "addi[{n}]"),
            Sub => f.write_str("sub"),
            SubImm(n) => write!(f, "subfi[{n}]"),
            Mul => f.write_str("mul"),
            MulImm(n) => write!(f, "muli[{n}]"),
            Div => f.write_str("div"),
            DivU => f.write_str("divu"),
            And => f.write_str("and"),
            Or => f.write_str("or"),
            OrImm(n) => write!(f, "ori[{n}]"),
            Xor => f.write_str("xor"),
            XorImm(n) => write!(f, "xori[{n}]"),
            Shl => f.write_str("shl"),
            Shr => f.write_str("shr"),
            ShrImm(n) => write!(f, "shri[{n}]"),
            ShrU => f.write_str("shru"),
            Rolm(n, m) => write!(f, "rolm[{n}, {:#x}]", *m as u32),
            NegF => f.write_str("negf"),
            AbsF => f.write_str("absf"),
            AddF => f.write_str("addf"),
            SubF => f.write_str("subf"),
            MulF => f.write_str("mulf"),
            DivF => f.write_str("divf"),
            SingleOfFloat => f.write_str("singleoffloat"),
            IntOfFloat => f.write_str("intoffloat"),
            IntUOfFloat => f.write_str("intuoffloat"),
            FloatOfInt => f.write_str("floatofint"),
            FloatOfIntU => f.write_str("floatofintu"),
            Cmp(c) => write!(f, "cmp[{c}]"),
        }
    }
}

/// Addition on values: integers, and pointer plus integer in either order.
pub fn val_add(v1: Value, v2: Value) -> Option<Value> {
    match (v1, v2) {
        (Value::Int(a), Value::Int(b)) => Some(Value::Int(a.wrapping_add(b))),
        (Value::Ptr(b, o), Value::Int(n)) | (Value::Int(n), Value::Ptr(b, o)) => Some(Value::Ptr(b, o.wrapping_add(n))),
        _ => None,
    }
}

/// Subtraction: integers, pointer minus integer, and same-block pointers.
pub fn val_sub(v1: Value, v2: Value) -> Option<Value> {
    match (v1, v2) {
        (Value::Int(a), Value::Int(b)) => Some(Value::Int(a.wrapping_sub(b))),
        (Value::Ptr(b, o), Value::Int(n)) => Some(Value::Ptr(b, o.wrapping_sub(n))),
        (Value::Ptr(b1, o1), Value::Ptr(b2, o2)) if b1 == b2 => Some(Value::Int(o1.wrapping_sub(o2))),
        _ => None,
    }
}

fn int1(args: &[Value]) -> Option<i32> {
    match args {
        &[Value::Int(a)] => Some(a),
        _ => None,
    }
}

fn int2(args: &[Value]) -> Option<(i32, i32)> {
    match args {
        &[Value::Int(a), Value::Int(b)] => Some((a, b)),
        _ => None,
    }
}

fn float1(args: &[Value]) -> Option<f64> {
    match args {
        &[Value::Float(a)] => Some(a),
        _ => None,
    }
}

fn float2(args: &[Value]) -> Option<(f64, f64)> {
    match args {
        &[Value::Float(a), Value::Float(b)] => Some((a, b)),
        _ => None,
    }
}

/// Float-to-int conversions saturate; NaN converts to zero.
pub fn int_of_float(x: f64) -> i32 {
    x as i32
}

pub fn intu_of_float(x: f64) -> i32 {
    x as u32 as i32
}

/// Evaluates `op` on `args`; `sp` is the current stack pointer.
pub fn eval_op(genv: &Genv, sp: Value, op: &Operation, args: &[Value]) -> Option<Value> {
    use Operation::*;
    let i = Value::Int;
    let fl = Value::Float;
    Some(match op {
        Move => match args {
            &[v] => v,
            _ => return None,
        },
        IntConst(n) if args.is_empty() => i(*n),
        FloatConst(x) if args.is_empty() => fl(x.get()),
        AddrSymbol(id, d) if args.is_empty() => genv.symbol_address(id, *d)?,
        AddrStack(d) if args.is_empty() => val_add(sp, i(*d))?,
        Cast8Signed => i(int::sign_ext(int1(args)?, 8)),
        Cast16Signed => i(int::sign_ext(int1(args)?, 16)),
        Add => match args {
            &[a, b] => val_add(a, b)?,
            _ => return None,
        },
        AddImm(n) => match args {
            &[a] => val_add(a, i(*n))?,
            _ => return None,
        },
        Sub => match args {
            &[a, b] => val_sub(a, b)?,
            _ => return None,
        },
        SubImm(n) => i(n.wrapping_sub(int1(args)?)),
        Mul => {
            let (a, b) = int2(args)?;
            i(a.wrapping_mul(b))
        }
        MulImm(n) => i(int1(args)?.wrapping_mul(*n)),
        Div => {
            let (a, b) = int2(args)?;
            i(int::divs(a, b)?)
        }
        DivU => {
            let (a, b) = int2(args)?;
            i(int::divu(a, b)?)
        }
        And => {
            let (a, b) = int2(args)?;
            i(a & b)
        }
        Or => {
            let (a, b) = int2(args)?;
            i(a | b)
        }
        OrImm(n) => i(int1(args)? | n),
        Xor => {
            let (a, b) = int2(args)?;
            i(a ^ b)
        }
        XorImm(n) => i(int1(args)? ^ n),
        Shl => {
            let (a, b) = int2(args)?;
            i(int::shl(a, b))
        }
        Shr => {
            let (a, b) = int2(args)?;
            i(int::shr(a, b))
        }
        ShrImm(n) => i(int::shr(int1(args)?, *n)),
        ShrU => {
            let (a, b) = int2(args)?;
            i(int::shru(a, b))
        }
        Rolm(n, m) => i(int::rolm(int1(args)?, *n, *m)),
        NegF => fl(-float1(args)?),
        AbsF => fl(float1(args)?.abs()),
        AddF => {
            let (a, b) = float2(args)?;
            fl(a + b)
        }
        SubF => {
            let (a, b) = float2(args)?;
            fl(a - b)
        }
        MulF => {
            let (a, b) = float2(args)?;
            fl(a * b)
        }
        DivF => {
            let (a, b) = float2(args)?;
            fl(a / b)
        }
        SingleOfFloat => fl(float1(args)? as f32 as f64),
        IntOfFloat => i(int_of_float(float1(args)?)),
        IntUOfFloat => i(intu_of_float(float1(args)?)),
        FloatOfInt => fl(int1(args)? as f64),
        FloatOfIntU => fl(int1(args)? as u32 as f64),
        Cmp(c) => {
            if args.len() != c.arity() {
                return None;
            }
            Value::from_bool(eval_condition(c, args)?)
        }
        IntConst(_) | FloatConst(_) | AddrSymbol(..) | AddrStack(_) => return None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Addressing {
    /// `r + n`.
    Indexed(i32),
    /// `r1 + r2`.
    Indexed2,
    /// `&id + d`.
    Global(Ident, i32),
    /// `&id + d + r`.
    Based(Ident, i32),
    /// `sp + d`.
    Stack(i32),
}

impl Addressing {
    pub fn arity(&self) -> usize {
        match self {
            Addressing::Indexed(_) | Addressing::Based(..) => 1,
            Addressing::Indexed2 => 2,
            Addressing::Global(..) | Addressing::Stack(_) => 0,
        }
    }
}

impl fmt::Display for Addressing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Addressing::Indexed(n) => write!(f, "indexed[{n}]"),
            Addressing::Indexed2 => f.write_str("indexed2"),
            Addressing::Global(id, d) => write!(f, "global[\"{id}\"+{d}]"),
            Addressing::Based(id, d) => write!(f, "based[\"{id}\"+{d}]"),
            Addressing::Stack(d) => write!(f, "stack[{d}]"),
        }
    }
}

pub fn eval_addressing(genv: &Genv, sp: Value, addr: &Addressing, args: &[Value]) -> Option<Value> {
    match (addr, args) {
        (Addressing::Indexed(n), &[a]) => val_add(a, Value::Int(*n)),
        (Addressing::Indexed2, &[a, b]) => val_add(a, b),
        (Addressing::Global(id, d), &[]) => genv.symbol_address(id, *d),
        (Addressing::Based(id, d), &[a]) => val_add(genv.symbol_address(id, *d)?, a),
        (Addressing::Stack(d), &[]) => val_add(sp, Value::Int(*d)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointer_comparisons() {
        let p = Value::Ptr(1, 4);
        assert_eq!(cmp_signed(Comparison::Lt, p, Value::Ptr(1, 8)), Some(true));
        assert_eq!(cmp_signed(Comparison::Eq, p, Value::Int(0)), Some(false));
        assert_eq!(cmp_signed(Comparison::Ne, Value::Int(0), p), Some(true));
        assert_eq!(cmp_signed(Comparison::Lt, p, Value::Int(0)), None);
        assert_eq!(cmp_signed(Comparison::Eq, p, Value::Ptr(2, 4)), Some(false));
        assert_eq!(cmp_unsigned(Comparison::Eq, p, p), None);
    }

    #[test]
    fn negated_float_comparison_differs_on_nan() {
        let nan = Value::Float(f64::NAN);
        let one = Value::Float(1.0);
        let lt = Condition::CompF(Comparison::Lt);
        assert_eq!(eval_condition(&lt, &[nan, one]), Some(false));
        assert_eq!(eval_condition(&lt.negate(), &[nan, one]), Some(true));
        assert_eq!(eval_condition(&Condition::CompF(Comparison::Ge), &[nan, one]), Some(false));
    }

    #[test]
    fn negation_and_swap() {
        for c in Comparison::ALL {
            for (a, b) in [(1, 2), (2, 2), (3, 2), (-1, 1)] {
                assert_eq!(c.negate().eval(a, b), !c.eval(a, b));
                assert_eq!(c.swap().eval(b, a), c.eval(a, b));
            }
        }
    }

    #[test]
    fn arithmetic_on_pointers() {
        let ge = Genv::default();
        let p = Value::Ptr(3, 8);
        assert_eq!(eval_op(&ge, Value::Undef, &Operation::Add, &[Value::Int(4), p]), Some(Value::Ptr(3, 12)));
        assert_eq!(eval_op(&ge, Value::Undef, &Operation::Sub, &[p, Value::Ptr(3, 2)]), Some(Value::Int(6)));
        assert_eq!(eval_op(&ge, Value::Undef, &Operation::Sub, &[p, Value::Ptr(2, 2)]), None);
        assert_eq!(eval_op(&ge, Value::Undef, &Operation::Mul, &[p, Value::Int(1)]), None);
        assert_eq!(eval_op(&ge, Value::Ptr(9, 0), &Operation::AddrStack(4), &[]), Some(Value::Ptr(9, 4)));
        assert_eq!(eval_op(&ge, Value::Undef, &Operation::Div, &[Value::Int(i32::MIN), Value::Int(-1)]), None);
        assert_eq!(eval_op(&ge, Value::Undef, &Operation::IntConst(1), &[Value::Int(0)]), None);
    }
}
