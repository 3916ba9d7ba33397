//! Cminor abstract syntax and expression evaluation.

use alloc::boxed::Box;
use core::fmt;

use crate::base::int;
use crate::base::{Chunk, Ident, Program, Value};
use crate::ops::{
    cmp_float, cmp_signed, cmp_unsigned, int_of_float, intu_of_float, val_add, val_sub, Comparison, F64Bits,
};
use crate::structured::{self, Ctx, Lang};

#[derive(Clone, Debug, PartialEq)]
pub enum Const {
    Int(i32),
    Float(F64Bits),
    AddrSymbol(Ident),
    AddrStack(i32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    NegInt,
    NotInt,
    NotBool,
    NegF,
    AbsF,
    Cast8U,
    Cast8S,
    Cast16U,
    Cast16S,
    SingleOfFloat,
    IntOfFloat,
    IntUOfFloat,
    FloatOfInt,
    FloatOfIntU,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 14] = [
        UnaryOp::NegInt,
        UnaryOp::NotInt,
        UnaryOp::NotBool,
        UnaryOp::NegF,
        UnaryOp::AbsF,
        UnaryOp::Cast8U,
        UnaryOp::Cast8S,
        UnaryOp::Cast16U,
        UnaryOp::Cast16S,
        UnaryOp::SingleOfFloat,
        UnaryOp::IntOfFloat,
        UnaryOp::IntUOfFloat,
        UnaryOp::FloatOfInt,
        UnaryOp::FloatOfIntU,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::NegInt => "negint",
            UnaryOp::NotInt => "notint",
            UnaryOp::NotBool => "notbool",
            UnaryOp::NegF => "negf",
            UnaryOp::AbsF => "absf",
            UnaryOp::Cast8U => "cast8u",
            UnaryOp::Cast8S => "cast8s",
            UnaryOp::Cast16U => "cast16u",
            UnaryOp::Cast16S => "cast16s",
            UnaryOp::SingleOfFloat => "singleoffloat",
            UnaryOp::IntOfFloat => "intoffloat",
            UnaryOp::IntUOfFloat => "intuoffloat",
            UnaryOp::FloatOfInt => "floatofint",
            UnaryOp::FloatOfIntU => "floatofintu",
        }
    }

    pub fn from_name(s: &str) -> Option<UnaryOp> {
        UnaryOp::ALL.into_iter().find(|u| u.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    DivU,
    Mod,
    ModU,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    ShrU,
    AddF,
    SubF,
    MulF,
    DivF,
    Cmp(Comparison),
    CmpU(Comparison),
    CmpF(Comparison),
}

impl BinaryOp {
    /// Concrete-syntax operator.
    pub fn symbol(self) -> &'static str {
        use Comparison as C;
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::DivU => "/u",
            BinaryOp::Mod => "%",
            BinaryOp::ModU => "%u",
            BinaryOp::And => "&",
            BinaryOp::Or => "|",
            BinaryOp::Xor => "^",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::ShrU => ">>u",
            BinaryOp::AddF => "+f",
            BinaryOp::SubF => "-f",
            BinaryOp::MulF => "*f",
            BinaryOp::DivF => "/f",
            BinaryOp::Cmp(c) => match c {
                C::Eq => "==",
                C::Ne => "!=",
                C::Lt => "<",
                C::Le => "<=",
                C::Gt => ">",
                C::Ge => ">=",
            },
            BinaryOp::CmpU(c) => match c {
                C::Eq => "==u",
                C::Ne => "!=u",
                C::Lt => "<u",
                C::Le => "<=u",
                C::Gt => ">u",
                C::Ge => ">=u",
            },
            BinaryOp::CmpF(c) => match c {
                C::Eq => "==f",
                C::Ne => "!=f",
                C::Lt => "<f",
                C::Le => "<=f",
                C::Gt => ">f",
                C::Ge => ">=f",
            },
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Mul
            | BinaryOp::Div
            | BinaryOp::DivU
            | BinaryOp::Mod
            | BinaryOp::ModU
            | BinaryOp::MulF
            | BinaryOp::DivF => 10,
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::AddF | BinaryOp::SubF => 9,
            BinaryOp::Shl | BinaryOp::Shr | BinaryOp::ShrU => 8,
            BinaryOp::Cmp(c) | BinaryOp::CmpU(c) | BinaryOp::CmpF(c) => match c {
                Comparison::Eq | Comparison::Ne => 6,
                _ => 7,
            },
            BinaryOp::And => 5,
            BinaryOp::Xor => 4,
            BinaryOp::Or => 3,
        }
    }

    pub fn all() -> impl Iterator<Item = BinaryOp> {
        use BinaryOp::*;
        [Add, Sub, Mul, Div, DivU, Mod, ModU, And, Or, Xor, Shl, Shr, ShrU, AddF, SubF, MulF, DivF]
            .into_iter()
            .chain(Comparison::ALL.into_iter().flat_map(|c| [Cmp(c), CmpU(c), CmpF(c)]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(Ident),
    Const(Const),
    Unop(UnaryOp, Box<Expr>),
    Binop(BinaryOp, Box<Expr>, Box<Expr>),
    Load(Chunk, Box<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(n: i32) -> Expr {
        Expr::Const(Const::Int(n))
    }

    pub fn float(x: f64) -> Expr {
        Expr::Const(Const::Float(F64Bits::new(x)))
    }

    pub fn var(x: &str) -> Expr {
        Expr::Var(x.into())
    }

    pub fn unop(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unop(op, Box::new(a))
    }

    pub fn binop(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binop(op, Box::new(a), Box::new(b))
    }
}

pub fn eval_unop(op: UnaryOp, v: Value) -> Option<Value> {
    use Value::{Float as F, Int as I};
    Some(match (op, v) {
        (UnaryOp::NegInt, I(n)) => I(n.wrapping_neg()),
        (UnaryOp::NotInt, I(n)) => I(!n),
        (UnaryOp::NotBool, v) => Value::from_bool(!v.truth()?),
        (UnaryOp::NegF, F(x)) => F(-x),
        (UnaryOp::AbsF, F(x)) => F(x.abs()),
        (UnaryOp::Cast8U, I(n)) => I(int::zero_ext(n, 8)),
        (UnaryOp::Cast8S, I(n)) => I(int::sign_ext(n, 8)),
        (UnaryOp::Cast16U, I(n)) => I(int::zero_ext(n, 16)),
        (UnaryOp::Cast16S, I(n)) => I(int::sign_ext(n, 16)),
        (UnaryOp::SingleOfFloat, F(x)) => F(x as f32 as f64),
        (UnaryOp::IntOfFloat, F(x)) => I(int_of_float(x)),
        (UnaryOp::IntUOfFloat, F(x)) => I(intu_of_float(x)),
        (UnaryOp::FloatOfInt, I(n)) => F(n as f64),
        (UnaryOp::FloatOfIntU, I(n)) => F(n as u32 as f64),
        _ => return None,
    })
}

pub fn eval_binop(op: BinaryOp, v1: Value, v2: Value) -> Option<Value> {
    use Value::{Float as F, Int as I};
    Some(match (op, v1, v2) {
        (BinaryOp::Add, _, _) => val_add(v1, v2)?,
        (BinaryOp::Sub, _, _) => val_sub(v1, v2)?,
        (BinaryOp::Mul, I(a), I(b)) => I(a.wrapping_mul(b)),
        (BinaryOp::Div, I(a), I(b)) => I(int::divs(a, b)?),
        (BinaryOp::DivU, I(a), I(b)) => I(int::divu(a, b)?),
        (BinaryOp::Mod, I(a), I(b)) => I(int::mods(a, b)?),
        (BinaryOp::ModU, I(a), I(b)) => I(int::modu(a, b)?),
        (BinaryOp::And, I(a), I(b)) => I(a & b),
        (BinaryOp::Or, I(a), I(b)) => I(a | b),
        (BinaryOp::Xor, I(a), I(b)) => I(a ^ b),
        (BinaryOp::Shl, I(a), I(b)) => I(int::shl(a, b)),
        (BinaryOp::Shr, I(a), I(b)) => I(int::shr(a, b)),
        (BinaryOp::ShrU, I(a), I(b)) => I(int::shru(a, b)),
        (BinaryOp::AddF, F(a), F(b)) => F(a + b),
        (BinaryOp::SubF, F(a), F(b)) => F(a - b),
        (BinaryOp::MulF, F(a), F(b)) => F(a * b),
        (BinaryOp::DivF, F(a), F(b)) => F(a / b),
        (BinaryOp::Cmp(c), _, _) => Value::from_bool(cmp_signed(c, v1, v2)?),
        (BinaryOp::CmpU(c), _, _) => Value::from_bool(cmp_unsigned(c, v1, v2)?),
        (BinaryOp::CmpF(c), _, _) => Value::from_bool(cmp_float(c, v1, v2)?),
        _ => return None,
    })
}

pub fn eval_const(ctx: &Ctx<'_>, c: &Const) -> Option<Value> {
    match c {
        Const::Int(n) => Some(Value::Int(*n)),
        Const::Float(x) => Some(Value::Float(x.get())),
        Const::AddrSymbol(id) => ctx.genv.symbol_address(id, 0),
        Const::AddrStack(d) => val_add(ctx.sp, Value::Int(*d)),
    }
}

pub fn eval_expr(ctx: &Ctx<'_>, e: &Expr) -> Option<Value> {
    match e {
        Expr::Var(x) => ctx.env.get(x).copied(),
        Expr::Const(c) => eval_const(ctx, c),
        Expr::Unop(op, a) => eval_unop(*op, eval_expr(ctx, a)?),
        Expr::Binop(op, a, b) => eval_binop(*op, eval_expr(ctx, a)?, eval_expr(ctx, b)?),
        Expr::Load(chunk, a) => ctx.mem.loadv(*chunk, eval_expr(ctx, a)?),
        Expr::Cond(c, a, b) => {
            if eval_expr(ctx, c)?.truth()? {
                eval_expr(ctx, a)
            } else {
                eval_expr(ctx, b)
            }
        }
    }
}

/// Marker for the Cminor instance of the structured language.
#[derive(Clone, Debug, PartialEq)]
pub struct Cminor;

impl Lang for Cminor {
    type Expr = Expr;
    type Cond = Expr;
    type Addr = Expr;
    type Callee = Expr;

    fn eval_expr(ctx: &Ctx<'_>, e: &Expr) -> Option<Value> {
        eval_expr(ctx, e)
    }

    fn eval_cond(ctx: &Ctx<'_>, c: &Expr) -> Option<bool> {
        eval_expr(ctx, c)?.truth()
    }

    fn eval_addr(ctx: &Ctx<'_>, a: &Expr) -> Option<Value> {
        eval_expr(ctx, a)
    }

    fn eval_callee(ctx: &Ctx<'_>, c: &Expr) -> Option<Value> {
        eval_expr(ctx, c)
    }
}

pub type Stmt = structured::Stmt<Cminor>;
pub type Function = structured::Function<Cminor>;
pub type CminorProgram = Program<Function>;

impl fmt::Display for UnaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
