//! Smart constructors: each builds a CminorSel expression that evaluates to
//! the same value as the corresponding Cminor operator whenever the latter
//! is defined, choosing immediate forms and folding constants.
//!
//! Immediate forms produced: `addi` (also for subtraction of a constant),
//! `subfi` (constant minus expression), `muli`, `rolm` (shifts by a
//! constant, masks, unsigned 8/16-bit casts), `ori`, `xori`, `shri`,
//! `compimm` and `compuimm`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::ast::{CondExpr, SelExpr};
use crate::base::int;
use crate::base::Value;
use crate::ops::{cmp_signed, cmp_unsigned, Addressing, Comparison, Condition, Operation};

use Operation as O;

fn op1(op: Operation, a: SelExpr) -> SelExpr {
    SelExpr::Op(op, vec![a])
}

fn op2(op: Operation, a: SelExpr, b: SelExpr) -> SelExpr {
    SelExpr::Op(op, vec![a, b])
}

/// `n + e`.
pub fn addi(n: i32, e: SelExpr) -> SelExpr {
    if n == 0 {
        return e;
    }
    match e {
        SelExpr::Op(O::IntConst(m), _) => SelExpr::int(m.wrapping_add(n)),
        SelExpr::Op(O::AddrSymbol(id, d), args) => SelExpr::Op(O::AddrSymbol(id, d.wrapping_add(n)), args),
        SelExpr::Op(O::AddrStack(d), args) => SelExpr::Op(O::AddrStack(d.wrapping_add(n)), args),
        SelExpr::Op(O::AddImm(m), args) => SelExpr::Op(O::AddImm(m.wrapping_add(n)), args),
        e => op1(O::AddImm(n), e),
    }
}

fn split_addi(e: SelExpr) -> Result<(i32, SelExpr), SelExpr> {
    match e {
        SelExpr::Op(O::AddImm(n), mut args) if args.len() == 1 => Ok((n, args.pop().unwrap())),
        e => Err(e),
    }
}

pub fn add(e1: SelExpr, e2: SelExpr) -> SelExpr {
    if let Some(n) = e1.as_int() {
        return addi(n, e2);
    }
    if let Some(n) = e2.as_int() {
        return addi(n, e1);
    }
    match (split_addi(e1), split_addi(e2)) {
        (Ok((n1, a1)), Ok((n2, a2))) => addi(n1.wrapping_add(n2), op2(O::Add, a1, a2)),
        (Ok((n, a1)), Err(e2)) => addi(n, op2(O::Add, a1, e2)),
        (Err(e1), Ok((n, a2))) => addi(n, op2(O::Add, e1, a2)),
        (Err(e1), Err(e2)) => op2(O::Add, e1, e2),
    }
}

pub fn sub(e1: SelExpr, e2: SelExpr) -> SelExpr {
    if let Some(n) = e2.as_int() {
        return addi(n.wrapping_neg(), e1);
    }
    match (split_addi(e1), split_addi(e2)) {
        (Ok((n1, a1)), Ok((n2, a2))) => addi(n1.wrapping_sub(n2), op2(O::Sub, a1, a2)),
        (Ok((n, a1)), Err(e2)) => addi(n, op2(O::Sub, a1, e2)),
        (Err(e1), Ok((n, a2))) => addi(n.wrapping_neg(), op2(O::Sub, e1, a2)),
        (Err(e1), Err(e2)) => match e1.as_int() {
            Some(n) => op1(O::SubImm(n), e2),
            None => op2(O::Sub, e1, e2),
        },
    }
}

/// `n * e`.
pub fn muli(n: i32, e: SelExpr) -> SelExpr {
    if let Some(m) = e.as_int() {
        return SelExpr::int(m.wrapping_mul(n));
    }
    match split_addi(e) {
        Ok((m, a)) => addi(m.wrapping_mul(n), muli(n, a)),
        Err(e) => op1(O::MulImm(n), e),
    }
}

pub fn mul(e1: SelExpr, e2: SelExpr) -> SelExpr {
    if let Some(n) = e1.as_int() {
        return muli(n, e2);
    }
    if let Some(n) = e2.as_int() {
        return muli(n, e1);
    }
    op2(O::Mul, e1, e2)
}

/// `rol(e, n) & m`, composing with an inner `rolm`.
pub fn rolm(n: i32, m: i32, e: SelExpr) -> SelExpr {
    let n = n & 31;
    if let Some(k) = e.as_int() {
        return SelExpr::int(int::rolm(k, n, m));
    }
    match e {
        SelExpr::Op(O::Rolm(n1, m1), args) => SelExpr::Op(O::Rolm((n1 + n) & 31, int::rol(m1, n) & m), args),
        e => op1(O::Rolm(n, m), e),
    }
}

pub fn shl(e1: SelExpr, e2: SelExpr) -> SelExpr {
    match e2.as_int() {
        Some(n) => rolm(n, int::shl(-1, n), e1),
        None => op2(O::Shl, e1, e2),
    }
}

pub fn shru(e1: SelExpr, e2: SelExpr) -> SelExpr {
    match e2.as_int() {
        Some(n) => rolm(32 - (n & 31), int::shru(-1, n), e1),
        None => op2(O::ShrU, e1, e2),
    }
}

pub fn shr(e1: SelExpr, e2: SelExpr) -> SelExpr {
    match (e1.as_int(), e2.as_int()) {
        (Some(a), Some(n)) => SelExpr::int(int::shr(a, n)),
        (_, Some(n)) => op1(O::ShrImm(n & 31), e1),
        _ => op2(O::Shr, e1, e2),
    }
}

pub fn and(e1: SelExpr, e2: SelExpr) -> SelExpr {
    if let Some(n) = e2.as_int() {
        return rolm(0, n, e1);
    }
    if let Some(n) = e1.as_int() {
        return rolm(0, n, e2);
    }
    op2(O::And, e1, e2)
}

pub fn or(e1: SelExpr, e2: SelExpr) -> SelExpr {
    match (e1.as_int(), e2.as_int()) {
        (Some(a), Some(b)) => return SelExpr::int(a | b),
        (Some(n), None) => return op1(O::OrImm(n), e2),
        (None, Some(n)) => return op1(O::OrImm(n), e1),
        _ => {}
    }
    match (&e1, &e2) {
        (SelExpr::Op(O::Rolm(n1, m1), a1), SelExpr::Op(O::Rolm(n2, m2), a2)) if n1 == n2 && a1 == a2 => {
            SelExpr::Op(O::Rolm(*n1, m1 | m2), a1.clone())
        }
        _ => op2(O::Or, e1, e2),
    }
}

pub fn xor(e1: SelExpr, e2: SelExpr) -> SelExpr {
    match (e1.as_int(), e2.as_int()) {
        (Some(a), Some(b)) => SelExpr::int(a ^ b),
        (Some(n), None) => op1(O::XorImm(n), e2),
        (None, Some(n)) => op1(O::XorImm(n), e1),
        _ => op2(O::Xor, e1, e2),
    }
}

pub fn div(e1: SelExpr, e2: SelExpr) -> SelExpr {
    if let (Some(a), Some(b)) = (e1.as_int(), e2.as_int()) {
        if let Some(q) = int::divs(a, b) {
            return SelExpr::int(q);
        }
    }
    op2(O::Div, e1, e2)
}

pub fn divu(e1: SelExpr, e2: SelExpr) -> SelExpr {
    if let (Some(a), Some(b)) = (e1.as_int(), e2.as_int()) {
        if let Some(q) = int::divu(a, b) {
            return SelExpr::int(q);
        }
    }
    op2(O::DivU, e1, e2)
}

/// `a - (a / b) * b`, which has the same definedness as signed division.
pub fn modulo(e1: SelExpr, e2: SelExpr) -> SelExpr {
    if let (Some(a), Some(b)) = (e1.as_int(), e2.as_int()) {
        if let Some(r) = int::mods(a, b) {
            return SelExpr::int(r);
        }
    }
    sub(e1.clone(), mul(op2(O::Div, e1, e2.clone()), e2))
}

pub fn modu(e1: SelExpr, e2: SelExpr) -> SelExpr {
    if let (Some(a), Some(b)) = (e1.as_int(), e2.as_int()) {
        if let Some(r) = int::modu(a, b) {
            return SelExpr::int(r);
        }
    }
    sub(e1.clone(), mul(op2(O::DivU, e1, e2.clone()), e2))
}

pub fn negint(e: SelExpr) -> SelExpr {
    sub(SelExpr::int(0), e)
}

/// Bitwise complement as `xor -1`.
pub fn notint(e: SelExpr) -> SelExpr {
    xor(e, SelExpr::int(-1))
}

pub fn notbool(e: SelExpr) -> SelExpr {
    if let Some(n) = e.as_int() {
        return SelExpr::int((n == 0) as i32);
    }
    match e {
        SelExpr::Op(O::Cmp(c), args) => SelExpr::Op(O::Cmp(c.negate()), args),
        e => op1(O::Cmp(Condition::CompImm(Comparison::Eq, 0)), e),
    }
}

pub fn cast8signed(e: SelExpr) -> SelExpr {
    match e.as_int() {
        Some(n) => SelExpr::int(int::sign_ext(n, 8)),
        None => op1(O::Cast8Signed, e),
    }
}

pub fn cast16signed(e: SelExpr) -> SelExpr {
    match e.as_int() {
        Some(n) => SelExpr::int(int::sign_ext(n, 16)),
        None => op1(O::Cast16Signed, e),
    }
}

pub fn cast8unsigned(e: SelExpr) -> SelExpr {
    rolm(0, 0xFF, e)
}

pub fn cast16unsigned(e: SelExpr) -> SelExpr {
    rolm(0, 0xFFFF, e)
}

fn cmp_with(
    c: Comparison,
    e1: SelExpr,
    e2: SelExpr,
    full: fn(Comparison) -> Condition,
    imm: fn(Comparison, i32) -> Condition,
    eval: fn(Comparison, Value, Value) -> Option<bool>,
) -> SelExpr {
    match (e1.as_int(), e2.as_int()) {
        (Some(a), Some(b)) => match eval(c, Value::Int(a), Value::Int(b)) {
            Some(r) => SelExpr::int(r as i32),
            None => op2(O::Cmp(full(c)), e1, e2),
        },
        (None, Some(n)) => op1(O::Cmp(imm(c, n)), e1),
        (Some(n), None) => op1(O::Cmp(imm(c.swap(), n)), e2),
        (None, None) => op2(O::Cmp(full(c)), e1, e2),
    }
}

pub fn cmp(c: Comparison, e1: SelExpr, e2: SelExpr) -> SelExpr {
    cmp_with(c, e1, e2, Condition::Comp, Condition::CompImm, cmp_signed)
}

pub fn cmpu(c: Comparison, e1: SelExpr, e2: SelExpr) -> SelExpr {
    cmp_with(c, e1, e2, Condition::CompU, Condition::CompUImm, cmp_unsigned)
}

pub fn cmpf(c: Comparison, e1: SelExpr, e2: SelExpr) -> SelExpr {
    op2(O::Cmp(Condition::CompF(c)), e1, e2)
}

/// Turns a value-producing expression into a condition.
pub fn cond(e: SelExpr) -> CondExpr {
    if let Some(n) = e.as_int() {
        return if n != 0 { CondExpr::True } else { CondExpr::False };
    }
    match e {
        SelExpr::Op(O::Cmp(c), args) => CondExpr::Cond(c, args),
        SelExpr::Condition(c, a, b) => CondExpr::Conditional(c, Box::new(cond(*a)), Box::new(cond(*b))),
        e => CondExpr::Cond(Condition::CompImm(Comparison::Ne, 0), vec![e]),
    }
}

/// Chooses an addressing mode for an address expression.
pub fn mode(e: SelExpr) -> (Addressing, Vec<SelExpr>) {
    match e {
        SelExpr::Op(O::AddrSymbol(id, d), args) if args.is_empty() => (Addressing::Global(id, d), args),
        SelExpr::Op(O::AddrStack(d), args) if args.is_empty() => (Addressing::Stack(d), args),
        SelExpr::Op(O::AddImm(n), args) if args.len() == 1 => (Addressing::Indexed(n), args),
        SelExpr::Op(O::Add, mut args) if args.len() == 2 => {
            let e2 = args.pop().unwrap();
            let e1 = args.pop().unwrap();
            match (e1, e2) {
                (SelExpr::Op(O::AddrSymbol(id, d), a), e2) if a.is_empty() => (Addressing::Based(id, d), vec![e2]),
                (e1, SelExpr::Op(O::AddrSymbol(id, d), a)) if a.is_empty() => (Addressing::Based(id, d), vec![e1]),
                (e1, e2) => (Addressing::Indexed2, vec![e1, e2]),
            }
        }
        e => (Addressing::Indexed(0), vec![e]),
    }
}
