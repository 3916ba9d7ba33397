//! Instruction selection: Cminor to CminorSel.

use core::convert::Infallible;

use super::ast::{Callee, CondExpr, Sel, SelExpr, SelFunction, SelProgram};
use super::smart as sc;
use crate::cminor::ast::Cminor;
use crate::cminor::{BinaryOp, CminorProgram, Const, Expr, Function, UnaryOp};
use crate::ops::{Addressing, Operation};
use crate::structured::StmtTranslator;

use alloc::vec;
use alloc::vec::Vec;

pub fn sel_expr(e: &Expr) -> SelExpr {
    match e {
        Expr::Var(x) => SelExpr::Var(x.clone()),
        Expr::Const(Const::Int(n)) => SelExpr::int(*n),
        Expr::Const(Const::Float(x)) => SelExpr::Op(Operation::FloatConst(*x), vec![]),
        Expr::Const(Const::AddrSymbol(id)) => SelExpr::Op(Operation::AddrSymbol(id.clone(), 0), vec![]),
        Expr::Const(Const::AddrStack(d)) => SelExpr::Op(Operation::AddrStack(*d), vec![]),
        Expr::Unop(op, a) => sel_unop(*op, sel_expr(a)),
        Expr::Binop(op, a, b) => sel_binop(*op, sel_expr(a), sel_expr(b)),
        Expr::Load(chunk, a) => {
            let (mode, args) = sc::mode(sel_expr(a));
            SelExpr::Load(*chunk, mode, args)
        }
        Expr::Cond(c, a, b) => SelExpr::Condition(
            alloc::boxed::Box::new(sc::cond(sel_expr(c))),
            alloc::boxed::Box::new(sel_expr(a)),
            alloc::boxed::Box::new(sel_expr(b)),
        ),
    }
}

pub fn sel_unop(op: UnaryOp, a: SelExpr) -> SelExpr {
    let float_op = |o| SelExpr::Op(o, vec![a.clone()]);
    match op {
        UnaryOp::NegInt => sc::negint(a),
        UnaryOp::NotInt => sc::notint(a),
        UnaryOp::NotBool => sc::notbool(a),
        UnaryOp::Cast8U => sc::cast8unsigned(a),
        UnaryOp::Cast8S => sc::cast8signed(a),
        UnaryOp::Cast16U => sc::cast16unsigned(a),
        UnaryOp::Cast16S => sc::cast16signed(a),
        UnaryOp::NegF => float_op(Operation::NegF),
        UnaryOp::AbsF => float_op(Operation::AbsF),
        UnaryOp::SingleOfFloat => float_op(Operation::SingleOfFloat),
        UnaryOp::IntOfFloat => float_op(Operation::IntOfFloat),
        UnaryOp::IntUOfFloat => float_op(Operation::IntUOfFloat),
        UnaryOp::FloatOfInt => float_op(Operation::FloatOfInt),
        UnaryOp::FloatOfIntU => float_op(Operation::FloatOfIntU),
    }
}

pub fn sel_binop(op: BinaryOp, a: SelExpr, b: SelExpr) -> SelExpr {
    let plain = |o| SelExpr::Op(o, vec![a.clone(), b.clone()]);
    match op {
        BinaryOp::Add => sc::add(a, b),
        BinaryOp::Sub => sc::sub(a, b),
        BinaryOp::Mul => sc::mul(a, b),
        BinaryOp::Div => sc::div(a, b),
        BinaryOp::DivU => sc::divu(a, b),
        BinaryOp::Mod => sc::modulo(a, b),
        BinaryOp::ModU => sc::modu(a, b),
        BinaryOp::And => sc::and(a, b),
        BinaryOp::Or => sc::or(a, b),
        BinaryOp::Xor => sc::xor(a, b),
        BinaryOp::Shl => sc::shl(a, b),
        BinaryOp::Shr => sc::shr(a, b),
        BinaryOp::ShrU => sc::shru(a, b),
        BinaryOp::AddF => plain(Operation::AddF),
        BinaryOp::SubF => plain(Operation::SubF),
        BinaryOp::MulF => plain(Operation::MulF),
        BinaryOp::DivF => plain(Operation::DivF),
        BinaryOp::Cmp(c) => sc::cmp(c, a, b),
        BinaryOp::CmpU(c) => sc::cmpu(c, a, b),
        BinaryOp::CmpF(c) => sc::cmpf(c, a, b),
    }
}

struct Selector;

impl StmtTranslator<Cminor, Sel, Infallible> for Selector {
    fn expr(&mut self, e: &Expr) -> Result<SelExpr, Infallible> {
        Ok(sel_expr(e))
    }

    fn cond(&mut self, c: &Expr) -> Result<CondExpr, Infallible> {
        Ok(sc::cond(sel_expr(c)))
    }

    fn addr(&mut self, a: &Expr) -> Result<(Addressing, Vec<SelExpr>), Infallible> {
        Ok(sc::mode(sel_expr(a)))
    }

    fn callee(&mut self, c: &Expr) -> Result<Callee, Infallible> {
        Ok(match sel_expr(c) {
            SelExpr::Op(Operation::AddrSymbol(id, 0), args) if args.is_empty() => Callee::Symbol(id),
            e => Callee::Expr(e),
        })
    }
}

pub fn sel_function(f: &Function) -> SelFunction {
    let Ok(body) = f.body.map(&mut Selector);
    SelFunction { sig: f.sig.clone(), params: f.params.clone(), vars: f.vars.clone(), stacksize: f.stacksize, body }
}

pub fn sel_program(p: &CminorProgram) -> SelProgram {
    let Ok(q) = p.transform(|_, f| Ok::<_, Infallible>(sel_function(f)));
    q
}
