//! CminorSel: Cminor with machine operators, addressing modes and
//! condition expressions.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::base::{Chunk, Ident, Program, Value};
use crate::ops::{eval_addressing, eval_condition, eval_op, Addressing, Condition, Operation};
use crate::structured::{self, Ctx, Lang};

#[derive(Clone, Debug, PartialEq)]
pub enum SelExpr {
    Var(Ident),
    Op(Operation, Vec<SelExpr>),
    Load(Chunk, Addressing, Vec<SelExpr>),
    Condition(Box<CondExpr>, Box<SelExpr>, Box<SelExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CondExpr {
    True,
    False,
    Cond(Condition, Vec<SelExpr>),
    Conditional(Box<CondExpr>, Box<CondExpr>, Box<CondExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Callee {
    Symbol(Ident),
    Expr(SelExpr),
}

impl SelExpr {
    pub fn op(op: Operation, args: Vec<SelExpr>) -> SelExpr {
        SelExpr::Op(op, args)
    }

    pub fn int(n: i32) -> SelExpr {
        SelExpr::Op(Operation::IntConst(n), Vec::new())
    }

    pub fn as_int(&self) -> Option<i32> {
        match self {
            SelExpr::Op(Operation::IntConst(n), args) if args.is_empty() => Some(*n),
            _ => None,
        }
    }
}

pub fn eval_expr(ctx: &Ctx<'_>, e: &SelExpr) -> Option<Value> {
    match e {
        SelExpr::Var(x) => ctx.env.get(x).copied(),
        SelExpr::Op(op, args) => eval_op(ctx.genv, ctx.sp, op, &eval_list(ctx, args)?),
        SelExpr::Load(chunk, mode, args) => {
            let addr = eval_addressing(ctx.genv, ctx.sp, mode, &eval_list(ctx, args)?)?;
            ctx.mem.loadv(*chunk, addr)
        }
        SelExpr::Condition(c, a, b) => {
            if eval_cond(ctx, c)? {
                eval_expr(ctx, a)
            } else {
                eval_expr(ctx, b)
            }
        }
    }
}

pub fn eval_list(ctx: &Ctx<'_>, es: &[SelExpr]) -> Option<Vec<Value>> {
    es.iter().map(|e| eval_expr(ctx, e)).collect()
}

pub fn eval_cond(ctx: &Ctx<'_>, c: &CondExpr) -> Option<bool> {
    match c {
        CondExpr::True => Some(true),
        CondExpr::False => Some(false),
        CondExpr::Cond(cond, args) => eval_condition(cond, &eval_list(ctx, args)?),
        CondExpr::Conditional(c1, c2, c3) => {
            if eval_cond(ctx, c1)? {
                eval_cond(ctx, c2)
            } else {
                eval_cond(ctx, c3)
            }
        }
    }
}

/// Marker for the CminorSel instance of the structured language.
#[derive(Clone, Debug, PartialEq)]
pub struct Sel;

impl Lang for Sel {
    type Expr = SelExpr;
    type Cond = CondExpr;
    type Addr = (Addressing, Vec<SelExpr>);
    type Callee = Callee;

    fn eval_expr(ctx: &Ctx<'_>, e: &SelExpr) -> Option<Value> {
        eval_expr(ctx, e)
    }

    fn eval_cond(ctx: &Ctx<'_>, c: &CondExpr) -> Option<bool> {
        eval_cond(ctx, c)
    }

    fn eval_addr(ctx: &Ctx<'_>, (mode, args): &(Addressing, Vec<SelExpr>)) -> Option<Value> {
        eval_addressing(ctx.genv, ctx.sp, mode, &eval_list(ctx, args)?)
    }

    fn eval_callee(ctx: &Ctx<'_>, c: &Callee) -> Option<Value> {
        match c {
            Callee::Symbol(id) => ctx.genv.symbol_address(id, 0),
            Callee::Expr(e) => eval_expr(ctx, e),
        }
    }
}

pub type SelStmt = structured::Stmt<Sel>;
pub type SelFunction = structured::Function<Sel>;
pub type SelProgram = Program<SelFunction>;
