//! Randomized soundness check of the smart constructors: a selected
//! expression must evaluate to the value of its Cminor original whenever the
//! original is defined.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::eval_expr as eval_sel;
use super::select::sel_expr;
use crate::base::{globalenv, int, Chunk, Genv, GlobalVar, InitData, Mem, Program, Typ, Value};
use crate::cminor::ast::eval_expr as eval_cm;
use crate::cminor::typing::{binop_type, unop_type};
use crate::cminor::{BinaryOp, Const, Expr, Function, UnaryOp};
use crate::ops::{Comparison, F64Bits};
use crate::structured::{Ctx, Env};

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub trials: usize,
    /// Trials where the original expression was defined.
    pub defined: usize,
    pub failures: Vec<String>,
}

const INT_VARS: [&str; 3] = ["a", "b", "p"];
const FLOAT_VARS: [&str; 2] = ["f", "h"];

#[derive(Clone, Copy, PartialEq)]
enum Ty {
    Int,
    Float,
}

struct Ground {
    genv: Genv,
    mem: Mem,
    sp: Value,
    gblock: i32,
}

fn ground() -> Ground {
    let p: Program<Function> = Program {
        globals: vec![GlobalVar {
            name: "g".into(),
            init: vec![InitData::Int32(7), InitData::Int32(-3), InitData::Int32(1 << 20), InitData::Int32(0)],
        }],
        functions: vec![],
        main: "main".into(),
    };
    let (genv, mut mem) = globalenv(&p).expect("fixed global environment");
    let gblock = genv.find_symbol("g").expect("g is declared");
    let sb = mem.alloc(0, 16);
    for i in 0..4 {
        mem.store(Chunk::Int32, sb, i * 4, Value::Int(i * 11 - 5));
    }
    Ground { genv, mem, sp: Value::Ptr(sb, 0), gblock }
}

fn int_value(rng: &mut ChaCha8Rng) -> i32 {
    const EDGES: [i32; 16] = [0, 1, -1, 2, 3, 4, 7, 8, 16, 29, 31, 32, 255, 0xFFFF, i32::MIN, i32::MAX];
    match rng.gen_range(0..3) {
        0 => EDGES[rng.gen_range(0..EDGES.len())],
        1 => rng.gen_range(-100..100),
        _ => rng.gen(),
    }
}

fn comparison(rng: &mut ChaCha8Rng) -> Comparison {
    Comparison::ALL[rng.gen_range(0..Comparison::ALL.len())]
}

fn leaf(rng: &mut ChaCha8Rng, ty: Ty) -> Expr {
    match (ty, rng.gen_range(0..8)) {
        (Ty::Int, 0..=3) => Expr::var(INT_VARS[rng.gen_range(0..INT_VARS.len())]),
        (Ty::Int, 4..=6) => Expr::int(int_value(rng)),
        (Ty::Int, _) => Expr::Const(Const::AddrSymbol("g".into())),
        (Ty::Float, 0..=4) => Expr::var(FLOAT_VARS[rng.gen_range(0..FLOAT_VARS.len())]),
        (Ty::Float, _) => Expr::Const(Const::Float(F64Bits::new(rng.gen_range(-100.0..100.0)))),
    }
}

fn int_binop(rng: &mut ChaCha8Rng) -> BinaryOp {
    let ops: Vec<BinaryOp> = BinaryOp::all()
        .filter(|op| binop_type(*op).0 == Typ::Int && !matches!(op, BinaryOp::Cmp(_) | BinaryOp::CmpU(_)))
        .collect();
    ops[rng.gen_range(0..ops.len())]
}

fn random_comparison(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let c = comparison(rng);
    match rng.gen_range(0..3) {
        0 => Expr::binop(BinaryOp::Cmp(c), random_typed(rng, depth, Ty::Int), random_typed(rng, depth, Ty::Int)),
        1 => Expr::binop(BinaryOp::CmpU(c), random_typed(rng, depth, Ty::Int), random_typed(rng, depth, Ty::Int)),
        _ => Expr::binop(BinaryOp::CmpF(c), random_typed(rng, depth, Ty::Float), random_typed(rng, depth, Ty::Float)),
    }
}

/// A random well-typed expression of depth at most `depth`; pointer
/// arithmetic and undefined operations remain possible.
fn random_typed(rng: &mut ChaCha8Rng, depth: u32, ty: Ty) -> Expr {
    if depth == 0 || rng.gen_range(0..6) == 0 {
        return leaf(rng, ty);
    }
    let d = depth - 1;
    let k = rng.gen_range(0..10);
    match ty {
        Ty::Int => match k {
            0 => {
                let ops = [
                    UnaryOp::NegInt,
                    UnaryOp::NotInt,
                    UnaryOp::NotBool,
                    UnaryOp::Cast8U,
                    UnaryOp::Cast8S,
                    UnaryOp::Cast16U,
                    UnaryOp::Cast16S,
                ];
                Expr::unop(ops[rng.gen_range(0..ops.len())], random_typed(rng, d, Ty::Int))
            }
            1 => Expr::unop(
                if rng.gen_bool(0.5) { UnaryOp::IntOfFloat } else { UnaryOp::IntUOfFloat },
                random_typed(rng, d, Ty::Float),
            ),
            2 => {
                let base = if rng.gen_bool(0.5) {
                    Expr::Const(Const::AddrSymbol("g".into()))
                } else {
                    Expr::Const(Const::AddrStack(0))
                };
                let index = Expr::binop(BinaryOp::And, random_typed(rng, d, Ty::Int), Expr::int(12));
                let chunk = [Chunk::Int32, Chunk::Int8U, Chunk::Int16S][rng.gen_range(0..3)];
                Expr::Load(chunk, Box::new(Expr::binop(BinaryOp::Add, base, index)))
            }
            3 => Expr::Cond(
                Box::new(random_comparison(rng, d)),
                Box::new(random_typed(rng, d, Ty::Int)),
                Box::new(random_typed(rng, d, Ty::Int)),
            ),
            4 => random_comparison(rng, d),
            _ => Expr::binop(int_binop(rng), random_typed(rng, d, Ty::Int), random_typed(rng, d, Ty::Int)),
        },
        Ty::Float => match k {
            0 => {
                let ops = [UnaryOp::NegF, UnaryOp::AbsF, UnaryOp::SingleOfFloat];
                Expr::unop(ops[rng.gen_range(0..ops.len())], random_typed(rng, d, Ty::Float))
            }
            1 => Expr::unop(
                if rng.gen_bool(0.5) { UnaryOp::FloatOfInt } else { UnaryOp::FloatOfIntU },
                random_typed(rng, d, Ty::Int),
            ),
            _ => {
                let ops = [BinaryOp::AddF, BinaryOp::SubF, BinaryOp::MulF, BinaryOp::DivF];
                Expr::binop(
                    ops[rng.gen_range(0..ops.len())],
                    random_typed(rng, d, Ty::Float),
                    random_typed(rng, d, Ty::Float),
                )
            }
        },
    }
}

/// A random expression of depth at most `depth`, of either type.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let ty = if rng.gen_bool(0.8) { Ty::Int } else { Ty::Float };
    random_typed(rng, depth, ty)
}

fn compare(g: &Ground, env: &Env, e: &Expr, report: &mut CheckReport) {
    let ctx = Ctx { genv: &g.genv, sp: g.sp, env, mem: &g.mem };
    report.trials += 1;
    let Some(expected) = eval_cm(&ctx, e) else {
        return;
    };
    report.defined += 1;
    let sel = sel_expr(e);
    let got = eval_sel(&ctx, &sel);
    if got != Some(expected) && report.failures.len() < 10 {
        report.failures.push(format!("{e:?} in {env:?}: expected {expected}, selected {sel} gave {got:?}"));
    }
}

fn random_env(rng: &mut ChaCha8Rng, g: &Ground) -> Env {
    let mut env = BTreeMap::new();
    env.insert("a".into(), Value::Int(int_value(rng)));
    env.insert("b".into(), Value::Int(int_value(rng)));
    let p = match rng.gen_range(0..4) {
        0 => Value::Ptr(g.gblock, rng.gen_range(0..4) * 4),
        1 => Value::Undef,
        _ => Value::Int(int_value(rng)),
    };
    env.insert("p".into(), p);
    env.insert("f".into(), Value::Float(rng.gen_range(-1e6..1e6)));
    env.insert("h".into(), Value::Float([0.0, -0.0, 1.5, f64::NAN, 1e10][rng.gen_range(0..5)]));
    env
}

type RootGen = Box<dyn Fn(&mut ChaCha8Rng) -> Expr>;

/// For every Cminor operator, `trials` random evaluations with that operator
/// at the root of a random expression.
pub fn check_operators(seed: u64, trials: usize) -> CheckReport {
    let g = ground();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::default();
    let mut roots: Vec<RootGen> = Vec::new();
    for op in BinaryOp::all() {
        roots.push(Box::new(move |rng: &mut ChaCha8Rng| {
            let ty = if binop_type(op).0 == Typ::Int { Ty::Int } else { Ty::Float };
            let (a, b) = (random_typed(rng, 2, ty), random_typed(rng, 2, ty));
            // Immediate forms need a constant operand often enough.
            let (a, b) = match (ty, rng.gen_range(0..5)) {
                (Ty::Int, 0) => (Expr::int(int_value(rng)), b),
                (Ty::Int, 1) => (a, Expr::int(int_value(rng))),
                _ => (a, b),
            };
            Expr::binop(op, a, b)
        }));
    }
    for op in UnaryOp::ALL {
        let ty = if unop_type(op).0 == Typ::Int { Ty::Int } else { Ty::Float };
        roots.push(Box::new(move |rng: &mut ChaCha8Rng| Expr::unop(op, random_typed(rng, 2, ty))));
    }
    for root in &roots {
        for _ in 0..trials {
            let e = root(&mut rng);
            let env = random_env(&mut rng, &g);
            compare(&g, &env, &e, &mut report);
        }
    }
    report
}

/// `rolm(rolm(x, n1, m1), n2, m2) = rolm(x, n1 + n2, rol(m1, n2) & m2)` on
/// random inputs, and the same through the constructor.
pub fn check_rolm_law(seed: u64, trials: usize) -> CheckReport {
    let g = ground();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::default();
    for _ in 0..trials {
        let (x, m1, m2): (i32, i32, i32) = (rng.gen(), rng.gen(), rng.gen());
        let (n1, n2) = (rng.gen_range(0..32), rng.gen_range(0..32));
        report.trials += 1;
        report.defined += 1;
        let lhs = int::rolm(int::rolm(x, n1, m1), n2, m2);
        let rhs = int::rolm(x, n1 + n2, int::rol(m1, n2) & m2);
        let built = super::smart::rolm(n2, m2, super::smart::rolm(n1, m1, super::ast::SelExpr::Var("a".into())));
        let mut env = Env::new();
        env.insert("a".into(), Value::Int(x));
        let ctx = Ctx { genv: &g.genv, sp: g.sp, env: &env, mem: &g.mem };
        let got = eval_sel(&ctx, &built);
        if (lhs != rhs || got != Some(Value::Int(lhs))) && report.failures.len() < 10 {
            report
                .failures
                .push(format!("x={x:#x} n1={n1} m1={m1:#x} n2={n2} m2={m2:#x}: {lhs:#x} vs {rhs:#x}, built {got:?}"));
        }
    }
    report
}
