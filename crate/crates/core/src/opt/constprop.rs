//! Constant propagation: a forward analysis of which registers hold
//! statically known values, then a rewrite that folds operators, picks
//! immediate forms and addressing modes, and resolves static branches.
//! No node is inserted or deleted.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::base::{int, Genv, Ident, Value};
use crate::dataflow::{kildall_solve, Direction, JoinLattice, Lattice, Problem, Solution};
use crate::ops::{eval_condition, eval_op, Addressing, Comparison, Condition, F64Bits, Operation};
use crate::rtl::{FnRef, Instr, Node, Reg, RtlFunction};

#[derive(Clone, Debug, PartialEq)]
pub enum AVal {
    Bot,
    Int(i32),
    Float(F64Bits),
    /// Address of a global symbol plus an offset.
    Sym(Ident, i32),
    Top,
}

impl AVal {
    pub fn ge(&self, other: &AVal) -> bool {
        matches!((self, other), (AVal::Top, _) | (_, AVal::Bot)) || self == other
    }

    pub fn lub(&self, other: &AVal) -> AVal {
        match (self, other) {
            (AVal::Bot, x) | (x, AVal::Bot) => x.clone(),
            (a, b) if a == b => a.clone(),
            _ => AVal::Top,
        }
    }

    /// Whether the concrete value `v` is described by this abstraction.
    pub fn admits(&self, genv: &Genv, v: Value) -> bool {
        match self {
            AVal::Top => true,
            AVal::Bot => false,
            AVal::Int(n) => v == Value::Int(*n),
            AVal::Float(x) => v == Value::Float(x.get()),
            AVal::Sym(id, d) => genv.symbol_address(id, *d) == Some(v),
        }
    }
}

/// Abstract register environment; absent registers are top. `Bot` marks
/// unreachable points.
#[derive(Clone, Debug, PartialEq)]
pub enum AEnv {
    Bot,
    Map(BTreeMap<Reg, AVal>),
}

impl AEnv {
    pub fn top() -> AEnv {
        AEnv::Map(BTreeMap::new())
    }

    pub fn get(&self, r: Reg) -> AVal {
        match self {
            AEnv::Bot => AVal::Bot,
            AEnv::Map(m) => m.get(&r).cloned().unwrap_or(AVal::Top),
        }
    }

    pub fn set(&mut self, r: Reg, v: AVal) {
        if let AEnv::Map(m) = self {
            if v == AVal::Top {
                m.remove(&r);
            } else {
                m.insert(r, v);
            }
        }
    }
}

impl Lattice for AEnv {
    fn ge(&self, other: &AEnv) -> bool {
        match (self, other) {
            (_, AEnv::Bot) => true,
            (AEnv::Bot, _) => false,
            (AEnv::Map(a), AEnv::Map(_)) => a.iter().all(|(&r, v)| v.ge(&other.get(r))),
        }
    }
}

impl JoinLattice for AEnv {
    fn bot() -> AEnv {
        AEnv::Bot
    }

    fn lub(&self, other: &AEnv) -> AEnv {
        match (self, other) {
            (AEnv::Bot, x) | (x, AEnv::Bot) => x.clone(),
            (AEnv::Map(a), AEnv::Map(_)) => {
                AEnv::Map(a.iter().map(|(&r, v)| (r, v.lub(&other.get(r)))).filter(|(_, v)| *v != AVal::Top).collect())
            }
        }
    }
}

fn concrete(v: &AVal) -> Option<Value> {
    match v {
        AVal::Int(n) => Some(Value::Int(*n)),
        AVal::Float(x) => Some(Value::Float(x.get())),
        _ => None,
    }
}

fn abstr(v: Value) -> AVal {
    match v {
        Value::Int(n) => AVal::Int(n),
        Value::Float(x) => AVal::Float(F64Bits::new(x)),
        _ => AVal::Top,
    }
}

/// Abstract evaluation of an operator; undefined concrete results are top.
pub fn abstr_eval_op(op: &Operation, args: &[AVal]) -> AVal {
    if args.contains(&AVal::Bot) {
        return AVal::Bot;
    }
    match (op, args) {
        (Operation::Move, [a]) => return a.clone(),
        (Operation::AddrSymbol(id, d), []) => return AVal::Sym(id.clone(), *d),
        (Operation::AddImm(n), [AVal::Sym(id, d)]) => return AVal::Sym(id.clone(), d.wrapping_add(*n)),
        (Operation::Add, [AVal::Sym(id, d), AVal::Int(n)]) | (Operation::Add, [AVal::Int(n), AVal::Sym(id, d)]) => {
            return AVal::Sym(id.clone(), d.wrapping_add(*n))
        }
        (Operation::Sub, [AVal::Sym(id, d), AVal::Int(n)]) => return AVal::Sym(id.clone(), d.wrapping_sub(*n)),
        (Operation::Sub, [AVal::Sym(a, d1), AVal::Sym(b, d2)]) if a == b => return AVal::Int(d1.wrapping_sub(*d2)),
        _ => {}
    }
    let Some(vals) = args.iter().map(concrete).collect::<Option<Vec<Value>>>() else {
        return AVal::Top;
    };
    if matches!(op, Operation::AddrStack(_)) {
        return AVal::Top;
    }
    eval_op(&Genv::default(), Value::Undef, op, &vals).map_or(AVal::Top, abstr)
}

pub fn transfer(f: &RtlFunction, l: Node, a: &AEnv) -> AEnv {
    if *a == AEnv::Bot {
        return AEnv::Bot;
    }
    let mut out = a.clone();
    match f.code.get(&l) {
        Some(Instr::Op(op, args, d, _)) => {
            let vals: Vec<AVal> = args.iter().map(|&r| a.get(r)).collect();
            out.set(*d, abstr_eval_op(op, &vals));
        }
        Some(Instr::Load(.., d, _)) => out.set(*d, AVal::Top),
        Some(Instr::Call(.., Some(d), _)) => out.set(*d, AVal::Top),
        _ => {}
    }
    out
}

pub fn successor_map(f: &RtlFunction) -> BTreeMap<Node, Vec<Node>> {
    f.code.iter().map(|(&n, i)| (n, i.successors())).collect()
}

/// The analysis result, or `None` if the solver gave up.
pub fn analyze(f: &RtlFunction) -> Option<Solution<AEnv>> {
    let succs = successor_map(f);
    let t = |l: Node, a: &AEnv| transfer(f, l, a);
    let p = Problem {
        successors: &succs,
        transfer: &t,
        cstrs: vec![(f.entrypoint, AEnv::top())],
        direction: Direction::Forward,
    };
    kildall_solve(&p)
}

fn known_int(a: &AEnv, r: Reg) -> Option<i32> {
    match a.get(r) {
        AVal::Int(n) => Some(n),
        _ => None,
    }
}

/// Immediate forms for operators with a statically known argument.
fn specialize_op(op: &Operation, args: &[Reg], a: &AEnv) -> Option<(Operation, Vec<Reg>)> {
    use Operation as O;
    let k = |i: usize| known_int(a, args[i]);
    let one = |op: Operation, r: Reg| Some((op, vec![r]));
    match op {
        O::Add => match (k(0), k(1)) {
            (_, Some(n)) => one(O::AddImm(n), args[0]),
            (Some(n), _) => one(O::AddImm(n), args[1]),
            _ => None,
        },
        O::Sub => match (k(0), k(1)) {
            (_, Some(n)) => one(O::AddImm(n.wrapping_neg()), args[0]),
            (Some(n), _) => one(O::SubImm(n), args[1]),
            _ => None,
        },
        O::Mul => match (k(0), k(1)) {
            (_, Some(n)) => one(O::MulImm(n), args[0]),
            (Some(n), _) => one(O::MulImm(n), args[1]),
            _ => None,
        },
        O::And => match (k(0), k(1)) {
            (_, Some(n)) => one(O::Rolm(0, n), args[0]),
            (Some(n), _) => one(O::Rolm(0, n), args[1]),
            _ => None,
        },
        O::Or => match (k(0), k(1)) {
            (_, Some(n)) => one(O::OrImm(n), args[0]),
            (Some(n), _) => one(O::OrImm(n), args[1]),
            _ => None,
        },
        O::Xor => match (k(0), k(1)) {
            (_, Some(n)) => one(O::XorImm(n), args[0]),
            (Some(n), _) => one(O::XorImm(n), args[1]),
            _ => None,
        },
        O::Shl => k(1).and_then(|n| one(O::Rolm(n & 31, int::shl(-1, n)), args[0])),
        O::Shr => k(1).and_then(|n| one(O::ShrImm(n & 31), args[0])),
        O::ShrU => k(1).and_then(|n| one(O::Rolm((32 - (n & 31)) & 31, int::shru(-1, n)), args[0])),
        O::Cmp(c) => specialize_cond(c, args, a).map(|(c, rs)| (O::Cmp(c), rs)),
        _ => None,
    }
}

fn specialize_cond(c: &Condition, args: &[Reg], a: &AEnv) -> Option<(Condition, Vec<Reg>)> {
    let (cmp, imm): (Comparison, fn(Comparison, i32) -> Condition) = match c {
        Condition::Comp(cmp) => (*cmp, Condition::CompImm),
        Condition::CompU(cmp) => (*cmp, Condition::CompUImm),
        _ => return None,
    };
    match (known_int(a, args[0]), known_int(a, args[1])) {
        (_, Some(n)) => Some((imm(cmp, n), vec![args[0]])),
        (Some(n), _) => Some((imm(cmp.swap(), n), vec![args[1]])),
        _ => None,
    }
}

fn specialize_addr(mode: &Addressing, args: &[Reg], a: &AEnv) -> Option<(Addressing, Vec<Reg>)> {
    match (mode, args) {
        (Addressing::Indexed(n), [r]) => match a.get(*r) {
            AVal::Sym(id, d) => Some((Addressing::Global(id, d.wrapping_add(*n)), vec![])),
            _ => None,
        },
        (Addressing::Indexed2, [r1, r2]) => match (a.get(*r1), a.get(*r2)) {
            (_, AVal::Int(n)) => Some((Addressing::Indexed(n), vec![*r1])),
            (AVal::Int(n), _) => Some((Addressing::Indexed(n), vec![*r2])),
            (AVal::Sym(id, d), _) => Some((Addressing::Based(id, d), vec![*r2])),
            (_, AVal::Sym(id, d)) => Some((Addressing::Based(id, d), vec![*r1])),
            _ => None,
        },
        (Addressing::Based(id, d), [r]) => match a.get(*r) {
            AVal::Int(n) => Some((Addressing::Global(id.clone(), d.wrapping_add(n)), vec![])),
            _ => None,
        },
        _ => None,
    }
}

fn const_op(v: &AVal) -> Option<Operation> {
    match v {
        AVal::Int(n) => Some(Operation::IntConst(*n)),
        AVal::Float(x) => Some(Operation::FloatConst(*x)),
        AVal::Sym(id, d) => Some(Operation::AddrSymbol(id.clone(), *d)),
        _ => None,
    }
}

fn fnref(fr: &FnRef<Reg>, a: &AEnv) -> FnRef<Reg> {
    match fr {
        FnRef::Reg(r) => match a.get(*r) {
            AVal::Sym(id, 0) => FnRef::Symbol(id),
            _ => fr.clone(),
        },
        FnRef::Symbol(_) => fr.clone(),
    }
}

pub fn transform_instr(i: &Instr, a: &AEnv) -> Instr {
    if *a == AEnv::Bot {
        return i.clone();
    }
    match i {
        Instr::Op(op, args, d, s) => {
            let vals: Vec<AVal> = args.iter().map(|&r| a.get(r)).collect();
            if let Some(c) = const_op(&abstr_eval_op(op, &vals)) {
                return Instr::Op(c, vec![], *d, *s);
            }
            match specialize_op(op, args, a) {
                Some((op, args)) => Instr::Op(op, args, *d, *s),
                None => i.clone(),
            }
        }
        Instr::Load(chunk, mode, args, d, s) => match specialize_addr(mode, args, a) {
            Some((mode, args)) => Instr::Load(*chunk, mode, args, *d, *s),
            None => i.clone(),
        },
        Instr::Store(chunk, mode, args, src, s) => match specialize_addr(mode, args, a) {
            Some((mode, args)) => Instr::Store(*chunk, mode, args, *src, *s),
            None => i.clone(),
        },
        Instr::Cond(c, args, t, f) => {
            let vals: Option<Vec<Value>> = args.iter().map(|&r| concrete(&a.get(r))).collect();
            if let Some(b) = vals.and_then(|v| eval_condition(c, &v)) {
                return Instr::Nop(if b { *t } else { *f });
            }
            match specialize_cond(c, args, a) {
                Some((c, args)) => Instr::Cond(c, args, *t, *f),
                None => i.clone(),
            }
        }
        Instr::Call(sig, fr, args, d, s) => Instr::Call(sig.clone(), fnref(fr, a), args.clone(), *d, *s),
        Instr::Tailcall(sig, fr, args) => Instr::Tailcall(sig.clone(), fnref(fr, a), args.clone()),
        Instr::Nop(_) | Instr::Return(_) => i.clone(),
    }
}

/// Rewrites `f` under its analysis; the identity if the analysis fails.
pub fn constprop(f: &RtlFunction) -> RtlFunction {
    let Some(sol) = analyze(f) else {
        return f.clone();
    };
    let mut g = f.clone();
    for (n, i) in g.code.iter_mut() {
        *i = transform_instr(i, &sol[n]);
    }
    g
}

/// Checks at every step of a run that register values agree with the
/// analysis of the executing function. Returns the number of register
/// comparisons made.
pub fn check_agreement(p: &crate::rtl::RtlProgram, world: crate::base::World, fuel: u64) -> Result<usize, String> {
    use crate::base::{FunDef, Semantics};
    use crate::rtl::interp::RtlState;
    let interp = crate::rtl::RtlInterp::new(p)?;
    let analyses: BTreeMap<*const RtlFunction, Solution<AEnv>> = p
        .functions
        .iter()
        .filter_map(|(_, fd)| match fd {
            FunDef::Internal(f) => analyze(f).map(|s| (f as *const RtlFunction, s)),
            FunDef::External(_) => None,
        })
        .collect();
    let mut world = world;
    let Some(mut st) = interp.initial_state() else {
        return Ok(0);
    };
    let mut checks = 0;
    for _ in 0..fuel {
        if let RtlState::State { f, pc, regs, .. } = &st {
            if let Some(sol) = analyses.get(&(*f as *const RtlFunction)) {
                match &sol[pc] {
                    AEnv::Bot => return Err(alloc::format!("node {pc} reached but analysed as unreachable")),
                    AEnv::Map(m) => {
                        for (r, v) in m {
                            checks += 1;
                            if !v.admits(&interp.genv, regs.get(*r)) {
                                return Err(alloc::format!("node {pc}: x{r} = {} but analysed as {v:?}", regs.get(*r)));
                            }
                        }
                    }
                }
            }
        }
        match interp.step(st, &mut world) {
            Some((_, next)) => st = next,
            None => break,
        }
    }
    Ok(checks)
}
