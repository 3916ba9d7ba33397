//! Register type reconstruction: an untrusted unification-based inference
//! and a checker that validates its result.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{FnRef, Instr, Reg, RtlFunction};
use crate::base::Typ;
use crate::ops::OpType;

pub type RegTypes = BTreeMap<Reg, Typ>;

struct Unifier {
    parent: Vec<usize>,
    ty: Vec<Option<Typ>>,
}

impl Unifier {
    fn find(&mut self, r: Reg) -> usize {
        let mut i = r as usize;
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Conflicts are ignored here; the checker reports them.
    fn constrain(&mut self, r: Reg, t: Typ) {
        let i = self.find(r);
        self.ty[i].get_or_insert(t);
    }

    fn union(&mut self, a: Reg, b: Reg) {
        let (i, j) = (self.find(a), self.find(b));
        if i != j {
            self.parent[i] = j;
            if self.ty[j].is_none() {
                self.ty[j] = self.ty[i];
            }
        }
    }
}

fn constraints(f: &RtlFunction, mut c: impl FnMut(Reg, Typ), mut u: impl FnMut(Reg, Reg)) {
    for (&p, &t) in f.params.iter().zip(&f.sig.args) {
        c(p, t);
    }
    for i in f.code.values() {
        match i {
            Instr::Nop(_) => {}
            Instr::Op(op, args, d, _) => match op.typ() {
                OpType::Move => {
                    if let Some(&a) = args.first() {
                        u(a, *d);
                    }
                }
                OpType::Fixed(ts, t) => {
                    args.iter().zip(ts).for_each(|(&a, t)| c(a, t));
                    c(*d, t);
                }
            },
            Instr::Load(chunk, _, args, d, _) => {
                args.iter().for_each(|&a| c(a, Typ::Int));
                c(*d, chunk.typ());
            }
            Instr::Store(chunk, _, args, src, _) => {
                args.iter().for_each(|&a| c(a, Typ::Int));
                c(*src, chunk.typ());
            }
            Instr::Call(sig, fr, args, d, _) => {
                if let FnRef::Reg(r) = fr {
                    c(*r, Typ::Int);
                }
                args.iter().zip(&sig.args).for_each(|(&a, &t)| c(a, t));
                if let (Some(d), Some(t)) = (d, sig.res) {
                    c(*d, t);
                }
            }
            Instr::Tailcall(sig, fr, args) => {
                if let FnRef::Reg(r) = fr {
                    c(*r, Typ::Int);
                }
                args.iter().zip(&sig.args).for_each(|(&a, &t)| c(a, t));
            }
            Instr::Cond(cond, args, ..) => args.iter().zip(cond.arg_types()).for_each(|(&a, t)| c(a, t)),
            Instr::Return(Some(r)) => {
                if let Some(t) = f.sig.res {
                    c(*r, t);
                }
            }
            Instr::Return(None) => {}
        }
    }
}

/// Candidate types for registers `1..=max_reg`; unconstrained ones are int.
pub fn infer(f: &RtlFunction) -> RegTypes {
    let n = f.max_reg() as usize + 1;
    let uf = core::cell::RefCell::new(Unifier { parent: (0..n).collect(), ty: alloc::vec![None; n] });
    // Unify first so that constraints land on final representatives.
    constraints(f, |_, _| {}, |a, b| uf.borrow_mut().union(a, b));
    constraints(f, |r, t| uf.borrow_mut().constrain(r, t), |_, _| {});
    let mut uf = uf.into_inner();
    (1..n as Reg)
        .map(|r| {
            let i = uf.find(r);
            (r, uf.ty[i].unwrap_or(Typ::Int))
        })
        .collect()
}

/// Validates `env` against every instruction of `f`.
pub fn check(f: &RtlFunction, env: &RegTypes) -> Result<(), String> {
    let ty = |r: Reg| env.get(&r).copied().ok_or_else(|| format!("register x{r} has no type"));
    let expect = |r: Reg, t: Typ| -> Result<(), String> {
        let have = ty(r)?;
        if have == t {
            Ok(())
        } else {
            Err(format!("register x{r} has type {have}, expected {t}"))
        }
    };
    let expect_all = |rs: &[Reg], ts: &[Typ]| -> Result<(), String> {
        if rs.len() != ts.len() {
            return Err(format!("{} arguments for {} parameters", rs.len(), ts.len()));
        }
        rs.iter().zip(ts).try_for_each(|(&r, &t)| expect(r, t))
    };
    expect_all(&f.params, &f.sig.args)?;
    for (n, i) in &f.code {
        let at = |e: String| format!("node {n}: {e}");
        match i {
            Instr::Nop(_) => Ok(()),
            Instr::Op(op, args, d, _) => match op.typ() {
                OpType::Move => {
                    if args.len() != 1 {
                        Err(String::from("move takes one argument"))
                    } else {
                        expect(*d, ty(args[0])?)
                    }
                }
                OpType::Fixed(ts, t) => expect_all(args, &ts).and_then(|_| expect(*d, t)),
            },
            Instr::Load(chunk, mode, args, d, _) => {
                let ints = alloc::vec![Typ::Int; mode.arity()];
                expect_all(args, &ints).and_then(|_| expect(*d, chunk.typ()))
            }
            Instr::Store(chunk, mode, args, src, _) => {
                let ints = alloc::vec![Typ::Int; mode.arity()];
                expect_all(args, &ints).and_then(|_| expect(*src, chunk.typ()))
            }
            Instr::Call(sig, fr, args, d, _) => {
                fr.reg().map_or(Ok(()), |r| expect(r, Typ::Int))?;
                expect_all(args, &sig.args)?;
                match (d, sig.res) {
                    (Some(d), Some(t)) => expect(*d, t),
                    (Some(_), None) => Err(String::from("result of a void call is used")),
                    (None, _) => Ok(()),
                }
            }
            Instr::Tailcall(sig, fr, args) => {
                fr.reg().map_or(Ok(()), |r| expect(r, Typ::Int))?;
                expect_all(args, &sig.args)?;
                if sig.res != f.sig.res {
                    Err(String::from("tail call changes the result type"))
                } else {
                    Ok(())
                }
            }
            Instr::Cond(cond, args, ..) => expect_all(args, &cond.arg_types()),
            Instr::Return(Some(r)) => match f.sig.res {
                Some(t) => expect(*r, t),
                None => Err(String::from("void function returns a value")),
            },
            Instr::Return(None) => Ok(()),
        }
        .map_err(at)?;
    }
    Ok(())
}

/// Inference followed by validation.
pub fn type_function(f: &RtlFunction) -> Result<RegTypes, String> {
    let env = infer(f);
    check(f, &env)?;
    Ok(env)
}
