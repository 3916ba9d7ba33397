//! The machine: a register file (integer, float, condition bits, PC, LR,
//! CTR) and a memory. Instruction `n` of the function in block `b` sits at
//! address `ptr(b, n)`. Jumping to an external function's block performs
//! the call and returns to `LR`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::ast::{find_label, AsmFunction, AsmProgram, CrBit, Imm, Instr};
use crate::base::int::{self, low};
use crate::base::{cast, globalenv, Chunk, Event, FunDef, Genv, Mem, Semantics, Value, World};
use crate::locs::{loc_arguments, loc_result, Loc, MReg};
use crate::mach::interp::NULL;
use crate::mach::layout::outgoing_ofs;
use crate::ops::{cmp_float, cmp_signed, cmp_unsigned, int_of_float, intu_of_float, val_add, val_sub, Comparison};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PReg {
    G(MReg),
    Cr(CrBit),
    Pc,
    Lr,
    Ctr,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Regs(BTreeMap<PReg, Value>);

impl Regs {
    pub fn get(&self, r: PReg) -> Value {
        self.0.get(&r).copied().unwrap_or(Value::Undef)
    }

    pub fn set(&mut self, r: PReg, v: Value) {
        if v == Value::Undef {
            self.0.remove(&r);
        } else {
            self.0.insert(r, v);
        }
    }

    pub fn gpr(&self, r: MReg) -> Value {
        self.get(PReg::G(r))
    }

    /// `R0` reads as zero in address and immediate-add positions.
    fn gpr_or_zero(&self, r: MReg) -> Value {
        if r == MReg::R(0) {
            Value::Int(0)
        } else {
            self.gpr(r)
        }
    }

    pub fn set_gpr(&mut self, r: MReg, v: Value) {
        self.set(PReg::G(r), v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PReg, &Value)> {
        self.0.iter()
    }
}

#[derive(Clone, Debug)]
pub struct MachineState {
    pub regs: Regs,
    pub mem: Mem,
}

fn int(v: Value) -> Option<i32> {
    match v {
        Value::Int(n) => Some(n),
        _ => None,
    }
}

fn float(v: Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(x),
        _ => None,
    }
}

fn int_op(f: impl Fn(i32, i32) -> i32, a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Value::Int(f(x, y)),
        _ => Value::Undef,
    }
}

fn float_op(f: impl Fn(f64, f64) -> f64, a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) => Value::Float(f(x, y)),
        _ => Value::Undef,
    }
}

fn bit(b: Option<bool>) -> Value {
    b.map_or(Value::Undef, Value::from_bool)
}

pub struct AsmSim<'a> {
    pub prog: &'a AsmProgram,
    pub genv: Genv,
    init_mem: Mem,
}

impl<'a> AsmSim<'a> {
    pub fn new(prog: &'a AsmProgram) -> Result<Self, alloc::string::String> {
        let (genv, init_mem) = globalenv(prog)?;
        Ok(AsmSim { prog, genv, init_mem })
    }

    fn imm(&self, i: &Imm) -> Option<Value> {
        Some(match i {
            Imm::Cst(n) => Value::Int(*n),
            Imm::Hi(id, d) => self.genv.symbol_address(id, d.wrapping_sub(low(*d)))?,
            Imm::Lo(_, d) => Value::Int(low(*d)),
        })
    }

    /// Immediate of `addis`: constants are shifted, symbol halves are not.
    fn imm_shifted(&self, i: &Imm) -> Option<Value> {
        match i {
            Imm::Cst(n) => Some(Value::Int(n.wrapping_shl(16))),
            _ => self.imm(i),
        }
    }

    fn compare(r: &mut Regs, cmp: impl Fn(Comparison) -> Option<bool>) {
        r.set(PReg::Cr(CrBit::Lt), bit(cmp(Comparison::Lt)));
        r.set(PReg::Cr(CrBit::Gt), bit(cmp(Comparison::Gt)));
        r.set(PReg::Cr(CrBit::Eq), bit(cmp(Comparison::Eq)));
    }

    fn branch(&self, f: &AsmFunction, b: i32, l: u32) -> Option<Value> {
        Some(Value::Ptr(b, find_label(&f.code, l)? as i32))
    }

    /// One internal instruction; `None` when stuck.
    fn exec(&self, f: &AsmFunction, b: i32, n: i32, st: &mut MachineState) -> Option<()> {
        let r = &mut st.regs;
        let mem = &mut st.mem;
        let next = Value::Ptr(b, n + 1);
        let mut pc = next;
        let g = |r: &Regs, x: MReg| r.gpr(x);
        match f.code.get(usize::try_from(n).ok()?)? {
            Instr::Add(d, a, c) => r.set_gpr(*d, val_add(g(r, *a), g(r, *c)).unwrap_or(Value::Undef)),
            Instr::Addi(d, a, i) => r.set_gpr(*d, val_add(r.gpr_or_zero(*a), self.imm(i)?).unwrap_or(Value::Undef)),
            Instr::Addis(d, a, i) => {
                r.set_gpr(*d, val_add(r.gpr_or_zero(*a), self.imm_shifted(i)?).unwrap_or(Value::Undef))
            }
            Instr::Subfc(d, a, c) => r.set_gpr(*d, val_sub(g(r, *c), g(r, *a)).unwrap_or(Value::Undef)),
            Instr::Subfic(d, a, k) => r.set_gpr(*d, int_op(|x, y| y.wrapping_sub(x), g(r, *a), Value::Int(*k))),
            Instr::Mullw(d, a, c) => r.set_gpr(*d, int_op(i32::wrapping_mul, g(r, *a), g(r, *c))),
            Instr::Mulli(d, a, k) => r.set_gpr(*d, int_op(i32::wrapping_mul, g(r, *a), Value::Int(*k))),
            Instr::Divw(d, a, c) => r.set_gpr(*d, Value::Int(int::divs(int(g(r, *a))?, int(g(r, *c))?)?)),
            Instr::Divwu(d, a, c) => r.set_gpr(*d, Value::Int(int::divu(int(g(r, *a))?, int(g(r, *c))?)?)),
            Instr::And(d, a, c) => r.set_gpr(*d, int_op(|x, y| x & y, g(r, *a), g(r, *c))),
            Instr::Or(d, a, c) => r.set_gpr(*d, int_op(|x, y| x | y, g(r, *a), g(r, *c))),
            Instr::Xor(d, a, c) => r.set_gpr(*d, int_op(|x, y| x ^ y, g(r, *a), g(r, *c))),
            Instr::Ori(d, a, k) => r.set_gpr(*d, int_op(|x, y| x | y, g(r, *a), Value::Int(*k & 0xFFFF))),
            Instr::Oris(d, a, k) => r.set_gpr(*d, int_op(|x, y| x | y, g(r, *a), Value::Int(k.wrapping_shl(16)))),
            Instr::Xori(d, a, k) => r.set_gpr(*d, int_op(|x, y| x ^ y, g(r, *a), Value::Int(*k & 0xFFFF))),
            Instr::Xoris(d, a, k) => r.set_gpr(*d, int_op(|x, y| x ^ y, g(r, *a), Value::Int(k.wrapping_shl(16)))),
            Instr::Slw(d, a, c) => r.set_gpr(*d, int_op(int::shl, g(r, *a), g(r, *c))),
            Instr::Sraw(d, a, c) => r.set_gpr(*d, int_op(int::shr, g(r, *a), g(r, *c))),
            Instr::Srawi(d, a, k) => r.set_gpr(*d, int_op(int::shr, g(r, *a), Value::Int(*k))),
            Instr::Srw(d, a, c) => r.set_gpr(*d, int_op(int::shru, g(r, *a), g(r, *c))),
            Instr::Rlwinm(d, a, k, m) => r.set_gpr(*d, int_op(|x, _| int::rolm(x, *k, *m), g(r, *a), Value::Int(0))),
            Instr::Extsb(d, a) => r.set_gpr(*d, int_op(|x, _| int::sign_ext(x, 8), g(r, *a), Value::Int(0))),
            Instr::Extsh(d, a) => r.set_gpr(*d, int_op(|x, _| int::sign_ext(x, 16), g(r, *a), Value::Int(0))),
            Instr::Mr(d, a) | Instr::Fmr(d, a) => r.set_gpr(*d, g(r, *a)),
            Instr::Load(op, d, i, a) => {
                let addr = val_add(r.gpr_or_zero(*a), self.imm(i)?)?;
                r.set_gpr(*d, mem.loadv(op.chunk(), addr)?);
            }
            Instr::LoadX(op, d, a, c) => {
                let addr = val_add(r.gpr_or_zero(*a), g(r, *c))?;
                r.set_gpr(*d, mem.loadv(op.chunk(), addr)?);
            }
            Instr::Store(op, s, i, a) => {
                let addr = val_add(r.gpr_or_zero(*a), self.imm(i)?)?;
                mem.storev(op.chunk(), addr, g(r, *s))?;
            }
            Instr::StoreX(op, s, a, c) => {
                let addr = val_add(r.gpr_or_zero(*a), g(r, *c))?;
                mem.storev(op.chunk(), addr, g(r, *s))?;
            }
            Instr::Fadd(d, a, c) => r.set_gpr(*d, float_op(|x, y| x + y, g(r, *a), g(r, *c))),
            Instr::Fsub(d, a, c) => r.set_gpr(*d, float_op(|x, y| x - y, g(r, *a), g(r, *c))),
            Instr::Fmul(d, a, c) => r.set_gpr(*d, float_op(|x, y| x * y, g(r, *a), g(r, *c))),
            Instr::Fdiv(d, a, c) => r.set_gpr(*d, float_op(|x, y| x / y, g(r, *a), g(r, *c))),
            Instr::Fneg(d, a) => r.set_gpr(*d, float(g(r, *a)).map_or(Value::Undef, |x| Value::Float(-x))),
            Instr::Fabs(d, a) => r.set_gpr(*d, float(g(r, *a)).map_or(Value::Undef, |x| Value::Float(x.abs()))),
            Instr::Frsp(d, a) => r.set_gpr(*d, cast(g(r, *a), Chunk::Float32)),
            Instr::Cmpw(a, c) => {
                let (x, y) = (g(r, *a), g(r, *c));
                Self::compare(r, |k| cmp_signed(k, x, y));
            }
            Instr::Cmpwi(a, k) => {
                let x = g(r, *a);
                Self::compare(r, |c| cmp_signed(c, x, Value::Int(*k)));
            }
            Instr::Cmplw(a, c) => {
                let (x, y) = (g(r, *a), g(r, *c));
                Self::compare(r, |k| cmp_unsigned(k, x, y));
            }
            Instr::Cmplwi(a, k) => {
                let x = g(r, *a);
                Self::compare(r, |c| cmp_unsigned(c, x, Value::Int(*k & 0xFFFF)));
            }
            Instr::Fcmpu(a, c) => {
                let (x, y) = (g(r, *a), g(r, *c));
                Self::compare(r, |k| cmp_float(k, x, y));
                let un = match (x, y) {
                    (Value::Float(p), Value::Float(q)) => Some(p.is_nan() || q.is_nan()),
                    _ => None,
                };
                r.set(PReg::Cr(CrBit::So), bit(un));
            }
            Instr::Cror(d, a, c) => {
                let v = match (r.get(PReg::Cr(*a)), r.get(PReg::Cr(*c))) {
                    (Value::Int(x), Value::Int(y)) => Value::Int(x | y),
                    _ => Value::Undef,
                };
                r.set(PReg::Cr(*d), v);
            }
            Instr::B(l) => pc = self.branch(f, b, *l)?,
            Instr::Bt(c, l) | Instr::Bf(c, l) => {
                let want = matches!(f.code[n as usize], Instr::Bt(..)) as i32;
                match r.get(PReg::Cr(*c)) {
                    Value::Int(x) if x == want => pc = self.branch(f, b, *l)?,
                    Value::Int(_) => {}
                    _ => return None,
                }
            }
            Instr::Bl(id) => {
                r.set(PReg::Lr, next);
                pc = self.genv.symbol_address(id, 0)?;
            }
            Instr::Bs(id) => pc = self.genv.symbol_address(id, 0)?,
            Instr::Blr => pc = r.get(PReg::Lr),
            Instr::Bctr => pc = r.get(PReg::Ctr),
            Instr::Bctrl => {
                pc = r.get(PReg::Ctr);
                r.set(PReg::Lr, next);
            }
            Instr::Mflr(d) => r.set_gpr(*d, r.get(PReg::Lr)),
            Instr::Mtlr(s) => r.set(PReg::Lr, g(r, *s)),
            Instr::Mtctr(s) => r.set(PReg::Ctr, g(r, *s)),
            Instr::Label(_) => {}
            Instr::Allocframe(lo, hi, link, ra) => {
                let nb = mem.alloc(*lo, *hi);
                let sp = Value::Ptr(nb, 0);
                mem.storev(Chunk::Int32, Value::Ptr(nb, *link), g(r, MReg::R(1)))?;
                mem.storev(Chunk::Int32, Value::Ptr(nb, *ra), r.get(PReg::Lr))?;
                r.set_gpr(MReg::R(1), sp);
            }
            Instr::Freeframe(link) => {
                let Value::Ptr(sb, o) = g(r, MReg::R(1)) else {
                    return None;
                };
                let parent = mem.loadv(Chunk::Int32, Value::Ptr(sb, o.wrapping_add(*link)))?;
                mem.free(sb);
                r.set_gpr(MReg::R(1), parent);
            }
            Instr::Lfi(d, x) => r.set_gpr(*d, Value::Float(x.get())),
            Instr::Fcti(d, a) => r.set_gpr(*d, float(g(r, *a)).map_or(Value::Undef, |x| Value::Int(int_of_float(x)))),
            Instr::Fctiu(d, a) => r.set_gpr(*d, float(g(r, *a)).map_or(Value::Undef, |x| Value::Int(intu_of_float(x)))),
            Instr::Ictf(d, a) => r.set_gpr(*d, int(g(r, *a)).map_or(Value::Undef, |x| Value::Float(x as f64))),
            Instr::Iuctf(d, a) => r.set_gpr(*d, int(g(r, *a)).map_or(Value::Undef, |x| Value::Float(x as u32 as f64))),
            Instr::Mfcrbit(d, c) => r.set_gpr(*d, r.get(PReg::Cr(*c))),
        }
        r.set(PReg::Pc, pc);
        Some(())
    }
}

impl<'a> Semantics for AsmSim<'a> {
    type State = MachineState;

    fn initial_state(&self) -> Option<MachineState> {
        let main = self.genv.symbol_address(&self.prog.main, 0)?;
        let fd = self.genv.find_funct(main)?;
        let FunDef::Internal(f) = &self.prog.functions[fd].1 else {
            return None;
        };
        if !f.sig.args.is_empty() {
            return None;
        }
        let mut regs = Regs::default();
        regs.set(PReg::Pc, main);
        regs.set(PReg::Lr, NULL);
        regs.set_gpr(MReg::R(1), NULL);
        Some(MachineState { regs, mem: self.init_mem.clone() })
    }

    fn step(&self, mut st: MachineState, world: &mut World) -> Option<(Option<Event>, MachineState)> {
        let Value::Ptr(b, n) = st.regs.get(PReg::Pc) else {
            return None;
        };
        let fd = self.genv.find_funct(Value::Ptr(b, 0))?;
        match &self.prog.functions[fd].1 {
            FunDef::Internal(f) => {
                self.exec(f, b, n, &mut st)?;
                Some((None, st))
            }
            FunDef::External(ef) => {
                if n != 0 {
                    return None;
                }
                let sp = st.regs.gpr(MReg::R(1));
                let mut args = Vec::new();
                for l in loc_arguments(&ef.sig) {
                    args.push(match l {
                        Loc::Reg(r) => st.regs.gpr(r),
                        Loc::Slot(s) => {
                            st.mem.loadv(Chunk::of_typ(s.ty), val_add(sp, Value::Int(outgoing_ofs(s.ty, s.ofs)))?)?
                        }
                    });
                }
                let (ev, v) = world.call(ef, &args)?;
                if let Some(r) = loc_result(&ef.sig) {
                    st.regs.set_gpr(r, v);
                }
                let lr = st.regs.get(PReg::Lr);
                st.regs.set(PReg::Pc, lr);
                Some((Some(ev), st))
            }
        }
    }

    fn final_state(&self, st: &MachineState) -> Option<i32> {
        if st.regs.get(PReg::Pc) != NULL {
            return None;
        }
        int(st.regs.gpr(MReg::R(3)))
    }
}
