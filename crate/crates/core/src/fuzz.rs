//! Random Cminor programs that cannot go wrong, and a minimizer for
//! programs on which the harness fails.
//!
//! Safety comes from construction:
//! - divisions are by literals other than 0 and -1;
//! - memory accesses stay in the function's own stack block, in one region
//!   per access size, at masked offsets, and every region is written before
//!   it is read;
//! - variables are assigned before the body runs;
//! - loops run a literal number of times and calls only reach functions
//!   defined earlier, so every run terminates;
//! - float expressions mention at most one float variable and never divide
//!   by anything but a literal, so they stay finite;
//! - the world script is longer than the number of external calls any run
//!   can make.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::base::{Value, World};

const INT_WORDS: i32 = 8;
const FLOAT_BASE: i32 = 4 * INT_WORDS;
const FLOAT_SLOTS: i32 = 4;
const BYTE_BASE: i32 = FLOAT_BASE + 8 * FLOAT_SLOTS;
const BYTES: i32 = 4;
const STACKSIZE: i32 = BYTE_BASE + 8;
const WORK_BUDGET: i64 = 3000;

#[derive(Clone, Debug, PartialEq)]
pub struct GenFunction {
    pub name: String,
    /// Parameter names and whether each is a float.
    pub params: Vec<(String, bool)>,
    pub vars: Vec<String>,
    pub init: Vec<String>,
    /// Top-level statements; each is self-contained and may be dropped.
    pub body: Vec<String>,
    pub tail: String,
    /// Upper bound on statements executed, external calls included.
    pub work: i64,
}

impl GenFunction {
    pub fn sig(&self) -> String {
        let args: Vec<&str> = self.params.iter().map(|(_, f)| if *f { "float" } else { "int" }).collect();
        format!("{} -> int", args.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenProgram {
    /// `main` comes last.
    pub funcs: Vec<GenFunction>,
    pub script: Vec<i32>,
}

impl GenProgram {
    pub fn render(&self) -> String {
        let mut s = String::from(
            "extern \"print_int\" : int -> void;\nextern \"print_float\" : float -> void;\nextern \"read\" : -> int;\n",
        );
        for f in &self.funcs {
            let names: Vec<&str> = f.params.iter().map(|(n, _)| n.as_str()).collect();
            s.push_str(&format!("\n\"{}\"({}) : {}\n{{\n", f.name, names.join(", "), f.sig()));
            s.push_str(&format!("  vars {};\n  stacksize {STACKSIZE};\n", f.vars.join(", ")));
            for l in f.init.iter().chain(&f.body) {
                s.push_str(&format!("  {l}\n"));
            }
            s.push_str(&format!("  {}\n}}\n", f.tail));
        }
        s
    }

    pub fn world(&self) -> World {
        World::new(self.script.iter().map(|&n| Value::Int(n)).collect())
    }

    pub fn world_text(&self) -> String {
        self.script.iter().map(|n| format!("int {n}\n")).collect()
    }

    pub fn statements(&self) -> usize {
        self.funcs.iter().map(|f| f.body.len()).sum()
    }

    /// The program without the `k`-th top-level statement, counting across
    /// functions in order.
    pub fn without(&self, mut k: usize) -> GenProgram {
        let mut p = self.clone();
        for f in &mut p.funcs {
            if k < f.body.len() {
                f.body.remove(k);
                break;
            }
            k -= f.body.len();
        }
        p
    }
}

struct Callee {
    name: String,
    params: Vec<bool>,
    work: i64,
}

struct Gen {
    rng: ChaCha8Rng,
    callees: Vec<Callee>,
    ints: Vec<String>,
    floats: Vec<String>,
    depth: usize,
    labels: usize,
    budget: i64,
    mult: i64,
}

fn lit_float(x: f64) -> String {
    format!("{x:?}")
}

impl Gen {
    fn pick<'a>(&mut self, xs: &'a [String]) -> &'a str {
        &xs[self.rng.gen_range(0..xs.len())]
    }

    fn int_lit(&mut self) -> String {
        let n: i32 = match self.rng.gen_range(0..6) {
            0 => self.rng.gen(),
            1 => [0, 1, -1, i32::MIN, i32::MAX, 0x7FFF, 0x8000, 0xFFFF, 0x10000][self.rng.gen_range(0..9)],
            _ => self.rng.gen_range(-20..100),
        };
        if n < 0 {
            format!("({n})")
        } else {
            format!("{n}")
        }
    }

    fn divisor(&mut self) -> i32 {
        let d = self.rng.gen_range(2..40);
        if self.rng.gen_bool(0.3) {
            -d
        } else {
            d
        }
    }

    fn int_leaf(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let v = self.ints.clone();
                self.pick(&v).into()
            }
            4..=5 => self.int_lit(),
            6 => format!("int32[addrstack(0) + {}]", 4 * self.rng.gen_range(0..INT_WORDS)),
            7 => {
                let c = ["int8s", "int8u"][self.rng.gen_range(0..2)];
                format!("{c}[addrstack({})]", BYTE_BASE + self.rng.gen_range(0..BYTES))
            }
            _ => {
                let v = self.ints.clone();
                self.pick(&v).to_string()
            }
        }
    }

    fn int_expr(&mut self, depth: usize) -> String {
        if depth == 0 {
            return self.int_leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..20) {
            0..=2 => self.int_leaf(),
            3..=8 => {
                let ops = ["+", "-", "*", "&", "|", "^", "<<", ">>", ">>u"];
                let op = ops[self.rng.gen_range(0..ops.len())];
                format!("({} {op} {})", self.int_expr(d), self.int_expr(d))
            }
            9 => {
                let op = ["/", "%", "/u", "%u"][self.rng.gen_range(0..4)];
                let k = self.divisor();
                format!("({} {op} ({k}))", self.int_expr(d))
            }
            10..=11 => self.cond(d),
            12 => {
                let u = ["-", "~", "!", "cast8s", "cast8u", "cast16s", "cast16u"][self.rng.gen_range(0..7)];
                format!("{u}({})", self.int_expr(d))
            }
            13 => format!("({} ? {} : {})", self.cond(d), self.int_expr(d), self.int_expr(d)),
            14 => format!("int32[addrstack(0) + (({}) & {}) * 4]", self.int_expr(d), INT_WORDS - 1),
            15 => {
                let k = ["0.5", "-0.25", "0.75"][self.rng.gen_range(0..3)];
                format!("intoffloat(floatofint({}) *f {k})", self.int_expr(d))
            }
            16 => format!("intuoffloat(absf(floatofint({})))", self.int_expr(d)),
            17 => format!("({} + {})", self.int_expr(d), self.int_lit()),
            _ => format!("({} * {})", self.int_expr(d), self.rng.gen_range(-9..10)),
        }
    }

    /// A float expression reading at most one float variable or load.
    fn float_expr(&mut self, depth: usize) -> String {
        let leaf = |g: &mut Gen, var_ok: bool| -> String {
            match g.rng.gen_range(0..5) {
                0 if var_ok && !g.floats.is_empty() => {
                    let v = g.floats.clone();
                    g.pick(&v).into()
                }
                1 if var_ok => format!("float64[addrstack({})]", FLOAT_BASE + 8 * g.rng.gen_range(0..FLOAT_SLOTS)),
                2 => lit_float(g.rng.gen_range(-64..64) as f64 / 8.0),
                _ => format!("floatofint({})", g.int_expr(depth.min(1))),
            }
        };
        let small = |g: &mut Gen| match g.rng.gen_range(0..3) {
            0 => lit_float(g.rng.gen_range(-16..16) as f64 / 4.0),
            1 => format!("floatofint(({}) & 255)", g.int_expr(0)),
            _ => format!("floatofintu(cast16u({}))", g.int_expr(0)),
        };
        let head = leaf(self, true);
        match self.rng.gen_range(0..6) {
            0 => head,
            1 => format!("({head} +f {})", leaf(self, false)),
            2 => format!("({head} -f {})", small(self)),
            3 => format!("({} *f {})", leaf(self, false), small(self)),
            4 => format!("({head} /f {})", lit_float([2.0, -4.0, 3.0][self.rng.gen_range(0..3)])),
            _ => {
                let u = ["negf", "absf", "singleoffloat"][self.rng.gen_range(0..3)];
                format!("{u}({head})")
            }
        }
    }

    fn cond(&mut self, depth: usize) -> String {
        if self.rng.gen_range(0..4) == 0 && !self.floats.is_empty() {
            let c = ["==f", "!=f", "<f", "<=f", ">f", ">=f"][self.rng.gen_range(0..6)];
            return format!("({} {c} {})", self.float_expr(depth), self.float_expr(depth));
        }
        let c = ["==", "!=", "<", "<=", ">", ">=", "==u", "!=u", "<u", "<=u", ">u", ">=u"][self.rng.gen_range(0..12)];
        let rhs = if self.rng.gen_bool(0.5) { self.int_lit() } else { self.int_expr(depth) };
        format!("({} {c} {rhs})", self.int_expr(depth))
    }

    fn int_target(&mut self) -> String {
        let v = self.ints.clone();
        self.pick(&v).into()
    }

    fn spend(&mut self, w: i64) -> bool {
        let cost = w * self.mult;
        if cost <= self.budget {
            self.budget -= cost;
            true
        } else {
            false
        }
    }

    fn call_args(&mut self, params: &[bool]) -> String {
        let args: Vec<String> = params.iter().map(|&f| if f { self.float_expr(1) } else { self.int_expr(1) }).collect();
        args.join(", ")
    }

    fn sig_of(params: &[bool]) -> String {
        let ts: Vec<&str> = params.iter().map(|&f| if f { "float" } else { "int" }).collect();
        format!("{} -> int", ts.join(", "))
    }

    fn block(&mut self, n: usize) -> String {
        let body: Vec<String> = (0..n).map(|_| self.stmt()).collect();
        format!("{{ {} }}", body.join(" "))
    }

    fn stmt(&mut self) -> String {
        if !self.spend(1) {
            return String::from("skip;");
        }
        let nested = self.depth < 2;
        match self.rng.gen_range(0..24) {
            0..=6 => format!("{} = {};", self.int_target(), self.int_expr(3)),
            7 if !self.floats.is_empty() => {
                let v = self.floats.clone();
                format!("{} = {};", self.pick(&v), self.float_expr(2))
            }
            8 => format!(
                "int32[addrstack(0) + (({}) & {}) * 4] = {};",
                self.int_expr(2),
                INT_WORDS - 1,
                self.int_expr(2)
            ),
            9 => {
                let c = ["int8s", "int8u"][self.rng.gen_range(0..2)];
                format!("{c}[addrstack({})] = {};", BYTE_BASE + self.rng.gen_range(0..BYTES), self.int_expr(2))
            }
            10 => format!(
                "float64[addrstack({FLOAT_BASE}) + (({}) & {}) * 8] = {};",
                self.int_expr(1),
                FLOAT_SLOTS - 1,
                self.float_expr(2)
            ),
            11 => format!("\"print_int\"({}) : int -> void;", self.int_expr(2)),
            12 => format!("\"print_float\"({}) : float -> void;", self.float_expr(2)),
            13 => format!("{} = \"read\"() : -> int;", self.int_target()),
            14..=15 if !self.callees.is_empty() => {
                let k = self.rng.gen_range(0..self.callees.len());
                if !self.spend(self.callees[k].work) {
                    return String::from("skip;");
                }
                let params = self.callees[k].params.clone();
                let name = self.callees[k].name.clone();
                let args = self.call_args(&params);
                let t = self.int_target();
                format!("{t} = \"{name}\"({args}) : {};", Gen::sig_of(&params))
            }
            16..=17 if nested => {
                let (c, n1, n2) = (self.cond(2), self.rng.gen_range(1..3), self.rng.gen_range(0..2));
                self.depth += 1;
                let (a, b) = (self.block(n1), self.block(n2));
                self.depth -= 1;
                format!("if {c} {a} else {b}")
            }
            18..=19 if nested => {
                let trips = self.rng.gen_range(1..=5);
                let ctr = format!("c{}", self.depth);
                self.depth += 1;
                self.mult *= trips + 1;
                let n = self.rng.gen_range(1..4);
                let body = self.block(n);
                let early =
                    if self.rng.gen_bool(0.3) { format!(" if {} exit(0);", self.cond(1)) } else { String::new() };
                self.mult /= trips + 1;
                self.depth -= 1;
                format!(
                    "{ctr} = 0; block {{ loop {{ if ({ctr} >= {trips}) exit(0);{early} {body} {ctr} = {ctr} + 1; }} }}"
                )
            }
            20 if nested => {
                let e = self.int_expr(2);
                self.depth += 1;
                let (a, b) = (self.block(1), self.block(1));
                self.depth -= 1;
                format!(
                    "block {{ block {{ block {{ switch (({e}) & 3) {{ case 0: exit(0); case 1: exit(1); case 3: exit(0); default: exit(2); }} }} {a} }} {b} }}"
                )
            }
            21 if nested => {
                self.labels += 1;
                let l = format!("skip{}", self.labels);
                self.depth += 1;
                let s = self.block(1);
                self.depth -= 1;
                format!("{{ if {} goto {l}; {s} {l}: skip; }}", self.cond(1))
            }
            22 => format!("if {} return {};", self.cond(1), self.int_expr(2)),
            _ => format!("{} = {};", self.int_target(), self.int_expr(2)),
        }
    }

    fn function(&mut self, name: String, nparams: usize, nstmts: usize, is_main: bool) -> GenFunction {
        let params: Vec<(String, bool)> = (0..nparams).map(|k| (format!("p{k}"), self.rng.gen_bool(0.2))).collect();
        let nv = self.rng.gen_range(2..6);
        let nf = self.rng.gen_range(0..3);
        self.ints = (0..nv).map(|k| format!("v{k}")).collect();
        self.ints.extend(params.iter().filter(|p| !p.1).map(|p| p.0.clone()));
        self.floats = (0..nf).map(|k| format!("g{k}")).collect();
        self.floats.extend(params.iter().filter(|p| p.1).map(|p| p.0.clone()));
        let mut vars: Vec<String> = (0..nv).map(|k| format!("v{k}")).collect();
        vars.extend((0..nf).map(|k| format!("g{k}")));
        vars.extend(["c0".into(), "c1".into()]);
        let mut init = Vec::new();
        for k in 0..nv {
            let l = self.int_lit();
            init.push(format!("v{k} = {l};"));
        }
        for k in 0..nf {
            init.push(format!("g{k} = {};", lit_float(self.rng.gen_range(-40..40) as f64 / 8.0)));
        }
        for k in 0..INT_WORDS {
            init.push(format!("int32[addrstack({})] = {};", 4 * k, self.rng.gen_range(-5..50)));
        }
        for k in 0..FLOAT_SLOTS {
            init.push(format!("float64[addrstack({})] = {};", FLOAT_BASE + 8 * k, lit_float(k as f64 + 0.25)));
        }
        for k in 0..BYTES {
            init.push(format!("int8u[addrstack({})] = {};", BYTE_BASE + k, 200 + k));
        }
        init.push("c0 = 0; c1 = 0;".into());
        self.budget = WORK_BUDGET;
        self.mult = 1;
        self.labels = 0;
        let body = (0..nstmts).map(|_| self.stmt()).collect();
        let tail = if !is_main && !self.callees.is_empty() && self.rng.gen_bool(0.3) {
            let k = self.rng.gen_range(0..self.callees.len());
            self.budget -= self.callees[k].work;
            let params = self.callees[k].params.clone();
            let callee = self.callees[k].name.clone();
            let args = self.call_args(&params);
            format!("tailcall \"{callee}\"({args}) : {};", Gen::sig_of(&params))
        } else {
            format!("return {};", self.int_expr(3))
        };
        let work = WORK_BUDGET - self.budget + 1;
        GenFunction { name, params, vars, init, body, tail, work }
    }
}

/// A deterministic safe program; `size` bounds the number of statements.
pub fn gen(seed: u64, size: usize) -> GenProgram {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        callees: Vec::new(),
        ints: Vec::new(),
        floats: Vec::new(),
        depth: 0,
        labels: 0,
        budget: WORK_BUDGET,
        mult: 1,
    };
    if size == 0 {
        let n = g.rng.gen_range(0..100);
        let main = GenFunction {
            name: "main".into(),
            params: vec![],
            vars: vec!["v0".into()],
            init: vec![],
            body: vec![],
            tail: format!("return {n};"),
            work: 1,
        };
        return GenProgram { funcs: vec![main], script: vec![] };
    }
    let helpers = (size / 10).min(3);
    let per = (size / (helpers + 1)).max(1);
    let mut funcs = Vec::new();
    for k in 0..helpers {
        let nparams = if g.rng.gen_bool(0.2) { g.rng.gen_range(8..12) } else { g.rng.gen_range(0..4) };
        let f = g.function(format!("f{k}"), nparams, per, false);
        g.callees.push(Callee { name: f.name.clone(), params: f.params.iter().map(|p| p.1).collect(), work: f.work });
        funcs.push(f);
    }
    let main = g.function("main".into(), 0, per, true);
    let script = (0..main.work + 1).map(|_| g.rng.gen_range(-1000..1000)).collect();
    funcs.push(main);
    GenProgram { funcs, script }
}

pub fn gen_program(seed: u64, size: usize) -> String {
    gen(seed, size).render()
}

/// Greedily drops top-level statements while `still_fails` holds.
pub fn minimize(p: &GenProgram, still_fails: impl Fn(&GenProgram) -> bool) -> GenProgram {
    let mut cur = p.clone();
    let mut k = 0;
    while k < cur.statements() {
        let cand = cur.without(k);
        if still_fails(&cand) {
            cur = cand;
        } else {
            k += 1;
        }
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::Behavior;
    use crate::cminor::{parse_program, run_program, typecheck_program};
    use crate::driver::{compile, diff_run, PipelineConfig};

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(gen_program(1, 30), gen_program(1, 30));
        assert_ne!(gen_program(1, 30), gen_program(2, 30));
    }

    #[test]
    fn size_zero_is_a_constant_main() {
        let p = gen(7, 0);
        assert_eq!(p.funcs.len(), 1);
        let c = parse_program(&p.render()).unwrap();
        assert!(matches!(run_program(&c, p.world(), 10).unwrap().behavior, Behavior::Converges(..)));
    }

    #[test]
    fn generated_programs_are_safe() {
        for seed in 0..300 {
            let p = gen(seed, 40);
            let src = p.render();
            let c = parse_program(&src).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{src}"));
            typecheck_program(&c).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{src}"));
            let b = run_program(&c, p.world(), 10_000_000).unwrap().behavior;
            assert!(matches!(b, Behavior::Converges(..)), "seed {seed}: {b}\n{src}");
        }
    }

    #[test]
    fn generated_programs_agree_at_all_stages() {
        for seed in 0..60 {
            let p = gen(seed, 30);
            let c = compile(&p.render(), &PipelineConfig::default()).unwrap();
            let r = diff_run(&c, &p.world(), 10_000_000);
            assert!(r.pass(), "seed {seed}:\n{r}\n{}", p.render());
        }
    }

    #[test]
    fn minimizer_keeps_the_failure() {
        let p = gen(3, 40);
        let has_print = |q: &GenProgram| q.render().contains("print_int");
        if has_print(&p) {
            let m = minimize(&p, has_print);
            assert!(has_print(&m));
            assert!(m.statements() <= p.statements());
            assert!(m.statements() <= 2, "{}", m.render());
        }
    }
}
