//! The acceptance suite: one line per criterion, then a single verdict.
//! Built without the test harness so the report is always printed; the
//! process fails if any criterion does.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mcc_core::base::events::dump_trace;
use mcc_core::base::{cast, Behavior, Chunk, FunDef, Program, Signature, Typ, Value, World};
use mcc_core::cminor::parse_expr;
use mcc_core::dataflow::{check_solution, kildall_solve, Direction, Problem};
use mcc_core::driver::{compile, diff_run, Compiled, PipelineConfig};
use mcc_core::linear::parmove::{parallel_assign, parallel_move};
use mcc_core::locs::{Loc, LocMap, MReg};
use mcc_core::ltl::{self, tunnel::branch_map, LtlFunction};
use mcc_core::mutate::{run_suite, MutationReport};
use mcc_core::ops::Operation;
use mcc_core::opt::constprop::{self, AEnv, AVal};
use mcc_core::regalloc::liveness::{self, RegSet};
use mcc_core::regalloc::lockstep::check_lockstep;
use mcc_core::rtl::{random, Node};
use mcc_core::selection::check::{check_operators, check_rolm_law};
use mcc_core::selection::{sel_expr, SelExpr};

const FUEL: u64 = 3_000_000;

struct Sample {
    name: String,
    src: String,
    world: String,
}

impl Sample {
    fn world(&self) -> World {
        World::parse(&self.world).unwrap()
    }

    fn compiled(&self) -> Compiled {
        compile(&self.src, &PipelineConfig::default()).unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }
}

fn corpus() -> Vec<Sample> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out = Vec::new();
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cm") {
            continue;
        }
        out.push(Sample {
            name: path.file_stem().unwrap().to_string_lossy().into_owned(),
            src: fs::read_to_string(&path).unwrap(),
            world: fs::read_to_string(path.with_extension("world")).unwrap_or_default(),
        });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

type Verdict = Result<String, String>;

fn within(t: Instant, limit: Duration, detail: String) -> Verdict {
    let el = t.elapsed();
    if el < limit {
        Ok(format!("{detail}, {:.2}s", el.as_secs_f64()))
    } else {
        Err(format!("{detail}, took {:.2}s (limit {}s)", el.as_secs_f64(), limit.as_secs()))
    }
}

fn random_value(rng: &mut ChaCha8Rng, blocks: (i32, i32)) -> Value {
    match rng.gen_range(0..5) {
        0 => Value::Undef,
        1 => Value::Float(f64::from_bits(rng.gen())),
        2 => Value::Float(rng.gen_range(-1e6..1e6)),
        3 => Value::Ptr(if rng.gen() { blocks.0 } else { blocks.1 }, rng.gen_range(-8..8)),
        _ => Value::Int(rng.gen()),
    }
}

/// Same-sized exact overlap reads back the cast value; disjoint ranges
/// leave the old contents; any partial overlap reads `Undef`.
fn trichotomy(c1: Chunk, o1: i32, v: Value, c2: Chunk, o2: i32, before: Value) -> Value {
    if o1 == o2 && c1.size() == c2.size() {
        cast(v, c2)
    } else if o1 + c1.size() <= o2 || o2 + c2.size() <= o1 {
        before
    } else {
        Value::Undef
    }
}

fn same(a: Value, b: Value) -> bool {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) => x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()),
        _ => a == b,
    }
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = 0;
    for c1 in Chunk::ALL {
        for c2 in Chunk::ALL {
            for _ in 0..250 {
                let mut m = mcc_core::base::Mem::new();
                let b = m.alloc(0, 32);
                let other = m.alloc(0, 32);
                // Some prior contents so the disjoint case is not trivially Undef.
                for _ in 0..3 {
                    let pc = Chunk::ALL[rng.gen_range(0..Chunk::ALL.len())];
                    let po = rng.gen_range(0..=32 - pc.size());
                    m.store(pc, b, po, random_value(&mut rng, (b, other))).unwrap();
                }
                let o1 = rng.gen_range(0..=32 - c1.size());
                let o2 = if rng.gen_bool(0.3) && o1 + c2.size() <= 32 { o1 } else { rng.gen_range(0..=32 - c2.size()) };
                let v = random_value(&mut rng, (b, other));
                let before = m.load(c2, b, o2).unwrap();
                let before_other = m.load(c2, other, o2).unwrap();
                m.store(c1, b, o1, v).unwrap();
                let got = m.load(c2, b, o2).unwrap();
                let want = trichotomy(c1, o1, v, c2, o2, before);
                if !same(got, want) {
                    return Err(format!("store {c1:?}@{o1} {v:?}, load {c2:?}@{o2}: got {got:?}, want {want:?}"));
                }
                if !same(m.load(c2, other, o2).unwrap(), before_other) {
                    return Err(format!("store {c1:?}@{o1} changed another block"));
                }
                cases += 1;
            }
        }
    }
    within(t, Duration::from_secs(5), format!("{cases} cases over {} chunk pairs", Chunk::ALL.len().pow(2)))
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let ops = check_operators(2, 10_000);
    let law = check_rolm_law(3, 10_000);
    if let Some(f) = ops.failures.first().or(law.failures.first()) {
        return Err(format!("{} + {} failures, first: {f}", ops.failures.len(), law.failures.len()));
    }
    if ops.defined == 0 || law.defined == 0 {
        return Err("no defined trials".into());
    }
    within(
        t,
        Duration::from_secs(10),
        format!("{} constructor trials ({} defined), {} rolm-law trials", ops.trials, ops.defined, law.trials),
    )
}

/// Runs `print_int(e)` for every scripted `x` at the Cminor and CminorSel
/// stages and compares the printed values with `oracle(x)`.
fn run_micro(e: &str, xs: &[i32], oracle: impl Fn(i32) -> i32) -> Result<(), String> {
    let src = format!(
        "extern \"read\" : -> int;\nextern \"print_int\" : int -> void;\n\
         \"main\"() : -> int {{\n  vars x, n;\n  n = {};\n  block {{ loop {{\n    if (n <= 0) exit;\n    \
         x = \"read\"() : -> int;\n    \"print_int\"({e}) : int -> void;\n    n = n - 1;\n  }} }}\n  return 0;\n}}\n",
        xs.len()
    );
    let script: Vec<Value> = xs.iter().flat_map(|&x| [Value::Int(x), Value::Int(0)]).collect();
    let c = compile(&src, &PipelineConfig::default()).map_err(|e| e.to_string())?;
    for stage in ["cminor", "sel"] {
        let b = c.run(stage, World::new(script.clone()), FUEL).unwrap()?.behavior;
        let Behavior::Converges(trace, 0) = &b else {
            return Err(format!("{stage}: {b}"));
        };
        let printed: Vec<Value> = trace.iter().filter(|ev| ev.tag == "print_int").map(|ev| ev.args[0]).collect();
        let want: Vec<Value> = xs.iter().map(|&x| Value::Int(oracle(x))).collect();
        if printed != want {
            return Err(format!("{stage}: {e} disagrees with the oracle"));
        }
    }
    Ok(())
}

fn criterion_3() -> Verdict {
    let x = || SelExpr::Var("x".into());
    let e1 = sel_expr(&parse_expr("8 + (x + 1) * 4").unwrap());
    let want1 = SelExpr::op(Operation::AddImm(12), vec![SelExpr::op(Operation::MulImm(4), vec![x()])]);
    if e1 != want1 {
        return Err(format!("8 + (x+1)*4 selected as {e1:?}"));
    }
    let e2 = sel_expr(&parse_expr("(x << 3) | (x >>u 29)").unwrap());
    if !matches!(&e2, SelExpr::Op(Operation::Rolm(3, -1), args) if args == &vec![x()]) {
        return Err(format!("rotate idiom selected as {e2:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut xs: Vec<i32> = (0..500).map(|_| rng.gen()).collect();
    xs.extend([0, 1, -1, i32::MIN, i32::MAX]);
    run_micro("8 + (x + 1) * 4", &xs, |x| x.wrapping_add(1).wrapping_mul(4).wrapping_add(8))?;
    run_micro("(x << 3) | (x >>u 29)", &xs, |x| x.rotate_left(3))?;
    Ok(format!("both shapes match; {} random x agree at cminor and sel", xs.len()))
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let regs = random::registers();
    let (mut checked, mut perturbed) = (0, 0);
    for k in 0..200 {
        let n = rng.gen_range(1..=30);
        let f = random::random_function(&mut rng, n);
        let succs = constprop::successor_map(&f);

        let t = |l: Node, a: &AEnv| constprop::transfer(&f, l, a);
        let p =
            Problem { successors: &succs, transfer: &t, cstrs: vec![(1, AEnv::top())], direction: Direction::Forward };
        let sol = kildall_solve(&p).ok_or(format!("cfg {k}: constprop solver gave up"))?;
        if !check_solution(&p, &sol) {
            return Err(format!("cfg {k}: constprop solution rejected"));
        }
        checked += 1;
        for (&l, a) in &sol {
            let AEnv::Map(m) = a else { continue };
            let mut lowered = sol.clone();
            lowered.insert(l, AEnv::Bot);
            if check_solution(&p, &lowered) {
                return Err(format!("cfg {k}: node {l} lowered to bottom still accepted"));
            }
            perturbed += 1;
            for &r in &regs {
                let v = match m.get(&r) {
                    None => AVal::Int(0x1234_5678),
                    Some(AVal::Bot) => continue,
                    Some(_) => AVal::Bot,
                };
                let mut m2 = m.clone();
                m2.insert(r, v);
                lowered.insert(l, AEnv::Map(m2));
                if check_solution(&p, &lowered) {
                    return Err(format!("cfg {k}: node {l}, x{r} lowered still accepted"));
                }
                perturbed += 1;
            }
        }

        let t = |l: Node, a: &RegSet| liveness::transfer(&f, l, a);
        let p = liveness::problem(&succs, &t);
        let sol = kildall_solve(&p).ok_or(format!("cfg {k}: liveness solver gave up"))?;
        if !check_solution(&p, &sol) {
            return Err(format!("cfg {k}: liveness solution rejected"));
        }
        checked += 1;
        for (&l, live) in &sol {
            for r in &live.0 {
                let mut lowered = sol.clone();
                lowered.get_mut(&l).unwrap().0.remove(r);
                if check_solution(&p, &lowered) {
                    return Err(format!("cfg {k}: node {l} without x{r} still accepted"));
                }
                perturbed += 1;
            }
        }
    }
    Ok(format!("{checked} solutions accepted, {perturbed} single-entry lowerings rejected"))
}

fn criterion_5(corpus: &[Sample]) -> Verdict {
    let mut total = MutationReport::default();
    for s in corpus {
        total.merge(&run_suite(&s.compiled().rtl).map_err(|e| format!("{}: {e}", s.name))?);
    }
    for seed in 0..40 {
        let p = mcc_core::fuzz::gen(seed, 30);
        let c = compile(&p.render(), &PipelineConfig::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        total.merge(&run_suite(&c.rtl)?);
    }
    let injected: usize = total.classes.values().map(|c| c.0).sum();
    let rejected: usize = total.classes.values().map(|c| c.1).sum();
    let detail = format!(
        "{rejected}/{injected} mutants rejected in {} classes, {}/{} originals accepted",
        total.classes.len(),
        total.originals_accepted,
        total.originals
    );
    if total.perfect() {
        Ok(detail)
    } else {
        Err(format!("{detail}; escaped: {:?}", total.escaped))
    }
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let locs = [
        Loc::Reg(MReg::R(3)),
        Loc::Reg(MReg::R(4)),
        Loc::local(Typ::Int, 0),
        Loc::local(Typ::Int, 1),
        Loc::Reg(MReg::F(1)),
        Loc::Reg(MReg::F(2)),
        Loc::local(Typ::Float, 2),
        Loc::local(Typ::Float, 4),
    ];
    let temp = |ty: Typ| Loc::Reg(if ty == Typ::Int { MReg::R(13) } else { MReg::F(31) });
    let mut init = LocMap::new();
    for (i, l) in locs.iter().enumerate() {
        init.set(*l, if l.typ() == Typ::Int { Value::Int(i as i32 + 1) } else { Value::Float(i as f64 + 0.5) });
    }
    let mut cases = 0u64;
    for mask in 0u32..(1 << locs.len()) {
        let dsts: Vec<Loc> = (0..locs.len()).filter(|i| mask & (1 << i) != 0).map(|i| locs[i]).collect();
        // Each destination reads one of the four locations of its class.
        let choices: Vec<Vec<Loc>> =
            dsts.iter().map(|d| locs.iter().filter(|l| l.typ() == d.typ()).copied().collect()).collect();
        let total: usize = choices.iter().map(|c| c.len()).product();
        for code in 0..total {
            let mut rest = code;
            let srcs: Vec<Loc> = choices
                .iter()
                .map(|c| {
                    let l = c[rest % c.len()];
                    rest /= c.len();
                    l
                })
                .collect();
            let mut expect = init.clone();
            parallel_assign(&mut expect, &srcs, &dsts);
            let mut got = init.clone();
            let moves = parallel_move(&srcs, &dsts, temp);
            for (s, d) in &moves {
                if !dsts.contains(d) && *d != temp(d.typ()) {
                    return Err(format!("{srcs:?} -> {dsts:?} writes {d}"));
                }
                got.set(*d, got.get(*s));
            }
            if locs.iter().any(|l| got.get(*l) != expect.get(*l)) {
                return Err(format!("{srcs:?} -> {dsts:?}: {moves:?}"));
            }
            cases += 1;
        }
    }
    within(t, Duration::from_secs(30), format!("{cases} move patterns, one temporary per class"))
}

fn criterion_7(corpus: &[Sample]) -> Verdict {
    let t = Instant::now();
    for s in corpus {
        let r = diff_run(&s.compiled(), &s.world(), FUEL);
        if !r.pass() {
            return Err(format!("{}:\n{r}", s.name));
        }
    }
    let seeds = 1000;
    for seed in 0..seeds {
        let p = mcc_core::fuzz::gen(seed, 40);
        if let Some(f) = mcc::check_generated(&p, mcc::DEFAULT_FUEL) {
            return Err(format!("fuzz seed {seed}: {f:?}"));
        }
    }
    within(
        t,
        Duration::from_secs(600),
        format!("{} corpus programs and {seeds} generated programs agree at all stages", corpus.len()),
    )
}

fn criterion_8(corpus: &[Sample]) -> Verdict {
    let mut steps = 0;
    for s in corpus {
        let c = s.compiled();
        let rtl = c.rtl_cse.as_ref().unwrap();
        steps +=
            check_lockstep(rtl, &c.ltl_alloc, &c.allocs, s.world(), FUEL).map_err(|e| format!("{}: {e}", s.name))?;
    }
    Ok(format!("{steps} paired steps on {} programs", corpus.len()))
}

fn nop_function(code: Vec<(Node, ltl::Instr)>) -> Program<LtlFunction> {
    let f = LtlFunction {
        sig: Signature { args: vec![], res: Some(Typ::Int) },
        params: vec![],
        stacksize: 0,
        entrypoint: 1,
        code: code.into_iter().collect(),
    };
    Program { globals: vec![], functions: vec![("main".into(), FunDef::Internal(f))], main: "main".into() }
}

fn criterion_9(corpus: &[Sample]) -> Verdict {
    let mut nodes = 0;
    for s in corpus {
        let c = s.compiled();
        for (name, fd) in &c.ltl_alloc.functions {
            let FunDef::Internal(f) = fd else { continue };
            let d = branch_map(f);
            for &n in f.code.keys() {
                if d.find(d.find(n)) != d.find(n) {
                    return Err(format!("{}/{name}: node {n}", s.name));
                }
                nodes += 1;
            }
        }
        let b0 = ltl::run_program(&c.ltl_alloc, s.world(), FUEL)?.behavior;
        let b1 = ltl::run_program(&c.ltl, s.world(), FUEL)?.behavior;
        if !b0.agrees_with(&b1) {
            return Err(format!("{}: tunneled {b1} vs {b0}", s.name));
        }
    }
    let r3 = Loc::Reg(MReg::R(3));
    let cyclic = [
        nop_function(vec![(1, ltl::Instr::Nop(1))]),
        nop_function(vec![(1, ltl::Instr::Nop(2)), (2, ltl::Instr::Nop(3)), (3, ltl::Instr::Nop(1))]),
        nop_function(vec![
            (1, ltl::Instr::Op(Operation::IntConst(1), vec![], r3, 2)),
            (2, ltl::Instr::Nop(3)),
            (3, ltl::Instr::Nop(4)),
            (4, ltl::Instr::Nop(2)),
            (5, ltl::Instr::Return(Some(r3))),
        ]),
    ];
    for p in &cyclic {
        let t = ltl::tunnel_program(p);
        let b0 = ltl::run_program(p, World::default(), 1000)?.behavior;
        let b1 = ltl::run_program(&t, World::default(), 1000)?.behavior;
        if b0 != Behavior::Diverges(vec![]) || b1 != b0 {
            return Err(format!("nop cycle: {b0} vs tunneled {b1}"));
        }
    }
    Ok(format!("D idempotent on {nodes} nodes, behavior kept, {} nop cycles terminate", cyclic.len()))
}

fn criterion_10(corpus: &[Sample]) -> Verdict {
    for s in corpus {
        let c = s.compiled();
        let dump = || -> Result<String, String> {
            let b = c.run("asm", s.world(), FUEL).unwrap()?.behavior;
            Ok(format!("{}{b}\n", dump_trace(b.trace())))
        };
        let first = dump()?;
        for _ in 0..2 {
            if dump()? != first {
                return Err(format!("{}: asm runs differ", s.name));
            }
        }
        // A fresh compilation must produce the same code as well.
        if s.compiled().dump("asm") != c.dump("asm") {
            return Err(format!("{}: recompilation differs", s.name));
        }
    }
    Ok(format!("{} programs, 3 runs each, identical dumps", corpus.len()))
}

type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

fn main() {
    let corpus = corpus();
    assert!(corpus.len() >= 20, "corpus has {} programs", corpus.len());
    let criteria: Vec<(&str, Check<'_>)> = vec![
        ("memory load-after-store laws", Box::new(criterion_1)),
        ("smart-constructor soundness", Box::new(criterion_2)),
        ("selection micro-examples", Box::new(criterion_3)),
        ("dataflow solutions and perturbations", Box::new(criterion_4)),
        ("validator mutation suite", Box::new(|| criterion_5(&corpus))),
        ("parallel moves", Box::new(criterion_6)),
        ("end-to-end agreement", Box::new(|| criterion_7(&corpus))),
        ("allocation lockstep", Box::new(|| criterion_8(&corpus))),
        ("branch tunneling", Box::new(|| criterion_9(&corpus))),
        ("determinism", Box::new(|| criterion_10(&corpus))),
    ];
    let mut results = BTreeMap::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let r = check();
        match &r {
            Ok(d) => println!("criterion {}: PASS {name}: {d}", i + 1),
            Err(d) => println!("criterion {}: FAIL {name}: {d}", i + 1),
        }
        results.insert(i + 1, r.is_ok());
    }
    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !**ok).map(|(i, _)| *i).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
