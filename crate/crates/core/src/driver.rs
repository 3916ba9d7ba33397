//! The pass pipeline, per-stage dumps and interpreters, and the
//! differential harness that runs every stage on the same world.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::asm::{self, AsmProgram};
use crate::base::{run, Behavior, Ident, Outcome, World};
use crate::cminor::{self, CminorProgram};
use crate::linear::{self, LinearProgram};
use crate::ltl::{self, LtlProgram};
use crate::ltlin::{self, LtlinProgram};
use crate::mach::{self, MachInterp, MachProgram};
use crate::opt;
use crate::regalloc::{self, Allocation, Tamper};
use crate::rtl::{self, RtlProgram};
use crate::selection::{self, SelProgram};

/// Every stage that can be dumped, in pipeline order. All but
/// `interference` can also be run.
pub const DUMP_STAGES: [&str; 11] =
    ["cminor", "sel", "rtl", "rtl-constprop", "rtl-cse", "ltl", "interference", "ltlin", "linear", "mach", "asm"];

pub const RUN_STAGES: [&str; 10] =
    ["cminor", "sel", "rtl", "rtl-constprop", "rtl-cse", "ltl", "ltlin", "linear", "mach", "asm"];

#[derive(Clone, Copy, Debug)]
pub struct PipelineConfig {
    pub constprop: bool,
    pub cse: bool,
    pub tunnel: bool,
    /// Fault injection into the candidate coloring, for testing that the
    /// validator stops the pipeline.
    pub tamper: Option<Tamper>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { constprop: true, cse: true, tunnel: true, tamper: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileError {
    pub stage: &'static str,
    pub msg: String,
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.msg)
    }
}

/// All intermediate programs of one compilation.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub cminor: CminorProgram,
    pub sel: SelProgram,
    pub rtl: RtlProgram,
    pub rtl_constprop: Option<RtlProgram>,
    pub rtl_cse: Option<RtlProgram>,
    /// The output of allocation, before tunneling.
    pub ltl_alloc: LtlProgram,
    pub allocs: BTreeMap<Ident, Allocation>,
    pub ltl: LtlProgram,
    pub ltlin: LtlinProgram,
    pub linear: LinearProgram,
    pub mach: MachProgram,
    pub asm: AsmProgram,
    pub positions: asm::Positions,
}

pub fn compile(src: &str, cfg: &PipelineConfig) -> Result<Compiled, CompileError> {
    let err = |stage: &'static str| move |msg: String| CompileError { stage, msg };
    let cm = cminor::parse_program(src).map_err(|e| CompileError { stage: "parse", msg: e.to_string() })?;
    cminor::typecheck_program(&cm).map_err(err("typecheck"))?;
    let sel = selection::sel_program(&cm);
    let r = rtl::transl_program(&sel).map_err(|e| CompileError { stage: "rtl", msg: format!("{e:?}") })?;
    let rtl_constprop = cfg.constprop.then(|| opt::constprop_program(&r));
    let before_cse = rtl_constprop.as_ref().unwrap_or(&r);
    let rtl_cse = cfg.cse.then(|| opt::cse_program(before_cse));
    let last = rtl_cse.as_ref().unwrap_or(before_cse);
    let (ltl_alloc, allocs) = match cfg.tamper {
        Some(t) => regalloc::allocate_program_with(last, t),
        None => regalloc::allocate_program(last),
    }
    .map_err(err("regalloc"))?;
    let l = if cfg.tunnel { ltl::tunnel_program(&ltl_alloc) } else { ltl_alloc.clone() };
    let lin = ltlin::transl_program(&l).map_err(err("linearize"))?;
    let linear = linear::transl_program(&lin);
    let m = mach::transl_program(&linear).map_err(err("stacking"))?;
    let (a, positions) = asm::transl_program_with_positions(&m).map_err(err("asmgen"))?;
    Ok(Compiled {
        cminor: cm,
        sel,
        rtl: r,
        rtl_constprop,
        rtl_cse,
        ltl_alloc,
        allocs,
        ltl: l,
        ltlin: lin,
        linear,
        mach: m,
        asm: a,
        positions,
    })
}

impl Compiled {
    /// The stages present under the configuration used.
    pub fn stages(&self) -> Vec<&'static str> {
        RUN_STAGES
            .into_iter()
            .filter(|s| match *s {
                "rtl-constprop" => self.rtl_constprop.is_some(),
                "rtl-cse" => self.rtl_cse.is_some(),
                _ => true,
            })
            .collect()
    }

    pub fn dump(&self, stage: &str) -> Option<String> {
        Some(match stage {
            "cminor" => cminor::print_program(&self.cminor),
            "sel" => selection::print_program(&self.sel),
            "rtl" => rtl::print_program(&self.rtl),
            "rtl-constprop" => rtl::print_program(self.rtl_constprop.as_ref()?),
            "rtl-cse" => rtl::print_program(self.rtl_cse.as_ref()?),
            "ltl" => ltl::print::print_program(&self.ltl),
            "interference" => {
                let mut s = String::new();
                for (name, a) in &self.allocs {
                    s.push_str(&format!("\"{name}\":\n{}", a.graph.dump()));
                }
                s
            }
            "ltlin" => ltlin::print::print_program(&self.ltlin),
            "linear" => linear::print::print_program(&self.linear),
            "mach" => mach::print::print_program(&self.mach),
            "asm" => asm::emit_text(&self.asm),
            _ => return None,
        })
    }

    /// Runs one stage. Mach return addresses are those of the generated
    /// assembly, so that both agree on values stored in frames.
    pub fn run(&self, stage: &str, world: World, fuel: u64) -> Option<Result<Outcome, String>> {
        Some(match stage {
            "cminor" => cminor::run_program(&self.cminor, world, fuel),
            "sel" => selection::run_program(&self.sel, world, fuel),
            "rtl" => rtl::run_program(&self.rtl, world, fuel),
            "rtl-constprop" => rtl::run_program(self.rtl_constprop.as_ref()?, world, fuel),
            "rtl-cse" => rtl::run_program(self.rtl_cse.as_ref()?, world, fuel),
            "ltl" => ltl::run_program(&self.ltl, world, fuel),
            "ltlin" => ltlin::run_program(&self.ltlin, world, fuel),
            "linear" => linear::run_program(&self.linear, world, fuel),
            "mach" => MachInterp::new(&self.mach).map(|mut mi| {
                mi.retaddr = asm::retaddr_map(&self.mach, &self.positions);
                run(&mi, world, fuel)
            }),
            "asm" => asm::run_program(&self.asm, world, fuel),
            _ => return None,
        })
    }
}

/// The first pair of stages found to disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub from: &'static str,
    pub to: &'static str,
    /// Index of the first differing event, or the common trace length when
    /// the traces agree and the outcomes differ.
    pub trace_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffReport {
    pub behaviors: Vec<(&'static str, Behavior)>,
    pub divergence: Option<Divergence>,
}

impl DiffReport {
    pub fn pass(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, b) in &self.behaviors {
            writeln!(f, "{s:>14}: {b}")?;
        }
        match &self.divergence {
            None => writeln!(f, "all stages agree"),
            Some(d) => writeln!(f, "MISMATCH between {} and {} at trace index {}", d.from, d.to, d.trace_index),
        }
    }
}

fn first_difference(a: &Behavior, b: &Behavior) -> usize {
    let (ta, tb) = (a.trace(), b.trace());
    ta.iter().zip(tb).position(|(x, y)| x != y).unwrap_or(ta.len().min(tb.len()))
}

/// Runs every stage at the same fuel on clones of `world`. Every pair of
/// stages must agree, since agreement of fuel-limited runs is not
/// transitive; a stage that fails to start counts as going wrong.
pub fn diff_run(c: &Compiled, world: &World, fuel: u64) -> DiffReport {
    let mut behaviors: Vec<(&'static str, Behavior)> = Vec::new();
    let mut divergence = None;
    for s in c.stages() {
        let b = match c.run(s, world.clone(), fuel) {
            Some(Ok(o)) => o.behavior,
            _ => Behavior::GoesWrong(Vec::new()),
        };
        if divergence.is_none() {
            if let Some((p, pb)) = behaviors.iter().find(|(_, pb)| !pb.agrees_with(&b)) {
                divergence = Some(Divergence { from: p, to: s, trace_index: first_difference(pb, &b) });
            }
        }
        behaviors.push((s, b));
    }
    DiffReport { behaviors, divergence }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locs::{Loc, MReg};
    use crate::regalloc::{Coloring, Graph};
    use crate::rtl::typing::RegTypes;
    use crate::testutil::{sample, CORPUS};

    #[test]
    fn corpus_passes_the_harness() {
        for s in CORPUS {
            let c = compile(s.src, &PipelineConfig::default()).unwrap();
            let r = diff_run(&c, &s.world(), 2_000_000);
            assert!(r.pass(), "{}:\n{r}", s.name);
            assert_eq!(r.behaviors.len(), 10);
        }
    }

    #[test]
    fn optimizations_can_be_disabled() {
        let s = sample("average");
        let cfg = PipelineConfig { constprop: false, cse: false, tunnel: false, tamper: None };
        let c = compile(s.src, &cfg).unwrap();
        assert_eq!(c.stages().len(), 8);
        assert!(c.dump("rtl-cse").is_none());
        assert!(diff_run(&c, &s.world(), 100_000).pass());
        assert_eq!(c.ltl, c.ltl_alloc);
    }

    #[test]
    fn type_errors_name_the_stage() {
        let e = compile(r#""main"() : -> int { return 1.0; }"#, &PipelineConfig::default()).unwrap_err();
        assert_eq!(e.stage, "typecheck");
        let e = compile(r#""main"() : -> int { return }"#, &PipelineConfig::default()).unwrap_err();
        assert_eq!(e.stage, "parse");
    }

    fn clash(g: &Graph, types: &RegTypes, phi: &mut Coloring) {
        if let Some(&(a, b)) = g.edges.iter().find(|(a, b)| types.get(a) == types.get(b)) {
            let l = phi[&b];
            phi.insert(a, l);
        } else if let Some((&r, _)) = types.iter().find(|(_, t)| **t == crate::base::Typ::Int) {
            phi.insert(r, Loc::Reg(MReg::R(11)));
        }
    }

    #[test]
    fn corrupted_coloring_aborts_compilation() {
        let cfg = PipelineConfig { tamper: Some(clash), ..PipelineConfig::default() };
        let e = compile(sample("pressure").src, &cfg).unwrap_err();
        assert_eq!(e.stage, "regalloc");
    }

    #[test]
    fn diverging_program_diverges_everywhere() {
        let s = sample("spin");
        let c = compile(s.src, &PipelineConfig::default()).unwrap();
        let r = diff_run(&c, &s.world(), 50_000);
        assert!(r.pass(), "{r}");
        assert!(r.behaviors.iter().all(|(_, b)| matches!(b, Behavior::Diverges(_))), "{r}");
    }

    #[test]
    fn mismatches_are_located() {
        let a = Behavior::Converges(Vec::new(), 1);
        let b = Behavior::Converges(Vec::new(), 2);
        assert_eq!(first_difference(&a, &b), 0);
    }

    #[test]
    fn dumps_are_deterministic() {
        for s in CORPUS.iter().take(6) {
            let d = |_| {
                let c = compile(s.src, &PipelineConfig::default()).unwrap();
                DUMP_STAGES.iter().map(|st| c.dump(st).unwrap()).collect::<Vec<_>>()
            };
            assert_eq!(d(0), d(1), "{}", s.name);
        }
    }
}
