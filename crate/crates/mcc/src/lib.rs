//! The `mcc` command line: compilation with per-stage dumps and runs, the
//! differential harness on one file, and fuzzing campaigns.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mcc_core::base::events::dump_trace;
use mcc_core::base::{Behavior, World};
use mcc_core::driver::{
    compile, diff_run, CompileError, Compiled, DiffReport, PipelineConfig, DUMP_STAGES, RUN_STAGES,
};
use mcc_core::fuzz::{gen, minimize, GenProgram};

pub const EXIT_OK: u8 = 0;
pub const EXIT_COMPILE: u8 = 1;
pub const EXIT_DIFF: u8 = 2;

pub const DEFAULT_FUEL: u64 = 10_000_000;

#[derive(Parser, Debug)]
#[command(name = "mcc", version, about = "Cminor to PowerPC compiler with executable semantics for every stage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a Cminor file to assembly.
    Compile {
        file: PathBuf,
        /// Output file; defaults to the input with a `.s` extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print a stage's program to stdout (repeatable).
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(DUMP_STAGES))]
        dump: Vec<String>,
        /// Run a stage's interpreter and print its behavior and trace.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(RUN_STAGES))]
        run: Option<String>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// World script: one `int <n>` or `float <x>` per line.
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long)]
        no_constprop: bool,
        #[arg(long)]
        no_cse: bool,
        #[arg(long)]
        no_tunnel: bool,
    },
    /// Run every stage on one file and compare behaviors.
    Diff {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        #[arg(long)]
        world: Option<PathBuf>,
    },
    /// Differential testing on generated programs.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 30)]
        size: usize,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        start: u64,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Where minimized failing programs are written.
        #[arg(long, default_value = "fuzz-failures")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the program the fuzzer generates for one seed.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        size: usize,
        /// Also write the matching world script here.
        #[arg(long)]
        world: Option<PathBuf>,
    },
}

fn read_world(path: Option<&Path>) -> Result<World> {
    match path {
        None => Ok(World::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            World::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))
        }
    }
}

fn read_source(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn describe(b: &Behavior) -> String {
    let mut s = dump_trace(b.trace());
    s.push_str(&format!("{b}\n"));
    s
}

/// Runs a parsed command line, writing reports to `out`; returns the exit
/// code.
pub fn run(cli: Cli, out: &mut dyn Write) -> u8 {
    let r = match cli.command {
        Command::Compile { file, output, dump, run, fuel, world, no_constprop, no_cse, no_tunnel } => {
            let cfg = PipelineConfig { constprop: !no_constprop, cse: !no_cse, tunnel: !no_tunnel, tamper: None };
            cmd_compile(&file, output, &dump, run.as_deref(), fuel, world.as_deref(), &cfg, out)
        }
        Command::Diff { file, fuel, world } => cmd_diff(&file, fuel, world.as_deref(), out),
        Command::Fuzz { seeds, size, start, fuel, out: dir, jobs } => {
            cmd_fuzz(start, seeds, size, fuel, &dir, jobs, out)
        }
        Command::Gen { seed, size, world } => cmd_gen(seed, size, world.as_deref(), out),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mcc: {e:#}");
            EXIT_COMPILE
        }
    }
}

fn report_compile_error(file: &Path, e: &CompileError) -> u8 {
    eprintln!("{}: {e}", file.display());
    EXIT_COMPILE
}

#[allow(clippy::too_many_arguments)]
fn cmd_compile(
    file: &Path,
    output: Option<PathBuf>,
    dumps: &[String],
    run: Option<&str>,
    fuel: u64,
    world: Option<&Path>,
    cfg: &PipelineConfig,
    out: &mut dyn Write,
) -> Result<u8> {
    let src = read_source(file)?;
    let world = read_world(world)?;
    let c = match compile(&src, cfg) {
        Ok(c) => c,
        Err(e) => return Ok(report_compile_error(file, &e)),
    };
    for d in dumps {
        match c.dump(d) {
            Some(text) => write!(out, "== {d} ==\n{text}")?,
            None => writeln!(out, "== {d} == (stage disabled)")?,
        }
    }
    let output = output.unwrap_or_else(|| file.with_extension("s"));
    fs::write(&output, c.dump("asm").expect("asm stage always exists"))
        .with_context(|| format!("writing {}", output.display()))?;
    if let Some(stage) = run {
        match c.run(stage, world, fuel) {
            Some(Ok(o)) => write!(out, "{}", describe(&o.behavior))?,
            Some(Err(e)) => bail!("{stage}: {e}"),
            None => bail!("stage {stage} is disabled"),
        }
    }
    Ok(EXIT_OK)
}

fn cmd_diff(file: &Path, fuel: u64, world: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    let src = read_source(file)?;
    let world = read_world(world)?;
    let c = match compile(&src, &PipelineConfig::default()) {
        Ok(c) => c,
        Err(e) => return Ok(report_compile_error(file, &e)),
    };
    let r = diff_run(&c, &world, fuel);
    write!(out, "{r}")?;
    Ok(if r.pass() { EXIT_OK } else { EXIT_DIFF })
}

/// Why a generated program fails, if it does.
#[derive(Debug)]
pub enum FuzzFailure {
    Compile(CompileError),
    SourceGoesWrong(Behavior),
    Mismatch(DiffReport),
}

pub fn check_generated(p: &GenProgram, fuel: u64) -> Option<FuzzFailure> {
    let c: Compiled = match compile(&p.render(), &PipelineConfig::default()) {
        Ok(c) => c,
        Err(e) => return Some(FuzzFailure::Compile(e)),
    };
    let r = diff_run(&c, &p.world(), fuel);
    match &r.behaviors[0].1 {
        b @ Behavior::GoesWrong(_) => Some(FuzzFailure::SourceGoesWrong(b.clone())),
        _ if !r.pass() => Some(FuzzFailure::Mismatch(r)),
        _ => None,
    }
}

/// Shrinks a failing program while it keeps failing the same way, and
/// writes the program and its world script under `dir`.
pub fn save_reproducer(dir: &Path, seed: u64, p: &GenProgram, fuel: u64) -> Result<PathBuf> {
    let kind = |f: &FuzzFailure| std::mem::discriminant(f);
    let first = check_generated(p, fuel).map(|f| kind(&f));
    let m = minimize(p, |q| check_generated(q, fuel).map(|f| kind(&f)) == first);
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("seed-{seed}.cm"));
    fs::write(&path, m.render())?;
    fs::write(path.with_extension("world"), m.world_text())?;
    Ok(path)
}

fn cmd_fuzz(
    start: u64,
    seeds: u64,
    size: usize,
    fuel: u64,
    dir: &Path,
    jobs: Option<usize>,
    out: &mut dyn Write,
) -> Result<u8> {
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let next = AtomicU64::new(start);
    let failures: Mutex<Vec<(u64, String)>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let seed = next.fetch_add(1, Ordering::Relaxed);
                if seed >= start + seeds {
                    break;
                }
                let p = gen(seed, size);
                if let Some(f) = check_generated(&p, fuel) {
                    let saved = save_reproducer(dir, seed, &p, fuel)
                        .map_or_else(|e| format!("could not save: {e:#}"), |path| path.display().to_string());
                    failures.lock().unwrap().push((seed, format!("{f:?}\n  reproducer: {saved}")));
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    failures.sort();
    for (seed, msg) in &failures {
        writeln!(out, "seed {seed}: FAIL {msg}")?;
    }
    writeln!(out, "{} seeds, {} failures", seeds, failures.len())?;
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_DIFF })
}

fn cmd_gen(seed: u64, size: usize, world: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    let p = gen(seed, size);
    write!(out, "{}", p.render())?;
    if let Some(w) = world {
        fs::write(w, p.world_text()).with_context(|| format!("writing {}", w.display()))?;
    }
    Ok(EXIT_OK)
}
