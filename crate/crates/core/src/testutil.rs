//! Shared fixtures for unit tests: the hand-written corpus.

use crate::base::World;

pub struct Sample {
    pub name: &'static str,
    pub src: &'static str,
    pub world: &'static str,
}

pub const CORPUS: &[Sample] = &[
    Sample { name: "average", src: include_str!("../../../corpus/average.cm"), world: "" },
    Sample {
        name: "bitops",
        src: include_str!("../../../corpus/bitops.cm"),
        world: include_str!("../../../corpus/bitops.world"),
    },
    Sample {
        name: "bubble_sort",
        src: include_str!("../../../corpus/bubble_sort.cm"),
        world: include_str!("../../../corpus/bubble_sort.world"),
    },
    Sample {
        name: "collatz",
        src: include_str!("../../../corpus/collatz.cm"),
        world: include_str!("../../../corpus/collatz.world"),
    },
    Sample { name: "conditional_expr", src: include_str!("../../../corpus/conditional_expr.cm"), world: "" },
    Sample {
        name: "externals",
        src: include_str!("../../../corpus/externals.cm"),
        world: include_str!("../../../corpus/externals.world"),
    },
    Sample {
        name: "factorial",
        src: include_str!("../../../corpus/factorial.cm"),
        world: include_str!("../../../corpus/factorial.world"),
    },
    Sample { name: "fib", src: include_str!("../../../corpus/fib.cm"), world: "" },
    Sample {
        name: "float_pressure",
        src: include_str!("../../../corpus/float_pressure.cm"),
        world: include_str!("../../../corpus/float_pressure.world"),
    },
    Sample {
        name: "floats",
        src: include_str!("../../../corpus/floats.cm"),
        world: include_str!("../../../corpus/floats.world"),
    },
    Sample {
        name: "gcd",
        src: include_str!("../../../corpus/gcd.cm"),
        world: include_str!("../../../corpus/gcd.world"),
    },
    Sample { name: "goto_loop", src: include_str!("../../../corpus/goto_loop.cm"), world: "" },
    Sample {
        name: "indirect_calls",
        src: include_str!("../../../corpus/indirect_calls.cm"),
        world: include_str!("../../../corpus/indirect_calls.world"),
    },
    Sample {
        name: "loops_nested",
        src: include_str!("../../../corpus/loops_nested.cm"),
        world: include_str!("../../../corpus/loops_nested.world"),
    },
    Sample {
        name: "many_args",
        src: include_str!("../../../corpus/many_args.cm"),
        world: include_str!("../../../corpus/many_args.world"),
    },
    Sample { name: "matrix", src: include_str!("../../../corpus/matrix.cm"), world: "" },
    Sample { name: "memory", src: include_str!("../../../corpus/memory.cm"), world: "" },
    Sample { name: "minimal", src: include_str!("../../../corpus/minimal.cm"), world: "" },
    Sample { name: "mutual_recursion", src: include_str!("../../../corpus/mutual_recursion.cm"), world: "" },
    Sample { name: "nested_blocks", src: include_str!("../../../corpus/nested_blocks.cm"), world: "" },
    Sample {
        name: "pressure",
        src: include_str!("../../../corpus/pressure.cm"),
        world: include_str!("../../../corpus/pressure.world"),
    },
    Sample {
        name: "sieve",
        src: include_str!("../../../corpus/sieve.cm"),
        world: include_str!("../../../corpus/sieve.world"),
    },
    Sample {
        name: "spin",
        src: include_str!("../../../corpus/spin.cm"),
        world: include_str!("../../../corpus/spin.world"),
    },
    Sample {
        name: "string_ops",
        src: include_str!("../../../corpus/string_ops.cm"),
        world: include_str!("../../../corpus/string_ops.world"),
    },
    Sample {
        name: "switch",
        src: include_str!("../../../corpus/switch.cm"),
        world: include_str!("../../../corpus/switch.world"),
    },
    Sample { name: "tailrec", src: include_str!("../../../corpus/tailrec.cm"), world: "" },
    Sample {
        name: "unsigned",
        src: include_str!("../../../corpus/unsigned.cm"),
        world: include_str!("../../../corpus/unsigned.world"),
    },
    Sample {
        name: "void_funcs",
        src: include_str!("../../../corpus/void_funcs.cm"),
        world: include_str!("../../../corpus/void_funcs.world"),
    },
];

impl Sample {
    pub fn world(&self) -> World {
        World::parse(self.world).expect("corpus world parses")
    }
}

pub fn sample(name: &str) -> &'static Sample {
    CORPUS.iter().find(|s| s.name == name).expect("corpus sample exists")
}

pub fn rtl_of(src: &str) -> crate::rtl::RtlProgram {
    let p = crate::cminor::parse_program(src).expect("parses");
    let r = crate::rtl::transl_program(&crate::selection::sel_program(&p)).expect("rtl");
    crate::opt::cse_program(&crate::opt::constprop_program(&r))
}

pub fn ltl_of(src: &str) -> crate::ltl::LtlProgram {
    let (l, _) = crate::regalloc::allocate_program(&rtl_of(src)).expect("allocates");
    crate::ltl::tunnel_program(&l)
}

pub fn ltlin_of(src: &str) -> crate::ltlin::LtlinProgram {
    crate::ltlin::transl_program(&ltl_of(src)).expect("linearizes")
}

pub fn linear_of(src: &str) -> crate::linear::LinearProgram {
    crate::linear::transl_program(&ltlin_of(src))
}

pub fn mach_of(src: &str) -> crate::mach::MachProgram {
    crate::mach::transl_program(&linear_of(src)).expect("stacks")
}

pub fn asm_of(src: &str) -> crate::asm::AsmProgram {
    crate::asm::transl_program(&mach_of(src)).expect("asm")
}
