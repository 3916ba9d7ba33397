//! Cminor: the source language of the back-end.

pub mod ast;
pub mod parse;
pub mod print;
pub mod typing;

pub use ast::{BinaryOp, CminorProgram, Const, Expr, Function, Stmt, UnaryOp};
pub use parse::{parse_expr, parse_program, ParseError};
pub use print::print_program;
pub use typing::typecheck_program;

use crate::base::{run, Outcome, World};
use crate::structured::Interp;

/// Runs a Cminor program for at most `fuel` steps.
pub fn run_program(p: &CminorProgram, world: World, fuel: u64) -> Result<Outcome, alloc::string::String> {
    Ok(run(&Interp::new(p)?, world, fuel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::{Behavior, Value};
    use alloc::vec;

    const AVERAGE: &str = r#"
var "data" { int32 3, int32 4, int32 8 }

"average"(arr, sz) : int, int -> float
{
  vars s, i;  stacksize 0;
  s = 0.0; i = 0;
  block { loop {
    if (i >= sz) exit(0);
    s = s +f floatofint(int32[arr + i*4]);
    i = i + 1;
  } }
  return s /f floatofint(sz);
}

"main"() : -> int
{
  vars r;
  r = "average"("data", 3) : int, int -> float;
  return intoffloat(r *f 3.0);
}
"#;

    fn run_src(src: &str, script: alloc::vec::Vec<Value>) -> Behavior {
        let p = parse_program(src).unwrap();
        typecheck_program(&p).unwrap();
        run_program(&p, World::new(script), 100_000).unwrap().behavior
    }

    #[test]
    fn average_example() {
        assert_eq!(run_src(AVERAGE, vec![]), Behavior::Converges(vec![], 15));
    }

    #[test]
    fn minimal_program() {
        assert_eq!(run_src(r#""main"() : -> int { return(0); }"#, vec![]), Behavior::Converges(vec![], 0));
    }

    #[test]
    fn division_by_zero_goes_wrong() {
        assert_eq!(run_src(r#""main"() : -> int { return(1/0); }"#, vec![]), Behavior::GoesWrong(vec![]));
    }

    #[test]
    fn exit_leaves_block() {
        let src = r#""main"() : -> int { vars i; i = 0; block { loop { exit(0); } } return i + 7; }"#;
        assert_eq!(run_src(src, vec![]), Behavior::Converges(vec![], 7));
    }

    #[test]
    fn goto_into_loop_body_and_switch() {
        let src = r#"
"main"() : -> int {
  vars i, n;
  i = 0; n = 0;
  goto middle;
  block { loop {
    n = n + 100;
    middle: i = i + 1;
    if (i == 3) exit(0);
  } }
  block { block { block {
    switch (i) { case 1: exit(0); case 3: exit(1); default: exit(2); }
  } n = n + 1; } n = n + 10; }
  return n;
}"#;
        assert_eq!(run_src(src, vec![]), Behavior::Converges(vec![], 210));
    }

    #[test]
    fn external_calls_consume_script() {
        let src = r#"
extern "read" : -> int;
extern "print_int" : int -> void;
"main"() : -> int { vars x; x = "read"() : -> int; "print_int"(x + 1) : int -> void; return x; }"#;
        let b = run_src(src, vec![Value::Int(41), Value::Int(0)]);
        let Behavior::Converges(t, 41) = b else { panic!("{b:?}") };
        assert_eq!(crate::base::events::dump_trace(&t), "read() -> 41\nprint_int(42) -> 0\n");
        let p = parse_program(src).unwrap();
        let short = run_program(&p, World::new(vec![Value::Int(41)]), 1000).unwrap().behavior;
        assert!(matches!(short, Behavior::GoesWrong(t) if t.len() == 1));
    }

    #[test]
    fn tail_recursion_and_fuel() {
        let src = r#"
"count"(n, acc) : int, int -> int { if (n == 0) return acc; tailcall "count"(n - 1, acc + 2) : int, int -> int; }
"main"() : -> int { vars r; r = "count"(1000, 0) : int, int -> int; return r; }"#;
        assert_eq!(run_src(src, vec![]), Behavior::Converges(vec![], 2000));
        let p = parse_program(src).unwrap();
        assert_eq!(run_program(&p, World::default(), 10).unwrap().behavior, Behavior::Diverges(vec![]));
    }

    #[test]
    fn falling_off_non_void_function_goes_wrong() {
        let src = r#""f"() : -> int { skip; } "main"() : -> int { vars x; x = "f"() : -> int; return 0; }"#;
        assert!(matches!(run_src(src, vec![]), Behavior::GoesWrong(_)));
    }

    #[test]
    fn type_errors() {
        let bad = [
            r#""main"() : -> int { vars x; x = 1; x = 1.0; return 0; }"#,
            r#""main"() : -> int { return 1.0; }"#,
            r#""main"() : -> int { return y; }"#,
            r#""f"(a) : int -> int { return a; } "main"() : -> int { vars r; r = "f"(1.0) : float -> int; return r; }"#,
            r#""main"() : -> int { exit(0); return 0; }"#,
            r#""main"() : -> int { goto nowhere; return 0; }"#,
            r#""main"() : -> int { l: skip; l: skip; return 0; }"#,
            r#""main"(x) : int -> int { return x; }"#,
        ];
        for src in bad {
            let p = parse_program(src).unwrap();
            assert!(typecheck_program(&p).is_err(), "{src}");
        }
        let p = parse_program(r#""main"() : -> int { vars x, y, z; x = y; z = 1.5; return 0; }"#).unwrap();
        let tys = typecheck_program(&p).unwrap();
        assert_eq!(tys["main"]["x"], crate::base::Typ::Int);
        assert_eq!(tys["main"]["z"], crate::base::Typ::Float);
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = parse_program("\"main\"() : -> int {\n  return 1 +;\n}").unwrap_err();
        assert_eq!((e.line, e.col), (2, 13));
        assert!(parse_program("\"main\"() : -> int { x = 1 }").is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        let p = parse_program(AVERAGE).unwrap();
        let text = print_program(&p);
        assert_eq!(parse_program(&text).unwrap(), p, "{text}");
    }

    #[test]
    fn operator_syntax() {
        let e = parse_expr("a + b * c - -3 >>u 2 <u x ? 1 : y ==f z").unwrap();
        assert_eq!(print::expr(&e), "a + b * c - (-3) >>u 2 <u x ? 1 : y ==f z");
        assert_eq!(parse_expr(&print::expr(&e)).unwrap(), e);
    }
}

#[cfg(test)]
mod corpus_tests {
    use super::*;
    use crate::base::Behavior;
    use crate::testutil::CORPUS;

    #[test]
    fn corpus_parses_typechecks_and_runs() {
        for s in CORPUS {
            let p = parse_program(s.src).unwrap_or_else(|e| panic!("{}: {e:?}", s.name));
            typecheck_program(&p).unwrap_or_else(|e| panic!("{}: {e}", s.name));
            let b = run_program(&p, s.world(), 2_000_000).unwrap().behavior;
            match (s.name, &b) {
                ("spin", Behavior::Diverges(t)) => assert_eq!(t.len(), 3),
                (_, Behavior::Converges(..)) => {}
                _ => panic!("{}: {b}", s.name),
            }
            std::println!("{}: {b:?}", s.name);
        }
    }
}
