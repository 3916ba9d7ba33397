//! Programs, global environments and initial memory states.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::mem::Mem;
use super::value::{BlockId, Chunk, InitData, Signature, Value};

pub type Ident = String;

/// An external function: calls produce an observable event.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtFun {
    pub name: Ident,
    pub sig: Signature,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunDef<F> {
    Internal(F),
    External(ExtFun),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalVar {
    pub name: Ident,
    pub init: Vec<InitData>,
}

impl GlobalVar {
    pub fn size(&self) -> i32 {
        self.init.iter().map(InitData::size).sum()
    }
}

/// A whole program, parametrized by the representation of internal functions.
#[derive(Clone, Debug, PartialEq)]
pub struct Program<F> {
    pub globals: Vec<GlobalVar>,
    pub functions: Vec<(Ident, FunDef<F>)>,
    pub main: Ident,
}

impl<F> Program<F> {
    /// Applies `f` to every internal function, keeping names, order and
    /// global variables, so the initial memory state is unchanged.
    pub fn transform<G, E>(&self, mut f: impl FnMut(&Ident, &F) -> Result<G, E>) -> Result<Program<G>, E> {
        let mut functions = Vec::with_capacity(self.functions.len());
        for (name, fd) in &self.functions {
            let fd = match fd {
                FunDef::Internal(fun) => FunDef::Internal(f(name, fun)?),
                FunDef::External(ef) => FunDef::External(ef.clone()),
            };
            functions.push((name.clone(), fd));
        }
        Ok(Program { globals: self.globals.clone(), functions, main: self.main.clone() })
    }

    pub fn internal_functions(&self) -> impl Iterator<Item = (&Ident, &F)> {
        self.functions.iter().filter_map(|(n, fd)| match fd {
            FunDef::Internal(f) => Some((n, f)),
            FunDef::External(_) => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&FunDef<F>> {
        self.functions.iter().find(|(n, _)| n == name).map(|(_, fd)| fd)
    }

    pub fn internal(&self, name: &str) -> Option<&F> {
        match self.function(name)? {
            FunDef::Internal(f) => Some(f),
            FunDef::External(_) => None,
        }
    }
}

/// Symbol table: global variables occupy blocks 1, 2, ... in declaration
/// order, functions occupy blocks -1, -2, ... in declaration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Genv {
    symbols: BTreeMap<Ident, BlockId>,
    functions: BTreeMap<BlockId, usize>,
}

impl Genv {
    pub fn find_symbol(&self, id: &str) -> Option<BlockId> {
        self.symbols.get(id).copied()
    }

    pub fn symbol_address(&self, id: &str, ofs: i32) -> Option<Value> {
        self.find_symbol(id).map(|b| Value::Ptr(b, ofs))
    }

    /// Index into `Program::functions` of the function at block `b`.
    pub fn find_funct_ptr(&self, b: BlockId) -> Option<usize> {
        self.functions.get(&b).copied()
    }

    /// Resolves a function pointer value, which must have offset zero.
    pub fn find_funct(&self, v: Value) -> Option<usize> {
        match v {
            Value::Ptr(b, 0) => self.find_funct_ptr(b),
            _ => None,
        }
    }

    /// Block of the function at index `i`.
    pub fn funct_block(i: usize) -> BlockId {
        -(i as BlockId) - 1
    }
}

/// Builds the global environment and the initial memory state.
pub fn globalenv<F>(p: &Program<F>) -> Result<(Genv, Mem), String> {
    let mut genv = Genv::default();
    let mut mem = Mem::new();
    for gv in &p.globals {
        if genv.symbols.contains_key(&gv.name) {
            return Err(format!("duplicate identifier \"{}\"", gv.name));
        }
        let b = mem.alloc(0, gv.size());
        store_init(&mut mem, b, &gv.init);
        genv.symbols.insert(gv.name.clone(), b);
    }
    for (i, (name, _)) in p.functions.iter().enumerate() {
        if genv.symbols.contains_key(name) {
            return Err(format!("duplicate identifier \"{name}\""));
        }
        let b = Genv::funct_block(i);
        genv.symbols.insert(name.clone(), b);
        genv.functions.insert(b, i);
    }
    Ok((genv, mem))
}

fn store_init(mem: &mut Mem, b: BlockId, init: &[InitData]) {
    let mut ofs = 0;
    for d in init {
        let cell = match *d {
            InitData::Int8(n) => Some((Chunk::Int8U, Value::Int(n))),
            InitData::Int16(n) => Some((Chunk::Int16U, Value::Int(n))),
            InitData::Int32(n) => Some((Chunk::Int32, Value::Int(n))),
            InitData::Float32(x) => Some((Chunk::Float32, Value::Float(x))),
            InitData::Float64(x) => Some((Chunk::Float64, Value::Float(x))),
            InitData::Reserve(_) => None,
        };
        if let Some((chunk, v)) = cell {
            mem.store(chunk, b, ofs, v).expect("initializer fits its block");
        }
        ofs += d.size();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn prog(names: &[&str]) -> Program<()> {
        Program {
            globals: vec![GlobalVar { name: "g".into(), init: vec![InitData::Int32(5), InitData::Reserve(4)] }],
            functions: names.iter().map(|n| (Ident::from(*n), FunDef::Internal(()))).collect(),
            main: "main".into(),
        }
    }

    #[test]
    fn blocks_are_assigned_by_position() {
        let (ge, m) = globalenv(&prog(&["main", "f"])).unwrap();
        assert_eq!(ge.find_symbol("g"), Some(1));
        assert_eq!(ge.find_symbol("main"), Some(-1));
        assert_eq!(ge.find_funct(Value::Ptr(-2, 0)), Some(1));
        assert_eq!(ge.find_funct(Value::Ptr(-2, 4)), None);
        assert_eq!(m.load(Chunk::Int32, 1, 0), Some(Value::Int(5)));
        assert_eq!(m.load(Chunk::Int32, 1, 4), Some(Value::Undef));
        assert_eq!(m.bounds(1), Some((0, 8)));
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(globalenv(&prog(&["main", "g"])).is_err());
        assert!(globalenv(&prog(&["main", "main"])).is_err());
    }

    #[test]
    fn transform_keeps_initial_memory() {
        let p = prog(&["main"]);
        let q = p.transform(|_, _| Ok::<u8, ()>(1)).unwrap();
        assert_eq!(globalenv(&p).unwrap().1, globalenv(&q).unwrap().1);
    }
}
