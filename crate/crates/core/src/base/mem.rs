//! Block-structured memory with typed cells.
//!
//! A block is an interval `[lo, hi)` of byte offsets holding non-overlapping
//! cells; a cell records the value stored at an offset and the size of the
//! store. A load returns the cell's value normalized to the load quantity
//! when a cell of the same size starts at the same offset, and `Undef`
//! otherwise. Stores delete every cell they overlap, so the three cases
//! (same location, disjoint, partial overlap) fall out of the representation.
//! Block identifiers are never reused; freed blocks stay invalid forever.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::value::{cast, BlockId, Chunk, Value};

#[derive(Clone, Debug, PartialEq)]
struct Block {
    lo: i32,
    hi: i32,
    valid: bool,
    cells: BTreeMap<i32, (i32, Value)>,
}

/// Memory state. Cloning is the functional-update path; owners that do not
/// need the old state mutate in place.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mem {
    blocks: Vec<Block>,
}

impl Mem {
    pub fn new() -> Mem {
        Mem::default()
    }

    /// Identifier the next `alloc` will return.
    pub fn next_block(&self) -> BlockId {
        self.blocks.len() as BlockId + 1
    }

    /// Allocates a fresh block with bounds `[lo, hi)`. Never fails.
    pub fn alloc(&mut self, lo: i32, hi: i32) -> BlockId {
        self.blocks.push(Block { lo, hi, valid: true, cells: BTreeMap::new() });
        self.blocks.len() as BlockId
    }

    /// Invalidates block `b`. Idempotent.
    pub fn free(&mut self, b: BlockId) {
        if let Some(blk) = self.block_mut(b) {
            blk.valid = false;
            blk.cells.clear();
        }
    }

    pub fn valid_block(&self, b: BlockId) -> bool {
        self.block(b).is_some_and(|blk| blk.valid)
    }

    pub fn bounds(&self, b: BlockId) -> Option<(i32, i32)> {
        self.block(b).map(|blk| (blk.lo, blk.hi))
    }

    fn block(&self, b: BlockId) -> Option<&Block> {
        if b <= 0 {
            return None;
        }
        self.blocks.get(b as usize - 1)
    }

    fn block_mut(&mut self, b: BlockId) -> Option<&mut Block> {
        if b <= 0 {
            return None;
        }
        self.blocks.get_mut(b as usize - 1)
    }

    fn accessible(blk: &Block, chunk: Chunk, ofs: i32) -> bool {
        let end = ofs as i64 + chunk.size() as i64;
        blk.valid && blk.lo <= ofs && end <= blk.hi as i64
    }

    pub fn valid_access(&self, chunk: Chunk, b: BlockId, ofs: i32) -> bool {
        self.block(b).is_some_and(|blk| Self::accessible(blk, chunk, ofs))
    }

    pub fn load(&self, chunk: Chunk, b: BlockId, ofs: i32) -> Option<Value> {
        let blk = self.block(b)?;
        if !Self::accessible(blk, chunk, ofs) {
            return None;
        }
        Some(match blk.cells.get(&ofs) {
            Some(&(size, v)) if size == chunk.size() => cast(v, chunk),
            _ => Value::Undef,
        })
    }

    pub fn store(&mut self, chunk: Chunk, b: BlockId, ofs: i32, v: Value) -> Option<()> {
        let blk = self.block_mut(b)?;
        if !Self::accessible(blk, chunk, ofs) {
            return None;
        }
        let size = chunk.size();
        let end = ofs + size;
        // Cells are at most 8 bytes long, so only these can overlap.
        let doomed: Vec<i32> = blk
            .cells
            .range(ofs.saturating_sub(7)..end)
            .filter(|(&start, &(sz, _))| start + sz > ofs)
            .map(|(&start, _)| start)
            .collect();
        for start in doomed {
            blk.cells.remove(&start);
        }
        blk.cells.insert(ofs, (size, v));
        Some(())
    }

    /// Load through a pointer value.
    pub fn loadv(&self, chunk: Chunk, addr: Value) -> Option<Value> {
        match addr {
            Value::Ptr(b, ofs) => self.load(chunk, b, ofs),
            _ => None,
        }
    }

    /// Store through a pointer value.
    pub fn storev(&mut self, chunk: Chunk, addr: Value, v: Value) -> Option<()> {
        match addr {
            Value::Ptr(b, ofs) => self.store(chunk, b, ofs, v),
            _ => None,
        }
    }

    /// Functional variant of [`Mem::store`].
    pub fn stored(&self, chunk: Chunk, b: BlockId, ofs: i32, v: Value) -> Option<Mem> {
        let mut m = self.clone();
        m.store(chunk, b, ofs, v)?;
        Some(m)
    }

    /// Functional variant of [`Mem::alloc`].
    pub fn allocated(&self, lo: i32, hi: i32) -> (Mem, BlockId) {
        let mut m = self.clone();
        let b = m.alloc(lo, hi);
        (m, b)
    }

    /// Functional variant of [`Mem::free`].
    pub fn freed(&self, b: BlockId) -> Mem {
        let mut m = self.clone();
        m.free(b);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn int_then_float_is_undef() {
        let mut m = Mem::new();
        let b = m.alloc(0, 16);
        m.store(Chunk::Int32, b, 0, Value::Int(7)).unwrap();
        assert_eq!(m.load(Chunk::Float64, b, 0), Some(Value::Undef));
        assert_eq!(m.load(Chunk::Int32, b, 0), Some(Value::Int(7)));
    }

    #[test]
    fn freed_blocks_are_inaccessible() {
        let mut m = Mem::new();
        let b = m.alloc(0, 8);
        m.free(b);
        m.free(b);
        assert_eq!(m.load(Chunk::Int32, b, 0), None);
        assert_eq!(m.store(Chunk::Int32, b, 0, Value::Int(1)), None);
        let b2 = m.alloc(0, 8);
        assert_ne!(b, b2);
    }

    #[test]
    fn bounds_are_enforced() {
        let mut m = Mem::new();
        let b = m.alloc(-8, 4);
        assert!(m.load(Chunk::Int32, b, -8).is_some());
        assert!(m.load(Chunk::Int32, b, 1).is_none());
        assert!(m.load(Chunk::Float64, b, -3).is_none());
        assert!(m.load(Chunk::Int8U, b, 3).is_some());
        assert!(m.load(Chunk::Int8U, b, 4).is_none());
        assert!(m.load(Chunk::Int32, b, i32::MAX).is_none());
    }

    fn chunk() -> impl Strategy<Value = Chunk> {
        proptest::sample::select(Chunk::ALL.to_vec())
    }

    fn value() -> impl Strategy<Value = Value> {
        prop_oneof![
            any::<i32>().prop_map(Value::Int),
            any::<f64>().prop_map(Value::Float),
            (1i32..3, -4i32..4).prop_map(|(b, o)| Value::Ptr(b, o)),
            Just(Value::Undef),
        ]
    }

    proptest! {
        #[test]
        fn load_after_store(c1 in chunk(), c2 in chunk(), o1 in 0i32..24, o2 in 0i32..24,
                            v in value(), prior in value(), pc in chunk(), po in 0i32..24) {
            let mut m = Mem::new();
            let b = m.alloc(0, 32);
            let other = m.alloc(0, 32);
            m.store(pc, b, po, prior).unwrap();
            let before = m.load(c2, b, o2).unwrap();
            let before_other = m.load(c2, other, o2).unwrap();
            m.store(c1, b, o1, v).unwrap();
            let after = m.load(c2, b, o2).unwrap();
            if o1 == o2 && c1.size() == c2.size() {
                prop_assert_eq!(after, cast(v, c2));
            } else if o1 + c1.size() <= o2 || o2 + c2.size() <= o1 {
                prop_assert_eq!(after, before);
            } else {
                prop_assert_eq!(after, Value::Undef);
            }
            prop_assert_eq!(m.load(c2, other, o2).unwrap(), before_other);
        }
    }
}
