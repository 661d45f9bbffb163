//! Blocks over a finite alphabet and their flat-torus geometry.
//!
//! Coordinates are 0-based throughout: anchor `(i, j)` addresses row `i`,
//! column `j`. Reads past the bottom or right edge wrap around.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{CseError, Result};

/// Symbol alphabet `{0, .., size-1}` with `2 <= size <= 256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet(u16);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return Err(CseError::BadAlphabet(size));
        }
        Ok(Alphabet(size as u16))
    }

    pub const BINARY: Alphabet = Alphabet(2);

    pub fn size(self) -> usize {
        self.0 as usize
    }

    /// Largest symbol, `J - 1`.
    pub fn max_symbol(self) -> u8 {
        (self.0 - 1) as u8
    }

    /// Bits per raw symbol, `ceil(log2 J)`.
    pub fn raw_bits(self) -> u32 {
        usize::BITS - (self.size() - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Concatenation left to right (`s:t`), decomposition `a:w:c`.
    Columns,
    /// Concatenation top to bottom (`u/v`), decomposition `e/v/g`.
    Rows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    LastRow,
    FirstRow,
    LastCol,
    FirstCol,
}

/// An `m x n` grid of symbols stored row-major.
///
/// Empty blocks keep their one nonzero dimension (`k x 0` or `0 x l`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Block {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
    alphabet: Alphabet,
}

impl Block {
    pub fn new(rows: &[Vec<u8>], alphabet: Alphabet) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(CseError::RaggedRows);
        }
        let cells: Vec<u8> = rows.iter().flatten().copied().collect();
        Self::from_cells(height, width, cells, alphabet)
    }

    pub fn from_cells(rows: usize, cols: usize, cells: Vec<u8>, alphabet: Alphabet) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(CseError::DimensionMismatch("cell count differs from rows*cols"));
        }
        if let Some(&s) = cells.iter().find(|&&s| s as usize >= alphabet.size()) {
            return Err(CseError::SymbolOutOfRange { symbol: s as usize, size: alphabet.size() });
        }
        Ok(Block { rows, cols, cells, alphabet })
    }

    pub fn empty(rows: usize, cols: usize, alphabet: Alphabet) -> Self {
        debug_assert!(rows == 0 || cols == 0);
        Block { rows, cols, cells: Vec::new(), alphabet }
    }

    pub(crate) fn from_cells_unchecked(rows: usize, cols: usize, cells: Vec<u8>, alphabet: Alphabet) -> Self {
        debug_assert_eq!(cells.len(), rows * cols);
        Block { rows, cols, cells, alphabet }
    }

    pub fn height(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.cols
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.cells[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        self.cells.chunks(self.cols).map(<[u8]>::to_vec).collect()
    }

    /// Cells flattened column by column, each column top to bottom.
    pub fn col_major(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.cells.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Lexicographic column-major comparison of two equally sized blocks.
    pub fn cmp_col_major(&self, other: &Block) -> Ordering {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for j in 0..self.cols {
            for i in 0..self.rows {
                match self.get(i, j).cmp(&other.get(i, j)) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
            }
        }
        Ordering::Equal
    }

    /// Reads a `k x l` window of the torus anchored at `(i, j)`.
    ///
    /// Windows may extend up to `2m x 2n`, the doubled block `(p:p)/(p:p)`.
    pub fn torus_subblock(&self, i: usize, j: usize, k: usize, l: usize) -> Result<Block> {
        if self.is_empty() || i >= self.rows || j >= self.cols || k > 2 * self.rows || l > 2 * self.cols {
            return Err(CseError::AnchorOutOfRange { i, j, k, l });
        }
        Ok(self.window(i, j, k, l))
    }

    pub(crate) fn window(&self, i: usize, j: usize, k: usize, l: usize) -> Block {
        if k == 0 || l == 0 {
            return Block::empty(k, l, self.alphabet);
        }
        let mut cells = Vec::with_capacity(k * l);
        for di in 0..k {
            let row = (i + di) % self.rows;
            for dj in 0..l {
                cells.push(self.get(row, (j + dj) % self.cols));
            }
        }
        Block::from_cells_unchecked(k, l, cells, self.alphabet)
    }

    /// `s:t` (axis = columns) or `s/t` (axis = rows).
    pub fn concat(s: &Block, t: &Block, axis: Axis) -> Result<Block> {
        match axis {
            Axis::Columns => {
                if s.rows != t.rows {
                    return Err(CseError::DimensionMismatch("column concatenation needs equal heights"));
                }
                let cols = s.cols + t.cols;
                let mut cells = Vec::with_capacity(s.rows * cols);
                for i in 0..s.rows {
                    cells.extend_from_slice(&s.cells[i * s.cols..(i + 1) * s.cols]);
                    cells.extend_from_slice(&t.cells[i * t.cols..(i + 1) * t.cols]);
                }
                Ok(Block::from_cells_unchecked(s.rows, cols, cells, s.alphabet))
            }
            Axis::Rows => {
                if s.cols != t.cols {
                    return Err(CseError::DimensionMismatch("row concatenation needs equal widths"));
                }
                let mut cells = s.cells.clone();
                cells.extend_from_slice(&t.cells);
                Ok(Block::from_cells_unchecked(s.rows + t.rows, s.cols, cells, s.alphabet))
            }
        }
    }

    /// Drops one row or column. `LastRow` is the row prefix, `FirstRow` the
    /// row suffix, and likewise for columns.
    pub fn trim(&self, side: Side) -> Result<Block> {
        let (rows, cols, r0, c0) = match side {
            Side::LastRow | Side::FirstRow if self.rows == 0 => return Err(CseError::EmptyBlock),
            Side::LastCol | Side::FirstCol if self.cols == 0 => return Err(CseError::EmptyBlock),
            Side::LastRow => (self.rows - 1, self.cols, 0, 0),
            Side::FirstRow => (self.rows - 1, self.cols, 1, 0),
            Side::LastCol => (self.rows, self.cols - 1, 0, 0),
            Side::FirstCol => (self.rows, self.cols - 1, 0, 1),
        };
        Ok(self.sub(r0, c0, rows, cols))
    }

    /// Plain (non-wrapping) sub-rectangle.
    pub(crate) fn sub(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Block {
        if rows == 0 || cols == 0 {
            return Block::empty(rows, cols, self.alphabet);
        }
        let mut cells = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            cells.extend_from_slice(&self.cells[i * self.cols + c0..i * self.cols + c0 + cols]);
        }
        Block::from_cells_unchecked(rows, cols, cells, self.alphabet)
    }

    /// Middle columns `σ_c(π_c(b))`; empty when the width is below 2.
    pub fn middle_cols(&self) -> Block {
        let w = self.cols.saturating_sub(2);
        if w == 0 {
            return Block::empty(self.rows, 0, self.alphabet);
        }
        self.sub(0, 1, self.rows, w)
    }

    /// Middle rows `σ_r(π_r(b))`.
    pub fn middle_rows(&self) -> Block {
        let h = self.rows.saturating_sub(2);
        if h == 0 {
            return Block::empty(0, self.cols, self.alphabet);
        }
        self.sub(1, 0, h, self.cols)
    }

    pub fn column(&self, j: usize) -> Block {
        self.sub(0, j, self.rows, 1)
    }

    pub fn row(&self, i: usize) -> Block {
        self.sub(i, 0, 1, self.cols)
    }

    /// All `m x n` torus windows, sorted column-major and deduplicated.
    pub fn shift_class(&self) -> ShiftClass {
        let mut members: Vec<Block> = (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .map(|(i, j)| self.window(i, j, self.rows, self.cols))
            .collect();
        members.sort_by(Block::cmp_col_major);
        members.dedup();
        ShiftClass { members }
    }

    pub fn is_primitive(&self) -> bool {
        !self.is_empty() && self.shift_class().len() == self.rows * self.cols
    }

    /// Position of this block inside its sorted shift class.
    pub fn rank(&self) -> Result<usize> {
        if !self.is_primitive() {
            return Err(CseError::NotPrimitive);
        }
        let class = self.shift_class();
        Ok(class.members.binary_search_by(|q| q.cmp_col_major(self)).expect("block is in its own class"))
    }
}

impl PartialOrd for Block {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by dimensions, then column-major lexicographically.
impl Ord for Block {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.rows, self.cols)
            .cmp(&(other.rows, other.cols))
            .then_with(|| self.cmp_col_major(other))
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "λ[{},{}]", self.rows, self.cols);
        }
        write!(f, "{:?}", self.to_rows())
    }
}

/// The distinct torus shifts of a block in column-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftClass {
    members: Vec<Block>,
}

impl ShiftClass {
    pub fn members(&self) -> &[Block] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn select(&self, rank: usize) -> Result<&Block> {
        self.members.get(rank).ok_or(CseError::RankOutOfRange { rank, size: self.members.len() })
    }
}

/// Returns the member of `q`'s shift class at position `rank`.
pub fn select_by_rank(q: &Block, rank: usize) -> Result<Block> {
    let size = q.height() * q.width();
    if rank >= size {
        return Err(CseError::RankOutOfRange { rank, size });
    }
    q.shift_class().select(rank).cloned()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn block(rows: &[&[u8]]) -> Block {
        let rows: Vec<Vec<u8>> = rows.iter().map(|r| r.to_vec()).collect();
        let j = rows.iter().flatten().copied().max().unwrap_or(1).max(1) as usize + 1;
        Block::new(&rows, Alphabet::new(j).unwrap()).unwrap()
    }

    pub fn binary(rows: &[&[u8]]) -> Block {
        let rows: Vec<Vec<u8>> = rows.iter().map(|r| r.to_vec()).collect();
        Block::new(&rows, Alphabet::BINARY).unwrap()
    }

    pub fn p2() -> Block {
        binary(&[&[0, 1], &[1, 1]])
    }

    pub fn p4() -> Block {
        binary(&[&[0, 1, 1], &[1, 1, 1]])
    }

    /// Every `m x n` block over `J` symbols, in counting order.
    pub fn all_blocks(m: usize, n: usize, j: usize) -> Vec<Block> {
        let alphabet = Alphabet::new(j).unwrap();
        let total = j.pow((m * n) as u32);
        (0..total)
            .map(|mut code| {
                let cells = (0..m * n)
                    .map(|_| {
                        let s = (code % j) as u8;
                        code /= j;
                        s
                    })
                    .collect();
                Block::from_cells(m, n, cells, alphabet).unwrap()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn make_block_validates() {
        let p = p2();
        assert_eq!((p.height(), p.width()), (2, 2));
        assert_eq!(
            Block::new(&[vec![0, 1], vec![1]], Alphabet::BINARY),
            Err(CseError::RaggedRows)
        );
        assert_eq!(
            Block::new(&[vec![0, 2]], Alphabet::BINARY),
            Err(CseError::SymbolOutOfRange { symbol: 2, size: 2 })
        );
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(257).is_err());
    }

    #[test]
    fn torus_reads_wrap() {
        // 1-based anchor (2,2) of p2.
        assert_eq!(p2().torus_subblock(1, 1, 2, 2).unwrap(), binary(&[&[1, 1], &[1, 0]]));
        let e = p2().torus_subblock(0, 0, 0, 3).unwrap();
        assert!(e.is_empty());
        assert_eq!((e.height(), e.width()), (0, 3));
        assert_eq!(p4().torus_subblock(0, 2, 1, 3).unwrap(), binary(&[&[1, 0, 1]]));
        assert!(p2().torus_subblock(2, 0, 1, 1).is_err());
        assert!(p2().torus_subblock(0, 0, 5, 1).is_err());
        assert!(p2().torus_subblock(0, 0, 4, 4).is_ok());
    }

    #[test]
    fn concat_and_trim() {
        let cols = Block::concat(&binary(&[&[0], &[1]]), &binary(&[&[1], &[1]]), Axis::Columns).unwrap();
        assert_eq!(cols, p2());
        let rows = Block::concat(&binary(&[&[0, 1]]), &binary(&[&[1, 1]]), Axis::Rows).unwrap();
        assert_eq!(rows, p2());
        assert!(matches!(
            Block::concat(&binary(&[&[0, 1]]), &binary(&[&[1], &[1]]), Axis::Columns),
            Err(CseError::DimensionMismatch(_))
        ));

        assert_eq!(p2().trim(Side::FirstCol).unwrap(), binary(&[&[1], &[1]]));
        let e = p4().trim(Side::FirstRow).unwrap().trim(Side::LastRow).unwrap();
        assert!(e.is_empty());
        assert_eq!((e.height(), e.width()), (0, 3));
        assert_eq!(p4().trim(Side::LastCol).unwrap(), binary(&[&[0, 1], &[1, 1]]));
        assert_eq!(e.trim(Side::FirstRow), Err(CseError::EmptyBlock));
    }

    #[test]
    fn shift_classes_and_primitivity() {
        let class = p2().shift_class();
        let strings: Vec<Vec<u8>> = class.members().iter().map(Block::col_major).collect();
        assert_eq!(strings, vec![vec![0, 1, 1, 1], vec![1, 0, 1, 1], vec![1, 1, 0, 1], vec![1, 1, 1, 0]]);
        assert_eq!(binary(&[&[0, 1], &[0, 1]]).shift_class().len(), 2);
        assert_eq!(binary(&[&[0]]).shift_class().len(), 1);

        assert!(p2().is_primitive());
        assert!(!binary(&[&[0, 1], &[0, 1]]).is_primitive());
        assert!(p4().is_primitive());
    }

    #[test]
    fn rank_and_select() {
        assert_eq!(p2().rank().unwrap(), 0);
        assert_eq!(select_by_rank(&p2(), 3).unwrap(), binary(&[&[1, 1], &[1, 0]]));
        assert_eq!(select_by_rank(&p2(), 4), Err(CseError::RankOutOfRange { rank: 4, size: 4 }));
        assert_eq!(binary(&[&[0, 1], &[0, 1]]).rank(), Err(CseError::NotPrimitive));
    }

    #[test]
    fn rank_round_trip_exhaustive() {
        for (m, n) in [(1, 2), (2, 2), (2, 3), (3, 3), (3, 4)] {
            for p in all_blocks(m, n, 2).into_iter().filter(Block::is_primitive) {
                let r = p.rank().unwrap();
                let class = p.shift_class();
                assert_eq!(class.len(), m * n);
                for q in class.members() {
                    assert_eq!(select_by_rank(q, r).unwrap(), p);
                    assert!(q.is_primitive());
                }
            }
        }
    }

    #[test]
    fn anchors_enumerate_class_once() {
        let p = p4();
        let mut windows: Vec<Block> = (0..2)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| p.torus_subblock(i, j, 2, 3).unwrap())
            .collect();
        windows.sort_by(Block::cmp_col_major);
        assert_eq!(windows, p.shift_class().members());
    }

    #[test]
    fn raw_bits() {
        assert_eq!(Alphabet::BINARY.raw_bits(), 1);
        assert_eq!(Alphabet::new(3).unwrap().raw_bits(), 2);
        assert_eq!(Alphabet::new(4).unwrap().raw_bits(), 2);
        assert_eq!(Alphabet::new(16).unwrap().raw_bits(), 4);
        assert_eq!(Alphabet::new(256).unwrap().raw_bits(), 8);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_block() -> impl Strategy<Value = Block> {
            (1usize..5, 1usize..5, 2usize..5).prop_flat_map(|(m, n, j)| {
                proptest::collection::vec(0..j as u8, m * n)
                    .prop_map(move |cells| Block::from_cells(m, n, cells, Alphabet::new(j).unwrap()).unwrap())
            })
        }

        proptest! {
            #[test]
            fn last_column_rejoins(b in arb_block()) {
                let head = b.trim(Side::LastCol).unwrap();
                let last = b.column(b.width() - 1);
                prop_assert_eq!(Block::concat(&head, &last, Axis::Columns).unwrap(), b);
            }

            #[test]
            fn primitivity_is_shift_invariant(b in arb_block()) {
                let prim = b.is_primitive();
                for q in b.shift_class().members() {
                    prop_assert_eq!(q.is_primitive(), prim);
                }
            }
        }
    }
}
