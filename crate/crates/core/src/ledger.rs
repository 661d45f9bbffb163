//! Per-size tables of candidate subblocks and their occurrence counts.
//!
//! A block of size `k x l` is never stored cell by cell. It is interned as an
//! id inside the table for its size and described by the ids of its maximal
//! proper parts: `pc`/`sc` (drop last/first column, size `k x (l-1)`) and
//! `pr`/`sr` (drop last/first row, size `(k-1) x l`). Ids inside a table are
//! assigned in column-major lexicographic order, so ordering by `(pc, sc)`
//! (or `(pr, sr)` for single columns) is the canonical order of the blocks.

use std::ops::Range;

use crate::error::{CseError, Result};
use crate::grid::{Alphabet, Block};

/// Id of the empty block of any size. Its count is always `mn`.
pub(crate) const LAMBDA: u32 = u32::MAX;
/// Count not yet known.
pub(crate) const PENDING: u32 = u32::MAX;
const SELF: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub pc: u32,
    pub sc: u32,
    pub pr: u32,
    pub sr: u32,
    first_col: u32,
    last_col: u32,
    first_row: u32,
    last_row: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct SizeTable {
    pub k: usize,
    pub l: usize,
    pub entries: Vec<Entry>,
    pub counts: Vec<u32>,
    /// Ids ordered by `(pr, sr)`; empty for single-row tables.
    by_row: Vec<u32>,
}

impl SizeTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// First column, a `(k, 1)` id.
    pub fn first_col(&self, id: u32) -> u32 {
        if self.l == 1 { id } else { self.entries[id as usize].first_col }
    }

    pub fn last_col(&self, id: u32) -> u32 {
        if self.l == 1 { id } else { self.entries[id as usize].last_col }
    }

    /// First row, a `(1, l)` id.
    pub fn first_row(&self, id: u32) -> u32 {
        if self.k == 1 { id } else { self.entries[id as usize].first_row }
    }

    pub fn last_row(&self, id: u32) -> u32 {
        if self.k == 1 { id } else { self.entries[id as usize].last_row }
    }

    pub fn find_col(&self, pc: u32, sc: u32) -> Option<u32> {
        debug_assert!(self.l >= 2);
        self.entries
            .binary_search_by(|e| (e.pc, e.sc).cmp(&(pc, sc)))
            .ok()
            .map(|i| i as u32)
    }

    pub fn find_row(&self, pr: u32, sr: u32) -> Option<u32> {
        debug_assert!(self.k >= 2);
        self.by_row
            .binary_search_by(|&id| {
                let e = &self.entries[id as usize];
                (e.pr, e.sr).cmp(&(pr, sr))
            })
            .ok()
            .map(|i| self.by_row[i])
    }

    /// Ids whose column prefix is `pc`.
    fn col_group(&self, pc: u32) -> Range<usize> {
        if self.l == 1 {
            return 0..self.entries.len();
        }
        let lo = self.entries.partition_point(|e| e.pc < pc);
        let hi = self.entries.partition_point(|e| e.pc <= pc);
        lo..hi
    }

    /// Ids whose row prefix is `pr`, as a slice of the row ordering.
    fn row_group(&self, pr: u32) -> &[u32] {
        let lo = self.by_row.partition_point(|&id| self.entries[id as usize].pr < pr);
        let hi = self.by_row.partition_point(|&id| self.entries[id as usize].pr <= pr);
        &self.by_row[lo..hi]
    }

    fn positive(&self, id: u32) -> bool {
        let c = self.counts[id as usize];
        c != PENDING && c > 0
    }

    pub fn is_final(&self) -> bool {
        self.counts.iter().all(|&c| c != PENDING)
    }
}

/// Subblock counts `N(u|p)` for every size `k x l` with `1 <= k <= m`,
/// `1 <= l <= n`.
///
/// Each size holds a candidate set: every block whose four maximal parts all
/// occur. That set contains every block with a positive count; a block absent
/// from a finalized size has count zero.
#[derive(Debug, Clone)]
pub struct CountLedger {
    m: usize,
    n: usize,
    alphabet: Alphabet,
    tables: Vec<Option<SizeTable>>,
    retain_all: bool,
}

impl CountLedger {
    pub(crate) fn new(m: usize, n: usize, alphabet: Alphabet, retain_all: bool) -> Self {
        CountLedger { m, n, alphabet, tables: vec![None; m * n], retain_all }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub(crate) fn area(&self) -> u32 {
        (self.m * self.n) as u32
    }

    fn slot(&self, k: usize, l: usize) -> usize {
        (k - 1) * self.n + (l - 1)
    }

    pub(crate) fn try_table(&self, k: usize, l: usize) -> Option<&SizeTable> {
        if k == 0 || l == 0 || k > self.m || l > self.n {
            return None;
        }
        self.tables[self.slot(k, l)].as_ref()
    }

    pub(crate) fn table(&self, k: usize, l: usize) -> &SizeTable {
        self.try_table(k, l).unwrap_or_else(|| panic!("size ({k}, {l}) not materialized"))
    }

    pub(crate) fn table_mut(&mut self, k: usize, l: usize) -> &mut SizeTable {
        let s = self.slot(k, l);
        self.tables[s].as_mut().unwrap_or_else(|| panic!("size ({k}, {l}) not materialized"))
    }

    pub(crate) fn install(&mut self, table: SizeTable) {
        let s = self.slot(table.k, table.l);
        self.tables[s] = Some(table);
    }

    /// Count of block `id` of size `k x l`; empty blocks count `mn`.
    pub(crate) fn count_id(&self, k: usize, l: usize, id: u32) -> u32 {
        if k == 0 || l == 0 || id == LAMBDA {
            return self.area();
        }
        self.table(k, l).counts[id as usize]
    }

    /// True when size `(k, l)` has been fully resolved.
    pub fn is_finalized(&self, k: usize, l: usize) -> bool {
        self.try_table(k, l).is_some_and(SizeTable::is_final)
    }

    /// Releases tables the forward pass no longer needs after height `k`.
    pub(crate) fn release_after_height(&mut self, k: usize) {
        if self.retain_all || k < 4 {
            return;
        }
        let drop_k = k - 2;
        for l in 2..=self.n {
            let s = self.slot(drop_k, l);
            self.tables[s] = None;
        }
    }

    /// Builds the candidate table for `(k, l)` from the finalized smaller
    /// sizes. All counts start out pending.
    pub(crate) fn generate(&self, k: usize, l: usize) -> SizeTable {
        let mut entries = if k == 1 && l == 1 {
            (0..self.alphabet.size())
                .map(|_| Entry {
                    pc: LAMBDA,
                    sc: LAMBDA,
                    pr: LAMBDA,
                    sr: LAMBDA,
                    first_col: SELF,
                    last_col: SELF,
                    first_row: SELF,
                    last_row: SELF,
                })
                .collect()
        } else if k == 1 {
            self.column_join(k, l)
        } else if l == 1 {
            self.row_join(k, l)
        } else if self.join_cost_cols(k, l) <= self.join_cost_rows(k, l) {
            self.column_join(k, l)
        } else {
            self.row_join(k, l)
        };

        if l >= 2 {
            entries.sort_unstable_by_key(|e| (e.pc, e.sc));
        } else if k >= 2 {
            entries.sort_unstable_by_key(|e| (e.pr, e.sr));
        }
        for (id, e) in entries.iter_mut().enumerate() {
            if l == 1 {
                e.first_col = id as u32;
                e.last_col = id as u32;
            }
            if k == 1 {
                e.first_row = id as u32;
                e.last_row = id as u32;
            }
        }
        let by_row = if k == 1 {
            Vec::new()
        } else {
            let mut ids: Vec<u32> = (0..entries.len() as u32).collect();
            if l >= 2 {
                ids.sort_unstable_by_key(|&id| {
                    let e = &entries[id as usize];
                    (e.pr, e.sr)
                });
            }
            ids
        };
        let counts = vec![PENDING; entries.len()];
        SizeTable { k, l, entries, counts, by_row }
    }

    fn join_cost_cols(&self, k: usize, l: usize) -> usize {
        let t = self.table(k, l - 1);
        (0..t.len() as u32)
            .filter(|&x| t.positive(x))
            .map(|x| t.col_group(t.entries[x as usize].sc).len())
            .sum()
    }

    fn join_cost_rows(&self, k: usize, l: usize) -> usize {
        let t = self.table(k - 1, l);
        (0..t.len() as u32)
            .filter(|&x| t.positive(x))
            .map(|x| self.row_group_of(t, t.entries[x as usize].sr).len())
            .sum()
    }

    fn row_group_of<'t>(&self, t: &'t SizeTable, pr: u32) -> RowGroup<'t> {
        if t.k == 1 {
            RowGroup::All(t.len())
        } else {
            RowGroup::Ids(t.row_group(pr))
        }
    }

    /// Candidates `a:w:c` from positive pairs `(a:w, w:c)` of width `l-1`.
    fn column_join(&self, k: usize, l: usize) -> Vec<Entry> {
        let t = self.table(k, l - 1);
        let up = (k >= 2).then(|| self.table(k - 1, l));
        let top = (k >= 2).then(|| self.table(1, l));
        let mut out = Vec::new();
        for x in 0..t.len() as u32 {
            if !t.positive(x) {
                continue;
            }
            let ex = t.entries[x as usize];
            for y in t.col_group(ex.sc) {
                let y = y as u32;
                if !t.positive(y) {
                    continue;
                }
                let ey = t.entries[y as usize];
                let mut e = Entry {
                    pc: x,
                    sc: y,
                    pr: LAMBDA,
                    sr: LAMBDA,
                    first_col: t.first_col(x),
                    last_col: t.last_col(y),
                    first_row: SELF,
                    last_row: SELF,
                };
                if let (Some(up), Some(top)) = (up, top) {
                    let Some(pr) = up.find_col(ex.pr, ey.pr).filter(|&id| up.positive(id)) else { continue };
                    let Some(sr) = up.find_col(ex.sr, ey.sr).filter(|&id| up.positive(id)) else { continue };
                    let (Some(fr), Some(lr)) = (
                        top.find_col(t.first_row(x), t.first_row(y)),
                        top.find_col(t.last_row(x), t.last_row(y)),
                    ) else {
                        continue;
                    };
                    e.pr = pr;
                    e.sr = sr;
                    e.first_row = fr;
                    e.last_row = lr;
                }
                out.push(e);
            }
        }
        out
    }

    /// Candidates `e/v/g` from positive pairs `(e/v, v/g)` of height `k-1`.
    fn row_join(&self, k: usize, l: usize) -> Vec<Entry> {
        let t = self.table(k - 1, l);
        let left = (l >= 2).then(|| self.table(k, l - 1));
        let cols = (l >= 2).then(|| self.table(k, 1));
        let mut out = Vec::new();
        for x in 0..t.len() as u32 {
            if !t.positive(x) {
                continue;
            }
            let ex = t.entries[x as usize];
            for y in self.row_group_of(t, ex.sr).iter() {
                if !t.positive(y) {
                    continue;
                }
                let ey = t.entries[y as usize];
                let mut e = Entry {
                    pc: LAMBDA,
                    sc: LAMBDA,
                    pr: x,
                    sr: y,
                    first_col: SELF,
                    last_col: SELF,
                    first_row: t.first_row(x),
                    last_row: t.last_row(y),
                };
                if let (Some(left), Some(cols)) = (left, cols) {
                    let Some(pc) = left.find_row(ex.pc, ey.pc).filter(|&id| left.positive(id)) else { continue };
                    let Some(sc) = left.find_row(ex.sc, ey.sc).filter(|&id| left.positive(id)) else { continue };
                    let (Some(fc), Some(lc)) = (
                        cols.find_row(t.first_col(x), t.first_col(y)),
                        cols.find_row(t.last_col(x), t.last_col(y)),
                    ) else {
                        continue;
                    };
                    e.pc = pc;
                    e.sc = sc;
                    e.first_col = fc;
                    e.last_col = lc;
                }
                out.push(e);
            }
        }
        out
    }

    /// Id of the middle columns `σ_c(π_c(b))`, of size `k x (l-2)`.
    pub(crate) fn mid_col(&self, k: usize, l: usize, id: u32) -> u32 {
        debug_assert!(l >= 2);
        if l == 2 {
            return LAMBDA;
        }
        let pc = self.table(k, l).entries[id as usize].pc;
        self.table(k, l - 1).entries[pc as usize].sc
    }

    /// Id of the middle rows `σ_r(π_r(b))`, of size `(k-2) x l`.
    pub(crate) fn mid_row(&self, k: usize, l: usize, id: u32) -> u32 {
        debug_assert!(k >= 2);
        if k == 2 {
            return LAMBDA;
        }
        let pr = self.table(k, l).entries[id as usize].pr;
        self.table(k - 1, l).entries[pr as usize].sr
    }

    /// Largest positive id of a finalized size, if any.
    fn max_positive(&self, k: usize, l: usize) -> Option<u32> {
        let t = self.table(k, l);
        (0..t.len() as u32).rev().find(|&id| t.positive(id))
    }

    /// Id of `x(k,1)`, the column-major largest `k x 1` member of `B(p)`, when
    /// it appears among the candidates.
    ///
    /// `B(p)` admits every column whose middle occurs, so the largest one has
    /// `J-1` on both ends and the largest occurring middle between them. The
    /// candidates are a subset of `B(p)`, so `x` is a candidate exactly when
    /// it is the last one.
    pub(crate) fn largest_column(&self, k: usize) -> Option<u32> {
        let t = self.table(k, 1);
        let top = self.alphabet.max_symbol() as u32;
        let last = (t.len() as u32).checked_sub(1)?;
        if k == 1 {
            return (last == top).then_some(last);
        }
        if t.first_row(last) != top || t.last_row(last) != top {
            return None;
        }
        if k >= 3 && Some(self.mid_row(k, 1, last)) != self.max_positive(k - 2, 1) {
            return None;
        }
        Some(last)
    }

    /// Id of `x(1,l)`, the row counterpart of [`Self::largest_column`].
    pub(crate) fn largest_row(&self, l: usize) -> Option<u32> {
        let t = self.table(1, l);
        let top = self.alphabet.max_symbol() as u32;
        let last = (t.len() as u32).checked_sub(1)?;
        if l == 1 {
            return (last == top).then_some(last);
        }
        if t.first_col(last) != top || t.last_col(last) != top {
            return None;
        }
        if l >= 3 && Some(self.mid_col(1, l, last)) != self.max_positive(1, l - 2) {
            return None;
        }
        Some(last)
    }

    /// Materializes block `id` of size `k x l`.
    pub(crate) fn materialize(&self, k: usize, l: usize, id: u32) -> Block {
        let mut col_ids = Vec::with_capacity(l);
        let mut cur = id;
        for w in (2..=l).rev() {
            let t = self.table(k, w);
            col_ids.push(t.last_col(cur));
            cur = t.entries[cur as usize].pc;
        }
        col_ids.push(cur);
        col_ids.reverse();
        let columns: Vec<Vec<u8>> = col_ids.iter().map(|&c| self.column_cells(k, c)).collect();
        let mut cells = Vec::with_capacity(k * l);
        for i in 0..k {
            cells.extend(columns.iter().map(|c| c[i]));
        }
        Block::from_cells_unchecked(k, l, cells, self.alphabet)
    }

    fn column_cells(&self, k: usize, id: u32) -> Vec<u8> {
        let mut out = Vec::with_capacity(k);
        let mut cur = id;
        for h in (2..=k).rev() {
            let t = self.table(h, 1);
            out.push(t.last_row(cur) as u8);
            cur = t.entries[cur as usize].pr;
        }
        out.push(cur as u8);
        out.reverse();
        out
    }

    /// Id of a non-empty block, or `None` when it is not a candidate.
    pub(crate) fn find(&self, b: &Block) -> Option<u32> {
        let (k, l) = (b.height(), b.width());
        if k == 0 || l == 0 || k > self.m || l > self.n {
            return None;
        }
        // Vertical segments of every column: seg[s] = id of rows s..s+h.
        let mut col_ids = Vec::with_capacity(l);
        for j in 0..l {
            let mut seg: Vec<u32> = (0..k).map(|i| b.get(i, j) as u32).collect();
            for h in 2..=k {
                let t = self.try_table(h, 1)?;
                let next: Option<Vec<u32>> = (0..=k - h).map(|s| t.find_row(seg[s], seg[s + 1])).collect();
                seg = next?;
            }
            col_ids.push(seg[0]);
        }
        let mut span = col_ids;
        for w in 2..=l {
            let t = self.try_table(k, w)?;
            let next: Option<Vec<u32>> = (0..=l - w).map(|s| t.find_col(span[s], span[s + 1])).collect();
            span = next?;
        }
        Some(span[0])
    }

    /// Id of the `k x l` window of `p` at every torus anchor (row-major),
    /// given the ids of the windows one column narrower (`l >= 2`) or one row
    /// shorter (`l == 1`).
    pub(crate) fn anchor_ids(&self, k: usize, l: usize, p: &Block, prev: &[u32], exec: crate::Exec) -> Vec<u32> {
        let (m, n) = (self.m, self.n);
        let t = self.table(k, l);
        exec.map_range(m * n, |a| {
            let (i, j) = (a / n, a % n);
            if k == 1 && l == 1 {
                p.get(i, j) as u32
            } else if l == 1 {
                t.find_row(prev[a], prev[((i + 1) % m) * n + j]).expect("occurring column is a candidate")
            } else {
                t.find_col(prev[a], prev[i * n + (j + 1) % n]).expect("occurring block is a candidate")
            }
        })
    }

    pub(crate) fn check_complete(&self, k: usize, l: usize) -> Result<()> {
        let smaller_ok = |kk: usize, ll: usize| kk == 0 || ll == 0 || self.is_finalized(kk, ll);
        if smaller_ok(k, l.saturating_sub(1)) && smaller_ok(k.saturating_sub(1), l) {
            Ok(())
        } else {
            Err(CseError::LedgerIncomplete { k, l })
        }
    }
}

enum RowGroup<'t> {
    All(usize),
    Ids(&'t [u32]),
}

impl RowGroup<'_> {
    fn len(&self) -> usize {
        match self {
            RowGroup::All(n) => *n,
            RowGroup::Ids(ids) => ids.len(),
        }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        match self {
            RowGroup::All(n) => Box::new(0..*n as u32),
            RowGroup::Ids(ids) => Box::new(ids.iter().copied()),
        }
    }
}
