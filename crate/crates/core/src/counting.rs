//! Subblock occurrence counts, candidate sets, cores and the coding order.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{CseError, Result};
use crate::grid::{Alphabet, Axis, Block, Side};
use crate::inference::BlockClass;
use crate::ledger::{CountLedger, PENDING};
use crate::session;

/// Number of torus anchors of `p` where `u` occurs. Empty blocks occur at
/// every anchor.
pub fn count(u: &Block, p: &Block) -> Result<u32> {
    let (m, n) = (p.height(), p.width());
    if u.height() > m || u.width() > n {
        return Err(CseError::OversizeQuery { qk: u.height(), ql: u.width(), m, n });
    }
    if u.is_empty() {
        return Ok((m * n) as u32);
    }
    let mut hits = 0;
    for i in 0..m {
        for j in 0..n {
            if p.window(i, j, u.height(), u.width()) == *u {
                hits += 1;
            }
        }
    }
    Ok(hits)
}

/// Counts of every size of a primitive block.
pub fn build_ledger(p: &Block) -> Result<CountLedger> {
    if !p.is_primitive() {
        return Err(CseError::NotPrimitive);
    }
    session::count_all(p, crate::Exec::default())
}

impl CountLedger {
    /// `N(u)`; zero for blocks that are not candidates, `mn` when empty.
    pub fn count(&self, u: &Block) -> u32 {
        if u.is_empty() {
            return self.area();
        }
        match self.find(u) {
            Some(id) => match self.table(u.height(), u.width()).counts[id as usize] {
                PENDING => 0,
                c => c,
            },
            None => 0,
        }
    }

    /// Candidate blocks of one size with their counts, in canonical order.
    pub fn blocks(&self, k: usize, l: usize) -> Vec<(Block, u32)> {
        let Some(t) = self.try_table(k, l) else { return Vec::new() };
        (0..t.len() as u32).map(|id| (self.materialize(k, l, id), t.counts[id as usize])).collect()
    }

    /// Overwrites a stored count, for fault injection in tests and tools.
    pub fn override_count(&mut self, u: &Block, value: u32) -> bool {
        match self.find(u) {
            Some(id) => {
                self.table_mut(u.height(), u.width()).counts[id as usize] = value;
                true
            }
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IdentityViolation {
    /// Counts of one size do not total `mn`.
    Sum { k: usize, l: usize, total: u64 },
    /// `N(v)` differs from the sum over its one-column (or one-row) extensions.
    Directional { k: usize, l: usize, axis: &'static str, block: String, expected: u32, found: u64 },
}

/// Checks the sum identity and both directional identities on every
/// materialized size. Returns the violations found (empty when consistent).
pub fn verify_identities(ledger: &CountLedger) -> Vec<IdentityViolation> {
    let (m, n) = ledger.dims();
    let area = (m * n) as u64;
    let mut out = Vec::new();
    let sizes: Vec<(usize, usize)> =
        (1..=m).flat_map(|k| (1..=n).map(move |l| (k, l))).filter(|&(k, l)| ledger.is_finalized(k, l)).collect();
    let tables: HashMap<(usize, usize), Vec<(Block, u32)>> =
        sizes.iter().map(|&(k, l)| ((k, l), ledger.blocks(k, l))).collect();

    for &(k, l) in &sizes {
        let total: u64 = tables[&(k, l)].iter().map(|(_, c)| *c as u64).sum();
        if total != area {
            out.push(IdentityViolation::Sum { k, l, total });
        }
    }
    // N(v) = Σ N(c:v) = Σ N(v:c) for v of width l-1, and the row analogues.
    for &(k, l) in &sizes {
        let wide = &tables[&(k, l)];
        for (axis, trims) in [("columns", [Side::FirstCol, Side::LastCol]), ("rows", [Side::FirstRow, Side::LastRow])] {
            let (pk, pl) = if axis == "columns" { (k, l - 1) } else { (k - 1, l) };
            if pk == 0 || pl == 0 {
                continue;
            }
            let Some(parents) = tables.get(&(pk, pl)) else { continue };
            for side in trims {
                let mut sums: HashMap<Block, u64> = HashMap::new();
                for (b, c) in wide {
                    *sums.entry(b.trim(side).expect("non-empty")).or_default() += *c as u64;
                }
                for (v, c) in parents {
                    let found = sums.get(v).copied().unwrap_or(0);
                    if found != *c as u64 {
                        out.push(IdentityViolation::Directional {
                            k: pk,
                            l: pl,
                            axis,
                            block: format!("{v:?}"),
                            expected: *c,
                            found,
                        });
                    }
                }
            }
        }
    }
    out
}

/// A candidate block with its decompositions and classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub block: Block,
    pub in_b: bool,
    pub class: BlockClass,
    /// `(a, w, c)`: first column, middle columns, last column.
    pub columns: Option<(Block, Block, Block)>,
    /// `(e, v, g)`: first row, middle rows, last row.
    pub rows: Option<(Block, Block, Block)>,
}

impl Candidate {
    pub fn new(block: Block, in_b: bool, class: BlockClass) -> Self {
        let columns = (block.width() >= 2)
            .then(|| (block.column(0), block.middle_cols(), block.column(block.width() - 1)));
        let rows = (block.height() >= 2).then(|| (block.row(0), block.middle_rows(), block.row(block.height() - 1)));
        Candidate { block, in_b, class, columns, rows }
    }
}

/// Candidates of size `k x l`: all symbols for `1 x 1`, otherwise every block
/// whose column parts (`a:w`, `w:c`) and row parts (`e/v`, `v/g`) all occur.
pub fn candidates(k: usize, l: usize, ledger: &CountLedger) -> Result<Vec<Candidate>> {
    let (m, n) = ledger.dims();
    if k == 0 || l == 0 || k > m || l > n {
        return Err(CseError::OversizeQuery { qk: k, ql: l, m, n });
    }
    ledger.check_complete(k, l)?;
    let order = CodingOrder::new(m, n, ledger.alphabet());
    let table = match ledger.try_table(k, l) {
        Some(_) => ledger.blocks(k, l),
        None => {
            let t = ledger.generate(k, l);
            (0..t.len() as u32).map(|id| (materialize_in(ledger, t.clone(), id), 0)).collect()
        }
    };
    table
        .into_iter()
        .map(|(b, _)| {
            let member = in_b(&b, ledger)?;
            Ok(Candidate::new(b, member, order.class_of(k, l)))
        })
        .collect()
}

fn materialize_in(ledger: &CountLedger, table: crate::ledger::SizeTable, id: u32) -> Block {
    let (k, l) = (table.k, table.l);
    let mut scratch = ledger.clone();
    scratch.install(table);
    scratch.materialize(k, l, id)
}

/// `b ∈ B(p)`: its middle rows and middle columns both occur. Empty middles
/// always occur.
pub fn in_b(b: &Block, ledger: &CountLedger) -> Result<bool> {
    let (mr, mc) = (b.middle_rows(), b.middle_cols());
    for part in [&mr, &mc] {
        if !part.is_empty() && !ledger.is_finalized(part.height(), part.width()) {
            return Err(CseError::LedgerIncomplete { k: b.height(), l: b.width() });
        }
    }
    Ok(ledger.count(&mr) > 0 && ledger.count(&mc) > 0)
}

/// True when `w` has at least two distinct occurring extensions on each side
/// along `axis`.
pub fn is_core(w: &Block, axis: Axis, ledger: &CountLedger) -> Result<bool> {
    let (k, l) = match axis {
        Axis::Columns => (w.height(), w.width() + 1),
        Axis::Rows => (w.height() + 1, w.width()),
    };
    if !ledger.is_finalized(k, l) {
        return Err(CseError::LedgerIncomplete { k, l });
    }
    let (head_trim, tail_trim) = match axis {
        Axis::Columns => (Side::FirstCol, Side::LastCol),
        Axis::Rows => (Side::FirstRow, Side::LastRow),
    };
    let (mut left, mut right) = (0, 0);
    for (b, c) in ledger.blocks(k, l) {
        if c == 0 {
            continue;
        }
        // b = x:w has w as its suffix; b = w:y has it as its prefix.
        if b.trim(head_trim)? == *w {
            left += 1;
        }
        if b.trim(tail_trim)? == *w {
            right += 1;
        }
    }
    Ok(left >= 2 && right >= 2)
}

/// Sizes in processing order with the `K`/`L` thresholds splitting B2 from B3.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodingOrder {
    pub big_k: usize,
    pub big_l: usize,
    pub sizes: Vec<(usize, usize)>,
}

impl CodingOrder {
    pub fn new(m: usize, n: usize, alphabet: Alphabet) -> Self {
        let j = alphabet.size();
        let sizes = (1..=m).flat_map(|k| (1..=n).map(move |l| (k, l))).collect();
        CodingOrder { big_k: block_threshold(m, j), big_l: block_threshold(n, j), sizes }
    }

    pub fn class_of(&self, k: usize, l: usize) -> BlockClass {
        BlockClass::of(k, l, self.big_k, self.big_l)
    }
}

/// `max(1, floor(sqrt(log_J log_J x)))`, evaluated exactly: the largest
/// `t >= 1` with `J^(J^(t^2)) <= x`.
pub fn block_threshold(x: usize, j: usize) -> usize {
    let fits = |t: usize| -> bool {
        let Some(inner) = u32::try_from(t * t).ok().and_then(|e| (j as u128).checked_pow(e)) else {
            return false;
        };
        let Ok(inner) = u32::try_from(inner) else { return false };
        (j as u128).checked_pow(inner).is_some_and(|v| v <= x as u128)
    };
    let mut t = 1;
    while fits(t + 1) {
        t += 1;
    }
    t
}
