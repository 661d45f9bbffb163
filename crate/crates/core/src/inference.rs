//! Feasibility intervals, transmission rules and the per-size count solver.
//!
//! Everything here reads only finalized smaller sizes, so the encoder and
//! the decoder reach identical decisions before any count of the open size
//! is exchanged.

use serde::Serialize;

use crate::counting::Candidate;
use crate::error::{CseError, Result};
use crate::grid::{Axis, Side};
use crate::ledger::{CountLedger, LAMBDA, PENDING};

/// Inclusive range of feasible count values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: u32,
    pub hi: u32,
}

impl Interval {
    pub fn new(lo: u32, hi: u32) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    /// Number of admissible values, `hi - lo + 1`.
    pub fn width(self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn contains(self, v: u32) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_degenerate(self) -> bool {
        self.lo == self.hi
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Bounds for `N(x:w:y)` from `N(x:w) = left`, `N(w:y) = right` and
    /// `N(w) = middle`.
    pub(crate) fn from_parts(left: u32, right: u32, middle: u32) -> Self {
        let lo = (left as u64 + right as u64).saturating_sub(middle as u64) as u32;
        let hi = left.min(right);
        // A corrupt stream can violate the identities; clamp so the interval
        // stays well formed and the mismatch surfaces in the family checks.
        Interval { lo: lo.min(hi), hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ForceRule {
    /// Column condition failed: the column interval is a single value.
    ColumnBound,
    /// Row condition failed.
    RowBound,
    /// Both conditions hold but the two intervals meet in one value.
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Transmit(Interval),
    Forced { value: u32, rule: ForceRule },
    DeriveBySum(Axis),
    Zero,
}

/// Size class of a coded block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BlockClass {
    /// Single symbols.
    B1,
    /// At most `K x L`, excluding single symbols.
    B2,
    /// Everything taller than `K` or wider than `L`.
    B3,
}

impl BlockClass {
    pub fn of(k: usize, l: usize, big_k: usize, big_l: usize) -> Self {
        if k == 1 && l == 1 {
            BlockClass::B1
        } else if k <= big_k && l <= big_l {
            BlockClass::B2
        } else {
            BlockClass::B3
        }
    }
}

/// Column and row intervals of block `id`, where the axis is available.
pub(crate) fn intervals(ledger: &CountLedger, k: usize, l: usize, id: u32) -> (Option<Interval>, Option<Interval>) {
    let e = ledger.table(k, l).entries[id as usize];
    let col = (l >= 2).then(|| {
        Interval::from_parts(
            ledger.count_id(k, l - 1, e.pc),
            ledger.count_id(k, l - 1, e.sc),
            ledger.count_id(k, l - 2, ledger.mid_col(k, l, id)),
        )
    });
    let row = (k >= 2).then(|| {
        Interval::from_parts(
            ledger.count_id(k - 1, l, e.pr),
            ledger.count_id(k - 1, l, e.sr),
            ledger.count_id(k - 2, l, ledger.mid_row(k, l, id)),
        )
    });
    (col, row)
}

/// Ids of the extremal column/row blocks excluded from transmission at a size.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Exclusions {
    col: Option<u32>,
    row: Option<u32>,
}

impl Exclusions {
    pub fn for_size(ledger: &CountLedger, k: usize, l: usize) -> Self {
        Exclusions {
            col: (l >= 2).then(|| ledger.largest_column(k)).flatten(),
            row: (k >= 2).then(|| ledger.largest_row(l)).flatten(),
        }
    }
}

/// Transmission rule for block `id` of size `k x l`.
pub(crate) fn dispose(ledger: &CountLedger, k: usize, l: usize, id: u32, excl: Exclusions) -> Result<Disposition> {
    let t = ledger.table(k, l);
    if k == 1 && l == 1 {
        return Ok(if id == ledger.alphabet().max_symbol() as u32 {
            Disposition::DeriveBySum(Axis::Columns)
        } else {
            Disposition::Transmit(Interval::new(0, ledger.area() - 1))
        });
    }
    let (col, row) = intervals(ledger, k, l, id);
    if col.is_some_and(|c| c.hi == 0) || row.is_some_and(|r| r.hi == 0) {
        return Ok(Disposition::Zero);
    }
    if let Some(c) = col.filter(|c| c.is_degenerate()) {
        return Ok(Disposition::Forced { value: c.lo, rule: ForceRule::ColumnBound });
    }
    if let Some(r) = row.filter(|r| r.is_degenerate()) {
        return Ok(Disposition::Forced { value: r.lo, rule: ForceRule::RowBound });
    }
    let coding = match (col, row) {
        (Some(c), Some(r)) => c.intersect(r).ok_or(CseError::InconsistentCounts { k, l, reason: "disjoint intervals" })?,
        (Some(c), None) => c,
        (None, Some(r)) => r,
        (None, None) => unreachable!("sizes other than 1x1 have an axis"),
    };
    if coding.is_degenerate() {
        return Ok(Disposition::Forced { value: coding.lo, rule: ForceRule::Intersection });
    }
    if l >= 2 {
        let x = if k == 1 { Some(ledger.alphabet().max_symbol() as u32) } else { excl.col };
        if x.is_some() && (Some(t.first_col(id)) == x || Some(t.last_col(id)) == x) {
            return Ok(Disposition::DeriveBySum(Axis::Columns));
        }
    }
    if k >= 2 {
        let x = if l == 1 { Some(ledger.alphabet().max_symbol() as u32) } else { excl.row };
        if x.is_some() && (Some(t.first_row(id)) == x || Some(t.last_row(id)) == x) {
            return Ok(Disposition::DeriveBySum(Axis::Rows));
        }
    }
    Ok(Disposition::Transmit(coding))
}

/// Coding interval used when an unresolved count must be sent explicitly.
pub(crate) fn coding_interval(ledger: &CountLedger, k: usize, l: usize, id: u32) -> Result<Interval> {
    if k == 1 && l == 1 {
        return Ok(Interval::new(0, ledger.area() - 1));
    }
    match intervals(ledger, k, l, id) {
        (Some(c), Some(r)) => c.intersect(r).ok_or(CseError::InconsistentCounts { k, l, reason: "disjoint intervals" }),
        (Some(c), None) => Ok(c),
        (None, Some(r)) => Ok(r),
        (None, None) => unreachable!(),
    }
}

#[derive(Debug, Clone, Copy)]
struct Family {
    target: u64,
    known: u64,
    unknown: u32,
}

/// Sum-completion state for one open size.
///
/// Every block belongs to four families: blocks sharing the column prefix,
/// the column suffix, the row prefix and the row suffix. Each family sums to
/// the count of the shared part. A family with exactly one unknown member
/// resolves it by subtraction.
pub(crate) struct Solver {
    k: usize,
    l: usize,
    fam_of: Vec<[u32; 4]>,
    families: Vec<Family>,
    members: Vec<Vec<u32>>,
    queue: Vec<u32>,
    next_pending: usize,
}

impl Solver {
    pub fn new(ledger: &CountLedger, k: usize, l: usize) -> Self {
        let t = ledger.table(k, l);
        let n = t.len();
        let mut fam_of = vec![[0u32; 4]; n];
        let mut families = Vec::new();
        let mut members: Vec<Vec<u32>> = Vec::new();
        let area = ledger.area() as u64;
        for kind in 0..4 {
            let parent_of = |id: usize| {
                let e = &t.entries[id];
                match kind {
                    0 => e.pc,
                    1 => e.sc,
                    2 => e.pr,
                    _ => e.sr,
                }
            };
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by_key(|&id| parent_of(id as usize));
            let mut start = 0;
            while start < order.len() {
                let parent = parent_of(order[start] as usize);
                let mut end = start;
                while end < order.len() && parent_of(order[end] as usize) == parent {
                    end += 1;
                }
                let target = match (parent, kind) {
                    (LAMBDA, _) => area,
                    (p, 0 | 1) => ledger.count_id(k, l - 1, p) as u64,
                    (p, _) => ledger.count_id(k - 1, l, p) as u64,
                };
                let f = families.len() as u32;
                let group = order[start..end].to_vec();
                for &id in &group {
                    fam_of[id as usize][kind] = f;
                }
                families.push(Family { target, known: 0, unknown: group.len() as u32 });
                members.push(group);
                start = end;
            }
        }
        let mut solver = Solver { k, l, fam_of, families, members, queue: Vec::new(), next_pending: 0 };
        for (id, &c) in t.counts.iter().enumerate() {
            if c != PENDING {
                solver.note_known(id as u32, c);
            }
        }
        solver
    }

    fn note_known(&mut self, id: u32, value: u32) {
        for f in self.fam_of[id as usize] {
            let fam = &mut self.families[f as usize];
            fam.known += value as u64;
            fam.unknown -= 1;
            if fam.unknown == 1 {
                self.queue.push(f);
            }
        }
    }

    /// Records a resolved count and queues the families it completes.
    pub fn set(&mut self, ledger: &mut CountLedger, id: u32, value: u32) -> Result<()> {
        let counts = &mut ledger.table_mut(self.k, self.l).counts;
        match counts[id as usize] {
            PENDING => {
                counts[id as usize] = value;
                self.note_known(id, value);
                Ok(())
            }
            c if c == value => Ok(()),
            _ => Err(self.inconsistent("conflicting values")),
        }
    }

    fn inconsistent(&self, reason: &'static str) -> CseError {
        CseError::InconsistentCounts { k: self.k, l: self.l, reason }
    }

    /// Runs sum completion until no family has a single unknown member.
    pub fn propagate(&mut self, ledger: &mut CountLedger) -> Result<()> {
        while let Some(f) = self.queue.pop() {
            let fam = self.families[f as usize];
            if fam.unknown != 1 {
                continue;
            }
            let counts = &ledger.table(self.k, self.l).counts;
            let id = *self.members[f as usize]
                .iter()
                .find(|&&id| counts[id as usize] == PENDING)
                .expect("family has one unknown member");
            let value = fam.target.checked_sub(fam.known).ok_or_else(|| self.inconsistent("family sum exceeded"))?;
            let value = u32::try_from(value).map_err(|_| self.inconsistent("count overflow"))?;
            self.set(ledger, id, value)?;
        }
        Ok(())
    }

    /// Smallest id that is still unresolved.
    pub fn first_pending(&mut self, ledger: &CountLedger) -> Option<u32> {
        let counts = &ledger.table(self.k, self.l).counts;
        while self.next_pending < counts.len() && counts[self.next_pending] != PENDING {
            self.next_pending += 1;
        }
        (self.next_pending < counts.len()).then_some(self.next_pending as u32)
    }

    /// Checks every family sum, the total against `mn`, and every count
    /// against its feasible intervals.
    pub fn validate(&self, ledger: &CountLedger) -> Result<()> {
        if self.families.iter().any(|f| f.unknown != 0 || f.known != f.target) {
            return Err(self.inconsistent("family sum mismatch"));
        }
        let t = ledger.table(self.k, self.l);
        let total: u64 = t.counts.iter().map(|&c| c as u64).sum();
        if total != ledger.area() as u64 {
            return Err(self.inconsistent("size total differs from mn"));
        }
        if self.k * self.l > 1 {
            for (id, &c) in t.counts.iter().enumerate() {
                let (col, row) = intervals(ledger, self.k, self.l, id as u32);
                if col.is_some_and(|i| !i.contains(c)) || row.is_some_and(|i| !i.contains(c)) {
                    return Err(self.inconsistent("count outside feasible interval"));
                }
            }
        }
        Ok(())
    }
}

impl CountLedger {
    /// Marks every count of size `(k, l)` not selected by `keep` as unknown.
    pub fn forget_counts(&mut self, k: usize, l: usize, keep: impl Fn(u32) -> bool) {
        for (id, c) in self.table_mut(k, l).counts.iter_mut().enumerate() {
            if !keep(id as u32) {
                *c = PENDING;
            }
        }
    }

    /// Ids of size `(k, l)` whose disposition is `Transmit`.
    pub fn transmitted_ids(&self, k: usize, l: usize) -> Result<Vec<u32>> {
        let excl = Exclusions::for_size(self, k, l);
        let mut out = Vec::new();
        for id in 0..self.table(k, l).len() as u32 {
            if matches!(dispose(self, k, l, id, excl)?, Disposition::Transmit(_)) {
                out.push(id);
            }
        }
        Ok(out)
    }

    /// Resolves every unknown count of size `(k, l)` from the known ones:
    /// zero and forced values first, then sum completion over the four
    /// families until a fixpoint. Fails with `UnderdeterminedCounts` when
    /// unknowns remain.
    pub fn finalize_size(&mut self, k: usize, l: usize) -> Result<()> {
        self.check_complete(k, l)?;
        let excl = Exclusions::for_size(self, k, l);
        let mut solver = Solver::new(self, k, l);
        for id in 0..self.table(k, l).len() as u32 {
            match dispose(self, k, l, id, excl)? {
                Disposition::Zero => solver.set(self, id, 0)?,
                Disposition::Forced { value, .. } => solver.set(self, id, value)?,
                _ => {}
            }
        }
        solver.propagate(self)?;
        if solver.first_pending(self).is_some() {
            return Err(CseError::UnderdeterminedCounts { k, l });
        }
        solver.validate(self)
    }
}

// Block-level forms of the rules, computed from trims and ledger lookups.

/// Feasible interval of a candidate along one axis.
pub fn feasible_interval(b: &Candidate, axis: Axis, ledger: &CountLedger) -> Result<Interval> {
    let blk = &b.block;
    let (head, tail, middle) = match axis {
        Axis::Columns if blk.width() >= 2 => (blk.trim(Side::LastCol)?, blk.trim(Side::FirstCol)?, blk.middle_cols()),
        Axis::Rows if blk.height() >= 2 => (blk.trim(Side::LastRow)?, blk.trim(Side::FirstRow)?, blk.middle_rows()),
        _ => return Err(CseError::AxisUnavailable),
    };
    let (k, l) = (head.height(), head.width());
    if !ledger.is_finalized(k, l) {
        return Err(CseError::LedgerIncomplete { k: blk.height(), l: blk.width() });
    }
    Ok(Interval::from_parts(ledger.count(&head), ledger.count(&tail), ledger.count(&middle)))
}

/// The transmission condition: both parts occur and neither exhausts the
/// middle, i.e. the feasible interval has more than one value.
pub fn condition(b: &Candidate, axis: Axis, ledger: &CountLedger) -> Result<bool> {
    Ok(!feasible_interval(b, axis, ledger)?.is_degenerate())
}

/// Transmission rule for a candidate.
pub fn disposition(b: &Candidate, ledger: &CountLedger) -> Result<Disposition> {
    let (k, l) = (b.block.height(), b.block.width());
    ledger.check_complete(k, l)?;
    let id = ledger.find(&b.block).ok_or(CseError::LedgerIncomplete { k, l })?;
    dispose(ledger, k, l, id, Exclusions::for_size(ledger, k, l))
}
