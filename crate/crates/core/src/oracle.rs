//! Exhaustive ground truth for tiny blocks.
//!
//! Every block of the given size is enumerated and profiled by its own torus
//! window scan, independent of the ledger machinery. On top of that live type
//! classes, prefix classes over the canonical candidate order, the entropy
//! bound and unchanged-class checks, and the exact type-class-ratio code
//! lengths.

use std::collections::HashMap;

use serde::Serialize;

use crate::counting::block_threshold;
use crate::error::{CseError, Result};
use crate::exec::Exec;
use crate::grid::{Alphabet, Block};

/// Largest `mn * log2 J` the oracle will enumerate.
pub const MAX_ENUM_BITS: f64 = 20.0;

/// Base-`J` code of the `k x l` torus window at `(i, j)`, cells taken
/// column-major so numeric order is the canonical block order.
fn window_code(p: &Block, i: usize, j: usize, k: usize, l: usize) -> u64 {
    let (m, n, base) = (p.height(), p.width(), p.alphabet().size() as u64);
    let mut code = 0;
    for c in 0..l {
        for r in 0..k {
            code = code * base + p.get((i + r) % m, (j + c) % n) as u64;
        }
    }
    code
}

fn code_cells(mut code: u64, k: usize, l: usize, base: u64) -> Vec<u8> {
    let mut cm = vec![0u8; k * l];
    for slot in cm.iter_mut().rev() {
        *slot = (code % base) as u8;
        code /= base;
    }
    cm
}

fn cells_code(cm: &[u8], base: u64) -> u64 {
    cm.iter().fold(0, |acc, &c| acc * base + c as u64)
}

/// Column-major cells of a sub-rectangle of column-major cells.
fn sub_cells(cm: &[u8], k: usize, r0: usize, c0: usize, h: usize, w: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(h * w);
    for c in c0..c0 + w {
        for r in r0..r0 + h {
            out.push(cm[c * k + r]);
        }
    }
    out
}

fn block_of(code: u64, k: usize, l: usize, alphabet: Alphabet) -> Block {
    let cm = code_cells(code, k, l, alphabet.size() as u64);
    let mut cells = vec![0u8; k * l];
    for c in 0..l {
        for r in 0..k {
            cells[r * l + c] = cm[c * k + r];
        }
    }
    Block::from_cells(k, l, cells, alphabet).expect("valid symbols")
}

/// Sorted `(code, count)` tables for every size `1..=m x 1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Profile {
    n: usize,
    sizes: Vec<Vec<(u64, u32)>>,
}

impl Profile {
    fn of(p: &Block) -> Self {
        let (m, n) = (p.height(), p.width());
        let mut sizes = Vec::with_capacity(m * n);
        for k in 1..=m {
            for l in 1..=n {
                let mut codes: Vec<u64> =
                    (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| window_code(p, i, j, k, l)).collect();
                codes.sort_unstable();
                let mut table: Vec<(u64, u32)> = Vec::new();
                for c in codes {
                    match table.last_mut() {
                        Some((last, cnt)) if *last == c => *cnt += 1,
                        _ => table.push((c, 1)),
                    }
                }
                sizes.push(table);
            }
        }
        Profile { n, sizes }
    }

    fn table(&self, k: usize, l: usize) -> &[(u64, u32)] {
        &self.sizes[(k - 1) * self.n + (l - 1)]
    }

    /// `N(code)` at size `k x l`; empty sizes count `mn`.
    fn count(&self, k: usize, l: usize, code: u64, area: u32) -> u32 {
        if k == 0 || l == 0 {
            return area;
        }
        let t = self.table(k, l);
        t.binary_search_by_key(&code, |&(c, _)| c).map_or(0, |i| t[i].1)
    }
}

/// Independent anchor-scan count of `u` in `p`.
pub fn brute_count(u: &Block, p: &Block) -> u32 {
    let (m, n) = (p.height(), p.width());
    if u.is_empty() {
        return (m * n) as u32;
    }
    let target = cells_code(&u.col_major(), p.alphabet().size() as u64);
    (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| window_code(p, i, j, u.height(), u.width()) == target)
        .count() as u32
}

fn primitive_by_codes(p: &Block) -> bool {
    let (m, n) = (p.height(), p.width());
    let mut shifts: Vec<Vec<u8>> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (0..n).flat_map(|c| (0..m).map(move |r| p.get((i + r) % m, (j + c) % n))).collect())
        .collect();
    shifts.sort_unstable();
    shifts.dedup();
    shifts.len() == m * n
}

/// All primitive blocks of one size with their profiles.
pub struct Universe {
    m: usize,
    n: usize,
    alphabet: Alphabet,
    blocks: Vec<Block>,
    profiles: Vec<Profile>,
    exec: Exec,
}

impl Universe {
    pub fn new(m: usize, n: usize, alphabet: Alphabet, exec: Exec) -> Result<Self> {
        let bits = (m * n) as f64 * (alphabet.size() as f64).log2();
        if m == 0 || n == 0 || bits > MAX_ENUM_BITS + 1e-9 {
            return Err(CseError::TooLarge { bits: bits.ceil() as u32 });
        }
        let total = (alphabet.size() as u64).pow((m * n) as u32) as usize;
        let found: Vec<Option<(Block, Profile)>> = exec.map_range(total, |code| {
            let cm = code_cells(code as u64, m, n, alphabet.size() as u64);
            let mut cells = vec![0u8; m * n];
            for c in 0..n {
                for r in 0..m {
                    cells[r * n + c] = cm[c * m + r];
                }
            }
            let b = Block::from_cells(m, n, cells, alphabet).expect("valid symbols");
            primitive_by_codes(&b).then(|| {
                let prof = Profile::of(&b);
                (b, prof)
            })
        });
        let (blocks, profiles) = found.into_iter().flatten().unzip();
        Ok(Universe { m, n, alphabet, blocks, profiles, exec })
    }

    /// Primitive blocks in canonical order.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    fn index_of(&self, p: &Block) -> Result<usize> {
        if (p.height(), p.width(), p.alphabet()) != (self.m, self.n, self.alphabet) {
            return Err(CseError::DimensionMismatch("block differs from the enumerated size"));
        }
        let code = cells_code(&p.col_major(), self.alphabet.size() as u64);
        self.blocks
            .binary_search_by_key(&code, |b| cells_code(&b.col_major(), self.alphabet.size() as u64))
            .map_err(|_| CseError::NotPrimitive)
    }

    fn area(&self) -> u32 {
        (self.m * self.n) as u32
    }

    /// Primitive `q` with the same `k x l` counts as `p`.
    pub fn type_class(&self, p: &Block, k: usize, l: usize) -> Result<TypeClass> {
        let at = self.index_of(p)?;
        if k > self.m || l > self.n {
            return Err(CseError::OversizeQuery { qk: k, ql: l, m: self.m, n: self.n });
        }
        let members = if k == 0 || l == 0 {
            self.blocks.clone()
        } else {
            let key = self.profiles[at].table(k, l);
            self.blocks
                .iter()
                .zip(&self.profiles)
                .filter(|(_, prof)| prof.table(k, l) == key)
                .map(|(b, _)| b.clone())
                .collect()
        };
        Ok(TypeClass { source: p.clone(), constraint: Constraint::Size { k, l }, members })
    }

    /// The candidate order of `p` restricted to blocks that occur somewhere in
    /// the universe; omitted blocks count zero in every member and cannot
    /// split a class.
    fn b_order(&self, at: usize) -> Vec<Step> {
        let (m, n, j) = (self.m, self.n, self.alphabet.size() as u64);
        let prof = &self.profiles[at];
        let area = self.area();
        let occurs = |k: usize, l: usize, code: u64| prof.count(k, l, code, area) > 0;
        let big_k = block_threshold(m, j as usize);
        let big_l = block_threshold(n, j as usize);
        let mut steps = vec![Step { k: 0, l: 0, code: 0, class: 0 }];
        for k in 1..=m {
            for l in 1..=n {
                let mut codes: Vec<u64> =
                    self.profiles.iter().flat_map(|q| q.table(k, l).iter().map(|&(c, _)| c)).collect();
                codes.sort_unstable();
                codes.dedup();
                let class = if k * l == 1 { 1 } else if k <= big_k && l <= big_l { 2 } else { 3 };
                for code in codes {
                    let cm = code_cells(code, k, l, j);
                    let mid_rows = k < 3 || occurs(k - 2, l, cells_code(&sub_cells(&cm, k, 1, 0, k - 2, l), j));
                    let mid_cols = l < 3 || occurs(k, l - 2, cells_code(&sub_cells(&cm, k, 0, 1, k, l - 2), j));
                    if mid_rows && mid_cols {
                        steps.push(Step { k, l, code, class });
                    }
                }
            }
        }
        steps.sort_by_key(|s| (s.class, s.k, s.l, s.code));
        steps
    }

    /// For every member, the 1-based index of the first step whose count
    /// differs from `p`'s, or `steps.len() + 1` when none does.
    fn first_mismatch(&self, at: usize, steps: &[Step]) -> Vec<usize> {
        let area = self.area();
        let mine: Vec<u32> = steps.iter().map(|s| self.profiles[at].count(s.k, s.l, s.code, area)).collect();
        self.profiles
            .iter()
            .map(|q| {
                steps
                    .iter()
                    .zip(&mine)
                    .position(|(s, &c)| q.count(s.k, s.l, s.code, area) != c)
                    .map_or(steps.len() + 1, |i| i + 1)
            })
            .collect()
    }

    /// Members of `T(B(p), p, i)`: equal counts on the first `i` steps.
    pub fn prefix_class(&self, p: &Block, i: usize) -> Result<TypeClass> {
        let at = self.index_of(p)?;
        let steps = self.b_order(at);
        let first = self.first_mismatch(at, &steps);
        let members =
            self.blocks.iter().zip(&first).filter(|(_, &f)| f > i).map(|(b, _)| b.clone()).collect();
        Ok(TypeClass { source: p.clone(), constraint: Constraint::Prefix(i), members })
    }

    /// `|T(B(p), p, i)|` for `i = 0..=steps`, and the steps.
    fn prefix_sizes(&self, at: usize) -> (Vec<Step>, Vec<u64>) {
        let steps = self.b_order(at);
        let first = self.first_mismatch(at, &steps);
        let mut hist = vec![0u64; steps.len() + 2];
        for f in first {
            hist[f] += 1;
        }
        // |T(i)| = #{q : first(q) > i}
        let mut sizes = vec![0u64; steps.len() + 1];
        let mut acc = 0;
        for i in (0..=steps.len()).rev() {
            acc += hist[i + 1];
            sizes[i] = acc;
        }
        (steps, sizes)
    }

    fn lemma1_at(&self, at: usize, k: usize, l: usize, class_size: u64) -> Lemma1Row {
        let mn = self.area() as f64;
        let bound = -(mn / (k * l) as f64)
            * self.profiles[at]
                .table(k, l)
                .iter()
                .map(|&(_, c)| {
                    let f = c as f64 / mn;
                    f * f.log2()
                })
                .sum::<f64>();
        let lhs = (class_size as f64).log2();
        Lemma1Row { k, l, class_size, log2_class: lhs, bound, holds: lhs <= bound + 1e-9 }
    }

    /// Type-class size against the empirical entropy bound, one block and size.
    pub fn lemma1_check(&self, p: &Block, k: usize, l: usize) -> Result<Lemma1Row> {
        let at = self.index_of(p)?;
        if k == 0 || l == 0 {
            return Err(CseError::OversizeQuery { qk: k, ql: l, m: self.m, n: self.n });
        }
        let size = self.type_class(p, k, l)?.members.len() as u64;
        Ok(self.lemma1_at(at, k, l, size))
    }

    /// Entropy bound over every member and every size.
    pub fn lemma1_sweep(&self) -> SweepReport {
        let mut report = SweepReport::default();
        for k in 1..=self.m {
            for l in 1..=self.n {
                let mut class_sizes: HashMap<&[(u64, u32)], u64> = HashMap::new();
                for prof in &self.profiles {
                    *class_sizes.entry(prof.table(k, l)).or_default() += 1;
                }
                for at in 0..self.blocks.len() {
                    let row = self.lemma1_at(at, k, l, class_sizes[self.profiles[at].table(k, l)]);
                    report.checked += 1;
                    if !row.holds {
                        report.push_violation(format!("{:?} at {k}x{l}: {:.6} > {:.6}", self.blocks[at], row.log2_class, row.bound));
                    }
                }
            }
        }
        report
    }

    /// Whether the transmission condition fails for step `s` along either
    /// available axis, evaluated on `p`'s counts.
    fn condition_fails(&self, at: usize, s: &Step) -> bool {
        let (k, l, j) = (s.k, s.l, self.alphabet.size() as u64);
        let prof = &self.profiles[at];
        let area = self.area();
        let cm = code_cells(s.code, k, l, j);
        let n = |h: usize, w: usize, r0: usize, c0: usize| -> i64 {
            if h == 0 || w == 0 {
                return area as i64;
            }
            prof.count(h, w, cells_code(&sub_cells(&cm, k, r0, c0, h, w), j), area) as i64
        };
        let fails = |a: i64, c: i64, w: i64| a.min(c).min(w - a).min(w - c) < 1;
        (l >= 2 && fails(n(k, l - 1, 0, 0), n(k, l - 1, 0, 1), n(k, l - 2, 0, 1)))
            || (k >= 2 && fails(n(k - 1, l, 0, 0), n(k - 1, l, 1, 0), n(k - 2, l, 1, 0)))
    }

    /// A step whose condition fails never shrinks the prefix class.
    pub fn lemma2_sweep(&self) -> SweepReport {
        let rows: Vec<SweepReport> = self.exec.map_range(self.blocks.len(), |at| {
            let mut report = SweepReport::default();
            let (steps, sizes) = self.prefix_sizes(at);
            for (idx, s) in steps.iter().enumerate().skip(1) {
                if s.k * s.l > 1 && self.condition_fails(at, s) {
                    report.checked += 1;
                    // Step idx is b_{idx+1}; compare |T(idx+1)| with |T(idx)|.
                    if sizes[idx + 1] != sizes[idx] {
                        report.push_violation(format!(
                            "{:?}: step {} {:?} shrinks {} -> {}",
                            self.blocks[at],
                            idx + 1,
                            block_of(s.code, s.k, s.l, self.alphabet),
                            sizes[idx],
                            sizes[idx + 1]
                        ));
                    }
                }
            }
            report
        });
        rows.into_iter().fold(SweepReport::default(), SweepReport::merge)
    }

    /// Exact type-class-ratio lengths for the B3 steps of `p`.
    pub fn exact_ratio_lengths(&self, p: &Block) -> Result<RatioLengths> {
        let at = self.index_of(p)?;
        Ok(self.ratio_at(at))
    }

    fn ratio_at(&self, at: usize) -> RatioLengths {
        let (steps, sizes) = self.prefix_sizes(at);
        let mut coded_bits = 0.0;
        let mut all_bits = 0.0;
        let mut per_step = Vec::new();
        let x_col = |k: usize| self.largest_line(at, k, true);
        let x_row = |l: usize| self.largest_line(at, l, false);
        for (idx, s) in steps.iter().enumerate() {
            if s.class != 3 {
                continue;
            }
            let bits = -((sizes[idx + 1] as f64) / (sizes[idx] as f64)).log2();
            all_bits += bits;
            let coded = self.is_coded(at, s, &x_col, &x_row);
            if coded {
                coded_bits += bits;
            }
            per_step.push(RatioStep { index: idx + 1, k: s.k, l: s.l, coded, bits });
        }
        let first_b3 = steps.iter().position(|s| s.class == 3).unwrap_or(steps.len());
        let big_k = block_threshold(self.m, self.alphabet.size());
        let big_l = block_threshold(self.n, self.alphabet.size());
        let kl_class = self
            .profiles
            .iter()
            .filter(|q| {
                (1..=big_k).all(|k| (1..=big_l).all(|l| q.table(k, l) == self.profiles[at].table(k, l)))
            })
            .count() as u64;
        let mn = self.area() as f64;
        RatioLengths {
            per_step,
            coded_bits,
            all_bits,
            prefix_before_b3: sizes[first_b3],
            type_class_kl: kl_class,
            target: (kl_class as f64).log2() - mn.log2(),
        }
    }

    fn is_coded(&self, at: usize, s: &Step, x_col: &dyn Fn(usize) -> u64, x_row: &dyn Fn(usize) -> u64) -> bool {
        let (k, l, j) = (s.k, s.l, self.alphabet.size() as u64);
        if self.condition_fails(at, s) {
            return false;
        }
        let cm = code_cells(s.code, k, l, j);
        let col = |c: usize| cells_code(&sub_cells(&cm, k, 0, c, k, 1), j);
        let row = |r: usize| cells_code(&sub_cells(&cm, k, r, 0, 1, l), j);
        let top = j - 1;
        match (k, l) {
            (1, _) => col(0) != top && col(l - 1) != top,
            (_, 1) => row(0) != top && row(k - 1) != top,
            _ => {
                let (xc, xr) = (x_col(k), x_row(l));
                col(0) != xc && col(l - 1) != xc && row(0) != xr && row(k - 1) != xr
            }
        }
    }

    /// Code of the largest `len x 1` (or `1 x len`) member of `B(p)`.
    fn largest_line(&self, at: usize, len: usize, column: bool) -> u64 {
        let j = self.alphabet.size() as u64;
        let top = j - 1;
        if len == 1 {
            return top;
        }
        let mid = if len == 2 {
            Vec::new()
        } else {
            let (h, w) = if column { (len - 2, 1) } else { (1, len - 2) };
            let (code, _) = *self.profiles[at].table(h, w).last().expect("every size has windows");
            code_cells(code, h, w, j)
        };
        let mut cells = vec![top as u8];
        cells.extend(mid);
        cells.push(top as u8);
        cells_code(&cells, j)
    }

    /// Telescoping check over every member.
    pub fn telescoping_sweep(&self) -> SweepReport {
        let rows: Vec<SweepReport> = self.exec.map_range(self.blocks.len(), |at| {
            let r = self.ratio_at(at);
            let mut report = SweepReport { checked: 1, ..Default::default() };
            if !r.holds() {
                report.push_violation(format!(
                    "{:?}: coded {:.9} vs target {:.9} (all steps {:.9})",
                    self.blocks[at], r.coded_bits, r.target, r.all_bits
                ));
            }
            report
        });
        rows.into_iter().fold(SweepReport::default(), SweepReport::merge)
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    k: usize,
    l: usize,
    code: u64,
    class: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Constraint {
    Size { k: usize, l: usize },
    Prefix(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeClass {
    pub source: Block,
    pub constraint: Constraint,
    pub members: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Row {
    pub k: usize,
    pub l: usize,
    pub class_size: u64,
    pub log2_class: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStep {
    pub index: usize,
    pub k: usize,
    pub l: usize,
    pub coded: bool,
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioLengths {
    pub per_step: Vec<RatioStep>,
    /// Sum over the steps the codec actually codes.
    pub coded_bits: f64,
    /// Sum over every B3 step.
    pub all_bits: f64,
    /// `|T(B(p), p, S-1)|` just before the first B3 step.
    pub prefix_before_b3: u64,
    /// `|T(p, K, L)|`.
    pub type_class_kl: u64,
    /// `log2 |T(p, K, L)| - log2 mn`.
    pub target: f64,
}

impl RatioLengths {
    pub fn holds(&self) -> bool {
        (self.coded_bits - self.target).abs() <= 1e-9
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub checked: u64,
    pub violations: u64,
    /// First few violations, for diagnostics.
    pub examples: Vec<String>,
}

impl SweepReport {
    pub(crate) fn push_violation(&mut self, msg: String) {
        self.violations += 1;
        if self.examples.len() < 5 {
            self.examples.push(msg);
        }
    }

    pub(crate) fn merge(mut self, other: SweepReport) -> SweepReport {
        self.checked += other.checked;
        self.violations += other.violations;
        for e in other.examples {
            if self.examples.len() < 5 {
                self.examples.push(e);
            }
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn universe_for(p: &Block) -> Result<Universe> {
    Universe::new(p.height(), p.width(), p.alphabet(), Exec::default())
}

/// `T(p, k, l)` by exhaustive enumeration.
pub fn type_class(p: &Block, k: usize, l: usize) -> Result<TypeClass> {
    universe_for(p)?.type_class(p, k, l)
}

/// `T(B(p), p, i)` by exhaustive enumeration.
pub fn prefix_class(p: &Block, i: usize) -> Result<TypeClass> {
    universe_for(p)?.prefix_class(p, i)
}

pub fn lemma1_check(p: &Block, k: usize, l: usize) -> Result<bool> {
    Ok(universe_for(p)?.lemma1_check(p, k, l)?.holds)
}

pub fn exact_ratio_lengths(p: &Block) -> Result<RatioLengths> {
    universe_for(p)?.exact_ratio_lengths(p)
}
