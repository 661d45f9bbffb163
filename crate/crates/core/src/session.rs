//! The size-by-size replay shared by ledger construction, the encoder and
//! the decoder.
//!
//! Sizes are visited in `(height, width)` order. For each one the candidate
//! table is generated from finalized smaller sizes, zero and forced counts
//! are filled in, and every `Transmit` count goes through a [`Channel`]: the
//! encoder writes the true value, the decoder reads it back. Sum completion
//! then resolves the rest. Any count still unknown after that is exchanged
//! explicitly over its coding interval (smallest id first), so decoding never
//! stalls on a gap in the derivation rules.

use crate::counting::CodingOrder;
use crate::error::{CseError, Result};
use crate::exec::Exec;
use crate::grid::{Alphabet, Block};
use crate::inference::{coding_interval, dispose, BlockClass, Disposition, Exclusions, Interval, Solver};
use crate::ledger::{CountLedger, PENDING};

/// One count crossing the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Exchange {
    pub k: usize,
    pub l: usize,
    pub class: BlockClass,
    pub interval: Interval,
    /// Sent because sum completion stalled, not by a `Transmit` rule.
    pub promoted: bool,
}

pub(crate) trait Channel {
    /// Encoder: records `truth` and returns it. Decoder: returns the value read.
    fn exchange(&mut self, x: Exchange, truth: Option<u32>) -> Result<u32>;
}

/// Which `Transmit` counts are actually sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Schedule {
    /// Every `Transmit` count, in id order.
    #[cfg_attr(not(test), allow(dead_code))]
    Eager,
    /// `Transmit` counts in id order, skipping those already inferred from
    /// earlier values of the same size.
    Lazy,
}

pub(crate) const SCHEDULE: Schedule = Schedule::Lazy;

/// True counts of every size of `p`, retained in full.
pub(crate) fn count_all(p: &Block, exec: Exec) -> Result<CountLedger> {
    let (m, n) = (p.height(), p.width());
    let mut ledger = CountLedger::new(m, n, p.alphabet(), true);
    let mut scan = AnchorScan::new(m, n);
    for k in 1..=m {
        for l in 1..=n {
            let table = ledger.generate(k, l);
            ledger.install(table);
            let truth = scan.advance(&ledger, k, l, p, exec);
            ledger.table_mut(k, l).counts = truth;
        }
    }
    Ok(ledger)
}

/// Ids of the windows of the current and previous sizes at every anchor.
struct AnchorScan {
    /// Ids at `(k, l-1)`.
    prev: Vec<u32>,
    /// Ids at `(k, 1)`, the start of the next height.
    first: Vec<u32>,
    len: usize,
}

impl AnchorScan {
    fn new(m: usize, n: usize) -> Self {
        AnchorScan { prev: Vec::new(), first: Vec::new(), len: m * n }
    }

    /// True counts of size `(k, l)`; sizes must be visited in order.
    fn advance(&mut self, ledger: &CountLedger, k: usize, l: usize, p: &Block, exec: Exec) -> Vec<u32> {
        let from = if l == 1 { &self.first } else { &self.prev };
        let ids = ledger.anchor_ids(k, l, p, from, exec);
        let mut counts = vec![0u32; ledger.table(k, l).len()];
        for &id in &ids {
            counts[id as usize] += 1;
        }
        debug_assert_eq!(ids.len(), self.len);
        if l == 1 {
            self.first = ids.clone();
        }
        self.prev = ids;
        counts
    }
}

/// Replays the coding order. With `source` set this is the encoder and true
/// counts feed the channel; without it, counts come from the channel.
pub(crate) fn replay(
    m: usize,
    n: usize,
    alphabet: Alphabet,
    source: Option<&Block>,
    channel: &mut dyn Channel,
    schedule: Schedule,
    exec: Exec,
) -> Result<CountLedger> {
    let order = CodingOrder::new(m, n, alphabet);
    let mut ledger = CountLedger::new(m, n, alphabet, false);
    let mut scan = AnchorScan::new(m, n);
    for k in 1..=m {
        for l in 1..=n {
            let table = ledger.generate(k, l);
            ledger.install(table);
            let truth = source.map(|p| scan.advance(&ledger, k, l, p, exec));
            resolve_size(&mut ledger, k, l, order.class_of(k, l), truth.as_deref(), channel, schedule)?;
        }
        ledger.release_after_height(k);
    }
    Ok(ledger)
}

fn resolve_size(
    ledger: &mut CountLedger,
    k: usize,
    l: usize,
    class: BlockClass,
    truth: Option<&[u32]>,
    channel: &mut dyn Channel,
    schedule: Schedule,
) -> Result<()> {
    let excl = Exclusions::for_size(ledger, k, l);
    let mut solver = Solver::new(ledger, k, l);
    let mut sends = Vec::new();
    for id in 0..ledger.table(k, l).len() as u32 {
        match dispose(ledger, k, l, id, excl)? {
            Disposition::Zero => solver.set(ledger, id, 0)?,
            Disposition::Forced { value, .. } => solver.set(ledger, id, value)?,
            Disposition::Transmit(interval) => sends.push((id, interval)),
            Disposition::DeriveBySum(_) => {}
        }
    }
    solver.propagate(ledger)?;

    let mut send = |ledger: &mut CountLedger, solver: &mut Solver, id: u32, interval: Interval, promoted: bool| {
        let x = Exchange { k, l, class, interval, promoted };
        let value = channel.exchange(x, truth.map(|t| t[id as usize]))?;
        if !interval.contains(value) {
            return Err(CseError::InconsistentCounts { k, l, reason: "value outside coding interval" });
        }
        solver.set(ledger, id, value)?;
        solver.propagate(ledger)
    };
    for (id, interval) in sends {
        if schedule == Schedule::Lazy && ledger.table(k, l).counts[id as usize] != PENDING {
            continue;
        }
        send(ledger, &mut solver, id, interval, false)?;
    }
    while let Some(id) = solver.first_pending(ledger) {
        let interval = coding_interval(ledger, k, l, id)?;
        if interval.is_degenerate() {
            solver.set(ledger, id, interval.lo)?;
            solver.propagate(ledger)?;
        } else {
            send(ledger, &mut solver, id, interval, true)?;
        }
    }
    solver.validate(ledger)?;
    if let Some(t) = truth {
        if ledger.table(k, l).counts != t {
            return Err(CseError::InconsistentCounts { k, l, reason: "inferred count differs from source" });
        }
    }
    Ok(())
}

/// Positive ids of the full size, which for a primitive source are exactly
/// the members of its shift class in canonical order.
pub(crate) fn shift_class_ids(ledger: &CountLedger) -> Result<Vec<u32>> {
    let (m, n) = ledger.dims();
    let t = ledger.table(m, n);
    let ids: Vec<u32> = (0..t.len() as u32).filter(|&id| t.counts[id as usize] > 0).collect();
    if ids.len() != m * n || ids.iter().any(|&id| t.counts[id as usize] != 1) {
        return Err(CseError::InconsistentCounts { k: m, l: n, reason: "full-size counts are not a shift class" });
    }
    Ok(ids)
}

/// Records exchanges and hands back the true values.
#[cfg(test)]
#[derive(Debug, Default)]
pub(crate) struct Recorder {
    pub log: Vec<(Exchange, u32)>,
}

#[cfg(test)]
impl Channel for Recorder {
    fn exchange(&mut self, x: Exchange, truth: Option<u32>) -> Result<u32> {
        let v = truth.expect("encoder supplies true counts");
        self.log.push((x, v));
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fixtures::*;

    struct Replay {
        values: std::vec::IntoIter<(Exchange, u32)>,
    }

    impl Channel for Replay {
        fn exchange(&mut self, x: Exchange, _: Option<u32>) -> Result<u32> {
            let (want, v) = self.values.next().ok_or(CseError::TruncatedStream)?;
            assert_eq!(want, x);
            Ok(v)
        }
    }

    fn round_trip(p: &Block, schedule: Schedule) -> Vec<(Exchange, u32)> {
        let (m, n) = (p.height(), p.width());
        let mut rec = Recorder::default();
        let enc = replay(m, n, p.alphabet(), Some(p), &mut rec, schedule, Exec::Sequential).unwrap();
        let mut dec_chan = Replay { values: rec.log.clone().into_iter() };
        let dec = replay(m, n, p.alphabet(), None, &mut dec_chan, schedule, Exec::Sequential).unwrap();
        assert!(dec_chan.values.next().is_none());
        let ids = shift_class_ids(&dec).unwrap();
        let rank = p.rank().unwrap();
        assert_eq!(dec.materialize(m, n, ids[rank]), *p);
        assert_eq!(shift_class_ids(&enc).unwrap(), ids);
        rec.log
    }

    #[test]
    fn p2_sends_one_single() {
        let log = round_trip(&p2(), Schedule::Eager);
        let singles: Vec<_> = log.iter().filter(|(x, _)| x.class == BlockClass::B1).collect();
        assert_eq!(singles.len(), 1);
        assert_eq!(singles[0].0.interval, Interval::new(0, 3));
        assert_eq!(singles[0].1, 1);
    }

    #[test]
    fn exhaustive_small_round_trips() {
        for (m, n) in [(2, 2), (2, 3), (3, 2), (3, 3), (3, 4)] {
            for p in all_blocks(m, n, 2).into_iter().filter(Block::is_primitive) {
                round_trip(&p, Schedule::Eager);
                round_trip(&p, Schedule::Lazy);
            }
        }
    }

    #[test]
    fn ternary_round_trips() {
        for p in all_blocks(2, 3, 3).into_iter().filter(Block::is_primitive).step_by(7) {
            round_trip(&p, Schedule::Lazy);
        }
    }

    #[test]
    fn lazy_never_sends_more() {
        for p in all_blocks(3, 3, 2).into_iter().filter(Block::is_primitive) {
            assert!(round_trip(&p, Schedule::Lazy).len() <= round_trip(&p, Schedule::Eager).len());
        }
    }
}
