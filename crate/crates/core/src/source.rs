//! Seeded synthetic sources.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CseError, Result};
use crate::grid::{Alphabet, Block};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SourceKind {
    /// Independent cells drawn from `probs`.
    Iid { probs: Vec<f64> },
    /// Raster-scan mixture: each cell copies its left neighbour with
    /// probability `wh`, its upper neighbour with probability `wv`, and is
    /// otherwise drawn from `probs`. Neighbours outside the grid are drawn
    /// from `probs`.
    Markov2d { probs: Vec<f64>, wh: f64, wv: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

impl SourceSpec {
    pub fn iid(probs: Vec<f64>, m: usize, n: usize, seed: u64) -> Result<Self> {
        let spec = SourceSpec { kind: SourceKind::Iid { probs }, m, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Bernoulli cells with `P(1) = p`.
    pub fn bernoulli(p: f64, m: usize, n: usize, seed: u64) -> Result<Self> {
        Self::iid(vec![1.0 - p, p], m, n, seed)
    }

    /// Parses `kind` with parameters such as `probs=0.8,0.2 wh=0.3 wv=0.3`
    /// or `p=0.2` (binary, `P(1) = p`).
    pub fn parse(kind: &str, params: &str, m: usize, n: usize, seed: u64) -> Result<Self> {
        let mut probs = None;
        let (mut wh, mut wv) = (None, None);
        for item in params.split(|c: char| c.is_whitespace() || c == ';').filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {item:?}")))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}")));
            match key {
                "probs" => probs = Some(value.split(',').map(num).collect::<Result<Vec<f64>>>()?),
                "p" => {
                    let p = num(value)?;
                    probs = Some(vec![1.0 - p, p]);
                }
                "wh" => wh = Some(num(value)?),
                "wv" => wv = Some(num(value)?),
                _ => return Err(bad(format!("unknown parameter {key:?}"))),
            }
        }
        let probs = probs.ok_or_else(|| bad("missing probs".into()))?;
        let kind = match kind {
            "iid" => {
                if wh.is_some() || wv.is_some() {
                    return Err(bad("wh/wv only apply to markov2d".into()));
                }
                SourceKind::Iid { probs }
            }
            "markov2d" => SourceKind::Markov2d { probs, wh: wh.unwrap_or(0.0), wv: wv.unwrap_or(0.0) },
            other => return Err(bad(format!("unknown source kind {other:?}"))),
        };
        let spec = SourceSpec { kind, m, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    fn probs(&self) -> &[f64] {
        match &self.kind {
            SourceKind::Iid { probs } | SourceKind::Markov2d { probs, .. } => probs,
        }
    }

    fn validate(&self) -> Result<()> {
        let probs = self.probs();
        Alphabet::new(probs.len()).map_err(|_| bad(format!("need 2..=256 probabilities, got {}", probs.len())))?;
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(bad("probabilities must lie in [0, 1]".into()));
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(bad("probabilities must sum to 1".into()));
        }
        if let SourceKind::Markov2d { wh, wv, .. } = self.kind {
            if wh < 0.0 || wv < 0.0 || wh + wv > 1.0 + 1e-12 {
                return Err(bad("need wh, wv >= 0 and wh + wv <= 1".into()));
            }
        }
        if self.m == 0 || self.n == 0 {
            return Err(bad("size must be positive".into()));
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.probs().len()).expect("validated")
    }

    pub fn generate(&self) -> Block {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let probs = self.probs();
        let draw = WeightedIndex::new(probs).expect("validated weights");
        let (m, n) = (self.m, self.n);
        let mut cells = vec![0u8; m * n];
        match self.kind {
            SourceKind::Iid { .. } => {
                for c in cells.iter_mut() {
                    *c = draw.sample(&mut rng) as u8;
                }
            }
            SourceKind::Markov2d { wh, wv, .. } => {
                for i in 0..m {
                    for j in 0..n {
                        let u: f64 = rng.gen();
                        let v = if u < wh && j > 0 {
                            cells[i * n + j - 1]
                        } else if u >= wh && u < wh + wv && i > 0 {
                            cells[(i - 1) * n + j]
                        } else {
                            draw.sample(&mut rng) as u8
                        };
                        cells[i * n + j] = v;
                    }
                }
            }
        }
        Block::from_cells(m, n, cells, self.alphabet()).expect("symbols in range")
    }

    /// Per-cell entropy in bits: exact for iid sources.
    pub fn analytic_entropy(&self) -> Option<f64> {
        match self.kind {
            SourceKind::Iid { ref probs } => Some(entropy(probs)),
            SourceKind::Markov2d { .. } => None,
        }
    }
}

fn bad(msg: String) -> CseError {
    CseError::BadSpec(msg)
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Plug-in estimate of `H(x | left, up)` in bits per cell over the torus
/// neighbourhood of `b`.
pub fn conditional_entropy_estimate(b: &Block) -> f64 {
    use std::collections::HashMap;
    let (m, n) = (b.height(), b.width());
    let mut joint: HashMap<(u8, u8, u8), u64> = HashMap::new();
    let mut ctx: HashMap<(u8, u8), u64> = HashMap::new();
    for i in 0..m {
        for j in 0..n {
            let left = b.get(i, (j + n - 1) % n);
            let up = b.get((i + m - 1) % m, j);
            *joint.entry((left, up, b.get(i, j))).or_default() += 1;
            *ctx.entry((left, up)).or_default() += 1;
        }
    }
    let total = (m * n) as f64;
    joint
        .iter()
        .map(|(&(l, u, _), &c)| {
            let c = c as f64;
            -(c / total) * (c / ctx[&(l, u)] as f64).log2()
        })
        .sum()
}
