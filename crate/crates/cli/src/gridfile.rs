//! PGM (P2/P5) and plain-text grid files.
//!
//! Grid text is a header line `J m n` followed by `m` rows of `n`
//! space-separated symbols. PGM `maxval + 1` is the alphabet size.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use cse2d::{Alphabet, Block};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    PgmBinary,
    PgmAscii,
    Text,
}

impl GridFormat {
    /// Format implied by a path's extension, `None` if unsupported.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "pgm" => Some(GridFormat::PgmBinary),
            "txt" | "grid" => Some(GridFormat::Text),
            _ => None,
        }
    }
}

pub fn read(path: &Path) -> Result<Block> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    match GridFormat::from_path(path) {
        Some(GridFormat::Text) => parse_text(std::str::from_utf8(&bytes).context("grid text is not UTF-8")?),
        Some(_) => parse_pgm(&bytes),
        None => bail!("unsupported extension: {}", path.display()),
    }
}

pub fn write(path: &Path, block: &Block, format: GridFormat) -> Result<()> {
    let bytes = match format {
        GridFormat::Text => to_text(block).into_bytes(),
        GridFormat::PgmAscii => to_pgm(block, false),
        GridFormat::PgmBinary => to_pgm(block, true),
    };
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn parse_text(s: &str) -> Result<Block> {
    let mut tokens = s.split_whitespace().map(|t| t.parse::<usize>().with_context(|| format!("bad integer {t:?}")));
    let mut next = |what: &str| tokens.next().with_context(|| format!("missing {what}"))?;
    let (j, m, n) = (next("J")?, next("m")?, next("n")?);
    let alphabet = Alphabet::new(j)?;
    let mut cells = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        let v = next("cell")?;
        ensure!(v < j, "symbol {v} out of range for J = {j}");
        cells.push(v as u8);
    }
    ensure!(tokens.next().is_none(), "trailing data after {m}x{n} cells");
    Ok(Block::from_cells(m, n, cells, alphabet)?)
}

pub fn to_text(b: &Block) -> String {
    let mut out = format!("{} {} {}\n", b.alphabet().size(), b.height(), b.width());
    for row in b.to_rows() {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a whitespace/comment separated header token starting at `*pos`.
fn header_token(data: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match data.get(*pos) {
            Some(b'#') => {
                while data.get(*pos).is_some_and(|&c| c != b'\n') {
                    *pos += 1;
                }
            }
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => bail!("truncated PGM header"),
        }
    }
    let start = *pos;
    while data.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    ensure!(*pos > start, "expected a number in the PGM header");
    Ok(std::str::from_utf8(&data[start..*pos])?.parse()?)
}

pub fn parse_pgm(data: &[u8]) -> Result<Block> {
    ensure!(data.len() >= 2 && data[0] == b'P', "not a PGM file");
    let binary = match data[1] {
        b'5' => true,
        b'2' => false,
        other => bail!("unsupported PGM variant P{}", other as char),
    };
    let mut pos = 2;
    let n = header_token(data, &mut pos)?;
    let m = header_token(data, &mut pos)?;
    let maxval = header_token(data, &mut pos)?;
    ensure!((1..=255).contains(&maxval), "maxval {maxval} outside 1..=255");
    let alphabet = Alphabet::new(maxval + 1)?;
    let cells: Vec<u8> = if binary {
        ensure!(data.get(pos).is_some_and(u8::is_ascii_whitespace), "missing separator after maxval");
        let body = &data[pos + 1..];
        ensure!(body.len() >= m * n, "PGM body has {} of {} bytes", body.len(), m * n);
        body[..m * n].to_vec()
    } else {
        let text = std::str::from_utf8(&data[pos..])?;
        let cells = text
            .split_whitespace()
            .map(|t| t.parse::<u8>().with_context(|| format!("bad PGM value {t:?}")))
            .collect::<Result<Vec<u8>>>()?;
        ensure!(cells.len() == m * n, "PGM body has {} of {} values", cells.len(), m * n);
        cells
    };
    ensure!(cells.iter().all(|&c| (c as usize) <= maxval), "PGM value exceeds maxval {maxval}");
    Ok(Block::from_cells(m, n, cells, alphabet)?)
}

pub fn to_pgm(b: &Block, binary: bool) -> Vec<u8> {
    let magic = if binary { "P5" } else { "P2" };
    let mut out = format!("{magic}\n{} {}\n{}\n", b.width(), b.height(), b.alphabet().max_symbol()).into_bytes();
    if binary {
        out.extend_from_slice(b.cells());
    } else {
        for row in b.to_rows() {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Block {
        Block::new(&[vec![0, 1, 2], vec![2, 2, 1]], Alphabet::new(3).unwrap()).unwrap()
    }

    #[test]
    fn text_round_trip() {
        let b = sample();
        assert_eq!(to_text(&b), "3 2 3\n0 1 2\n2 2 1\n");
        assert_eq!(parse_text(&to_text(&b)).unwrap(), b);
        assert!(parse_text("2 1 2\n0 2\n").is_err());
        assert!(parse_text("2 1 2\n0 1 1\n").is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let b = sample();
        assert_eq!(parse_pgm(&to_pgm(&b, true)).unwrap(), b);
        assert_eq!(parse_pgm(&to_pgm(&b, false)).unwrap(), b);
        let commented = b"P2\n# made by hand\n3 2\n# levels\n2\n0 1 2\n2 2 1\n";
        assert_eq!(parse_pgm(commented).unwrap(), b);
    }

    #[test]
    fn pgm_rejects_bad_input() {
        assert!(parse_pgm(b"P6\n1 1\n255\n\0").is_err());
        assert!(parse_pgm(b"P5\n2 2\n1\n\0\x01").is_err());
        assert!(parse_pgm(b"P2\n1 1\n1\n2\n").is_err());
        assert!(parse_pgm(b"P5\n1 1\n65535\n\0\0").is_err());
    }

    #[test]
    fn formats_by_extension() {
        assert_eq!(GridFormat::from_path(Path::new("a.PGM")), Some(GridFormat::PgmBinary));
        assert_eq!(GridFormat::from_path(Path::new("a.grid")), Some(GridFormat::Text));
        assert_eq!(GridFormat::from_path(Path::new("a.bmp")), None);
        assert_eq!(GridFormat::from_path(Path::new("noext")), None);
    }
}
