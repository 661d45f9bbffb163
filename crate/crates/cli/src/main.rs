mod gridfile;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cse2d::codec::{self, Encoded};
use cse2d::source::{conditional_entropy_estimate, SourceSpec};
use cse2d::{baseline, verify, Alphabet, Block, Container, Exec};
use serde_json::json;

use gridfile::GridFormat;

#[derive(Parser)]
#[command(name = "cse2d", version, about = "Two-dimensional compression by substring enumeration")]
struct Cli {
    /// Run batch work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a PGM or grid-text file into a container.
    Compress {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the length breakdown as JSON.
        #[arg(long)]
        stats_json: Option<PathBuf>,
        /// Fail instead of storing raw when the coded path is unavailable.
        #[arg(long)]
        strict: bool,
    },
    /// Restore a grid from a container.
    Decompress {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write PGM output as P2 instead of P5.
        #[arg(long)]
        ascii: bool,
    },
    /// Print the coded-path length breakdown of a grid or container as JSON.
    Stats {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Generate a synthetic grid.
    Gen {
        #[arg(long, value_enum)]
        kind: SourceKindArg,
        /// Source parameters, e.g. "p=0.2" or "probs=0.5,0.3,0.2 wh=0.4 wv=0.4".
        #[arg(long)]
        params: String,
        #[arg(long, value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a verification suite; exits 0 only if everything passes.
    Verify {
        #[arg(long, value_enum)]
        mode: VerifyMode,
        /// Block size for exhaustive and lemmas modes.
        #[arg(long, value_parser = parse_size, default_value = "3x3")]
        size: (usize, usize),
        /// Alphabet size for lemmas mode.
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        /// Number of random blocks.
        #[arg(long, default_value_t = 500)]
        count: u64,
        /// Largest random block side.
        #[arg(long, default_value_t = 32)]
        max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the 2D codec with conventional CSE over column super-symbols.
    Compare {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = baseline::DEFAULT_M_CAP)]
        m_cap: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKindArg {
    Iid,
    Markov2d,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    Exhaustive,
    Random,
    Lemmas,
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (m, n) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected MxN, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(m)?, parse(n)?))
}

/// Raised for input the command line should have rejected.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn grid_format(path: &Path) -> Result<GridFormat> {
    GridFormat::from_path(path)
        .ok_or_else(|| UsageError(format!("unsupported file extension: {} (expected .pgm, .txt or .grid)", path.display())).into())
}

fn read_container(path: &Path) -> Result<Container> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Container::from_bytes(&bytes)?)
}

/// A grid file, or a container decoded back to its grid.
fn read_any(path: &Path) -> Result<Block> {
    if GridFormat::from_path(path).is_some() {
        gridfile::read(path)
    } else {
        Ok(codec::decompress(&read_container(path)?)?)
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match cli.command {
        Command::Compress { input, output, stats_json, strict } => {
            grid_format(&input)?;
            let p = gridfile::read(&input)?;
            let Encoded { container, stats } =
                if strict { codec::encode_strict(&p, exec)? } else { codec::encode(&p, exec) };
            std::fs::write(&output, container.to_bytes()).with_context(|| format!("writing {}", output.display()))?;
            if let Some(path) = stats_json {
                std::fs::write(&path, serde_json::to_string_pretty(&stats)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Decompress { input, output, ascii } => {
            let format = match grid_format(&output)? {
                GridFormat::PgmBinary if ascii => GridFormat::PgmAscii,
                f => f,
            };
            let block = codec::decompress_with(&read_container(&input)?, exec)?;
            gridfile::write(&output, &block, format)?;
        }
        Command::Stats { input } => {
            let p = read_any(&input)?;
            let enc = codec::encode_strict(&p, exec).unwrap_or_else(|_| codec::encode(&p, exec));
            print_json(&enc.stats)?;
        }
        Command::Gen { kind, params, size: (m, n), seed, output } => {
            let format = grid_format(&output)?;
            let kind = match kind {
                SourceKindArg::Iid => "iid",
                SourceKindArg::Markov2d => "markov2d",
            };
            let spec = SourceSpec::parse(kind, &params, m, n, seed)?;
            let block = spec.generate();
            gridfile::write(&output, &block, format)?;
            let (entropy, entropy_kind) = match spec.analytic_entropy() {
                Some(h) => (h, "analytical"),
                None => (conditional_entropy_estimate(&block), "estimated"),
            };
            let primitive = block.is_primitive();
            print_json(&json!({
                "J": spec.alphabet().size(),
                "m": m,
                "n": n,
                "seed": seed,
                "entropy_bits_per_symbol": entropy,
                "entropy_kind": entropy_kind,
                "primitive": primitive,
                "warning": (!primitive).then_some("grid is not primitive and will be stored raw"),
            }))?;
        }
        Command::Verify { mode, size: (m, n), alphabet, count, max, seed } => {
            return match mode {
                VerifyMode::Exhaustive => {
                    if m * n > 16 {
                        return Err(UsageError(format!("exhaustive mode is limited to 16 cells, got {m}x{n}")).into());
                    }
                    let r = verify::exhaustive(&[(m, n)], exec);
                    print_json(&r)?;
                    Ok(r.passed())
                }
                VerifyMode::Random => {
                    if max == 0 {
                        return Err(UsageError("--max must be positive".into()).into());
                    }
                    let r = verify::random(count, max, &[2, 4, 16], seed, exec);
                    print_json(&r)?;
                    Ok(r.passed())
                }
                VerifyMode::Lemmas => {
                    let r = verify::lemmas(m, n, Alphabet::new(alphabet)?, exec)?;
                    print_json(&r)?;
                    Ok(r.passed())
                }
            };
        }
        Command::Compare { input, m_cap } => {
            let p = read_any(&input)?;
            print_json(&baseline::compare_with_cap(&p, m_cap)?)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
