//! `pvc` command-line front end. Payload goes to standard output; stats and
//! diagnostics go to standard error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{default_sources, run_bench, write_csv, BENCH_SIZES};
use crate::codec::{compress, decompress, Mode, DEFAULT_WINDOW};
use crate::corpus::{generate, Distribution};
use crate::stats::inspect;

#[derive(Debug, Parser)]
#[command(name = "pvc", version, about = "Quicksort-decision compressor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a byte stream into a container
    Compress(CompressArgs),
    /// Restore the original bytes from a container
    Decompress(IoArgs),
    /// Print section sizes and rate statistics for a container
    Inspect(InspectArgs),
    /// Write a synthetic corpus
    Gen(GenArgs),
    /// Emit a CSV rate sweep over synthetic sources
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Input file (standard input when omitted or "-")
    pub input: Option<PathBuf>,
    /// Output file (standard output when omitted or "-")
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Raw,
    Enum,
}

impl From<ModeArg> for Mode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Raw => Mode::Raw,
            ModeArg::Enum => Mode::Enum,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(short, long, value_enum, default_value = "enum")]
    pub mode: ModeArg,
    /// Enumerative window size
    #[arg(short, long, default_value_t = DEFAULT_WINDOW,
          value_parser = clap::value_parser!(u32).range(1..=64))]
    pub window: u32,
    /// Write a JSON rate report to standard error
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub input: Option<PathBuf>,
    /// Print JSON instead of name=value lines
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Uniform,
    Zipf,
    Sparse,
    Dyadic,
    Constant,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub distribution: DistArg,
    #[arg(short = 'n', long, default_value_t = 65536)]
    pub size: usize,
    #[arg(short, long, default_value_t = 256)]
    pub alphabet: usize,
    /// Zipf exponent
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    /// Number of nonzero positions for the sparse source
    #[arg(long, default_value_t = 6)]
    pub weight: usize,
    /// Byte value for the constant source
    #[arg(long, default_value_t = 0)]
    pub value: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value_t = DEFAULT_WINDOW,
          value_parser = clap::value_parser!(u32).range(1..=64))]
    pub window: u32,
    /// Comma-separated subset of sources (default: all)
    #[arg(long, value_delimiter = ',')]
    pub sources: Vec<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn is_stdio(path: &Option<PathBuf>) -> Option<&Path> {
    path.as_deref().filter(|p| p.as_os_str() != "-")
}

fn read_input(path: &Option<PathBuf>) -> Result<Vec<u8>> {
    match is_stdio(path) {
        Some(p) => fs::read(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf).context("reading standard input")?;
            Ok(buf)
        }
    }
}

fn write_output(path: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match is_stdio(path) {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush().context("writing standard output")
        }
    }
}

pub fn cmd_compress(args: &CompressArgs) -> Result<()> {
    let input = read_input(&args.io.input)?;
    let values: Vec<u64> = input.iter().map(|&b| u64::from(b)).collect();
    let container = compress(&values, args.mode.into(), args.window)?;
    if args.stats {
        let report = inspect(&container)?;
        eprintln!("{}", report.to_json());
    }
    write_output(&args.io.output, &container)
}

pub fn cmd_decompress(args: &IoArgs) -> Result<()> {
    let input = read_input(&args.input)?;
    let values = decompress(&input).context("decode error")?;
    let bytes = values
        .iter()
        .map(|&v| u8::try_from(v))
        .collect::<Result<Vec<u8>, _>>()
        .context("decode error: container holds symbols outside the byte range")?;
    write_output(&args.output, &bytes)
}

pub fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    let input = read_input(&args.input)?;
    let report = inspect(&input).context("decode error")?;
    let text = if args.json {
        report.to_json() + "\n"
    } else {
        report.to_key_values()
    };
    write_output(&None, text.as_bytes())
}

pub fn distribution(args: &GenArgs) -> Distribution {
    match args.distribution {
        DistArg::Uniform => Distribution::Uniform {
            alphabet: args.alphabet,
        },
        DistArg::Zipf => Distribution::Zipf {
            exponent: args.exponent,
            alphabet: args.alphabet,
        },
        DistArg::Sparse => Distribution::Sparse {
            weight: args.weight,
        },
        DistArg::Dyadic => Distribution::Dyadic {
            alphabet: args.alphabet,
        },
        DistArg::Constant => Distribution::Constant { value: args.value },
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let data = generate(&distribution(args), args.size, args.seed)?;
    write_output(&args.output, &data)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let mut sources = default_sources();
    if !args.sources.is_empty() {
        for name in &args.sources {
            if !sources.iter().any(|s| &s.name == name) {
                bail!("unknown bench source {name:?}");
            }
        }
        sources.retain(|s| args.sources.contains(&s.name));
    }
    let rows = run_bench(&sources, &BENCH_SIZES, args.seed, args.window)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    write_output(&args.output, &csv)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Compress(args) => cmd_compress(args),
        Command::Decompress(args) => cmd_decompress(args),
        Command::Inspect(args) => cmd_inspect(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
    }
}
