//! Command-line grammar, converted into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use linkspectra_core::synth::DayNight;

use crate::config::{BasisSpec, Command, Generator, Keep, RunConfig};
use crate::formats::{Format, Window};

#[derive(Debug, Parser)]
#[command(name = "linkspectra", version, about = "Frequency-structure analysis of link streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Triplet CSV/NDJSON or a dense stream file.
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; inferred from the extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Observation window `t0:T`.
    #[arg(long)]
    pub window: Option<Window>,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    /// `svd`, `bfs` or a tree file.
    #[arg(long, default_value = "svd")]
    pub basis: BasisSpec,
    /// Resolution level j (default: coarsest).
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Format of emitted streams.
    #[arg(long, value_enum, default_value = "csv")]
    pub emit: Format,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Read triplets into a dense stream file.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build a partition tree.
    Basis {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write the frequency-structure plot bundle.
    Decompose {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Apply a joint frequency and structural filter.
    Filter {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        out: OutArgs,
        /// `allpass`, `dc`, `diff`, `agg:<k>`, `lowpass:<cutoff>` or a CSV file `u,re,im`.
        #[arg(long)]
        freq: Option<String>,
        /// `identity`, `coarse`, `detail` or a CSV file `element,value`.
        #[arg(long = "struct")]
        structural: Option<String>,
    },
    /// Reconstruct from selected coefficients.
    Backbone {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        out: OutArgs,
        /// `top:<k>` or `box:<u0:u1,k0:k1>`.
        #[arg(long)]
        keep: Keep,
    },
    /// Circular sliding-window sum over time.
    Aggregate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Observation window `t0:T`.
        #[arg(long)]
        range: Option<Window>,
        /// Aggregation width in samples.
        #[arg(long)]
        window: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Graph-basis embedding of every slice.
    Embed {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Keep only the scaling coefficients.
        #[arg(long)]
        coarse: bool,
    },
    /// Time and relation regularity.
    Regularity {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Count only the T-1 interior time differences.
        #[arg(long)]
        linear_boundary: bool,
    },
    /// Generate a synthetic stream.
    Synth {
        #[command(subcommand)]
        generator: SynthCmd,
    },
    /// Closed-form and Monte-Carlo checks of the embedding identities.
    VerifyLemmas {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Lemma to check (repeatable; default all).
        #[arg(long = "lemma")]
        lemmas: Vec<u8>,
        #[arg(long)]
        level: Option<u32>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum SynthCmd {
    /// Claw and triangle alternating.
    Oscillating {
        #[arg(long, default_value_t = 32)]
        len: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Two block-model graphs as a two-row stream.
    Sbm {
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(long, default_value_t = 16)]
        per_block: usize,
        #[arg(long, default_value_t = 0.5)]
        p_in: f64,
        #[arg(long, default_value_t = 0.01)]
        p_out: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Communities active by day, silent by night.
    Daynight {
        #[arg(long, default_value_t = 2)]
        communities: usize,
        #[arg(long, default_value_t = 16)]
        per_community: usize,
        #[arg(long, default_value_t = 20)]
        period: usize,
        #[arg(long, default_value_t = 0.5)]
        duty: f64,
        #[arg(long, default_value_t = 0.1)]
        p_active: f64,
        #[arg(long, default_value_t = 200)]
        len: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn base(command: Command, out: OutArgs) -> RunConfig {
    let mut cfg = RunConfig::new(command, out.out);
    cfg.seed = out.seed;
    cfg.emit = out.emit;
    cfg
}

fn with_input(mut cfg: RunConfig, input: InputArgs) -> RunConfig {
    cfg.input = Some(input.input);
    cfg.format = input.format;
    cfg.window = input.window;
    cfg
}

fn with_basis(mut cfg: RunConfig, basis: BasisArgs) -> RunConfig {
    cfg.basis = basis.basis;
    cfg.level = basis.level;
    cfg
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        match cli.command {
            Cmd::Ingest { input, out } => with_input(base(Command::Ingest, out), input),
            Cmd::Basis { input, basis, out } => with_basis(with_input(base(Command::Basis, out), input), basis),
            Cmd::Decompose { input, basis, out } => with_basis(with_input(base(Command::Decompose, out), input), basis),
            Cmd::Filter { input, basis, out, freq, structural } => {
                with_basis(with_input(base(Command::Filter { freq, structural }, out), input), basis)
            }
            Cmd::Backbone { input, basis, out, keep } => {
                with_basis(with_input(base(Command::Backbone { keep }, out), input), basis)
            }
            Cmd::Aggregate { input, format, range, window, out } => {
                let mut cfg = base(Command::Aggregate { width: window }, out);
                cfg.input = Some(input);
                cfg.format = format;
                cfg.window = range;
                cfg
            }
            Cmd::Embed { input, basis, out, coarse } => {
                with_basis(with_input(base(Command::Embed { coarse }, out), input), basis)
            }
            Cmd::Regularity { input, basis, out, linear_boundary } => {
                let mut cfg = with_basis(with_input(base(Command::Regularity, out), input), basis);
                cfg.linear_boundary = linear_boundary;
                cfg
            }
            Cmd::Synth { generator } => {
                let (generator, out) = match generator {
                    SynthCmd::Oscillating { len, out } => (Generator::Oscillating { len }, out),
                    SynthCmd::Sbm { blocks, per_block, p_in, p_out, out } => {
                        (Generator::Sbm { blocks, per_block, p_in, p_out }, out)
                    }
                    SynthCmd::Daynight { communities, per_community, period, duty, p_active, len, out } => {
                        (Generator::Daynight(DayNight { communities, per_community, period, duty, p_active, len }), out)
                    }
                };
                base(Command::Synth { generator }, out)
            }
            Cmd::VerifyLemmas { trials, lemmas, level, out } => {
                let mut cfg = base(Command::VerifyLemmas { trials, lemmas }, out);
                cfg.level = level;
                cfg
            }
        }
    }
}
