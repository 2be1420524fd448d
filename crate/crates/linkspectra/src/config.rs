//! Validated run configuration, written as `config.json` next to every output.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use linkspectra_core::synth::{DayNight, MIN_TRIALS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::formats::{Format, Window};

pub const CONFIG_FILE: &str = "config.json";

/// Where the graph basis comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BasisSpec {
    /// Recursive SVD bisection of the aggregate graph.
    Svd,
    /// BFS halving of the relations active in the aggregate graph.
    Bfs,
    /// A tree file written by the `basis` command.
    File(PathBuf),
}

impl FromStr for BasisSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "svd" => BasisSpec::Svd,
            "bfs" => BasisSpec::Bfs,
            "" => return Err("empty basis".into()),
            path => BasisSpec::File(PathBuf::from(path)),
        })
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisSpec::Svd => f.write_str("svd"),
            BasisSpec::Bfs => f.write_str("bfs"),
            BasisSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl TryFrom<String> for BasisSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<BasisSpec> for String {
    fn from(b: BasisSpec) -> String {
        b.to_string()
    }
}

/// Backbone coefficient selection, written `top:<k>` or `box:<u0:u1,k0:k1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Keep {
    Top(usize),
    Box { u0: usize, u1: usize, k0: usize, k1: usize },
}

fn range(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(':')?;
    let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a <= b).then_some((a, b))
}

impl FromStr for Keep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected top:<k> or box:<u0:u1,k0:k1>, got `{s}`");
        if let Some(k) = s.strip_prefix("top:") {
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            if k == 0 {
                return Err("top:<k> needs k ≥ 1".into());
            }
            return Ok(Keep::Top(k));
        }
        let body = s.strip_prefix("box:").ok_or_else(bad)?;
        let (us, ks) = body.split_once(',').ok_or_else(bad)?;
        let ((u0, u1), (k0, k1)) = (range(us).ok_or_else(bad)?, range(ks).ok_or_else(bad)?);
        Ok(Keep::Box { u0, u1, k0, k1 })
    }
}

impl fmt::Display for Keep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Keep::Top(k) => write!(f, "top:{k}"),
            Keep::Box { u0, u1, k0, k1 } => write!(f, "box:{u0}:{u1},{k0}:{k1}"),
        }
    }
}

impl TryFrom<String> for Keep {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Keep> for String {
    fn from(k: Keep) -> String {
        k.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    /// Claw and triangle alternating on four vertices.
    Oscillating { len: usize },
    /// Two independent block-model graphs, written as a two-row stream.
    Sbm { blocks: usize, per_block: usize, p_in: f64, p_out: f64 },
    Daynight(DayNight),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Ingest,
    Basis,
    Decompose,
    Filter { freq: Option<String>, structural: Option<String> },
    Backbone { keep: Keep },
    /// Circulant aggregation over `width` samples.
    Aggregate { width: usize },
    Embed { coarse: bool },
    Regularity,
    Synth { generator: Generator },
    VerifyLemmas { trials: usize, lemmas: Vec<u8> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Basis => "basis",
            Command::Decompose => "decompose",
            Command::Filter { .. } => "filter",
            Command::Backbone { .. } => "backbone",
            Command::Aggregate { .. } => "aggregate",
            Command::Embed { .. } => "embed",
            Command::Regularity => "regularity",
            Command::Synth { .. } => "synth",
            Command::VerifyLemmas { .. } => "verify-lemmas",
        }
    }

    fn needs_input(&self) -> bool {
        !matches!(self, Command::Synth { .. } | Command::VerifyLemmas { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub input: Option<PathBuf>,
    pub format: Option<Format>,
    pub window: Option<Window>,
    pub basis: BasisSpec,
    /// Resolution level `j`; `None` is the coarsest.
    pub level: Option<u32>,
    pub seed: u64,
    pub out: PathBuf,
    /// Format of emitted streams (`csv` or `raw`).
    pub emit: Format,
    pub linear_boundary: bool,
}

impl RunConfig {
    pub fn new(command: Command, out: impl Into<PathBuf>) -> Self {
        Self {
            command,
            input: None,
            format: None,
            window: None,
            basis: BasisSpec::Svd,
            level: None,
            seed: 0,
            out: out.into(),
            emit: Format::Csv,
            linear_boundary: false,
        }
    }

    pub fn with_input(mut self, input: impl Into<PathBuf>) -> Self {
        self.input = Some(input.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.command.needs_input() && self.input.is_none() {
            return usage(format!("`{}` needs --input", self.command.name()));
        }
        if self.emit == Format::Ndjson {
            return usage("streams are emitted as csv or raw".into());
        }
        match &self.command {
            Command::Filter { freq: None, structural: None } => {
                return usage("filter needs --freq and/or --struct".into());
            }
            Command::Aggregate { width: 0 } => return usage("aggregation width must be at least 1".into()),
            Command::VerifyLemmas { trials, lemmas } => {
                if *trials < MIN_TRIALS {
                    return usage(format!("--trials must be at least {MIN_TRIALS}"));
                }
                if let Some(l) = lemmas.iter().find(|l| !(1..=4).contains(*l)) {
                    return usage(format!("no lemma {l}; choose from 1 to 4"));
                }
            }
            Command::Synth { generator: Generator::Oscillating { len: 0 } } => {
                return usage("stream length must be positive".into());
            }
            _ => {}
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(CONFIG_FILE);
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
    }
}
