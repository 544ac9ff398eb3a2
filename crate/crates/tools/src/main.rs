use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psvf_core::model::Family;
use psvf_tools::commands;
use psvf_tools::config::{parse_range, parse_word, BetaGrid, CommandName, ConfigError, PolicyName, RunConfig, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "psvf", version, about = "Thermodynamic formalism toolkit for planar piecewise smooth vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a trajectory; writes trajectory.csv and events.jsonl.
    Simulate(Opts),
    /// Print the itinerary of a trajectory.
    Itinerary(Opts),
    /// Write the arc transition graph as DOT.
    Graph(Opts),
    /// Pressure curve over a beta grid.
    Pressure(Opts),
    /// Entropy (beta = 0 pressure) with a word-count cross-check.
    Entropy(Opts),
    /// Tent-map entropy estimates.
    Tent(Opts),
    /// Cantor-set dimension against tent entropy.
    Dimension(Opts),
    /// Run the acceptance suite.
    Verify(Opts),
}

#[derive(Args, Clone, Debug, Default)]
struct Opts {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    k: Option<u32>,
    /// Petal probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    /// Grid `lo:hi:step` (inclusive) or a single value.
    #[arg(long)]
    beta: Option<BetaGrid>,
    /// Output directory [default: $PSVF_OUT_DIR, else ./psvf-out].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Spectral solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    policy: Option<PolicyName>,
    /// Prescribed word, e.g. "0 1 3 2".
    #[arg(long)]
    word: Option<Word>,
    /// Word to compare the itinerary with.
    #[arg(long)]
    compare: Option<Word>,
    #[arg(long)]
    start_arc: Option<usize>,
    /// Time along the starting arc, in [0, 1).
    #[arg(long)]
    start_s: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Use an empirical matrix from this many flowed samples.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    word_len: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Lap-count fit window `lo:hi`.
    #[arg(long, value_parser = parse_range)]
    laps: Option<(usize, usize)>,
    #[arg(long)]
    sep_n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<f64>>,
}

/// A symbol word on the command line; clap would otherwise read `Vec` as repeated values.
#[derive(Clone, Debug)]
struct Word(Vec<usize>);

impl std::str::FromStr for Word {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_word(s).map(Word)
    }
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum FamilyArg {
    Zk,
    Petal,
}

impl Opts {
    fn flags(&self, command: CommandName) -> RunConfig {
        RunConfig {
            command: Some(command),
            family: self.family.map(|f| match f {
                FamilyArg::Zk => Family::Zk,
                FamilyArg::Petal => Family::Petal,
            }),
            k: self.k,
            p: self.p.clone(),
            p1: self.p1,
            p2: self.p2,
            beta: self.beta,
            out_dir: self.out_dir.clone(),
            seed: self.seed,
            tol: self.tol,
            policy: self.policy,
            word: self.word.clone().map(|w| w.0),
            compare: self.compare.clone().map(|w| w.0),
            start_arc: self.start_arc,
            start_s: self.start_s,
            t_end: self.t_end,
            dt: self.dt,
            samples: self.samples,
            word_len: self.word_len,
            alpha: self.alpha.clone(),
            laps: self.laps,
            sep_n: self.sep_n,
            eps: self.eps,
            s: self.s.clone(),
        }
    }
}

fn load(opts: &Opts, command: CommandName) -> anyhow::Result<RunConfig> {
    let base = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| ConfigError::new("config", e.to_string()))?
        }
        None => RunConfig::default(),
    };
    let mut cfg = base.merge(opts.flags(command));
    if cfg.out_dir.is_none() {
        cfg.out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Cmd::Simulate(o) => (CommandName::Simulate, o),
        Cmd::Itinerary(o) => (CommandName::Itinerary, o),
        Cmd::Graph(o) => (CommandName::Graph, o),
        Cmd::Pressure(o) => (CommandName::Pressure, o),
        Cmd::Entropy(o) => (CommandName::Entropy, o),
        Cmd::Tent(o) => (CommandName::Tent, o),
        Cmd::Dimension(o) => (CommandName::Dimension, o),
        Cmd::Verify(o) => (CommandName::Verify, o),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = load(opts, command).and_then(|cfg| commands::run(&cfg, &mut out));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if let Some(c) = e.downcast_ref::<ConfigError>() {
                eprintln!("usage error: {c}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
