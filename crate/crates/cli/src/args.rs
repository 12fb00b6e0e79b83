use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use manna::{parse_rational, Rational};

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Comma-separated rationals, kept as one argument value.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalList(pub Vec<Rational>);

fn rational_list(s: &str) -> Result<RationalList, String> {
    s.split(',').map(|p| rational(p.trim())).collect::<Result<_, _>>().map(RationalList)
}

/// Exact fair division in matching markets with goods, chores and mixed manna.
#[derive(Debug, Parser)]
#[command(name = "manna", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for parallel searches (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write the report and all outputs into this directory instead of
    /// printing to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an instance file and summarize it.
    Validate { instance: PathBuf },

    /// Certify a property of an allocation.
    Check {
        kind: CheckKind,
        instance: PathBuf,
        allocation: PathBuf,
        /// Prices file (hz) or earnings file (earnings).
        vector: Option<PathBuf>,
        #[arg(long, value_parser = rational, default_value = "0")]
        eps: Rational,
    },

    /// Run a solver and verify its output.
    Solve {
        kind: SolveKind,
        instance: PathBuf,
        /// Relaxation for the grid equilibrium search.
        #[arg(long, value_parser = rational, default_value = "0")]
        eps: Rational,
        /// Grid step: price step for grid-hz (default 1/4), allocation step
        /// for min-product and pcnb (default 1/100).
        #[arg(long, value_parser = rational)]
        delta: Option<Rational>,
        /// Largest grid price for grid-hz (default: number of items).
        #[arg(long, value_parser = rational)]
        cap: Option<Rational>,
        /// Duality-gap target for nb.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
    },

    /// Rewrite an instance or a price/earnings vector.
    Transform {
        kind: TransformKind,
        input: PathBuf,
        /// Per-agent shifts, comma separated (shift).
        #[arg(long, value_parser = rational_list, allow_hyphen_values = true)]
        c: Option<RationalList>,
        /// Positive scale factor (shift, scale).
        #[arg(long, value_parser = rational)]
        a: Option<Rational>,
    },

    /// Reproduce one of the two chores counterexamples.
    Demo {
        which: DemoKind,
        /// Disutility C of the worse chore (fig1 only, C > 1).
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        param: Option<Rational>,
        /// Sampling step of t (default 1/100).
        #[arg(long, value_parser = rational)]
        delta: Option<Rational>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Ef,
    Po,
    Hz,
    Earnings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveKind {
    WelfareEf,
    TwoType,
    Nb,
    MinProduct,
    Pcnb,
    GridHz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Shift,
    Scale,
    Dichotomize,
    ToEarnings,
    ToPrices,
    Normalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoKind {
    Fig1,
    Fig2,
}
