use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cis",
    version,
    about = "Continuously increasing subsequences of random multiset permutations"
)]
pub struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Format::Plain)]
    pub format: Format,
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Neither read nor write the result cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// E[L¹] as a series of exact completion probabilities.
    L1Exact {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        #[arg(long, default_value_t = 5000)]
        max_n: u32,
    },
    /// E[L¹] from the zeros of the truncated exponential.
    L1Closed {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = cis_core::spectral::DEFAULT_BITS)]
        bits: u32,
    },
    /// The approximation m + 1 - 1/(m+2).
    L1Approx {
        #[arg(long)]
        m: u32,
    },
    /// Exact Pr[L¹_{m,n} = n].
    ProbComplete {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Engine::Hk)]
        engine: Engine,
    },
    /// Zeros of the truncated exponential E_m.
    Roots {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = cis_core::spectral::DEFAULT_BITS)]
        bits: u32,
        #[arg(long)]
        check_power_sums: bool,
        /// Also report the small/large root partition diagnostic.
        #[arg(long)]
        partition: bool,
    },
    /// Coefficients of the reciprocal remainder series.
    RecipSeries {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        k: usize,
    },
    /// Inverse of Γ on [2, ∞).
    Invgamma {
        #[arg(long)]
        y: f64,
    },
    /// Tail, expectation and code bounds.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Seeded Monte Carlo estimators.
    #[command(subcommand)]
    Mc(McCommand),
    /// Partial feedback card guessing.
    Cardgame {
        #[arg(long, value_enum)]
        strategy: Strategy,
        #[command(flatten)]
        sample: SampleArgs,
        /// Play a single given deck instead of sampling.
        #[arg(long, conflicts_with = "trials")]
        word: Option<String>,
    },
    /// Run the acceptance checks.
    VerifyAll {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Hk,
    Gf,
    Brute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Trivial,
    Safe,
    Shifting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Runs,
    Ap,
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// min(1, |W_k| m^k / k!).
    Tail {
        #[arg(long, value_enum, default_value_t = Family::Runs)]
        family: Family,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
    },
    /// Upper bound on E[L(π; W)] given |W_k| <= N.
    ExpectationUpper {
        #[arg(long)]
        m: u32,
        /// Family size cap N (decimal integer of any size).
        #[arg(long)]
        cap: String,
    },
    /// 1 - (1 - p_k)^{⌊n/k⌋}.
    BlockLower {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        /// Report the exact rational.
        #[arg(long)]
        exact: bool,
    },
    /// Greedy lexicographic code with minimum distance δ.
    GvCode {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        delta: u32,
        /// Include the codewords.
        #[arg(long)]
        list: bool,
    },
    /// |T|/n! (1 - (|T|-1)/δ!), clamped at 0.
    CompletionLower {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        t_size: u64,
        #[arg(long)]
        delta: u32,
    },
    /// Exact check of both factorial threshold inequalities.
    FactorialThreshold {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        c: f64,
    },
    /// (m/1.03)^n / (2n n!), in log space.
    LowerCont {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
    },
    /// C(n, δ) <= 2^{n H(δ/n)}.
    Entropy {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        delta: u32,
    },
}

#[derive(Clone, Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Master seed; results are cached only when it is given.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// E[L¹], the run starting at 1.
    L1(SampleArgs),
    /// E[L], the longest run from any start.
    Lmax(SampleArgs),
    /// Longest increasing subsequence.
    Lis(SampleArgs),
    /// Raw and central moments of L¹ next to their conjectured targets.
    Moments {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 4)]
        r_max: u32,
    },
    /// Pr[L¹_{m,n} ≥ k] against Pr[L¹_{m,k} = k].
    Obs1 {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        k: u32,
    },
    /// Plain against labeled containment of a word with distinct letters.
    Obs2 {
        #[command(flatten)]
        sample: SampleArgs,
        /// Letters, e.g. "2,4".
        #[arg(long)]
        w: String,
    },
}
