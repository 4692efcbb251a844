use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selmer_core::Error;

mod commands;
mod range;

use range::PrimeRange;

/// Census, verification and density tools for anomalous and local-torsion
/// elliptic curves.
#[derive(Parser, Debug)]
#[command(name = "selmer", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,

    /// Shorthand for `--format json`.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// Shorthand for `--format csv`.
    #[arg(long, global = true)]
    csv: bool,

    /// Census cache file (JSON lines). Falls back to $SELMER_CENSUS_CACHE.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Worker threads; defaults to the number of cores. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

impl GlobalOpts {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            self.format
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug, serde::Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Hurwitz class number and reduced forms of a negative discriminant.
    Hurwitz {
        #[arg(long, allow_negative_numbers = true)]
        disc: i64,
    },
    /// Exact anomalous and local-torsion counts for one prime.
    Census {
        #[arg(long)]
        prime: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Fiber)]
        mode: ModeArg,
        /// Same as `--mode exhaustive`.
        #[arg(long)]
        exact_ap: bool,
        /// Lift the default limits (p < 500; exhaustive only for p <= 13).
        #[arg(long)]
        allow_large: bool,
    },
    /// `#S_p / p^2` for every prime in a range, optionally against the reference values.
    Table1 {
        #[arg(long, default_value_t = 7)]
        min_p: u64,
        #[arg(long, default_value_t = 150)]
        max_p: u64,
        /// Exit 1 if any published row is off.
        #[arg(long)]
        check: bool,
    },
    /// Anomalous and local-torsion primes of a curve over Q.
    Scan {
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, allow_negative_numbers = true)]
        b: i64,
        #[arg(long)]
        max_p: u64,
        /// Order of Sha, for reporting the exceptional primes.
        #[arg(long, requires = "tamagawa")]
        sha_order: Option<u64>,
        /// Comma-separated Tamagawa numbers.
        #[arg(long, value_delimiter = ',')]
        tamagawa: Option<Vec<u64>>,
    },
    /// Whether the fine Selmer mu and lambda invariants are forced to vanish.
    Verdict {
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, allow_negative_numbers = true)]
        b: i64,
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        rank: u32,
        /// Order of the p-primary part of Sha.
        #[arg(long, default_value_t = 1)]
        sha_order: u64,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        tamagawa: Vec<u64>,
        /// Assert that the global-to-local Z_p map is an isomorphism (rank 1).
        #[arg(long)]
        phi_isomorphism: bool,
    },
    /// Upper bound on the density of curves with infinite (fine) Selmer group.
    Bounds {
        #[arg(long)]
        prime: u64,
        #[arg(long, value_enum, default_value_t = BoundArg::FineRank0)]
        set: BoundArg,
        /// Density of rank-one curves with a non-invertible local map; default 1/(2p).
        #[arg(long)]
        e5_density: Option<f64>,
    },
    /// Local-torsion counts of integer pairs against their expectation.
    Sieve {
        #[arg(long)]
        y: u64,
        #[arg(long)]
        box_c: u64,
        #[arg(long)]
        box_d: u64,
        #[arg(long, conflicts_with = "exhaustive", required_unless_present = "exhaustive")]
        samples: Option<u64>,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        betas: Vec<f64>,
        #[arg(long)]
        minimal_only: bool,
        /// Allow Monte-Carlo boxes with C or D at most Y^4.
        #[arg(long)]
        allow_small_box: bool,
    },
    /// Run a verification suite over a range of primes.
    Verify {
        #[arg(long, value_enum)]
        check: CheckArg,
        /// Inclusive range `lo..hi`; each suite has its own default.
        #[arg(long)]
        prime_range: Option<PrimeRange>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Fiber,
    Exhaustive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum BoundArg {
    Selmer,
    #[value(name = "fine-rank0")]
    #[serde(rename = "fine-rank0")]
    FineRank0,
    #[value(name = "fine-rank1")]
    #[serde(rename = "fine-rank1")]
    FineRank1,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum CheckArg {
    WaterhouseSchoof,
    Fibers,
    LemmaRank,
    OracleEquivalence,
    Table1,
    Sbar,
    ApModes,
}

/// What a command produced, and whether its checks held.
pub struct Outcome {
    pub output: String,
    pub ok: bool,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidConfig(_)
            | Error::InvalidModulus(_)
            | Error::UnsupportedPrime(_)
            | Error::InvalidDiscriminant(_)
            | Error::OutOfScope(_)
            | Error::Precondition(_)
            | Error::SingularCurve { .. }
            | Error::BadReduction(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    eprintln!("selmer {}", env!("CARGO_PKG_VERSION"));
    let resolved = serde_json::json!({
        "command": &cli.command,
        "format": cli.global.format(),
        "cache": commands::cache_path(&cli.global),
        "threads": cli.global.threads,
        "seed": cli.global.seed,
    });
    eprintln!("config {resolved}");

    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    match commands::dispatch(&cli.command, &cli.global) {
        Ok(outcome) => {
            print!("{}", outcome.output);
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
