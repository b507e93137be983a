//! `treecross` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 enumeration cap
//! exceeded. Machine output goes to stdout, diagnostics to stderr.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use treecross::arrangement::{count_crossings, LinearArrangement};
use treecross::oracle::{self, Caps, OracleError};
use treecross::random_lab::{self, estimate_expected_crossings, swap_walk, SwapWalk};
use treecross::theory::theory_report;
use treecross::tree::Tree;
use treecross::treebank::{
    self, corpus_report, open_input, parse_conll, ParseOptions, ReportOptions,
};

#[derive(Parser, Debug)]
#[command(
    name = "treecross",
    version,
    about = "Edge crossings of linearly arranged trees"
)]
struct Cli {
    /// Worker threads for mc, fig5 and verify (output does not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format; every report has a JSON form.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ShapeArg {
    Star,
    Linear,
    Random,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a star, path or uniformly random labeled tree.
    Gen {
        #[arg(long, value_enum)]
        shape: ShapeArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Closed-form quantities of a tree.
    Stats {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Observed crossings and dependency length of an arrangement.
    Cross {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        order: PathBuf,
    },
    /// Monte Carlo estimate of the expected number of crossings.
    Mc {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random-swap walk from an arrangement; per-step mean C and <d>.
    Fig5 {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        order: PathBuf,
        #[arg(long)]
        swaps: usize,
        #[arg(long, default_value_t = 10_000)]
        replicas: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exhaustive oracle checks for every n from --min-n to --max-n.
    Verify {
        #[arg(long)]
        max_n: usize,
        #[arg(long, default_value_t = 2)]
        min_n: usize,
        /// Raise the tree-enumeration cap (default 7).
        #[arg(long)]
        tree_cap: Option<usize>,
    },
    /// Per-sentence statistics of a CoNLL-X / CoNLL-U treebank.
    Treebank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        drop_punct: bool,
        /// Monte Carlo samples per sentence for the dispersion of C.
        #[arg(long)]
        mc_samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Cap(String),
}

impl CliError {
    fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Cap(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(format!("Io: {e}"))
    }
}

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage(format!("`{command}` is stochastic and needs --seed")))
}

fn read_tree(path: &Path) -> Result<Tree, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("Io: {}: {e}", path.display())))?;
    text.parse().map_err(CliError::data)
}

fn read_order(path: &Path) -> Result<LinearArrangement, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("Io: {}: {e}", path.display())))?;
    text.parse().map_err(CliError::data)
}

fn json_line(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON value serializes") + "\n"
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let as_json = cli.format == Some(Format::Json);
    match cli.command {
        Command::Gen { shape, n, seed } => {
            let tree = match shape {
                ShapeArg::Star => Tree::star(n),
                ShapeArg::Linear => Tree::linear(n),
                ShapeArg::Random => {
                    let seed = require_seed(seed, "gen --shape random")?;
                    Tree::random(n, &mut random_lab::unit_rng(seed, 0))
                }
            }
            .map_err(CliError::data)?;
            if as_json {
                out.write_all(
                    json_line(&json!({"n": tree.n(), "edges": tree.edges()})).as_bytes(),
                )?;
            } else {
                out.write_all(tree.to_text().as_bytes())?;
            }
        }
        Command::Stats { tree } => {
            let report = theory_report(&read_tree(&tree)?);
            if as_json {
                let value = serde_json::to_value(&report).expect("report serializes");
                out.write_all(json_line(&value).as_bytes())?;
            } else {
                out.write_all(report.to_tsv().as_bytes())?;
            }
        }
        Command::Cross { tree, order } => {
            let tree = read_tree(&tree)?;
            let order = read_order(&order)?;
            let report = count_crossings(&tree, &order).map_err(CliError::data)?;
            if as_json {
                out.write_all(json_line(&report.to_json()).as_bytes())?;
            } else {
                out.write_all(report.to_key_value().as_bytes())?;
            }
        }
        Command::Mc {
            tree,
            samples,
            seed,
        } => {
            let seed = require_seed(seed, "mc")?;
            let tree = read_tree(&tree)?;
            let est = estimate_expected_crossings(&tree, samples, seed).map_err(CliError::data)?;
            if as_json {
                let value = serde_json::to_value(est).expect("estimate serializes");
                out.write_all(json_line(&value).as_bytes())?;
            } else {
                out.write_all(est.to_key_value().as_bytes())?;
            }
        }
        Command::Fig5 {
            tree,
            order,
            swaps,
            replicas,
            seed,
        } => {
            let seed = require_seed(seed, "fig5")?;
            let tree = read_tree(&tree)?;
            let order = read_order(&order)?;
            let traj = swap_walk(&tree, &order, SwapWalk::new(swaps, replicas, seed))
                .map_err(CliError::data)?;
            if let Some(tail) = traj.tail {
                eprintln!(
                    "swaps {}..={}: mean C {:.4} (se {:.4}), mean <d> {:.4} (se {:.4})",
                    tail.first_swap, tail.last_swap, tail.mean_c, tail.se_c, tail.mean_d, tail.se_d
                );
            }
            if as_json {
                let value = serde_json::to_value(&traj).expect("trajectory serializes");
                out.write_all(json_line(&value).as_bytes())?;
            } else {
                out.write_all(traj.to_tsv().as_bytes())?;
            }
        }
        Command::Verify {
            max_n,
            min_n,
            tree_cap,
        } => {
            if min_n < 2 || min_n > max_n {
                return Err(CliError::Usage(format!(
                    "need 2 <= --min-n <= --max-n, got {min_n}..{max_n}"
                )));
            }
            let mut caps = Caps::default();
            if let Some(cap) = tree_cap {
                caps.tree_n = cap;
                caps.permutation_n = caps.permutation_n.max(cap);
            }
            // Fail fast before any long enumeration.
            if max_n > caps.tree_n {
                return Err(OracleError::TooLarge {
                    n: max_n,
                    cap: caps.tree_n,
                }
                .into());
            }
            let mut reports = Vec::new();
            let mut failed = 0;
            for n in min_n..=max_n {
                let identity = oracle::verify_expectation_identity(n, caps)?;
                let extremes = oracle::verify_k2_extremes(n, caps)?;
                let bound = oracle::verify_cpairs_bound(n, caps)?;
                failed +=
                    identity.violations.len() + extremes.violations.len() + bound.violations.len();
                eprintln!("n={n}: {} trees checked", identity.trees_checked);
                reports.push(serde_json::to_value(identity).expect("report serializes"));
                reports.push(serde_json::to_value(extremes).expect("report serializes"));
                reports.push(serde_json::to_value(bound).expect("report serializes"));
            }
            out.write_all(json_line(&json!({"reports": reports})).as_bytes())?;
            if failed > 0 {
                return Err(CliError::Data(format!(
                    "VerificationFailed: {failed} violations"
                )));
            }
        }
        Command::Treebank {
            input,
            out: dir,
            drop_punct,
            mc_samples,
            seed,
        } => {
            let dispersion = match mc_samples {
                Some(samples) => Some((samples, require_seed(seed, "treebank --mc-samples")?)),
                None => None,
            };
            let reader = open_input(&input)
                .map_err(|e| CliError::Data(format!("Io: {}: {e}", input.display())))?;
            fs::create_dir_all(&dir)?;
            let csv_path = dir.join("sentences.csv");
            let csv = BufWriter::new(File::create(&csv_path)?);
            let summary = corpus_report(
                parse_conll(reader, ParseOptions { drop_punct }),
                csv,
                ReportOptions { dispersion },
            )
            .map_err(|e| match e {
                treebank::TreebankError::Io(e) => CliError::Data(format!("Io: {e}")),
                other => CliError::data(other),
            })?;
            let value = serde_json::to_value(&summary).expect("summary serializes");
            let text = json_line(&value);
            fs::write(dir.join("summary.json"), &text)?;
            out.write_all(text.as_bytes())?;
            eprintln!(
                "{} sentences: {} parsed, {} skipped; wrote {}",
                summary.sentences,
                summary.parsed,
                summary.skipped,
                csv_path.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("thread pool: {e}");
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out).and_then(|()| out.flush().map_err(CliError::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) | CliError::Data(msg) | CliError::Cap(msg) => {
                    eprintln!("error: {msg}")
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
