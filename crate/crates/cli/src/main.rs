//! `nav-eval`: import, select, perturb, export and evaluate variation
//! clusters from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Every failure prints
//! exactly one line to stderr, `error[usage]: ...` or `error[data]: ...`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use nav_eval::corpus::{
    attach_hypotheses, build_extreme_testset, corpus_stats, export_parallel, parse_staple,
    read_canonical, write_canonical, ExtremeMode,
};
use nav_eval::metrics::{evaluate, report_json, report_table};
use nav_eval::perturb::{parse_pronoun_map, synthesize_dataset, PerturbConfig, Ruleset};
use nav_eval::subselect::{select, SelectionSpec};
use nav_eval::tokenize::tokenize_13a;

#[derive(Parser)]
#[command(
    name = "nav-eval",
    version,
    about = "Corpus engineering and evaluation for translation consistency under source-side variation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Import a block-format variant file into the canonical JSONL form.
    Import {
        /// Input file: blank-line-separated blocks of `id|target` followed
        /// by `variant|weight` lines.
        staple_file: PathBuf,
        /// Source language tag recorded for the corpus.
        #[arg(long)]
        source_lang: String,
        /// Target language tag recorded for the corpus.
        #[arg(long)]
        target_lang: String,
        /// Field delimiter used by the input file.
        #[arg(long, default_value_t = '|')]
        delimiter: char,
        /// Canonical JSONL output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep a per-cluster subset of variants.
    Select {
        /// Canonical JSONL corpus.
        corpus_file: PathBuf,
        /// Which variants to keep from each cluster.
        #[arg(long)]
        strategy: Strategy,
        /// Subset size per cluster (required for most, least and random).
        #[arg(long)]
        k: Option<usize>,
        /// Master seed (required for random; random only).
        #[arg(long)]
        seed: Option<u64>,
        /// Canonical JSONL output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the 1-most or 1-least extreme test set.
    MakeTestsets {
        /// Canonical JSONL corpus.
        corpus_file: PathBuf,
        /// Which weight extreme each cluster keeps.
        #[arg(long)]
        mode: Mode,
        /// Canonical JSONL output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize perturbed variants from each cluster's dominant source.
    Perturb {
        /// Canonical JSONL corpus.
        corpus_file: PathBuf,
        /// Perturbation engine.
        #[arg(long)]
        ruleset: RulesetArg,
        /// Master seed for all randomness.
        #[arg(long)]
        seed: u64,
        /// Variants per cluster, including the unmodified base.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Probability that an applicable rule fires (japanese ruleset only).
        #[arg(long, default_value_t = 0.5)]
        rule_prob: f64,
        /// JSON file mapping pronouns to replacement lists (japanese only).
        #[arg(long)]
        pronoun_map: Option<PathBuf>,
        /// Canonical JSONL output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write line-aligned source and target text files.
    Export {
        /// Canonical JSONL corpus.
        corpus_file: PathBuf,
        /// Source-side output path, one variant per line.
        #[arg(long)]
        src_out: PathBuf,
        /// Target-side output path, one line per variant.
        #[arg(long)]
        tgt_out: PathBuf,
    },
    /// Score hypotheses against a corpus and print a metric report.
    Evaluate {
        /// Canonical JSONL corpus.
        corpus_file: PathBuf,
        /// Hypothesis file, one line per exported variant; omit when the
        /// corpus already carries hypotheses.
        #[arg(long)]
        hyp: Option<PathBuf>,
        /// Also compute pairwise BLEU within each cluster.
        #[arg(long)]
        pwb: bool,
        /// Write the report as a JSON line to this path.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Debug helper: print the metric tokenization of a text.
    Tokenize {
        /// Text to tokenize; read from stdin when omitted.
        text: Option<String>,
        /// Keep the original casing.
        #[arg(long)]
        no_lowercase: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Strategy {
    All,
    Most,
    Least,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Most,
    Least,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RulesetArg {
    Latin,
    Japanese,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        match self {
            CliError::Usage(message) => {
                eprintln!("error[usage]: {message}");
                ExitCode::from(1)
            }
            CliError::Data(message) => {
                eprintln!("error[data]: {message}");
                ExitCode::from(2)
            }
        }
    }
}

fn data_error(error: impl std::fmt::Display) -> CliError {
    CliError::Data(error.to_string())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Result<(), CliError> {
    let raw = match std::env::var("NAV_EVAL_THREADS") {
        Ok(raw) => raw,
        Err(_) => return Ok(()),
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "NAV_EVAL_THREADS must be a positive integer, got '{raw}'"
            ))
        })?;
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn load_corpus(path: &Path) -> Result<nav_eval::Corpus, CliError> {
    read_canonical(&read_file(path)?).map_err(data_error)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Import {
            staple_file,
            source_lang,
            target_lang,
            delimiter,
            out,
        } => {
            let input = read_file(&staple_file)?;
            let corpus =
                parse_staple(&input, &source_lang, &target_lang, delimiter).map_err(data_error)?;
            write_file(&out, &write_canonical(&corpus))?;
            let stats = corpus_stats(&corpus);
            println!("clusters: {}", stats.cluster_count);
            println!(
                "unique source segments / unique target segments: {} / {}",
                stats.unique_source_segments, stats.unique_target_segments
            );
        }
        Command::Select {
            corpus_file,
            strategy,
            k,
            seed,
            out,
        } => {
            let spec = selection_spec(strategy, k, seed)?;
            let corpus = load_corpus(&corpus_file)?;
            write_file(&out, &write_canonical(&select(&corpus, &spec)))?;
        }
        Command::MakeTestsets {
            corpus_file,
            mode,
            out,
        } => {
            let corpus = load_corpus(&corpus_file)?;
            let mode = match mode {
                Mode::Most => ExtremeMode::Most,
                Mode::Least => ExtremeMode::Least,
            };
            write_file(&out, &write_canonical(&build_extreme_testset(&corpus, mode)))?;
        }
        Command::Perturb {
            corpus_file,
            ruleset,
            seed,
            n,
            rule_prob,
            pronoun_map,
            out,
        } => {
            if n < 2 {
                return Err(CliError::Usage(format!("--n must be at least 2, got {n}")));
            }
            if !(0.0..=1.0).contains(&rule_prob) {
                return Err(CliError::Usage(format!(
                    "--rule-prob must be within [0, 1], got {rule_prob}"
                )));
            }
            let ruleset = match ruleset {
                RulesetArg::Latin => Ruleset::Latin,
                RulesetArg::Japanese => Ruleset::Japanese,
            };
            let mut config = PerturbConfig::new(ruleset, seed);
            config.variants_per_pair = n;
            config.rule_probability = rule_prob;
            if let Some(path) = pronoun_map {
                config.pronoun_map = parse_pronoun_map(&read_file(&path)?).map_err(data_error)?;
            }
            let corpus = load_corpus(&corpus_file)?;
            write_file(&out, &write_canonical(&synthesize_dataset(&corpus, &config)))?;
        }
        Command::Export {
            corpus_file,
            src_out,
            tgt_out,
        } => {
            let corpus = load_corpus(&corpus_file)?;
            let (src, tgt) = export_parallel(&corpus);
            write_file(&src_out, &src)?;
            write_file(&tgt_out, &tgt)?;
        }
        Command::Evaluate {
            corpus_file,
            hyp,
            pwb,
            report_out,
        } => {
            let mut corpus = load_corpus(&corpus_file)?;
            if let Some(path) = hyp {
                let lines: Vec<String> = read_file(&path)?.lines().map(str::to_string).collect();
                corpus = attach_hypotheses(&corpus, &lines).map_err(data_error)?;
            }
            let report = evaluate(&corpus, pwb).map_err(data_error)?;
            print!("{}", report_table(&report));
            if let Some(path) = report_out {
                write_file(&path, &format!("{}\n", report_json(&report)))?;
            }
        }
        Command::Tokenize { text, no_lowercase } => {
            let text = match text {
                Some(text) => text,
                None => std::io::read_to_string(std::io::stdin())
                    .map_err(|e| CliError::Data(format!("stdin: {e}")))?,
            };
            for token in tokenize_13a(&text, !no_lowercase) {
                println!("{token}");
            }
        }
    }
    Ok(())
}

fn selection_spec(
    strategy: Strategy,
    k: Option<usize>,
    seed: Option<u64>,
) -> Result<SelectionSpec, CliError> {
    let require_k = |name: &str| {
        k.ok_or_else(|| CliError::Usage(format!("--k is required for strategy {name}")))
            .and_then(|k| {
                if k == 0 {
                    Err(CliError::Usage("--k must be at least 1".to_string()))
                } else {
                    Ok(k)
                }
            })
    };
    match strategy {
        Strategy::All => Ok(SelectionSpec::All),
        Strategy::Most => Ok(SelectionSpec::Most { k: require_k("most")? }),
        Strategy::Least => Ok(SelectionSpec::Least { k: require_k("least")? }),
        Strategy::Random => {
            let k = require_k("random")?;
            let master_seed = seed.ok_or_else(|| {
                CliError::Usage("--seed is required for strategy random".to_string())
            })?;
            Ok(SelectionSpec::Random { k, master_seed })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            return match error.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = error.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let rendered = error.to_string();
                    let first = rendered.lines().next().unwrap_or("invalid arguments");
                    let first = first.strip_prefix("error: ").unwrap_or(first);
                    eprintln!("error[usage]: {first}");
                    ExitCode::from(1)
                }
            };
        }
    };
    if let Err(error) = configure_threads().and_then(|()| run(cli.command)) {
        return error.report();
    }
    ExitCode::SUCCESS
}
