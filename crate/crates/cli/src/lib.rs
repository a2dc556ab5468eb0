//! Command-line front end: argument parsing and dispatch onto the runner.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use neuroqa::benchmark::{load_dataset, ValidationProfile};
use neuroqa::eval::{ReportFormat, RunMode};
use neuroqa::gateway::BackendConfig;
use neuroqa::knowledge::ChunkingConfig;
use neuroqa::runner::{compare_runs, execute_run, index_chunks, ingest, report_run, RunConfig, RunError, RunOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Parser)]
#[command(name = "neuroqa", version, about = "Multiple-choice clinical QA pipeline and evaluation harness")]
pub struct Cli {
    /// Report failures as a JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Chunk a corpus directory into a JSON-lines chunk file.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Config file supplying chunking parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Embed a chunk file and write a vector index.
    Index {
        #[arg(long)]
        chunks: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Config file supplying the embedding backend.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate a dataset in one mode.
    Run(RunArgs),
    /// Re-render the report of a finished run.
    Report {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
    },
    /// Fisher's exact test between two finished runs.
    Compare {
        #[arg(long)]
        run_a: PathBuf,
        #[arg(long)]
        run_b: PathBuf,
    },
    /// Load a dataset and check every question.
    ValidateData {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        profile: ProfileArg,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub parallelism: u32,
    /// Index file; overrides `index_path` in the config.
    #[arg(long)]
    pub index: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Base,
    Rag,
    Agentic,
}

impl From<ModeArg> for RunMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Base => RunMode::Base,
            // The runner substitutes the configured top-k.
            ModeArg::Rag => RunMode::Rag { top_k: neuroqa::eval::DEFAULT_RAG_TOP_K },
            ModeArg::Agentic => RunMode::Agentic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Markdown,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Markdown => ReportFormat::Markdown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Board,
    Generic,
}

impl From<ProfileArg> for ValidationProfile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Board => ValidationProfile::Board,
            ProfileArg::Generic => ValidationProfile::Generic,
        }
    }
}

/// Parses argv (including the program name).
pub fn dispatch<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

fn config_or_default(path: Option<&PathBuf>) -> Result<RunConfig, RunError> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?.config),
        None => Ok(RunConfig::default()),
    }
}

/// Runs a parsed command, returning what to print on stdout.
pub fn execute(command: &Command) -> Result<String, RunError> {
    match command {
        Command::Ingest { corpus, out, config } => {
            let chunking: ChunkingConfig = config_or_default(config.as_ref())?.chunking;
            let n = ingest(corpus, out, &chunking)?;
            Ok(format!("wrote {n} chunks to {}", out.display()))
        }
        Command::Index { chunks, out, config } => {
            let backend: BackendConfig = config_or_default(config.as_ref())?.backend;
            let index = index_chunks(chunks, out, backend)?;
            Ok(format!(
                "indexed {} chunks (dimension {}, corpus digest {}) into {}",
                index.len(),
                index.dimension(),
                index.digest(),
                out.display()
            ))
        }
        Command::Run(args) => {
            let summary = execute_run(&RunOptions {
                dataset: args.dataset.clone(),
                mode: args.mode.into(),
                config: args.config.clone(),
                out: args.out.clone(),
                parallelism: args.parallelism as usize,
                index: args.index.clone(),
            })?;
            let m = &summary.report.metrics[0].metrics;
            Ok(format!(
                "run {} ({}): {}/{} correct, accuracy {:.4}, F1 {:.4}, {} threshold; output in {}",
                summary.manifest.run_id,
                summary.manifest.mode,
                m.n_correct,
                m.n,
                m.accuracy,
                m.f1,
                if m.passes_threshold { "passes" } else { "below" },
                args.out.display()
            ))
        }
        Command::Report { run, format } => {
            let written = report_run(run, (*format).into())?;
            Ok(written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join("\n"))
        }
        Command::Compare { run_a, run_b } => {
            let report = compare_runs(run_a, run_b)?;
            Ok(serde_json::to_string_pretty(&report).expect("comparison serializes"))
        },
        Command::ValidateData { dataset, profile } => {
            let ds = load_dataset(dataset, (*profile).into())?;
            Ok(format!("{}: {} questions valid", ds.name, ds.questions.len()))
        }
    }
}

fn error_json(kind: &str, message: &str, exit_code: i32) -> String {
    serde_json::json!({ "error": kind, "message": message, "exit_code": exit_code }).to_string()
}

/// Full command-line behaviour with injectable streams; returns the exit status.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let json_errors = argv.iter().any(|a| a == "--json-errors");
    let cli = match dispatch(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            if json_errors {
                let _ = writeln!(stderr, "{}", error_json("usage", e.to_string().trim_end(), EXIT_USAGE));
            } else {
                let _ = write!(stderr, "{}", e.render());
            }
            return EXIT_USAGE;
        }
    };
    match execute(&cli.command) {
        Ok(text) => {
            let _ = writeln!(stdout, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let code = e.exit_code();
            if cli.json_errors {
                let _ = writeln!(stderr, "{}", error_json(e.kind(), &e.to_string(), code));
            } else {
                let _ = writeln!(stderr, "error: {e}");
            }
            code
        }
    }
}
