//! Config-driven runs: corpus ingestion, index building, dataset evaluation
//! into an output directory with a manifest, and reporting over finished runs.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::benchmark::{load_dataset, Dataset, DatasetError, ValidationProfile};
use crate::digest::{json_digest, sha256_hex};
use crate::eval::{
    breakdown, compare_methods, correlations, emit_report, metrics, render_metrics_json, run_evaluation, BreakdownKey,
    ComparisonReport, EvalError, EvalResult, EvalSetup, MetricsBlock, Report, ReportFormat, RunMode,
};
use crate::gateway::{BackendConfig, Gateway, GatewayError, SamplingParams};
use crate::knowledge::{
    build_index, chunk_corpus, open_index, persist_index, read_chunks, read_corpus, write_chunks, ChunkingConfig,
    DefaultTokenizer, IndexError, VectorIndex,
};
use crate::pipeline::{PipelineConfig, Templates};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const RUN_MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("backend: {0}")]
    Backend(#[from] GatewayError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Backend(_) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Data(_) => "data",
            RunError::Backend(_) => "backend",
            RunError::Io { .. } => "io",
        }
    }
}

impl From<IndexError> for RunError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::Embedding(g) => RunError::Backend(g),
            other => RunError::Data(other.to_string()),
        }
    }
}

impl From<DatasetError> for RunError {
    fn from(e: DatasetError) -> Self {
        RunError::Data(e.to_string())
    }
}

impl From<EvalError> for RunError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Config(m) => RunError::Config(m),
            other => RunError::Data(other.to_string()),
        }
    }
}

fn io(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> RunError {
    let context = context.to_string();
    move |source| RunError::Io { context, source }
}

/// Everything that determines a run besides the dataset, index and mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub backend: BackendConfig,
    pub chat_model: String,
    pub sampling: SamplingParams,
    pub chunking: ChunkingConfig,
    pub pipeline: PipelineConfig,
    pub rag_top_k: usize,
    /// Validation applied when loading the dataset for a run.
    pub dataset_profile: ValidationProfile,
    pub index_path: Option<PathBuf>,
    /// Directory of template overrides.
    pub templates_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: BackendConfig::default(),
            chat_model: "mock-chat".into(),
            sampling: SamplingParams::default(),
            chunking: ChunkingConfig::default(),
            pipeline: PipelineConfig::default(),
            rag_top_k: crate::eval::DEFAULT_RAG_TOP_K,
            dataset_profile: ValidationProfile::Generic,
            index_path: None,
            templates_dir: None,
        }
    }
}

/// A parsed config plus the digest of its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub digest: String,
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    /// Parses a JSON config. Relative paths inside it are taken relative to
    /// the file's directory; the API key comes only from the environment.
    pub fn load(path: &Path) -> Result<LoadedConfig, RunError> {
        let text = std::fs::read_to_string(path).map_err(io(format!("reading config {}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base: &Path) -> Result<LoadedConfig, RunError> {
        let raw: Value = serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        if raw.pointer("/backend/api_key").is_some() {
            return Err(RunError::Config(
                "backend.api_key is not accepted in config files; set the variable named by backend.api_key_env".into(),
            ));
        }
        let mut config: RunConfig = serde_json::from_value(raw.clone()).map_err(|e| RunError::Config(e.to_string()))?;
        resolve(base, &mut config.backend.mock_script);
        resolve(base, &mut config.backend.transcript_path);
        resolve(base, &mut config.index_path);
        resolve(base, &mut config.templates_dir);
        config.validate()?;
        config.backend.load_api_key_from_env();
        Ok(LoadedConfig { config, digest: json_digest(&raw) })
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.backend.validate().map_err(RunError::Config)?;
        self.sampling.validate().map_err(RunError::Config)?;
        self.chunking.validate().map_err(|e| RunError::Config(e.to_string()))?;
        self.pipeline.validate().map_err(RunError::Config)?;
        if self.rag_top_k == 0 {
            return Err(RunError::Config("rag_top_k must be at least 1".into()));
        }
        if self.chat_model.is_empty() {
            return Err(RunError::Config("chat_model must be set".into()));
        }
        Ok(())
    }

    pub fn templates(&self) -> Result<Templates, RunError> {
        match &self.templates_dir {
            Some(dir) => Templates::load_dir(dir).map_err(|e| RunError::Config(e.to_string())),
            None => Ok(Templates::default()),
        }
    }
}

/// Reads every document under `corpus_dir`, chunks it and writes JSON-lines chunks.
pub fn ingest(corpus_dir: &Path, out: &Path, chunking: &ChunkingConfig) -> Result<usize, RunError> {
    let docs = read_corpus(corpus_dir)?;
    let chunks = chunk_corpus(&docs, chunking, &DefaultTokenizer)?;
    let file = std::fs::File::create(out).map_err(io(format!("creating {}", out.display())))?;
    let mut w = BufWriter::new(file);
    write_chunks(&chunks, &mut w).map_err(io(format!("writing {}", out.display())))?;
    w.flush().map_err(io(format!("writing {}", out.display())))?;
    Ok(chunks.len())
}

/// Embeds a chunk file and persists the index.
pub fn index_chunks(chunks_path: &Path, out: &Path, backend: BackendConfig) -> Result<VectorIndex, RunError> {
    let file = std::fs::File::open(chunks_path).map_err(io(format!("opening {}", chunks_path.display())))?;
    let chunks = read_chunks(BufReader::new(file))?;
    let gateway = Gateway::new(backend)?;
    let index = build_index(chunks, &gateway)?;
    persist_index(&index, out)?;
    Ok(index)
}

/// Provenance of one run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub mode: RunMode,
    pub config_digest: String,
    pub dataset_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_digest: Option<String>,
    pub dataset_path: PathBuf,
    pub dataset_name: String,
    pub chat_model: String,
    pub n_questions: usize,
    pub output_dir: PathBuf,
}

/// Short identifier derived from everything that determines a run.
pub fn run_id(config_digest: &str, dataset_digest: &str, index_digest: Option<&str>, mode: RunMode) -> String {
    let key = format!("{config_digest}\n{dataset_digest}\n{}\n{}", index_digest.unwrap_or("-"), json_digest(&mode));
    sha256_hex(&key)[..12].to_string()
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub dataset: PathBuf,
    pub mode: RunMode,
    pub config: PathBuf,
    pub out: PathBuf,
    pub parallelism: usize,
    /// Overrides `index_path` from the config.
    pub index: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: RunManifest,
    pub results: Vec<EvalResult>,
    pub report: Report,
}

fn file_digest(path: &Path) -> Result<String, RunError> {
    let bytes = std::fs::read(path).map_err(io(format!("reading {}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// Metrics, every breakdown the dataset has labels for, and complexity correlations.
pub fn build_report(label: &str, results: &[EvalResult], dataset: &Dataset) -> Result<Report, RunError> {
    let mut report = Report {
        metrics: vec![MetricsBlock { label: label.to_string(), metrics: metrics(results)? }],
        ..Report::default()
    };
    for key in BreakdownKey::ALL {
        match breakdown(results, dataset, key) {
            Ok(t) => report.breakdowns.push(t),
            Err(EvalError::NoLabeledQuestions) => {}
            Err(e) => return Err(e.into()),
        }
    }
    report.correlations = correlations(dataset).ok();
    Ok(report)
}

/// Evaluates a dataset and writes `manifest.json`, `results.jsonl`,
/// `metrics.json` and (agentic) `workspaces/` into an empty output directory.
pub fn execute_run(opts: &RunOptions) -> Result<RunSummary, RunError> {
    let loaded = RunConfig::load(&opts.config)?;
    let mut config = loaded.config;
    let mode = match opts.mode {
        RunMode::Rag { .. } => RunMode::Rag { top_k: config.rag_top_k },
        m => m,
    };
    if opts.out.exists() && std::fs::read_dir(&opts.out).map_err(io(opts.out.display()))?.next().is_some() {
        return Err(RunError::Data(format!("output directory {} is not empty", opts.out.display())));
    }
    std::fs::create_dir_all(&opts.out).map_err(io(format!("creating {}", opts.out.display())))?;

    let dataset = load_dataset(&opts.dataset, config.dataset_profile)?;
    let dataset_digest = file_digest(&opts.dataset)?;
    let index_path = opts.index.clone().or_else(|| config.index_path.clone());
    let (index, index_digest) = match (mode, &index_path) {
        (RunMode::Base, _) => (None, None),
        (_, None) => return Err(RunError::Config(format!("{mode} mode needs an index (index_path or --index)"))),
        (_, Some(p)) => (Some(open_index(p)?), Some(file_digest(p)?)),
    };
    let id = run_id(&loaded.digest, &dataset_digest, index_digest.as_deref(), mode);

    if config.backend.transcript_path.is_none() {
        config.backend.transcript_path = Some(opts.out.join("transcript.jsonl"));
    }
    let gateway = Gateway::new(config.backend.clone())?;
    let templates = config.templates()?;
    let workspaces = opts.out.join("workspaces");
    let setup = EvalSetup {
        gateway: &gateway,
        model_id: &config.chat_model,
        sampling: config.sampling,
        templates: &templates,
        pipeline: &config.pipeline,
        index: index.as_ref(),
        workspace_base: Some(&workspaces),
        run_id: &id,
    };
    let results = run_evaluation(&dataset, mode, &setup, opts.parallelism)?;

    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        run_id: id,
        mode,
        config_digest: loaded.digest,
        dataset_digest,
        index_digest,
        dataset_path: std::fs::canonicalize(&opts.dataset).unwrap_or_else(|_| opts.dataset.clone()),
        dataset_name: dataset.name.clone(),
        chat_model: config.chat_model.clone(),
        n_questions: dataset.len(),
        output_dir: opts.out.clone(),
    };
    write_results(&opts.out.join(RESULTS_FILE), &results)?;
    let report = build_report(mode.name(), &results, &dataset)?;
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(opts.out.join(RUN_MANIFEST_FILE), text).map_err(io("writing manifest"))?;
    std::fs::write(opts.out.join("metrics.json"), render_metrics_json(&report)).map_err(io("writing metrics"))?;
    Ok(RunSummary { manifest, results, report })
}

fn write_results(path: &Path, results: &[EvalResult]) -> Result<(), RunError> {
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(io(format!("creating {}", path.display())))?);
    for r in results {
        serde_json::to_writer(&mut w, r).map_err(|e| RunError::Data(e.to_string()))?;
        w.write_all(b"\n").map_err(io("writing results"))?;
    }
    w.flush().map_err(io("writing results"))
}

pub fn read_results(path: &Path) -> Result<Vec<EvalResult>, RunError> {
    let file = std::fs::File::open(path).map_err(io(format!("opening {}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io(format!("reading {}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| RunError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?);
    }
    Ok(out)
}

pub fn read_manifest(run_dir: &Path) -> Result<RunManifest, RunError> {
    let path = run_dir.join(RUN_MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(io(format!("reading {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RunError::Data(format!("{}: {e}", path.display())))
}

/// Re-renders the report of a finished run into its directory.
pub fn report_run(run_dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>, RunError> {
    let manifest = read_manifest(run_dir)?;
    let results = read_results(&run_dir.join(RESULTS_FILE))?;
    let dataset = load_dataset(&manifest.dataset_path, ValidationProfile::Generic)?;
    if file_digest(&manifest.dataset_path)? != manifest.dataset_digest {
        return Err(RunError::Data(format!("dataset {} changed since the run", manifest.dataset_path.display())));
    }
    let report = build_report(manifest.mode.name(), &results, &dataset)?;
    emit_report(&report, format, run_dir).map_err(RunError::from)
}

/// Fisher comparison of two finished runs.
pub fn compare_runs(a: &Path, b: &Path) -> Result<ComparisonReport, RunError> {
    let label = |dir: &Path| -> Result<String, RunError> {
        let m = read_manifest(dir)?;
        Ok(format!("{} ({})", m.mode, m.run_id))
    };
    let ra = read_results(&a.join(RESULTS_FILE))?;
    let rb = read_results(&b.join(RESULTS_FILE))?;
    Ok(compare_methods(&label(a)?, &ra, &label(b)?, &rb)?)
}
