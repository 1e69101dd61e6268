use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tapdedup::ingest::{self, DatasetManifest, ExportFormat, LoadOptions, LoadReport};
use tapdedup::merge::MergePolicy;
use tapdedup::pipeline::{run_dedupe, DedupeConfig, PipelineError};
use tapdedup::structure::{screen_candidates, NameFilter};
use tapdedup::tap::{simtap_pairs, write_similarity_csv};
use tapdedup::{IngestError, NetworkBundle, SimilarityError, Time, VertexId};

#[derive(Debug, Parser)]
#[command(
    name = "tapdedup",
    version,
    about = "Find and merge duplicate characters in temporal activity networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate records, write an ingest report and the graph.
    Ingest(Common),
    /// Write every character pair with zero structure error.
    Screen(Common),
    /// Score pairs (screened candidates unless --pair is given).
    Simtap {
        #[command(flatten)]
        common: Common,
        /// `a,b` character ids; repeatable.
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<(VertexId, VertexId)>,
    },
    /// Screen, score, group and merge.
    Dedupe {
        #[command(flatten)]
        common: Common,
        /// Similarity threshold in (0, 1].
        #[arg(long)]
        theta: f64,
    },
    /// Re-export the loaded records in another format.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(ExportFormat))]
        format: ExportFormat,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Reference time; defaults to the manifest's, then to the latest end time.
    #[arg(long, allow_negative_numbers = true)]
    now: Option<Time>,
    #[arg(long, default_value = "off")]
    name_filter: NameFilter,
    /// Fail on the first malformed row.
    #[arg(long)]
    strict: bool,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_pair(s: &str) -> Result<(VertexId, VertexId), String> {
    match s.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a.into(), b.into())),
        _ => Err(format!("expected `a,b`, got `{s}`")),
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

impl From<SimilarityError> for CliError {
    fn from(e: SimilarityError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

struct Loaded {
    bundle: NetworkBundle,
    report: LoadReport,
    now: Time,
    now_source: &'static str,
}

fn load(c: &Common) -> Result<Loaded, CliError> {
    let manifest = c
        .manifest
        .as_deref()
        .map(DatasetManifest::read)
        .transpose()?;
    let (bundle, report) = ingest::load(
        &c.records,
        c.manifest.as_deref(),
        LoadOptions { strict: c.strict },
    )?;
    log::info!(
        "loaded {} of {} records: {} characters, {} entities",
        report.loaded,
        report.records,
        report.characters,
        report.entities
    );
    let (now, now_source) = match (c.now, manifest.and_then(|m| m.now), bundle.max_end()) {
        (Some(n), _, _) => (n, "flag"),
        (None, Some(n), _) => (n, "manifest"),
        (None, None, Some(n)) => (n, "max-end"),
        (None, None, None) => (0, "empty"),
    };
    Ok(Loaded {
        bundle,
        report,
        now,
        now_source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut out = create(&path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(io_err(&path))
}

fn write_csv_with<F>(dir: &Path, name: &str, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), csv::Error>,
{
    let path = dir.join(name);
    let mut out = create(&path)?;
    f(&mut out).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    out.flush().map_err(io_err(&path))
}

fn export(
    dir: &Path,
    name: &str,
    bundle: &NetworkBundle,
    format: ExportFormat,
) -> Result<(), CliError> {
    Ok(ingest::export_to_path(bundle, format, &dir.join(name))?)
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Serialize)]
struct InputFile {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    records: InputFile,
    manifest: Option<InputFile>,
    now: Time,
    now_source: &'static str,
    theta: f64,
    name_filter: NameFilter,
    policy: MergePolicy,
    strict: bool,
}

fn input_file(path: &Path) -> Result<InputFile, CliError> {
    Ok(InputFile {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Ingest(c) | Command::Screen(c) => c,
        Command::Simtap { common, .. }
        | Command::Dedupe { common, .. }
        | Command::Export { common, .. } => common,
    };
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(CliError::Invalid("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    if let Command::Dedupe { theta, .. } = &cli.command {
        // before touching any file
        tapdedup::tap::validate_theta(*theta)?;
    }
    let out = &common.out;
    let loaded = load(common)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let bundle = &loaded.bundle;

    match &cli.command {
        Command::Ingest(_) => {
            write_json(out, "ingest_report.json", &loaded.report)?;
            export(out, "graph.json", bundle, ExportFormat::GraphJson)?;
        }
        Command::Screen(c) => {
            let candidates = screen_candidates(bundle, c.name_filter);
            log::info!("{} candidate pairs", candidates.len());
            write_csv_with(out, "candidates.csv", |w| candidates.write_csv(w))?;
        }
        Command::Simtap { common: c, pairs } => {
            let pairs = if pairs.is_empty() {
                screen_candidates(bundle, c.name_filter)
                    .pairs
                    .into_iter()
                    .map(|p| (p.x, p.y))
                    .collect()
            } else {
                pairs.clone()
            };
            let results = simtap_pairs(bundle, &pairs, loaded.now)?;
            write_csv_with(out, "similarity.csv", |w| {
                write_similarity_csv(&bundle.relation_types(), &results, w)
            })?;
        }
        Command::Dedupe { common: c, theta } => {
            let config = DedupeConfig {
                now: Some(loaded.now),
                theta: *theta,
                name_filter: c.name_filter,
                policy: MergePolicy::SmallestId,
            };
            let outcome = run_dedupe(bundle, &config)?;
            write_csv_with(out, "candidates.csv", |w| outcome.candidates.write_csv(w))?;
            write_csv_with(out, "similarity.csv", |w| {
                write_similarity_csv(&bundle.relation_types(), &outcome.grouping.similarities, w)
            })?;
            write_json(out, "groups.json", outcome.groups())?;
            export(
                out,
                "merged_records.csv",
                &outcome.merged.bundle,
                ExportFormat::RecordsCsv,
            )?;
            export(
                out,
                "merged_graph.json",
                &outcome.merged.bundle,
                ExportFormat::GraphJson,
            )?;
            write_json(out, "merge_audit.json", &outcome.merged.audit)?;
            write_json(
                out,
                "run_manifest.json",
                &RunManifest {
                    tool: "tapdedup",
                    version: env!("CARGO_PKG_VERSION"),
                    command: "dedupe",
                    records: input_file(&c.records)?,
                    manifest: c.manifest.as_deref().map(input_file).transpose()?,
                    now: loaded.now,
                    now_source: loaded.now_source,
                    theta: *theta,
                    name_filter: c.name_filter,
                    policy: config.policy,
                    strict: c.strict,
                },
            )?;
            if !outcome.verification.is_ok() {
                return Err(CliError::Invalid(format!(
                    "merge verification failed with {} violation(s)",
                    outcome.verification.violations.len()
                )));
            }
            log::info!(
                "merged {} group(s), removed {} vertices",
                outcome.groups().groups.len(),
                outcome.merged.audit.removed_vertices
            );
        }
        Command::Export { format, .. } => {
            export(
                out,
                &format!("export.{}", format.extension()),
                bundle,
                *format,
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
