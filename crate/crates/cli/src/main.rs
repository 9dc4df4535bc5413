//! `epitrack`: ingest snapshots, serve the API, export series, validate
//! source files.
//!
//! Exit codes: 0 success, 1 domain failure, 2 environment failure,
//! 64 usage error. Reports go to stdout as JSON lines; logs go to stderr.

use std::collections::BTreeMap;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use epitrack_core::canonical::{parse_canonical_csv_lenient, LineError};
use epitrack_core::ingest::{self, fetch_source, normalize_rows, parse_dxy_json, SourceDescriptor, SourceKind};
use epitrack_core::metrics::{derive_series, effective_series, Metric};
use epitrack_core::{Error, RegionId, Store, Tables};
use serde_json::json;

const EXIT_DOMAIN: u8 = 1;
const EXIT_ENVIRONMENT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "epitrack", version, about = "Epidemic case-count tracking platform")]
struct Cli {
    /// Directory holding the version log and optional table overrides.
    #[arg(long, env = "EPITRACK_DATA_DIR", default_value = "epitrack-data", global = true)]
    data_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fetch sources, merge them into the store and publish a new version.
    Ingest {
        /// `kind=location`, kind one of canonical_csv, dxy_json; location a
        /// path or http(s) URL. Repeatable.
        #[arg(long = "source", required = true)]
        sources: Vec<SourceDescriptor>,
    },
    /// Serve the HTTP API until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Static dashboard assets served at `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
    /// Print one region's derived series.
    Export {
        /// Region path, e.g. `IT`, `CN/Hubei` or `CN/Hubei/Wuhan`.
        #[arg(long)]
        region: String,
        /// Metric column(s); all metrics when omitted. Repeatable or
        /// comma-separated.
        #[arg(long = "metric", value_delimiter = ',')]
        metrics: Vec<Metric>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        from: Option<NaiveDate>,
        #[arg(long)]
        to: Option<NaiveDate>,
    },
    /// Parse and normalize sources without publishing anything.
    Validate {
        #[arg(long = "source", required = true)]
        sources: Vec<SourceDescriptor>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }

    fn environment(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_ENVIRONMENT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_)
            | Error::Persist(_)
            | Error::Table { .. }
            | Error::TransientFetch { .. }
            | Error::Source { .. }
            | Error::AllSourcesFailed(_) => Failure::environment(e.to_string()),
            _ => Failure::domain(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();

    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(EXIT_ENVIRONMENT);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

async fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest { sources } => cmd_ingest(&cli.data_dir, &sources).await,
        Command::Serve { listen, assets } => cmd_serve(&cli.data_dir, listen, assets).await,
        Command::Export {
            region,
            metrics,
            format: Format::Csv,
            from,
            to,
        } => cmd_export(&cli.data_dir, &region, &metrics, from, to),
        Command::Validate { sources } => cmd_validate(&cli.data_dir, &sources).await,
    }
}

fn print_line(value: &serde_json::Value) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{value}")
        .and_then(|_| out.flush())
        .map_err(|e| Failure::environment(format!("cannot write to stdout: {e}")))
}

fn open_store(data_dir: &Path, create: bool) -> Result<Store, Failure> {
    if create {
        std::fs::create_dir_all(data_dir)
            .map_err(|e| Failure::environment(format!("cannot create {}: {e}", data_dir.display())))?;
    } else if !data_dir.is_dir() {
        return Err(Failure::environment(format!(
            "data directory {} does not exist",
            data_dir.display()
        )));
    }
    let tables = Tables::load(data_dir)?;
    Ok(Store::open(data_dir, tables)?)
}

async fn cmd_ingest(data_dir: &Path, sources: &[SourceDescriptor]) -> Result<(), Failure> {
    let store = open_store(data_dir, true)?;
    let (version, report) = ingest::ingest_snapshot(&store, sources).await?;
    tracing::info!(
        version = version.version_id(),
        changes = report.value_changes,
        quarantined = report.rows_quarantined,
        "published"
    );
    print_line(&serde_json::to_value(&report).expect("report serializes"))
}

async fn cmd_serve(data_dir: &Path, listen: SocketAddr, assets: Option<PathBuf>) -> Result<(), Failure> {
    let store = Arc::new(open_store(data_dir, true)?);
    let listener = tokio::net::TcpListener::bind(listen)
        .await
        .map_err(|e| Failure::environment(format!("cannot listen on {listen}: {e}")))?;
    let addr = listener
        .local_addr()
        .map_err(|e| Failure::environment(e.to_string()))?;
    let version = store.current().version_id();
    tracing::info!(%addr, version, "serving");
    print_line(&json!({ "listening": addr.to_string(), "version_id": version }))?;
    let app = epitrack_api::router(store, assets);
    epitrack_api::serve(listener, app, epitrack_api::shutdown_signal())
        .await
        .map_err(|e| Failure::environment(format!("server error: {e}")))?;
    tracing::info!("stopped");
    Ok(())
}

fn cmd_export(
    data_dir: &Path,
    region: &str,
    metrics: &[Metric],
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
) -> Result<(), Failure> {
    let store = open_store(data_dir, false)?;
    let version = store.current();
    let id: RegionId = region
        .parse()
        .map_err(|e: Error| Failure::domain(format!("bad region {region:?}: {e}")))?;
    let meta = version.meta(&id)?;
    let metrics = if metrics.is_empty() { Metric::ALL.to_vec() } else { metrics.to_vec() };
    let points = match effective_series(&version, &id) {
        Ok(series) => derive_series(&series, meta)?,
        Err(Error::NotFound(_)) => Vec::new(),
        Err(e) => return Err(e.into()),
    };

    let mut out = String::from("date");
    for m in &metrics {
        out.push(',');
        out.push_str(m.as_str());
    }
    out.push('\n');
    for p in points
        .iter()
        .filter(|p| from.is_none_or(|f| p.date >= f) && to.is_none_or(|t| p.date <= t))
    {
        out.push_str(&p.date.to_string());
        for m in &metrics {
            out.push(',');
            if let Some(v) = m.extract(p) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    std::io::stdout()
        .write_all(out.as_bytes())
        .map_err(|e| Failure::environment(format!("cannot write to stdout: {e}")))
}

/// Whole-document failures are reported like line errors; line 0 when the
/// failure has no line.
fn document_error(e: Error) -> LineError {
    match e {
        Error::Parse { line, message } => LineError { line, message },
        other => LineError {
            line: 0,
            message: other.to_string(),
        },
    }
}

async fn cmd_validate(data_dir: &Path, sources: &[SourceDescriptor]) -> Result<(), Failure> {
    let tables = if data_dir.is_dir() { Tables::load(data_dir)? } else { Tables::bundled() };
    let mut failed = false;
    for desc in sources {
        let bytes = fetch_source(&desc.location).await?;
        let (rows, errors, skipped): (_, Vec<LineError>, usize) = match desc.kind {
            SourceKind::CanonicalCsv => match parse_canonical_csv_lenient(&bytes) {
                Ok((rows, errors)) => (rows, errors, 0),
                Err(e) => (Vec::new(), vec![document_error(e)], 0),
            },
            SourceKind::DxyJson => match parse_dxy_json(&bytes) {
                Ok(p) => (p.rows, Vec::new(), p.skipped),
                Err(e) => (Vec::new(), vec![document_error(e)], 0),
            },
        };
        let (observations, quarantined): (_, BTreeMap<String, usize>) = normalize_rows(&rows, &tables);
        failed |= !errors.is_empty();
        print_line(&json!({
            "kind": desc.kind,
            "location": desc.location,
            "ok": errors.is_empty(),
            "rows_parsed": rows.len() + skipped,
            "rows_attributed": observations.len(),
            "rows_skipped": skipped,
            "rows_quarantined": quarantined.values().sum::<usize>(),
            "quarantined_names": quarantined,
            "errors": errors.iter().map(|e| json!({ "line": e.line, "message": e.message })).collect::<Vec<_>>(),
        }))?;
    }
    if failed {
        Err(Failure::domain("validation found parse errors"))
    } else {
        Ok(())
    }
}
