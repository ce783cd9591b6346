//! Command-line front end: `extract`, `snapshot`, `serve`, `fixture`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use augmath::doc::{
    ingest_page_with, load_document, save_document, write_walkthrough_bundle, DocError, IngestConfig, IngestReport,
    PageModel,
};
use augmath::session::{Event, Session, SessionOptions};
use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::service::{AppState, ASSETS_ENV};
use crate::svg::render_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_EVENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "augmath", version, about = "Explorable math documents from OCR'd textbook pages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest an OCR bundle directory into a document.
    Extract {
        bundle: PathBuf,
        out: PathBuf,
        /// Contours shorter than this (pixels) count as text.
        #[arg(long)]
        min_contour_len: Option<f64>,
        /// Grayscale values below this are ink.
        #[arg(long)]
        binarize_threshold: Option<u8>,
    },
    /// Apply an event script to a document and write an SVG of the overlays.
    Snapshot {
        document: PathBuf,
        script: PathBuf,
        out: PathBuf,
        /// Also write the final RenderState JSON here.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Serve sessions over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        doc: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// UI asset directory served at `/`.
        #[arg(long, env = ASSETS_ENV)]
        assets: Option<PathBuf>,
    },
    /// Write the walkthrough OCR bundle into a directory.
    Fixture { dir: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Document(#[from] DocError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("event script: {0}")]
    Script(String),
    #[error("event {index}: {message}")]
    Event { index: usize, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Document(DocError::Schema { .. } | DocError::VersionMismatch { .. }) => EXIT_SCHEMA,
            CliError::Script(_) => EXIT_SCHEMA,
            CliError::Event { .. } => EXIT_EVENT,
            CliError::Document(DocError::ImageUnreadable(_)) | CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Runs a command, printing reports to `out` and diagnostics to `err`;
/// returns the process exit code.
pub fn run(cli: Cli, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let result = match cli.command {
        Command::Extract { bundle, out: dest, min_contour_len, binarize_threshold } => {
            let mut cfg = IngestConfig::default();
            if let Some(v) = min_contour_len {
                cfg.figure.min_contour_len = v;
            }
            if let Some(v) = binarize_threshold {
                cfg.figure.binarize_threshold = v;
            }
            extract(&bundle, &dest, &cfg).map(|report| print_report(out, &report))
        }
        Command::Snapshot { document, script, out: dest, state } => snapshot(&document, &script, &dest, state.as_deref()),
        Command::Serve { port, doc, host, assets } => serve(&doc, std::net::SocketAddr::new(host, port), assets),
        Command::Fixture { dir } => write_walkthrough_bundle(&dir).map_err(io(&dir)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Ingests `bundle`, writes the document to `dest` and copies the page image
/// next to it.
pub fn extract(bundle: &Path, dest: &Path, cfg: &IngestConfig) -> Result<IngestReport, CliError> {
    let (doc, report) = ingest_page_with(bundle, cfg)?;
    let dir = parent(dest);
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;
    std::fs::write(dest, save_document(&doc)).map_err(io(dest))?;
    let (from, to) = (bundle.join(&doc.image), dir.join(&doc.image));
    let same = from.canonicalize().ok().zip(to.canonicalize().ok()).is_some_and(|(a, b)| a == b);
    if !same {
        std::fs::copy(&from, &to).map_err(io(&to))?;
    }
    Ok(report)
}

fn parent(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

pub fn print_report(out: &mut impl Write, report: &IngestReport) {
    for f in &report.formulas {
        let status = match (&f.error, f.boxed) {
            (Some(e), _) => format!("display-only ({e})"),
            (None, true) => format!("parsed, boxed (score {:.2})", f.score),
            (None, false) => "parsed, unmatched (no box; display-only on the page)".to_string(),
        };
        let _ = writeln!(out, "formula {}: {status}", f.id);
    }
    if report.no_axis_found {
        let _ = writeln!(out, "figures: NoAxisFound");
    }
    for g in &report.figures {
        let path = if g.has_path { format!("path found ({} secondary)", g.secondary_paths) } else { "NoPath".into() };
        let cal = if g.calibrated { "calibrated" } else { "uncalibrated" };
        let _ = writeln!(out, "figure {}: axes found, {path}, {cal}", g.id);
    }
    let _ = writeln!(out, "figure contours: {}", report.figure_contours);
    let _ = writeln!(out, "unmatched boxes: {}", report.unmatched_boxes);
}

pub fn read_document(path: &Path) -> Result<PageModel, CliError> {
    let bytes = std::fs::read(path).map_err(io(path))?;
    Ok(load_document(&bytes)?)
}

/// Decodes a JSON array of events; a bad element reports its index.
pub fn parse_script(bytes: &[u8]) -> Result<Vec<Event>, CliError> {
    let items: Vec<serde_json::Value> =
        serde_json::from_slice(bytes).map_err(|e| CliError::Script(format!("not a JSON array of events: {e}")))?;
    items
        .into_iter()
        .enumerate()
        .map(|(index, v)| {
            serde_json::from_value(v).map_err(|e| CliError::Event { index, message: e.to_string() })
        })
        .collect()
}

/// Replays a script offline; the final session, or the failing index.
pub fn run_script(doc: PageModel, events: &[Event]) -> Result<Session, CliError> {
    Session::replay(Arc::new(doc), SessionOptions::default(), events)
        .map_err(|(index, e)| CliError::Event { index, message: e.to_string() })
}

pub fn snapshot(document: &Path, script: &Path, dest: &Path, state: Option<&Path>) -> Result<(), CliError> {
    let doc = read_document(document)?;
    let events = parse_script(&std::fs::read(script).map_err(io(script))?)?;
    let session = run_script(doc, &events)?;
    std::fs::write(dest, render_svg(&session.render_state())).map_err(io(dest))?;
    if let Some(path) = state {
        std::fs::write(path, session.state_json()).map_err(io(path))?;
    }
    Ok(())
}

fn serve(doc_path: &Path, addr: std::net::SocketAddr, assets: Option<PathBuf>) -> Result<(), CliError> {
    let doc = read_document(doc_path)?;
    let app = Arc::new(AppState::new(doc, parent(doc_path), assets));
    let runtime = tokio::runtime::Runtime::new().map_err(io(doc_path))?;
    runtime.block_on(crate::service::serve(app, addr)).map_err(|source| CliError::Io { path: doc_path.into(), source })
}
