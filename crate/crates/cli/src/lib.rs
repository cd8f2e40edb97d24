//! The `municlust` command line: batch runs, validation, exports and the
//! HTTP session service.

pub mod server;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use municlust::analysis::ClusterInput;
use municlust::cluster::{LinkageKind, Strategy};
use municlust::fixture::{Fixture, DEFAULT_SEED};
use municlust::ingest::{write_csv, write_json, Format};
use municlust::pipeline::{load_dataset, run_pipeline, PipelineConfig, PipelineError};
use municlust::report::{Scale, SuitabilityMatrix};
use municlust::session::SessionStore;
use municlust::taxonomy::CutRequest;

pub const SESSION_DIR_ENV: &str = "MUNICLUST_SESSION_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "municlust",
    version,
    about = "Segment territorial entities into policy categories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the batch pipeline and write the artifact set.
    Run(RunArgs),
    /// Parse and validate a dataset, printing diagnostics.
    Validate(InputArgs),
    /// Serve the HTTP session API.
    Serve(ServeArgs),
    /// Write reference files or a session's artifacts.
    #[command(subcommand)]
    Export(ExportCommand),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset file (CSV or JSON).
    pub input: Option<PathBuf>,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<Format>,
    /// Attribute schema JSON; the 15-attribute default when omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Cells use a decimal comma and fields are separated by `;`.
    #[arg(long)]
    pub decimal_comma: bool,
    /// Replace empty cells with the attribute mean.
    #[arg(long)]
    pub impute_missing: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Pipeline configuration JSON. Flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub output_dir: Option<PathBuf>,
    /// single, complete, average, ward, centroid or median.
    #[arg(long)]
    pub linkage: Option<LinkageKind>,
    /// auto, nn-chain or naive.
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// Cluster on the normalized matrix (default) or raw values.
    #[arg(long, value_parser = ["normalized", "raw"])]
    pub cluster_on: Option<String>,
    /// Cut into this many groups.
    #[arg(long, conflicts_with = "height")]
    pub k: Option<usize>,
    /// Cut at this merge height.
    #[arg(long)]
    pub height: Option<f64>,
    /// Comma-separated indicator weights summing to 1.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// JSON object mapping group ids to labels.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// CSV with columns id,population.
    #[arg(long)]
    pub populations: Option<PathBuf>,
    /// Compute label means on normalized values instead of raw.
    #[arg(long)]
    pub normalized_means: bool,
    /// Also write radial.svg and boxplot.svg.
    #[arg(long)]
    pub extra_charts: bool,
    /// Entity ids to mark on the NL2 scatter.
    #[arg(long, value_delimiter = ',')]
    pub highlight: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[arg(long, env = SESSION_DIR_ENV, default_value = "sessions")]
    pub session_dir: PathBuf,
    /// Directory of static explorer assets served at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExportCommand {
    /// The synthetic 366-entity fixture with its populations.
    Fixture {
        #[arg(long, short = 'o')]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Also write `id,population` to this file.
        #[arg(long)]
        populations: Option<PathBuf>,
    },
    /// The shipped policy suitability matrix.
    Suitability {
        #[arg(long, short = 'o')]
        out: PathBuf,
    },
    /// Every artifact of a stored session's current state.
    Session {
        id: String,
        #[arg(long, env = SESSION_DIR_ENV, default_value = "sessions")]
        session_dir: PathBuf,
        #[arg(long, short = 'o')]
        out: PathBuf,
    },
}

impl RunArgs {
    pub fn to_config(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    PipelineError::Config(format!("cannot read config file {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| PipelineError::Config(format!("config {}: {e}", p.display())))?
            }
            None => PipelineConfig::default(),
        };
        let i = &self.input;
        if let Some(p) = &i.input {
            cfg.input = p.clone();
        }
        if cfg.input.as_os_str().is_empty() {
            return Err(PipelineError::Config("no input file given".into()));
        }
        if i.format.is_some() {
            cfg.format = i.format;
        }
        if i.schema.is_some() {
            cfg.schema = i.schema.clone();
        }
        cfg.decimal_comma |= i.decimal_comma;
        cfg.impute_missing |= i.impute_missing;
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(l) = self.linkage {
            cfg.linkage = l;
        }
        if let Some(s) = self.strategy {
            cfg.strategy = s;
        }
        match self.cluster_on.as_deref() {
            Some("raw") => cfg.cluster_on = ClusterInput::Raw,
            Some(_) => cfg.cluster_on = ClusterInput::Normalized,
            None => {}
        }
        if let Some(k) = self.k {
            cfg.cut = CutRequest::ByCount(k);
        }
        if let Some(h) = self.height {
            cfg.cut = CutRequest::ByHeight(h);
        }
        if self.weights.is_some() {
            cfg.weights = self.weights.clone();
        }
        if self.mapping.is_some() {
            cfg.mapping = self.mapping.clone();
        }
        if self.populations.is_some() {
            cfg.populations = self.populations.clone();
        }
        if self.normalized_means {
            cfg.means_scale = Scale::Normalized;
        }
        cfg.extra_charts |= self.extra_charts;
        if let Some(h) = &self.highlight {
            cfg.highlight = h.clone();
        }
        Ok(cfg)
    }
}

fn config_err(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Config(e.to_string())
}

fn write_file(path: &std::path::Path, body: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| config_err(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, body).map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
}

fn run(args: &RunArgs) -> Result<(), PipelineError> {
    let cfg = args.to_config()?;
    let summary = run_pipeline(&cfg)?;
    let mut err = std::io::stderr().lock();
    for d in &summary.diagnostics {
        let _ = writeln!(err, "warning: {d}");
    }
    let _ = writeln!(
        err,
        "{} groups; wrote {} files to {}",
        summary.group_count,
        summary.artifacts.len(),
        cfg.output_dir.display()
    );
    Ok(())
}

fn validate(args: &InputArgs) -> Result<(), PipelineError> {
    let cfg = RunArgs {
        input: InputArgs {
            input: args.input.clone(),
            format: args.format,
            schema: args.schema.clone(),
            decimal_comma: args.decimal_comma,
            impute_missing: args.impute_missing,
        },
        config: None,
        output_dir: None,
        linkage: None,
        strategy: None,
        cluster_on: None,
        k: None,
        height: None,
        weights: None,
        mapping: None,
        populations: None,
        normalized_means: false,
        extra_charts: false,
        highlight: None,
    }
    .to_config()?;
    let (d, diags) = load_dataset(&cfg.load_inputs()?)?;
    for x in &diags {
        eprintln!("warning: {x}");
    }
    println!(
        "{}: {} entities, {} attributes, {} diagnostics",
        cfg.input.display(),
        d.len(),
        d.schema.len(),
        diags.len()
    );
    Ok(())
}

fn export(cmd: &ExportCommand) -> Result<(), PipelineError> {
    match cmd {
        ExportCommand::Fixture {
            out,
            seed,
            format,
            populations,
        } => {
            let f = Fixture::generate(*seed);
            let mut buf = Vec::new();
            match format {
                Format::Csv => write_csv(&f.dataset, &mut buf),
                Format::Json => write_json(&f.dataset, &mut buf),
            }
            .map_err(|e| PipelineError::Compute(e.to_string()))?;
            write_file(out, &buf)?;
            if let Some(p) = populations {
                let mut body = String::from("id,population\n");
                for (id, pop) in f.dataset.ids().iter().zip(&f.populations) {
                    body.push_str(&format!("{id},{pop}\n"));
                }
                write_file(p, body.as_bytes())?;
            }
            Ok(())
        }
        ExportCommand::Suitability { out } => {
            let m = SuitabilityMatrix::shipped();
            let body = serde_json::to_string_pretty(&m).map_err(config_err)? + "\n";
            write_file(out, body.as_bytes())
        }
        ExportCommand::Session {
            id,
            session_dir,
            out,
        } => {
            let store = SessionStore::open(session_dir).map_err(config_err)?;
            let s = store.get(id).map_err(config_err)?;
            s.verify().map_err(|e| PipelineError::Data(e.to_string()))?;
            for (name, body) in server::session_artifacts(&s).map_err(PipelineError::Compute)? {
                write_file(&out.join(name), body.as_bytes())?;
            }
            Ok(())
        }
    }
}

async fn serve(args: &ServeArgs) -> anyhow::Result<()> {
    let store = Arc::new(SessionStore::open(&args.session_dir)?);
    let listener = tokio::net::TcpListener::bind(&args.bind).await?;
    log::info!(
        "serving on http://{} with sessions in {}",
        listener.local_addr()?,
        args.session_dir.display()
    );
    axum::serve(listener, server::app(store, args.ui_dir.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
        Command::Export(c) => export(c),
        Command::Serve(a) => {
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 3;
                }
            };
            return match rt.block_on(serve(a)) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    1
                }
            };
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
