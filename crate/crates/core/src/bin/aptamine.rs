use std::path::PathBuf;
use std::process::ExitCode;

use aptamine::config::RunConfig;
use aptamine::pipeline::{FileStatus, Pipeline, PipelineError};
use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "aptamine", version, about = "Local-first aptamer literature mining")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest local documents into the store and keyword index.
    Ingest,
    /// Search targets locally, then online unless --offline, and write reports.
    Search,
    /// Write every stored sequence as CSV.
    Export {
        /// Output file; defaults to {out}/sequences.csv. Use - for stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Configuration commands.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print the effective configuration as TOML.
    Show,
}

#[derive(Args)]
struct Overrides {
    /// Config file (TOML).
    #[arg(long, global = true, env = "APTAMINE_CONFIG")]
    config: Option<PathBuf>,
    /// Target names, comma-separated or repeated.
    #[arg(long, global = true, value_delimiter = ',')]
    targets: Vec<String>,
    /// File with one target per line.
    #[arg(long, global = true)]
    targets_file: Option<PathBuf>,
    /// Directory of PDF, text or markdown documents
    #[arg(long, global = true)]
    pdf_dir: Option<PathBuf>,
    /// SQLite store path
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Report output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use only the local store and documents.
    #[arg(long, global = true)]
    offline: bool,
    /// Targets processed in parallel
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Shortest accepted sequence length
    #[arg(long, global = true)]
    min_len: Option<usize>,
    /// Longest accepted sequence length
    #[arg(long, global = true)]
    max_len: Option<usize>,
    /// Language-model completion endpoint for the semantic filter.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// Only log warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
}

impl Overrides {
    fn apply(&self, c: &mut RunConfig) {
        if !self.targets.is_empty() {
            c.run.targets = self.targets.clone();
        }
        if let Some(v) = &self.targets_file {
            c.run.targets_file = Some(v.clone());
        }
        if let Some(v) = &self.pdf_dir {
            c.run.pdf_dir = Some(v.clone());
        }
        if let Some(v) = &self.store {
            c.run.store_path = v.clone();
        }
        if let Some(v) = &self.out {
            c.run.out_dir = v.clone();
        }
        if self.offline {
            c.run.offline = true;
        }
        if let Some(v) = self.workers {
            c.run.workers = v;
        }
        c.set_length_bounds(self.min_len, self.max_len);
        if let Some(v) = &self.endpoint {
            c.semfilter.endpoint = Some(v.clone());
        }
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut config = RunConfig::load(cli.overrides.config.as_deref())?;
    cli.overrides.apply(&mut config);
    config.validate()?;
    match cli.command {
        Command::Config { action: ConfigAction::Show } => {
            print!("{}", config.to_toml());
        }
        Command::Ingest => {
            let s = Pipeline::new(config)?.ingest()?;
            for f in &s.files {
                let status = serde_json::to_value(f.status).expect("status serializes");
                let detail = f.error.clone().unwrap_or_else(|| format!("{} sequences", f.sequences));
                println!("{}\t{}\t{detail}", status.as_str().unwrap_or_default(), f.path);
            }
            println!(
                "{} ingested, {} unchanged, {} failed, {} sequences stored",
                s.count(FileStatus::Ingested),
                s.count(FileStatus::Unchanged),
                s.count(FileStatus::Failed),
                s.sequences_stored
            );
        }
        Command::Search => {
            let o = Pipeline::new(config)?.search()?;
            for r in &o.reports {
                println!("{}\tTier{}\t{} sequences\t{} leads\t{} sources", r.target_name, r.tier.number(), r.curated.len(), r.leads.len(), r.all_sources.len());
            }
            let h = &o.summary.hit_rates;
            println!(
                "hit rates: tier1 {:.1}%, tier2 {:.1}%, tier3 {:.1}%",
                h.tier1_pct, h.tier2_pct, h.tier3_pct
            );
            println!("reports: {}", o.run_dir.display());
        }
        Command::Export { csv } => {
            let path = csv.unwrap_or_else(|| config.run.out_dir.join("sequences.csv"));
            let pipeline = Pipeline::new(config)?;
            if path.as_os_str() == "-" {
                pipeline.export(std::io::stdout().lock())?;
            } else {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent).map_err(|e| PipelineError::Io(format!("{}: {e}", parent.display())))?;
                }
                let file = std::fs::File::create(&path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
                let rows = pipeline.export(std::io::BufWriter::new(file))?;
                println!("{rows} rows written to {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = if cli.overrides.quiet {
        EnvFilter::new("warn")
    } else {
        EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info"))
    };
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
