use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use seqmine_core::bench::{run_benchmark, BenchDataset, BenchGrid};
use seqmine_core::synth::{generate, SynthParams};
use seqmine_core::{
    derive_sequence_db, load_transactions, Algorithm, MinSupport, Miner, MiningConfig, TimeWindow, TransactionDb,
};
use seqmine_service::{serve, ServeOptions};

#[derive(Debug, Parser)]
#[command(
    name = "seqmine",
    version,
    about = "Frequent sequential pattern mining over time-windowed event logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive per-object sequences under a time window.
    Derive {
        #[command(flatten)]
        input: WindowedInput,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mine frequent sequential patterns.
    Mine {
        #[command(flatten)]
        input: WindowedInput,
        /// Object count (`2`), fraction (`0.25`) or percentage (`1%`).
        #[arg(long, short = 's')]
        min_support: MinSupport,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long, short = 'a', default_value = "rsp")]
        algorithm: Algorithm,
        /// Count prefix partitions on all cores (rsp only).
        #[arg(long)]
        parallel: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic transaction CSV.
    Gen {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare miners on a synthetic or loaded dataset.
    Bench {
        #[command(flatten)]
        synth: SynthArgs,
        /// Benchmark this transaction CSV instead of generating data.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.25%,0.5%,1%,2%")]
        supports: Vec<MinSupport>,
        #[arg(long, value_delimiter = ',', default_value = "rsp,gsp")]
        algorithms: Vec<Algorithm>,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the JSON API and the analyst console.
    Serve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Directory holding the built console bundle.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct WindowedInput {
    /// Transaction CSV (`object_id,timestamp,item`).
    #[arg(long)]
    data: PathBuf,
    /// First day of the window; defaults to the earliest record.
    #[arg(long)]
    start: Option<String>,
    /// Last day of the window; defaults to the latest record.
    #[arg(long)]
    end: Option<String>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long = "D", default_value_t = 400)]
    customers: usize,
    #[arg(long = "C", default_value_t = 15.0)]
    avg_transactions: f64,
    #[arg(long = "N", default_value_t = 15)]
    items: u32,
    #[arg(long, default_value_t = 2008)]
    seed: u64,
    /// Pattern pool size; defaults to N.
    #[arg(long)]
    pool: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    corrupt: f64,
}

impl SynthArgs {
    fn params(&self) -> SynthParams {
        let mut p = SynthParams::new(self.customers, self.avg_transactions, self.items, self.seed);
        if let Some(pool) = self.pool {
            p.pattern_pool_size = pool;
        }
        p.corruption_prob = self.corrupt;
        p
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> Result<TransactionDb> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_transactions(BufReader::new(file)).with_context(|| format!("loading {}", path.display()))
}

fn resolve_window(db: &TransactionDb, start: Option<&str>, end: Option<&str>) -> Result<TimeWindow> {
    let Some(span) = db.time_span() else {
        bail!("dataset has no records");
    };
    let start = start.map_or_else(|| span.start().to_string(), str::to_owned);
    let end = end.map_or_else(|| span.end().to_string(), str::to_owned);
    Ok(TimeWindow::parse(&start, &end)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Derive { input, out } => {
            let db = load(&input.data)?;
            let window = resolve_window(&db, input.start.as_deref(), input.end.as_deref())?;
            let sequences = derive_sequence_db(&db, window);
            sequences.write_csv(output(out.as_deref())?)?;
        }
        Command::Mine {
            input,
            min_support,
            max_len,
            algorithm,
            parallel,
            format,
            out,
        } => {
            let db = load(&input.data)?;
            let window = resolve_window(&db, input.start.as_deref(), input.end.as_deref())?;
            let sequences = derive_sequence_db(&db, window);
            let config = MiningConfig::new(min_support)
                .with_max_len(max_len)
                .with_parallel(parallel);
            let result = algorithm.mine(&sequences, &config)?;
            eprintln!(
                "{}: {} patterns from {} objects (threshold {}) in {:.1} ms",
                algorithm,
                result.len(),
                result.object_count,
                result.threshold,
                result.timings.total_ms
            );
            let mut w = output(out.as_deref())?;
            match format {
                Format::Csv => result.write_csv(&mut w)?,
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &result.to_json())?;
                    writeln!(w)?;
                }
            }
            w.flush()?;
        }
        Command::Gen { synth, out } => {
            let db = generate(&synth.params())?;
            db.write_csv(output(out.as_deref())?)?;
        }
        Command::Bench {
            synth,
            data,
            supports,
            algorithms,
            max_len,
            repeats,
            out,
        } => {
            let dataset = match data {
                Some(path) => {
                    let id = path
                        .file_stem()
                        .map_or("data".into(), |s| s.to_string_lossy().into_owned());
                    BenchDataset::from_db(id, load(&path)?)
                }
                None => BenchDataset::synthetic(synth.params())?,
            };
            let mut grid = BenchGrid::new(vec![dataset], supports);
            grid.max_pattern_length = Some(max_len);
            grid.repeats = repeats;
            let miners: Vec<&dyn Miner> = algorithms.iter().map(|a| a as &dyn Miner).collect();
            let report = run_benchmark(&grid, &miners)?;
            report.write_csv(output(out.as_deref())?)?;
            if let (Some(rsp), Some(gsp)) = (
                algorithms.iter().position(|&a| a == Algorithm::Rsp),
                algorithms.iter().position(|&a| a == Algorithm::Gsp),
            ) {
                for cell in report.rows.chunks(algorithms.len()) {
                    eprintln!(
                        "min_support {}: gsp/rsp runtime ratio {:.1}",
                        cell[rsp].min_support,
                        cell[gsp].wall_ms / cell[rsp].wall_ms
                    );
                }
            }
        }
        Command::Serve { data, bind, ui } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime
                .block_on(serve(ServeOptions { data, bind, ui_dir: ui }))
                .map_err(|e| anyhow::anyhow!(e))?;
        }
    }
    Ok(())
}

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(io::stderr)
        .init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
