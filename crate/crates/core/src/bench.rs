//! Runtime comparison harness.
//!
//! Each grid cell (dataset × window × min_support) is derived once, then
//! every miner runs on it single-threaded `repeats` times. Only the mining
//! call is timed; the median is reported. Miners must agree on the full
//! pattern→support map before a cell's rows are emitted.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{derive_sequence_db, TimeWindow, TransactionDb};
use crate::mining::{elapsed_ms, MinSupport, Miner, MiningConfig, MiningResult};
use crate::synth::{generate, SynthParams};

pub const REPORT_HEADER: [&str; 9] = [
    "dataset_id",
    "D",
    "C",
    "N",
    "min_support",
    "algorithm",
    "wall_ms",
    "pattern_count",
    "scan_count",
];

#[derive(Debug, Clone)]
pub struct BenchDataset {
    pub id: String,
    pub params: Option<SynthParams>,
    pub db: TransactionDb,
}

impl BenchDataset {
    pub fn synthetic(params: SynthParams) -> Result<Self> {
        let db = generate(&params)?;
        Ok(Self {
            id: params.label(),
            params: Some(params),
            db,
        })
    }

    pub fn from_db(id: impl Into<String>, db: TransactionDb) -> Self {
        Self {
            id: id.into(),
            params: None,
            db,
        }
    }

    /// `(D, C, N)`, taken from the generator parameters when there are any
    /// and measured from the data otherwise.
    fn shape(&self) -> (usize, f64, usize) {
        match &self.params {
            Some(p) => (p.customers, p.avg_transactions, p.items as usize),
            None => {
                let objects = self.db.object_universe().len();
                let avg = if objects == 0 {
                    0.0
                } else {
                    self.db.len() as f64 / objects as f64
                };
                (objects, avg, self.db.item_universe().len())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchGrid {
    pub datasets: Vec<BenchDataset>,
    /// Empty means one window spanning each dataset.
    pub windows: Vec<TimeWindow>,
    pub supports: Vec<MinSupport>,
    pub max_pattern_length: Option<usize>,
    pub repeats: usize,
}

impl BenchGrid {
    pub fn new(datasets: Vec<BenchDataset>, supports: Vec<MinSupport>) -> Self {
        Self {
            datasets,
            windows: Vec::new(),
            supports,
            max_pattern_length: None,
            repeats: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub dataset_id: String,
    #[serde(rename = "D")]
    pub customers: usize,
    #[serde(rename = "C")]
    pub avg_transactions: f64,
    #[serde(rename = "N")]
    pub items: usize,
    pub window: Option<TimeWindow>,
    pub min_support: MinSupport,
    pub threshold: u32,
    pub algorithm: String,
    pub wall_ms: f64,
    pub pattern_count: usize,
    pub scan_count: u32,
    pub peak_counter_count: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(REPORT_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.dataset_id.clone(),
                r.customers.to_string(),
                r.avg_transactions.to_string(),
                r.items.to_string(),
                r.min_support.to_string(),
                r.algorithm.clone(),
                format!("{:.3}", r.wall_ms),
                r.pattern_count.to_string(),
                r.scan_count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rows of one algorithm, in grid order.
    pub fn rows_for<'a>(&'a self, algorithm: &'a str) -> impl Iterator<Item = &'a BenchRow> + 'a {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }
}

fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

fn compare(dataset: &str, support: MinSupport, a: &MiningResult, b: &MiningResult, names: (&str, &str)) -> Result<()> {
    if a.patterns == b.patterns {
        return Ok(());
    }
    let only_a = a.patterns.iter().find(|(p, s)| b.patterns.get(*p) != Some(*s));
    let only_b = b.patterns.iter().find(|(p, s)| a.patterns.get(*p) != Some(*s));
    let show = |x: Option<(&crate::model::Pattern, &u32)>| x.map_or("-".to_owned(), |(p, s)| format!("{p}={s}"));
    Err(Error::Mismatch {
        dataset: dataset.to_owned(),
        min_support: support.to_string(),
        detail: format!(
            "{} found {} patterns, {} found {}; first difference {} vs {}",
            names.0,
            a.len(),
            names.1,
            b.len(),
            show(only_a),
            show(only_b)
        ),
    })
}

/// Runs every miner over every grid cell.
pub fn run_benchmark(grid: &BenchGrid, miners: &[&dyn Miner]) -> Result<BenchReport> {
    if grid.datasets.is_empty() || grid.supports.is_empty() || miners.is_empty() {
        return Err(Error::InvalidConfig("benchmark grid is empty".into()));
    }
    let repeats = grid.repeats.max(1);
    let mut report = BenchReport::default();
    for dataset in &grid.datasets {
        let windows: Vec<Option<TimeWindow>> = if grid.windows.is_empty() {
            vec![None]
        } else {
            grid.windows.iter().copied().map(Some).collect()
        };
        let (customers, avg_transactions, items) = dataset.shape();
        for window in windows {
            let span = window.or_else(|| dataset.db.time_span());
            let Some(span) = span else {
                continue;
            };
            let sequences = derive_sequence_db(&dataset.db, span);
            for &support in &grid.supports {
                let config = MiningConfig::new(support)
                    .with_max_len(grid.max_pattern_length)
                    .with_parallel(false);
                let mut cell: Vec<(MiningResult, f64)> = Vec::with_capacity(miners.len());
                for miner in miners {
                    let mut times = Vec::with_capacity(repeats);
                    let mut kept = None;
                    for _ in 0..repeats {
                        let started = Instant::now();
                        let result = miner.mine(&sequences, &config)?;
                        times.push(elapsed_ms(started));
                        kept.get_or_insert(result);
                    }
                    cell.push((kept.expect("at least one run"), median(times)));
                }
                for i in 1..cell.len() {
                    compare(
                        &dataset.id,
                        support,
                        &cell[0].0,
                        &cell[i].0,
                        (miners[0].name(), miners[i].name()),
                    )?;
                }
                for (miner, (result, wall_ms)) in miners.iter().zip(cell) {
                    report.rows.push(BenchRow {
                        dataset_id: dataset.id.clone(),
                        customers,
                        avg_transactions,
                        items,
                        window,
                        min_support: support,
                        threshold: result.threshold,
                        algorithm: miner.name().to_owned(),
                        wall_ms,
                        pattern_count: result.len(),
                        scan_count: result.scan_count,
                        peak_counter_count: result.peak_counter_count,
                    });
                }
            }
        }
    }
    Ok(report)
}
