//! Frequent sequential pattern mining over time-windowed event logs.
//!
//! Transactions are grouped into per-object sequences under an inclusive
//! time window ([`ingest`]), then mined either by prefix-partitioned
//! counting ([`rsp`]) or by the level-wise GSP baseline ([`gsp`]). A
//! brute-force miner ([`oracle`]) checks both, [`synth`] generates
//! Quest-style data and [`bench`] compares runtimes.

pub mod bench;
pub mod error;
pub mod gsp;
pub mod ingest;
pub mod mining;
pub mod model;
pub mod oracle;
pub mod rsp;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{
    derive_sequence_db, load_transactions, preview_sample, PreviewReport, SequenceDatabase, TimeWindow, TransactionDb,
    TransactionRecord,
};
pub use mining::{Algorithm, MinSupport, Miner, MiningConfig, MiningResult};
pub use model::{is_subsequence, Item, ObjectId, Pattern, Sequence};
