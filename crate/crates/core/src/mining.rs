//! Configuration and result types shared by every miner.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ingest::{SequenceDatabase, TimeWindow};
use crate::model::{Pattern, DEFAULT_ENUMERATION_CAP};

/// Minimum support as an absolute object count or a fraction of objects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinSupport {
    Absolute(u32),
    Fraction(f64),
}

impl MinSupport {
    /// Absolute threshold for a database of `object_count` objects:
    /// `ceil(fraction * object_count)`, never below 1.
    pub fn resolve(self, object_count: usize) -> u32 {
        match self {
            MinSupport::Absolute(n) => n.max(1),
            MinSupport::Fraction(f) => ((f * object_count as f64).ceil() as u32).max(1),
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            MinSupport::Absolute(0) => Err(Error::InvalidConfig("absolute min_support must be at least 1".into())),
            MinSupport::Fraction(f) if !(f > 0.0 && f <= 1.0) => Err(Error::InvalidConfig(format!(
                "fractional min_support must lie in (0, 1], got {f}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MinSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinSupport::Absolute(n) => write!(f, "{n}"),
            MinSupport::Fraction(x) => write!(f, "{}%", x * 100.0),
        }
    }
}

/// Parses `2` as an absolute count, `0.25` as a fraction and `1.5%` as a
/// percentage.
impl FromStr for MinSupport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidConfig(format!("cannot parse min_support {s:?}"));
        let support = if let Some(pct) = s.strip_suffix('%') {
            MinSupport::Fraction(pct.trim().parse::<f64>().map_err(|_| bad())? / 100.0)
        } else if let Ok(n) = s.parse::<u32>() {
            MinSupport::Absolute(n)
        } else {
            MinSupport::Fraction(s.parse::<f64>().map_err(|_| bad())?)
        };
        support.validate()?;
        Ok(support)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub min_support: MinSupport,
    /// Longest pattern to mine; `None` mines to completion.
    pub max_pattern_length: Option<usize>,
    /// Longest sequence whose full subsequence set may be enumerated when
    /// `max_pattern_length` is unbounded.
    pub enumeration_cap: usize,
    /// Count prefix partitions on a thread pool. Results are identical.
    pub parallel: bool,
}

impl MiningConfig {
    pub fn new(min_support: MinSupport) -> Self {
        Self {
            min_support,
            max_pattern_length: None,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            parallel: false,
        }
    }

    pub fn absolute(count: u32) -> Self {
        Self::new(MinSupport::Absolute(count))
    }

    pub fn fraction(fraction: f64) -> Self {
        Self::new(MinSupport::Fraction(fraction))
    }

    pub fn with_max_len(mut self, max_len: Option<usize>) -> Self {
        self.max_pattern_length = max_len;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.min_support.validate()?;
        if self.max_pattern_length == Some(0) {
            return Err(Error::InvalidConfig("max_pattern_length must be at least 1".into()));
        }
        Ok(())
    }

    pub fn threshold(&self, object_count: usize) -> u32 {
        self.min_support.resolve(object_count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rsp,
    Gsp,
    Naive,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rsp => "rsp",
            Algorithm::Gsp => "gsp",
            Algorithm::Naive => "naive",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rsp" => Ok(Algorithm::Rsp),
            "gsp" => Ok(Algorithm::Gsp),
            "naive" => Ok(Algorithm::Naive),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Anything that turns a sequence database into frequent patterns.
pub trait Miner {
    fn name(&self) -> &str;
    fn mine(&self, db: &SequenceDatabase, config: &MiningConfig) -> Result<MiningResult>;
}

impl Miner for Algorithm {
    fn name(&self) -> &str {
        Algorithm::name(*self)
    }

    fn mine(&self, db: &SequenceDatabase, config: &MiningConfig) -> Result<MiningResult> {
        match self {
            Algorithm::Rsp => crate::rsp::mine_rsp(db, config),
            Algorithm::Gsp => crate::gsp::mine_gsp(db, config),
            Algorithm::Naive => crate::oracle::mine_naive(db, config),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub scan_ms: f64,
    pub count_ms: f64,
    pub total_ms: f64,
}

/// Frequent patterns with their absolute support, plus run metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiningResult {
    pub algorithm: Algorithm,
    #[serde(serialize_with = "serialize_patterns")]
    pub patterns: BTreeMap<Pattern, u32>,
    pub config: MiningConfig,
    pub window: TimeWindow,
    pub object_count: usize,
    /// `config.min_support` resolved against `object_count`.
    pub threshold: u32,
    /// Logical passes over the database.
    pub scan_count: u32,
    /// Largest number of support counters alive at once.
    pub peak_counter_count: usize,
    pub timings: Timings,
}

fn serialize_patterns<S: Serializer>(patterns: &BTreeMap<Pattern, u32>, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Row<'a> {
        pattern: &'a Pattern,
        support: u32,
    }
    let mut seq = s.serialize_seq(Some(patterns.len()))?;
    for (pattern, &support) in patterns {
        seq.serialize_element(&Row { pattern, support })?;
    }
    seq.end()
}

impl MiningResult {
    pub fn support(&self, pattern: &Pattern) -> Option<u32> {
        self.patterns.get(pattern).copied()
    }

    pub fn relative_support(&self, support: u32) -> f64 {
        if self.object_count == 0 {
            0.0
        } else {
            f64::from(support) / self.object_count as f64
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// JSON document with per-pattern relative support.
    pub fn to_json(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("result serializes");
        if let Some(rows) = value.get_mut("patterns").and_then(|p| p.as_array_mut()) {
            for (row, (_, &support)) in rows.iter_mut().zip(&self.patterns) {
                row["relative_support"] = self.relative_support(support).into();
            }
        }
        value
    }

    /// Writes `pattern,support,relative_support` rows in canonical order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["pattern", "support", "relative_support"])?;
        for (pattern, &support) in &self.patterns {
            w.write_record([
                pattern.to_string(),
                support.to_string(),
                self.relative_support(support).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn elapsed_ms(start: std::time::Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
