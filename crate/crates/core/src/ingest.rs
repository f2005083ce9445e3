//! Transaction loading and time-window sequence derivation.
//!
//! Raw records `(object_id, timestamp, item)` are grouped per object and
//! restricted to an inclusive calendar window. The result is the sequence
//! database the miners consume, so the time constraint is settled once here
//! and never rechecked during mining.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Item, ObjectId, Sequence};

pub const TRANSACTION_HEADER: [&str; 3] = ["object_id", "timestamp", "item"];
pub const SEQUENCE_HEADER: [&str; 3] = ["object_id", "interval_days", "sequence"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionRecord {
    pub object_id: ObjectId,
    pub timestamp: NaiveDateTime,
    pub item: Item,
}

/// Parses `YYYY-MM-DD`, optionally followed by a time (`T` or space
/// separated).
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(date) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return date.and_hms_opt(0, 0, 0);
    }
    s.parse::<NaiveDateTime>()
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M"))
        .ok()
}

/// An immutable collection of raw transaction records.
#[derive(Debug, Clone, Default)]
pub struct TransactionDb {
    records: Vec<TransactionRecord>,
    item_universe: BTreeSet<Item>,
    object_universe: BTreeSet<ObjectId>,
}

impl TransactionDb {
    pub fn from_records(records: Vec<TransactionRecord>) -> Self {
        let item_universe = records.iter().map(|r| r.item).collect();
        let object_universe = records.iter().map(|r| r.object_id.clone()).collect();
        Self {
            records,
            item_universe,
            object_universe,
        }
    }

    pub fn records(&self) -> &[TransactionRecord] {
        &self.records
    }

    pub fn item_universe(&self) -> &BTreeSet<Item> {
        &self.item_universe
    }

    pub fn object_universe(&self) -> &BTreeSet<ObjectId> {
        &self.object_universe
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Earliest and latest record dates.
    pub fn time_span(&self) -> Option<TimeWindow> {
        let min = self.records.iter().map(|r| r.timestamp.date()).min()?;
        let max = self.records.iter().map(|r| r.timestamp.date()).max()?;
        Some(TimeWindow { start: min, end: max })
    }

    /// Writes the records in the transaction CSV format.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRANSACTION_HEADER)?;
        for r in &self.records {
            let ts = if r.timestamp.time() == chrono::NaiveTime::MIN {
                r.timestamp.date().to_string()
            } else {
                r.timestamp.format("%Y-%m-%dT%H:%M:%S").to_string()
            };
            w.write_record([r.object_id.as_str(), &ts, &r.item.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Loads records in the `object_id,timestamp,item` CSV format.
///
/// Fails on the first malformed row, naming its line.
pub fn load_transactions<R: Read>(source: R) -> Result<TransactionDb> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let mut rows = reader.records();

    let header = match rows.next() {
        None => return Err(Error::EmptyInput),
        Some(row) => row?,
    };
    let names: Vec<&str> = header.iter().collect();
    if names != TRANSACTION_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                TRANSACTION_HEADER.join(","),
                names.join(",")
            ),
        });
    }

    let mut records = Vec::new();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        if row.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let object_id = &row[0];
        if object_id.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty object_id".to_owned(),
            });
        }
        let timestamp = parse_timestamp(&row[1]).ok_or_else(|| Error::Parse {
            line,
            message: format!("bad timestamp {:?}", &row[1]),
        })?;
        let item = row[2]
            .parse::<Item>()
            .map_err(|message| Error::Parse { line, message })?;
        records.push(TransactionRecord {
            object_id: ObjectId::new(object_id),
            timestamp,
            item,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(TransactionDb::from_records(records))
}

/// Inclusive calendar interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeWindow {
    start: NaiveDate,
    end: NaiveDate,
}

impl TimeWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidWindow {
                start: start.to_string(),
                end: end.to_string(),
            });
        }
        Ok(Self { start, end })
    }

    pub fn parse(start: &str, end: &str) -> Result<Self> {
        let date = |s: &str| {
            NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| Error::InvalidWindow {
                start: start.to_owned(),
                end: format!("{end} ({s:?}: {e})"),
            })
        };
        Self::new(date(start)?, date(end)?)
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn contains(&self, ts: NaiveDateTime) -> bool {
        let day = ts.date();
        self.start <= day && day <= self.end
    }

    /// `end - start` in whole days.
    pub fn interval_days(&self) -> i64 {
        (self.end - self.start).num_days()
    }

    pub fn covers(&self, other: &TimeWindow) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// Per-object sequences derived under one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDatabase {
    entries: BTreeMap<ObjectId, Sequence>,
    window: TimeWindow,
}

impl SequenceDatabase {
    pub fn new(window: TimeWindow, entries: BTreeMap<ObjectId, Sequence>) -> Self {
        Self { entries, window }
    }

    /// Builds a database from bare sequences, numbering objects from 1.
    /// Useful for tests and synthetic instances that never had timestamps.
    pub fn from_sequences(window: TimeWindow, sequences: impl IntoIterator<Item = Sequence>) -> Self {
        let entries = sequences
            .into_iter()
            .enumerate()
            .map(|(i, s)| (ObjectId::new((i + 1).to_string()), s))
            .collect();
        Self { entries, window }
    }

    pub fn window(&self) -> TimeWindow {
        self.window
    }

    pub fn interval_days(&self) -> i64 {
        self.window.interval_days()
    }

    pub fn entries(&self) -> &BTreeMap<ObjectId, Sequence> {
        &self.entries
    }

    pub fn get(&self, id: &ObjectId) -> Option<&Sequence> {
        self.entries.get(id)
    }

    /// Sequences in object order; the position is the object's ordinal.
    pub fn sequences(&self) -> impl ExactSizeIterator<Item = &Sequence> + '_ {
        self.entries.values()
    }

    pub fn object_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_length(&self) -> usize {
        self.entries.values().map(Sequence::len).sum()
    }

    /// Writes `object_id,interval_days,sequence` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SEQUENCE_HEADER)?;
        let days = self.interval_days().to_string();
        for (id, seq) in &self.entries {
            w.write_record([id.as_str(), &days, &seq.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Groups the in-window records of each object into a sequence ordered by
/// `(timestamp, item)`. Objects without in-window records are omitted.
pub fn derive_sequence_db(db: &TransactionDb, window: TimeWindow) -> SequenceDatabase {
    let mut grouped: BTreeMap<&ObjectId, Vec<(NaiveDateTime, Item)>> = BTreeMap::new();
    for r in db.records().iter().filter(|r| window.contains(r.timestamp)) {
        grouped.entry(&r.object_id).or_default().push((r.timestamp, r.item));
    }
    let entries = grouped
        .into_iter()
        .filter_map(|(id, mut events)| {
            events.sort_unstable();
            let seq = Sequence::new(events.into_iter().map(|(_, item)| item).collect())?;
            Some((id.clone(), seq))
        })
        .collect();
    SequenceDatabase::new(window, entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub object_id: ObjectId,
    pub sequence: Sequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewStats {
    pub object_count: usize,
    pub min_length: usize,
    pub avg_length: f64,
    pub max_length: usize,
    pub distinct_items: usize,
    pub interval_days: i64,
}

impl PreviewStats {
    pub fn of(db: &SequenceDatabase) -> Self {
        let lengths: Vec<usize> = db.sequences().map(Sequence::len).collect();
        let n = db.object_count();
        let distinct: BTreeSet<Item> = db.sequences().flat_map(|s| s.items().iter().copied()).collect();
        Self {
            object_count: n,
            min_length: lengths.iter().copied().min().unwrap_or(0),
            avg_length: if n == 0 {
                0.0
            } else {
                db.total_length() as f64 / n as f64
            },
            max_length: lengths.iter().copied().max().unwrap_or(0),
            distinct_items: distinct.len(),
            interval_days: db.interval_days(),
        }
    }
}

/// A look at the derived sequences before committing to a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewReport {
    pub window: TimeWindow,
    pub sample: Vec<SampleRow>,
    pub stats: PreviewStats,
}

/// Derives under `window`, then samples the first `k` objects in id order.
/// Stats cover the whole derived database.
pub fn preview_sample(db: &TransactionDb, window: TimeWindow, k: usize) -> PreviewReport {
    let derived = derive_sequence_db(db, window);
    let sample = derived
        .entries()
        .iter()
        .take(k)
        .map(|(id, seq)| SampleRow {
            object_id: id.clone(),
            sequence: seq.clone(),
        })
        .collect();
    PreviewReport {
        window,
        sample,
        stats: PreviewStats::of(&derived),
    }
}
