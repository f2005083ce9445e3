//! Brute-force reference miner.
//!
//! Shares nothing with the production miners beyond `is_subsequence`: every
//! index subset of every raw sequence is materialized, deduplicated in a
//! set, and each distinct pattern is then tested against every object.
//! Exponential on purpose; meant for small instances only.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::ingest::SequenceDatabase;
use crate::mining::{elapsed_ms, Algorithm, MiningConfig, MiningResult, Timings};
use crate::model::{is_subsequence, Item, Pattern};

pub fn mine_naive(db: &SequenceDatabase, config: &MiningConfig) -> Result<MiningResult> {
    config.validate()?;
    let started = Instant::now();
    let threshold = config.threshold(db.object_count());
    let max_len = config.max_pattern_length.unwrap_or(usize::MAX);

    let mut universe: BTreeSet<Vec<Item>> = BTreeSet::new();
    for seq in db.sequences() {
        let items = seq.items();
        let n = items.len();
        if n > config.enumeration_cap || n >= 32 {
            return Err(Error::CapExceeded {
                len: n,
                cap: config.enumeration_cap.min(31),
            });
        }
        for mask in 1u32..(1u32 << n) {
            if mask.count_ones() as usize > max_len {
                continue;
            }
            universe.insert((0..n).filter(|&i| mask >> i & 1 == 1).map(|i| items[i]).collect());
        }
    }
    let scan_ms = elapsed_ms(started);

    let counting = Instant::now();
    let peak = universe.len();
    let mut patterns = BTreeMap::new();
    for candidate in universe {
        let support = db.sequences().filter(|s| is_subsequence(&candidate, s.items())).count() as u32;
        if support >= threshold {
            patterns.insert(Pattern::new(candidate).expect("non-empty"), support);
        }
    }

    Ok(MiningResult {
        algorithm: Algorithm::Naive,
        patterns,
        config: *config,
        window: db.window(),
        object_count: db.object_count(),
        threshold,
        scan_count: 2,
        peak_counter_count: peak,
        timings: Timings {
            scan_ms,
            count_ms: elapsed_ms(counting),
            total_ms: elapsed_ms(started),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TimeWindow;

    fn db(rows: &[&str]) -> SequenceDatabase {
        let w = TimeWindow::parse("2008-05-10", "2008-05-25").unwrap();
        SequenceDatabase::from_sequences(w, rows.iter().map(|r| r.parse().unwrap()))
    }

    fn wide_window() -> SequenceDatabase {
        db(&["10:20:30:50:40", "20:40", "10:50:60:70", "10:70:60"])
    }

    #[test]
    fn wide_window_at_two() {
        let r = mine_naive(&wide_window(), &MiningConfig::absolute(2)).unwrap();
        let got: Vec<String> = r.patterns.iter().map(|(p, s)| format!("{p}={s}")).collect();
        assert_eq!(
            got,
            ["10=3", "20=2", "40=2", "50=2", "60=2", "70=2", "10:50=2", "10:60=2", "10:70=2", "20:40=2"]
        );
    }

    #[test]
    fn empty_database() {
        let r = mine_naive(&db(&[]), &MiningConfig::absolute(1)).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn support_one_lists_every_occurring_subsequence() {
        let e = wide_window();
        let r = mine_naive(&e, &MiningConfig::absolute(1)).unwrap();
        let mut all = BTreeSet::new();
        for s in e.sequences() {
            let n = s.len();
            for mask in 1u32..(1 << n) {
                let p: Vec<Item> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| s.items()[i]).collect();
                all.insert(p);
            }
        }
        assert_eq!(r.len(), all.len());
        assert!(r.patterns.values().all(|&s| s >= 1));
        assert!(r.patterns.keys().all(|p| e.sequences().any(|s| s.contains(p))));
    }

    #[test]
    fn oversized_input() {
        let long: Vec<String> = (0..13).map(|i| i.to_string()).collect();
        let e = db(&[&long.join(":")]);
        assert!(matches!(
            mine_naive(&e, &MiningConfig::absolute(1).with_cap(12)),
            Err(Error::CapExceeded { len: 13, .. })
        ));
    }
}
