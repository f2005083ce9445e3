#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use seqmine_core::synth::{generate, SynthParams, EPOCH};
use seqmine_core::{
    derive_sequence_db, is_subsequence, load_transactions, Item, MiningResult, Pattern, Sequence, SequenceDatabase,
    TimeWindow, TransactionDb,
};

pub const SAMPLE_LOG: &str = include_str!("../fixtures/sample_log.csv");

pub fn sample_log() -> TransactionDb {
    load_transactions(SAMPLE_LOG.as_bytes()).expect("fixture loads")
}

pub fn window(start: &str, end: &str) -> TimeWindow {
    TimeWindow::parse(start, end).expect("valid window")
}

pub fn wide_window() -> SequenceDatabase {
    derive_sequence_db(&sample_log(), window("2008-05-10", "2008-05-25"))
}

pub fn rows(db: &SequenceDatabase) -> Vec<(String, String)> {
    db.entries()
        .iter()
        .map(|(id, s)| (id.to_string(), s.to_string()))
        .collect()
}

pub fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter().map(|&(a, b)| (a.to_owned(), b.to_owned())).collect()
}

pub fn pattern_map(entries: &[(&str, u32)]) -> BTreeMap<Pattern, u32> {
    entries.iter().map(|&(p, s)| (p.parse().unwrap(), s)).collect()
}

/// One small random mining instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub objects: usize,
    pub avg_len: usize,
    pub items: u32,
    pub db: SequenceDatabase,
}

/// `D <= 30` objects, average length `C <= 8`, `N <= 10` items; every
/// sequence at most 12 long so the brute-force miner stays cheap.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects = rng.gen_range(1..=30);
    let avg_len = rng.gen_range(1..=8);
    let items = rng.gen_range(1..=10);
    let max_len = (2 * avg_len - 1).min(12);
    let sequences: Vec<Sequence> = (0..objects)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            Sequence::new((0..len).map(|_| Item(rng.gen_range(0..items))).collect()).unwrap()
        })
        .collect();
    Instance {
        seed,
        objects,
        avg_len,
        items,
        db: SequenceDatabase::from_sequences(window("2008-01-01", "2008-12-31"), sequences),
    }
}

/// Small timestamped dataset from the generator.
pub fn random_transactions(seed: u64) -> TransactionDb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let params = SynthParams::new(
        rng.gen_range(1..=30),
        rng.gen_range(1..=8) as f64,
        rng.gen_range(1..=10),
        seed,
    );
    generate(&params).expect("valid params")
}

/// Two random windows over the first weeks after the epoch, the first
/// inside the second.
pub fn nested_windows(seed: u64) -> (TimeWindow, TimeWindow) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0dd);
    let mut days: Vec<u64> = (0..4).map(|_| rng.gen_range(0..24)).collect();
    days.sort_unstable();
    let day = |d: u64| EPOCH.checked_add_days(chrono::Days::new(d)).unwrap();
    let outer = TimeWindow::new(day(days[0]), day(days[3])).unwrap();
    let inner = TimeWindow::new(day(days[1]), day(days[2])).unwrap();
    (inner, outer)
}

fn all_proper_subsequences(p: &Pattern) -> Vec<Pattern> {
    let items = p.items();
    let n = items.len();
    (1u32..(1 << n) - 1)
        .map(|mask| Pattern::new((0..n).filter(|&i| mask >> i & 1 == 1).map(|i| items[i]).collect()).unwrap())
        .collect()
}

/// For every reported `A ⊑ B`, `support(A) >= support(B)`.
pub fn check_anti_monotone(r: &MiningResult) -> Result<(), String> {
    for (b, &sb) in &r.patterns {
        for (a, &sa) in &r.patterns {
            if a.len() < b.len() && is_subsequence(a.items(), b.items()) && sa < sb {
                return Err(format!("support({a}) = {sa} < support({b}) = {sb}"));
            }
        }
    }
    Ok(())
}

/// Every non-empty subsequence of a reported pattern is reported.
pub fn check_downward_closed(r: &MiningResult) -> Result<(), String> {
    for (p, &s) in &r.patterns {
        for sub in all_proper_subsequences(p) {
            match r.patterns.get(&sub) {
                None => return Err(format!("{sub} missing although {p} is frequent")),
                Some(&ss) if ss < s => return Err(format!("{sub} has support {ss} < {s} of {p}")),
                _ => {}
            }
        }
    }
    Ok(())
}

/// Every reported pattern occurs, and its support is exactly the number of
/// objects containing it.
pub fn check_no_phantoms(r: &MiningResult, db: &SequenceDatabase) -> Result<(), String> {
    for (p, &s) in &r.patterns {
        let actual = db.sequences().filter(|q| q.contains(p)).count() as u32;
        if actual == 0 {
            return Err(format!("{p} occurs in no sequence"));
        }
        if actual != s {
            return Err(format!("{p}: reported {s}, contained by {actual} objects"));
        }
        if s < r.threshold {
            return Err(format!("{p}: support {s} below threshold {}", r.threshold));
        }
    }
    Ok(())
}

/// A result at a higher threshold is a subset of one at a lower threshold.
pub fn check_threshold_monotone(lower: &MiningResult, higher: &MiningResult) -> Result<(), String> {
    for (p, s) in &higher.patterns {
        if lower.patterns.get(p) != Some(s) {
            return Err(format!(
                "{p} appears at threshold {} but not identically at {}",
                higher.threshold, lower.threshold
            ));
        }
    }
    Ok(())
}

/// Narrowing the window only shortens sequences and drops objects.
pub fn check_window_monotone(db: &TransactionDb, inner: TimeWindow, outer: TimeWindow) -> Result<(), String> {
    let narrow = derive_sequence_db(db, inner);
    let wide = derive_sequence_db(db, outer);
    for (id, seq) in narrow.entries() {
        let Some(w) = wide.get(id) else {
            return Err(format!("object {id} present in {inner:?} but not in {outer:?}"));
        };
        if !is_subsequence(seq.items(), w.items()) {
            return Err(format!("object {id}: {seq} is not a subsequence of {w}"));
        }
    }
    let in_window = db.records().iter().filter(|r| inner.contains(r.timestamp)).count();
    if narrow.total_length() != in_window {
        return Err(format!(
            "{} items derived from {in_window} in-window records",
            narrow.total_length()
        ));
    }
    Ok(())
}
