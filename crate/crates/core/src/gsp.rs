//! Level-wise GSP baseline.
//!
//! Candidates of length `k + 1` are joined from frequent `k`-patterns,
//! pruned with the apriori property and counted by a full pass over the
//! database. Containment is tested directly with `is_subsequence`, with no
//! hash tree, which keeps this a plain candidate-generate-and-test miner.

use std::collections::BTreeSet;
use std::time::Instant;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::Result;
use crate::ingest::SequenceDatabase;
use crate::mining::{elapsed_ms, Algorithm, MiningConfig, MiningResult, Timings};
use crate::model::{is_subsequence, Item, Pattern};

/// Candidate patterns of one length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    level: usize,
    candidates: BTreeSet<Pattern>,
}

impl CandidateSet {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn candidates(&self) -> &BTreeSet<Pattern> {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

fn level_of(frequent: &BTreeSet<Pattern>) -> usize {
    let level = frequent.first().map_or(0, Pattern::len);
    debug_assert!(frequent.iter().all(|p| p.len() == level));
    level
}

/// Joins `s1` with `s2` whenever `s1` without its first item equals `s2`
/// without its last, yielding `s1` extended by the last item of `s2`. For
/// length-1 input every ordered pair is produced.
pub fn join_level(frequent: &BTreeSet<Pattern>) -> CandidateSet {
    let level = level_of(frequent);
    let mut candidates = BTreeSet::new();
    if level == 1 {
        for a in frequent {
            for b in frequent {
                candidates.insert(Pattern::new(vec![a.prefix_key(), b.prefix_key()]).expect("pair"));
            }
        }
    } else if level > 1 {
        let mut by_head: FxHashMap<&[Item], Vec<Item>> = FxHashMap::default();
        for s2 in frequent {
            let (last, head) = s2.items().split_last().expect("non-empty");
            by_head.entry(head).or_default().push(*last);
        }
        for s1 in frequent {
            if let Some(lasts) = by_head.get(&s1.items()[1..]) {
                for &last in lasts {
                    let mut items = s1.items().to_vec();
                    items.push(last);
                    candidates.insert(Pattern::new(items).expect("non-empty"));
                }
            }
        }
    }
    CandidateSet {
        level: level + 1,
        candidates,
    }
}

/// Drops candidates with any infrequent length-`k` subsequence.
pub fn prune_level(candidates: CandidateSet, frequent: &BTreeSet<Pattern>) -> CandidateSet {
    let known: FxHashSet<&[Item]> = frequent.iter().map(Pattern::items).collect();
    let mut scratch = Vec::with_capacity(candidates.level);
    let kept = candidates
        .candidates
        .into_iter()
        .filter(|c| {
            (0..c.len()).all(|skip| {
                scratch.clear();
                scratch.extend(
                    c.items()
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &x)| x),
                );
                known.contains(scratch.as_slice())
            })
        })
        .collect();
    CandidateSet {
        level: candidates.level,
        candidates: kept,
    }
}

/// Mines level by level until no frequent patterns remain or the length
/// bound is reached. Every level that produces frequent patterns costs one
/// more database pass, including the pass that finds the next level empty.
pub fn mine_gsp(db: &SequenceDatabase, config: &MiningConfig) -> Result<MiningResult> {
    config.validate()?;
    let started = Instant::now();
    let threshold = config.threshold(db.object_count());
    let max_len = config.max_pattern_length.unwrap_or(usize::MAX);

    // Pass 1: item supports.
    let mut item_counts: FxHashMap<Item, u32> = FxHashMap::default();
    let mut seen = Vec::new();
    for seq in db.sequences() {
        seen.clear();
        seen.extend_from_slice(seq.items());
        seen.sort_unstable();
        seen.dedup();
        for &item in &seen {
            *item_counts.entry(item).or_default() += 1;
        }
    }
    let mut patterns: std::collections::BTreeMap<Pattern, u32> = item_counts
        .into_iter()
        .filter(|&(_, c)| c >= threshold)
        .map(|(item, c)| (Pattern::single(item), c))
        .collect();
    let mut frequent: BTreeSet<Pattern> = patterns.keys().cloned().collect();
    let mut scan_count = 1;
    let mut peak = frequent.len();
    let scan_ms = elapsed_ms(started);

    let counting = Instant::now();
    let sequences: Vec<&[Item]> = db.sequences().map(|s| s.items()).collect();
    let mut level = 1;
    while !frequent.is_empty() && level < max_len {
        let candidates = prune_level(join_level(&frequent), &frequent);
        scan_count += 1;
        peak = peak.max(candidates.len());
        let mut next = BTreeSet::new();
        for candidate in candidates.candidates {
            let support = sequences
                .iter()
                .filter(|s| is_subsequence(candidate.items(), s))
                .count() as u32;
            if support >= threshold {
                patterns.insert(candidate.clone(), support);
                next.insert(candidate);
            }
        }
        frequent = next;
        level += 1;
    }

    Ok(MiningResult {
        algorithm: Algorithm::Gsp,
        patterns,
        config: *config,
        window: db.window(),
        object_count: db.object_count(),
        threshold,
        scan_count,
        peak_counter_count: peak,
        timings: Timings {
            scan_ms,
            count_ms: elapsed_ms(counting),
            total_ms: elapsed_ms(started),
        },
    })
}
