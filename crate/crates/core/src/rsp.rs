//! Rough-set partitioning miner.
//!
//! Three stages:
//!
//! 1. One scan counts, per item, the objects whose sequence contains it.
//!    Items below threshold can never take part in a frequent pattern, so
//!    they are removed from every sequence.
//! 2. Candidate patterns are split into equivalence classes by their first
//!    item. The classes are disjoint, so each owns its counters outright.
//! 3. Every reduced sequence contributes its distinct subsequences of length
//!    two or more to the class of their first item, once per object.
//!
//! Only subsequences that actually occur in some sequence are ever counted.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::Result;
use crate::ingest::SequenceDatabase;
use crate::mining::{elapsed_ms, Algorithm, MiningConfig, MiningResult, Timings};
use crate::model::{effective_max_len, reduce_sequence, FrequentItemTable, Item, Pattern, Sequence, SubsequenceWalker};

/// Support counter of one candidate pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counter {
    pub count: u32,
    /// Ordinal of the last object that incremented `count`.
    pub last_object_seen: u32,
}

#[derive(Debug, Clone)]
struct Node {
    item: Item,
    parent: u32,
    counter: Counter,
}

const ROOT: u32 = 0;
const UNSEEN: u32 = u32::MAX;

/// Candidate patterns sharing a first item, with their counters.
///
/// Counters live in a prefix tree rooted at the shared item: the node for
/// `p:x` is a child of the node for `p`, so extending a subsequence by one
/// item costs one child lookup instead of hashing the whole pattern. The
/// root stands for the length-1 pattern and is never counted here.
#[derive(Debug, Clone)]
pub struct PrefixPartition {
    prefix: Item,
    nodes: Vec<Node>,
    children: FxHashMap<(u32, Item), u32>,
}

impl PrefixPartition {
    pub fn new(prefix: Item) -> Self {
        Self {
            prefix,
            nodes: vec![Node {
                item: prefix,
                parent: ROOT,
                counter: Counter {
                    count: 0,
                    last_object_seen: UNSEEN,
                },
            }],
            children: FxHashMap::default(),
        }
    }

    pub fn prefix(&self) -> Item {
        self.prefix
    }

    fn child(&mut self, parent: u32, item: Item) -> u32 {
        let next = self.nodes.len() as u32;
        let node = *self.children.entry((parent, item)).or_insert(next);
        if node == next {
            self.nodes.push(Node {
                item,
                parent,
                counter: Counter {
                    count: 0,
                    last_object_seen: UNSEEN,
                },
            });
        }
        node
    }

    fn bump(&mut self, node: u32, ordinal: u32) {
        let c = &mut self.nodes[node as usize].counter;
        if c.last_object_seen != ordinal {
            c.count += 1;
            c.last_object_seen = ordinal;
        }
    }

    /// Extends the pattern at `parent` by `item` and counts the result for
    /// object `ordinal`. Returns the node of the extended pattern.
    fn extend(&mut self, parent: u32, item: Item, ordinal: u32) -> u32 {
        let node = self.child(parent, item);
        self.bump(node, ordinal);
        node
    }

    /// Counts `pattern` for object `ordinal`, at most once per object.
    pub fn record(&mut self, pattern: &[Item], ordinal: u32) {
        assert_eq!(pattern.first(), Some(&self.prefix), "pattern outside partition");
        assert!(pattern.len() >= 2, "length-1 patterns are counted from the item scan");
        let mut node = ROOT;
        for &item in &pattern[1..] {
            node = self.child(node, item);
        }
        self.bump(node, ordinal);
    }

    fn find(&self, pattern: &[Item]) -> Option<u32> {
        if pattern.first() != Some(&self.prefix) {
            return None;
        }
        pattern[1..]
            .iter()
            .try_fold(ROOT, |node, &item| self.children.get(&(node, item)).copied())
    }

    pub fn count(&self, pattern: &Pattern) -> u32 {
        match self.find(pattern.items()) {
            Some(ROOT) | None => 0,
            Some(node) => self.nodes[node as usize].counter.count,
        }
    }

    fn pattern_of(&self, mut node: u32) -> Pattern {
        let mut items = Vec::new();
        while node != ROOT {
            let n = &self.nodes[node as usize];
            items.push(n.item);
            node = n.parent;
        }
        items.push(self.prefix);
        items.reverse();
        Pattern::new(items).expect("non-empty")
    }

    /// Every counted pattern with its count, in no particular order.
    pub fn counters(&self) -> impl Iterator<Item = (Pattern, u32)> + '_ {
        self.frequent(1)
    }

    /// Counted patterns whose count reaches `threshold`.
    pub fn frequent(&self, threshold: u32) -> impl Iterator<Item = (Pattern, u32)> + '_ {
        (1..self.nodes.len() as u32)
            .filter(move |&n| self.nodes[n as usize].counter.count >= threshold)
            .map(|n| (self.pattern_of(n), self.nodes[n as usize].counter.count))
    }

    /// Number of live counters.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Items contained in at least the threshold number of object sequences.
pub fn frequent_items(db: &SequenceDatabase, config: &MiningConfig) -> Result<FrequentItemTable> {
    config.validate()?;
    let threshold = config.threshold(db.object_count());
    let mut counts: FxHashMap<Item, u32> = FxHashMap::default();
    let mut seen = Vec::new();
    for seq in db.sequences() {
        seen.clear();
        seen.extend_from_slice(seq.items());
        seen.sort_unstable();
        seen.dedup();
        for &item in &seen {
            *counts.entry(item).or_default() += 1;
        }
    }
    Ok(FrequentItemTable::from_counts(counts, threshold))
}

/// Counts every distinct length-≥2 subsequence of every reduced sequence in
/// the partition of its first item. Returns one partition per frequent
/// item, ascending by prefix.
pub fn mine_partitioned(
    db: &SequenceDatabase,
    frequent: &FrequentItemTable,
    config: &MiningConfig,
) -> Result<Vec<PrefixPartition>> {
    config.validate()?;
    let reduced: Vec<Sequence> = db.sequences().filter_map(|s| reduce_sequence(s, frequent)).collect();
    let mut max_len = 0;
    for seq in &reduced {
        max_len = max_len.max(effective_max_len(
            seq.len(),
            config.max_pattern_length,
            config.enumeration_cap,
        )?);
    }

    let mut partitions: Vec<PrefixPartition> = frequent.items().map(PrefixPartition::new).collect();
    if max_len < 2 {
        return Ok(partitions);
    }
    let walkers: Vec<SubsequenceWalker<'_>> = reduced.iter().map(|s| SubsequenceWalker::new(s.items())).collect();

    if config.parallel {
        // Each worker owns one partition and reads every sequence.
        partitions.par_iter_mut().for_each(|part| {
            let prefix = part.prefix();
            for (ordinal, walker) in walkers.iter().enumerate() {
                let ordinal = ordinal as u32;
                walker.walk_from(prefix, max_len, ROOT, &mut |node, item| {
                    part.extend(node, item, ordinal)
                });
            }
        });
    } else {
        let slot: FxHashMap<Item, usize> = partitions.iter().enumerate().map(|(i, p)| (p.prefix(), i)).collect();
        for (ordinal, walker) in walkers.iter().enumerate() {
            for &first in walker.alphabet() {
                let part = &mut partitions[slot[&first]];
                let ordinal = ordinal as u32;
                walker.walk_from(first, max_len, ROOT, &mut |node, item| part.extend(node, item, ordinal));
            }
        }
    }
    Ok(partitions)
}

/// Frequent length-1 items plus every frequent pattern counted in the
/// prefix partitions.
pub fn mine_rsp(db: &SequenceDatabase, config: &MiningConfig) -> Result<MiningResult> {
    let started = Instant::now();
    let frequent = frequent_items(db, config)?;
    let scan_ms = elapsed_ms(started);

    let counting = Instant::now();
    let partitions = mine_partitioned(db, &frequent, config)?;
    let threshold = frequent.threshold();
    let mut patterns: BTreeMap<Pattern, u32> = frequent
        .entries()
        .iter()
        .map(|(&item, &count)| (Pattern::single(item), count))
        .collect();
    let mut counters = 0;
    for part in &partitions {
        counters += part.len();
        patterns.extend(part.frequent(threshold));
    }
    let count_ms = elapsed_ms(counting);

    let second_pass = !frequent.is_empty() && config.max_pattern_length != Some(1);
    Ok(MiningResult {
        algorithm: Algorithm::Rsp,
        patterns,
        config: *config,
        window: db.window(),
        object_count: db.object_count(),
        threshold,
        scan_count: 1 + u32::from(second_pass),
        peak_counter_count: counters + frequent.len(),
        timings: Timings {
            scan_ms,
            count_ms,
            total_ms: elapsed_ms(started),
        },
    })
}
