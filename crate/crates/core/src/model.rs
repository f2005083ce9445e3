//! Items, sequences and patterns, plus the subsequence relation every miner
//! is built on.
//!
//! Events are singleton items. A [`Sequence`] is the time-ordered list of
//! items one object produced inside a window; a [`Pattern`] has the same shape
//! but plays the role of a mining candidate or result. Both render in the
//! canonical `10:20:50` form.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Separator of the canonical textual pattern form.
pub const SEPARATOR: char = ':';

/// An atomic event symbol (a fault-signal code, a product id, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Item(pub u32);

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Item {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty item".to_owned());
        }
        s.parse::<u32>()
            .map(Item)
            .map_err(|_| format!("item {s:?} is not a non-negative integer id"))
    }
}

/// Identifier of the object (customer, location) a record belongs to.
///
/// Ordered numerically when both ids are integers, so `2 < 10`; any
/// non-numeric id sorts after all numeric ones, lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<u64> {
        self.0.parse().ok()
    }
}

impl Ord for ObjectId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for ObjectId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

fn write_joined(items: &[Item], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            write!(f, "{SEPARATOR}")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

fn parse_joined(s: &str) -> Result<Vec<Item>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty pattern".to_owned());
    }
    s.split(SEPARATOR).map(str::parse).collect()
}

/// The time-ordered items of one object. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence(Vec<Item>);

impl Sequence {
    /// Returns `None` for an empty item list.
    pub fn new(items: Vec<Item>) -> Option<Self> {
        (!items.is_empty()).then_some(Self(items))
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, pattern: &Pattern) -> bool {
        is_subsequence(pattern.items(), self.items())
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(&self.0, f)
    }
}

impl FromStr for Sequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_joined(s).map(Self)
    }
}

/// A serial episode: the unit of support counting. Never empty.
///
/// Patterns order by length first, then lexicographically by item, which is
/// the canonical output order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern(Vec<Item>);

impl Pattern {
    pub fn new(items: Vec<Item>) -> Option<Self> {
        (!items.is_empty()).then_some(Self(items))
    }

    pub fn from_slice(items: &[Item]) -> Option<Self> {
        Self::new(items.to_vec())
    }

    pub fn single(item: Item) -> Self {
        Self(vec![item])
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_subsequence_of(&self, target: &Sequence) -> bool {
        is_subsequence(self.items(), target.items())
    }

    /// The partition this pattern is counted in: its first item.
    pub fn prefix_key(&self) -> Item {
        self.0[0]
    }

    pub fn contains_item(&self, item: Item) -> bool {
        self.0.contains(&item)
    }
}

impl Ord for Pattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Pattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Hash and Eq agree with the inner slice, so hash maps keyed by Pattern can be
// probed with `&[Item]`. Ord does NOT agree (length-first), so never probe an
// ordered map this way.
impl Borrow<[Item]> for Pattern {
    fn borrow(&self) -> &[Item] {
        &self.0
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(&self.0, f)
    }
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_joined(s).map(Self)
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Frequent items with their per-object support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequentItemTable {
    entries: BTreeMap<Item, u32>,
    threshold: u32,
}

impl FrequentItemTable {
    /// Keeps only the entries whose count reaches `threshold`.
    pub fn from_counts(counts: impl IntoIterator<Item = (Item, u32)>, threshold: u32) -> Self {
        let entries = counts.into_iter().filter(|&(_, count)| count >= threshold).collect();
        Self { entries, threshold }
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn contains(&self, item: Item) -> bool {
        self.entries.contains_key(&item)
    }

    pub fn support(&self, item: Item) -> Option<u32> {
        self.entries.get(&item).copied()
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> &BTreeMap<Item, u32> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// True iff `candidate` embeds into `target` at strictly increasing
/// positions; gaps are allowed.
pub fn is_subsequence(candidate: &[Item], target: &[Item]) -> bool {
    let mut wanted = candidate.iter().peekable();
    for item in target {
        match wanted.peek() {
            Some(&next) if next == item => {
                wanted.next();
            }
            Some(_) => {}
            None => break,
        }
    }
    wanted.peek().is_none()
}

/// Drops every item that is not frequent, keeping order. `None` when nothing
/// survives.
pub fn reduce_sequence(seq: &Sequence, frequent: &FrequentItemTable) -> Option<Sequence> {
    Sequence::new(
        seq.items()
            .iter()
            .copied()
            .filter(|&item| frequent.contains(item))
            .collect(),
    )
}

/// First item of `pattern`.
pub fn prefix_key(pattern: &Pattern) -> Item {
    pattern.prefix_key()
}

/// Default limit on the length of a sequence whose complete subsequence set
/// may be enumerated.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Walks the distinct subsequences of one item list.
///
/// Each distinct subsequence is produced exactly once, through its leftmost
/// embedding: from a position `p`, the walk extends only with the first
/// occurrence at or after `p` of each distinct item.
#[derive(Debug)]
pub struct SubsequenceWalker<'a> {
    items: &'a [Item],
    alphabet: Vec<Item>,
    // next[p * alphabet.len() + a]: smallest index >= p holding alphabet[a]
    next: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl<'a> SubsequenceWalker<'a> {
    pub fn new(items: &'a [Item]) -> Self {
        let alphabet: Vec<Item> = items.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let k = alphabet.len();
        let n = items.len();
        let mut next = vec![NONE; (n + 1) * k];
        for p in (0..n).rev() {
            let (row, below) = next.split_at_mut((p + 1) * k);
            row[p * k..].copy_from_slice(&below[..k]);
            let a = alphabet.binary_search(&items[p]).expect("item in alphabet");
            row[p * k + a] = p as u32;
        }
        Self { items, alphabet, next }
    }

    /// Distinct items of the sequence, ascending.
    pub fn alphabet(&self) -> &[Item] {
        &self.alphabet
    }

    pub fn sequence_len(&self) -> usize {
        self.items.len()
    }

    /// Calls `visit` once per distinct subsequence whose length lies in
    /// `min_len..=max_len`.
    pub fn for_each(&self, min_len: usize, max_len: usize, mut visit: impl FnMut(&[Item])) {
        if max_len == 0 {
            return;
        }
        let mut buf = Vec::with_capacity(max_len.min(self.items.len()));
        self.walk(0, &mut buf, min_len, max_len, &mut visit);
    }

    /// Like [`for_each`](Self::for_each), restricted to subsequences that
    /// start with `first`.
    pub fn for_each_with_prefix(&self, first: Item, min_len: usize, max_len: usize, mut visit: impl FnMut(&[Item])) {
        if max_len == 0 {
            return;
        }
        let Ok(a) = self.alphabet.binary_search(&first) else {
            return;
        };
        let pos = self.next[a] as usize;
        let mut buf = Vec::with_capacity(max_len.min(self.items.len()));
        buf.push(first);
        if min_len <= 1 {
            visit(&buf);
        }
        if max_len > 1 {
            self.walk(pos + 1, &mut buf, min_len, max_len, &mut visit);
        }
    }

    /// Tree-shaped walk over the distinct subsequences that start with
    /// `first`, excluding `first` alone. `step(parent, item)` is called once
    /// per subsequence, as an extension of its parent (the subsequence minus
    /// its last item), and returns the state handed to that subsequence's own
    /// extensions.
    pub fn walk_from<S: Copy>(&self, first: Item, max_len: usize, root: S, step: &mut impl FnMut(S, Item) -> S) {
        if max_len < 2 {
            return;
        }
        let Ok(a) = self.alphabet.binary_search(&first) else {
            return;
        };
        self.descend(self.next[a] as usize + 1, 1, max_len, root, step);
    }

    fn descend<S: Copy>(
        &self,
        from: usize,
        depth: usize,
        max_len: usize,
        state: S,
        step: &mut impl FnMut(S, Item) -> S,
    ) {
        let k = self.alphabet.len();
        if from >= self.items.len() {
            return;
        }
        for (a, &pos) in self.next[from * k..(from + 1) * k].iter().enumerate() {
            if pos == NONE {
                continue;
            }
            let child = step(state, self.alphabet[a]);
            if depth + 1 < max_len {
                self.descend(pos as usize + 1, depth + 1, max_len, child, step);
            }
        }
    }

    fn walk(&self, from: usize, buf: &mut Vec<Item>, min_len: usize, max_len: usize, visit: &mut impl FnMut(&[Item])) {
        let k = self.alphabet.len();
        if from >= self.items.len() {
            return;
        }
        let row = &self.next[from * k..(from + 1) * k];
        for (a, &pos) in row.iter().enumerate() {
            if pos == NONE {
                continue;
            }
            buf.push(self.alphabet[a]);
            if buf.len() >= min_len {
                visit(buf);
            }
            if buf.len() < max_len {
                self.walk(pos as usize + 1, buf, min_len, max_len, visit);
            }
            buf.pop();
        }
    }
}

/// Checks the enumeration cap and resolves an optional length bound.
pub(crate) fn effective_max_len(seq_len: usize, max_len: Option<usize>, cap: usize) -> Result<usize> {
    match max_len {
        Some(limit) => Ok(limit.min(seq_len)),
        None if seq_len > cap => Err(Error::CapExceeded { len: seq_len, cap }),
        None => Ok(seq_len),
    }
}

/// All distinct non-empty subsequences of `seq` with length at most
/// `max_len` (`None` for unbounded, subject to `cap`).
pub fn enumerate_distinct_subsequences(
    seq: &Sequence,
    max_len: Option<usize>,
    cap: usize,
) -> Result<BTreeSet<Pattern>> {
    let limit = effective_max_len(seq.len(), max_len, cap)?;
    let mut out = BTreeSet::new();
    SubsequenceWalker::new(seq.items()).for_each(1, limit, |sub| {
        out.insert(Pattern(sub.to_vec()));
    });
    Ok(out)
}
