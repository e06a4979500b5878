//! Allelic partitions: sparse multiplicity vectors.
//!
//! A partition of `n` items into groups is stored as `i -> m_i`, the number
//! of groups of size `i`. Only positive counts are stored, so the empty map
//! is the empty partition `e0` with no items and no groups.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate`]; `p(40) = 37338`.
pub const MAX_ENUMERATION_SIZE: usize = 40;

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AllelicPartition {
    counts: BTreeMap<usize, usize>,
    size: usize,
    groups: usize,
}

/// One jump of the chain, expressed on multiplicities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionEvent {
    /// `m + e_1`: a new family of size one.
    NewFamily,
    /// `m - e_i + e_{i+1}`: a family of size `i` gains a member.
    GrowthAt(usize),
    /// `m - e_i + e_{i-1}`: a family of size `i` loses a member; at `i = 1`
    /// the family goes extinct.
    DeathAt(usize),
}

impl TransitionEvent {
    /// Change in the number of items.
    pub fn size_delta(self) -> i64 {
        match self {
            TransitionEvent::NewFamily | TransitionEvent::GrowthAt(_) => 1,
            TransitionEvent::DeathAt(_) => -1,
        }
    }

    pub fn kind_str(self) -> &'static str {
        match self {
            TransitionEvent::NewFamily => "new_family",
            TransitionEvent::GrowthAt(_) => "growth",
            TransitionEvent::DeathAt(_) => "death",
        }
    }

    /// Group size the event acts on; `0` for a new family.
    pub fn index(self) -> usize {
        match self {
            TransitionEvent::NewFamily => 0,
            TransitionEvent::GrowthAt(i) | TransitionEvent::DeathAt(i) => i,
        }
    }
}

impl fmt::Display for TransitionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionEvent::NewFamily => write!(f, "NewFamily"),
            TransitionEvent::GrowthAt(i) => write!(f, "GrowthAt({i})"),
            TransitionEvent::DeathAt(i) => write!(f, "DeathAt({i})"),
        }
    }
}

impl AllelicPartition {
    /// The empty partition `e0`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a partition from `(group size, multiplicity)` pairs. Zero
    /// multiplicities are dropped; repeated sizes accumulate.
    pub fn from_multiplicities<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut p = Self::empty();
        for (i, m) in pairs {
            if i == 0 {
                return Err(Error::domain("group sizes must be positive"));
            }
            if m > 0 {
                p.add(i, m);
            }
        }
        Ok(p)
    }

    /// Builds a partition from a list of family sizes, e.g. `[1, 2]`.
    pub fn from_family_sizes(sizes: &[usize]) -> Result<Self> {
        Self::from_multiplicities(sizes.iter().map(|&s| (s, 1)))
    }

    /// `s(m) = sum_i i * m_i`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `k(m) = sum_i m_i`.
    pub fn num_groups(&self) -> usize {
        self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `m_i`, zero when `i` is not stored.
    pub fn multiplicity(&self, i: usize) -> usize {
        self.counts.get(&i).copied().unwrap_or(0)
    }

    /// Stored `(i, m_i)` pairs in increasing `i`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&i, &m)| (i, m))
    }

    /// Number of distinct group sizes present.
    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    /// Largest group size present, `0` for `e0`.
    pub fn max_group_size(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// Dense vector `(m_1, ..., m_len)`.
    pub fn dense(&self, len: usize) -> Vec<usize> {
        (1..=len).map(|i| self.multiplicity(i)).collect()
    }

    /// Family sizes in decreasing order (the integer partition).
    pub fn family_sizes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.groups);
        for (&i, &m) in self.counts.iter().rev() {
            out.extend(std::iter::repeat_n(i, m));
        }
        out
    }

    pub fn is_applicable(&self, event: TransitionEvent) -> bool {
        match event {
            TransitionEvent::NewFamily => true,
            TransitionEvent::GrowthAt(i) | TransitionEvent::DeathAt(i) => {
                i >= 1 && self.multiplicity(i) >= 1
            }
        }
    }

    /// Applies `event`, returning the new partition.
    pub fn apply_event(&self, event: TransitionEvent) -> Result<Self> {
        let mut next = self.clone();
        next.apply_in_place(event)?;
        Ok(next)
    }

    /// In-place variant of [`apply_event`](Self::apply_event); leaves `self`
    /// untouched on error.
    pub fn apply_in_place(&mut self, event: TransitionEvent) -> Result<()> {
        if !self.is_applicable(event) {
            return Err(Error::InapplicableEvent {
                event: event.to_string(),
                partition: self.encode(),
            });
        }
        match event {
            TransitionEvent::NewFamily => self.add(1, 1),
            TransitionEvent::GrowthAt(i) => {
                self.remove_one(i);
                self.add(i + 1, 1);
            }
            TransitionEvent::DeathAt(i) => {
                self.remove_one(i);
                if i > 1 {
                    self.add(i - 1, 1);
                }
            }
        }
        Ok(())
    }

    fn add(&mut self, i: usize, m: usize) {
        *self.counts.entry(i).or_insert(0) += m;
        self.size += i * m;
        self.groups += m;
    }

    fn remove_one(&mut self, i: usize) {
        let slot = self
            .counts
            .get_mut(&i)
            .expect("caller checked multiplicity");
        *slot -= 1;
        if *slot == 0 {
            self.counts.remove(&i);
        }
        self.size -= i;
        self.groups -= 1;
    }

    /// Canonical text form: `i^m_i` terms in increasing `i`, `"0"` for `e0`.
    pub fn encode(&self) -> String {
        self.to_string()
    }

    pub fn decode(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl fmt::Display for AllelicPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return write!(f, "0");
        }
        for (n, (i, m)) in self.counts.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "{i}^{m}")?;
        }
        Ok(())
    }
}

impl FromStr for AllelicPartition {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let err = |position: usize, message: &str| Error::Parse {
            position,
            message: message.to_string(),
        };
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(err(0, "empty input"));
        }
        if trimmed == "0" {
            return Ok(Self::empty());
        }
        let base = text.len() - text.trim_start().len();
        let mut out = Self::empty();
        let mut last = 0usize;
        let mut offset = 0usize;
        for token in trimmed.split(' ') {
            let pos = base + offset;
            offset += token.len() + 1;
            if token.is_empty() {
                return Err(err(pos, "terms must be separated by a single space"));
            }
            let (lhs, rhs) = token
                .split_once('^')
                .ok_or_else(|| err(pos, "expected a term of the form i^m"))?;
            let i: usize = lhs
                .parse()
                .map_err(|_| err(pos, "group size is not a positive integer"))?;
            let m: usize = rhs.parse().map_err(|_| {
                err(
                    pos + lhs.len() + 1,
                    "multiplicity is not a positive integer",
                )
            })?;
            if i == 0 {
                return Err(err(pos, "group size must be at least 1"));
            }
            if m == 0 {
                return Err(err(pos + lhs.len() + 1, "multiplicity must be at least 1"));
            }
            if i <= last {
                return Err(err(pos, "group sizes must be strictly increasing"));
            }
            last = i;
            out.add(i, m);
        }
        Ok(out)
    }
}

impl Serialize for AllelicPartition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.encode())
    }
}

impl<'de> Deserialize<'de> for AllelicPartition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every allelic partition of `n`, each exactly once.
///
/// Order is decreasing lexicographic in the dense vector `(m_1, ..., m_n)`,
/// so the all-singletons partition comes first and `n^1` last.
pub fn enumerate(n: usize) -> Result<Vec<AllelicPartition>> {
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::BoundExceeded {
            what: "enumeration size",
            value: n as u64,
            limit: MAX_ENUMERATION_SIZE as u64,
        });
    }
    let mut out = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    fill(1, n, &mut stack, &mut out);
    Ok(out)
}

fn fill(
    i: usize,
    remaining: usize,
    stack: &mut Vec<(usize, usize)>,
    out: &mut Vec<AllelicPartition>,
) {
    if remaining == 0 {
        let p = AllelicPartition::from_multiplicities(stack.iter().copied())
            .expect("sizes are positive");
        out.push(p);
        return;
    }
    if i > remaining {
        return;
    }
    for m in (0..=remaining / i).rev() {
        let rest = remaining - m * i;
        // what is left must be fillable by sizes > i
        if rest != 0 && rest <= i {
            continue;
        }
        if m > 0 {
            stack.push((i, m));
        }
        fill(i + 1, rest, stack, out);
        if m > 0 {
            stack.pop();
        }
    }
}

/// All partitions with `size <= n_max`, grouped by size in increasing order.
pub fn enumerate_up_to(n_max: usize) -> Result<Vec<AllelicPartition>> {
    let mut out = Vec::new();
    for n in 0..=n_max {
        out.extend(enumerate(n)?);
    }
    Ok(out)
}
