//! Vertex labels and the lexicographic order that encodes the weak
//! topological order.
//!
//! A [`Label`] is a sequence of `(vertex, rank)` entries with strictly
//! increasing ranks. Comparing two labels means comparing their rank
//! sequences with an [`Rank::INFINITY`] sentinel appended, so a label that
//! is a strict prefix of another compares *greater* (the sentinel beats any
//! finite rank). Along every arc `(x, y)` of the maintained graph the rank
//! sequences descend: `cmp_lex(l(x), l(y))` is never `Less`, which is what
//! lets the searches prune.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::graph::VertexId;

/// A vertex rank: a positive integer drawn from a 63-bit universe, or the
/// `INFINITY` sentinel carried by unranked vertices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(u64);

impl Rank {
    /// Compares strictly greater than every finite rank.
    pub const INFINITY: Rank = Rank(u64::MAX);

    /// Largest admissible finite value (`2^63`).
    pub const MAX_FINITE: u64 = 1 << 63;

    /// A finite rank. Panics on zero or on values outside the finite
    /// universe; those are programmer errors, not data errors.
    pub fn finite(value: u64) -> Rank {
        assert!(
            (1..=Self::MAX_FINITE).contains(&value),
            "finite rank out of range: {value}"
        );
        Rank(value)
    }

    pub fn is_finite(self) -> bool {
        self != Self::INFINITY
    }

    /// Raw value of a finite rank. Panics on `INFINITY`.
    pub fn value(self) -> u64 {
        assert!(self.is_finite(), "INFINITY has no finite value");
        self.0
    }
}

impl fmt::Debug for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "Rank({})", self.0)
        } else {
            write!(f, "Rank(inf)")
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "inf")
        }
    }
}

/// One `(vertex, rank)` label entry. Entry equality is by vertex *and*
/// rank, so a rank change invalidates every label containing the old entry.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct LabelEntry {
    pub vertex: VertexId,
    pub rank: Rank,
}

impl LabelEntry {
    pub fn new(vertex: VertexId, rank: Rank) -> Self {
        debug_assert!(rank.is_finite(), "label entries carry finite ranks");
        LabelEntry { vertex, rank }
    }
}

/// A (possibly empty) sequence of label entries with strictly increasing
/// finite ranks.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Label {
    entries: Vec<LabelEntry>,
}

impl Label {
    pub fn empty() -> Label {
        Label::default()
    }

    /// Label of an isolated ranked vertex: the vertex itself.
    pub fn singleton(vertex: VertexId, rank: Rank) -> Label {
        Label {
            entries: vec![LabelEntry::new(vertex, rank)],
        }
    }

    /// Builds a label from entries, checking the increasing-rank invariant
    /// in debug builds.
    pub fn from_entries(entries: Vec<LabelEntry>) -> Label {
        debug_assert!(
            entries.windows(2).all(|w| w[0].rank < w[1].rank),
            "label ranks must strictly increase: {entries:?}"
        );
        Label { entries }
    }

    pub fn entries(&self) -> &[LabelEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.entries.iter().any(|e| e.vertex == v)
    }

    pub fn last(&self) -> Option<LabelEntry> {
        self.entries.last().copied()
    }

    /// The entry ranks in order with one trailing `INFINITY` sentinel.
    pub fn rank_sequence(&self) -> Vec<Rank> {
        let mut seq: Vec<Rank> = self.entries.iter().map(|e| e.rank).collect();
        seq.push(Rank::INFINITY);
        seq
    }
}

impl fmt::Display for Label {
    /// Renders `v17#42|v3#99`; the empty label renders as the empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "v{}#{}", e.vertex, e.rank)?;
        }
        Ok(())
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    /// Lexicographic order of the rank sequences with the infinite sentinel
    /// appended: at the first differing position the smaller rank wins, and
    /// on a common prefix the *shorter* label is the greater one. Vertex
    /// ids break ties only between labels that are not drawn from a common
    /// rank assignment; with distinct ranks equal sequences imply equal
    /// labels.
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.entries.len().min(other.entries.len());
        for i in 0..n {
            match self.entries[i].rank.cmp(&other.entries[i].rank) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        match self.entries.len().cmp(&other.entries.len()) {
            Ordering::Less => Ordering::Greater,
            Ordering::Greater => Ordering::Less,
            Ordering::Equal => {
                for i in 0..n {
                    match self.entries[i].vertex.cmp(&other.entries[i].vertex) {
                        Ordering::Equal => {}
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
        }
    }
}

/// Compares two labels in the order their rank sequences induce.
///
/// `Less` means `a`'s rank sequence is lexicographically smaller, i.e. `a`
/// sits later in the weak topological order; along any arc `(x, y)` the
/// result of `cmp_lex(l(x), l(y))` is `Greater` or `Equal`, never `Less`.
pub fn cmp_lex(a: &Label, b: &Label) -> Ordering {
    a.cmp(b)
}

/// Longest common prefix of two labels by exact entry equality.
pub fn lcp(a: &Label, b: &Label) -> Label {
    let n = lcp_len(a, b);
    Label {
        entries: a.entries[..n].to_vec(),
    }
}

fn lcp_len(a: &Label, b: &Label) -> usize {
    a.entries
        .iter()
        .zip(b.entries.iter())
        .take_while(|(x, y)| x == y)
        .count()
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MergeError {
    /// The destination vertex occurs in the source label, which means the
    /// destination reaches the source: merging across that arc would close
    /// a cycle and the caller should have detected it first.
    #[error("vertex {0} occurs in the source label; the arc closes a cycle")]
    DestinationInSource(VertexId),
}

/// New label for the head of an arc `(x, y)`: the common prefix of
/// `l(x)` and `l(y)`, then the maximal following run of `l(x)` entries with
/// rank below `dst_rank`, then `(dst_vertex, dst_rank)` if the rank is
/// finite.
///
/// Re-merging a source whose label compares `Greater` is a no-op; the
/// result therefore never compares `Greater` to `dst_label`, and the source
/// label never compares `Less` to the result (the weak order holds along
/// the new arc).
pub fn merge_for_arc(
    src: &Label,
    dst_label: &Label,
    dst_vertex: VertexId,
    dst_rank: Rank,
) -> Result<Label, MergeError> {
    if src.contains_vertex(dst_vertex) {
        return Err(MergeError::DestinationInSource(dst_vertex));
    }
    if cmp_lex(src, dst_label) == Ordering::Greater {
        return Ok(dst_label.clone());
    }
    let p = lcp_len(src, dst_label);
    let mut out: Vec<LabelEntry> = src.entries[..p].to_vec();
    for e in &src.entries[p..] {
        if e.rank < dst_rank {
            out.push(*e);
        } else {
            break;
        }
    }
    if dst_rank.is_finite() {
        out.push(LabelEntry::new(dst_vertex, dst_rank));
    }
    Ok(Label::from_entries(out))
}
