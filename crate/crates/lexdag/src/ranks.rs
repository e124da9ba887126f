//! Rank assignments: which vertices (or arcs) carry ranks, and with what
//! values.
//!
//! Finite ranks are drawn uniformly from a 63-bit universe and redrawn on
//! collision, so they are pairwise distinct and their relative order is a
//! uniformly random permutation. Ranks never need renumbering when vertices
//! or arcs arrive later.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::VertexId;
use crate::label::Rank;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RankMode {
    /// Each vertex ranked independently with probability `q`.
    VertexQ,
    /// Every vertex ranked (`q = 1`).
    Full,
    /// Each arc ranked with probability `q`; a vertex's rank is the minimum
    /// rank of its ranked incoming arcs.
    ArcQ,
}

impl RankMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RankMode::VertexQ => "vertex-q",
            RankMode::Full => "full",
            RankMode::ArcQ => "arc-q",
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum RankError {
    #[error("q must lie in (0, 1], got {0}")]
    InvalidQ(f64),
    #[error("presets need n >= 2, got {0}")]
    TooFewVertices(usize),
    #[error("operation requires {expected:?} mode, assignment is {actual:?}")]
    WrongMode {
        expected: RankMode,
        actual: RankMode,
    },
}

/// Seed-deterministic rank assignment. Once built, a `VertexQ` or `Full`
/// assignment is read-only; an `ArcQ` assignment additionally rolls a rank
/// for every inserted arc via [`RankAssignment::arc_rank_on_insert`].
#[derive(Clone, Debug)]
pub struct RankAssignment {
    mode: RankMode,
    q: f64,
    seed: u64,
    vertex_rank: Vec<Rank>,
    /// ArcQ only: one slot per inserted arc, in insertion order.
    arc_rank: Vec<((VertexId, VertexId), Option<Rank>)>,
    used: HashSet<u64>,
    rng: ChaCha8Rng,
}

fn fresh_rank(rng: &mut ChaCha8Rng, used: &mut HashSet<u64>) -> Rank {
    loop {
        let v = rng.random_range(1..=Rank::MAX_FINITE);
        if used.insert(v) {
            return Rank::finite(v);
        }
    }
}

/// Ranks each of `n` vertices independently with probability `q`.
pub fn sample_vertex_scheme(n: usize, q: f64, seed: u64) -> Result<RankAssignment, RankError> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(RankError::InvalidQ(q));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = HashSet::new();
    let mut vertex_rank = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.random_bool(q) {
            vertex_rank.push(fresh_rank(&mut rng, &mut used));
        } else {
            vertex_rank.push(Rank::INFINITY);
        }
    }
    Ok(RankAssignment {
        mode: if q == 1.0 {
            RankMode::Full
        } else {
            RankMode::VertexQ
        },
        q,
        seed,
        vertex_rank,
        arc_rank: Vec::new(),
        used,
        rng,
    })
}

/// Ranks every vertex; relative order of the ranks is uniformly random.
pub fn full_scheme(n: usize, seed: u64) -> RankAssignment {
    sample_vertex_scheme(n, 1.0, seed).expect("q = 1 is always valid")
}

/// `ArcQ` assignment over `n` initially unranked vertices.
pub fn arc_scheme(n: usize, q: f64, seed: u64) -> Result<RankAssignment, RankError> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(RankError::InvalidQ(q));
    }
    Ok(RankAssignment {
        mode: RankMode::ArcQ,
        q,
        seed,
        vertex_rank: vec![Rank::INFINITY; n],
        arc_rank: Vec::new(),
        used: HashSet::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl RankAssignment {
    pub fn mode(&self) -> RankMode {
        self.mode
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_rank.len()
    }

    /// Rank of `v`; `INFINITY` when unranked.
    pub fn rank(&self, v: VertexId) -> Rank {
        self.vertex_rank[v as usize]
    }

    pub fn is_ranked(&self, v: VertexId) -> bool {
        self.rank(v).is_finite()
    }

    pub fn ranked_count(&self) -> usize {
        self.vertex_rank.iter().filter(|r| r.is_finite()).count()
    }

    /// Vertices paired with their finite ranks, in vertex order.
    pub fn ranked_vertices(&self) -> impl Iterator<Item = (VertexId, Rank)> + '_ {
        self.vertex_rank
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_finite())
            .map(|(v, r)| (v as VertexId, *r))
    }

    /// ArcQ only: per-arc rank slots in insertion order.
    pub fn arc_ranks(&self) -> &[((VertexId, VertexId), Option<Rank>)] {
        &self.arc_rank
    }

    /// Adds a fresh vertex, ranked according to the scheme (Bernoulli(q)
    /// for `VertexQ`, always for `Full`, never directly for `ArcQ`).
    pub fn add_vertex(&mut self) -> VertexId {
        let v = self.vertex_rank.len() as VertexId;
        let rank = match self.mode {
            RankMode::ArcQ => Rank::INFINITY,
            RankMode::Full | RankMode::VertexQ => {
                if self.rng.random_bool(self.q) {
                    fresh_rank(&mut self.rng, &mut self.used)
                } else {
                    Rank::INFINITY
                }
            }
        };
        self.vertex_rank.push(rank);
        v
    }

    /// Rolls a rank for a newly inserted arc and folds it into the head
    /// vertex's rank (the minimum over its ranked incoming arcs). Returns
    /// the arc's rank, if any, and whether the head vertex's rank strictly
    /// decreased.
    pub fn arc_rank_on_insert(
        &mut self,
        arc: (VertexId, VertexId),
    ) -> Result<(Option<Rank>, bool), RankError> {
        if self.mode != RankMode::ArcQ {
            return Err(RankError::WrongMode {
                expected: RankMode::ArcQ,
                actual: self.mode,
            });
        }
        let ranked = self.rng.random_bool(self.q);
        let rank = if ranked {
            Some(fresh_rank(&mut self.rng, &mut self.used))
        } else {
            None
        };
        self.arc_rank.push((arc, rank));
        let v = arc.1 as usize;
        let mut lowered = false;
        if let Some(r) = rank {
            if r < self.vertex_rank[v] {
                self.vertex_rank[v] = r;
                lowered = true;
            }
        }
        Ok((rank, lowered))
    }
}

#[cfg(test)]
impl RankAssignment {
    /// Pins an explicit rank on one vertex; unit-test scaffolding for
    /// hand-built scenarios.
    pub(crate) fn force_rank_for_tests(&mut self, v: VertexId, r: Rank) {
        assert!(self.used.insert(r.value()), "duplicate forced rank");
        self.vertex_rank[v as usize] = r;
    }
}

/// Named `q` choices. Each trades backward-search width against label
/// length and update volume differently.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QPreset {
    /// `1 / sqrt(n)` — sparse-graph total-time choice.
    Sparse32,
    /// `cbrt(ln n / n)` — balances forward and backward search times.
    Balanced23,
    /// `1` — no backward search beyond immediate in-neighbors.
    FullRank,
    /// `sqrt(ln n / n)` — message-count optimum for vertex ranking.
    MsgVertex,
    /// `1 / sqrt(m)` — message-count optimum for arc ranking.
    MsgArc,
}

impl QPreset {
    pub fn as_str(self) -> &'static str {
        match self {
            QPreset::Sparse32 => "sparse32",
            QPreset::Balanced23 => "balanced23",
            QPreset::FullRank => "full",
            QPreset::MsgVertex => "msg-vertex",
            QPreset::MsgArc => "msg-arc",
        }
    }

    pub fn parse(name: &str) -> Option<QPreset> {
        match name {
            "sparse32" => Some(QPreset::Sparse32),
            "balanced23" => Some(QPreset::Balanced23),
            "full" => Some(QPreset::FullRank),
            "msg-vertex" => Some(QPreset::MsgVertex),
            "msg-arc" => Some(QPreset::MsgArc),
            _ => None,
        }
    }
}

/// Evaluates a preset at instance size `(n, m)`, clamped into `(0, 1]`.
pub fn preset_q(preset: QPreset, n: usize, m: usize) -> Result<f64, RankError> {
    if n < 2 {
        return Err(RankError::TooFewVertices(n));
    }
    let nf = n as f64;
    let q = match preset {
        QPreset::Sparse32 => 1.0 / nf.sqrt(),
        QPreset::Balanced23 => (nf.ln() / nf).cbrt(),
        QPreset::FullRank => 1.0,
        QPreset::MsgVertex => (nf.ln() / nf).sqrt(),
        QPreset::MsgArc => 1.0 / (m.max(1) as f64).sqrt(),
    };
    Ok(q.clamp(f64::MIN_POSITIVE, 1.0))
}
