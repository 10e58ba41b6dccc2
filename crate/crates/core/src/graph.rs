//! Weighted directed peer-review networks.
//!
//! Rows are reviewers and columns authors: the weight of edge `(v, u)` is
//! the number of qualified trailers person `v` left on commits authored by
//! `u`. An author's own sign-off lands on the diagonal; the analysis view
//! drops the diagonal entirely.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identity::{IdentityTable, PersonId};
use crate::ingest::{CommitRecord, Subsystem};
use crate::trailers::{Trailer, TrailerKind};

/// Per-kind trailer counts of a single edge.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub signed: u64,
    pub acked: u64,
    pub reviewed: u64,
}

impl EdgeCounts {
    pub fn of_kind(kind: TrailerKind, n: u64) -> Self {
        let mut counts = EdgeCounts::default();
        counts.add(kind, n);
        counts
    }

    pub fn add(&mut self, kind: TrailerKind, n: u64) {
        match kind {
            TrailerKind::Signed => self.signed += n,
            TrailerKind::Acked => self.acked += n,
            TrailerKind::Reviewed => self.reviewed += n,
        }
    }

    pub fn get(&self, kind: TrailerKind) -> u64 {
        match kind {
            TrailerKind::Signed => self.signed,
            TrailerKind::Acked => self.acked,
            TrailerKind::Reviewed => self.reviewed,
        }
    }

    pub fn weight(&self) -> u64 {
        self.signed + self.acked + self.reviewed
    }

    fn scaled(&self, k: u64) -> Self {
        EdgeCounts {
            signed: self.signed * k,
            acked: self.acked * k,
            reviewed: self.reviewed * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewNetwork {
    pub window: String,
    pub subsystem: Subsystem,
    nodes: Vec<PersonId>,
    edges: BTreeMap<(PersonId, PersonId), EdgeCounts>,
}

/// Trailers and authors that could not be mapped to a person.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub commits: usize,
    pub attributed_trailers: u64,
    pub unresolved: u64,
    pub unresolved_names: BTreeSet<String>,
}

impl ReviewNetwork {
    pub fn empty(window: impl Into<String>, subsystem: Subsystem) -> Self {
        ReviewNetwork {
            window: window.into(),
            subsystem,
            nodes: Vec::new(),
            edges: BTreeMap::new(),
        }
    }

    /// Assembles a network from explicit nodes and `(reviewer, author,
    /// counts)` edges. Edge endpoints are added as nodes when missing;
    /// repeated edges accumulate.
    pub fn from_edges(
        window: impl Into<String>,
        subsystem: Subsystem,
        nodes: impl IntoIterator<Item = PersonId>,
        edges: impl IntoIterator<Item = (PersonId, PersonId, EdgeCounts)>,
    ) -> Self {
        let mut node_set: BTreeSet<PersonId> = nodes.into_iter().collect();
        let mut map: BTreeMap<(PersonId, PersonId), EdgeCounts> = BTreeMap::new();
        for (reviewer, author, counts) in edges {
            if counts.weight() == 0 {
                continue;
            }
            node_set.insert(reviewer);
            node_set.insert(author);
            let entry = map.entry((reviewer, author)).or_default();
            for kind in TrailerKind::ALL {
                entry.add(kind, counts.get(kind));
            }
        }
        ReviewNetwork {
            window: window.into(),
            subsystem,
            nodes: node_set.into_iter().collect(),
            edges: map,
        }
    }

    /// Nodes in ascending person id order.
    pub fn nodes(&self) -> &[PersonId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, person: PersonId) -> bool {
        self.nodes.binary_search(&person).is_ok()
    }

    pub fn index_of(&self, person: PersonId) -> Option<usize> {
        self.nodes.binary_search(&person).ok()
    }

    /// Stored edges `(reviewer, author) -> counts`, all with weight ≥ 1.
    pub fn edges(&self) -> impl Iterator<Item = (PersonId, PersonId, &EdgeCounts)> + '_ {
        self.edges.iter().map(|(&(r, a), c)| (r, a, c))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, reviewer: PersonId, author: PersonId) -> u64 {
        self.edges
            .get(&(reviewer, author))
            .map_or(0, EdgeCounts::weight)
    }

    pub fn counts(&self, reviewer: PersonId, author: PersonId) -> Option<&EdgeCounts> {
        self.edges.get(&(reviewer, author))
    }

    /// Row of `reviewer`: every author they reviewed with the weight.
    pub fn row(&self, reviewer: PersonId) -> impl Iterator<Item = (PersonId, u64)> + '_ {
        self.edges
            .range((reviewer, PersonId(0))..=(reviewer, PersonId(u32::MAX)))
            .map(|(&(_, author), c)| (author, c.weight()))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(EdgeCounts::weight).sum()
    }

    /// Self-sign-off counts aligned with [`nodes`](Self::nodes).
    pub fn diagonal(&self) -> Vec<u64> {
        self.nodes.iter().map(|&p| self.weight(p, p)).collect()
    }

    /// Copy of the network without diagonal entries.
    pub fn strip_diagonal(&self) -> ReviewNetwork {
        ReviewNetwork {
            window: self.window.clone(),
            subsystem: self.subsystem.clone(),
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .filter(|((r, a), _)| r != a)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    pub fn has_diagonal(&self) -> bool {
        self.edges.keys().any(|(r, a)| r == a)
    }

    /// Row sum of `person`: reviews performed. Call on the diagonal-stripped
    /// view to exclude self-sign-offs.
    pub fn out_strength(&self, person: PersonId) -> Result<u64> {
        if !self.contains(person) {
            return Err(Error::UnknownNode(person.0));
        }
        Ok(self.row(person).map(|(_, w)| w).sum())
    }

    /// Column sum of `person`: reviews received.
    pub fn in_strength(&self, person: PersonId) -> Result<u64> {
        if !self.contains(person) {
            return Err(Error::UnknownNode(person.0));
        }
        Ok(self
            .edges
            .iter()
            .filter(|((_, a), _)| *a == person)
            .map(|(_, c)| c.weight())
            .sum())
    }

    /// Out- and in-strengths of every node in one pass, aligned with
    /// [`nodes`](Self::nodes).
    pub fn strengths(&self) -> (Vec<u64>, Vec<u64>) {
        let mut out = vec![0; self.nodes.len()];
        let mut inc = vec![0; self.nodes.len()];
        for (&(r, a), c) in &self.edges {
            if let Some(i) = self.index_of(r) {
                out[i] += c.weight();
            }
            if let Some(j) = self.index_of(a) {
                inc[j] += c.weight();
            }
        }
        (out, inc)
    }

    /// Network with every edge count multiplied by `k`.
    pub fn scaled(&self, k: u64) -> ReviewNetwork {
        ReviewNetwork {
            window: self.window.clone(),
            subsystem: self.subsystem.clone(),
            nodes: self.nodes.clone(),
            edges: self.edges.iter().map(|(key, c)| (*key, c.scaled(k))).collect(),
        }
    }
}

/// Counts every resolvable trailer of the given commits as a review of the
/// commit's author. Commits are expected to be filtered to one subsystem
/// and window already.
pub fn build_network<'a, I>(
    commits: I,
    identities: &IdentityTable,
    subsystem: Subsystem,
    window: &str,
) -> (ReviewNetwork, BuildStats)
where
    I: IntoIterator<Item = (&'a CommitRecord, &'a [Trailer])>,
{
    let mut stats = BuildStats::default();
    let mut nodes: BTreeSet<PersonId> = BTreeSet::new();
    let mut edges: BTreeMap<(PersonId, PersonId), EdgeCounts> = BTreeMap::new();

    for (commit, trailers) in commits {
        stats.commits += 1;
        let Some(author) = identities.resolve(&commit.author_name) else {
            stats.unresolved += 1;
            stats.unresolved_names.insert(commit.author_name.clone());
            log::warn!("commit {}: author {:?} not in identity table", commit.hash, commit.author_name);
            continue;
        };
        nodes.insert(author);
        for trailer in trailers {
            match identities.resolve(&trailer.raw_name) {
                Some(reviewer) => {
                    nodes.insert(reviewer);
                    edges.entry((reviewer, author)).or_default().add(trailer.kind, 1);
                    stats.attributed_trailers += 1;
                }
                None => {
                    stats.unresolved += 1;
                    stats.unresolved_names.insert(trailer.raw_name.clone());
                }
            }
        }
    }

    let network = ReviewNetwork {
        window: window.to_string(),
        subsystem,
        nodes: nodes.into_iter().collect(),
        edges,
    };
    (network, stats)
}
