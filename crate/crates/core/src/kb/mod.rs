//! ConceptNet semantic network.
//!
//! The network is built once from an assertion dump (see [`build_network`]),
//! optionally persisted to a compact binary index, and then queried
//! read-only. Adjacency is stored CSR-style: one contiguous edge array plus
//! per-concept offsets, each concept's slice sorted by neighbor id so that
//! direct-edge lookups are a binary search and shared-neighbor scans are a
//! linear merge.

mod build;
mod index;
mod parse;

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use build::{build_network, open_dump, Aggregation, IngestConfig, IngestReport, NetworkBuilder};
pub use index::{load_index, persist_index, read_index, write_index, INDEX_MAGIC, INDEX_VERSION};
pub use parse::{
    parse_assertion_line, LineFilter, MalformedLine, ParsedLine, RawAssertion, SkipReason,
    DEFAULT_NEGATIVE_RELATIONS,
};

#[derive(Debug, Error)]
pub enum KbError {
    #[error("unknown concept id {0}")]
    UnknownConcept(u32),
    #[error("index version mismatch: file has {found}, this build reads {expected}")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("corrupt index: {0}")]
    CorruptIndex(String),
    #[error("too many {0} for the index format")]
    Capacity(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense handle of an interned concept. Valid ids are `0..concept_count`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ConceptId(pub u32);

impl ConceptId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Interned relation label (`IsA`, `UsedFor`, ...).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct RelationId(pub u16);

/// Orientation of a stored assertion relative to the concept whose
/// adjacency it sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// owner → neighbor
    Outgoing,
    /// neighbor → owner
    Incoming,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::Outgoing => Direction::Incoming,
            Direction::Incoming => Direction::Outgoing,
        }
    }

    pub(crate) fn to_byte(self) -> u8 {
        match self {
            Direction::Outgoing => 0,
            Direction::Incoming => 1,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Direction::Outgoing),
            1 => Some(Direction::Incoming),
            _ => None,
        }
    }
}

/// One adjacency entry. Every assertion is stored twice: as `Outgoing` in
/// the start concept's list and as `Incoming` in the end concept's list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub neighbor: ConceptId,
    pub relation: RelationId,
    pub direction: Direction,
    pub weight: f64,
}

impl Edge {
    fn sort_key(&self) -> (ConceptId, RelationId, Direction) {
        (self.neighbor, self.relation, self.direction)
    }
}

/// Strongest direct assertion between two concepts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phi {
    pub strength: f64,
    pub relation: RelationId,
    /// `Outgoing` when the assertion runs from the first query concept to
    /// the second.
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NetworkStats {
    pub concepts: usize,
    /// Distinct aggregated assertions (each stored twice in adjacency).
    pub assertions: usize,
}

/// Immutable, indexed semantic network.
#[derive(Debug)]
pub struct SemanticNetwork {
    language: String,
    relations: Vec<String>,
    concepts: Vec<String>,
    offsets: Vec<u32>,
    edges: Vec<Edge>,
    vocabulary: HashMap<String, ConceptId>,
    assertions: usize,
    checksum: OnceLock<u64>,
}

impl PartialEq for SemanticNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.language == other.language
            && self.relations == other.relations
            && self.concepts == other.concepts
            && self.offsets == other.offsets
            && self.edges == other.edges
            && self.vocabulary == other.vocabulary
            && self.assertions == other.assertions
    }
}

impl SemanticNetwork {
    /// Assembles a network from already-aggregated parts. `adjacency[i]`
    /// holds concept `i`'s entries in any order; they are sorted here.
    pub(crate) fn from_parts(
        language: String,
        relations: Vec<String>,
        concepts: Vec<String>,
        adjacency: Vec<Vec<Edge>>,
        assertions: usize,
    ) -> Result<Self, KbError> {
        let total: usize = adjacency.iter().map(Vec::len).sum();
        if total > u32::MAX as usize {
            return Err(KbError::Capacity("adjacency entries"));
        }
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        let mut edges = Vec::with_capacity(total);
        offsets.push(0u32);
        for mut list in adjacency {
            list.sort_unstable_by_key(Edge::sort_key);
            edges.extend(list);
            offsets.push(edges.len() as u32);
        }
        let vocabulary = vocabulary_for(&language, &concepts);
        Ok(SemanticNetwork {
            language,
            relations,
            concepts,
            offsets,
            edges,
            vocabulary,
            assertions,
            checksum: OnceLock::new(),
        })
    }

    pub(crate) fn from_raw(
        language: String,
        relations: Vec<String>,
        concepts: Vec<String>,
        offsets: Vec<u32>,
        edges: Vec<Edge>,
        vocabulary: HashMap<String, ConceptId>,
        assertions: usize,
    ) -> Self {
        SemanticNetwork {
            language,
            relations,
            concepts,
            offsets,
            edges,
            vocabulary,
            assertions,
            checksum: OnceLock::new(),
        }
    }

    pub fn empty(language: &str) -> Self {
        Self::from_parts(language.to_string(), Vec::new(), Vec::new(), Vec::new(), 0)
            .expect("empty network fits")
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn stats(&self) -> NetworkStats {
        NetworkStats {
            concepts: self.concepts.len(),
            assertions: self.assertions,
        }
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// Normalized URI, e.g. `en/play_piano`.
    pub fn concept_uri(&self, id: ConceptId) -> Result<&str, KbError> {
        self.concepts
            .get(id.index())
            .map(String::as_str)
            .ok_or(KbError::UnknownConcept(id.0))
    }

    /// The URI without its language tag; this is the vocabulary phrase.
    pub fn concept_term(&self, id: ConceptId) -> Result<&str, KbError> {
        let uri = self.concept_uri(id)?;
        Ok(uri.split_once('/').map_or(uri, |(_, term)| term))
    }

    pub fn concept_id(&self, uri: &str) -> Option<ConceptId> {
        let (lang, term) = uri.split_once('/')?;
        if lang != self.language {
            return None;
        }
        self.lookup_phrase(term)
    }

    /// Vocabulary lookup of an underscore-joined lowercase phrase.
    pub fn lookup_phrase(&self, phrase: &str) -> Option<ConceptId> {
        self.vocabulary.get(phrase).copied()
    }

    pub fn vocabulary(&self) -> &HashMap<String, ConceptId> {
        &self.vocabulary
    }

    pub fn relation_label(&self, id: RelationId) -> &str {
        self.relations
            .get(id.0 as usize)
            .map(String::as_str)
            .unwrap_or("?")
    }

    pub fn relation_id(&self, label: &str) -> Option<RelationId> {
        self.relations
            .iter()
            .position(|r| r == label)
            .map(|i| RelationId(i as u16))
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn concepts(&self) -> impl ExactSizeIterator<Item = ConceptId> {
        (0..self.concepts.len() as u32).map(ConceptId)
    }

    fn check(&self, id: ConceptId) -> Result<(), KbError> {
        if id.index() < self.concepts.len() {
            Ok(())
        } else {
            Err(KbError::UnknownConcept(id.0))
        }
    }

    /// All incident edges of `g`, outgoing and incoming, sorted by
    /// (neighbor, relation, direction).
    pub fn neighbors(&self, g: ConceptId) -> Result<&[Edge], KbError> {
        self.check(g)?;
        let lo = self.offsets[g.index()] as usize;
        let hi = self.offsets[g.index() + 1] as usize;
        Ok(&self.edges[lo..hi])
    }

    /// Signed strength of the strongest direct assertion between `a` and
    /// `b` in either direction, or `None` when the two are not adjacent.
    pub fn phi(&self, a: ConceptId, b: ConceptId) -> Result<Option<Phi>, KbError> {
        let adj = self.neighbors(a)?;
        self.check(b)?;
        let lo = adj.partition_point(|e| e.neighbor < b);
        let hi = lo + adj[lo..].partition_point(|e| e.neighbor == b);
        Ok(strongest(&adj[lo..hi]))
    }

    pub(crate) fn raw_parts(&self) -> (&[String], &[String], &[u32], &[Edge]) {
        (&self.relations, &self.concepts, &self.offsets, &self.edges)
    }

    /// Checksum of the serialized index; identical networks share it.
    pub fn checksum(&self) -> u64 {
        *self.checksum.get_or_init(|| index::encode(self).1)
    }

    pub(crate) fn set_checksum(&self, sum: u64) {
        let _ = self.checksum.set(sum);
    }
}

/// Picks the strongest edge from a run of entries that share one neighbor.
/// Larger |weight| wins; ties go to the positive weight, then to the first
/// entry in storage order.
pub(crate) fn strongest(run: &[Edge]) -> Option<Phi> {
    let mut best: Option<&Edge> = None;
    for e in run {
        let better = match best {
            None => true,
            Some(b) => {
                let (ea, ba) = (e.weight.abs(), b.weight.abs());
                ea > ba || (ea == ba && e.weight > b.weight)
            }
        };
        if better {
            best = Some(e);
        }
    }
    best.map(|e| Phi {
        strength: e.weight,
        relation: e.relation,
        direction: e.direction,
    })
}

fn vocabulary_for(language: &str, concepts: &[String]) -> HashMap<String, ConceptId> {
    let prefix_len = language.len() + 1;
    concepts
        .iter()
        .enumerate()
        .map(|(i, uri)| (uri[prefix_len.min(uri.len())..].to_string(), ConceptId(i as u32)))
        .collect()
}
