use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use super::parse::{parse_assertion_line, LineFilter, MalformedLine, ParsedLine, SkipReason};
use super::{ConceptId, Direction, Edge, KbError, RelationId, SemanticNetwork};

/// How repeated (start, end, relation) assertions combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Keep the strongest (largest magnitude) weight.
    #[default]
    Max,
    Sum,
}

impl Aggregation {
    fn combine(self, old: f64, new: f64) -> f64 {
        match self {
            Aggregation::Max => {
                if new.abs() > old.abs() || (new.abs() == old.abs() && new > old) {
                    new
                } else {
                    old
                }
            }
            Aggregation::Sum => old + new,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub filter: LineFilter,
    pub aggregation: Aggregation,
    /// Stop after this many retained lines.
    pub max_edges: Option<usize>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            filter: LineFilter::default(),
            aggregation: Aggregation::Max,
            max_edges: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub lines: u64,
    pub retained: u64,
    pub skipped_language: u64,
    pub skipped_self_loops: u64,
    pub skipped_blank: u64,
    pub malformed: u64,
    pub merged_duplicates: u64,
    /// The first few malformed lines, for diagnostics.
    #[serde(skip)]
    pub first_errors: Vec<MalformedLine>,
}

const KEPT_ERRORS: usize = 16;

/// Incremental single-writer network construction.
///
/// Used by dump ingestion and for hand-built networks in tests.
#[derive(Debug)]
pub struct NetworkBuilder {
    language: String,
    aggregation: Aggregation,
    concepts: Vec<String>,
    concept_ids: HashMap<String, ConceptId>,
    relations: Vec<String>,
    relation_ids: HashMap<String, RelationId>,
    assertions: HashMap<(u32, u32, u16), f64>,
}

impl NetworkBuilder {
    pub fn new(language: &str, aggregation: Aggregation) -> Self {
        NetworkBuilder {
            language: language.to_string(),
            aggregation,
            concepts: Vec::new(),
            concept_ids: HashMap::new(),
            relations: Vec::new(),
            relation_ids: HashMap::new(),
            assertions: HashMap::new(),
        }
    }

    /// Interns a normalized concept URI (`en/piano`). A bare term without a
    /// language tag is placed in the builder's language.
    pub fn concept(&mut self, uri: &str) -> ConceptId {
        let uri = if uri.contains('/') {
            uri.to_string()
        } else {
            format!("{}/{}", self.language, uri)
        };
        if let Some(&id) = self.concept_ids.get(&uri) {
            return id;
        }
        let id = ConceptId(self.concepts.len() as u32);
        self.concepts.push(uri.clone());
        self.concept_ids.insert(uri, id);
        id
    }

    fn relation(&mut self, label: &str) -> Result<RelationId, KbError> {
        if let Some(&id) = self.relation_ids.get(label) {
            return Ok(id);
        }
        if self.relations.len() > u16::MAX as usize {
            return Err(KbError::Capacity("relations"));
        }
        let id = RelationId(self.relations.len() as u16);
        self.relations.push(label.to_string());
        self.relation_ids.insert(label.to_string(), id);
        Ok(id)
    }

    /// Adds an assertion; returns `true` when it merged into an existing
    /// (start, end, relation) edge. Self-loops are ignored.
    pub fn add_assertion(
        &mut self,
        start: &str,
        end: &str,
        relation: &str,
        weight: f64,
    ) -> Result<bool, KbError> {
        let s = self.concept(start);
        let e = self.concept(end);
        if s == e || !weight.is_finite() {
            return Ok(false);
        }
        let r = self.relation(relation)?;
        match self.assertions.entry((s.0, e.0, r.0)) {
            Entry::Occupied(mut o) => {
                let merged = self.aggregation.combine(*o.get(), weight);
                o.insert(merged);
                Ok(true)
            }
            Entry::Vacant(v) => {
                v.insert(weight);
                Ok(false)
            }
        }
    }

    pub fn build(self) -> Result<SemanticNetwork, KbError> {
        if self.concepts.len() > u32::MAX as usize {
            return Err(KbError::Capacity("concepts"));
        }
        let mut adjacency: Vec<Vec<Edge>> = vec![Vec::new(); self.concepts.len()];
        let count = self.assertions.len();
        for ((s, e, r), weight) in self.assertions {
            adjacency[s as usize].push(Edge {
                neighbor: ConceptId(e),
                relation: RelationId(r),
                direction: Direction::Outgoing,
                weight,
            });
            adjacency[e as usize].push(Edge {
                neighbor: ConceptId(s),
                relation: RelationId(r),
                direction: Direction::Incoming,
                weight,
            });
        }
        SemanticNetwork::from_parts(self.language, self.relations, self.concepts, adjacency, count)
    }
}

/// Streams dump lines into a network. Per-line problems are counted in the
/// report and never abort ingestion; read errors are terminal.
pub fn build_network<R: BufRead>(
    mut reader: R,
    config: &IngestConfig,
) -> Result<(SemanticNetwork, IngestReport), KbError> {
    let mut builder = NetworkBuilder::new(&config.filter.language, config.aggregation);
    let mut report = IngestReport::default();
    let mut buf = Vec::new();
    loop {
        if config.max_edges.is_some_and(|m| report.retained as usize >= m) {
            break;
        }
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        report.lines += 1;
        let parsed = match std::str::from_utf8(&buf) {
            Ok(text) => parse_assertion_line(report.lines, text, &config.filter),
            Err(_) => Err(MalformedLine {
                line: report.lines,
                reason: "invalid utf-8".into(),
            }),
        };
        match parsed {
            Ok(ParsedLine::Assertion(a)) => {
                report.retained += 1;
                if builder.add_assertion(&a.start, &a.end, &a.relation, a.weight)? {
                    report.merged_duplicates += 1;
                }
            }
            Ok(ParsedLine::Skip(SkipReason::Language)) => report.skipped_language += 1,
            Ok(ParsedLine::Skip(SkipReason::SelfLoop)) => report.skipped_self_loops += 1,
            Ok(ParsedLine::Skip(SkipReason::Blank)) => report.skipped_blank += 1,
            Err(e) => {
                report.malformed += 1;
                if report.first_errors.len() < KEPT_ERRORS {
                    log::warn!("skipping malformed dump {e}");
                    report.first_errors.push(e);
                }
            }
        }
        if report.lines % 5_000_000 == 0 {
            log::info!(
                "ingest: {} lines read, {} retained",
                report.lines,
                report.retained
            );
        }
    }
    Ok((builder.build()?, report))
}

/// Opens a dump file, transparently decompressing gzip (detected by its
/// magic bytes rather than the file name).
pub fn open_dump(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let n = read_fully(&mut file, &mut magic)?;
    let file = File::open(path)?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::with_capacity(
            1 << 20,
            MultiGzDecoder::new(file),
        )))
    } else {
        Ok(Box::new(BufReader::with_capacity(1 << 20, file)))
    }
}

fn read_fully(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut n = 0;
    while n < buf.len() {
        match r.read(&mut buf[n..])? {
            0 => break,
            k => n += k,
        }
    }
    Ok(n)
}
