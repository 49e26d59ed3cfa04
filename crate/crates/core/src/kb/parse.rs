//! One-line parser for the ConceptNet 5.x tab-separated assertion dump.
//!
//! Each record is `edge-uri \t relation-uri \t start-uri \t end-uri \t json`,
//! for example (tabs shown as spaces)
//!
//! ```text
//! /a/[/r/IsA/,/c/en/piano/n/,/c/en/instrument/]  /r/IsA  /c/en/piano/n  /c/en/instrument  {"dataset": "/d/wordnet/3.1", "weight": 2.0}
//! ```

use std::collections::HashSet;
use std::fmt;

use serde::Deserialize;

/// Relations whose assertions deny rather than affirm; their weights are
/// negated at ingest.
pub const DEFAULT_NEGATIVE_RELATIONS: [&str; 6] = [
    "NotCapableOf",
    "NotDesires",
    "NotHasProperty",
    "Antonym",
    "DistinctFrom",
    "NotUsedFor",
];

#[derive(Debug, Clone)]
pub struct LineFilter {
    pub language: String,
    pub negative_relations: HashSet<String>,
}

impl LineFilter {
    pub fn new(language: &str) -> Self {
        LineFilter {
            language: language.to_string(),
            negative_relations: DEFAULT_NEGATIVE_RELATIONS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl Default for LineFilter {
    fn default() -> Self {
        LineFilter::new("en")
    }
}

/// A retained assertion before concept interning. Concepts are normalized
/// URIs such as `en/play_piano`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawAssertion {
    pub start: String,
    pub end: String,
    pub relation: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    Language,
    SelfLoop,
    Blank,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedLine {
    Assertion(RawAssertion),
    Skip(SkipReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedLine {
    pub line: u64,
    pub reason: String,
}

impl fmt::Display for MalformedLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

impl std::error::Error for MalformedLine {}

#[derive(Deserialize)]
struct Metadata {
    weight: Option<f64>,
}

/// Splits a concept URI into (language, normalized-uri).
fn normalize_concept(uri: &str) -> Option<(&str, String)> {
    let mut parts = uri.split('/');
    if !parts.next()?.is_empty() || parts.next()? != "c" {
        return None;
    }
    let lang = parts.next().filter(|s| !s.is_empty())?;
    let term = parts.next().filter(|s| !s.is_empty())?;
    Some((lang, format!("{}/{}", lang, term.to_lowercase())))
}

fn relation_label(uri: &str) -> Option<&str> {
    if !uri.starts_with("/r/") {
        return None;
    }
    uri.rsplit('/').find(|s| !s.is_empty()).filter(|s| *s != "r")
}

/// Parses one dump record. `line_no` is only used for error reporting.
pub fn parse_assertion_line(
    line_no: u64,
    line: &str,
    filter: &LineFilter,
) -> Result<ParsedLine, MalformedLine> {
    let bad = |reason: &str| MalformedLine {
        line: line_no,
        reason: reason.to_string(),
    };
    let line = line.trim_end_matches(['\n', '\r']);
    if line.trim().is_empty() {
        return Ok(ParsedLine::Skip(SkipReason::Blank));
    }
    let fields: Vec<&str> = line.splitn(6, '\t').collect();
    if fields.len() != 5 {
        return Err(bad(&format!("expected 5 fields, found {}", fields.len())));
    }
    let relation = relation_label(fields[1]).ok_or_else(|| bad("bad relation uri"))?;
    let (start_lang, start) = normalize_concept(fields[2]).ok_or_else(|| bad("bad start uri"))?;
    let (end_lang, end) = normalize_concept(fields[3]).ok_or_else(|| bad("bad end uri"))?;
    if start_lang != filter.language || end_lang != filter.language {
        return Ok(ParsedLine::Skip(SkipReason::Language));
    }
    if start == end {
        return Ok(ParsedLine::Skip(SkipReason::SelfLoop));
    }
    let meta: Metadata =
        serde_json::from_str(fields[4]).map_err(|e| bad(&format!("metadata: {e}")))?;
    let weight = meta.weight.ok_or_else(|| bad("metadata has no weight"))?;
    let weight = if filter.negative_relations.contains(relation) {
        -weight
    } else {
        weight
    };
    Ok(ParsedLine::Assertion(RawAssertion {
        start,
        end,
        relation: relation.to_string(),
        weight,
    }))
}
