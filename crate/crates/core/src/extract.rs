//! Grounding: turns evidence and answer text into concept ids.
//!
//! Pipeline: lowercase, strip punctuation, split on whitespace, then a
//! greedy longest-phrase match against the network vocabulary. Tokens left
//! over are dropped if they are stopwords and otherwise looked up after
//! vocabulary-gated suffix stripping.

use std::collections::HashSet;

use thiserror::Error;

use crate::kb::{ConceptId, SemanticNetwork};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_SUFFIX_RULES: &str = include_str!("../data/suffix_rules.txt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("suffix rule line {line}: {reason}")]
    BadRule { line: usize, reason: String },
    #[error("max phrase length must be at least 1")]
    PhraseLength,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub suffix: String,
    pub replacement: String,
    /// Verbal inflection (-ing, -ed); such lemmas can be switched off.
    pub verb: bool,
}

#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    stopwords: HashSet<String>,
    max_phrase_len: usize,
    rules: Vec<SuffixRule>,
    /// Shortest lemma a suffix rule may produce.
    pub min_lemma_len: usize,
    /// Emit concepts recognized only through a verbal suffix rule.
    pub extract_verbs: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig::from_texts(DEFAULT_STOPWORDS, DEFAULT_SUFFIX_RULES, 3)
            .expect("bundled config parses")
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_stopwords(text: &str) -> HashSet<String> {
    content_lines(text).map(|(_, l)| l.to_lowercase()).collect()
}

pub fn parse_suffix_rules(text: &str) -> Result<Vec<SuffixRule>, ConfigError> {
    content_lines(text)
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split_whitespace().collect();
            let bad = |reason: &str| ConfigError::BadRule {
                line,
                reason: reason.to_string(),
            };
            let (suffix, replacement, verb) = match fields.as_slice() {
                [s, r] => (*s, *r, false),
                [s, r, "verb"] => (*s, *r, true),
                _ => return Err(bad("expected `suffix replacement [verb]`")),
            };
            let replacement = if replacement == "-" { "" } else { replacement };
            if suffix.is_empty() || suffix == "-" {
                return Err(bad("empty suffix"));
            }
            Ok(SuffixRule {
                suffix: suffix.to_lowercase(),
                replacement: replacement.to_lowercase(),
                verb,
            })
        })
        .collect()
}

impl ExtractionConfig {
    pub fn new(
        stopwords: HashSet<String>,
        rules: Vec<SuffixRule>,
        max_phrase_len: usize,
    ) -> Result<Self, ConfigError> {
        if max_phrase_len == 0 {
            return Err(ConfigError::PhraseLength);
        }
        Ok(ExtractionConfig {
            stopwords: stopwords.into_iter().map(|s| s.to_lowercase()).collect(),
            max_phrase_len,
            rules,
            min_lemma_len: 3,
            extract_verbs: true,
        })
    }

    pub fn from_texts(
        stopwords: &str,
        rules: &str,
        max_phrase_len: usize,
    ) -> Result<Self, ConfigError> {
        Self::new(parse_stopwords(stopwords), parse_suffix_rules(rules)?, max_phrase_len)
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    pub fn rules(&self) -> &[SuffixRule] {
        &self.rules
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }
}

/// Lowercases and strips surrounding punctuation and a possessive `'s`.
fn clean(token: &str) -> String {
    let lower = token.to_lowercase();
    let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
    let trimmed = trimmed
        .strip_suffix("'s")
        .or_else(|| trimmed.strip_suffix("’s"))
        .unwrap_or(trimmed);
    trimmed.to_string()
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| "aeiouy".contains(c))
}

/// Lemma of a single token: the first suffix rule whose output is in the
/// vocabulary, else the cleaned token itself. The flag reports whether a
/// verbal rule produced the lemma.
fn lemma(token: &str, config: &ExtractionConfig, net: &SemanticNetwork) -> (String, bool) {
    for rule in &config.rules {
        if let Some(stem) = token.strip_suffix(rule.suffix.as_str()) {
            let candidate = format!("{stem}{}", rule.replacement);
            if candidate.chars().count() >= config.min_lemma_len
                && has_vowel(stem)
                && net.lookup_phrase(&candidate).is_some()
            {
                return (candidate, rule.verb);
            }
        }
    }
    (token.to_string(), false)
}

/// Normalizes one surface token for vocabulary lookup.
pub fn normalize_token(token: &str, config: &ExtractionConfig, net: &SemanticNetwork) -> String {
    lemma(&clean(token), config, net).0
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(clean)
        .filter(|t| !t.is_empty())
        .collect()
}

/// Grounded concepts of `text`, deduplicated in first-occurrence order.
pub fn extract_concepts(
    text: &str,
    net: &SemanticNetwork,
    config: &ExtractionConfig,
) -> Vec<ConceptId> {
    let tokens = tokenize(text);
    let lemmas: Vec<(String, bool)> = tokens.iter().map(|t| lemma(t, config, net)).collect();
    let mut out: Vec<ConceptId> = Vec::new();
    let mut push = |id: ConceptId| {
        if !out.contains(&id) {
            out.push(id);
        }
    };

    let mut i = 0;
    while i < tokens.len() {
        let longest = config.max_phrase_len.min(tokens.len() - i);
        let mut consumed = 0;
        for len in (2..=longest).rev() {
            let window = &tokens[i..i + len];
            if config.is_stopword(&window[0]) || config.is_stopword(&window[len - 1]) {
                continue;
            }
            let surface = window.join("_");
            let hit = net.lookup_phrase(&surface).or_else(|| {
                let lemmatized: Vec<&str> =
                    lemmas[i..i + len].iter().map(|(l, _)| l.as_str()).collect();
                net.lookup_phrase(&lemmatized.join("_"))
            });
            if let Some(id) = hit {
                push(id);
                consumed = len;
                break;
            }
        }
        if consumed == 0 {
            consumed = 1;
            let token = &tokens[i];
            let (lemma, verbal) = &lemmas[i];
            if !config.is_stopword(token)
                && !config.is_stopword(lemma)
                && (config.extract_verbs || !verbal)
            {
                if let Some(id) = net.lookup_phrase(lemma) {
                    push(id);
                }
            }
        }
        i += consumed;
    }
    out
}
