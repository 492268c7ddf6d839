//! Leak detection over cleartext payloads.
//!
//! Three sources of findings:
//! - dictionary hits (medical terms, first names, PII field names) on the
//!   tokens of a whole payload;
//! - structural HTTP leaks: dictionary hits inside the URL or cookies, vendor
//!   hosts and brand strings, user identifier keys;
//! - the image-GET signature, a picture fetched right after other device
//!   traffic, which marks the end of a measurement.
//!
//! Scanning refuses payloads that were not classified cleartext.

mod dictionary;
mod http;
mod tokenize;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::capture::Timestamp;
use crate::classify::{ClassificationResult, Consensus};
use crate::payload::{AppPayload, Direction, HttpMessage};
use crate::vendor::VendorPatterns;

pub use dictionary::{Dictionary, DictionaryError, DictionaryKind, DictionarySet};
pub use http::{http_leak_scan, image_get_signature, is_image_path, TrafficEvent, DEFAULT_IMAGE_WINDOW_SECS};
pub use tokenize::{excerpt, locate, normalize_phrase, tokenize, MAX_CONTEXT_LEN, MAX_PHRASE_WORDS};

/// Longest `matched_text` kept on a finding, in bytes.
pub const MAX_MATCHED_LEN: usize = 96;

pub const DEFAULT_IDENTIFIER_KEYS: &[&str] = &["current_user", "userid", "user_id", "uid"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingCategory {
    DictionaryMedical,
    DictionaryName,
    DictionaryPii,
    UrlLeak,
    CookieLeak,
    VendorIdentifier,
    ImageGetSignature,
    UserIdentifier,
}

impl FindingCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::DictionaryMedical => "dictionary-medical",
            Self::DictionaryName => "dictionary-name",
            Self::DictionaryPii => "dictionary-pii",
            Self::UrlLeak => "url-leak",
            Self::CookieLeak => "cookie-leak",
            Self::VendorIdentifier => "vendor-identifier",
            Self::ImageGetSignature => "image-get-signature",
            Self::UserIdentifier => "user-identifier",
        }
    }
}

impl fmt::Display for FindingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warn,
    High,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warn => "warn",
            Severity::High => "high",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LeakFinding {
    pub packet_index: usize,
    pub category: FindingCategory,
    pub matched_text: String,
    pub context: String,
    pub severity: Severity,
}

impl LeakFinding {
    pub(crate) fn new(category: FindingCategory, matched_text: &str, severity: Severity) -> Self {
        let matched_text = truncate(matched_text, MAX_MATCHED_LEN).to_string();
        LeakFinding {
            packet_index: 0,
            category,
            context: matched_text.clone(),
            matched_text,
            severity,
        }
    }

    /// Whether `matched_text` can be found again in `payload`.
    pub fn relocates_in(&self, payload: &[u8]) -> bool {
        locate(payload, &self.matched_text).is_some()
    }

    /// Pin the finding to a packet and replace its context with an excerpt
    /// of the payload around the match.
    pub fn anchor(mut self, packet_index: usize, payload: &[u8]) -> Self {
        self.packet_index = packet_index;
        if let Some(span) = locate(payload, &self.matched_text) {
            self.context = excerpt(payload, span);
        }
        self
    }
}

fn truncate(s: &str, max: usize) -> &str {
    if s.len() <= max {
        return s;
    }
    let mut end = max;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    &s[..end]
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LeakError {
    #[error("packet {packet_index} is {consensus:?}, only cleartext payloads are scanned")]
    NotCleartext { packet_index: usize, consensus: Consensus },
    #[error("classification for packet {classified} does not belong to payload {payload}")]
    Mismatch { payload: usize, classified: usize },
}

/// Everything the scanners match against. Immutable once built.
#[derive(Debug, Clone)]
pub struct LeakRules {
    pub dictionaries: DictionarySet,
    pub vendors: VendorPatterns,
    /// Cookie, query and form keys that name a user, compared
    /// case-insensitively.
    pub identifier_keys: Vec<String>,
}

impl Default for LeakRules {
    fn default() -> Self {
        LeakRules {
            dictionaries: DictionarySet::bundled(),
            vendors: VendorPatterns::default(),
            identifier_keys: DEFAULT_IDENTIFIER_KEYS.iter().map(|k| k.to_string()).collect(),
        }
    }
}

impl LeakRules {
    pub fn is_identifier_key(&self, key: &str) -> bool {
        self.identifier_keys.iter().any(|k| k.eq_ignore_ascii_case(key.trim()))
    }
}

/// One finding per distinct (normalized candidate, dictionary) hit. The first
/// token to hit names the finding. Findings carry packet index 0 and the
/// token as context until anchored to a payload.
pub fn dictionary_match(tokens: &[String], dictionaries: &DictionarySet) -> Vec<LeakFinding> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for token in tokens {
        let key = normalize_phrase(token);
        if key.is_empty() {
            continue;
        }
        for dict in dictionaries.iter() {
            if dict.matches(token) && seen.insert((key.clone(), dict.kind())) {
                let kind = dict.kind();
                out.push(LeakFinding::new(kind.category(), token, kind.severity()));
            }
        }
    }
    out
}

/// Dictionary and HTTP scans of one cleartext payload, anchored to it and
/// sorted. `msg` is the payload's parsed HTTP message, if any.
pub fn scan_cleartext(
    payload: &AppPayload<'_>,
    classification: &ClassificationResult,
    msg: Option<&HttpMessage>,
    rules: &LeakRules,
) -> Result<Vec<LeakFinding>, LeakError> {
    if classification.packet_index != payload.packet_index {
        return Err(LeakError::Mismatch {
            payload: payload.packet_index,
            classified: classification.packet_index,
        });
    }
    if classification.consensus != Consensus::Cleartext {
        return Err(LeakError::NotCleartext {
            packet_index: payload.packet_index,
            consensus: classification.consensus,
        });
    }
    let mut findings = dictionary_match(&tokenize(payload.bytes), &rules.dictionaries);
    if let Some(msg) = msg {
        findings.extend(http_leak_scan(msg, rules));
    }
    let mut findings: Vec<LeakFinding> = findings
        .into_iter()
        .map(|f| f.anchor(payload.packet_index, payload.bytes))
        .collect();
    sort_findings(&mut findings);
    Ok(findings)
}

/// Order by packet index, then category, then text. Exact duplicates go.
pub fn sort_findings(findings: &mut Vec<LeakFinding>) {
    findings.sort();
    findings.dedup();
}

/// Whether an event should count as device traffic preceding an image GET.
pub(crate) fn counts_as_prior(event: &TrafficEvent<'_>) -> bool {
    event.direction == Direction::Outbound && (event.cleartext || event.vendor)
}

/// Timestamp arithmetic in microseconds, saturating at zero.
pub(crate) fn window_start(t: Timestamp, window_secs: f64) -> Timestamp {
    let w = (window_secs.max(0.0) * 1e6).round() as u64;
    Timestamp(t.0.saturating_sub(w))
}
