use std::collections::HashSet;

use super::{
    counts_as_prior, dictionary_match, tokenize, window_start, FindingCategory, LeakFinding, LeakRules, Severity,
};
use crate::capture::Timestamp;
use crate::payload::{Direction, HttpMessage};

pub const DEFAULT_IMAGE_WINDOW_SECS: f64 = 30.0;

const IMAGE_EXTENSIONS: &[&str] = &[".jpg", ".jpeg", ".png", ".gif"];

/// Structural leaks in one HTTP message. Findings are not yet anchored to a
/// packet; see [`LeakFinding::anchor`].
pub fn http_leak_scan(msg: &HttpMessage, rules: &LeakRules) -> Vec<LeakFinding> {
    let mut out = Vec::new();
    let mut vendor_seen = HashSet::new();
    let mut vendor = |text: &str, out: &mut Vec<LeakFinding>| {
        if vendor_seen.insert(text.to_string()) {
            out.push(LeakFinding::new(
                FindingCategory::VendorIdentifier,
                text,
                Severity::Warn,
            ));
        }
    };

    if let Some(host) = msg.host.as_deref() {
        if rules.vendors.matches_host(host) {
            vendor(host, &mut out);
        }
    }

    if let Some(url) = msg.url.as_deref() {
        let tokens = tokenize(url.as_bytes());
        relabel(
            &mut out,
            dictionary_match(&tokens, &rules.dictionaries),
            FindingCategory::UrlLeak,
        );
        if let Some(t) = first_with_keyword(&tokens, rules) {
            vendor(&t, &mut out);
        }
    }

    for (k, v) in &msg.cookies {
        let tokens = tokenize(format!("{k}={v}").as_bytes());
        relabel(
            &mut out,
            dictionary_match(&tokens, &rules.dictionaries),
            FindingCategory::CookieLeak,
        );
        if let Some(t) = first_with_keyword(&tokens, rules) {
            vendor(&t, &mut out);
        }
    }

    let mut ids = HashSet::new();
    let pairs = msg
        .cookies
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .chain(msg.query_pairs())
        .chain(msg.form_pairs());
    for (k, v) in pairs {
        if rules.is_identifier_key(k) {
            let text = format!("{k}={v}");
            if ids.insert(text.clone()) {
                out.push(LeakFinding::new(FindingCategory::UserIdentifier, &text, Severity::Warn));
            }
        }
    }
    out
}

fn relabel(out: &mut Vec<LeakFinding>, hits: Vec<LeakFinding>, category: FindingCategory) {
    out.extend(hits.into_iter().map(|mut f| {
        f.category = category;
        f
    }));
}

fn first_with_keyword(tokens: &[String], rules: &LeakRules) -> Option<String> {
    tokens.iter().find(|t| rules.vendors.keyword_in(t).is_some()).cloned()
}

pub fn is_image_path(path: &str) -> bool {
    let lower = path.to_ascii_lowercase();
    IMAGE_EXTENSIONS.iter().any(|ext| lower.ends_with(ext))
}

/// One device payload as seen by the image-GET rule.
#[derive(Debug, Clone)]
pub struct TrafficEvent<'a> {
    pub packet_index: usize,
    pub timestamp: Timestamp,
    pub direction: Direction,
    /// Parsed HTTP message, when the payload was plaintext HTTP.
    pub message: Option<HttpMessage>,
    pub bytes: &'a [u8],
    /// Classified cleartext.
    pub cleartext: bool,
    /// Remote end matched a vendor pattern.
    pub vendor: bool,
}

impl TrafficEvent<'_> {
    fn image_get_path(&self) -> Option<&str> {
        let msg = self.message.as_ref()?;
        if msg.method.as_deref() != Some("GET") {
            return None;
        }
        msg.path().filter(|p| is_image_path(p))
    }
}

/// Flag outbound cleartext GETs for an image that follow other outbound
/// cleartext or vendor traffic within `window_secs`. Events must be in time
/// order.
pub fn image_get_signature(events: &[TrafficEvent<'_>], window_secs: f64) -> Vec<LeakFinding> {
    let mut out = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        if ev.direction != Direction::Outbound || !ev.cleartext {
            continue;
        }
        let Some(path) = ev.image_get_path() else { continue };
        let start = window_start(ev.timestamp, window_secs);
        let preceded = events[..i].iter().any(|p| {
            p.timestamp >= start && p.timestamp <= ev.timestamp && counts_as_prior(p) && p.image_get_path().is_none()
        });
        if preceded {
            out.push(
                LeakFinding::new(FindingCategory::ImageGetSignature, path, Severity::Warn)
                    .anchor(ev.packet_index, ev.bytes),
            );
        }
    }
    out
}
