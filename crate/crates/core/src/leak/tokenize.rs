use std::collections::HashSet;
use std::ops::Range;

/// Longest run of adjacent words emitted as a phrase candidate.
pub const MAX_PHRASE_WORDS: usize = 4;

/// Longest context excerpt attached to a finding, in bytes.
pub const MAX_CONTEXT_LEN: usize = 120;

fn is_token_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'-'
}

/// Split a cleartext payload into lowercase match candidates.
///
/// Primary tokens are runs of ASCII letters, digits, `_` and `-`. Each
/// compound token also yields its `_`/`-` separated form with spaces
/// (`blood_pressure` → `blood pressure`) and its parts; mixed letter/digit
/// words yield their letter and digit runs (`alice123` → `alice`, `123`).
/// Runs of up to [`MAX_PHRASE_WORDS`] adjacent words are added so that
/// multi-word entries written with ordinary spacing also match.
/// Duplicates are dropped, first occurrence wins.
pub fn tokenize(bytes: &[u8]) -> Vec<String> {
    let lower = bytes.to_ascii_lowercase();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |s: &str, out: &mut Vec<String>| {
        if !s.is_empty() && seen.insert(s.to_string()) {
            out.push(s.to_string());
        }
    };

    for raw in lower.split(|&b| !is_token_byte(b)) {
        // Only ASCII bytes survive the split, so this never fails.
        let Ok(tok) = std::str::from_utf8(raw) else { continue };
        let tok = tok.trim_matches(['_', '-']);
        if tok.is_empty() {
            continue;
        }
        push(tok, &mut out);
        let parts: Vec<&str> = tok.split(['_', '-']).filter(|p| !p.is_empty()).collect();
        if parts.len() > 1 {
            push(&parts.join(" "), &mut out);
            for p in &parts {
                push(p, &mut out);
            }
        }
        for p in &parts {
            for run in alnum_runs(p) {
                if run.len() != p.len() {
                    push(run, &mut out);
                }
            }
        }
    }

    let words: Vec<&str> = lower
        .split(|b| !b.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .filter_map(|w| std::str::from_utf8(w).ok())
        .collect();
    for n in 2..=MAX_PHRASE_WORDS {
        for window in words.windows(n) {
            push(&window.join(" "), &mut out);
        }
    }
    out
}

/// Maximal runs of letters or of digits.
fn alnum_runs(word: &str) -> Vec<&str> {
    let bytes = word.as_bytes();
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=bytes.len() {
        if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
            runs.push(&word[start..i]);
            start = i;
        }
    }
    runs
}

/// Lowercase, with every run of non-alphanumeric characters collapsed to one
/// space and no leading or trailing space.
pub fn normalize_phrase(text: &str) -> String {
    let (norm, _) = normalize_with_offsets(text.as_bytes());
    norm
}

/// [`normalize_phrase`] over raw bytes, plus the source byte offset of each
/// normalized byte.
pub(crate) fn normalize_with_offsets(bytes: &[u8]) -> (String, Vec<usize>) {
    let mut norm = String::with_capacity(bytes.len());
    let mut offsets = Vec::with_capacity(bytes.len());
    let mut pending_space = None;
    for (i, &b) in bytes.iter().enumerate() {
        if b.is_ascii_alphanumeric() {
            if let Some(at) = pending_space.take() {
                if !norm.is_empty() {
                    norm.push(' ');
                    offsets.push(at);
                }
            }
            norm.push(b.to_ascii_lowercase() as char);
            offsets.push(i);
        } else if pending_space.is_none() {
            pending_space = Some(i);
        }
    }
    (norm, offsets)
}

/// Byte range in `bytes` whose normalized form equals the normalized
/// `needle`. The first whole-word occurrence is preferred, then the first
/// occurrence inside a longer word.
pub fn locate(bytes: &[u8], needle: &str) -> Option<Range<usize>> {
    let needle = normalize_phrase(needle);
    if needle.is_empty() {
        return None;
    }
    let (norm, offsets) = normalize_with_offsets(bytes);
    let nb = norm.as_bytes();
    let whole = norm.match_indices(&needle).map(|(i, _)| i).find(|&i| {
        let end = i + needle.len();
        (i == 0 || nb[i - 1] == b' ') && (end == nb.len() || nb[end] == b' ')
    });
    let at = whole.or_else(|| norm.find(&needle))?;
    let start = offsets[at];
    let end = offsets[at + needle.len() - 1] + 1;
    Some(start..end)
}

/// Printable excerpt of at most [`MAX_CONTEXT_LEN`] bytes around `span`.
/// Non-printable bytes become `.`.
pub fn excerpt(bytes: &[u8], span: Range<usize>) -> String {
    let span_len = span.end - span.start;
    let (start, end) = if span_len >= MAX_CONTEXT_LEN {
        (span.start, span.start + MAX_CONTEXT_LEN)
    } else {
        let slack = MAX_CONTEXT_LEN - span_len;
        let before = (slack / 2).min(span.start);
        let after = (slack - before).min(bytes.len() - span.end);
        let before = (slack - after).min(span.start);
        (span.start - before, span.end + after)
    };
    bytes[start..end]
        .iter()
        .map(|&b| if (0x20..0x7f).contains(&b) { b as char } else { '.' })
        .collect()
}
