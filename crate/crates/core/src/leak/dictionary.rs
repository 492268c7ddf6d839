use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::tokenize::normalize_phrase;
use super::{FindingCategory, Severity};

#[derive(Debug, thiserror::Error)]
pub enum DictionaryError {
    #[error("{kind} dictionary has no entries")]
    Empty { kind: DictionaryKind },
    #[error("{kind} dictionary line {line}: entry {entry:?} is not lowercase")]
    NotLowercase {
        kind: DictionaryKind,
        line: usize,
        entry: String,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DictionaryKind {
    MedicalTerms,
    FirstNames,
    PiiFields,
}

impl DictionaryKind {
    pub const ALL: [DictionaryKind; 3] = [Self::MedicalTerms, Self::FirstNames, Self::PiiFields];

    pub fn name(self) -> &'static str {
        match self {
            Self::MedicalTerms => "medical-terms",
            Self::FirstNames => "first-names",
            Self::PiiFields => "pii-fields",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.txt", self.name())
    }

    pub fn category(self) -> FindingCategory {
        match self {
            Self::MedicalTerms => FindingCategory::DictionaryMedical,
            Self::FirstNames => FindingCategory::DictionaryName,
            Self::PiiFields => FindingCategory::DictionaryPii,
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Self::MedicalTerms => Severity::High,
            Self::FirstNames | Self::PiiFields => Severity::Warn,
        }
    }

    /// Shortest candidate this dictionary will match.
    pub fn min_token_len(self) -> usize {
        match self {
            Self::FirstNames => 3,
            _ => 1,
        }
    }

    fn bundled_text(self) -> &'static str {
        match self {
            Self::MedicalTerms => include_str!("../../data/dicts/medical-terms.txt"),
            Self::FirstNames => include_str!("../../data/dicts/first-names.txt"),
            Self::PiiFields => include_str!("../../data/dicts/pii-fields.txt"),
        }
    }
}

impl fmt::Display for DictionaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated word list. Entries are stored as written; matching compares
/// their normalized form (non-alphanumerics collapsed to single spaces).
#[derive(Debug, Clone)]
pub struct Dictionary {
    kind: DictionaryKind,
    entries: BTreeSet<String>,
    keys: HashSet<String>,
    source_note: String,
}

impl Dictionary {
    pub fn new<I, S>(kind: DictionaryKind, entries: I, source_note: impl Into<String>) -> Result<Self, DictionaryError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for (i, e) in entries.into_iter().enumerate() {
            let e = e.as_ref().split_whitespace().collect::<Vec<_>>().join(" ");
            if e.is_empty() {
                continue;
            }
            if e.chars().any(char::is_uppercase) {
                return Err(DictionaryError::NotLowercase {
                    kind,
                    line: i + 1,
                    entry: e,
                });
            }
            set.insert(e);
        }
        Self::from_set(kind, set, source_note.into())
    }

    fn from_set(kind: DictionaryKind, entries: BTreeSet<String>, source_note: String) -> Result<Self, DictionaryError> {
        let keys: HashSet<String> = entries
            .iter()
            .map(|e| normalize_phrase(e))
            .filter(|k| !k.is_empty())
            .collect();
        if keys.is_empty() {
            return Err(DictionaryError::Empty { kind });
        }
        Ok(Dictionary {
            kind,
            entries,
            keys,
            source_note,
        })
    }

    /// Parse the file format: UTF-8, one lowercase entry per line, blank
    /// lines ignored, lines starting with `#` are comments. The leading
    /// comment block becomes the source note.
    pub fn parse(kind: DictionaryKind, text: &str) -> Result<Self, DictionaryError> {
        let mut note = Vec::new();
        let mut in_header = true;
        let mut entries = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if in_header {
                    note.push(comment.trim().to_string());
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            in_header = false;
            let entry = line.split_whitespace().collect::<Vec<_>>().join(" ");
            if entry.chars().any(char::is_uppercase) {
                return Err(DictionaryError::NotLowercase {
                    kind,
                    line: n + 1,
                    entry,
                });
            }
            entries.insert(entry);
        }
        Self::from_set(kind, entries, note.join(" ").trim().to_string())
    }

    pub fn bundled(kind: DictionaryKind) -> Self {
        Self::parse(kind, kind.bundled_text()).expect("bundled dictionaries are valid")
    }

    pub fn load(kind: DictionaryKind, path: &Path) -> Result<Self, DictionaryError> {
        let text = std::fs::read_to_string(path).map_err(|source| DictionaryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(kind, &text)
    }

    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    pub fn entries(&self) -> &BTreeSet<String> {
        &self.entries
    }

    pub fn source_note(&self) -> &str {
        &self.source_note
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether `candidate` (already tokenized) names an entry.
    pub fn matches(&self, candidate: &str) -> bool {
        let key = normalize_phrase(candidate);
        key.len() >= self.kind.min_token_len() && self.keys.contains(&key)
    }

    /// Copy with extra entries added.
    pub fn extended<I, S>(&self, extra: I) -> Result<Self, DictionaryError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut all: Vec<String> = self.entries.iter().cloned().collect();
        all.extend(extra.into_iter().map(|e| e.as_ref().to_string()));
        Dictionary::new(self.kind, all, self.source_note.clone())
    }
}

/// The three dictionaries used for cleartext scanning.
#[derive(Debug, Clone)]
pub struct DictionarySet {
    dictionaries: Vec<Dictionary>,
}

impl DictionarySet {
    pub fn new(dictionaries: Vec<Dictionary>) -> Self {
        DictionarySet { dictionaries }
    }

    pub fn bundled() -> Self {
        DictionarySet::new(DictionaryKind::ALL.iter().map(|&k| Dictionary::bundled(k)).collect())
    }

    /// Load `<dir>/<kind>.txt` for each kind. A kind whose file is absent
    /// falls back to the bundled list.
    pub fn from_dir(dir: &Path) -> Result<Self, DictionaryError> {
        let mut dictionaries = Vec::new();
        for kind in DictionaryKind::ALL {
            let path = dir.join(kind.file_name());
            if path.exists() {
                dictionaries.push(Dictionary::load(kind, &path)?);
            } else {
                log::info!("{} not found; using bundled {kind} list", path.display());
                dictionaries.push(Dictionary::bundled(kind));
            }
        }
        Ok(DictionarySet::new(dictionaries))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Dictionary> {
        self.dictionaries.iter()
    }

    pub fn get(&self, kind: DictionaryKind) -> Option<&Dictionary> {
        self.dictionaries.iter().find(|d| d.kind == kind)
    }
}
