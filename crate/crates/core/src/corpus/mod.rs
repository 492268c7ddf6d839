//! Labeled synthetic payloads for scoring the classifiers, and golden
//! capture fixtures reconstructed from the published device traces.
//!
//! Cleartext items come from text templates (HTTP requests and responses,
//! English prose, form fields); encrypted items are ChaCha20 keystream
//! bytes, which the byte statistics cannot tell apart from ciphertext.
//! Every item has its own sub-seed, recorded as `seed_record`, so a single
//! item can be regenerated without the rest of the corpus.

mod fixtures;
mod templates;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::classify::Label;

pub use fixtures::{
    build_fixture_capture, fixture_registry, Scenario, UnknownScenario, BP_MONITOR_LABEL, BP_MONITOR_MAC, GATEWAY_MAC,
    LAPTOP_MAC, SCALE_LABEL, SCALE_MAC,
};

pub const CORPUS_FILE: &str = "corpus.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_cleartext: usize,
    pub n_encrypted: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_cleartext: 5000,
            n_encrypted: 5000,
            min_len: 64,
            max_len: 2048,
            seed: 0,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.n_cleartext + self.n_encrypted == 0 {
            return Err(CorpusError::InvalidSpec("corpus must contain at least one item".into()));
        }
        if self.min_len == 0 {
            return Err(CorpusError::InvalidSpec("payload lengths must be at least 1".into()));
        }
        if self.min_len > self.max_len {
            return Err(CorpusError::InvalidSpec(format!(
                "length range {}..={} is empty",
                self.min_len, self.max_len
            )));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {detail}")]
    Parse { path: PathBuf, line: usize, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPayload {
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
    pub label: Label,
    pub generator_note: String,
    pub seed_record: u64,
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

/// Cleartext items first, then encrypted ones.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<LabeledPayload>, CorpusError> {
    spec.validate()?;
    let mut master = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.n_cleartext + spec.n_encrypted);
    for _ in 0..spec.n_cleartext {
        let seed_record = master.next_u64();
        out.push(cleartext_item(seed_record, spec.min_len, spec.max_len));
    }
    for _ in 0..spec.n_encrypted {
        let seed_record = master.next_u64();
        out.push(encrypted_item(seed_record, spec.min_len, spec.max_len));
    }
    Ok(out)
}

pub fn cleartext_item(seed_record: u64, min_len: usize, max_len: usize) -> LabeledPayload {
    let mut rng = ChaCha20Rng::seed_from_u64(seed_record);
    let len = rng.random_range(min_len..=max_len);
    let (bytes, note) = templates::cleartext(&mut rng, len);
    LabeledPayload {
        bytes,
        label: Label::Cleartext,
        generator_note: note.to_string(),
        seed_record,
    }
}

pub fn encrypted_item(seed_record: u64, min_len: usize, max_len: usize) -> LabeledPayload {
    let mut rng = ChaCha20Rng::seed_from_u64(seed_record);
    let len = rng.random_range(min_len..=max_len);
    LabeledPayload {
        bytes: random_bytes(&mut rng, len),
        label: Label::Encrypted,
        generator_note: "chacha20-keystream".to_string(),
        seed_record,
    }
}

pub(crate) fn random_bytes(rng: &mut impl RngCore, len: usize) -> Vec<u8> {
    let mut bytes = vec![0u8; len];
    rng.fill_bytes(&mut bytes);
    bytes
}

/// `dir` may be the corpus file itself or the directory holding it.
pub fn corpus_path(dir: &Path) -> PathBuf {
    if dir.extension().is_some_and(|e| e == "jsonl") {
        dir.to_path_buf()
    } else {
        dir.join(CORPUS_FILE)
    }
}

/// One JSON object per line, payload bytes hex-encoded. Creates `dir`.
pub fn write_corpus(dir: &Path, items: &[LabeledPayload]) -> Result<PathBuf, CorpusError> {
    let path = corpus_path(dir);
    let io = |source| CorpusError::Io {
        path: path.clone(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let mut w = BufWriter::new(File::create(&path).map_err(io)?);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(path)
}

pub fn read_corpus(dir: &Path) -> Result<Vec<LabeledPayload>, CorpusError> {
    let path = corpus_path(dir);
    let file = File::open(&path).map_err(|source| CorpusError::Io {
        path: path.clone(),
        source,
    })?;
    let mut items = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            path: path.clone(),
            line: n + 1,
            detail: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}
