//! Cleartext versus encrypted payload classification.
//!
//! Three independent tests over the byte-value distribution of a payload:
//!
//! * **ASCII**: every byte is below 128.
//! * **Shannon entropy** in bits per byte, `H = -Σ p(x) log2 p(x)`, ranging
//!   over 0..=8. Cleartext when `H < entropy_threshold` (default 7.5).
//! * **Chi-squared** against a uniform byte distribution,
//!   `χ² = Σ (o_i - e_i)² / e_i` over all 256 byte values with
//!   `e_i = n / 256`. Uniform-looking data sits near 255; natural-language
//!   text lands in the thousands. Cleartext when `χ² > chi_threshold`
//!   (default 1000).
//!
//! Ties at either threshold count as encrypted. Statistical verdicts need
//! some data to be meaningful, so payloads shorter than `min_stat_len`
//! (default 64 bytes) are decided by the ASCII test alone, and come out
//! [`Consensus::Indeterminate`] rather than encrypted when it fails.

mod compare;
mod histogram;

use serde::{Deserialize, Serialize};

use crate::payload::{detect_tls, AppPayload};

pub use compare::{compare_methods, Label, MethodReport, MethodStats, MethodTally};
pub use histogram::ByteHistogram;

pub const DEFAULT_ENTROPY_THRESHOLD: f64 = 7.5;
pub const DEFAULT_CHI_THRESHOLD: f64 = 1000.0;
pub const DEFAULT_MIN_STAT_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("payload is empty")]
    EmptyPayload,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("packet {0} is TLS and must not be classified")]
    TlsPayload(usize),
}

/// Which test decides the consensus verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionMethod {
    Ascii,
    Entropy,
    #[default]
    ChiSquared,
    /// At least two of the three tests vote cleartext.
    Majority,
}

impl std::str::FromStr for DecisionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ascii" => Ok(Self::Ascii),
            "entropy" | "shannon" => Ok(Self::Entropy),
            "chi" | "chi-squared" | "chi2" => Ok(Self::ChiSquared),
            "majority" => Ok(Self::Majority),
            other => Err(format!("unknown decision method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub entropy_threshold: f64,
    pub chi_threshold: f64,
    pub min_stat_len: usize,
    pub decision: DecisionMethod,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            entropy_threshold: DEFAULT_ENTROPY_THRESHOLD,
            chi_threshold: DEFAULT_CHI_THRESHOLD,
            min_stat_len: DEFAULT_MIN_STAT_LEN,
            decision: DecisionMethod::ChiSquared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Consensus {
    Cleartext,
    Encrypted,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub packet_index: usize,
    pub length: usize,
    pub ascii_verdict: bool,
    pub entropy_bits: f64,
    pub entropy_verdict: bool,
    pub chi_squared: f64,
    pub chi_verdict: bool,
    pub consensus: Consensus,
}

pub fn histogram(bytes: &[u8]) -> Result<ByteHistogram, ClassifyError> {
    ByteHistogram::from_bytes(bytes)
}

/// True iff every byte is 7-bit ASCII.
pub fn classify_ascii(bytes: &[u8]) -> Result<bool, ClassifyError> {
    if bytes.is_empty() {
        return Err(ClassifyError::EmptyPayload);
    }
    Ok(bytes.is_ascii())
}

pub fn shannon_entropy(bytes: &[u8]) -> Result<f64, ClassifyError> {
    Ok(histogram(bytes)?.entropy_bits())
}

pub fn classify_entropy(bytes: &[u8], threshold: f64) -> Result<bool, ClassifyError> {
    Ok(shannon_entropy(bytes)? < threshold)
}

pub fn chi_squared(bytes: &[u8]) -> Result<f64, ClassifyError> {
    Ok(histogram(bytes)?.chi_squared())
}

pub fn classify_chi(bytes: &[u8], threshold: f64) -> Result<bool, ClassifyError> {
    Ok(chi_squared(bytes)? > threshold)
}

/// Classify a payload that is known not to be TLS.
pub fn classify(payload: &AppPayload<'_>, config: &ClassifierConfig) -> Result<ClassificationResult, ClassifyError> {
    if detect_tls(payload).is_tls {
        return Err(ClassifyError::TlsPayload(payload.packet_index));
    }
    classify_bytes(payload.packet_index, payload.bytes, config)
}

/// Run all three tests on raw bytes and combine them per `config`.
pub fn classify_bytes(
    packet_index: usize,
    bytes: &[u8],
    config: &ClassifierConfig,
) -> Result<ClassificationResult, ClassifyError> {
    let hist = histogram(bytes)?;
    let ascii_verdict = bytes.is_ascii();
    let entropy_bits = hist.entropy_bits();
    let chi = hist.chi_squared();
    let entropy_verdict = entropy_bits < config.entropy_threshold;
    let chi_verdict = chi > config.chi_threshold;

    let consensus = if bytes.len() < config.min_stat_len {
        if ascii_verdict {
            Consensus::Cleartext
        } else {
            Consensus::Indeterminate
        }
    } else {
        let vote = match config.decision {
            DecisionMethod::Ascii => ascii_verdict,
            DecisionMethod::Entropy => entropy_verdict,
            DecisionMethod::ChiSquared => chi_verdict,
            DecisionMethod::Majority => {
                [ascii_verdict, entropy_verdict, chi_verdict]
                    .iter()
                    .filter(|v| **v)
                    .count()
                    >= 2
            }
        };
        if vote {
            Consensus::Cleartext
        } else {
            Consensus::Encrypted
        }
    };
    Ok(ClassificationResult {
        packet_index,
        length: bytes.len(),
        ascii_verdict,
        entropy_bits,
        entropy_verdict,
        chi_squared: chi,
        chi_verdict,
        consensus,
    })
}
