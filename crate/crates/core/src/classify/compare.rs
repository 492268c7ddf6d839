use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::{ByteHistogram, ClassifierConfig, ClassifyError};

/// Ground-truth label of a corpus item, assigned by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Cleartext,
    Encrypted,
}

/// Confusion counts for one method, treating "cleartext" as the positive
/// class. Tallies add, so partial results can be merged in any order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodTally {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
}

impl MethodTally {
    pub fn record(&mut self, flagged_cleartext: bool, label: Label) {
        match (flagged_cleartext, label) {
            (true, Label::Cleartext) => self.true_positives += 1,
            (true, Label::Encrypted) => self.false_positives += 1,
            (false, Label::Cleartext) => self.false_negatives += 1,
            (false, Label::Encrypted) => self.true_negatives += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }

    pub fn flagged(&self) -> u64 {
        self.true_positives + self.false_positives
    }

    /// `TP / (TP + FP)`, or `None` when nothing was flagged.
    pub fn precision(&self) -> Option<f64> {
        let flagged = self.flagged();
        (flagged > 0).then(|| self.true_positives as f64 / flagged as f64)
    }

    pub fn fraction_flagged(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.flagged() as f64 / n as f64,
        }
    }
}

impl Add for MethodTally {
    type Output = MethodTally;

    fn add(self, rhs: MethodTally) -> MethodTally {
        MethodTally {
            true_positives: self.true_positives + rhs.true_positives,
            false_positives: self.false_positives + rhs.false_positives,
            false_negatives: self.false_negatives + rhs.false_negatives,
            true_negatives: self.true_negatives + rhs.true_negatives,
        }
    }
}

impl AddAssign for MethodTally {
    fn add_assign(&mut self, rhs: MethodTally) {
        *self = *self + rhs;
    }
}

/// One row of the method comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    /// `null` in JSON when the method flagged nothing.
    pub precision: Option<f64>,
    pub fraction_flagged_cleartext: f64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl From<MethodTally> for MethodStats {
    fn from(t: MethodTally) -> Self {
        MethodStats {
            precision: t.precision(),
            fraction_flagged_cleartext: t.fraction_flagged(),
            true_positives: t.true_positives,
            false_positives: t.false_positives,
            false_negatives: t.false_negatives,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub items: u64,
    pub ascii: MethodStats,
    pub entropy: MethodStats,
    pub chi_squared: MethodStats,
}

/// Score each method's raw verdict against the labels. The `min_stat_len`
/// fallback is not applied.
pub fn compare_methods<'a, I>(corpus: I, config: &ClassifierConfig) -> Result<MethodReport, ClassifyError>
where
    I: IntoIterator<Item = (&'a [u8], Label)>,
{
    let mut ascii = MethodTally::default();
    let mut entropy = MethodTally::default();
    let mut chi = MethodTally::default();
    for (bytes, label) in corpus {
        let hist = ByteHistogram::from_bytes(bytes)?;
        ascii.record(bytes.is_ascii(), label);
        entropy.record(hist.entropy_bits() < config.entropy_threshold, label);
        chi.record(hist.chi_squared() > config.chi_threshold, label);
    }
    if ascii.total() == 0 {
        return Err(ClassifyError::EmptyCorpus);
    }
    Ok(MethodReport {
        items: ascii.total(),
        ascii: ascii.into(),
        entropy: entropy.into(),
        chi_squared: chi.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_encrypted_nothing_flagged() {
        let uniform: Vec<u8> = (0..=255).collect();
        let corpus = vec![(&uniform[..], Label::Encrypted); 3];
        let r = compare_methods(corpus, &ClassifierConfig::default()).unwrap();
        assert_eq!(r.items, 3);
        for m in [r.ascii, r.chi_squared] {
            assert_eq!(m.precision, None);
            assert_eq!(m.fraction_flagged_cleartext, 0.0);
        }
        // H = 8 is not below 7.5 either
        assert_eq!(r.entropy.precision, None);
    }

    #[test]
    fn single_cleartext_flagged_by_all() {
        let text = [b'a'; 300];
        let r = compare_methods([(&text[..], Label::Cleartext)], &ClassifierConfig::default()).unwrap();
        for m in [r.ascii, r.entropy, r.chi_squared] {
            assert_eq!(m.precision, Some(1.0));
            assert_eq!(m.fraction_flagged_cleartext, 1.0);
            assert_eq!(m.true_positives, 1);
        }
    }

    #[test]
    fn empty_inputs() {
        let none: Vec<(&[u8], Label)> = Vec::new();
        assert_eq!(
            compare_methods(none, &ClassifierConfig::default()),
            Err(ClassifyError::EmptyCorpus)
        );
        assert_eq!(
            compare_methods([(&b""[..], Label::Cleartext)], &ClassifierConfig::default()),
            Err(ClassifyError::EmptyPayload)
        );
    }

    #[test]
    fn tallies_merge_in_any_order() {
        let mut a = MethodTally::default();
        a.record(true, Label::Cleartext);
        a.record(true, Label::Encrypted);
        let mut b = MethodTally::default();
        b.record(false, Label::Cleartext);
        assert_eq!(a + b, b + a);
        let mut c = a;
        c += b;
        assert_eq!(c.total(), 3);
        assert_eq!(c.precision(), Some(0.5));
    }
}
