use super::ClassifyError;

/// Occurrence counts of each byte value in a non-empty payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteHistogram {
    counts: [u64; 256],
    total: u64,
}

impl ByteHistogram {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ClassifyError> {
        if bytes.is_empty() {
            return Err(ClassifyError::EmptyPayload);
        }
        let mut counts = [0u64; 256];
        for &b in bytes {
            counts[b as usize] += 1;
        }
        Ok(ByteHistogram {
            counts,
            total: bytes.len() as u64,
        })
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probability(&self, byte: u8) -> f64 {
        self.counts[byte as usize] as f64 / self.total as f64
    }

    /// Expected count per value under a uniform distribution, `n / 256`.
    pub fn expected_uniform(&self) -> f64 {
        self.total as f64 / 256.0
    }

    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Shannon entropy in bits per byte, in `[0, 8]`.
    pub fn entropy_bits(&self) -> f64 {
        let n = self.total as f64;
        let h = self
            .counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum::<f64>();
        if h <= 0.0 {
            0.0
        } else {
            h.min(8.0)
        }
    }

    /// Pearson chi-squared statistic against the uniform distribution.
    pub fn chi_squared(&self) -> f64 {
        let e = self.expected_uniform();
        self.counts
            .iter()
            .map(|&o| {
                let d = o as f64 - e;
                d * d / e
            })
            .sum()
    }
}
