//! Vendor endpoint patterns shared by leak detection and endpoint profiling.

use std::net::IpAddr;

use serde::{Deserialize, Serialize};
use wildmatch::WildMatch;

/// Host globs (`*` and `?` wildcards, case-insensitive) plus bare keywords
/// that identify a manufacturer inside URLs and cookies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VendorPatterns {
    pub host_patterns: Vec<String>,
    pub keywords: Vec<String>,
}

impl Default for VendorPatterns {
    fn default() -> Self {
        VendorPatterns {
            host_patterns: ["*.withings.*", "withings.*", "*.ihealthlabs.*", "*.1byone.*"]
                .map(String::from)
                .to_vec(),
            keywords: ["withings", "ihealth", "1byone", "healthmate"]
                .map(String::from)
                .to_vec(),
        }
    }
}

impl VendorPatterns {
    pub fn none() -> Self {
        VendorPatterns {
            host_patterns: Vec::new(),
            keywords: Vec::new(),
        }
    }

    pub fn matches_host(&self, host: &str) -> bool {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        self.host_patterns
            .iter()
            .any(|p| WildMatch::new(&p.to_ascii_lowercase()).matches(&host))
    }

    /// Patterns may also name address ranges, e.g. `89.30.121.*`.
    pub fn matches_address(&self, addr: IpAddr) -> bool {
        self.matches_host(&addr.to_string())
    }

    /// First keyword found inside `text`, case-insensitively.
    pub fn keyword_in(&self, text: &str) -> Option<&str> {
        let lower = text.to_ascii_lowercase();
        self.keywords
            .iter()
            .find(|k| !k.is_empty() && lower.contains(&k.to_ascii_lowercase()))
            .map(String::as_str)
    }
}
