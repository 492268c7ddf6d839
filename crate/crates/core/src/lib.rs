//! Offline privacy analysis of home medical IoT traffic.
//!
//! The pipeline reads classic pcap captures, attributes frames to registered
//! devices by MAC address, drops TLS, classifies the remaining payloads as
//! cleartext or encrypted from their byte statistics, scans the cleartext
//! for health terms, names, PII fields and identifying HTTP structure, and
//! profiles when and with whom each device talks.
//!
//! ```
//! use medleak::corpus::{build_fixture_capture, fixture_registry, Scenario};
//! use medleak::report::{analyze, NamedCapture, RunConfig, Status};
//!
//! let capture = NamedCapture {
//!     name: "bp.pcap".into(),
//!     bytes: build_fixture_capture(Scenario::BpMonitorLeaky),
//! };
//! let config = RunConfig {
//!     registry: fixture_registry(Scenario::BpMonitorLeaky),
//!     ..RunConfig::default()
//! };
//! let analysis = analyze(&[capture], &config, None).unwrap();
//! assert_eq!(analysis.devices[0].status, Status::Leak);
//! ```

pub mod capture;
pub mod classify;
pub mod corpus;
pub mod leak;
pub mod metadata;
pub mod payload;
pub mod report;
pub mod vendor;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/captures.md")]
    mod captures {}
    #[doc = include_str!("../../../book/src/classifiers.md")]
    mod classifiers {}
    #[doc = include_str!("../../../book/src/leaks.md")]
    mod leaks {}
    #[doc = include_str!("../../../book/src/metadata.md")]
    mod metadata {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
