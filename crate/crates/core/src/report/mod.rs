//! End-to-end analysis: captures in, one report per (capture, device) out.

mod config;
mod render;

use std::collections::{HashMap, HashSet};
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capture::{parse_capture, split_by_device, CaptureError, DeviceStream, MacAddr, RawPacket, TransportKind};
use crate::classify::{classify, compare_methods, ClassifierConfig, Consensus, MethodReport};
use crate::corpus::LabeledPayload;
use crate::leak::{image_get_signature, scan_cleartext, sort_findings, LeakFinding, LeakRules, Severity, TrafficEvent};
use crate::metadata::{
    activity_periods, endpoint_profiles, periodicity_hint, ActivityPeriod, EndpointProfile, HostMap, Periodicity,
};
use crate::payload::{detect_tls, extract_payloads, parse_http};

pub use config::{load_registry, parse_registry, ConfigError, RunConfig, DICT_DIR_ENV};
pub use render::{render, render_json, render_text, Format, ReportDocument, REPORT_SCHEMA, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARN: i32 = 1;
pub const EXIT_LEAK: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Ok,
    Warn,
    Leak,
}

impl Status {
    /// LEAK when any finding is high, WARN when there are findings but
    /// none high, OK otherwise.
    pub fn from_findings(findings: &[LeakFinding]) -> Status {
        match findings.iter().map(|f| f.severity).max() {
            None => Status::Ok,
            Some(Severity::High) => Status::Leak,
            Some(_) => Status::Warn,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Warn => "WARN",
            Status::Leak => "LEAK",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::Warn => EXIT_WARN,
            Status::Leak => EXIT_LEAK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceReport {
    pub device_id: String,
    pub mac: MacAddr,
    /// Name of the capture the packet indices refer to.
    pub capture: String,
    pub packet_count: usize,
    pub payload_count: usize,
    pub cleartext_count: usize,
    pub tls_count: usize,
    pub encrypted_count: usize,
    pub indeterminate_count: usize,
    /// Non-HTTP TCP payloads on the port pair of an earlier HTTP message:
    /// bodies that spilled into later segments.
    pub http_continuations: usize,
    pub findings: Vec<LeakFinding>,
    pub activity: Vec<ActivityPeriod>,
    pub endpoints: Vec<EndpointProfile>,
    pub periodicity: Option<Periodicity>,
    pub status: Status,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("no capture given")]
    NoCaptures,
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{name}: {source}")]
    Capture {
        name: String,
        #[source]
        source: CaptureError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("method comparison: {0}")]
    Compare(#[from] crate::classify::ClassifyError),
}

/// A capture file's bytes under the name reports will cite.
#[derive(Debug, Clone)]
pub struct NamedCapture {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl NamedCapture {
    /// Named by file name, without directories.
    pub fn read(path: &Path) -> Result<Self, AnalyzeError> {
        let bytes = std::fs::read(path).map_err(|source| AnalyzeError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let name = path
            .file_name()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        Ok(NamedCapture { name, bytes })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    /// Ordered by MAC, then capture name.
    pub devices: Vec<DeviceReport>,
    pub method_report: Option<MethodReport>,
    /// Per-frame problems met while reading captures.
    pub warnings: Vec<String>,
}

impl Analysis {
    pub fn status(&self) -> Status {
        self.devices.iter().map(|d| d.status).max().unwrap_or(Status::Ok)
    }

    pub fn exit_code(&self) -> i32 {
        self.status().exit_code()
    }

    pub fn document(&self) -> ReportDocument {
        ReportDocument::new(self.devices.clone(), self.method_report)
    }
}

/// Run the whole pipeline. Captures and devices are processed in parallel;
/// the result does not depend on scheduling.
pub fn analyze(
    captures: &[NamedCapture],
    config: &RunConfig,
    corpus: Option<&[LabeledPayload]>,
) -> Result<Analysis, AnalyzeError> {
    if captures.is_empty() {
        return Err(AnalyzeError::NoCaptures);
    }
    config.validate()?;
    if config.registry.is_empty() {
        return Err(ConfigError::EmptyRegistry.into());
    }
    let rules = config.leak_rules()?;

    let parsed = captures
        .par_iter()
        .map(|c| {
            parse_capture(&c.bytes).map_err(|source| AnalyzeError::Capture {
                name: c.name.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut warnings = Vec::new();
    for (c, cap) in captures.iter().zip(&parsed) {
        for w in &cap.warnings {
            log::warn!("{}: {w}", c.name);
            warnings.push(format!("{}: {w}", c.name));
        }
    }

    let mut devices: Vec<DeviceReport> = captures
        .par_iter()
        .zip(parsed.par_iter())
        .flat_map_iter(|(c, cap)| {
            let hosts = HostMap::from_packets(&cap.packets);
            let part = split_by_device(&cap.packets, &config.registry);
            part.streams
                .into_iter()
                .filter(|s| !s.is_empty())
                .map(|s| analyze_stream(&c.name, &s, &hosts, config, &rules))
                .collect::<Vec<_>>()
        })
        .collect();
    devices.sort_by(|a, b| (a.mac, &a.capture).cmp(&(b.mac, &b.capture)));

    let method_report = match corpus {
        Some(items) => Some(compare_corpus(items, &config.classifier)?),
        None => None,
    };
    Ok(Analysis {
        devices,
        method_report,
        warnings,
    })
}

/// Read capture files and analyze them.
pub fn analyze_files(
    paths: &[PathBuf],
    config: &RunConfig,
    corpus: Option<&[LabeledPayload]>,
) -> Result<Analysis, AnalyzeError> {
    let captures = paths
        .iter()
        .map(|p| NamedCapture::read(p))
        .collect::<Result<Vec<_>, _>>()?;
    analyze(&captures, config, corpus)
}

pub fn compare_corpus(items: &[LabeledPayload], config: &ClassifierConfig) -> Result<MethodReport, AnalyzeError> {
    Ok(compare_methods(
        items.iter().map(|i| (i.bytes.as_slice(), i.label)),
        config,
    )?)
}

/// Full report for one device's packets from one capture.
pub fn analyze_stream(
    capture: &str,
    stream: &DeviceStream<'_>,
    hosts: &HostMap,
    config: &RunConfig,
    rules: &LeakRules,
) -> DeviceReport {
    let by_index: HashMap<usize, &RawPacket> = stream.packets.iter().map(|p| (p.index, *p)).collect();
    let payloads = extract_payloads(stream);

    let mut report = DeviceReport {
        device_id: stream.device_id.clone(),
        mac: stream.mac,
        capture: capture.to_string(),
        packet_count: stream.len(),
        payload_count: payloads.len(),
        cleartext_count: 0,
        tls_count: 0,
        encrypted_count: 0,
        indeterminate_count: 0,
        http_continuations: 0,
        findings: Vec::new(),
        activity: activity_periods(stream, config.gap_secs, hosts),
        endpoints: Vec::new(),
        periodicity: None,
        status: Status::Ok,
    };
    report.periodicity = periodicity_hint(&report.activity);
    report.endpoints = endpoint_profiles(stream, hosts, &rules.vendors);

    let remote = |idx: usize| -> Option<IpAddr> { by_index.get(&idx)?.remote_addr(stream.mac) };
    let vendor_addr = |addr: Option<IpAddr>| {
        addr.is_some_and(|a| {
            rules.vendors.matches_address(a) || hosts.get(&a).is_some_and(|h| rules.vendors.matches_host(h))
        })
    };

    let mut http_flows: HashSet<(Option<IpAddr>, u16, u16)> = HashSet::new();
    let mut events = Vec::with_capacity(payloads.len());
    for p in &payloads {
        let addr = remote(p.packet_index);
        let (dev_port, remote_port) = p.device_remote_ports();
        let flow = (addr, dev_port, remote_port);
        let mut vendor = vendor_addr(addr);

        if detect_tls(p).is_tls {
            report.tls_count += 1;
            events.push(TrafficEvent {
                packet_index: p.packet_index,
                timestamp: p.timestamp,
                direction: p.direction,
                message: None,
                bytes: p.bytes,
                cleartext: false,
                vendor,
            });
            continue;
        }

        let class = classify(p, &config.classifier).expect("non-TLS, non-empty payload always classifies");
        match class.consensus {
            Consensus::Cleartext => report.cleartext_count += 1,
            Consensus::Encrypted => report.encrypted_count += 1,
            Consensus::Indeterminate => report.indeterminate_count += 1,
        }

        let msg = if p.transport_kind == TransportKind::Tcp {
            parse_http(p)
        } else {
            None
        };
        match &msg {
            Some(m) => {
                http_flows.insert(flow);
                vendor |= m.host.as_deref().is_some_and(|h| rules.vendors.matches_host(h));
            }
            None if p.transport_kind == TransportKind::Tcp && http_flows.contains(&flow) => {
                report.http_continuations += 1;
            }
            None => {}
        }

        let cleartext = class.consensus == Consensus::Cleartext;
        if cleartext {
            let found = scan_cleartext(p, &class, msg.as_ref(), rules).expect("classified cleartext above");
            report.findings.extend(found);
        }
        events.push(TrafficEvent {
            packet_index: p.packet_index,
            timestamp: p.timestamp,
            direction: p.direction,
            message: msg,
            bytes: p.bytes,
            cleartext,
            vendor,
        });
    }

    report
        .findings
        .extend(image_get_signature(&events, config.image_window_secs));
    sort_findings(&mut report.findings);
    report.status = Status::from_findings(&report.findings);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_fixture_capture, fixture_registry, Scenario};
    use crate::leak::FindingCategory;

    fn run(sc: Scenario) -> Analysis {
        let cfg = RunConfig {
            registry: fixture_registry(sc),
            ..RunConfig::default()
        };
        let cap = NamedCapture {
            name: format!("{sc}.pcap"),
            bytes: build_fixture_capture(sc),
        };
        analyze(&[cap], &cfg, None).unwrap()
    }

    #[test]
    fn leaky_monitor() {
        let a = run(Scenario::BpMonitorLeaky);
        assert_eq!(a.devices.len(), 1);
        let d = &a.devices[0];
        assert_eq!(d.status, Status::Leak);
        assert_eq!(a.exit_code(), EXIT_LEAK);
        let cats: HashSet<_> = d.findings.iter().map(|f| f.category).collect();
        for want in [
            FindingCategory::DictionaryMedical,
            FindingCategory::VendorIdentifier,
            FindingCategory::UserIdentifier,
            FindingCategory::ImageGetSignature,
        ] {
            assert!(cats.contains(&want), "missing {want}");
        }
        assert_eq!(d.activity.len(), 3);
        assert_eq!(d.periodicity.unwrap().median_interval, 86_400.0);
        assert_eq!(d.http_continuations, 3);
        assert!(d.endpoints.iter().any(|e| e.vendor_flag));
        assert_eq!(
            d.cleartext_count + d.tls_count + d.encrypted_count + d.indeterminate_count,
            d.payload_count
        );
    }

    #[test]
    fn encrypted_scale() {
        let a = run(Scenario::ScaleEncrypted);
        let d = &a.devices[0];
        assert!(d.findings.is_empty());
        assert_eq!(d.tls_count, d.payload_count);
        assert!(d.payload_count > 0);
        assert_eq!(a.exit_code(), EXIT_OK);
    }

    #[test]
    fn mixed_home_only_flags_monitor() {
        let a = run(Scenario::MixedHome);
        assert_eq!(a.devices.len(), 2);
        for d in &a.devices {
            match d.device_id.as_str() {
                "bp-monitor" => assert_eq!(d.status, Status::Leak),
                _ => assert_eq!(d.status, Status::Ok),
            }
        }
    }

    #[test]
    fn empty_registry_and_no_captures() {
        let cap = NamedCapture {
            name: "x".into(),
            bytes: build_fixture_capture(Scenario::BpMonitorLeaky),
        };
        assert!(matches!(
            analyze(&[cap], &RunConfig::default(), None),
            Err(AnalyzeError::Config(ConfigError::EmptyRegistry))
        ));
        assert!(matches!(
            analyze(&[], &RunConfig::default(), None),
            Err(AnalyzeError::NoCaptures)
        ));
    }

    #[test]
    fn status_rule() {
        assert_eq!(Status::from_findings(&[]), Status::Ok);
        let warn = LeakFinding {
            packet_index: 1,
            category: FindingCategory::VendorIdentifier,
            matched_text: "x".into(),
            context: "x".into(),
            severity: Severity::Warn,
        };
        let high = LeakFinding {
            severity: Severity::High,
            ..warn.clone()
        };
        assert_eq!(Status::from_findings(std::slice::from_ref(&warn)), Status::Warn);
        assert_eq!(Status::from_findings(&[warn, high]), Status::Leak);
    }
}
