use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DeviceReport;
use crate::classify::{MethodReport, MethodStats};

pub const SCHEMA_VERSION: u32 = 1;

/// JSON Schema (draft 2020-12) for [`ReportDocument`].
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub devices: Vec<DeviceReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method_report: Option<MethodReport>,
}

impl ReportDocument {
    pub fn new(devices: Vec<DeviceReport>, method_report: Option<MethodReport>) -> Self {
        ReportDocument {
            schema: SCHEMA_VERSION,
            devices,
            method_report,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format {other:?} (expected json or text)")),
        }
    }
}

pub fn render(doc: &ReportDocument, format: Format) -> String {
    match format {
        Format::Json => render_json(doc),
        Format::Text => render_text(doc),
    }
}

/// Compact JSON, no trailing newline.
pub fn render_json(doc: &ReportDocument) -> String {
    serde_json::to_string(doc).expect("reports always serialize")
}

pub fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let rows: Vec<[String; 10]> = doc
        .devices
        .iter()
        .map(|d| {
            [
                d.device_id.clone(),
                d.mac.to_string(),
                d.capture.clone(),
                d.packet_count.to_string(),
                d.payload_count.to_string(),
                d.cleartext_count.to_string(),
                d.tls_count.to_string(),
                d.findings.len().to_string(),
                d.activity.len().to_string(),
                d.status.as_str().to_string(),
            ]
        })
        .collect();
    let header = [
        "DEVICE", "MAC", "CAPTURE", "PACKETS", "PAYLOADS", "CLEAR", "TLS", "FINDINGS", "PERIODS", "STATUS",
    ];
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[&str]| {
        let padded: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(&header));
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        let _ = writeln!(out, "{}", line(&cells));
    }

    for d in doc.devices.iter().filter(|d| !d.findings.is_empty()) {
        let _ = writeln!(out, "\n{} ({}) findings:", d.device_id, d.capture);
        for f in &d.findings {
            let _ = writeln!(
                out,
                "  #{:<6} {:<5} {:<20} {}",
                f.packet_index,
                f.severity.to_string(),
                f.category.as_str(),
                f.matched_text
            );
        }
    }

    for d in doc.devices.iter().filter(|d| d.periodicity.is_some()) {
        let p = d.periodicity.expect("filtered");
        let _ = writeln!(
            out,
            "\n{} used every {:.0} s (+/- {:.0} s) across {} periods",
            d.device_id,
            p.median_interval,
            p.dispersion,
            d.activity.len()
        );
    }

    if let Some(m) = &doc.method_report {
        let _ = writeln!(out, "\nmethod comparison over {} payloads:", m.items);
        let _ = writeln!(out, "  {:<12} {:>9} {:>9}", "METHOD", "PRECISION", "FLAGGED");
        for (name, s) in [
            ("ascii", &m.ascii),
            ("entropy", &m.entropy),
            ("chi-squared", &m.chi_squared),
        ] {
            let _ = writeln!(
                out,
                "  {:<12} {:>9} {:>8.1}%",
                name,
                precision(s),
                s.fraction_flagged_cleartext * 100.0
            );
        }
    }
    out
}

fn precision(s: &MethodStats) -> String {
    s.precision.map_or_else(|| "n/a".to_string(), |p| format!("{p:.3}"))
}
