//! Application-layer payload extraction, TLS exclusion and plaintext HTTP
//! parsing.
//!
//! Payloads are analyzed one packet at a time; TCP segments are not
//! reassembled, so a request split across segments is only seen in pieces.

mod http;
mod tls;

use serde::{Deserialize, Serialize};

use crate::capture::{DeviceStream, Timestamp, TransportKind};

pub use http::{parse_http, parse_http_bytes, HttpKind, HttpMessage, HTTP_METHODS};
pub use tls::{detect_tls, detect_tls_parts, TlsReason, TlsVerdict, TLS_PORT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Outbound,
    Inbound,
}

/// Non-empty transport payload of one packet, oriented relative to its device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppPayload<'a> {
    pub packet_index: usize,
    pub timestamp: Timestamp,
    pub direction: Direction,
    pub src_port: u16,
    pub dst_port: u16,
    pub transport_kind: TransportKind,
    pub bytes: &'a [u8],
}

impl AppPayload<'_> {
    pub fn port_pair(&self) -> (u16, u16) {
        (self.src_port, self.dst_port)
    }

    /// The device-side and remote-side ports, in that order.
    pub fn device_remote_ports(&self) -> (u16, u16) {
        match self.direction {
            Direction::Outbound => (self.src_port, self.dst_port),
            Direction::Inbound => (self.dst_port, self.src_port),
        }
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// One payload per packet that carries TCP or UDP application bytes.
/// Bare ACKs, empty datagrams and non-transport frames are dropped.
pub fn extract_payloads<'a>(stream: &DeviceStream<'a>) -> Vec<AppPayload<'a>> {
    stream
        .packets
        .iter()
        .filter_map(|pkt| {
            let t = pkt.transport?;
            let bytes = pkt.payload();
            if bytes.is_empty() {
                return None;
            }
            let direction = if pkt.src_mac == stream.mac {
                Direction::Outbound
            } else {
                Direction::Inbound
            };
            Some(AppPayload {
                packet_index: pkt.index,
                timestamp: pkt.timestamp,
                direction,
                src_port: t.src_port,
                dst_port: t.dst_port,
                transport_kind: t.kind,
                bytes,
            })
        })
        .collect()
}
