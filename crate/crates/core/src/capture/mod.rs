//! Capture ingestion: classic libpcap files in, decoded Ethernet frames out,
//! partitioned into per-device streams by hardware address.
//!
//! Only the classic pcap container with link type Ethernet (1) is accepted.
//! Both the microsecond and nanosecond variants are read, in either byte
//! order; timestamps are normalized to microseconds. PCAPNG is rejected with
//! [`CaptureError::UnsupportedFormat`].
//!
//! A frame whose headers fail to decode is skipped and recorded as a
//! [`FrameWarning`]; only a broken global header aborts parsing.

mod decode;
mod device;
mod pcap;

use std::fmt;
use std::net::IpAddr;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use decode::{decode_frame, DecodeError};
pub use device::{split_by_device, DeviceRegistry, DeviceStream, Partition, RegistryError};
pub use pcap::{parse_capture, write_capture, Capture, FrameWarning, TimestampPrecision, WarningKind};

/// Errors that abort parsing of a whole capture.
#[derive(Debug, thiserror::Error)]
pub enum CaptureError {
    #[error("malformed capture: {0}")]
    MalformedCapture(String),
    #[error("unsupported capture format: {0}")]
    UnsupportedFormat(&'static str),
    #[error("unsupported link type {0} (only Ethernet is supported)")]
    UnsupportedLinkType(u32),
}

/// A 48-bit IEEE 802 hardware address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MacAddr(pub [u8; 6]);

impl MacAddr {
    pub const BROADCAST: MacAddr = MacAddr([0xff; 6]);

    pub fn octets(&self) -> [u8; 6] {
        self.0
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            o[0], o[1], o[2], o[3], o[4], o[5]
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid MAC address {0:?}")]
pub struct ParseMacError(pub String);

impl FromStr for MacAddr {
    type Err = ParseMacError;

    /// Accepts `aa:bb:cc:dd:ee:ff` or `aa-bb-cc-dd-ee-ff`, any case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseMacError(s.to_string());
        let sep = if s.contains('-') { '-' } else { ':' };
        let mut out = [0u8; 6];
        let mut parts = s.trim().split(sep);
        for slot in out.iter_mut() {
            let part = parts.next().ok_or_else(err)?;
            if part.len() != 2 {
                return Err(err());
            }
            *slot = u8::from_str_radix(part, 16).map_err(|_| err())?;
        }
        if parts.next().is_some() {
            return Err(err());
        }
        Ok(MacAddr(out))
    }
}

impl Serialize for MacAddr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MacAddr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Capture timestamp in microseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub const MICROS_PER_SEC: u64 = 1_000_000;

    pub fn from_secs(secs: u64) -> Self {
        Timestamp(secs * Self::MICROS_PER_SEC)
    }

    pub fn from_secs_f64(secs: f64) -> Self {
        Timestamp((secs * Self::MICROS_PER_SEC as f64).round() as u64)
    }

    pub fn micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / Self::MICROS_PER_SEC as f64
    }

    pub fn seconds_part(self) -> u32 {
        (self.0 / Self::MICROS_PER_SEC) as u32
    }

    pub fn micros_part(self) -> u32 {
        (self.0 % Self::MICROS_PER_SEC) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    Tcp,
    Udp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IpInfo {
    pub src: IpAddr,
    pub dst: IpAddr,
    /// IANA protocol number of the IP payload (6 = TCP, 17 = UDP, ...).
    pub protocol: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransportInfo {
    pub src_port: u16,
    pub dst_port: u16,
    pub kind: TransportKind,
}

/// One decoded frame.
///
/// The full captured frame is kept so that captures can be reserialized;
/// the payload is a window into it. Any Ethernet trailer (minimum-size
/// padding past the IP datagram) counts neither as header nor as payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPacket {
    /// Position of the frame within its capture file, before sorting.
    pub index: usize,
    pub timestamp: Timestamp,
    pub src_mac: MacAddr,
    pub dst_mac: MacAddr,
    pub ethertype: u16,
    pub ip: Option<IpInfo>,
    pub transport: Option<TransportInfo>,
    pub(crate) frame: Vec<u8>,
    pub(crate) payload_offset: usize,
    pub(crate) payload_len: usize,
}

impl RawPacket {
    pub fn frame(&self) -> &[u8] {
        &self.frame
    }

    pub fn frame_len(&self) -> usize {
        self.frame.len()
    }

    /// Bytes remaining after every decoded header.
    pub fn payload(&self) -> &[u8] {
        &self.frame[self.payload_offset..self.payload_offset + self.payload_len]
    }

    /// Total length of the decoded link, network and transport headers.
    pub fn header_len(&self) -> usize {
        self.payload_offset
    }

    pub fn trailer_len(&self) -> usize {
        self.frame.len() - self.payload_offset - self.payload_len
    }

    /// True when this frame was sent or received by `mac`.
    pub fn involves(&self, mac: MacAddr) -> bool {
        self.src_mac == mac || self.dst_mac == mac
    }

    /// Address of the peer, seen from the device owning `mac`.
    pub fn remote_addr(&self, mac: MacAddr) -> Option<IpAddr> {
        let ip = self.ip?;
        Some(if self.src_mac == mac { ip.dst } else { ip.src })
    }
}
