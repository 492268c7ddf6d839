use std::fmt;

use super::{decode_frame, CaptureError, RawPacket, Timestamp};

const GLOBAL_HEADER_LEN: usize = 24;
const RECORD_HEADER_LEN: usize = 16;
const LINKTYPE_ETHERNET: u32 = 1;
const WRITE_SNAPLEN: u32 = 262_144;

const MAGIC_MICROS: u32 = 0xa1b2_c3d4;
const MAGIC_NANOS: u32 = 0xa1b2_3c4d;
const MAGIC_PCAPNG: u32 = 0x0a0d_0d0a;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimestampPrecision {
    Micros,
    Nanos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarningKind {
    /// Fewer than 16 bytes left where a record header was expected.
    TruncatedRecordHeader,
    /// Record declares more captured bytes than the file holds.
    TruncatedFrame,
    /// Record framing was fine but the frame's headers failed to decode.
    UndecodableFrame,
}

/// A per-frame problem that did not abort parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameWarning {
    pub frame: usize,
    pub offset: usize,
    pub kind: WarningKind,
    pub detail: String,
}

impl fmt::Display for FrameWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "frame {} at byte {}: {:?}: {}",
            self.frame, self.offset, self.kind, self.detail
        )
    }
}

/// Decoded contents of one capture file, sorted by timestamp.
#[derive(Debug, Clone)]
pub struct Capture {
    pub packets: Vec<RawPacket>,
    pub warnings: Vec<FrameWarning>,
    pub precision: TimestampPrecision,
}

impl Capture {
    /// Serialize back to a microsecond, little-endian pcap file.
    pub fn to_pcap_bytes(&self) -> Vec<u8> {
        write_capture(self.packets.iter().map(|p| (p.timestamp, p.frame())))
    }
}

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

impl Endian {
    fn u32(self, b: &[u8]) -> u32 {
        let a = [b[0], b[1], b[2], b[3]];
        match self {
            Endian::Little => u32::from_le_bytes(a),
            Endian::Big => u32::from_be_bytes(a),
        }
    }
}

/// Parse a classic pcap file.
///
/// Returns every frame that decodes, stable-sorted by timestamp. Framing
/// problems stop the scan at that point; decode problems skip one frame.
/// Both are reported in [`Capture::warnings`].
pub fn parse_capture(bytes: &[u8]) -> Result<Capture, CaptureError> {
    if bytes.len() < 4 {
        return Err(CaptureError::MalformedCapture(format!(
            "truncated global header ({} bytes)",
            bytes.len()
        )));
    }
    let magic_le = u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
    let (endian, precision) = match magic_le {
        MAGIC_MICROS => (Endian::Little, TimestampPrecision::Micros),
        MAGIC_NANOS => (Endian::Little, TimestampPrecision::Nanos),
        m if m.swap_bytes() == MAGIC_MICROS => (Endian::Big, TimestampPrecision::Micros),
        m if m.swap_bytes() == MAGIC_NANOS => (Endian::Big, TimestampPrecision::Nanos),
        MAGIC_PCAPNG => return Err(CaptureError::UnsupportedFormat("pcapng")),
        m => return Err(CaptureError::MalformedCapture(format!("bad magic number {m:#010x}"))),
    };
    if bytes.len() < GLOBAL_HEADER_LEN {
        return Err(CaptureError::MalformedCapture(format!(
            "truncated global header ({} bytes)",
            bytes.len()
        )));
    }
    // Upper bits of the link-type word carry FCS metadata in newer writers.
    let linktype = endian.u32(&bytes[20..24]) & 0x0fff_ffff;
    if linktype != LINKTYPE_ETHERNET {
        return Err(CaptureError::UnsupportedLinkType(linktype));
    }

    let mut packets = Vec::new();
    let mut warnings = Vec::new();
    let mut offset = GLOBAL_HEADER_LEN;
    let mut frame = 0usize;
    while offset < bytes.len() {
        let remaining = bytes.len() - offset;
        if remaining < RECORD_HEADER_LEN {
            warnings.push(FrameWarning {
                frame,
                offset,
                kind: WarningKind::TruncatedRecordHeader,
                detail: format!("{remaining} trailing bytes"),
            });
            break;
        }
        let rec = &bytes[offset..offset + RECORD_HEADER_LEN];
        let ts_sec = endian.u32(&rec[0..4]) as u64;
        let ts_frac = endian.u32(&rec[4..8]) as u64;
        let caplen = endian.u32(&rec[8..12]) as usize;
        let body_start = offset + RECORD_HEADER_LEN;
        if caplen > bytes.len() - body_start {
            warnings.push(FrameWarning {
                frame,
                offset,
                kind: WarningKind::TruncatedFrame,
                detail: format!("caplen {caplen} exceeds remaining {} bytes", bytes.len() - body_start),
            });
            break;
        }
        let micros = match precision {
            TimestampPrecision::Micros => ts_frac,
            TimestampPrecision::Nanos => ts_frac / 1_000,
        };
        let ts = Timestamp(ts_sec * Timestamp::MICROS_PER_SEC + micros);
        let data = bytes[body_start..body_start + caplen].to_vec();
        match decode_frame(frame, ts, data) {
            Ok(pkt) => packets.push(pkt),
            Err(e) => warnings.push(FrameWarning {
                frame,
                offset,
                kind: WarningKind::UndecodableFrame,
                detail: e.to_string(),
            }),
        }
        offset = body_start + caplen;
        frame += 1;
    }
    // Stable: frames sharing a timestamp keep capture order.
    packets.sort_by_key(|p| p.timestamp);
    Ok(Capture {
        packets,
        warnings,
        precision,
    })
}

/// Write frames as a little-endian, microsecond-precision pcap file with
/// Ethernet link type.
pub fn write_capture<'a, I>(frames: I) -> Vec<u8>
where
    I: IntoIterator<Item = (Timestamp, &'a [u8])>,
{
    let mut out = Vec::with_capacity(GLOBAL_HEADER_LEN);
    out.extend_from_slice(&MAGIC_MICROS.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&4u16.to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&WRITE_SNAPLEN.to_le_bytes());
    out.extend_from_slice(&LINKTYPE_ETHERNET.to_le_bytes());
    for (ts, frame) in frames {
        let len = frame.len() as u32;
        out.extend_from_slice(&ts.seconds_part().to_le_bytes());
        out.extend_from_slice(&ts.micros_part().to_le_bytes());
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(frame);
    }
    out
}
