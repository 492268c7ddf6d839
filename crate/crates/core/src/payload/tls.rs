use serde::{Deserialize, Serialize};

use super::AppPayload;

pub const TLS_PORT: u16 = 443;

/// Which rule marked a payload as TLS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TlsReason {
    PortBased,
    RecordBased,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TlsVerdict {
    pub is_tls: bool,
    pub reason: Option<TlsReason>,
    /// `(major, minor)` from the record header, when the record rule fired.
    pub version: Option<(u8, u8)>,
}

impl TlsVerdict {
    const CLEAR: TlsVerdict = TlsVerdict {
        is_tls: false,
        reason: None,
        version: None,
    };
}

/// Port 443 on either side, or a record header: content type 20..=23
/// (change_cipher_spec, alert, handshake, application_data) followed by
/// version 3.0 through 3.4.
pub fn detect_tls(payload: &AppPayload<'_>) -> TlsVerdict {
    detect_tls_parts(payload.src_port, payload.dst_port, payload.bytes)
}

/// [`detect_tls`] on raw parts. Only the ports and the first three bytes
/// are consulted.
pub fn detect_tls_parts(src_port: u16, dst_port: u16, bytes: &[u8]) -> TlsVerdict {
    let by_port = src_port == TLS_PORT || dst_port == TLS_PORT;
    let version = match bytes {
        [0x14..=0x17, 3, minor @ 0..=4, ..] => Some((3, *minor)),
        _ => None,
    };
    let reason = match (by_port, version.is_some()) {
        (true, true) => TlsReason::Both,
        (true, false) => TlsReason::PortBased,
        (false, true) => TlsReason::RecordBased,
        (false, false) => return TlsVerdict::CLEAR,
    };
    TlsVerdict {
        is_tls: true,
        reason: Some(reason),
        version,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tls12_application_data_on_443() {
        let v = detect_tls_parts(50123, 443, &[0x17, 0x03, 0x03, 0x00, 0x20]);
        assert!(v.is_tls);
        assert_eq!(v.reason, Some(TlsReason::Both));
        assert_eq!(v.version, Some((3, 3)));
    }

    #[test]
    fn plain_http_on_80() {
        let v = detect_tls_parts(50123, 80, b"GET / HTTP/1.1\r\n");
        assert_eq!(v, TlsVerdict::CLEAR);
        assert!(v.reason.is_none());
    }

    #[test]
    fn handshake_on_mqtt_port() {
        let v = detect_tls_parts(50123, 8883, &[0x16, 0x03, 0x01, 0x00, 0xa5, 0x01]);
        assert!(v.is_tls);
        assert_eq!(v.reason, Some(TlsReason::RecordBased));
        assert_eq!(v.version, Some((3, 1)));
    }

    #[test]
    fn port_only() {
        let v = detect_tls_parts(443, 50000, b"random");
        assert_eq!(v.reason, Some(TlsReason::PortBased));
        assert_eq!(v.version, None);
    }

    #[test]
    fn record_edges() {
        assert!(!detect_tls_parts(1, 2, &[0x13, 3, 3]).is_tls);
        assert!(!detect_tls_parts(1, 2, &[0x18, 3, 3]).is_tls);
        assert!(!detect_tls_parts(1, 2, &[0x17, 3, 5]).is_tls);
        assert!(!detect_tls_parts(1, 2, &[0x17, 2, 0]).is_tls);
        assert!(!detect_tls_parts(1, 2, &[0x17, 3]).is_tls);
        assert!(detect_tls_parts(1, 2, &[0x14, 3, 0]).is_tls);
        assert!(detect_tls_parts(1, 2, &[0x15, 3, 4]).is_tls);
    }
}
