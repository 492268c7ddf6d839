use std::net::IpAddr;

use etherparse::{LinkSlice, NetSlice, SlicedPacket, TransportSlice};

use super::{IpInfo, MacAddr, RawPacket, Timestamp, TransportInfo, TransportKind};

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("{0}")]
    Slice(#[from] etherparse::err::packet::SliceError),
    #[error("frame has no Ethernet II header")]
    NotEthernet,
}

/// Offset of `inner` inside `outer`; both must come from the same buffer.
fn offset_in(outer: &[u8], inner: &[u8]) -> usize {
    let start = inner.as_ptr() as usize - outer.as_ptr() as usize;
    debug_assert!(start + inner.len() <= outer.len());
    start
}

/// Decode one Ethernet II frame through the transport layer.
///
/// VLAN tags are walked over. TCP and UDP are decoded for ports; any other
/// IP protocol (or a fragment) keeps the IP payload as its payload. Non-IP
/// frames such as ARP keep the Ethernet payload.
pub fn decode_frame(index: usize, timestamp: Timestamp, frame: Vec<u8>) -> Result<RawPacket, DecodeError> {
    let (src_mac, dst_mac, ethertype, ip, transport, payload_offset, payload_len) = {
        let sliced = SlicedPacket::from_ethernet(&frame)?;
        let eth = match &sliced.link {
            Some(LinkSlice::Ethernet2(eth)) => eth,
            _ => return Err(DecodeError::NotEthernet),
        };
        let src_mac = MacAddr(eth.source());
        let dst_mac = MacAddr(eth.destination());
        let ether_payload = sliced
            .link_exts
            .last()
            .and_then(|ext| ext.ether_payload())
            .unwrap_or_else(|| eth.payload());
        let ethertype = ether_payload.ether_type.0;

        let mut ip = None;
        let mut payload: &[u8] = ether_payload.payload;
        match &sliced.net {
            Some(NetSlice::Ipv4(v4)) => {
                let h = v4.header();
                ip = Some(IpInfo {
                    src: IpAddr::V4(h.source_addr()),
                    dst: IpAddr::V4(h.destination_addr()),
                    protocol: v4.payload().ip_number.0,
                });
                payload = v4.payload().payload;
            }
            Some(NetSlice::Ipv6(v6)) => {
                let h = v6.header();
                ip = Some(IpInfo {
                    src: IpAddr::V6(h.source_addr()),
                    dst: IpAddr::V6(h.destination_addr()),
                    protocol: v6.payload().ip_number.0,
                });
                payload = v6.payload().payload;
            }
            Some(NetSlice::Arp(arp)) => payload = arp.slice(),
            None => {}
        }

        let mut transport = None;
        match &sliced.transport {
            Some(TransportSlice::Tcp(tcp)) => {
                transport = Some(TransportInfo {
                    src_port: tcp.source_port(),
                    dst_port: tcp.destination_port(),
                    kind: TransportKind::Tcp,
                });
                payload = tcp.payload();
            }
            Some(TransportSlice::Udp(udp)) => {
                transport = Some(TransportInfo {
                    src_port: udp.source_port(),
                    dst_port: udp.destination_port(),
                    kind: TransportKind::Udp,
                });
                payload = udp.payload();
            }
            // ICMP and friends: keep the whole IP payload.
            _ => {}
        }
        let payload_offset = if payload.is_empty() {
            // An empty slice may not point into the frame; place it after the
            // last header byte instead.
            frame.len() - trailing_len(&sliced, &frame)
        } else {
            offset_in(&frame, payload)
        };
        (
            src_mac,
            dst_mac,
            ethertype,
            ip,
            transport,
            payload_offset,
            payload.len(),
        )
    };
    Ok(RawPacket {
        index,
        timestamp,
        src_mac,
        dst_mac,
        ethertype,
        ip,
        transport,
        frame,
        payload_offset,
        payload_len,
    })
}

/// Bytes past the innermost decoded layer (Ethernet padding).
fn trailing_len(sliced: &SlicedPacket<'_>, frame: &[u8]) -> usize {
    let end = match (&sliced.transport, &sliced.net) {
        (Some(TransportSlice::Tcp(t)), _) => offset_in(frame, t.slice()) + t.slice().len(),
        (Some(TransportSlice::Udp(u)), _) => offset_in(frame, u.slice()) + u.slice().len(),
        (_, Some(NetSlice::Ipv4(v4))) => {
            let p = v4.payload().payload;
            if p.is_empty() {
                offset_in(frame, v4.header().slice()) + v4.header().slice().len()
            } else {
                offset_in(frame, p) + p.len()
            }
        }
        (_, Some(NetSlice::Ipv6(v6))) => {
            let p = v6.payload().payload;
            if p.is_empty() {
                offset_in(frame, v6.header().slice()) + v6.header().slice().len()
            } else {
                offset_in(frame, p) + p.len()
            }
        }
        (_, Some(NetSlice::Arp(a))) => offset_in(frame, a.slice()) + a.slice().len(),
        _ => frame.len(),
    };
    frame.len() - end
}
