use std::collections::BTreeMap;
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};

use simple_dns::rdata::RData;
use simple_dns::Packet;

use crate::capture::{RawPacket, TransportKind};
use crate::payload::{detect_tls_parts, parse_http_bytes};

pub const DNS_PORT: u16 = 53;

/// Address to hostname bindings observed inside one capture.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HostMap {
    names: BTreeMap<IpAddr, String>,
}

impl HostMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// DNS answers first, then `Host` headers of plaintext HTTP requests for
    /// addresses DNS did not name. Earlier evidence wins.
    pub fn from_packets<'a, I>(packets: I) -> Self
    where
        I: IntoIterator<Item = &'a RawPacket>,
    {
        let packets: Vec<&RawPacket> = packets.into_iter().collect();
        let mut map = HostMap::new();
        for pkt in &packets {
            for (name, addr) in dns_answers(pkt) {
                map.insert(addr, name);
            }
        }
        for pkt in &packets {
            let (Some(ip), Some(t)) = (pkt.ip, pkt.transport) else {
                continue;
            };
            if t.kind != TransportKind::Tcp || detect_tls_parts(t.src_port, t.dst_port, pkt.payload()).is_tls {
                continue;
            }
            if let Some(host) = parse_http_bytes(pkt.payload())
                .filter(|m| m.is_request())
                .and_then(|m| m.host)
            {
                map.insert(ip.dst, host);
            }
        }
        map
    }

    /// Bind `name` to `addr` unless the address already has a name.
    pub fn insert(&mut self, addr: IpAddr, name: impl Into<String>) {
        let name = name.into().trim_end_matches('.').to_ascii_lowercase();
        if !name.is_empty() {
            self.names.entry(addr).or_insert(name);
        }
    }

    pub fn get(&self, addr: &IpAddr) -> Option<&str> {
        self.names.get(addr).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IpAddr, &str)> {
        self.names.iter().map(|(a, n)| (a, n.as_str()))
    }
}

/// A and AAAA records in a DNS response carried over UDP port 53, as
/// (queried name, address). Anything that is not a parseable response
/// yields nothing.
pub fn dns_answers(pkt: &RawPacket) -> Vec<(String, IpAddr)> {
    let Some(t) = pkt.transport else { return Vec::new() };
    if t.kind != TransportKind::Udp || t.src_port != DNS_PORT {
        return Vec::new();
    }
    let Ok(msg) = Packet::parse(pkt.payload()) else {
        return Vec::new();
    };
    // CNAME chains end at the target's A record; report the name the
    // device actually asked for.
    let asked = msg.questions.first().map(|q| q.qname.to_string());
    msg.answers
        .iter()
        .filter_map(|rr| {
            let addr = match &rr.rdata {
                RData::A(a) => IpAddr::V4(Ipv4Addr::from(a.address)),
                RData::AAAA(a) => IpAddr::V6(Ipv6Addr::from(a.address)),
                _ => return None,
            };
            let name = asked.clone().unwrap_or_else(|| rr.name.to_string());
            Some((name, addr))
        })
        .collect()
}
