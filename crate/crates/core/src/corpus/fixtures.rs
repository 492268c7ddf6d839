use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use etherparse::PacketBuilder;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use simple_dns::rdata::{RData, A};
use simple_dns::{Name, Packet, Question, ResourceRecord, CLASS, TYPE};

use super::random_bytes;
use crate::capture::{write_capture, DeviceRegistry, MacAddr, Timestamp};

/// Withings' registered OUI is 00:24:e4.
pub const BP_MONITOR_MAC: MacAddr = MacAddr([0x00, 0x24, 0xe4, 0x3b, 0x5c, 0x01]);
pub const SCALE_MAC: MacAddr = MacAddr([0x00, 0x24, 0xe4, 0x3b, 0x5c, 0x02]);
pub const LAPTOP_MAC: MacAddr = MacAddr([0x3c, 0x15, 0xc2, 0x9a, 0x10, 0x77]);
pub const GATEWAY_MAC: MacAddr = MacAddr([0x02, 0x00, 0x5e, 0x00, 0x00, 0x01]);

pub const BP_MONITOR_LABEL: &str = "bp-monitor";
pub const SCALE_LABEL: &str = "smart-scale";

const GATEWAY_IP: [u8; 4] = [192, 168, 1, 1];
const BP_IP: [u8; 4] = [192, 168, 1, 20];
const SCALE_IP: [u8; 4] = [192, 168, 1, 21];
const LAPTOP_IP: [u8; 4] = [192, 168, 1, 30];

// Addresses are chosen for the fixture; only the hostnames come from the
// observed traffic.
const MEASURE_HOST: &str = "scalews.withings.net";
const MEASURE_IP: [u8; 4] = [89, 30, 121, 150];
const STATIC_HOST: &str = "static.withings.com";
const STATIC_IP: [u8; 4] = [89, 30, 121, 160];
const SCALE_API_IP: [u8; 4] = [89, 30, 121, 170];
const EXAMPLE_HOST: &str = "www.example.org";
const EXAMPLE_IP: [u8; 4] = [93, 184, 216, 34];

/// 2017-05-01 07:30:00 UTC.
const DAY0: u64 = 1_493_623_800;
const DAY: u64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Blood pressure monitor uploading readings over plain HTTP, then
    /// fetching a picture.
    BpMonitorLeaky,
    /// Scale that only speaks TLS on port 443.
    ScaleEncrypted,
    /// Both devices plus an unregistered laptop.
    MixedHome,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Self::BpMonitorLeaky, Self::ScaleEncrypted, Self::MixedHome];

    pub fn name(self) -> &'static str {
        match self {
            Self::BpMonitorLeaky => "bp-monitor-leaky",
            Self::ScaleEncrypted => "scale-encrypted",
            Self::MixedHome => "mixed-home",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scenario {0:?} (expected bp-monitor-leaky, scale-encrypted or mixed-home)")]
pub struct UnknownScenario(pub String);

impl FromStr for Scenario {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| UnknownScenario(s.to_string()))
    }
}

/// Registry naming the devices a scenario exercises. The laptop in
/// `mixed-home` is not included.
pub fn fixture_registry(scenario: Scenario) -> DeviceRegistry {
    let mut reg = DeviceRegistry::new();
    let bp = || (BP_MONITOR_MAC, BP_MONITOR_LABEL);
    let scale = || (SCALE_MAC, SCALE_LABEL);
    let entries = match scenario {
        Scenario::BpMonitorLeaky => vec![bp()],
        Scenario::ScaleEncrypted => vec![scale()],
        Scenario::MixedHome => vec![bp(), scale()],
    };
    for (mac, label) in entries {
        reg.insert(mac, label).expect("fixture registry is valid");
    }
    reg
}

/// Classic pcap bytes for `scenario`, identical on every call.
pub fn build_fixture_capture(scenario: Scenario) -> Vec<u8> {
    let mut t = Trace::new(scenario as u64);
    match scenario {
        Scenario::BpMonitorLeaky => {
            for day in 0..3 {
                bp_session(&mut t, DAY0 + day * DAY, day);
            }
        }
        Scenario::ScaleEncrypted => {
            for day in 0..3 {
                scale_session(&mut t, DAY0 + day * DAY + 600, day);
            }
        }
        Scenario::MixedHome => {
            for day in 0..3 {
                bp_session(&mut t, DAY0 + day * DAY, day);
                scale_session(&mut t, DAY0 + day * DAY + 20, day);
                laptop_browsing(&mut t, DAY0 + day * DAY + 5, day);
            }
        }
    }
    t.into_pcap()
}

#[derive(Clone, Copy)]
struct Host {
    mac: MacAddr,
    ip: [u8; 4],
}

const BP: Host = Host {
    mac: BP_MONITOR_MAC,
    ip: BP_IP,
};
const SCALE: Host = Host {
    mac: SCALE_MAC,
    ip: SCALE_IP,
};
const LAPTOP: Host = Host {
    mac: LAPTOP_MAC,
    ip: LAPTOP_IP,
};

/// Remote peers are all reached through the gateway's MAC.
fn remote(ip: [u8; 4]) -> Host {
    Host { mac: GATEWAY_MAC, ip }
}

struct Trace {
    frames: Vec<(Timestamp, Vec<u8>)>,
    rng: ChaCha20Rng,
}

/// One TCP connection with running sequence numbers.
struct Conn {
    client: Host,
    server: Host,
    cport: u16,
    sport: u16,
    cseq: u32,
    sseq: u32,
}

impl Trace {
    fn new(seed: u64) -> Self {
        Trace {
            frames: Vec::new(),
            rng: ChaCha20Rng::seed_from_u64(0x6d65_646c_6561_6b00 ^ seed),
        }
    }

    fn push(&mut self, at: f64, frame: Vec<u8>) {
        self.frames.push((Timestamp::from_secs_f64(at), frame));
    }

    fn udp(&mut self, at: f64, from: Host, to: Host, sport: u16, dport: u16, payload: &[u8]) {
        let mut f = Vec::new();
        PacketBuilder::ethernet2(from.mac.0, to.mac.0)
            .ipv4(from.ip, to.ip, 64)
            .udp(sport, dport)
            .write(&mut f, payload)
            .expect("udp frame");
        self.push(at, f);
    }

    fn dns_lookup(&mut self, at: f64, client: Host, id: u16, name: &str, addr: [u8; 4]) {
        let sport = 53_000 + id % 1000;
        self.udp(at, client, remote(GATEWAY_IP), sport, 53, &dns_query(id, name));
        self.udp(
            at + 0.012,
            remote(GATEWAY_IP),
            client,
            53,
            sport,
            &dns_answer(id, name, addr),
        );
    }

    fn tcp(&mut self, at: f64, c: &mut Conn, from_client: bool, flags: Flags, payload: &[u8]) {
        let (from, to, sp, dp, seq, ack) = if from_client {
            (c.client, c.server, c.cport, c.sport, c.cseq, c.sseq)
        } else {
            (c.server, c.client, c.sport, c.cport, c.sseq, c.cseq)
        };
        let mut b = PacketBuilder::ethernet2(from.mac.0, to.mac.0)
            .ipv4(from.ip, to.ip, 64)
            .tcp(sp, dp, seq, 29_200);
        if flags.syn {
            b = b.syn();
        }
        if flags.ack {
            b = b.ack(ack);
        }
        if flags.psh {
            b = b.psh();
        }
        if flags.fin {
            b = b.fin();
        }
        let mut f = Vec::new();
        b.write(&mut f, payload).expect("tcp frame");
        self.push(at, f);
        let advance = payload.len() as u32 + u32::from(flags.syn) + u32::from(flags.fin);
        if from_client {
            c.cseq = c.cseq.wrapping_add(advance);
        } else {
            c.sseq = c.sseq.wrapping_add(advance);
        }
    }

    /// SYN, SYN-ACK, ACK starting at `at`; returns the time after it.
    fn connect(&mut self, at: f64, client: Host, server: Host, cport: u16, sport: u16) -> (Conn, f64) {
        let mut c = Conn {
            client,
            server,
            cport,
            sport,
            cseq: 1_000_000 + u32::from(cport) * 7,
            sseq: 3_000_000 + u32::from(cport) * 13,
        };
        self.tcp(at, &mut c, true, Flags::SYN, &[]);
        self.tcp(at + 0.03, &mut c, false, Flags::SYN_ACK, &[]);
        self.tcp(at + 0.031, &mut c, true, Flags::ACK, &[]);
        (c, at + 0.05)
    }

    fn close(&mut self, at: f64, c: &mut Conn) {
        self.tcp(at, c, true, Flags::FIN_ACK, &[]);
        self.tcp(at + 0.03, c, false, Flags::FIN_ACK, &[]);
        self.tcp(at + 0.031, c, true, Flags::ACK, &[]);
    }

    fn arp(&mut self, at: f64, asker: Host, target_ip: [u8; 4], answer_mac: MacAddr) {
        self.push(
            at,
            arp_frame(1, asker.mac, asker.ip, MacAddr::BROADCAST, MacAddr([0; 6]), target_ip),
        );
        self.push(
            at + 0.001,
            arp_frame(2, answer_mac, target_ip, asker.mac, asker.mac, asker.ip),
        );
    }

    fn into_pcap(mut self) -> Vec<u8> {
        self.frames.sort_by_key(|(ts, _)| *ts);
        write_capture(self.frames.iter().map(|(ts, f)| (*ts, f.as_slice())))
    }
}

#[derive(Clone, Copy)]
struct Flags {
    syn: bool,
    ack: bool,
    psh: bool,
    fin: bool,
}

impl Flags {
    const SYN: Flags = Flags {
        syn: true,
        ack: false,
        psh: false,
        fin: false,
    };
    const SYN_ACK: Flags = Flags {
        syn: true,
        ack: true,
        psh: false,
        fin: false,
    };
    const ACK: Flags = Flags {
        syn: false,
        ack: true,
        psh: false,
        fin: false,
    };
    const PSH_ACK: Flags = Flags {
        syn: false,
        ack: true,
        psh: true,
        fin: false,
    };
    const FIN_ACK: Flags = Flags {
        syn: false,
        ack: true,
        psh: false,
        fin: true,
    };
}

fn dns_query(id: u16, name: &str) -> Vec<u8> {
    let mut p = Packet::new_query(id);
    p.questions.push(Question::new(
        Name::new_unchecked(name),
        TYPE::A.into(),
        CLASS::IN.into(),
        false,
    ));
    p.build_bytes_vec().expect("dns query")
}

fn dns_answer(id: u16, name: &str, addr: [u8; 4]) -> Vec<u8> {
    let mut p = Packet::new_reply(id);
    p.questions.push(Question::new(
        Name::new_unchecked(name),
        TYPE::A.into(),
        CLASS::IN.into(),
        false,
    ));
    p.answers.push(ResourceRecord::new(
        Name::new_unchecked(name),
        CLASS::IN,
        300,
        RData::A(A {
            address: u32::from(Ipv4Addr::from(addr)),
        }),
    ));
    p.build_bytes_vec().expect("dns answer")
}

fn arp_frame(
    op: u16,
    src: MacAddr,
    src_ip: [u8; 4],
    eth_dst: MacAddr,
    target_mac: MacAddr,
    target_ip: [u8; 4],
) -> Vec<u8> {
    let mut f = Vec::with_capacity(60);
    f.extend_from_slice(&eth_dst.0);
    f.extend_from_slice(&src.0);
    f.extend_from_slice(&0x0806u16.to_be_bytes());
    f.extend_from_slice(&[0, 1, 0x08, 0x00, 6, 4]);
    f.extend_from_slice(&op.to_be_bytes());
    f.extend_from_slice(&src.0);
    f.extend_from_slice(&src_ip);
    f.extend_from_slice(&target_mac.0);
    f.extend_from_slice(&target_ip);
    f.resize(60, 0);
    f
}

/// Readings vary a little from day to day.
fn bp_reading(day: u64) -> (u32, u32, u32) {
    [(128, 84, 71), (131, 86, 68), (125, 82, 74)][(day % 3) as usize]
}

fn bp_session(t: &mut Trace, start: u64, day: u64) {
    let s = start as f64;
    let (sys, dia, pulse) = bp_reading(day);
    let id = 0x2a00 + day as u16 * 2;

    t.dns_lookup(s, BP, id, MEASURE_HOST, MEASURE_IP);
    let (mut c, at) = t.connect(s + 0.1, BP, remote(MEASURE_IP), 49_152 + day as u16 * 2, 80);
    let body = format!(
        "userid=4415732&meastype=blood_pressure&systolic={sys}&diastolic={dia}&heart_pulse={pulse}&date={}",
        start + 12
    );
    let post = format!(
        "POST /cgi-bin/measure?action=store&appname=withings_mobile_app=ios_healthmate&type=blood_pressure HTTP/1.1\r\n\
Host: {MEASURE_HOST}\r\n\
User-Agent: Withings UserAgent/1.0\r\n\
Accept: */*\r\n\
Cookie: session_key=7f3a9c21e0b44d18; current_user=4415732\r\n\
Content-Type: application/x-www-form-urlencoded\r\n\
Content-Length: {}\r\n\
Connection: keep-alive\r\n\r\n{body}",
        body.len()
    );
    t.tcp(at, &mut c, true, Flags::PSH_ACK, post.as_bytes());
    let reply = "{\"status\":0,\"body\":{\"updatetime\":1493623812}}";
    let resp = format!(
        "HTTP/1.1 200 OK\r\nServer: Apache\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
        reply.len()
    );
    t.tcp(at + 0.25, &mut c, false, Flags::PSH_ACK, resp.as_bytes());
    t.tcp(at + 0.26, &mut c, true, Flags::ACK, &[]);
    t.close(at + 0.3, &mut c);

    let g = s + 2.0;
    t.dns_lookup(g, BP, id + 1, STATIC_HOST, STATIC_IP);
    let (mut c, at) = t.connect(g + 0.1, BP, remote(STATIC_IP), 49_153 + day as u16 * 2, 80);
    let get = format!(
        "GET /img/bpm_usage.jpg HTTP/1.1\r\nHost: {STATIC_HOST}\r\nUser-Agent: Withings UserAgent/1.0\r\nAccept: image/webp,image/*,*/*;q=0.8\r\nAccept-Language: en-us\r\nConnection: keep-alive\r\n\r\n"
    );
    t.tcp(at, &mut c, true, Flags::PSH_ACK, get.as_bytes());
    // The picture arrives in two segments; the second carries no HTTP head.
    let mut jpeg = vec![0xff, 0xd8, 0xff, 0xe0, 0x00, 0x10, b'J', b'F', b'I', b'F', 0x00];
    jpeg.extend(random_bytes(&mut t.rng, 1400));
    let head = format!(
        "HTTP/1.1 200 OK\r\nServer: Apache\r\nContent-Type: image/jpeg\r\nContent-Length: {}\r\n\r\n",
        jpeg.len()
    );
    let split = 1200 - head.len();
    let mut first = head.into_bytes();
    first.extend_from_slice(&jpeg[..split]);
    t.tcp(at + 0.2, &mut c, false, Flags::ACK, &first);
    t.tcp(at + 0.21, &mut c, false, Flags::PSH_ACK, &jpeg[split..]);
    t.tcp(at + 0.22, &mut c, true, Flags::ACK, &[]);
    t.close(at + 0.3, &mut c);
}

/// A TLS record with the given content type and a random body.
fn tls_record(rng: &mut ChaCha20Rng, content_type: u8, minor: u8, len: usize) -> Vec<u8> {
    let mut r = vec![content_type, 3, minor];
    r.extend_from_slice(&(len as u16).to_be_bytes());
    r.extend(random_bytes(rng, len));
    r
}

fn scale_session(t: &mut Trace, start: u64, day: u64) {
    let s = start as f64;
    let (mut c, at) = t.connect(s, SCALE, remote(SCALE_API_IP), 50_000 + day as u16, 443);
    let hello = tls_record(&mut t.rng, 0x16, 1, 512);
    t.tcp(at, &mut c, true, Flags::PSH_ACK, &hello);
    let server_hello = tls_record(&mut t.rng, 0x16, 3, 1300);
    t.tcp(at + 0.08, &mut c, false, Flags::PSH_ACK, &server_hello);
    t.tcp(at + 0.09, &mut c, true, Flags::ACK, &[]);
    let key_exchange = tls_record(&mut t.rng, 0x16, 3, 150);
    t.tcp(at + 0.12, &mut c, true, Flags::PSH_ACK, &key_exchange);
    let finished = tls_record(&mut t.rng, 0x14, 3, 1);
    t.tcp(at + 0.2, &mut c, false, Flags::PSH_ACK, &finished);
    for i in 0..3 {
        let len = 300 + 200 * i;
        let data = tls_record(&mut t.rng, 0x17, 3, len);
        t.tcp(at + 0.3 + i as f64 * 0.1, &mut c, true, Flags::PSH_ACK, &data);
        t.tcp(at + 0.33 + i as f64 * 0.1, &mut c, false, Flags::ACK, &[]);
    }
    let reply = tls_record(&mut t.rng, 0x17, 3, 90);
    t.tcp(at + 0.7, &mut c, false, Flags::PSH_ACK, &reply);
    t.tcp(at + 0.71, &mut c, true, Flags::ACK, &[]);
    t.close(at + 0.8, &mut c);
}

fn laptop_browsing(t: &mut Trace, start: u64, day: u64) {
    let s = start as f64;
    t.arp(s, LAPTOP, GATEWAY_IP, GATEWAY_MAC);
    t.dns_lookup(s + 0.01, LAPTOP, 0x5100 + day as u16, EXAMPLE_HOST, EXAMPLE_IP);
    let (mut c, at) = t.connect(s + 0.05, LAPTOP, remote(EXAMPLE_IP), 51_000 + day as u16, 80);
    let get = format!("GET /health/blood-pressure-chart?name=alice HTTP/1.1\r\nHost: {EXAMPLE_HOST}\r\nUser-Agent: Mozilla/5.0\r\nAccept: text/html\r\nCookie: current_user=9001\r\n\r\n");
    t.tcp(at, &mut c, true, Flags::PSH_ACK, get.as_bytes());
    let page = "<html><body><h1>Blood pressure chart</h1><p>Normal systolic readings are below 120.</p></body></html>";
    let resp = format!(
        "HTTP/1.1 200 OK\r\nContent-Type: text/html\r\nContent-Length: {}\r\n\r\n{page}",
        page.len()
    );
    t.tcp(at + 0.1, &mut c, false, Flags::PSH_ACK, resp.as_bytes());
    t.tcp(at + 0.11, &mut c, true, Flags::ACK, &[]);
    t.close(at + 0.2, &mut c);
}
