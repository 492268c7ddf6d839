#![allow(dead_code)]

use etherparse::PacketBuilder;
use medleak::capture::{write_capture, DeviceRegistry, MacAddr, Timestamp};
use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};

pub const DEVICES: [MacAddr; 3] = [
    MacAddr([0x00, 0x24, 0xe4, 0, 0, 1]),
    MacAddr([0x00, 0x24, 0xe4, 0, 0, 2]),
    MacAddr([0x00, 0x24, 0xe4, 0, 0, 3]),
];
pub const OTHERS: [MacAddr; 3] = [
    MacAddr([0x02, 0, 0, 0, 0, 1]),
    MacAddr([0x3c, 0x15, 0xc2, 0, 0, 9]),
    MacAddr::BROADCAST,
];

const WORDS: &[&str] = &[
    "blood_pressure",
    "Heart-Rate",
    "glucose",
    "weight",
    "alice",
    "Robert",
    "date of birth",
    "ssn",
    "current_user=42",
    "userid=7",
    "uid",
    "withings",
    "hello",
    "the",
    "value",
    "x",
    "report",
    "status=ok",
    "name=Mary",
    "insulin",
    "a",
    "zz",
    "--",
    "__",
    "é",
    "data",
    "sync",
    "photo id",
    "email_address",
    "sleep apnea",
];

const HOSTS: &[&str] = &[
    "scalews.withings.net",
    "static.withings.com",
    "example.com",
    "api.example.org",
];
const PATHS: &[&str] = &[
    "/img/a.jpg",
    "/img/b.PNG",
    "/measure",
    "/",
    "/x.gif",
    "/cgi-bin/q?type=blood_pressure",
];

fn text(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..40);
    let seps = [" ", "&", "=", ";", "\r\n", ",", "_", "-", "  ", "/"];
    let mut s = String::new();
    for _ in 0..n {
        s.push_str(WORDS.choose(rng).unwrap());
        s.push_str(seps.choose(rng).unwrap());
    }
    s
}

fn http(rng: &mut impl Rng) -> String {
    let method = ["GET", "POST", "GET"].choose(rng).unwrap();
    let path = PATHS.choose(rng).unwrap();
    let mut s = format!("{method} {path} HTTP/1.1\r\nHost: {}\r\n", HOSTS.choose(rng).unwrap());
    if rng.random_bool(0.5) {
        s.push_str(&format!("Cookie: {}\r\n", text(rng).replace("\r\n", " ")));
    }
    if rng.random_bool(0.5) {
        s.push_str("Content-Type: application/x-www-form-urlencoded\r\n");
    }
    s.push_str("User-Agent: test/1.0 (a generated request for property tests)\r\n\r\n");
    s.push_str(&text(rng));
    s
}

fn payload(rng: &mut impl Rng) -> Vec<u8> {
    let mut p = match rng.random_range(0..6) {
        0 => Vec::new(),
        1 => {
            let mut b = vec![0u8; rng.random_range(1..800)];
            rng.fill_bytes(&mut b);
            b
        }
        2 => text(rng).into_bytes(),
        3 => http(rng).into_bytes(),
        4 => {
            let mut b = vec![0x17, 3, 3, 0, 0];
            let mut body = vec![0u8; rng.random_range(1..600)];
            rng.fill_bytes(&mut body);
            b.extend(body);
            b
        }
        _ => {
            let mut t = text(rng).into_bytes();
            t.push(0xff);
            t
        }
    };
    p.truncate(1400);
    p
}

fn frame(rng: &mut impl Rng) -> Vec<u8> {
    let pool: Vec<MacAddr> = DEVICES.iter().chain(OTHERS.iter()).copied().collect();
    let src = *pool[..5].choose(rng).unwrap();
    let dst = *pool.choose(rng).unwrap();
    let ip = |rng: &mut dyn RngCore| -> [u8; 4] {
        let last = (rng.next_u32() % 8) as u8 + 1;
        if rng.next_u32().is_multiple_of(2) {
            [192, 168, 1, last]
        } else {
            [89, 30, 121, last]
        }
    };
    let mut f = Vec::new();
    match rng.random_range(0..10) {
        0 => {
            f.extend_from_slice(&dst.0);
            f.extend_from_slice(&src.0);
            f.extend_from_slice(&[0x08, 0x06, 0, 1, 8, 0, 6, 4, 0, 1]);
            f.extend_from_slice(&src.0);
            f.extend_from_slice(&[192, 168, 1, 9, 0, 0, 0, 0, 0, 0, 192, 168, 1, 1]);
            f.resize(60, 0);
        }
        1 => {
            // truncated IPv4 header
            f.extend_from_slice(&dst.0);
            f.extend_from_slice(&src.0);
            f.extend_from_slice(&[0x08, 0x00, 0x45, 0x00, 0x00]);
        }
        2 | 3 => {
            let (s, d) = (ip(rng), ip(rng));
            let sp = *[53u16, 5353, 40000].choose(rng).unwrap();
            let dp = *[53u16, 123, 40001].choose(rng).unwrap();
            PacketBuilder::ethernet2(src.0, dst.0)
                .ipv4(s, d, 64)
                .udp(sp, dp)
                .write(&mut f, &payload(rng))
                .unwrap();
        }
        _ => {
            let (s, d) = (ip(rng), ip(rng));
            let sp = *[80u16, 443, 8080, 50000, 50001].choose(rng).unwrap();
            let dp = *[80u16, 443, 8080, 50002].choose(rng).unwrap();
            PacketBuilder::ethernet2(src.0, dst.0)
                .ipv4(s, d, 64)
                .tcp(sp, dp, rng.random(), 1024)
                .ack(rng.random())
                .write(&mut f, &payload(rng))
                .unwrap();
        }
    }
    f
}

/// A random capture over the three registered devices plus strangers, with
/// bursts of activity separated by pauses of varying length.
pub fn random_capture(rng: &mut impl Rng) -> Vec<u8> {
    let n = rng.random_range(0..60);
    let mut t: u64 = 1_500_000_000_000_000;
    let mut frames = Vec::with_capacity(n);
    for _ in 0..n {
        t += match rng.random_range(0..4) {
            0 => rng.random_range(0..1_000_000),
            1 => rng.random_range(0..90_000_000),
            2 => rng.random_range(0..4_000_000_000),
            _ => 0,
        };
        frames.push((Timestamp(t), frame(rng)));
    }
    // A few out-of-order records exercise the stable sort.
    if frames.len() > 3 && rng.random_bool(0.2) {
        frames.swap(0, 2);
    }
    write_capture(frames.iter().map(|(ts, f)| (*ts, f.as_slice())))
}

pub fn registry() -> DeviceRegistry {
    let mut reg = DeviceRegistry::new();
    for (i, mac) in DEVICES.iter().enumerate() {
        reg.insert(*mac, format!("dev-{i}")).unwrap();
    }
    reg
}

/// Lowercase, every non-alphanumeric byte a space, spaces collapsed. Written
/// separately from the library's normalizer on purpose.
pub fn oracle_normalize(bytes: &[u8]) -> String {
    let mapped: String = bytes
        .iter()
        .map(|&b| {
            if b.is_ascii_alphanumeric() {
                b.to_ascii_lowercase() as char
            } else {
                ' '
            }
        })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn oracle_relocates(payload: &[u8], matched: &str) -> bool {
    let needle = oracle_normalize(matched.as_bytes());
    !needle.is_empty() && oracle_normalize(payload).contains(&needle)
}

/// Entropy by explicit summation over a freshly counted histogram.
pub fn oracle_entropy(bytes: &[u8]) -> f64 {
    let mut counts = [0usize; 256];
    for &b in bytes {
        counts[b as usize] += 1;
    }
    let n = bytes.len() as f64;
    let mut h = 0.0;
    for c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Chi-squared in two passes: expected count first, then the sum.
pub fn oracle_chi_squared(bytes: &[u8]) -> f64 {
    let expected = bytes.len() as f64 / 256.0;
    let mut sum = 0.0;
    for v in 0..=255u8 {
        let observed = bytes.iter().filter(|&&b| b == v).count() as f64;
        sum += (observed - expected).powi(2) / expected;
    }
    sum
}
