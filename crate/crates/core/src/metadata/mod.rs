//! Traffic-shape evidence that survives encryption: when a device is active,
//! whom it talks to, and how regularly it is used.

mod dns;

use std::collections::{BTreeMap, BTreeSet};
use std::net::IpAddr;

use serde::{Deserialize, Serialize};

use crate::capture::{DeviceStream, Timestamp};
use crate::vendor::VendorPatterns;

pub use dns::{dns_answers, HostMap, DNS_PORT};

pub const DEFAULT_GAP_SECS: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub address: IpAddr,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hostname: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityPeriod {
    pub device_id: String,
    pub start: Timestamp,
    pub end: Timestamp,
    pub packet_count: usize,
    pub bytes_total: u64,
    pub endpoints: BTreeSet<Endpoint>,
}

impl ActivityPeriod {
    pub fn duration_secs(&self) -> f64 {
        (self.end.0 - self.start.0) as f64 / 1e6
    }
}

fn gap_micros(gap_secs: f64) -> u64 {
    (gap_secs.max(0.0) * 1e6).round() as u64
}

/// Greedy segmentation: a packet joins the current period when it arrives at
/// most `gap_secs` after the previous packet, otherwise it opens a new one.
/// The stream must be in time order.
pub fn activity_periods(stream: &DeviceStream<'_>, gap_secs: f64, hosts: &HostMap) -> Vec<ActivityPeriod> {
    let gap = gap_micros(gap_secs);
    let mut periods: Vec<ActivityPeriod> = Vec::new();
    let mut last: Option<Timestamp> = None;
    for pkt in &stream.packets {
        let ts = pkt.timestamp;
        let joins = last.is_some_and(|prev| ts.0.saturating_sub(prev.0) <= gap);
        if !joins {
            periods.push(ActivityPeriod {
                device_id: stream.device_id.clone(),
                start: ts,
                end: ts,
                packet_count: 0,
                bytes_total: 0,
                endpoints: BTreeSet::new(),
            });
        }
        let p = periods.last_mut().expect("a period was just opened");
        p.end = p.end.max(ts);
        p.packet_count += 1;
        p.bytes_total += pkt.frame_len() as u64;
        if let Some(address) = pkt.remote_addr(stream.mac) {
            p.endpoints.insert(Endpoint {
                address,
                hostname: hosts.get(&address).map(str::to_string),
            });
        }
        last = Some(ts);
    }
    periods
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointProfile {
    pub address: IpAddr,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hostname: Option<String>,
    pub packet_count: usize,
    pub vendor_flag: bool,
}

/// One profile per distinct remote address, in address order.
pub fn endpoint_profiles(stream: &DeviceStream<'_>, hosts: &HostMap, vendors: &VendorPatterns) -> Vec<EndpointProfile> {
    let mut counts: BTreeMap<IpAddr, usize> = BTreeMap::new();
    for pkt in &stream.packets {
        if let Some(addr) = pkt.remote_addr(stream.mac) {
            *counts.entry(addr).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(address, packet_count)| {
            let hostname = hosts.get(&address).map(str::to_string);
            let vendor_flag =
                hostname.as_deref().is_some_and(|h| vendors.matches_host(h)) || vendors.matches_address(address);
            EndpointProfile {
                address,
                hostname,
                packet_count,
                vendor_flag,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Periodicity {
    /// Median of the intervals between successive period starts, seconds.
    pub median_interval: f64,
    /// Median absolute deviation of those intervals, seconds.
    pub dispersion: f64,
}

/// `None` with fewer than three periods.
pub fn periodicity_hint(periods: &[ActivityPeriod]) -> Option<Periodicity> {
    if periods.len() < 3 {
        return None;
    }
    let intervals: Vec<f64> = periods
        .windows(2)
        .map(|w| (w[1].start.0 as f64 - w[0].start.0 as f64) / 1e6)
        .collect();
    let median_interval = median(&intervals);
    let deviations: Vec<f64> = intervals.iter().map(|x| (x - median_interval).abs()).collect();
    Some(Periodicity {
        median_interval,
        dispersion: median(&deviations),
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
