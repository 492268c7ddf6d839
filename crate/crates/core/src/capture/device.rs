use std::collections::BTreeMap;

use super::{MacAddr, ParseMacError, RawPacket};

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error(transparent)]
    BadMac(#[from] ParseMacError),
    #[error("MAC {0} registered twice")]
    Duplicate(MacAddr),
    #[error("empty device label for {0}")]
    EmptyLabel(MacAddr),
    #[error("registry line {line}: {detail}")]
    Syntax { line: usize, detail: String },
}

/// Mapping from hardware address to a human-readable device label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeviceRegistry {
    devices: BTreeMap<MacAddr, String>,
}

impl DeviceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, mac: MacAddr, label: impl Into<String>) -> Result<(), RegistryError> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(RegistryError::EmptyLabel(mac));
        }
        if self.devices.contains_key(&mac) {
            return Err(RegistryError::Duplicate(mac));
        }
        self.devices.insert(mac, label);
        Ok(())
    }

    pub fn with(mut self, mac: MacAddr, label: impl Into<String>) -> Result<Self, RegistryError> {
        self.insert(mac, label)?;
        Ok(self)
    }

    pub fn label(&self, mac: &MacAddr) -> Option<&str> {
        self.devices.get(mac).map(String::as_str)
    }

    pub fn contains(&self, mac: &MacAddr) -> bool {
        self.devices.contains_key(mac)
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    /// Devices in MAC order.
    pub fn iter(&self) -> impl Iterator<Item = (MacAddr, &str)> {
        self.devices.iter().map(|(m, l)| (*m, l.as_str()))
    }

    /// Merge another registry in; conflicting MACs are an error.
    pub fn extend(&mut self, other: &DeviceRegistry) -> Result<(), RegistryError> {
        for (mac, label) in other.iter() {
            self.insert(mac, label)?;
        }
        Ok(())
    }

    /// Parse the plain-text registry form: one `MAC label` or `MAC = label`
    /// pair per line, `#` starts a comment.
    pub fn parse_lines(text: &str) -> Result<Self, RegistryError> {
        let mut reg = DeviceRegistry::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (mac, label) = line
                .split_once('=')
                .or_else(|| line.split_once(char::is_whitespace))
                .ok_or_else(|| RegistryError::Syntax {
                    line: n + 1,
                    detail: "expected `MAC label`".into(),
                })?;
            let label = label.trim().trim_matches('"');
            reg.insert(mac.trim().trim_matches('"').parse()?, label)?;
        }
        Ok(reg)
    }
}

/// Packets attributed to one registered device.
#[derive(Debug, Clone)]
pub struct DeviceStream<'a> {
    pub device_id: String,
    pub mac: MacAddr,
    pub packets: Vec<&'a RawPacket>,
}

impl<'a> DeviceStream<'a> {
    pub fn new(device_id: impl Into<String>, mac: MacAddr, packets: Vec<&'a RawPacket>) -> Self {
        DeviceStream {
            device_id: device_id.into(),
            mac,
            packets,
        }
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }
}

/// Result of [`split_by_device`]: one stream per registered MAC (MAC order,
/// possibly empty) plus everything nobody claimed.
#[derive(Debug, Clone)]
pub struct Partition<'a> {
    pub streams: Vec<DeviceStream<'a>>,
    pub unattributed: Vec<&'a RawPacket>,
}

impl Partition<'_> {
    pub fn attributed_len(&self) -> usize {
        self.streams.iter().map(DeviceStream::len).sum()
    }
}

/// Assign each packet to exactly one device stream or to the unattributed
/// bucket. A frame between two registered devices belongs to its sender.
pub fn split_by_device<'a>(packets: &'a [RawPacket], registry: &DeviceRegistry) -> Partition<'a> {
    if registry.is_empty() {
        log::warn!("device registry is empty; every packet is unattributed");
    }
    let mut slots: BTreeMap<MacAddr, Vec<&'a RawPacket>> = registry.iter().map(|(mac, _)| (mac, Vec::new())).collect();
    let mut unattributed = Vec::new();
    for pkt in packets {
        let owner = if registry.contains(&pkt.src_mac) {
            Some(pkt.src_mac)
        } else if registry.contains(&pkt.dst_mac) {
            Some(pkt.dst_mac)
        } else {
            None
        };
        match owner.and_then(|m| slots.get_mut(&m)) {
            Some(slot) => slot.push(pkt),
            None => unattributed.push(pkt),
        }
    }
    let streams = slots
        .into_iter()
        .map(|(mac, packets)| {
            let label = registry.label(&mac).unwrap_or_default();
            DeviceStream::new(label, mac, packets)
        })
        .collect();
    Partition { streams, unattributed }
}
