//! Address-event representation: event records, multi-channel merging, a
//! FIFO arbiter model and the `.aer` binary format.
//!
//! Each record is 8 bytes little-endian: bytes 0..6 hold the 48-bit
//! timestamp in microseconds, bytes 6..8 hold `(channel << 1) | polarity`
//! with ON = 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::train::{Polarity, SpikeEvent, SpikeTrain};

pub const RECORD_BYTES: usize = 8;
pub const MAX_TIMESTAMP_US: u64 = (1 << 48) - 1;
pub const MAX_CHANNEL: u16 = 0x7fff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AerEvent {
    timestamp_us: u64,
    channel: u16,
    polarity: Polarity,
}

impl AerEvent {
    pub fn new(timestamp_us: u64, channel: u16, polarity: Polarity) -> Result<Self> {
        if timestamp_us > MAX_TIMESTAMP_US {
            return Err(Error::Validation(format!(
                "timestamp {timestamp_us} us does not fit in 48 bits"
            )));
        }
        if channel > MAX_CHANNEL {
            return Err(Error::Validation(format!("channel {channel} exceeds {MAX_CHANNEL}")));
        }
        Ok(Self {
            timestamp_us,
            channel,
            polarity,
        })
    }

    pub fn timestamp_us(&self) -> u64 {
        self.timestamp_us
    }

    pub fn channel(&self) -> u16 {
        self.channel
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    fn key(&self) -> (u64, u16) {
        (self.timestamp_us, self.channel)
    }

    pub fn to_bytes(&self) -> [u8; RECORD_BYTES] {
        let mut out = [0u8; RECORD_BYTES];
        out[..6].copy_from_slice(&self.timestamp_us.to_le_bytes()[..6]);
        let address = (self.channel << 1) | self.polarity.bit();
        out[6..].copy_from_slice(&address.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: [u8; RECORD_BYTES]) -> Self {
        let mut ts = [0u8; 8];
        ts[..6].copy_from_slice(&bytes[..6]);
        let address = u16::from_le_bytes([bytes[6], bytes[7]]);
        Self {
            timestamp_us: u64::from_le_bytes(ts),
            channel: address >> 1,
            polarity: Polarity::from_bit(address),
        }
    }
}

/// Events sorted by `(timestamp_us, channel)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AerStream {
    events: Vec<AerEvent>,
}

impl AerStream {
    pub fn new(events: Vec<AerEvent>) -> Result<Self> {
        if let Some(i) = events.windows(2).position(|w| w[1].key() < w[0].key()) {
            return Err(Error::Validation(format!(
                "stream not sorted at event {}",
                i + 1
            )));
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[AerEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn channels(&self) -> BTreeSet<u16> {
        self.events.iter().map(|e| e.channel).collect()
    }

    /// Events of one channel as a spike train.
    pub fn channel_train(&self, channel: u16, duration_us: u64) -> Result<SpikeTrain> {
        let events = self
            .events
            .iter()
            .filter(|e| e.channel == channel)
            .map(|e| SpikeEvent::new(e.timestamp_us, e.polarity))
            .collect();
        SpikeTrain::new(events, duration_us)
    }
}

/// Merges per-channel trains into one stream ordered by time, then channel.
/// Each channel's own event order is preserved.
pub fn merge_channels<'a, I>(trains: I) -> Result<AerStream>
where
    I: IntoIterator<Item = (u16, &'a SpikeTrain)>,
{
    let mut seen = BTreeSet::new();
    let mut events = Vec::new();
    for (channel, train) in trains {
        if !seen.insert(channel) {
            return Err(Error::Validation(format!("duplicate channel id {channel}")));
        }
        for e in train.events() {
            events.push(AerEvent::new(e.timestamp_us, channel, e.polarity)?);
        }
    }
    // stable: ties within a channel keep their input order
    events.sort_by_key(AerEvent::key);
    Ok(AerStream { events })
}

#[derive(Debug, Clone)]
pub struct ArbiterOutput {
    pub egress: AerStream,
    pub max_latency_us: u64,
    pub mean_latency_us: f64,
}

/// Single-server FIFO arbiter: each event leaves at
/// `max(arrival, previous departure + service_time_us)`.
pub fn arbiter_simulate(stream: &AerStream, service_time_us: u64) -> Result<ArbiterOutput> {
    let mut egress = Vec::with_capacity(stream.len());
    let mut last_departure: Option<u64> = None;
    let mut max_latency_us = 0;
    let mut total_latency = 0u128;
    for e in stream.events() {
        let departure = match last_departure {
            Some(prev) => e.timestamp_us.max(prev + service_time_us),
            None => e.timestamp_us,
        };
        let latency = departure - e.timestamp_us;
        max_latency_us = max_latency_us.max(latency);
        total_latency += latency as u128;
        egress.push(AerEvent::new(departure, e.channel, e.polarity)?);
        last_departure = Some(departure);
    }
    let mean_latency_us = if egress.is_empty() {
        0.0
    } else {
        total_latency as f64 / egress.len() as f64
    };
    Ok(ArbiterOutput {
        egress: AerStream::new(egress)?,
        max_latency_us,
        mean_latency_us,
    })
}

pub fn serialize(stream: &AerStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(stream.len() * RECORD_BYTES);
    for e in stream.events() {
        out.extend_from_slice(&e.to_bytes());
    }
    out
}

pub fn deserialize(bytes: &[u8]) -> Result<AerStream> {
    if !bytes.len().is_multiple_of(RECORD_BYTES) {
        return Err(Error::Format(format!(
            "AER byte length {} is not a multiple of {RECORD_BYTES}",
            bytes.len()
        )));
    }
    let events = bytes
        .chunks_exact(RECORD_BYTES)
        .map(|c| AerEvent::from_bytes(c.try_into().expect("exact chunk")))
        .collect();
    AerStream::new(events).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_aer_file(path: &Path, stream: &AerStream) -> Result<()> {
    fs::write(path, serialize(stream)).map_err(|e| Error::io(path, e))
}

pub fn read_aer_file(path: &Path) -> Result<AerStream> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    deserialize(&bytes)
}

/// Path of the metadata file that accompanies an `.aer` file.
pub fn sidecar_path(aer_path: &Path) -> std::path::PathBuf {
    let mut s = aer_path.as_os_str().to_owned();
    s.push(".meta");
    s.into()
}

/// Renders `key=value` lines in key order.
pub fn sidecar_to_string(meta: &BTreeMap<String, String>) -> String {
    meta.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn parse_sidecar(text: &str) -> Result<BTreeMap<String, String>> {
    let mut meta = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: "expected key=value".into(),
        })?;
        meta.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(meta)
}
