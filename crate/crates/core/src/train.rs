//! Single-channel ON/OFF spike trains and their CSV form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRAIN_CSV_HEADER: &str = "timestamp_us,polarity";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "OFF")]
    Off,
    #[serde(rename = "ON")]
    On,
}

impl Polarity {
    pub fn bit(self) -> u16 {
        match self {
            Polarity::On => 1,
            Polarity::Off => 0,
        }
    }

    pub fn from_bit(bit: u16) -> Self {
        if bit & 1 == 1 {
            Polarity::On
        } else {
            Polarity::Off
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::On => "ON",
            Polarity::Off => "OFF",
        })
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ON" => Ok(Polarity::On),
            "OFF" => Ok(Polarity::Off),
            other => Err(Error::Validation(format!("unknown polarity '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpikeEvent {
    pub timestamp_us: u64,
    pub polarity: Polarity,
}

impl SpikeEvent {
    pub fn new(timestamp_us: u64, polarity: Polarity) -> Self {
        Self {
            timestamp_us,
            polarity,
        }
    }
}

/// Time-ordered ON/OFF events from one channel over `[0, duration_us)`.
///
/// Timestamps are non-decreasing overall and strictly increasing within
/// each polarity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpikeTrain {
    events: Vec<SpikeEvent>,
    duration_us: u64,
}

impl SpikeTrain {
    pub fn new(events: Vec<SpikeEvent>, duration_us: u64) -> Result<Self> {
        check_order(&events)?;
        if let Some(last) = events.last() {
            if last.timestamp_us >= duration_us {
                return Err(Error::Validation(format!(
                    "event at {} us lies outside the train duration {duration_us} us",
                    last.timestamp_us
                )));
            }
        }
        Ok(Self {
            events,
            duration_us,
        })
    }

    pub fn empty(duration_us: u64) -> Self {
        Self {
            events: Vec::new(),
            duration_us,
        }
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn duration_us(&self) -> u64 {
        self.duration_us
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count(&self, polarity: Polarity) -> usize {
        self.events.iter().filter(|e| e.polarity == polarity).count()
    }

    /// Timestamps of one polarity, in order.
    pub fn times(&self, polarity: Polarity) -> Vec<u64> {
        self.events
            .iter()
            .filter(|e| e.polarity == polarity)
            .map(|e| e.timestamp_us)
            .collect()
    }

    /// Smallest gap between consecutive events of any polarity.
    pub fn min_interval_us(&self) -> Option<u64> {
        self.events
            .windows(2)
            .map(|w| w[1].timestamp_us - w[0].timestamp_us)
            .min()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * self.events.len() + 32);
        out.push_str(TRAIN_CSV_HEADER);
        out.push('\n');
        for e in &self.events {
            out.push_str(&format!("{},{}\n", e.timestamp_us, e.polarity));
        }
        out
    }

    /// Parses the CSV form. Without an explicit duration the train ends one
    /// microsecond after its last event.
    pub fn from_csv(text: &str, duration_us: Option<u64>) -> Result<Self> {
        let mut events = Vec::new();
        let mut seen_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if !seen_header && events.is_empty() && line.replace(' ', "") == TRAIN_CSV_HEADER {
                seen_header = true;
                continue;
            }
            let (ts, pol) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected 'timestamp_us,polarity'".into(),
            })?;
            let timestamp_us = ts.trim().parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad timestamp '{}'", ts.trim()),
            })?;
            let polarity = pol.trim().parse::<Polarity>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad polarity '{}'", pol.trim()),
            })?;
            events.push(SpikeEvent::new(timestamp_us, polarity));
        }
        let duration_us = match duration_us {
            Some(d) => d,
            None => events.last().map_or(0, |e| e.timestamp_us + 1),
        };
        Self::new(events, duration_us)
    }
}

fn check_order(events: &[SpikeEvent]) -> Result<()> {
    let mut last_on: Option<u64> = None;
    let mut last_off: Option<u64> = None;
    let mut last_any = 0u64;
    for (i, e) in events.iter().enumerate() {
        if e.timestamp_us < last_any {
            return Err(Error::Validation(format!(
                "events not sorted: event {i} at {} us follows {last_any} us",
                e.timestamp_us
            )));
        }
        last_any = e.timestamp_us;
        let last = match e.polarity {
            Polarity::On => &mut last_on,
            Polarity::Off => &mut last_off,
        };
        if matches!(*last, Some(prev) if prev >= e.timestamp_us) {
            return Err(Error::Validation(format!(
                "duplicate {} event at {} us",
                e.polarity, e.timestamp_us
            )));
        }
        *last = Some(e.timestamp_us);
    }
    Ok(())
}
