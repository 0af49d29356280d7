//! Spike-train scoring, correlation and the energy model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::train::{Polarity, SpikeTrain};

/// Default matching window: half the default refractory period.
pub const DEFAULT_TOLERANCE_US: u64 = 500;

/// Counts and scores from tolerance-windowed matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tolerance_us: u64,
}

impl MatchReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tolerance_us: u64) -> Self {
        let ratio = |num: usize, den: usize, other_miss: usize| {
            if den == 0 {
                if other_miss == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp, fn_);
        let recall = ratio(tp, tp + fn_, fp);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
            tolerance_us,
        }
    }

    /// Single-line JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Number of matched pairs between two sorted timestamp lists where a pair
/// is allowed when `|r - c| <= tolerance_us`.
///
/// Candidates are taken in time order and each claims the earliest unmatched
/// reference inside its window. Both window edges grow with the candidate
/// time, so this greedy choice yields a maximum matching.
pub fn matched_pairs(reference: &[u64], candidate: &[u64], tolerance_us: u64) -> usize {
    let mut next_ref = 0;
    let mut tp = 0;
    for &c in candidate {
        let lo = c.saturating_sub(tolerance_us);
        while next_ref < reference.len() && reference[next_ref] < lo {
            next_ref += 1;
        }
        if next_ref < reference.len() && reference[next_ref] <= c.saturating_add(tolerance_us) {
            tp += 1;
            next_ref += 1;
        }
    }
    tp
}

/// Scores `candidate` against `reference`. ON and OFF events are matched
/// independently and the counts summed.
pub fn match_spike_trains(
    reference: &SpikeTrain,
    candidate: &SpikeTrain,
    tolerance_us: u64,
) -> Result<MatchReport> {
    for (name, train) in [("reference", reference), ("candidate", candidate)] {
        if train.events().windows(2).any(|w| w[1].timestamp_us < w[0].timestamp_us) {
            return Err(Error::Validation(format!("{name} train is not sorted")));
        }
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for polarity in [Polarity::On, Polarity::Off] {
        let r = reference.times(polarity);
        let c = candidate.times(polarity);
        let matched = matched_pairs(&r, &c, tolerance_us);
        tp += matched;
        fp += c.len() - matched;
        fn_ += r.len() - matched;
    }
    Ok(MatchReport::from_counts(tp, fp, fn_, tolerance_us))
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Validation("pearson needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Domain("pearson correlation of a zero-variance series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Events per second over the train's duration.
pub fn spike_rate(train: &SpikeTrain) -> Result<f64> {
    if train.duration_us() == 0 {
        return Err(Error::Domain("spike rate of a zero-duration train".into()));
    }
    Ok(train.len() as f64 * 1e6 / train.duration_us() as f64)
}

/// Per-spike energy model of the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub energy_per_spike_j: f64,
    pub dynamic_power_w: f64,
    pub supply_v: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            energy_per_spike_j: 60.7281e-9,
            dynamic_power_w: 12.145e-6,
            supply_v: 1.2,
        }
    }
}

impl EnergyModel {
    /// Spike rate at which the average dynamic power equals `dynamic_power_w`.
    pub fn rated_spike_rate_hz(&self) -> f64 {
        self.dynamic_power_w / self.energy_per_spike_j
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.energy_per_spike_j) && ok(self.dynamic_power_w) && ok(self.supply_v) {
            Ok(())
        } else {
            Err(Error::Config("energy model values must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub dynamic_energy_j: f64,
    pub avg_power_w: f64,
}

/// Dynamic energy of a train and the average power over its duration.
/// Static power is not modeled.
pub fn energy_report(train: &SpikeTrain, model: &EnergyModel) -> Result<EnergyReport> {
    if train.duration_us() == 0 {
        return Err(Error::Domain("energy report of a zero-duration train".into()));
    }
    let dynamic_energy_j = train.len() as f64 * model.energy_per_spike_j;
    Ok(EnergyReport {
        dynamic_energy_j,
        avg_power_w: dynamic_energy_j * 1e6 / train.duration_us() as f64,
    })
}
