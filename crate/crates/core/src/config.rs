//! Experiment configuration: defaults, `key = value` files and unit-suffixed
//! values.
//!
//! Values are layered: built-in defaults, then a config file, then command
//! line flags. Unknown keys are rejected at every layer.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::decode::DecodeConfig;
use crate::encode::{AdmConfig, Encoder, ThresholdConfig};
use crate::error::{Error, Result};
use crate::metrics::{EnergyModel, DEFAULT_TOLERANCE_US};
use crate::signal::{FrontEndConfig, SignalFormat};

/// Keys accepted in config files and as overrides.
pub const KEYS: &[&str] = &[
    "abs_level",
    "bin_width",
    "delta",
    "delta_off",
    "delta_on",
    "dynamic_power",
    "encoder",
    "encoders",
    "energy_per_spike",
    "format",
    "front_end",
    "gain",
    "input",
    "lambda",
    "multipliers",
    "output",
    "refractory",
    "reset_delay",
    "rms_k",
    "sample_rate",
    "seed",
    "service_time",
    "supply_v",
    "tau",
    "threshold_refractory",
    "tolerance",
    "train_fraction",
    "v_ref",
    "vout",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    Adm,
    AdmCircuit,
    Rms,
    Abs,
}

impl std::str::FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "adm" => Ok(EncoderKind::Adm),
            "adm-circuit" | "adm_circuit" => Ok(EncoderKind::AdmCircuit),
            "rms" => Ok(EncoderKind::Rms),
            "abs" | "absolute" => Ok(EncoderKind::Abs),
            other => Err(Error::Config(format!(
                "unknown encoder '{other}' (expected adm, adm-circuit, rms or abs)"
            ))),
        }
    }
}

/// Every tunable of the command line tool.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub encoder: EncoderKind,
    pub encoders: Vec<EncoderKind>,
    pub adm: AdmConfig,
    pub rms_k: f64,
    pub abs_level_v: f64,
    /// Dead time for the threshold detectors; each mode's own default when unset.
    pub threshold_refractory_us: Option<u64>,
    pub multipliers: Vec<f64>,
    pub seed: u64,
    pub tolerance_us: u64,
    pub energy: EnergyModel,
    pub sample_rate_hz: f64,
    pub format: SignalFormat,
    pub front_end: bool,
    pub front_end_config: FrontEndConfig,
    pub decode: DecodeConfig,
    pub service_time_us: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub vout: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            encoder: EncoderKind::Adm,
            encoders: vec![EncoderKind::Adm, EncoderKind::Rms, EncoderKind::Abs],
            adm: AdmConfig::default(),
            rms_k: ThresholdConfig::DEFAULT_RMS_MULTIPLIER,
            abs_level_v: ThresholdConfig::DEFAULT_ABSOLUTE_LEVEL_V,
            threshold_refractory_us: None,
            multipliers: vec![1.0, 1.5, 2.0, 4.0],
            seed: 0,
            tolerance_us: DEFAULT_TOLERANCE_US,
            energy: EnergyModel::default(),
            sample_rate_hz: 30_000.0,
            format: SignalFormat::Csv,
            front_end: false,
            front_end_config: FrontEndConfig::default(),
            decode: DecodeConfig::default(),
            service_time_us: 0,
            input: None,
            output: None,
            vout: None,
        }
    }
}

impl ExperimentConfig {
    /// Applies a layer of overrides on top of the current values.
    pub fn apply(&mut self, overrides: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in overrides {
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: Error| Error::Config(format!("{key}: {e}"));
        match key {
            "encoder" => self.encoder = value.parse()?,
            "encoders" => {
                self.encoders = split_list(value)
                    .map(str::parse)
                    .collect::<Result<Vec<_>>>()?;
            }
            "delta" => {
                let v = parse_voltage(value).map_err(bad)?;
                self.adm.delta_on_v = v;
                self.adm.delta_off_v = v;
            }
            "delta_on" => self.adm.delta_on_v = parse_voltage(value).map_err(bad)?,
            "delta_off" => self.adm.delta_off_v = parse_voltage(value).map_err(bad)?,
            "gain" => self.adm.gain_a = parse_plain(value).map_err(bad)?,
            "reset_delay" => self.adm.reset_delay_us = parse_time_us(value).map_err(bad)?,
            "refractory" => self.adm.refractory_us = parse_time_us(value).map_err(bad)?,
            "v_ref" => self.adm.v_ref = parse_voltage(value).map_err(bad)?,
            "rms_k" => self.rms_k = parse_plain(value).map_err(bad)?,
            "abs_level" => self.abs_level_v = parse_voltage(value).map_err(bad)?,
            "threshold_refractory" => {
                self.threshold_refractory_us = Some(parse_time_us(value).map_err(bad)?)
            }
            "multipliers" => {
                self.multipliers = split_list(value)
                    .map(parse_plain)
                    .collect::<Result<Vec<_>>>()
                    .map_err(bad)?;
            }
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("seed: '{value}' is not an integer")))?
            }
            "tolerance" => self.tolerance_us = parse_time_us(value).map_err(bad)?,
            "energy_per_spike" => {
                self.energy.energy_per_spike_j = parse_quantity(value, "J", 1.0).map_err(bad)?
            }
            "dynamic_power" => {
                self.energy.dynamic_power_w = parse_quantity(value, "W", 1.0).map_err(bad)?
            }
            "supply_v" => self.energy.supply_v = parse_voltage(value).map_err(bad)?,
            "sample_rate" => self.sample_rate_hz = parse_quantity(value, "Hz", 1.0).map_err(bad)?,
            "format" => self.format = value.trim().parse()?,
            "front_end" => self.front_end = parse_bool(value).map_err(bad)?,
            "bin_width" => self.decode.bin_width_us = parse_time_us(value).map_err(bad)?,
            "tau" => self.decode.tau_us = parse_time_us(value).map_err(bad)?,
            "lambda" => {
                self.decode.lambda = match value.trim() {
                    "auto" => None,
                    v => Some(parse_plain(v).map_err(bad)?),
                }
            }
            "train_fraction" => self.decode.train_fraction = parse_plain(value).map_err(bad)?,
            "service_time" => self.service_time_us = parse_time_us(value).map_err(bad)?,
            "input" => self.input = Some(PathBuf::from(value.trim())),
            "output" => self.output = Some(PathBuf::from(value.trim())),
            "vout" => self.vout = Some(PathBuf::from(value.trim())),
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn threshold_config(&self, kind: EncoderKind) -> ThresholdConfig {
        let base = match kind {
            EncoderKind::Abs => ThresholdConfig::absolute(self.abs_level_v),
            _ => ThresholdConfig::rms(self.rms_k),
        };
        match self.threshold_refractory_us {
            Some(r) => base.with_refractory(r),
            None => base,
        }
    }

    pub fn build_encoder(&self, kind: EncoderKind) -> Result<Encoder> {
        let enc = match kind {
            EncoderKind::Adm => Encoder::Adm(self.adm),
            EncoderKind::AdmCircuit => Encoder::AdmCircuit(self.adm),
            EncoderKind::Rms | EncoderKind::Abs => Encoder::Threshold(self.threshold_config(kind)),
        };
        enc.validate()?;
        Ok(enc)
    }

    /// Checks everything that does not depend on input data.
    pub fn validate(&self) -> Result<()> {
        self.adm.validate()?;
        self.threshold_config(EncoderKind::Rms).validate()?;
        self.threshold_config(EncoderKind::Abs).validate()?;
        self.energy.validate()?;
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if self.multipliers.is_empty() || self.multipliers.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Config("multipliers must be a non-empty list of values >= 0".into()));
        }
        if self.encoders.is_empty() {
            return Err(Error::Config("at least one encoder is required".into()));
        }
        if self.decode.bin_width_us == 0 || self.decode.tau_us == 0 {
            return Err(Error::Config("bin width and tau must be positive".into()));
        }
        if !(self.decode.train_fraction > 0.0 && self.decode.train_fraction < 1.0) {
            return Err(Error::Config("train fraction must lie in (0, 1)".into()));
        }
        if matches!(self.decode.lambda, Some(l) if !(l.is_finite() && l >= 0.0)) {
            return Err(Error::Config("lambda must be >= 0".into()));
        }
        Ok(())
    }

    /// Stable `key=value` listing of the encoder parameters.
    pub fn describe_encoder(&self, kind: EncoderKind) -> String {
        match kind {
            EncoderKind::Adm | EncoderKind::AdmCircuit => format!(
                "encoder={} delta_on_v={} delta_off_v={} gain_a={} reset_delay_us={} refractory_us={} v_ref={}",
                if kind == EncoderKind::Adm { "adm" } else { "adm-circuit" },
                self.adm.delta_on_v,
                self.adm.delta_off_v,
                self.adm.gain_a,
                self.adm.reset_delay_us,
                self.adm.refractory_us,
                self.adm.v_ref
            ),
            EncoderKind::Rms | EncoderKind::Abs => {
                let t = self.threshold_config(kind);
                format!(
                    "encoder={} {}={} refractory_us={}",
                    if kind == EncoderKind::Rms { "rms" } else { "abs" },
                    if kind == EncoderKind::Rms { "rms_k" } else { "abs_level_v" },
                    t.k_or_level,
                    t.refractory_us
                )
            }
        }
    }
}

/// Parses a plain-text `key = value` file. `#` starts a comment line.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: "expected 'key = value'".into(),
        })?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown config key '{key}'", idx + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_plain(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("'{s}' is not finite")));
    }
    Ok(v)
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!("'{other}' is not a boolean"))),
    }
}

/// Parses `<number>[<prefix>]<unit>` into base units. A bare number is
/// multiplied by `bare_scale`.
pub fn parse_quantity(s: &str, unit: &str, bare_scale: f64) -> Result<f64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix(unit) else {
        return Ok(parse_plain(s)? * bare_scale);
    };
    let (number, scale) = match body.chars().last() {
        Some('p') => (&body[..body.len() - 1], 1e-12),
        Some('n') => (&body[..body.len() - 1], 1e-9),
        Some('u') => (&body[..body.len() - 1], 1e-6),
        Some('µ') => (&body[..body.len() - 'µ'.len_utf8()], 1e-6),
        Some('m') => (&body[..body.len() - 1], 1e-3),
        Some('k') => (&body[..body.len() - 1], 1e3),
        Some('M') => (&body[..body.len() - 1], 1e6),
        _ => (body, 1.0),
    };
    Ok(parse_plain(number)? * scale)
}

/// Volts; accepts `V`, `mV`, `uV` suffixes. Bare numbers are volts.
pub fn parse_voltage(s: &str) -> Result<f64> {
    parse_quantity(s, "V", 1.0)
}

/// Whole microseconds; accepts `s`, `ms`, `us` suffixes. Bare numbers are
/// microseconds.
pub fn parse_time_us(s: &str) -> Result<u64> {
    let seconds = parse_quantity(s, "s", 1e-6)?;
    if seconds < 0.0 {
        return Err(Error::Config(format!("'{s}' is negative")));
    }
    Ok((seconds * 1e6).round() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::DEFAULT_V_REF;

    #[test]
    fn unit_suffixes() {
        assert!((parse_voltage("1mV").unwrap() - 1e-3).abs() < 1e-18);
        assert!((parse_voltage("15uV").unwrap() - 15e-6).abs() < 1e-18);
        assert_eq!(parse_voltage("0.2").unwrap(), 0.2);
        assert_eq!(parse_voltage("2V").unwrap(), 2.0);
        assert_eq!(parse_time_us("1ms").unwrap(), 1000);
        assert_eq!(parse_time_us("0.1ms").unwrap(), 100);
        assert_eq!(parse_time_us("500us").unwrap(), 500);
        assert_eq!(parse_time_us("2s").unwrap(), 2_000_000);
        assert_eq!(parse_time_us("250").unwrap(), 250);
        assert_eq!(parse_quantity("30kHz", "Hz", 1.0).unwrap(), 30_000.0);
        assert!((parse_quantity("60.7281nJ", "J", 1.0).unwrap() - 60.7281e-9).abs() < 1e-20);
        assert!(parse_time_us("-1ms").is_err());
        assert!(parse_voltage("abc").is_err());
    }

    #[test]
    fn layering_and_unknown_keys() {
        let file = parse_config_file("# comment\ndelta = 20mV\nrefractory = 2ms\nseed = 9\n").unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.apply(&file).unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("refractory".to_string(), "1ms".to_string());
        cfg.apply(&flags).unwrap();
        assert_eq!(cfg.adm.delta_on_v, 0.02);
        assert_eq!(cfg.adm.refractory_us, 1000);
        assert_eq!(cfg.seed, 9);
        assert!(parse_config_file("bogus = 1\n").is_err());
        assert!(parse_config_file("no equals sign\n").is_err());
        assert!(ExperimentConfig::default().set("bogus", "1").is_err());
    }

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.adm.v_ref, DEFAULT_V_REF);
        assert_eq!(cfg.adm.reset_delay_us, 100);
        assert_eq!(cfg.adm.refractory_us, 1000);
        let mut bad = cfg.clone();
        bad.set("multipliers", "1,-2").unwrap();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn encoder_lists() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("encoders", "adm, abs").unwrap();
        assert_eq!(cfg.encoders, vec![EncoderKind::Adm, EncoderKind::Abs]);
        assert!(cfg.set("encoder", "sigma-delta").is_err());
        assert_eq!(cfg.build_encoder(EncoderKind::Abs).unwrap().name(), "abs");
    }
}
