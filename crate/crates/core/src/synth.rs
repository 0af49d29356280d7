//! Synthetic recordings: an action-potential surrogate for robustness runs
//! and a tuned-population scenario for decoding runs.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::decode::KinematicsSeries;
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Action-potential surrogate: biphasic pulses over a slow oscillation.
#[derive(Debug, Clone, PartialEq)]
pub struct ApTrainConfig {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    /// Mean pulse rate.
    pub ap_rate_hz: f64,
    /// Shortest allowed gap between pulse onsets.
    pub min_isi_us: u64,
    pub peak_v: f64,
    pub pulse_us: u64,
    pub lfp_amplitude_v: f64,
    pub lfp_hz: f64,
    /// White background noise standard deviation.
    pub background_noise_v: f64,
    pub seed: u64,
}

impl Default for ApTrainConfig {
    fn default() -> Self {
        Self {
            duration_s: 2.0,
            sample_rate_hz: 30_000.0,
            ap_rate_hz: 200.0,
            min_isi_us: 3000,
            peak_v: 0.220,
            pulse_us: 1000,
            // puts median |x| of the whole recording at about 22.84 mV
            lfp_amplitude_v: 0.028,
            lfp_hz: 8.0,
            background_noise_v: 0.0,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApRecording {
    pub signal: SampledSignal,
    /// Pulse onset times.
    pub onsets_us: Vec<u64>,
}

/// One biphasic pulse: a full sine period, positive lobe first.
fn pulse_shape(peak_v: f64, pulse_us: u64, dt_us: f64) -> f64 {
    peak_v * (2.0 * PI * dt_us / pulse_us as f64).sin()
}

fn add_pulses(samples: &mut [f64], fs: f64, onsets_us: &[u64], peak_v: f64, pulse_us: u64) {
    for &onset in onsets_us {
        let first = (onset as f64 * 1e-6 * fs).ceil() as usize;
        let mut i = first;
        while i < samples.len() {
            let dt = i as f64 * 1e6 / fs - onset as f64;
            if dt >= pulse_us as f64 {
                break;
            }
            if dt >= 0.0 {
                samples[i] += pulse_shape(peak_v, pulse_us, dt);
            }
            i += 1;
        }
    }
}

pub fn action_potential_train(config: &ApTrainConfig) -> Result<ApRecording> {
    let mean_isi_us = 1e6 / config.ap_rate_hz;
    if !(config.ap_rate_hz > 0.0 && mean_isi_us > config.min_isi_us as f64) {
        return Err(Error::Config(format!(
            "pulse rate {} Hz is incompatible with a {} us minimum gap",
            config.ap_rate_hz, config.min_isi_us
        )));
    }
    let fs = config.sample_rate_hz;
    let n = (config.duration_s * fs).round() as usize;
    let end_us = (config.duration_s * 1e6) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let exp = Exp::new(1.0 / (mean_isi_us - config.min_isi_us as f64))
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut onsets_us = Vec::new();
    let mut t = exp.sample(&mut rng);
    while (t as u64) + config.pulse_us < end_us {
        onsets_us.push(t.round() as u64);
        t += config.min_isi_us as f64 + exp.sample(&mut rng);
    }

    let lfp_phase = rng.random::<f64>() * 2.0 * PI;
    let mut samples: Vec<f64> = (0..n)
        .map(|i| config.lfp_amplitude_v * (2.0 * PI * config.lfp_hz * i as f64 / fs + lfp_phase).sin())
        .collect();
    add_pulses(&mut samples, fs, &onsets_us, config.peak_v, config.pulse_us);
    if config.background_noise_v > 0.0 {
        let normal = Normal::new(0.0, config.background_noise_v).map_err(|e| Error::Config(e.to_string()))?;
        for x in &mut samples {
            *x += normal.sample(&mut rng);
        }
    }
    Ok(ApRecording {
        signal: SampledSignal::new(samples, fs, 0)?,
        onsets_us,
    })
}

/// The default surrogate recording used to calibrate the default delta.
pub fn reference_recording() -> ApRecording {
    action_potential_train(&ApTrainConfig::default()).expect("default surrogate is valid")
}

/// Population of cosine-tuned units driven by sinusoidal 2-D velocity,
/// one unit per recording channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingScenarioConfig {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub n_channels: usize,
    pub base_rate_hz: f64,
    pub modulation_hz: f64,
    pub vx_hz: f64,
    pub vy_hz: f64,
    /// Rate at which the kinematics labels are sampled.
    pub kinematics_rate_hz: f64,
    pub min_isi_us: u64,
    pub peak_v: f64,
    pub pulse_us: u64,
    pub lfp_amplitude_v: f64,
    pub lfp_hz: f64,
    pub background_noise_v: f64,
    pub seed: u64,
}

impl Default for DecodingScenarioConfig {
    fn default() -> Self {
        Self {
            duration_s: 60.0,
            sample_rate_hz: 30_000.0,
            n_channels: 32,
            base_rate_hz: 40.0,
            modulation_hz: 35.0,
            vx_hz: 0.23,
            vy_hz: 0.37,
            kinematics_rate_hz: 100.0,
            min_isi_us: 2000,
            peak_v: 0.220,
            pulse_us: 1000,
            lfp_amplitude_v: 0.032,
            lfp_hz: 8.0,
            background_noise_v: 0.005,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecodingScenario {
    pub signals: Vec<SampledSignal>,
    pub kinematics: KinematicsSeries,
    pub unit_spikes_us: Vec<Vec<u64>>,
    pub span_us: u64,
}

fn velocity(config: &DecodingScenarioConfig, t_s: f64) -> (f64, f64) {
    (
        (2.0 * PI * config.vx_hz * t_s).sin(),
        (2.0 * PI * config.vy_hz * t_s).cos(),
    )
}

pub fn decoding_scenario(config: &DecodingScenarioConfig) -> Result<DecodingScenario> {
    if config.n_channels == 0 || config.duration_s <= 0.0 || config.kinematics_rate_hz <= 0.0 {
        return Err(Error::Config("scenario needs channels, duration and a label rate".into()));
    }
    let fs = config.sample_rate_hz;
    let n = (config.duration_s * fs).round() as usize;
    let span_us = (config.duration_s * 1e6).round() as u64;
    let rate_max = config.base_rate_hz + config.modulation_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let candidates = Exp::new(rate_max * 1e-6).map_err(|e| Error::Config(e.to_string()))?;
    let noise = if config.background_noise_v > 0.0 {
        Some(Normal::new(0.0, config.background_noise_v).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };

    let mut signals = Vec::with_capacity(config.n_channels);
    let mut unit_spikes_us = Vec::with_capacity(config.n_channels);
    for ch in 0..config.n_channels {
        let theta = 2.0 * PI * ch as f64 / config.n_channels as f64;
        let (c, s) = (theta.cos(), theta.sin());

        // thinning of a homogeneous process at the peak rate
        let mut spikes = Vec::new();
        let mut t = 0.0;
        let mut last: Option<u64> = None;
        loop {
            t += candidates.sample(&mut rng);
            let onset = t.round() as u64;
            if onset + config.pulse_us >= span_us {
                break;
            }
            let (vx, vy) = velocity(config, t * 1e-6);
            let rate = (config.base_rate_hz + config.modulation_hz * (vx * c + vy * s)).max(0.0);
            if rng.random::<f64>() * rate_max >= rate {
                continue;
            }
            if matches!(last, Some(prev) if onset < prev + config.min_isi_us) {
                continue;
            }
            spikes.push(onset);
            last = Some(onset);
        }

        let phase = rng.random::<f64>() * 2.0 * PI;
        let mut samples: Vec<f64> = (0..n)
            .map(|i| config.lfp_amplitude_v * (2.0 * PI * config.lfp_hz * i as f64 / fs + phase).sin())
            .collect();
        add_pulses(&mut samples, fs, &spikes, config.peak_v, config.pulse_us);
        if let Some(normal) = &noise {
            for x in &mut samples {
                *x += normal.sample(&mut rng);
            }
        }
        signals.push(SampledSignal::new(samples, fs, 0)?);
        unit_spikes_us.push(spikes);
    }

    let n_labels = (config.duration_s * config.kinematics_rate_hz).round() as usize;
    let t_us: Vec<u64> = (0..n_labels)
        .map(|k| (k as f64 * 1e6 / config.kinematics_rate_hz).round() as u64)
        .collect();
    let (vx, vy): (Vec<f64>, Vec<f64>) = t_us.iter().map(|&t| velocity(config, t as f64 * 1e-6)).unzip();
    Ok(DecodingScenario {
        signals,
        kinematics: KinematicsSeries::new(t_us, vx, vy)?,
        unit_spikes_us,
        span_us,
    })
}
