//! Spike encoders: the asynchronous delta modulator (behavioral and
//! first-order circuit models) and the two amplitude-threshold detectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{estimate_snr_db, inject_awgn, SampledSignal};
use crate::train::{Polarity, SpikeEvent, SpikeTrain};


/// Default symmetric delta threshold in volts. On the reference recording
/// (`synth::reference_recording`) this gives about 200 events/s.
pub const DEFAULT_DELTA_V: f64 = 0.150;

/// Amplifier reference level, mid-supply of a 1.2 V rail.
pub const DEFAULT_V_REF: f64 = 0.6;

/// Delta modulator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmConfig {
    /// Upward threshold (volts).
    pub delta_on_v: f64,
    /// Downward threshold magnitude (volts).
    pub delta_off_v: f64,
    /// Differencing gain `C1 / C2`.
    pub gain_a: f64,
    /// Delay between the crossing and the reset pulse; sets the spike width.
    pub reset_delay_us: u64,
    /// Reset pulse width; sets the refractory period.
    pub refractory_us: u64,
    /// Amplifier output reference the reset returns to.
    pub v_ref: f64,
}

impl Default for AdmConfig {
    fn default() -> Self {
        Self {
            delta_on_v: DEFAULT_DELTA_V,
            delta_off_v: DEFAULT_DELTA_V,
            gain_a: 4.044,
            reset_delay_us: 100,
            refractory_us: 1000,
            v_ref: DEFAULT_V_REF,
        }
    }
}

impl AdmConfig {
    pub fn symmetric(delta_v: f64) -> Self {
        Self {
            delta_on_v: delta_v,
            delta_off_v: delta_v,
            ..Self::default()
        }
    }

    /// Time after an event before the encoder re-arms.
    pub fn dead_time_us(&self) -> u64 {
        self.reset_delay_us + self.refractory_us
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.delta_on_v) || !positive(self.delta_off_v) {
            return Err(Error::Config(format!(
                "delta thresholds must be positive (on {}, off {})",
                self.delta_on_v, self.delta_off_v
            )));
        }
        if !positive(self.gain_a) {
            return Err(Error::Config(format!("gain must be positive, got {}", self.gain_a)));
        }
        if !self.v_ref.is_finite() {
            return Err(Error::Config("reference voltage must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmPhase {
    Active,
    Refractory,
}

/// Running state of one delta-modulator channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmState {
    /// Reference the input is compared against: the input at reset release,
    /// or the crossing level when there is no dead time.
    pub baseline_v: f64,
    pub phase: AdmPhase,
    pub refractory_end_us: u64,
}

/// Streaming behavioral delta modulator. Feed samples in time order.
#[derive(Debug, Clone)]
pub struct AdmEncoder {
    config: AdmConfig,
    state: Option<AdmState>,
}

impl AdmEncoder {
    pub fn new(config: AdmConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state: None,
        })
    }

    pub fn config(&self) -> &AdmConfig {
        &self.config
    }

    /// `None` until the first sample has been seen.
    pub fn state(&self) -> Option<&AdmState> {
        self.state.as_ref()
    }

    pub fn reset(&mut self) {
        self.state = None;
    }

    pub fn step(&mut self, t_us: u64, x: f64) -> Option<Polarity> {
        let Some(state) = self.state.as_mut() else {
            self.state = Some(AdmState {
                baseline_v: x,
                phase: AdmPhase::Active,
                refractory_end_us: 0,
            });
            return None;
        };

        if state.phase == AdmPhase::Refractory {
            if t_us < state.refractory_end_us {
                return None;
            }
            state.baseline_v = x;
            state.phase = AdmPhase::Active;
            return None;
        }

        let diff = x - state.baseline_v;
        let polarity = if diff >= self.config.delta_on_v {
            Polarity::On
        } else if diff <= -self.config.delta_off_v {
            Polarity::Off
        } else {
            return None;
        };

        state.refractory_end_us = t_us + self.config.dead_time_us();
        if state.refractory_end_us <= t_us {
            // zero dead time: the reset happens at the crossing itself, where
            // the input sits exactly one threshold away from the baseline
            state.baseline_v += match polarity {
                Polarity::On => self.config.delta_on_v,
                Polarity::Off => -self.config.delta_off_v,
            };
        } else {
            state.phase = AdmPhase::Refractory;
        }
        Some(polarity)
    }
}

/// Behavioral delta modulation of a whole signal.
pub fn adm_encode(signal: &SampledSignal, config: &AdmConfig) -> Result<SpikeTrain> {
    let mut enc = AdmEncoder::new(*config)?;
    let mut events = Vec::new();
    for (i, &x) in signal.samples().iter().enumerate() {
        let t = signal.time_us(i);
        if let Some(p) = enc.step(t, x) {
            events.push(SpikeEvent::new(t, p));
        }
    }
    SpikeTrain::new(events, signal.end_us())
}

/// First-order circuit model: an inverting differencing amplifier whose
/// output deviates from `v_ref` by `-A` times the input change since the last
/// reset, two comparators at `v_ref -+ A*delta`, and a reset that clamps the
/// output to `v_ref` for the whole dead time.
///
/// Returns the spike train and the amplifier output trace.
pub fn adm_circuit_encode(
    signal: &SampledSignal,
    config: &AdmConfig,
) -> Result<(SpikeTrain, SampledSignal)> {
    config.validate()?;
    let a = config.gain_a;
    let on_level = config.v_ref - a * config.delta_on_v;
    let off_level = config.v_ref + a * config.delta_off_v;
    let dead = config.dead_time_us();

    let mut trace = Vec::with_capacity(signal.len());
    let mut events = Vec::new();
    let mut v_in_at_reset = 0.0;
    let mut release_us: Option<u64> = None;

    for (i, &v_in) in signal.samples().iter().enumerate() {
        let t = signal.time_us(i);
        if i == 0 {
            v_in_at_reset = v_in;
            trace.push(config.v_ref);
            continue;
        }
        if let Some(release) = release_us {
            if t < release {
                trace.push(config.v_ref);
                continue;
            }
            release_us = None;
            v_in_at_reset = v_in;
        }

        let v_out = config.v_ref - a * (v_in - v_in_at_reset);
        trace.push(v_out);

        let fired = if v_out <= on_level {
            Some(Polarity::On)
        } else if v_out >= off_level {
            Some(Polarity::Off)
        } else {
            None
        };
        if let Some(p) = fired {
            events.push(SpikeEvent::new(t, p));
            if dead == 0 {
                v_in_at_reset += match p {
                    Polarity::On => config.delta_on_v,
                    Polarity::Off => -config.delta_off_v,
                };
            } else {
                release_us = Some(t + dead);
            }
        }
    }

    let train = SpikeTrain::new(events, signal.end_us())?;
    Ok((train, signal.with_samples(trace)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Threshold is `k * rms(signal)`.
    RmsMultiplier,
    /// Threshold is a fixed voltage.
    Absolute,
}

/// Amplitude-threshold detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub mode: ThresholdMode,
    /// RMS multiplier in `RmsMultiplier` mode, volts in `Absolute` mode.
    pub k_or_level: f64,
    pub refractory_us: u64,
}

impl ThresholdConfig {
    pub const DEFAULT_RMS_MULTIPLIER: f64 = -4.5;
    pub const DEFAULT_ABSOLUTE_LEVEL_V: f64 = 0.110;

    pub fn rms(k: f64) -> Self {
        Self {
            mode: ThresholdMode::RmsMultiplier,
            k_or_level: k,
            refractory_us: 1000,
        }
    }

    pub fn absolute(level_v: f64) -> Self {
        Self {
            mode: ThresholdMode::Absolute,
            k_or_level: level_v,
            refractory_us: 0,
        }
    }

    pub fn with_refractory(mut self, refractory_us: u64) -> Self {
        self.refractory_us = refractory_us;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k_or_level.is_finite() || self.k_or_level == 0.0 {
            return Err(Error::Config(format!(
                "threshold {} must be finite and nonzero",
                self.k_or_level
            )));
        }
        Ok(())
    }
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self::rms(Self::DEFAULT_RMS_MULTIPLIER)
    }
}

/// Threshold-crossing detection. A spike fires on the sample where the
/// signal reaches the threshold coming from the zero side; ON for positive
/// thresholds, OFF for negative ones.
pub fn threshold_encode(signal: &SampledSignal, config: &ThresholdConfig) -> Result<SpikeTrain> {
    config.validate()?;
    if signal.is_empty() {
        return Err(Error::Validation("cannot encode an empty signal".into()));
    }
    let threshold = match config.mode {
        ThresholdMode::Absolute => config.k_or_level,
        ThresholdMode::RmsMultiplier => {
            let rms = signal.rms();
            if rms == 0.0 {
                return Err(Error::Config(
                    "rms-multiplier threshold on a zero-rms signal".into(),
                ));
            }
            config.k_or_level * rms
        }
    };
    let (polarity, crossed): (Polarity, fn(f64, f64, f64) -> bool) = if threshold > 0.0 {
        (Polarity::On, |prev, cur, thr| prev < thr && cur >= thr)
    } else {
        (Polarity::Off, |prev, cur, thr| prev > thr && cur <= thr)
    };

    let xs = signal.samples();
    let mut events = Vec::new();
    let mut rearm_us = 0u64;
    for i in 1..xs.len() {
        let t = signal.time_us(i);
        if t < rearm_us || !crossed(xs[i - 1], xs[i], threshold) {
            continue;
        }
        events.push(SpikeEvent::new(t, polarity));
        rearm_us = t + config.refractory_us;
    }
    SpikeTrain::new(events, signal.end_us())
}

/// Encoder selection for experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Encoder {
    Adm(AdmConfig),
    AdmCircuit(AdmConfig),
    Threshold(ThresholdConfig),
}

impl Encoder {
    pub fn name(&self) -> &'static str {
        match self {
            Encoder::Adm(_) => "adm",
            Encoder::AdmCircuit(_) => "adm-circuit",
            Encoder::Threshold(c) => match c.mode {
                ThresholdMode::RmsMultiplier => "rms",
                ThresholdMode::Absolute => "abs",
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Encoder::Adm(c) | Encoder::AdmCircuit(c) => c.validate(),
            Encoder::Threshold(c) => c.validate(),
        }
    }

    pub fn encode(&self, signal: &SampledSignal) -> Result<SpikeTrain> {
        if signal.is_empty() {
            return Err(Error::Validation("cannot encode an empty signal".into()));
        }
        match self {
            Encoder::Adm(c) => adm_encode(signal, c),
            Encoder::AdmCircuit(c) => adm_circuit_encode(signal, c).map(|(t, _)| t),
            Encoder::Threshold(c) => threshold_encode(signal, c),
        }
    }

    /// Dead time the encoder enforces between consecutive events.
    pub fn refractory_us(&self) -> u64 {
        match self {
            Encoder::Adm(c) | Encoder::AdmCircuit(c) => c.dead_time_us(),
            Encoder::Threshold(c) => c.refractory_us,
        }
    }
}

/// One noise level of an SNR sweep.
#[derive(Debug, Clone)]
pub struct SweepLevel {
    pub multiplier: f64,
    pub sigma_v: f64,
    /// Infinite when no noise was added.
    pub snr_db: f64,
    pub train: SpikeTrain,
}

#[derive(Debug, Clone)]
pub struct SnrSweep {
    /// Encoding of the clean signal.
    pub reference: SpikeTrain,
    pub levels: Vec<SweepLevel>,
}

/// Encodes the clean signal and one noisy copy per multiplier.
///
/// All levels draw from the same seeded noise sequence, so the noise at
/// multiplier `m` is `m` times one fixed realization.
pub fn sweep_snr(
    signal: &SampledSignal,
    encoder: &Encoder,
    multipliers: &[f64],
    seed: u64,
) -> Result<SnrSweep> {
    if multipliers.is_empty() {
        return Err(Error::Config("at least one noise multiplier is required".into()));
    }
    if let Some(m) = multipliers.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(Error::Config(format!("noise multiplier {m} must be non-negative")));
    }
    encoder.validate()?;
    let reference = encoder.encode(signal)?;
    let mut levels = Vec::with_capacity(multipliers.len());
    for &multiplier in multipliers {
        let noisy = inject_awgn(signal, multiplier, seed)?;
        let (snr_db, train) = if noisy.sigma_v == 0.0 {
            (f64::INFINITY, reference.clone())
        } else {
            (
                estimate_snr_db(signal, noisy.sigma_v)?,
                encoder.encode(&noisy.signal)?,
            )
        };
        levels.push(SweepLevel {
            multiplier,
            sigma_v: noisy.sigma_v,
            snr_db,
            train,
        });
    }
    Ok(SnrSweep { reference, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::add_gaussian_noise;
    use proptest::prelude::*;

    const FS: f64 = 30_000.0;

    fn sig(xs: Vec<f64>) -> SampledSignal {
        SampledSignal::new(xs, FS, 0).unwrap()
    }

    fn instant(delta: f64) -> AdmConfig {
        AdmConfig {
            reset_delay_us: 0,
            refractory_us: 0,
            ..AdmConfig::symmetric(delta)
        }
    }

    #[test]
    fn constant_signal_is_silent() {
        let s = sig(vec![0.25; 3000]);
        assert!(adm_encode(&s, &AdmConfig::default()).unwrap().is_empty());
        let (t, trace) = adm_circuit_encode(&s, &AdmConfig::default()).unwrap();
        assert!(t.is_empty());
        assert!(trace.samples().iter().all(|&v| v == DEFAULT_V_REF));
        let zero = sig(vec![0.0; 3000]);
        let abs = ThresholdConfig::absolute(0.1);
        assert!(threshold_encode(&zero, &abs).unwrap().is_empty());
    }

    #[test]
    fn ramp_fires_every_millisecond() {
        // 1 V/s sampled at 30 kHz, 1 mV thresholds, no dead time.
        let s = sig((0..30_000).map(|i| i as f64 / FS).collect());
        let train = adm_encode(&s, &instant(1e-3)).unwrap();
        assert_eq!(train.count(Polarity::Off), 0);
        let on = train.times(Polarity::On);
        // floor(s * T / delta) = 1000, the last crossing falls past the end
        assert!((999..=1000).contains(&on.len()), "{}", on.len());
        assert_eq!(on[0], s.time_us(30));
        for w in on.windows(2) {
            // one period is 30 samples; fp rounding of the ramp may shift a
            // crossing by one sample
            let gap = w[1] - w[0];
            assert!((966..=1034).contains(&gap), "gap {gap}");
        }
    }

    #[test]
    fn step_down_fires_once_then_rebaselines() {
        let delta = 0.01;
        let k = 300;
        let xs: Vec<f64> = (0..3000).map(|i| if i < k { 0.0 } else { -3.5 * delta }).collect();
        let s = sig(xs);
        let train = adm_encode(&s, &AdmConfig::symmetric(delta)).unwrap();
        assert_eq!(train.events(), &[SpikeEvent::new(s.time_us(k), Polarity::Off)]);
    }

    #[test]
    fn zero_dead_time_rebaselines_at_crossing_level() {
        let delta = 0.01;
        let xs: Vec<f64> = (0..100).map(|i| if i < 10 { 0.0 } else { 0.035 }).collect();
        let s = sig(xs);
        let train = adm_encode(&s, &instant(delta)).unwrap();
        let expected: Vec<u64> = (10..13).map(|i| s.time_us(i)).collect();
        assert_eq!(train.times(Polarity::On), expected);
        assert_eq!(train.count(Polarity::Off), 0);
        let (circuit, _) = adm_circuit_encode(&s, &instant(delta)).unwrap();
        assert_eq!(circuit, train);
    }

    #[test]
    fn rebaseline_happens_at_refractory_end() {
        let cfg = AdmConfig::symmetric(0.01);
        let mut enc = AdmEncoder::new(cfg).unwrap();
        assert_eq!(enc.step(0, 0.0), None);
        assert_eq!(enc.step(100, 0.02), Some(Polarity::On));
        let st = *enc.state().unwrap();
        assert_eq!(st.phase, AdmPhase::Refractory);
        assert_eq!(st.refractory_end_us, 1200);
        assert_eq!(enc.step(1199, 0.5), None);
        assert_eq!(enc.step(1200, 0.03), None);
        let st = *enc.state().unwrap();
        assert_eq!(st.phase, AdmPhase::Active);
        assert_eq!(st.baseline_v, 0.03);
        assert_eq!(enc.step(1300, 0.045), Some(Polarity::On));
    }

    #[test]
    fn circuit_output_follows_inverted_gain() {
        let cfg = AdmConfig::symmetric(0.05);
        let s = sig(vec![0.0, 0.01, 0.01]);
        let (train, trace) = adm_circuit_encode(&s, &cfg).unwrap();
        assert!(train.is_empty());
        let dv = trace.samples()[1] - cfg.v_ref;
        assert!((dv - (-0.04044)).abs() < 1e-12, "{dv}");
    }

    #[test]
    fn circuit_trace_clamps_during_reset() {
        let cfg = AdmConfig::symmetric(0.01);
        let mut xs = vec![0.0; 10];
        xs.extend(vec![0.02; 90]);
        let s = sig(xs);
        let (train, trace) = adm_circuit_encode(&s, &cfg).unwrap();
        assert_eq!(train.len(), 1);
        assert!(trace.samples()[10] < cfg.v_ref - cfg.gain_a * 0.01 + 1e-12);
        assert!(trace.samples()[11..].iter().all(|&v| v == cfg.v_ref));
    }

    #[test]
    fn rms_threshold_single_excursion() {
        // carrier padded to unit rms, with one dip to -5
        let n = 3000;
        let mut xs: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.9 } else { -0.9 }).collect();
        let dip = [1500, 1501, 1502, 1503, 1504];
        let vals = [-2.0, -4.4, -4.6, -5.0, -3.0];
        for (i, v) in dip.iter().zip(vals) {
            xs[*i] = v;
        }
        // restore unit rms by adjusting a far-away sample
        let rest: f64 = xs[1..].iter().map(|x| x * x).sum();
        xs[0] = (n as f64 - rest).sqrt();
        let s = sig(xs);
        assert!((s.rms() - 1.0).abs() < 1e-12);
        let train = threshold_encode(&s, &ThresholdConfig::rms(-4.5)).unwrap();
        assert_eq!(train.events(), &[SpikeEvent::new(s.time_us(1502), Polarity::Off)]);
    }

    #[test]
    fn threshold_dead_time_merges_close_crossings() {
        // two upward crossings 12 samples (0.4 ms) apart
        let mut xs = vec![0.0; 300];
        xs[100] = 1.0;
        xs[112] = 1.0;
        let s = sig(xs);
        let cfg = ThresholdConfig::absolute(0.5).with_refractory(1000);
        assert_eq!(threshold_encode(&s, &cfg).unwrap().len(), 1);
        let cfg = ThresholdConfig::absolute(0.5).with_refractory(0);
        assert_eq!(threshold_encode(&s, &cfg).unwrap().len(), 2);
    }

    #[test]
    fn threshold_config_errors() {
        let s = sig(vec![0.0; 10]);
        assert!(matches!(
            threshold_encode(&s, &ThresholdConfig::rms(-4.5)),
            Err(Error::Config(_))
        ));
        assert!(ThresholdConfig::rms(0.0).validate().is_err());
        assert!(ThresholdConfig::absolute(f64::NAN).validate().is_err());
        assert!(AdmConfig::symmetric(0.0).validate().is_err());
    }

    fn noisy_steps(seed: u64) -> SampledSignal {
        let base: Vec<f64> = (0..6000)
            .map(|i| 0.05 * ((i / 700) % 3) as f64 + 2e-5 * i as f64)
            .collect();
        add_gaussian_noise(&sig(base), 0.01, seed).unwrap()
    }

    #[test]
    fn sweep_identity_and_ordering() {
        let s = noisy_steps(1);
        let enc = Encoder::Adm(AdmConfig::symmetric(0.03));
        let sw = sweep_snr(&s, &enc, &[0.0], 5).unwrap();
        assert_eq!(sw.levels.len(), 1);
        assert_eq!(sw.levels[0].train, adm_encode(&s, &AdmConfig::symmetric(0.03)).unwrap());
        assert!(sw.levels[0].snr_db.is_infinite());

        let sw = sweep_snr(&s, &enc, &[1.0, 1.5, 2.0, 4.0], 5).unwrap();
        assert_eq!(sw.levels.len(), 4);
        for w in sw.levels.windows(2) {
            assert!(w[1].snr_db < w[0].snr_db);
        }
        let again = sweep_snr(&s, &enc, &[1.0, 1.5, 2.0, 4.0], 5).unwrap();
        for (a, b) in sw.levels.iter().zip(&again.levels) {
            assert_eq!(a.train, b.train);
            assert_eq!(a.snr_db.to_bits(), b.snr_db.to_bits());
        }
        assert!(sweep_snr(&s, &enc, &[], 5).is_err());
        assert!(sweep_snr(&s, &enc, &[-1.0], 5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn circuit_matches_behavioral(seed in any::<u64>(), delta in 0.005f64..0.05, dead in 0u64..2000) {
            let s = noisy_steps(seed);
            let cfg = AdmConfig { reset_delay_us: dead / 10, refractory_us: dead, ..AdmConfig::symmetric(delta) };
            let behavioral = adm_encode(&s, &cfg).unwrap();
            let (circuit, _) = adm_circuit_encode(&s, &cfg).unwrap();
            prop_assert_eq!(behavioral, circuit);
        }

        #[test]
        fn refractory_is_respected(seed in any::<u64>(), dead in 1u64..3000) {
            let s = noisy_steps(seed);
            let cfg = AdmConfig { reset_delay_us: 0, refractory_us: dead, ..AdmConfig::symmetric(0.01) };
            let t = adm_encode(&s, &cfg).unwrap();
            if let Some(gap) = t.min_interval_us() {
                prop_assert!(gap >= dead);
            }
            let th = ThresholdConfig::absolute(0.06).with_refractory(dead);
            let t = threshold_encode(&s, &th).unwrap();
            if let Some(gap) = t.min_interval_us() {
                prop_assert!(gap >= dead);
            }
        }

        #[test]
        fn adm_is_offset_invariant(seed in any::<u64>(), offset in -1.0f64..1.0) {
            // dyadic grid so that shifted differences stay exact
            let q = |x: f64| (x * 2f64.powi(24)).round() / 2f64.powi(24);
            let offset = q(offset);
            let s = noisy_steps(seed);
            let s = s.with_samples(s.samples().iter().map(|&x| q(x)).collect()).unwrap();
            let shifted = s.with_samples(s.samples().iter().map(|x| x + offset).collect()).unwrap();
            let cfg = AdmConfig::symmetric(0.02);
            let a = adm_encode(&s, &cfg).unwrap();
            let b = adm_encode(&shifted, &cfg).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn adm_is_scale_covariant(seed in any::<u64>(), exp in -3i32..4) {
            let scale = 2f64.powi(exp);
            let s = noisy_steps(seed);
            let scaled = s.with_samples(s.samples().iter().map(|x| x * scale).collect()).unwrap();
            let a = adm_encode(&s, &AdmConfig::symmetric(0.02)).unwrap();
            let b = adm_encode(&scaled, &AdmConfig::symmetric(0.02 * scale)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
