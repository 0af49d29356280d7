//! Sampled analog signals, the band-pass front-end model, noise injection
//! and noise-floor estimation.
//!
//! Voltages are volts and times are integer microseconds everywhere. A
//! signal's sample `i` sits at `t0_us + round(i * 1e6 / sample_rate_hz)`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Gaussian consistency constant for the median absolute deviation.
pub const MAD_TO_SIGMA: f64 = 0.6745;

/// A uniformly sampled voltage waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
    t0_us: u64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, t0_us: u64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Validation(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::Validation(format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            t0_us,
        })
    }

    /// Builds a signal sharing this one's rate and start time.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.sample_rate_hz, self.t0_us)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn t0_us(&self) -> u64 {
        self.t0_us
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Timestamp of sample `i` in microseconds.
    pub fn time_us(&self, i: usize) -> u64 {
        self.t0_us + (i as f64 * 1e6 / self.sample_rate_hz).round() as u64
    }

    /// One-past-the-end timestamp: the time sample `len()` would have.
    pub fn end_us(&self) -> u64 {
        self.time_us(self.samples.len())
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    pub fn median_abs(&self) -> f64 {
        median(self.samples.iter().map(|x| x.abs()).collect())
    }
}

pub(crate) fn rms(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Median of the values; mean of the two middle values for even lengths.
/// Returns 0 for an empty input.
pub(crate) fn median(mut xs: Vec<f64>) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    let (_, &mut upper, _) = xs.select_nth_unstable_by(n / 2, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = xs[..n / 2]
            .iter()
            .copied()
            .max_by(f64::total_cmp)
            .expect("non-empty lower half");
        0.5 * (lower + upper)
    }
}

/// On-disk signal encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    /// `time_s,value_v` or single-column `value_v`, optional header.
    Csv,
    /// Headerless little-endian f32 volts.
    RawF32Le,
}

impl std::str::FromStr for SignalFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SignalFormat::Csv),
            "raw" | "raw_f32_le" | "f32" => Ok(SignalFormat::RawF32Le),
            other => Err(Error::Config(format!("unknown signal format '{other}'"))),
        }
    }
}

/// Loads a signal file. For two-column CSV the sample rate is inferred from
/// the time column and `sample_rate_hz` is only used when a single row is
/// present.
pub fn load_signal(path: &Path, format: SignalFormat, sample_rate_hz: f64) -> Result<SampledSignal> {
    match format {
        SignalFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_signal_csv(&text, sample_rate_hz)
        }
        SignalFormat::RawF32Le => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_signal_raw(&bytes, sample_rate_hz)
        }
    }
}

pub fn parse_signal_raw(bytes: &[u8], sample_rate_hz: f64) -> Result<SampledSignal> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Format(format!(
            "raw f32 file length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    SampledSignal::new(samples, sample_rate_hz, 0)
}

pub fn parse_signal_csv(text: &str, sample_rate_hz: f64) -> Result<SampledSignal> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut columns: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if columns.is_none() && values.is_empty() {
            let header = line.replace(' ', "");
            if header == "time_s,value_v" {
                columns = Some(2);
                continue;
            }
            if header == "value_v" {
                columns = Some(1);
                continue;
            }
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match columns {
            None => columns = Some(fields.len()),
            Some(n) if n != fields.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {n} columns, found {}", fields.len()),
                })
            }
            _ => {}
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("cannot parse '{s}' as a number"),
            })
        };
        let finite = |v: f64| -> Result<f64> {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Validation(format!("line {line_no}: non-finite value {v}")))
            }
        };
        match fields.len() {
            1 => values.push(finite(parse(fields[0])?)?),
            2 => {
                times.push(finite(parse(fields[0])?)?);
                values.push(finite(parse(fields[1])?)?);
            }
            n => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 1 or 2 columns, found {n}"),
                })
            }
        }
    }

    if times.is_empty() {
        return SampledSignal::new(values, sample_rate_hz, 0);
    }
    if times[0] < 0.0 {
        return Err(Error::Validation("negative start time".into()));
    }
    let t0_us = (times[0] * 1e6).round() as u64;
    if times.len() == 1 {
        return SampledSignal::new(values, sample_rate_hz, t0_us);
    }
    let span = times[times.len() - 1] - times[0];
    if span <= 0.0 {
        return Err(Error::Validation("time column is not increasing".into()));
    }
    let rate = (times.len() - 1) as f64 / span;
    let period = 1.0 / rate;
    for (i, &t) in times.iter().enumerate() {
        let expected = times[0] + i as f64 * period;
        if (t - expected).abs() > 0.5 * period {
            return Err(Error::Validation(format!(
                "non-uniform timestamps: row {i} at {t} s, expected {expected} s"
            )));
        }
    }
    SampledSignal::new(values, rate, t0_us)
}

/// Renders a signal as two-column CSV with a `time_s,value_v` header.
pub fn signal_to_csv(signal: &SampledSignal) -> String {
    let mut out = String::from("time_s,value_v\n");
    let t0 = signal.t0_us() as f64 * 1e-6;
    let period = 1.0 / signal.sample_rate_hz();
    for (i, v) in signal.samples().iter().enumerate() {
        out.push_str(&format!("{},{}\n", t0 + i as f64 * period, v));
    }
    out
}

/// Low-noise amplifier model: mid-band gain, two -3 dB corners and the
/// input-referred noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontEndConfig {
    pub midband_gain_db: f64,
    pub f_low_hz: f64,
    pub f_high_hz: f64,
    pub input_noise_vrms: f64,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        Self {
            midband_gain_db: 12.14,
            f_low_hz: 80.0,
            f_high_hz: 8000.0,
            input_noise_vrms: 14.990e-6,
        }
    }
}

impl FrontEndConfig {
    /// Measured noise spectral density (V/sqrt(Hz)). Metadata only; noise
    /// calibration uses `input_noise_vrms`.
    pub const NOISE_DENSITY_V_PER_RTHZ: f64 = 91.88e-9;

    pub fn linear_gain(&self) -> f64 {
        10f64.powf(self.midband_gain_db / 20.0)
    }

    pub fn midband_hz(&self) -> f64 {
        (self.f_low_hz * self.f_high_hz).sqrt()
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if !(self.f_low_hz > 0.0 && self.f_high_hz > 0.0) {
            return Err(Error::Config("corner frequencies must be positive".into()));
        }
        if self.f_low_hz >= self.f_high_hz {
            return Err(Error::Config(format!(
                "low corner {} Hz must be below high corner {} Hz",
                self.f_low_hz, self.f_high_hz
            )));
        }
        if !self.midband_gain_db.is_finite() || self.input_noise_vrms < 0.0 {
            return Err(Error::Config("invalid gain or noise level".into()));
        }
        if sample_rate_hz <= 2.0 * self.f_high_hz {
            return Err(Error::Config(format!(
                "sample rate {sample_rate_hz} Hz must exceed twice the high corner ({} Hz)",
                self.f_high_hz
            )));
        }
        Ok(())
    }
}

/// First-order section `y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]`.
#[derive(Debug, Clone, Copy)]
struct FirstOrder {
    b0: f64,
    b1: f64,
    a1: f64,
    x1: f64,
    y1: f64,
}

impl FirstOrder {
    /// Bilinear high-pass with the corner prewarped to `corner_hz`.
    fn high_pass(corner_hz: f64, fs: f64) -> Self {
        let k = (PI * corner_hz / fs).tan();
        Self {
            b0: 1.0 / (1.0 + k),
            b1: -1.0 / (1.0 + k),
            a1: (k - 1.0) / (k + 1.0),
            x1: 0.0,
            y1: 0.0,
        }
    }

    fn low_pass(corner_hz: f64, fs: f64) -> Self {
        let k = (PI * corner_hz / fs).tan();
        Self {
            b0: k / (1.0 + k),
            b1: k / (1.0 + k),
            a1: (k - 1.0) / (k + 1.0),
            x1: 0.0,
            y1: 0.0,
        }
    }

    #[inline]
    fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.b1 * self.x1 - self.a1 * self.y1;
        self.x1 = x;
        self.y1 = y;
        y
    }
}

/// Streaming band-pass front end. One instance per channel.
#[derive(Debug, Clone)]
pub struct FrontEnd {
    hp: FirstOrder,
    lp: FirstOrder,
    scale: f64,
}

impl FrontEnd {
    pub fn new(config: &FrontEndConfig, sample_rate_hz: f64) -> Result<Self> {
        config.validate(sample_rate_hz)?;
        let fs = sample_rate_hz;
        // Digital magnitude of the unscaled cascade at the mid-band frequency,
        // in the prewarped frequency variable tan(pi f / fs).
        let w = (PI * config.midband_hz() / fs).tan();
        let kl = (PI * config.f_low_hz / fs).tan();
        let kh = (PI * config.f_high_hz / fs).tan();
        let unscaled = (w / (w * w + kl * kl).sqrt()) * (kh / (w * w + kh * kh).sqrt());
        Ok(Self {
            hp: FirstOrder::high_pass(config.f_low_hz, fs),
            lp: FirstOrder::low_pass(config.f_high_hz, fs),
            scale: config.linear_gain() / unscaled,
        })
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        self.scale * self.lp.process(self.hp.process(x))
    }
}

/// Applies the front-end model to a whole signal, starting from rest.
pub fn bandpass_front_end(signal: &SampledSignal, config: &FrontEndConfig) -> Result<SampledSignal> {
    let mut fe = FrontEnd::new(config, signal.sample_rate_hz())?;
    let out = signal.samples().iter().map(|&x| fe.process(x)).collect();
    signal.with_samples(out)
}

/// Pure tone `amplitude * sin(2 pi f t)` of `n` samples.
pub fn tone(freq_hz: f64, amplitude: f64, sample_rate_hz: f64, n: usize) -> Result<SampledSignal> {
    let samples = (0..n)
        .map(|i| amplitude * (2.0 * PI * freq_hz * i as f64 / sample_rate_hz).sin())
        .collect();
    SampledSignal::new(samples, sample_rate_hz, 0)
}

/// Least-squares amplitude of the `freq_hz` component of `samples[skip..]`.
pub fn tone_amplitude(samples: &[f64], freq_hz: f64, sample_rate_hz: f64, skip: usize) -> f64 {
    let (mut ss, mut cc, mut sc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &y) in samples.iter().enumerate().skip(skip) {
        let ph = 2.0 * PI * freq_hz * i as f64 / sample_rate_hz;
        let (s, c) = ph.sin_cos();
        ss += s * s;
        cc += c * c;
        sc += s * c;
        ys += y * s;
        yc += y * c;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    (a * a + b * b).sqrt()
}

/// Gain in dB of the front end at `freq_hz`, measured by driving it with a
/// sinusoid and fitting the steady-state output amplitude.
pub fn measure_gain_db(config: &FrontEndConfig, sample_rate_hz: f64, freq_hz: f64) -> Result<f64> {
    // Settle for at least ten low-corner time constants and ten periods.
    let settle_s = (10.0 / (2.0 * PI * config.f_low_hz)).max(10.0 / freq_hz);
    let measure_s = (20.0 / freq_hz).max(0.05);
    let skip = (settle_s * sample_rate_hz).ceil() as usize;
    let n = skip + (measure_s * sample_rate_hz).ceil() as usize;
    let input = tone(freq_hz, 1.0, sample_rate_hz, n)?;
    let output = bandpass_front_end(&input, config)?;
    let amp = tone_amplitude(output.samples(), freq_hz, sample_rate_hz, skip);
    Ok(20.0 * amp.log10())
}

/// A noisy copy of a signal along with the noise level actually used.
#[derive(Debug, Clone)]
pub struct NoisySignal {
    pub signal: SampledSignal,
    pub sigma_v: f64,
}

/// Adds white Gaussian noise with `sigma = level_multiplier * median(|x|)`.
///
/// Deterministic for a given seed. A zero sigma (zero multiplier or an
/// all-zero signal) returns the input unchanged.
pub fn inject_awgn(signal: &SampledSignal, level_multiplier: f64, rng_seed: u64) -> Result<NoisySignal> {
    if !(level_multiplier.is_finite() && level_multiplier >= 0.0) {
        return Err(Error::Config(format!(
            "noise multiplier must be non-negative, got {level_multiplier}"
        )));
    }
    let sigma = level_multiplier * signal.median_abs();
    if sigma == 0.0 {
        if level_multiplier > 0.0 {
            log::warn!("median |x| is zero; noise level multiplier {level_multiplier} has no effect");
        }
        return Ok(NoisySignal {
            signal: signal.clone(),
            sigma_v: 0.0,
        });
    }
    add_gaussian_noise(signal, sigma, rng_seed).map(|s| NoisySignal {
        signal: s,
        sigma_v: sigma,
    })
}

/// Adds zero-mean white Gaussian noise of absolute standard deviation `sigma_v`.
pub fn add_gaussian_noise(signal: &SampledSignal, sigma_v: f64, rng_seed: u64) -> Result<SampledSignal> {
    if sigma_v == 0.0 {
        return Ok(signal.clone());
    }
    let normal = Normal::new(0.0, sigma_v)
        .map_err(|e| Error::Config(format!("invalid noise sigma {sigma_v}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let noisy = signal
        .samples()
        .iter()
        .map(|&x| x + normal.sample(&mut rng))
        .collect();
    signal.with_samples(noisy)
}

/// Robust noise standard deviation: `median(|x - median(x)|) / 0.6745`.
pub fn estimate_noise_sigma_mad(signal: &SampledSignal) -> Result<f64> {
    if signal.len() < 2 {
        return Err(Error::Validation(
            "noise estimation needs at least two samples".into(),
        ));
    }
    let center = median(signal.samples().to_vec());
    let mad = median(signal.samples().iter().map(|x| (x - center).abs()).collect());
    Ok(mad / MAD_TO_SIGMA)
}

/// `20 log10(rms(signal) / noise_sigma)`.
pub fn estimate_snr_db(signal: &SampledSignal, noise_sigma: f64) -> Result<f64> {
    if noise_sigma.is_nan() || noise_sigma <= 0.0 {
        return Err(Error::Domain(format!(
            "noise sigma must be positive, got {noise_sigma}"
        )));
    }
    Ok(20.0 * (signal.rms() / noise_sigma).log10())
}
