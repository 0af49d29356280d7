//! Kinematics decoding harness: spike binning, leaky-integration features,
//! a ridge-regularized linear readout and Pearson scoring.
//!
//! This stands in for a spiking decoder. It is small enough to verify by hand
//! and is meant for comparing encoders on the same ground truth, not for
//! reproducing absolute decoding numbers.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::aer::AerStream;
use crate::encode::Encoder;
use crate::error::{Error, Result};
use crate::metrics::{pearson, EnergyModel};
use crate::signal::SampledSignal;
use crate::train::{Polarity, SpikeTrain};

pub const DEFAULT_BIN_WIDTH_US: u64 = 20_000;
pub const DEFAULT_TAU_US: u64 = 100_000;
pub const DEFAULT_LAMBDA_GRID: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0];
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

/// Event counts per bin. Column `2c` holds channel `c` ON events and column
/// `2c + 1` its OFF events.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCounts {
    pub counts: DMatrix<u32>,
    pub bin_width_us: u64,
}

impl BinnedCounts {
    pub fn n_bins(&self) -> usize {
        self.counts.nrows()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Bins `(channel, timestamp, polarity)` events into `[b*w, (b+1)*w)` bins
/// covering `[0, span_us)`. Events at or past `span_us` are dropped.
pub fn bin_events<I>(events: I, n_channels: usize, bin_width_us: u64, span_us: u64) -> Result<BinnedCounts>
where
    I: IntoIterator<Item = (usize, u64, Polarity)>,
{
    if bin_width_us == 0 {
        return Err(Error::Config("bin width must be positive".into()));
    }
    if span_us < bin_width_us {
        return Err(Error::Config(format!(
            "span {span_us} us is shorter than one bin ({bin_width_us} us)"
        )));
    }
    let n_bins = span_us.div_ceil(bin_width_us) as usize;
    let mut counts = DMatrix::<u32>::zeros(n_bins, 2 * n_channels);
    for (channel, t, polarity) in events {
        if channel >= n_channels {
            return Err(Error::Validation(format!(
                "channel {channel} outside the {n_channels} binned channels"
            )));
        }
        if t >= span_us {
            continue;
        }
        let col = 2 * channel + usize::from(polarity == Polarity::Off);
        counts[((t / bin_width_us) as usize, col)] += 1;
    }
    Ok(BinnedCounts {
        counts,
        bin_width_us,
    })
}

pub fn bin_train(train: &SpikeTrain, bin_width_us: u64, span_us: u64) -> Result<BinnedCounts> {
    bin_events(
        train.events().iter().map(|e| (0, e.timestamp_us, e.polarity)),
        1,
        bin_width_us,
        span_us,
    )
}

pub fn bin_trains(trains: &[SpikeTrain], bin_width_us: u64, span_us: u64) -> Result<BinnedCounts> {
    bin_events(
        trains
            .iter()
            .enumerate()
            .flat_map(|(c, t)| t.events().iter().map(move |e| (c, e.timestamp_us, e.polarity))),
        trains.len(),
        bin_width_us,
        span_us,
    )
}

pub fn bin_stream(stream: &AerStream, n_channels: usize, bin_width_us: u64, span_us: u64) -> Result<BinnedCounts> {
    bin_events(
        stream
            .events()
            .iter()
            .map(|e| (e.channel() as usize, e.timestamp_us(), e.polarity())),
        n_channels,
        bin_width_us,
        span_us,
    )
}

/// Per column `y[n] = alpha * y[n-1] + c[n]` with `alpha = exp(-w / tau)`.
pub fn leaky_features(counts: &BinnedCounts, tau_us: u64) -> Result<DMatrix<f64>> {
    if tau_us == 0 {
        return Err(Error::Config("leak time constant must be positive".into()));
    }
    let alpha = (-(counts.bin_width_us as f64) / tau_us as f64).exp();
    let mut out = DMatrix::<f64>::zeros(counts.counts.nrows(), counts.counts.ncols());
    for col in 0..out.ncols() {
        let mut y = 0.0;
        for row in 0..out.nrows() {
            y = alpha * y + counts.counts[(row, col)] as f64;
            out[(row, col)] = y;
        }
    }
    Ok(out)
}

/// Velocity labels sampled at strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicsSeries {
    t_us: Vec<u64>,
    vx: Vec<f64>,
    vy: Vec<f64>,
}

impl KinematicsSeries {
    pub fn new(t_us: Vec<u64>, vx: Vec<f64>, vy: Vec<f64>) -> Result<Self> {
        if t_us.len() != vx.len() || t_us.len() != vy.len() {
            return Err(Error::Validation("kinematics columns differ in length".into()));
        }
        if t_us.is_empty() {
            return Err(Error::Validation("kinematics series is empty".into()));
        }
        if t_us.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("kinematics timestamps must increase".into()));
        }
        if vx.iter().chain(&vy).any(|v| !v.is_finite()) {
            return Err(Error::Validation("kinematics contain non-finite values".into()));
        }
        Ok(Self { t_us, vx, vy })
    }

    pub fn t_us(&self) -> &[u64] {
        &self.t_us
    }

    pub fn vx(&self) -> &[f64] {
        &self.vx
    }

    pub fn vy(&self) -> &[f64] {
        &self.vy
    }

    pub fn len(&self) -> usize {
        self.t_us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_us.is_empty()
    }

    /// Linear interpolation at bin centers, held constant past either end.
    /// Returns an `n_bins x 2` matrix of `(vx, vy)`.
    pub fn resample_to_bins(&self, bin_width_us: u64, n_bins: usize) -> DMatrix<f64> {
        let mut out = DMatrix::<f64>::zeros(n_bins, 2);
        let mut k = 0;
        for b in 0..n_bins {
            let t = (b as f64 + 0.5) * bin_width_us as f64;
            while k + 1 < self.t_us.len() && (self.t_us[k + 1] as f64) < t {
                k += 1;
            }
            let (vx, vy) = if t <= self.t_us[0] as f64 {
                (self.vx[0], self.vy[0])
            } else if k + 1 >= self.t_us.len() {
                (self.vx[k], self.vy[k])
            } else {
                let (t0, t1) = (self.t_us[k] as f64, self.t_us[k + 1] as f64);
                let f = (t - t0) / (t1 - t0);
                (
                    self.vx[k] + f * (self.vx[k + 1] - self.vx[k]),
                    self.vy[k] + f * (self.vy[k + 1] - self.vy[k]),
                )
            };
            out[(b, 0)] = vx;
            out[(b, 1)] = vy;
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,vx,vy\n");
        for i in 0..self.len() {
            out.push_str(&format!("{},{},{}\n", self.t_us[i] as f64 * 1e-6, self.vx[i], self.vy[i]));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (mut t, mut vx, mut vy) = (Vec::new(), Vec::new(), Vec::new());
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || (idx == 0 && line.replace(' ', "") == "time_s,vx,vy") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected 3 columns, found {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("cannot parse '{s}'"),
                })
            };
            let ts = parse(fields[0])?;
            if !(ts.is_finite() && ts >= 0.0) {
                return Err(Error::Validation(format!("line {}: bad time {ts}", idx + 1)));
            }
            t.push((ts * 1e6).round() as u64);
            vx.push(parse(fields[1])?);
            vy.push(parse(fields[2])?);
        }
        Self::new(t, vx, vy)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

/// Affine map from features to `(vx, vy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearReadout {
    /// `features x 2`
    pub weights: DMatrix<f64>,
    pub bias: [f64; 2],
    pub ridge_lambda: f64,
}

impl LinearReadout {
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if features.ncols() != self.weights.nrows() {
            return Err(Error::Validation(format!(
                "readout expects {} features, got {}",
                self.weights.nrows(),
                features.ncols()
            )));
        }
        let mut out = features * &self.weights;
        for mut row in out.row_iter_mut() {
            row[0] += self.bias[0];
            row[1] += self.bias[1];
        }
        Ok(out)
    }
}

/// Ridge regression with an unpenalized bias, solved through the normal
/// equations `(A'A + lambda D) beta = A'Y` where `A = [X 1]`.
pub fn fit_readout(features: &DMatrix<f64>, targets: &DMatrix<f64>, ridge_lambda: f64) -> Result<LinearReadout> {
    let (n, f) = features.shape();
    if targets.shape() != (n, 2) {
        return Err(Error::Validation(format!(
            "targets must be {n} x 2, got {} x {}",
            targets.nrows(),
            targets.ncols()
        )));
    }
    if n < f + 1 {
        return Err(Error::Validation(format!(
            "need at least {} rows for {f} features, got {n}",
            f + 1
        )));
    }
    if !(ridge_lambda.is_finite() && ridge_lambda >= 0.0) {
        return Err(Error::Config(format!("ridge lambda must be >= 0, got {ridge_lambda}")));
    }

    let mut design = DMatrix::<f64>::from_element(n, f + 1, 1.0);
    design.view_mut((0, 0), (n, f)).copy_from(features);
    let mut gram = design.transpose() * &design;
    for i in 0..f {
        gram[(i, i)] += ridge_lambda;
    }
    let rhs = design.transpose() * targets;

    let singular = || {
        Error::Numerical(format!(
            "normal equations are singular at lambda = {ridge_lambda}; use a positive ridge lambda"
        ))
    };
    let chol = gram.clone().cholesky().ok_or_else(singular)?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if lo.is_nan() || lo <= 0.0 || (lo / hi).powi(2) < 1e-13 {
        return Err(singular());
    }
    let beta = chol.solve(&rhs);
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(singular());
    }
    Ok(LinearReadout {
        weights: beta.rows(0, f).into_owned(),
        bias: [beta[(f, 0)], beta[(f, 1)]],
        ridge_lambda,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingScore {
    pub rho_x: f64,
    pub rho_y: f64,
    pub rho_avg: f64,
}

pub fn evaluate_decoding(readout: &LinearReadout, features: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<DecodingScore> {
    let pred = readout.predict(features)?;
    if targets.shape() != pred.shape() {
        return Err(Error::Validation("prediction and target shapes differ".into()));
    }
    let col = |m: &DMatrix<f64>, c: usize| m.column(c).iter().copied().collect::<Vec<f64>>();
    let rho_x = pearson(&col(&pred, 0), &col(targets, 0))?;
    let rho_y = pearson(&col(&pred, 1), &col(targets, 1))?;
    Ok(DecodingScore {
        rho_x,
        rho_y,
        rho_avg: 0.5 * (rho_x + rho_y),
    })
}

/// Mean squared training residual, used to check the ridge path.
pub fn training_mse(readout: &LinearReadout, features: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<f64> {
    let pred = readout.predict(features)?;
    Ok((pred - targets).norm_squared() / targets.len() as f64)
}

/// Chronological split point for a train fraction.
fn split_rows(n: usize, train_fraction: f64) -> usize {
    ((n as f64 * train_fraction).round() as usize).clamp(1, n.saturating_sub(1))
}

/// Picks the lambda from `grid` with the best held-out `rho_avg` when fitting
/// on the first `train_fraction` of the rows. Earlier grid entries win ties.
pub fn select_lambda(features: &DMatrix<f64>, targets: &DMatrix<f64>, grid: &[f64], train_fraction: f64) -> Result<f64> {
    let n = features.nrows();
    let split = split_rows(n, train_fraction);
    let (xtr, ytr) = (features.rows(0, split).into_owned(), targets.rows(0, split).into_owned());
    let (xva, yva) = (
        features.rows(split, n - split).into_owned(),
        targets.rows(split, n - split).into_owned(),
    );
    let mut best: Option<(f64, f64)> = None;
    for &lambda in grid {
        let Ok(readout) = fit_readout(&xtr, &ytr, lambda) else {
            continue;
        };
        let Ok(score) = evaluate_decoding(&readout, &xva, &yva) else {
            continue;
        };
        if best.is_none_or(|(_, r)| score.rho_avg > r) {
            best = Some((lambda, score.rho_avg));
        }
    }
    best.map(|(l, _)| l)
        .ok_or_else(|| Error::Numerical("no lambda in the grid produced a usable fit".into()))
}

/// Decoder hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub bin_width_us: u64,
    pub tau_us: u64,
    /// Fixed ridge lambda; chosen from `lambda_grid` when `None`.
    pub lambda: Option<f64>,
    pub lambda_grid: Vec<f64>,
    pub train_fraction: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            bin_width_us: DEFAULT_BIN_WIDTH_US,
            tau_us: DEFAULT_TAU_US,
            lambda: None,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            train_fraction: DEFAULT_TRAIN_FRACTION,
        }
    }
}

/// Outcome of fitting on the first part of a recording and testing on the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub lambda: f64,
    pub train: DecodingScore,
    pub test: DecodingScore,
}

/// Bins nothing itself: takes features and bin-aligned targets, selects
/// lambda on the training part (inner split), refits and scores on the
/// held-out tail.
pub fn fit_and_evaluate(features: &DMatrix<f64>, targets: &DMatrix<f64>, config: &DecodeConfig) -> Result<DecodeOutcome> {
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(Error::Config("train fraction must lie in (0, 1)".into()));
    }
    let n = features.nrows();
    if n < 4 {
        return Err(Error::Validation(format!("only {n} bins to decode")));
    }
    let split = split_rows(n, config.train_fraction);
    let xtr = features.rows(0, split).into_owned();
    let ytr = targets.rows(0, split).into_owned();
    let xte = features.rows(split, n - split).into_owned();
    let yte = targets.rows(split, n - split).into_owned();
    let lambda = match config.lambda {
        Some(l) => l,
        None => select_lambda(&xtr, &ytr, &config.lambda_grid, config.train_fraction)?,
    };
    let readout = fit_readout(&xtr, &ytr, lambda)?;
    Ok(DecodeOutcome {
        lambda,
        train: evaluate_decoding(&readout, &xtr, &ytr)?,
        test: evaluate_decoding(&readout, &xte, &yte)?,
    })
}

/// Full chain for per-channel trains: bin, integrate, fit, score.
pub fn decode_trains(
    trains: &[SpikeTrain],
    kinematics: &KinematicsSeries,
    span_us: u64,
    config: &DecodeConfig,
) -> Result<DecodeOutcome> {
    let counts = bin_trains(trains, config.bin_width_us, span_us)?;
    let features = leaky_features(&counts, config.tau_us)?;
    let targets = kinematics.resample_to_bins(config.bin_width_us, counts.n_bins());
    fit_and_evaluate(&features, &targets, config)
}

/// Per-encoder line of a decoding comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderDecodeReport {
    pub encoder: String,
    pub rho_x: f64,
    pub rho_y: f64,
    pub rho_avg: f64,
    pub train_rho_avg: f64,
    pub lambda: f64,
    pub events: usize,
    pub energy_j: f64,
}

impl EncoderDecodeReport {
    pub fn new(encoder: &str, outcome: &DecodeOutcome, events: usize, energy: &EnergyModel) -> Self {
        Self {
            encoder: encoder.to_string(),
            rho_x: outcome.test.rho_x,
            rho_y: outcome.test.rho_y,
            rho_avg: outcome.test.rho_avg,
            train_rho_avg: outcome.train.rho_avg,
            lambda: outcome.lambda,
            events,
            energy_j: events as f64 * energy.energy_per_spike_j,
        }
    }
}

/// Encodes every channel with each encoder and decodes the same kinematics
/// from the result. Scores are on the held-out tail of the recording.
pub fn compare_encoders(
    signals: &[SampledSignal],
    kinematics: &KinematicsSeries,
    span_us: u64,
    encoders: &[Encoder],
    config: &DecodeConfig,
    energy: &EnergyModel,
) -> Result<Vec<EncoderDecodeReport>> {
    encoders
        .iter()
        .map(|encoder| {
            let trains = signals
                .iter()
                .map(|s| encoder.encode(s))
                .collect::<Result<Vec<_>>>()?;
            let events = trains.iter().map(SpikeTrain::len).sum();
            let outcome = decode_trains(&trains, kinematics, span_us, config)?;
            Ok(EncoderDecodeReport::new(encoder.name(), &outcome, events, energy))
        })
        .collect()
}
