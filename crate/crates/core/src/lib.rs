//! Simulation and analysis toolkit for asynchronous delta-modulation spike
//! encoding of neural signals.
//!
//! * [`signal`]: sampled waveforms, the band-pass front end, noise injection
//!   and noise-floor estimation.
//! * [`encode`]: the delta modulator (behavioral and circuit models) and the
//!   threshold-crossing detectors, plus SNR sweeps.
//! * [`metrics`]: windowed spike matching, Pearson correlation, rates and the
//!   per-spike energy model.
//! * [`aer`]: address-event records, channel merging, the FIFO arbiter and
//!   the `.aer` file format.
//! * [`decode`]: binning, leaky features and a ridge readout for kinematics.
//! * [`synth`]: synthetic recordings for experiments.

pub mod aer;
pub mod config;
pub mod decode;
pub mod encode;
pub mod error;
pub mod metrics;
pub mod signal;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use train::{Polarity, SpikeEvent, SpikeTrain};
