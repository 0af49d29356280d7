//! C ABI over the `admsim` library.
//!
//! Every function returns an [`AdmsimStatus`]. On failure a message for the
//! calling thread is available from [`admsim_last_error_message`]. Objects
//! created here are opaque handles released with their `_free` function.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the stated length. Handles
//! must come from this library and must not be used after being freed or
//! shared between threads without external locking. Null inputs are
//! reported as `NullPointer` rather than dereferenced.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use admsim::aer::{self, AerEvent, AerStream, RECORD_BYTES};
use admsim::encode::{adm_encode, threshold_encode, AdmConfig, AdmEncoder, ThresholdConfig};
use admsim::metrics::{energy_report, match_spike_trains, pearson, EnergyModel};
use admsim::signal::SampledSignal;
use admsim::{Error, Polarity, SpikeEvent, SpikeTrain};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Format = 4,
    Domain = 5,
    Numerical = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Polarity codes used across the interface.
pub const ADMSIM_OFF: i32 = 0;
pub const ADMSIM_ON: i32 = 1;
/// Returned by `admsim_encoder_step` when no event fires.
pub const ADMSIM_NO_EVENT: i32 = -1;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: AdmsimStatus, msg: impl Into<String>) -> AdmsimStatus {
    set_error(msg.into());
    status
}

fn from_error(err: Error) -> AdmsimStatus {
    let status = match &err {
        Error::Parse { .. } => AdmsimStatus::Parse,
        Error::Validation(_) | Error::Config(_) => AdmsimStatus::InvalidArgument,
        Error::Format(_) => AdmsimStatus::Format,
        Error::Domain(_) => AdmsimStatus::Domain,
        Error::Numerical(_) => AdmsimStatus::Numerical,
        Error::Io { .. } => AdmsimStatus::Io,
    };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), AdmsimStatus>) -> AdmsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            AdmsimStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(AdmsimStatus::Panic, "internal panic"),
    }
}

trait IntoStatus<T> {
    fn st(self) -> Result<T, AdmsimStatus>;
}

impl<T> IntoStatus<T> for admsim::Result<T> {
    fn st(self) -> Result<T, AdmsimStatus> {
        self.map_err(from_error)
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, AdmsimStatus> {
    p.as_ref()
        .ok_or_else(|| fail(AdmsimStatus::NullPointer, format!("{name} is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], AdmsimStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(AdmsimStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(p: *mut T, value: T, name: &str) -> Result<(), AdmsimStatus> {
    if p.is_null() {
        return Err(fail(AdmsimStatus::NullPointer, format!("{name} is null")));
    }
    p.write(value);
    Ok(())
}

fn polarity_from_code(code: i32) -> Result<Polarity, AdmsimStatus> {
    match code {
        ADMSIM_ON => Ok(Polarity::On),
        ADMSIM_OFF => Ok(Polarity::Off),
        other => Err(fail(AdmsimStatus::InvalidArgument, format!("bad polarity code {other}"))),
    }
}

fn polarity_code(p: Polarity) -> i32 {
    match p {
        Polarity::On => ADMSIM_ON,
        Polarity::Off => ADMSIM_OFF,
    }
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn admsim_last_error_message(buf: *mut c_char, buf_len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && buf_len > 0 {
            let n = msg.len().min(buf_len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Delta modulator parameters, mirroring the library's configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdmsimAdmConfig {
    pub delta_on_v: f64,
    pub delta_off_v: f64,
    pub gain_a: f64,
    pub reset_delay_us: u64,
    pub refractory_us: u64,
    pub v_ref: f64,
}

impl From<AdmConfig> for AdmsimAdmConfig {
    fn from(c: AdmConfig) -> Self {
        Self {
            delta_on_v: c.delta_on_v,
            delta_off_v: c.delta_off_v,
            gain_a: c.gain_a,
            reset_delay_us: c.reset_delay_us,
            refractory_us: c.refractory_us,
            v_ref: c.v_ref,
        }
    }
}

impl From<AdmsimAdmConfig> for AdmConfig {
    fn from(c: AdmsimAdmConfig) -> Self {
        Self {
            delta_on_v: c.delta_on_v,
            delta_off_v: c.delta_off_v,
            gain_a: c.gain_a,
            reset_delay_us: c.reset_delay_us,
            refractory_us: c.refractory_us,
            v_ref: c.v_ref,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdmsimMatchReport {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdmsimEnergyModel {
    pub energy_per_spike_j: f64,
    pub dynamic_power_w: f64,
    pub supply_v: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdmsimEnergyReport {
    pub dynamic_energy_j: f64,
    pub avg_power_w: f64,
}

/// Streaming delta modulator handle.
pub struct AdmsimEncoder(AdmEncoder);

/// Spike train handle.
pub struct AdmsimSpikeTrain(SpikeTrain);

#[no_mangle]
pub unsafe extern "C" fn admsim_adm_config_default(out: *mut AdmsimAdmConfig) -> AdmsimStatus {
    guard(|| write_out(out, AdmConfig::default().into(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn admsim_encoder_new(
    config: *const AdmsimAdmConfig,
    out: *mut *mut AdmsimEncoder,
) -> AdmsimStatus {
    guard(|| {
        let cfg = ref_arg(config, "config")?;
        if out.is_null() {
            return Err(fail(AdmsimStatus::NullPointer, "out is null"));
        }
        let enc = AdmEncoder::new((*cfg).into()).st()?;
        out.write(Box::into_raw(Box::new(AdmsimEncoder(enc))));
        Ok(())
    })
}

/// Feeds one sample. `out_polarity` receives `ADMSIM_ON`, `ADMSIM_OFF` or
/// `ADMSIM_NO_EVENT`. Samples must arrive in time order.
#[no_mangle]
pub unsafe extern "C" fn admsim_encoder_step(
    encoder: *mut AdmsimEncoder,
    t_us: u64,
    x: f64,
    out_polarity: *mut i32,
) -> AdmsimStatus {
    guard(|| {
        let enc = encoder
            .as_mut()
            .ok_or_else(|| fail(AdmsimStatus::NullPointer, "encoder is null"))?;
        if !x.is_finite() {
            return Err(fail(AdmsimStatus::InvalidArgument, "sample is not finite"));
        }
        let code = enc.0.step(t_us, x).map_or(ADMSIM_NO_EVENT, polarity_code);
        write_out(out_polarity, code, "out_polarity")
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_encoder_reset(encoder: *mut AdmsimEncoder) -> AdmsimStatus {
    guard(|| {
        let enc = encoder
            .as_mut()
            .ok_or_else(|| fail(AdmsimStatus::NullPointer, "encoder is null"))?;
        enc.0.reset();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_encoder_free(encoder: *mut AdmsimEncoder) {
    if !encoder.is_null() {
        drop(Box::from_raw(encoder));
    }
}

unsafe fn signal_arg(samples: *const f64, len: usize, sample_rate_hz: f64) -> Result<SampledSignal, AdmsimStatus> {
    let xs = slice_arg(samples, len, "samples")?;
    SampledSignal::new(xs.to_vec(), sample_rate_hz, 0).st()
}

unsafe fn emit_train(out: *mut *mut AdmsimSpikeTrain, train: SpikeTrain) -> Result<(), AdmsimStatus> {
    write_out(out, Box::into_raw(Box::new(AdmsimSpikeTrain(train))), "out")
}

/// Behavioral delta modulation of a whole sample buffer starting at t = 0.
#[no_mangle]
pub unsafe extern "C" fn admsim_adm_encode(
    samples: *const f64,
    len: usize,
    sample_rate_hz: f64,
    config: *const AdmsimAdmConfig,
    out: *mut *mut AdmsimSpikeTrain,
) -> AdmsimStatus {
    guard(|| {
        let cfg: AdmConfig = (*ref_arg(config, "config")?).into();
        let signal = signal_arg(samples, len, sample_rate_hz)?;
        emit_train(out, adm_encode(&signal, &cfg).st()?)
    })
}

/// Threshold detector. `absolute` selects a fixed level in volts; otherwise
/// `k_or_level` multiplies the buffer's rms.
#[no_mangle]
pub unsafe extern "C" fn admsim_threshold_encode(
    samples: *const f64,
    len: usize,
    sample_rate_hz: f64,
    absolute: bool,
    k_or_level: f64,
    refractory_us: u64,
    out: *mut *mut AdmsimSpikeTrain,
) -> AdmsimStatus {
    guard(|| {
        let cfg = if absolute {
            ThresholdConfig::absolute(k_or_level)
        } else {
            ThresholdConfig::rms(k_or_level)
        }
        .with_refractory(refractory_us);
        let signal = signal_arg(samples, len, sample_rate_hz)?;
        emit_train(out, threshold_encode(&signal, &cfg).st()?)
    })
}

/// Builds a train from parallel timestamp and polarity arrays.
#[no_mangle]
pub unsafe extern "C" fn admsim_train_new(
    timestamps_us: *const u64,
    polarities: *const i32,
    len: usize,
    duration_us: u64,
    out: *mut *mut AdmsimSpikeTrain,
) -> AdmsimStatus {
    guard(|| {
        let ts = slice_arg(timestamps_us, len, "timestamps_us")?;
        let ps = slice_arg(polarities, len, "polarities")?;
        let events = ts
            .iter()
            .zip(ps)
            .map(|(&t, &p)| Ok(SpikeEvent::new(t, polarity_from_code(p)?)))
            .collect::<Result<Vec<_>, AdmsimStatus>>()?;
        emit_train(out, SpikeTrain::new(events, duration_us).st()?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_train_len(train: *const AdmsimSpikeTrain, out_len: *mut usize) -> AdmsimStatus {
    guard(|| {
        let t = ref_arg(train, "train")?;
        write_out(out_len, t.0.len(), "out_len")
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_train_duration(
    train: *const AdmsimSpikeTrain,
    out_duration_us: *mut u64,
) -> AdmsimStatus {
    guard(|| {
        let t = ref_arg(train, "train")?;
        write_out(out_duration_us, t.0.duration_us(), "out_duration_us")
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_train_get(
    train: *const AdmsimSpikeTrain,
    index: usize,
    out_timestamp_us: *mut u64,
    out_polarity: *mut i32,
) -> AdmsimStatus {
    guard(|| {
        let t = ref_arg(train, "train")?;
        let e = t
            .0
            .events()
            .get(index)
            .ok_or_else(|| fail(AdmsimStatus::InvalidArgument, format!("index {index} out of range")))?;
        write_out(out_timestamp_us, e.timestamp_us, "out_timestamp_us")?;
        write_out(out_polarity, polarity_code(e.polarity), "out_polarity")
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_train_free(train: *mut AdmsimSpikeTrain) {
    if !train.is_null() {
        drop(Box::from_raw(train));
    }
}

/// Tolerance-windowed matching, per polarity.
#[no_mangle]
pub unsafe extern "C" fn admsim_match(
    reference: *const AdmsimSpikeTrain,
    candidate: *const AdmsimSpikeTrain,
    tolerance_us: u64,
    out: *mut AdmsimMatchReport,
) -> AdmsimStatus {
    guard(|| {
        let r = ref_arg(reference, "reference")?;
        let c = ref_arg(candidate, "candidate")?;
        let m = match_spike_trains(&r.0, &c.0, tolerance_us).st()?;
        write_out(
            out,
            AdmsimMatchReport {
                tp: m.tp as u64,
                fp: m.fp as u64,
                fn_: m.fn_ as u64,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
            },
            "out",
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_energy_model_default(out: *mut AdmsimEnergyModel) -> AdmsimStatus {
    guard(|| {
        let m = EnergyModel::default();
        write_out(
            out,
            AdmsimEnergyModel {
                energy_per_spike_j: m.energy_per_spike_j,
                dynamic_power_w: m.dynamic_power_w,
                supply_v: m.supply_v,
            },
            "out",
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_energy(
    train: *const AdmsimSpikeTrain,
    model: *const AdmsimEnergyModel,
    out: *mut AdmsimEnergyReport,
) -> AdmsimStatus {
    guard(|| {
        let t = ref_arg(train, "train")?;
        let m = ref_arg(model, "model")?;
        let model = EnergyModel {
            energy_per_spike_j: m.energy_per_spike_j,
            dynamic_power_w: m.dynamic_power_w,
            supply_v: m.supply_v,
        };
        model.validate().st()?;
        let r = energy_report(&t.0, &model).st()?;
        write_out(
            out,
            AdmsimEnergyReport {
                dynamic_energy_j: r.dynamic_energy_j,
                avg_power_w: r.avg_power_w,
            },
            "out",
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn admsim_pearson(x: *const f64, y: *const f64, len: usize, out: *mut f64) -> AdmsimStatus {
    guard(|| {
        let x = slice_arg(x, len, "x")?;
        let y = slice_arg(y, len, "y")?;
        write_out(out, pearson(x, y).st()?, "out")
    })
}

/// Encodes parallel event arrays as 8-byte AER records into `buf`.
/// `out_written` receives the byte count; when `buf_len` is too small it
/// receives the required size and `BufferTooSmall` is returned.
#[no_mangle]
pub unsafe extern "C" fn admsim_aer_serialize(
    timestamps_us: *const u64,
    channels: *const u16,
    polarities: *const i32,
    len: usize,
    buf: *mut u8,
    buf_len: usize,
    out_written: *mut usize,
) -> AdmsimStatus {
    guard(|| {
        let ts = slice_arg(timestamps_us, len, "timestamps_us")?;
        let chs = slice_arg(channels, len, "channels")?;
        let ps = slice_arg(polarities, len, "polarities")?;
        let mut events = Vec::with_capacity(len);
        for i in 0..len {
            events.push(AerEvent::new(ts[i], chs[i], polarity_from_code(ps[i])?).st()?);
        }
        let bytes = aer::serialize(&AerStream::new(events).st()?);
        write_out(out_written, bytes.len(), "out_written")?;
        if buf_len < bytes.len() {
            return Err(fail(
                AdmsimStatus::BufferTooSmall,
                format!("need {} bytes, have {buf_len}", bytes.len()),
            ));
        }
        if !bytes.is_empty() {
            if buf.is_null() {
                return Err(fail(AdmsimStatus::NullPointer, "buf is null"));
            }
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        }
        Ok(())
    })
}

/// Decodes AER records into caller arrays with room for `capacity` events.
/// `out_len` receives the event count, also when the arrays are too small.
#[no_mangle]
pub unsafe extern "C" fn admsim_aer_deserialize(
    bytes: *const u8,
    bytes_len: usize,
    timestamps_us: *mut u64,
    channels: *mut u16,
    polarities: *mut i32,
    capacity: usize,
    out_len: *mut usize,
) -> AdmsimStatus {
    guard(|| {
        let raw = slice_arg(bytes, bytes_len, "bytes")?;
        let stream = aer::deserialize(raw).st()?;
        write_out(out_len, stream.len(), "out_len")?;
        if capacity < stream.len() {
            return Err(fail(
                AdmsimStatus::BufferTooSmall,
                format!("need room for {} events, have {capacity}", stream.len()),
            ));
        }
        if stream.is_empty() {
            return Ok(());
        }
        if timestamps_us.is_null() || channels.is_null() || polarities.is_null() {
            return Err(fail(AdmsimStatus::NullPointer, "output array is null"));
        }
        for (i, e) in stream.events().iter().enumerate() {
            *timestamps_us.add(i) = e.timestamp_us();
            *channels.add(i) = e.channel();
            *polarities.add(i) = polarity_code(e.polarity());
        }
        Ok(())
    })
}

/// Size in bytes of one AER record.
#[no_mangle]
pub extern "C" fn admsim_aer_record_bytes() -> usize {
    RECORD_BYTES
}
