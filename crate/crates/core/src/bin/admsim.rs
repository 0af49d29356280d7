use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use admsim::aer::{self, AerStream};
use admsim::config::{parse_config_file, EncoderKind, ExperimentConfig};
use admsim::decode::{self, EncoderDecodeReport, KinematicsSeries};
use admsim::encode::{adm_circuit_encode, sweep_snr};
use admsim::metrics::{energy_report, match_spike_trains, spike_rate};
use admsim::signal::{bandpass_front_end, inject_awgn, load_signal, signal_to_csv, SampledSignal, SignalFormat};
use admsim::synth::{decoding_scenario, DecodingScenarioConfig};
use admsim::{Error, Polarity, Result, SpikeTrain};

#[derive(Parser)]
#[command(name = "admsim", version, about = "Delta-modulation spike encoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a signal file into a spike train CSV.
    Encode(EncodeArgs),
    /// Score encoders on noisy copies of a signal against their clean output.
    SweepSnr(SweepArgs),
    /// Compare two spike train CSV files.
    Compare(CompareArgs),
    /// Merge per-channel spike trains into an `.aer` file.
    AerPack(AerPackArgs),
    /// Split an `.aer` file back into per-channel spike trains.
    AerUnpack(AerUnpackArgs),
    /// Decode kinematics from spikes and report Pearson correlations.
    Decode(DecodeArgs),
}

/// Flags shared by every command. Each maps onto a config key.
#[derive(Args, Default)]
struct Common {
    /// Plain-text `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Matching window, e.g. 500us.
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    energy_per_spike: Option<String>,
    #[arg(long)]
    dynamic_power: Option<String>,
    #[arg(long)]
    supply_v: Option<String>,
}

#[derive(Args, Default)]
struct EncoderFlags {
    /// adm, adm-circuit, rms or abs.
    #[arg(long)]
    encoder: Option<String>,
    /// Symmetric delta threshold, e.g. 1mV.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    delta_on: Option<String>,
    #[arg(long)]
    delta_off: Option<String>,
    #[arg(long)]
    gain: Option<String>,
    #[arg(long)]
    reset_delay: Option<String>,
    #[arg(long)]
    refractory: Option<String>,
    #[arg(long)]
    v_ref: Option<String>,
    /// Multiplier of the signal rms for the rms detector.
    #[arg(long)]
    rms_k: Option<String>,
    /// Level of the absolute detector, e.g. 110mV.
    #[arg(long)]
    abs_level: Option<String>,
    /// Dead time of the threshold detectors.
    #[arg(long)]
    threshold_refractory: Option<String>,
}

#[derive(Args, Default)]
struct InputFlags {
    /// Signal file.
    #[arg(long = "in")]
    input: Option<String>,
    /// csv or raw (little-endian f32).
    #[arg(long)]
    format: Option<String>,
    /// Sample rate for raw or single-column files, e.g. 30kHz.
    #[arg(long)]
    sample_rate: Option<String>,
    /// Apply the band-pass front end before encoding.
    #[arg(long)]
    front_end: bool,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    encoder: EncoderFlags,
    #[command(flatten)]
    input: InputFlags,
    /// Output spike train CSV.
    #[arg(long)]
    out: Option<String>,
    /// Amplifier output trace CSV (adm-circuit only).
    #[arg(long)]
    vout: Option<String>,
    /// Add white noise at this multiple of median |x| before encoding.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    encoder: EncoderFlags,
    #[command(flatten)]
    input: InputFlags,
    /// Comma-separated noise multipliers.
    #[arg(long)]
    multipliers: Option<String>,
    /// Comma-separated encoder list.
    #[arg(long)]
    encoders: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    candidate: PathBuf,
}

#[derive(Args)]
struct AerPackArgs {
    #[command(flatten)]
    common: Common,
    /// Spike train CSV files; channel ids follow argument order unless
    /// given as `CH=PATH`.
    #[arg(required = true)]
    trains: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    /// Arbiter service time; events are re-timestamped at egress when > 0.
    #[arg(long)]
    service_time: Option<String>,
    /// Recorded span, e.g. 2s; defaults to one past the last event.
    #[arg(long)]
    duration: Option<String>,
    /// Sample rate recorded in the metadata file.
    #[arg(long)]
    sample_rate: Option<String>,
}

#[derive(Args)]
struct AerUnpackArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Directory receiving one `ch<N>.csv` per channel.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    encoder: EncoderFlags,
    /// Generate a tuned population and encode it with every selected encoder.
    #[arg(long, conflicts_with_all = ["aer", "kinematics"])]
    synthetic: bool,
    /// Synthetic recording length in seconds.
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
    /// Synthetic channel count.
    #[arg(long, default_value_t = 32)]
    channels: usize,
    /// Event stream to decode.
    #[arg(long, requires = "kinematics")]
    aer: Option<PathBuf>,
    /// Kinematics CSV (`time_s,vx,vy`).
    #[arg(long)]
    kinematics: Option<PathBuf>,
    #[arg(long)]
    encoders: Option<String>,
    #[arg(long)]
    bin_width: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    /// Ridge penalty, or `auto` to pick from the default grid.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    train_fraction: Option<String>,
    /// JSON report; stdout when absent.
    #[arg(long)]
    out: Option<String>,
}

fn push(map: &mut BTreeMap<String, String>, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        map.insert(key.to_string(), v.clone());
    }
}

impl Common {
    fn flags(&self, map: &mut BTreeMap<String, String>) -> Result<()> {
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            map.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        push(map, "seed", &self.seed);
        push(map, "tolerance", &self.tolerance);
        push(map, "energy_per_spike", &self.energy_per_spike);
        push(map, "dynamic_power", &self.dynamic_power);
        push(map, "supply_v", &self.supply_v);
        Ok(())
    }

    /// Defaults, then the config file, then `flags`.
    fn resolve(&self, mut flags: BTreeMap<String, String>) -> Result<ExperimentConfig> {
        self.flags(&mut flags)?;
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply(&parse_config_file(&text)?)?;
        }
        cfg.apply(&flags)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl EncoderFlags {
    fn flags(&self, map: &mut BTreeMap<String, String>) {
        push(map, "encoder", &self.encoder);
        push(map, "delta", &self.delta);
        push(map, "delta_on", &self.delta_on);
        push(map, "delta_off", &self.delta_off);
        push(map, "gain", &self.gain);
        push(map, "reset_delay", &self.reset_delay);
        push(map, "refractory", &self.refractory);
        push(map, "v_ref", &self.v_ref);
        push(map, "rms_k", &self.rms_k);
        push(map, "abs_level", &self.abs_level);
        push(map, "threshold_refractory", &self.threshold_refractory);
    }
}

impl InputFlags {
    fn flags(&self, map: &mut BTreeMap<String, String>) {
        push(map, "input", &self.input);
        push(map, "format", &self.format);
        push(map, "sample_rate", &self.sample_rate);
        if self.front_end {
            map.insert("front_end".into(), "true".into());
        }
    }
}

fn format_name(format: SignalFormat) -> &'static str {
    match format {
        SignalFormat::Csv => "csv",
        SignalFormat::RawF32Le => "raw_f32_le",
    }
}

fn load_input(cfg: &ExperimentConfig) -> Result<SampledSignal> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("an input signal is required (--in)".into()))?;
    let signal = load_signal(path, cfg.format, cfg.sample_rate_hz)?;
    if cfg.front_end {
        bandpass_front_end(&signal, &cfg.front_end_config)
    } else {
        Ok(signal)
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_encode(args: &EncodeArgs) -> Result<()> {
    let mut flags = BTreeMap::new();
    args.encoder.flags(&mut flags);
    args.input.flags(&mut flags);
    push(&mut flags, "output", &args.out);
    push(&mut flags, "vout", &args.vout);
    let cfg = args.common.resolve(flags)?;
    if !(args.noise.is_finite() && args.noise >= 0.0) {
        return Err(Error::Config("noise multiplier must be >= 0".into()));
    }
    if cfg.vout.is_some() && cfg.encoder != EncoderKind::AdmCircuit {
        return Err(Error::Config("an output trace needs --encoder adm-circuit".into()));
    }
    let encoder = cfg.build_encoder(cfg.encoder)?;

    let mut signal = load_input(&cfg)?;
    if args.noise > 0.0 {
        signal = inject_awgn(&signal, args.noise, cfg.seed)?.signal;
    }
    let (train, trace) = if cfg.encoder == EncoderKind::AdmCircuit {
        let (train, trace) = adm_circuit_encode(&signal, &cfg.adm)?;
        (train, Some(trace))
    } else {
        (encoder.encode(&signal)?, None)
    };
    let rate = spike_rate(&train)?;
    let energy = energy_report(&train, &cfg.energy)?;

    let mut report = String::new();
    writeln!(report, "# admsim encode").unwrap();
    writeln!(report, "# {}", cfg.describe_encoder(cfg.encoder)).unwrap();
    writeln!(
        report,
        "# samples={} sample_rate_hz={} format={} front_end={} noise_multiplier={} seed={}",
        signal.len(),
        signal.sample_rate_hz(),
        format_name(cfg.format),
        cfg.front_end,
        args.noise,
        cfg.seed
    )
    .unwrap();
    writeln!(report, "events={}", train.len()).unwrap();
    writeln!(report, "on={}", train.count(Polarity::On)).unwrap();
    writeln!(report, "off={}", train.count(Polarity::Off)).unwrap();
    writeln!(report, "rate_hz={rate}").unwrap();
    writeln!(report, "dynamic_energy_j={}", energy.dynamic_energy_j).unwrap();
    writeln!(report, "avg_power_w={}", energy.avg_power_w).unwrap();

    if let Some(path) = &cfg.output {
        write_file(path, train.to_csv())?;
    }
    if let (Some(path), Some(trace)) = (&cfg.vout, &trace) {
        write_file(path, signal_to_csv(trace))?;
    }
    print!("{report}");
    Ok(())
}

fn fmt_snr(snr_db: f64) -> String {
    if snr_db.is_infinite() {
        "inf".into()
    } else {
        format!("{snr_db:.4}")
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut flags = BTreeMap::new();
    args.encoder.flags(&mut flags);
    args.input.flags(&mut flags);
    push(&mut flags, "multipliers", &args.multipliers);
    push(&mut flags, "encoders", &args.encoders);
    push(&mut flags, "output", &args.out);
    let cfg = args.common.resolve(flags)?;
    let encoders = cfg
        .encoders
        .iter()
        .map(|&k| cfg.build_encoder(k))
        .collect::<Result<Vec<_>>>()?;
    let signal = load_input(&cfg)?;

    let mut csv = String::from("multiplier,snr_db,encoder,precision,recall,f1\n");
    for encoder in &encoders {
        let sweep = sweep_snr(&signal, encoder, &cfg.multipliers, cfg.seed)?;
        for level in &sweep.levels {
            let r = match_spike_trains(&sweep.reference, &level.train, cfg.tolerance_us)?;
            writeln!(
                csv,
                "{},{},{},{:.6},{:.6},{:.6}",
                level.multiplier,
                fmt_snr(level.snr_db),
                encoder.name(),
                r.precision,
                r.recall,
                r.f1
            )
            .unwrap();
        }
    }
    emit(cfg.output.as_deref(), &csv)
}

fn read_train(path: &Path, duration_us: Option<u64>) -> Result<SpikeTrain> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SpikeTrain::from_csv(&text, duration_us)
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let cfg = args.common.resolve(BTreeMap::new())?;
    let reference = read_train(&args.reference, None)?;
    let candidate = read_train(&args.candidate, None)?;
    let report = match_spike_trains(&reference, &candidate, cfg.tolerance_us)?;
    println!("{}", report.to_json());
    Ok(())
}

fn parse_channel_arg(idx: usize, arg: &str) -> Result<(u16, PathBuf)> {
    match arg.split_once('=') {
        Some((ch, path)) if !ch.is_empty() && ch.chars().all(|c| c.is_ascii_digit()) => {
            let ch = ch
                .parse::<u16>()
                .ok()
                .filter(|&c| c <= aer::MAX_CHANNEL)
                .ok_or_else(|| Error::Config(format!("channel id '{ch}' out of range")))?;
            Ok((ch, PathBuf::from(path)))
        }
        _ => {
            let ch = u16::try_from(idx)
                .ok()
                .filter(|&c| c <= aer::MAX_CHANNEL)
                .ok_or_else(|| Error::Config("too many channels".into()))?;
            Ok((ch, PathBuf::from(arg)))
        }
    }
}

fn cmd_aer_pack(args: &AerPackArgs) -> Result<()> {
    let mut flags = BTreeMap::new();
    push(&mut flags, "service_time", &args.service_time);
    push(&mut flags, "sample_rate", &args.sample_rate);
    let cfg = args.common.resolve(flags)?;
    let duration_us = args
        .duration
        .as_deref()
        .map(admsim::config::parse_time_us)
        .transpose()?;

    let channels = args
        .trains
        .iter()
        .enumerate()
        .map(|(i, a)| parse_channel_arg(i, a))
        .collect::<Result<Vec<_>>>()?;
    let mut trains = Vec::with_capacity(channels.len());
    for (ch, path) in &channels {
        trains.push((*ch, read_train(path, duration_us)?));
    }
    let span_us = trains.iter().map(|(_, t)| t.duration_us()).max().unwrap_or(0);
    let stream = aer::merge_channels(trains.iter().map(|(c, t)| (*c, t)))?;
    let arbiter = aer::arbiter_simulate(&stream, cfg.service_time_us)?;
    let out_stream = if cfg.service_time_us > 0 { &arbiter.egress } else { &stream };
    // arbitration can push the last event past the recorded span
    let span_us = span_us.max(out_stream.events().last().map_or(0, |e| e.timestamp_us() + 1));

    let mut meta = BTreeMap::new();
    meta.insert("record_bytes".to_string(), aer::RECORD_BYTES.to_string());
    meta.insert("events".to_string(), out_stream.len().to_string());
    meta.insert(
        "channels".to_string(),
        channels.iter().map(|(c, _)| c.to_string()).collect::<Vec<_>>().join(","),
    );
    meta.insert("span_us".to_string(), span_us.to_string());
    meta.insert("sample_rate_hz".to_string(), cfg.sample_rate_hz.to_string());
    meta.insert("service_time_us".to_string(), cfg.service_time_us.to_string());
    meta.insert("max_latency_us".to_string(), arbiter.max_latency_us.to_string());
    meta.insert("timestamps".to_string(), if cfg.service_time_us > 0 { "egress" } else { "encoder" }.to_string());

    aer::write_aer_file(&args.out, out_stream)?;
    write_file(&aer::sidecar_path(&args.out), aer::sidecar_to_string(&meta))?;
    println!(
        "events={} channels={} max_latency_us={} mean_latency_us={}",
        out_stream.len(),
        channels.len(),
        arbiter.max_latency_us,
        arbiter.mean_latency_us
    );
    Ok(())
}

fn read_sidecar(aer_path: &Path) -> Result<BTreeMap<String, String>> {
    let path = aer::sidecar_path(aer_path);
    match fs::read_to_string(&path) {
        Ok(text) => aer::parse_sidecar(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeMap::new()),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn stream_span(stream: &AerStream, meta: &BTreeMap<String, String>) -> Result<u64> {
    match meta.get("span_us") {
        Some(v) => v
            .parse()
            .map_err(|_| Error::Format(format!("bad span_us '{v}' in metadata"))),
        None => Ok(stream.events().last().map_or(0, |e| e.timestamp_us() + 1)),
    }
}

fn cmd_aer_unpack(args: &AerUnpackArgs) -> Result<()> {
    let stream = aer::read_aer_file(&args.input)?;
    let meta = read_sidecar(&args.input)?;
    let span = stream_span(&stream, &meta)?;
    let mut outputs = Vec::new();
    for ch in stream.channels() {
        outputs.push((args.out_dir.join(format!("ch{ch}.csv")), stream.channel_train(ch, span)?));
    }
    if !args.out_dir.is_dir() {
        fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    }
    for (path, train) in &outputs {
        write_file(path, train.to_csv())?;
    }
    println!("events={} channels={}", stream.len(), outputs.len());
    Ok(())
}

fn cmd_decode(args: &DecodeArgs) -> Result<()> {
    let mut flags = BTreeMap::new();
    args.encoder.flags(&mut flags);
    push(&mut flags, "encoders", &args.encoders);
    push(&mut flags, "bin_width", &args.bin_width);
    push(&mut flags, "tau", &args.tau);
    push(&mut flags, "lambda", &args.lambda);
    push(&mut flags, "train_fraction", &args.train_fraction);
    push(&mut flags, "output", &args.out);
    let cfg = args.common.resolve(flags)?;

    let reports: Vec<EncoderDecodeReport> = if args.synthetic {
        if !(args.duration.is_finite() && args.duration > 0.0) || args.channels == 0 {
            return Err(Error::Config("synthetic run needs a positive duration and channel count".into()));
        }
        let encoders = cfg
            .encoders
            .iter()
            .map(|&k| cfg.build_encoder(k))
            .collect::<Result<Vec<_>>>()?;
        let scenario = decoding_scenario(&DecodingScenarioConfig {
            duration_s: args.duration,
            n_channels: args.channels,
            seed: cfg.seed,
            ..Default::default()
        })?;
        decode::compare_encoders(
            &scenario.signals,
            &scenario.kinematics,
            scenario.span_us,
            &encoders,
            &cfg.decode,
            &cfg.energy,
        )?
    } else {
        let (Some(aer_path), Some(kin_path)) = (&args.aer, &args.kinematics) else {
            return Err(Error::Config("decode needs --synthetic or --aer with --kinematics".into()));
        };
        let stream = aer::read_aer_file(aer_path)?;
        let meta = read_sidecar(aer_path)?;
        let kinematics = KinematicsSeries::load(kin_path)?;
        let span = stream_span(&stream, &meta)?;
        let n_channels = stream.channels().last().map_or(1, |&c| c as usize + 1);
        let counts = decode::bin_stream(&stream, n_channels, cfg.decode.bin_width_us, span)?;
        let features = decode::leaky_features(&counts, cfg.decode.tau_us)?;
        let targets = kinematics.resample_to_bins(cfg.decode.bin_width_us, counts.n_bins());
        let outcome = decode::fit_and_evaluate(&features, &targets, &cfg.decode)?;
        vec![EncoderDecodeReport::new("aer", &outcome, stream.len(), &cfg.energy)]
    };

    let json = serde_json::json!({
        "bin_width_us": cfg.decode.bin_width_us,
        "tau_us": cfg.decode.tau_us,
        "train_fraction": cfg.decode.train_fraction,
        "seed": cfg.seed,
        "encoders": reports,
    });
    let mut text = serde_json::to_string_pretty(&json).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    emit(cfg.output.as_deref(), &text)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::SweepSnr(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::AerPack(a) => cmd_aer_pack(a),
        Command::AerUnpack(a) => cmd_aer_unpack(a),
        Command::Decode(a) => cmd_decode(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
