use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use admsim::aer;
use admsim::SpikeTrain;

fn admsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_admsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run admsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_constant(dir: &Path) {
    let mut csv = String::from("value_v\n");
    for _ in 0..3000 {
        csv.push_str("0.25\n");
    }
    fs::write(dir.join("flat.csv"), csv).unwrap();
}

fn write_sine(dir: &Path) {
    let mut csv = String::from("time_s,value_v\n");
    for i in 0..6000 {
        let t = i as f64 / 30_000.0;
        csv.push_str(&format!("{t:.9},{:.6}\n", 0.05 * (2.0 * std::f64::consts::PI * 40.0 * t).sin()));
    }
    fs::write(dir.join("sine.csv"), csv).unwrap();
}

#[test]
fn constant_signal_gives_no_events() {
    let dir = tempfile::tempdir().unwrap();
    write_constant(dir.path());
    let o = admsim(dir.path(), &["encode", "--in", "flat.csv", "--encoder", "adm", "--delta", "1mV", "--out", "t.csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\nevents=0\n"));
    assert_eq!(fs::read_to_string(dir.path().join("t.csv")).unwrap(), "timestamp_us,polarity\n");
}

#[test]
fn encode_echoes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    write_sine(dir.path());
    let o = admsim(
        dir.path(),
        &["encode", "--in", "sine.csv", "--encoder", "adm", "--refractory", "1ms", "--reset-delay", "0.1ms"],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# admsim encode\n"));
    assert!(text.contains("reset_delay_us=100 refractory_us=1000"), "{text}");
    assert!(text.contains("rate_hz="));
    assert!(text.contains("dynamic_energy_j="));
}

#[test]
fn sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_sine(dir.path());
    let o = admsim(dir.path(), &["sweep-snr", "--in", "sine.csv", "--delta", "5mV", "--multipliers", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(row.ends_with(",1.000000,1.000000,1.000000"), "{row}");
    }

    let o = admsim(
        dir.path(),
        &["sweep-snr", "--in", "sine.csv", "--encoders", "adm", "--multipliers", "1,1.5,2,4"],
    );
    let text = stdout(&o);
    let snrs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(snrs.len(), 4);
    assert!(snrs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn compare_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("r.csv"), "timestamp_us,polarity\n1000,ON\n2000,ON\n3000,ON\n").unwrap();
    fs::write(d.join("c.csv"), "timestamp_us,polarity\n1200,ON\n2900,ON\n5000,ON\n").unwrap();
    fs::write(d.join("e.csv"), "timestamp_us,polarity\n").unwrap();
    let o = admsim(d, &["compare", "--reference", "r.csv", "--candidate", "c.csv", "--tolerance", "500us"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["tp"], 2);
    assert_eq!(v["fp"], 1);
    assert_eq!(v["fn"], 1);
    assert!((v["f1"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);

    let o = admsim(d, &["compare", "--reference", "r.csv", "--candidate", "r.csv"]);
    assert!(stdout(&o).contains("\"f1\":1.0"));
    let o = admsim(d, &["compare", "--reference", "e.csv", "--candidate", "r.csv"]);
    assert!(stdout(&o).contains("\"f1\":0.0"));
}

#[test]
fn aer_pack_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.csv"), "timestamp_us,polarity\n10,ON\n30,OFF\n").unwrap();
    let o = admsim(d, &["aer-pack", "a.csv", "--out", "one.aer", "--duration", "100us"]);
    assert!(o.status.success());
    assert_eq!(fs::read(d.join("one.aer")).unwrap().len(), 16);
    let meta = aer::parse_sidecar(&fs::read_to_string(d.join("one.aer.meta")).unwrap()).unwrap();
    assert_eq!(meta["span_us"], "100");
    assert_eq!(meta["record_bytes"], "8");

    let o = admsim(d, &["aer-unpack", "--in", "one.aer", "--out-dir", "out"]);
    assert!(o.status.success());
    let back = fs::read_to_string(d.join("out/ch0.csv")).unwrap();
    assert_eq!(back, fs::read_to_string(d.join("a.csv")).unwrap());
    assert_eq!(SpikeTrain::from_csv(&back, Some(100)).unwrap().len(), 2);
}

#[test]
fn decode_reports_every_encoder() {
    let dir = tempfile::tempdir().unwrap();
    let o = admsim(dir.path(), &["decode", "--synthetic", "--duration", "20", "--channels", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let encoders = v["encoders"].as_array().unwrap();
    let names: Vec<&str> = encoders.iter().map(|e| e["encoder"].as_str().unwrap()).collect();
    assert_eq!(names, ["adm", "rms", "abs"]);
    for e in encoders {
        assert!(e["rho_avg"].as_f64().unwrap() >= 0.9, "{e}");
        assert!(e["events"].as_u64().unwrap() > 0);
        assert!(e["energy_j"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn decode_from_aer_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // channel 0 fires when vx is high, channel 1 when it is low; vx is a
    // square wave, so the integration time constant is kept short
    let mut a = String::from("timestamp_us,polarity\n");
    let mut b = a.clone();
    let mut kin = String::from("time_s,vx,vy\n");
    for k in 0..400 {
        let t_us = k * 10_000;
        let vx = if (k / 25) % 2 == 0 { 1.0 } else { -1.0 };
        let vy = ((k as f64) * 0.05).sin();
        kin.push_str(&format!("{},{vx},{vy}\n", t_us as f64 * 1e-6));
        if vx > 0.0 {
            a.push_str(&format!("{},ON\n", t_us + 1000));
        } else {
            b.push_str(&format!("{},ON\n", t_us + 1000));
        }
        if vy > 0.0 {
            a.push_str(&format!("{},OFF\n", t_us + 2000));
        }
    }
    fs::write(d.join("a.csv"), a).unwrap();
    fs::write(d.join("b.csv"), b).unwrap();
    fs::write(d.join("kin.csv"), kin).unwrap();
    let o = admsim(d, &["aer-pack", "a.csv", "b.csv", "--duration", "4s", "--out", "s.aer"]);
    assert!(o.status.success());
    let o = admsim(d, &["decode", "--aer", "s.aer", "--kinematics", "kin.csv", "--tau", "20ms", "--out", "r.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(v["encoders"][0]["encoder"], "aer");
    assert!(v["encoders"][0]["rho_x"].as_f64().unwrap() > 0.8);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_sine(d);
    fs::write(d.join("run.conf"), "# experiment\ndelta = 20mV\nrefractory = 2ms\n").unwrap();
    let o = admsim(d, &["encode", "--in", "sine.csv", "--config", "run.conf"]);
    let text = stdout(&o);
    assert!(text.contains("delta_on_v=0.02"), "{text}");
    assert!(text.contains("refractory_us=2000"));
    let o = admsim(d, &["encode", "--in", "sine.csv", "--config", "run.conf", "--refractory", "500us"]);
    let text = stdout(&o);
    assert!(text.contains("delta_on_v=0.02"));
    assert!(text.contains("refractory_us=500"));

    fs::write(d.join("bad.conf"), "dleta = 1mV\n").unwrap();
    let o = admsim(d, &["encode", "--in", "sine.csv", "--config", "bad.conf"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown config key"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_sine(d);
    fs::write(d.join("nan.csv"), "value_v\n0.1\nnan\n").unwrap();
    fs::write(d.join("unsorted.csv"), "timestamp_us,polarity\n50,ON\n10,ON\n").unwrap();

    let code = |args: &[&str]| admsim(d, args).status.code();
    assert_eq!(code(&["encode", "--in", "missing.csv"]), Some(2));
    assert_eq!(code(&["encode", "--in", "nan.csv"]), Some(1));
    assert_eq!(code(&["encode", "--in", "sine.csv", "--delta=-1mV"]), Some(1));
    assert_eq!(code(&["encode", "--in", "sine.csv", "--nonsense"]), Some(1));
    assert_eq!(code(&["compare", "--reference", "unsorted.csv", "--candidate", "unsorted.csv"]), Some(1));
    // front end needs a sample rate above twice its upper corner
    fs::write(d.join("zero.csv"), "value_v\n0\n0\n0\n").unwrap();
    assert_eq!(code(&["encode", "--in", "zero.csv", "--front-end", "--sample-rate", "10kHz"]), Some(1));
    assert_eq!(code(&["encode", "--in", "zero.csv", "--encoder", "rms"]), Some(1));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn failed_runs_leave_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_sine(d);
    let o = admsim(d, &["encode", "--in", "sine.csv", "--encoder", "adm", "--vout", "v.csv", "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!d.join("t.csv").exists());
    assert!(!d.join("v.csv").exists());
}
