use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use admsim_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { admsim_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn default_config() -> AdmsimAdmConfig {
    let mut cfg = AdmsimAdmConfig {
        delta_on_v: 0.0,
        delta_off_v: 0.0,
        gain_a: 0.0,
        reset_delay_us: 0,
        refractory_us: 0,
        v_ref: 0.0,
    };
    assert_eq!(unsafe { admsim_adm_config_default(&mut cfg) }, AdmsimStatus::Ok);
    cfg
}

fn train(ts: &[u64], pols: &[i32], duration: u64) -> *mut AdmsimSpikeTrain {
    let mut out = ptr::null_mut();
    let st = unsafe { admsim_train_new(ts.as_ptr(), pols.as_ptr(), ts.len(), duration, &mut out) };
    assert_eq!(st, AdmsimStatus::Ok, "{}", last_error());
    out
}

#[test]
fn defaults_cross_the_boundary() {
    let cfg = default_config();
    assert_eq!(cfg.reset_delay_us, 100);
    assert_eq!(cfg.refractory_us, 1000);
    assert!((cfg.gain_a - 4.044).abs() < 1e-12);
}

#[test]
fn streaming_matches_batch() {
    let mut cfg = default_config();
    cfg.delta_on_v = 0.01;
    cfg.delta_off_v = 0.01;
    let xs: Vec<f64> = (0..3000)
        .map(|i| 0.05 * (2.0 * std::f64::consts::PI * 50.0 * i as f64 / 30_000.0).sin())
        .collect();

    let mut batch = ptr::null_mut();
    let st = unsafe { admsim_adm_encode(xs.as_ptr(), xs.len(), 30_000.0, &cfg, &mut batch) };
    assert_eq!(st, AdmsimStatus::Ok);
    let mut n = 0usize;
    unsafe { admsim_train_len(batch, &mut n) };
    assert!(n > 0);

    let mut enc = ptr::null_mut();
    assert_eq!(unsafe { admsim_encoder_new(&cfg, &mut enc) }, AdmsimStatus::Ok);
    let mut streamed = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let t = (i as f64 * 1e6 / 30_000.0).round() as u64;
        let mut p = 0;
        assert_eq!(unsafe { admsim_encoder_step(enc, t, x, &mut p) }, AdmsimStatus::Ok);
        if p != ADMSIM_NO_EVENT {
            streamed.push((t, p));
        }
    }
    let mut batched = Vec::new();
    for i in 0..n {
        let (mut t, mut p) = (0u64, 0i32);
        assert_eq!(unsafe { admsim_train_get(batch, i, &mut t, &mut p) }, AdmsimStatus::Ok);
        batched.push((t, p));
    }
    assert_eq!(streamed, batched);

    let (mut t, mut p) = (0u64, 0i32);
    assert_eq!(unsafe { admsim_train_get(batch, n, &mut t, &mut p) }, AdmsimStatus::InvalidArgument);
    unsafe {
        admsim_encoder_free(enc);
        admsim_train_free(batch);
    }
}

#[test]
fn errors_are_reported() {
    let mut cfg = default_config();
    cfg.delta_on_v = -1.0;
    let mut enc = ptr::null_mut();
    assert_eq!(unsafe { admsim_encoder_new(&cfg, &mut enc) }, AdmsimStatus::InvalidArgument);
    assert!(enc.is_null());
    assert!(last_error().contains("delta"), "{}", last_error());

    assert_eq!(unsafe { admsim_encoder_new(ptr::null(), &mut enc) }, AdmsimStatus::NullPointer);

    let mut out = ptr::null_mut();
    let ts = [5u64, 3];
    let ps = [ADMSIM_ON, ADMSIM_ON];
    let st = unsafe { admsim_train_new(ts.as_ptr(), ps.as_ptr(), 2, 10, &mut out) };
    assert_eq!(st, AdmsimStatus::InvalidArgument);
    let bad = [7];
    let st = unsafe { admsim_train_new(ts.as_ptr(), bad.as_ptr(), 1, 10, &mut out) };
    assert_eq!(st, AdmsimStatus::InvalidArgument);

    let zero = [0.0; 10];
    let st = unsafe { admsim_threshold_encode(zero.as_ptr(), 10, 30_000.0, false, -4.5, 0, &mut out) };
    assert_eq!(st, AdmsimStatus::InvalidArgument);

    let x = [1.0, 1.0, 1.0];
    let mut r = 0.0;
    assert_eq!(unsafe { admsim_pearson(x.as_ptr(), x.as_ptr(), 3, &mut r) }, AdmsimStatus::Domain);

    // a successful call clears the message
    assert_eq!(unsafe { admsim_pearson([1.0, 2.0].as_ptr(), [2.0, 4.0].as_ptr(), 2, &mut r) }, AdmsimStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn matching_worked_example() {
    let on = [ADMSIM_ON; 3];
    let r = train(&[1000, 2000, 3000], &on, 10_000);
    let c = train(&[1200, 2900, 5000], &on, 10_000);
    let mut rep = AdmsimMatchReport { tp: 0, fp: 0, fn_: 0, precision: 0.0, recall: 0.0, f1: 0.0 };
    assert_eq!(unsafe { admsim_match(r, c, 500, &mut rep) }, AdmsimStatus::Ok);
    assert_eq!((rep.tp, rep.fp, rep.fn_), (2, 1, 1));
    assert!((rep.f1 - 2.0 / 3.0).abs() < 1e-12);
    unsafe {
        admsim_train_free(r);
        admsim_train_free(c);
    }
}

#[test]
fn energy_and_pearson() {
    let ts: Vec<u64> = (0..200).map(|i| i * 5000).collect();
    let t = train(&ts, &vec![ADMSIM_ON; 200], 1_000_000);
    let mut model = AdmsimEnergyModel { energy_per_spike_j: 0.0, dynamic_power_w: 0.0, supply_v: 0.0 };
    unsafe { admsim_energy_model_default(&mut model) };
    let mut rep = AdmsimEnergyReport { dynamic_energy_j: 0.0, avg_power_w: 0.0 };
    assert_eq!(unsafe { admsim_energy(t, &model, &mut rep) }, AdmsimStatus::Ok);
    assert!((rep.avg_power_w - 12.14562e-6).abs() < 1e-11);
    unsafe { admsim_train_free(t) };

    let x = [1.0, 2.0, 3.0];
    let y = [1.0, 2.0, 4.0];
    let mut r = 0.0;
    assert_eq!(unsafe { admsim_pearson(x.as_ptr(), y.as_ptr(), 3, &mut r) }, AdmsimStatus::Ok);
    assert!((r - 9.0 / 84f64.sqrt()).abs() < 1e-12);
}

#[test]
fn aer_round_trip() {
    let ts = [1u64, 10, 10, 99];
    let chs = [2u16, 0, 3, 1];
    let ps = [ADMSIM_ON, ADMSIM_OFF, ADMSIM_ON, ADMSIM_OFF];
    let mut written = 0usize;
    let st = unsafe {
        admsim_aer_serialize(ts.as_ptr(), chs.as_ptr(), ps.as_ptr(), 4, ptr::null_mut(), 0, &mut written)
    };
    assert_eq!(st, AdmsimStatus::BufferTooSmall);
    assert_eq!(written, 4 * admsim_aer_record_bytes());

    let mut buf = vec![0u8; written];
    let st = unsafe {
        admsim_aer_serialize(ts.as_ptr(), chs.as_ptr(), ps.as_ptr(), 4, buf.as_mut_ptr(), buf.len(), &mut written)
    };
    assert_eq!(st, AdmsimStatus::Ok);
    assert_eq!(&buf[..8], &[0x01, 0, 0, 0, 0, 0, 0x05, 0]);

    let (mut ts2, mut chs2, mut ps2) = ([0u64; 4], [0u16; 4], [0i32; 4]);
    let mut n = 0usize;
    let st = unsafe {
        admsim_aer_deserialize(buf.as_ptr(), buf.len(), ts2.as_mut_ptr(), chs2.as_mut_ptr(), ps2.as_mut_ptr(), 4, &mut n)
    };
    assert_eq!(st, AdmsimStatus::Ok);
    assert_eq!((n, ts2, chs2, ps2), (4, ts, chs, ps));

    let st = unsafe {
        admsim_aer_deserialize(buf.as_ptr(), 7, ts2.as_mut_ptr(), chs2.as_mut_ptr(), ps2.as_mut_ptr(), 4, &mut n)
    };
    assert_eq!(st, AdmsimStatus::Format);

    let unsorted = [99u64, 1];
    let st = unsafe {
        admsim_aer_serialize(unsorted.as_ptr(), chs.as_ptr(), ps.as_ptr(), 2, buf.as_mut_ptr(), buf.len(), &mut written)
    };
    assert_eq!(st, AdmsimStatus::InvalidArgument);
}

fn header_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("admsim.h")
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(header_path()).expect("generated header");
    for name in [
        "typedef struct AdmsimEncoder AdmsimEncoder;",
        "typedef struct AdmsimSpikeTrain AdmsimSpikeTrain;",
        "ADMSIM_STATUS_OK = 0",
        "admsim_last_error_message",
        "admsim_encoder_new",
        "admsim_encoder_step",
        "admsim_adm_encode",
        "admsim_threshold_encode",
        "admsim_match",
        "admsim_energy",
        "admsim_pearson",
        "admsim_aer_serialize",
        "admsim_aer_deserialize",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "admsim.h"

int main(void) {
    AdmsimAdmConfig cfg;
    if (admsim_adm_config_default(&cfg) != ADMSIM_STATUS_OK) return 1;
    cfg.delta_on_v = 0.001;
    cfg.delta_off_v = 0.001;
    cfg.reset_delay_us = 0;
    cfg.refractory_us = 0;
    double xs[3000];
    for (int i = 0; i < 3000; i++) xs[i] = i / 30000.0;
    AdmsimSpikeTrain *train = NULL;
    if (admsim_adm_encode(xs, 3000, 30000.0, &cfg, &train) != ADMSIM_STATUS_OK) return 2;
    size_t n = 0;
    admsim_train_len(train, &n);
    admsim_train_free(train);
    cfg.delta_on_v = -1.0;
    AdmsimEncoder *enc = NULL;
    if (admsim_encoder_new(&cfg, &enc) != ADMSIM_STATUS_INVALID_ARGUMENT) return 3;
    char msg[128];
    admsim_last_error_message(msg, sizeof msg);
    printf("%zu %s\n", n, msg);
    return 0;
}
"#;

fn c_compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .map(String::from)
}

#[test]
fn header_compiles_and_links_from_c() {
    let Some(cc) = c_compiler() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = header_path().parent().unwrap().to_path_buf();

    let syntax = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(syntax.status.success(), "{}", String::from_utf8_lossy(&syntax.stderr));

    // the static library sits next to the test binary's deps directory
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libadmsim_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping link step", lib.display());
        return;
    }
    let bin = dir.path().join("smoke");
    let link = Command::new(&cc)
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(link.status.success(), "{}", String::from_utf8_lossy(&link.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    let stdout = String::from_utf8(run.stdout).unwrap();
    let (count, msg) = stdout.trim().split_once(' ').unwrap();
    assert_eq!(count, "99");
    assert!(msg.contains("delta"));
}
