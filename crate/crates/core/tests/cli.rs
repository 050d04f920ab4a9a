use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::thread;
use std::time::Duration;

use qkd::experiment::{
    cmd_report, cmd_simulate, cmd_sweep, leakage_report, ExperimentConfig, ExperimentError, CLICKS_FILE, CURVE_FILE,
    PULSES_FILE, SUMMARY_FILE,
};
use qkd::security::{finite_key_length, loss_range, read_curve_csv, SecurityBudget};
use qkd::session::{read_frame_log, write_frame_log, FrameRecord, FrameStatus};
use qkd::sim::{read_click_records, read_pulse_records};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn qkd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qkd"));
    c.env("QKD_LOG_LEVEL", "warn");
    c
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn digest_line(out: &Output) -> String {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find(|l| l.starts_with("key digest"))
        .unwrap_or_else(|| panic!("no digest in {text}"))
        .to_string()
}

fn write_config(dir: &Path, name: &str, base: &str, extra: &str) -> PathBuf {
    let text = fs::read_to_string(configs().join(base)).unwrap();
    let text: String = text
        .lines()
        .filter(|l| !l.starts_with("out_dir") && !l.starts_with("frames"))
        .map(|l| format!("{l}\n"))
        .collect();
    let path = dir.join(name);
    fs::write(&path, format!("{text}{extra}\nout_dir = {}\n", dir.display())).unwrap();
    path
}

/// Runs Alice and Bob as two processes over TCP.
fn pair(alice_cfg: &Path, bob_cfg: &Path) -> (Output, Output) {
    let addr = format!("127.0.0.1:{}", free_port());
    let alice = qkd()
        .args(["alice", "--config"])
        .arg(alice_cfg)
        .args(["--listen", &addr])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    thread::sleep(Duration::from_millis(300));
    let bob = qkd()
        .args(["bob", "--config"])
        .arg(bob_cfg)
        .args(["--connect", &addr])
        .output()
        .unwrap();
    (alice.wait_with_output().unwrap(), bob)
}

#[test]
fn shipped_configs_parse() {
    for name in [
        "field_trial.conf",
        "day1.conf",
        "day2.conf",
        "noiseless.conf",
        "zero_loss.conf",
    ] {
        let cfg = ExperimentConfig::load(&configs().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = ExperimentConfig::parse(&cfg.to_text(), Path::new("/")).unwrap();
        assert_eq!(again, cfg, "{name}");
    }
    let ft = ExperimentConfig::load(&configs().join("field_trial.conf")).unwrap();
    assert_eq!(ft.params.misalignment_qber, 0.03225);
    assert!(ft.compensator.enabled);
    assert_eq!(ft.frame_len, 200_000);
}

#[test]
fn config_errors_carry_line_numbers() {
    let base = Path::new(".");
    let err = |text: &str| match ExperimentConfig::parse(text, base) {
        Err(ExperimentError::Config { line, msg }) => (line, msg),
        other => panic!("{text:?}: {other:?}"),
    };
    assert_eq!(err("# comment\nseed = 1\nbogus = 2\n").0, 3);
    assert!(err("seed = 1\nseed = 2\n").1.contains("duplicate"));
    assert!(err("seed 1\n").1.contains("key = value"));
    assert!(err("frame_len = ten\n").1.contains("frame_len"));
    assert!(err("click_records = does/not/exist.qkdr\n")
        .1
        .contains("does not exist"));
    assert!(err("anchor_loss_db = none\n").1.contains("anchor"));
    let cfg = ExperimentConfig::parse("seed = 4 # trailing\n\n  frames=2  \nf_model = 1.3\n", base).unwrap();
    assert_eq!((cfg.seed, cfg.frames), (4, 2));
    let cb = cfg.codebook_config().unwrap();
    assert_eq!((cb.f_model, cb.f_retry), (1.3, 1.3 + 0.12));
}

#[test]
fn local_keys_stay_out_of_the_shared_digest() {
    let a = ExperimentConfig::parse("seed = 3\nalice_seed = 10\ntimeout_s = 5\n", Path::new(".")).unwrap();
    let b = ExperimentConfig::parse("seed = 3\nbob_seed = 11\n", Path::new(".")).unwrap();
    let c = ExperimentConfig::parse("seed = 4\n", Path::new(".")).unwrap();
    assert_eq!(a.shared_text(), b.shared_text());
    assert_ne!(a.shared_text(), c.shared_text());
    assert_ne!(b.alice_seed(), b.bob_seed());
}

#[test]
fn simulate_matches_the_detection_chain() {
    let dir = scratch("simulate");
    let mut cfg = ExperimentConfig::load(&configs().join("field_trial.conf")).unwrap();
    cfg.out_dir = dir.join("a");
    let s = cmd_simulate(&cfg).unwrap();
    assert!((s.click_rate_hz - 2.9e4).abs() < 0.1 * 2.9e4, "{}", s.click_rate_hz);
    assert!((s.click_rate_hz - s.expected_rate_hz).abs() < 0.02 * s.expected_rate_hz);
    assert!((s.sift_fraction() - 0.5).abs() < 0.01);
    assert!((s.qber() - 0.0325).abs() < 0.005, "{}", s.qber());

    let clicks = read_click_records(&mut fs::read(cfg.out_dir.join(CLICKS_FILE)).unwrap().as_slice()).unwrap();
    let pulses = read_pulse_records(&mut fs::read(cfg.out_dir.join(PULSES_FILE)).unwrap().as_slice()).unwrap();
    assert_eq!(clicks.len() as u64, s.clicks);
    assert!(pulses.len() <= clicks.len() && pulses.len() as f64 > 0.99 * clicks.len() as f64);
    assert_eq!(fs::read_to_string(cfg.out_dir.join(SUMMARY_FILE)).unwrap(), s.to_text());

    // Same seed through the binary: byte-identical records.
    let out = qkd()
        .args(["simulate", "--config"])
        .arg(configs().join("field_trial.conf"))
        .arg("--out")
        .arg(dir.join("b"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [CLICKS_FILE, PULSES_FILE, SUMMARY_FILE] {
        assert_eq!(
            fs::read(dir.join("a").join(f)).unwrap(),
            fs::read(dir.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let out = qkd()
        .args(["simulate", "--config"])
        .arg(configs().join("field_trial.conf"))
        .args(["--seed", "2", "--out"])
        .arg(dir.join("c"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_ne!(
        fs::read(dir.join("a").join(CLICKS_FILE)).unwrap(),
        fs::read(dir.join("c").join(CLICKS_FILE)).unwrap()
    );
}

#[test]
fn removing_the_fibre_scales_the_rate() {
    let mut lossy = ExperimentConfig::load(&configs().join("field_trial.conf")).unwrap();
    let mut clear = ExperimentConfig::load(&configs().join("zero_loss.conf")).unwrap();
    let dir = scratch("zero_loss");
    lossy.duration_s = 0.5;
    clear.duration_s = 0.5;
    lossy.out_dir = dir.join("lossy");
    clear.out_dir = dir.join("clear");
    let (a, b) = (cmd_simulate(&lossy).unwrap(), cmd_simulate(&clear).unwrap());
    let ratio = b.click_rate_hz / a.click_rate_hz;
    let expect = 10f64.powf(lossy.params.channel_loss_db / 10.0);
    assert!((ratio - expect).abs() < 0.03 * expect, "{ratio} vs {expect}");
    assert!((ratio - 9.1).abs() < 0.3, "{ratio}");
}

#[test]
fn sweep_writes_the_curve() {
    let dir = scratch("sweep");
    let out = qkd()
        .args(["sweep", "--config"])
        .arg(configs().join("field_trial.conf"))
        .args(["--loss-db", "0:30:2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.join(CURVE_FILE)).unwrap();
    let points = read_curve_csv(&text).unwrap();
    assert_eq!(points.len(), 16);
    assert_eq!(points[15].loss_db, 30.0);
    for p in &points {
        assert!(
            p.skr_finite_bps < p.skr_asymptotic_bps || p.skr_asymptotic_bps == 0.0,
            "{p:?}"
        );
    }
    assert!(points
        .windows(2)
        .all(|w| w[1].skr_asymptotic_bps <= w[0].skr_asymptotic_bps));

    let mut cfg = ExperimentConfig::load(&configs().join("field_trial.conf")).unwrap();
    cfg.out_dir = dir.join("anchor");
    let at = cmd_sweep(&cfg, &loss_range(9.6, 9.6, 1.0).unwrap()).unwrap();
    assert_eq!(at.len(), 1);
    assert!((at[0].skr_asymptotic_bps - 13.2e3).abs() < 0.02 * 13.2e3, "{:?}", at[0]);
    assert!(at[0].skr_finite_bps < at[0].skr_asymptotic_bps);

    assert!(!qkd()
        .args(["sweep", "--loss-db", "5:1:1", "--out"])
        .arg(&dir)
        .output()
        .unwrap()
        .status
        .success());
}

fn zero_qber_frame(frame_id: u64, syndrome_bits: usize) -> FrameRecord {
    let budget = SecurityBudget::for_frame(20_000).unwrap();
    let q_tilde = qkd::protocol::qber_upper_bound(0.0, 2_000, budget.eps_pe).unwrap();
    let r = finite_key_length(20_000, q_tilde, syndrome_bits, 172, 0.99999, &budget).unwrap();
    FrameRecord {
        frame_id,
        status: FrameStatus::Ok,
        n: 20_000,
        m: 2_000,
        q_hat: Some(0.0),
        q_tilde: Some(q_tilde),
        rate: Some(1.0 - syndrome_bits as f64 / 20_000.0),
        attempts: 1,
        syndrome_bits,
        leak_ec: syndrome_bits,
        leak_ev: r.leak_ev,
        nu_auth: 172,
        a: 0.99999,
        delta: Some(r.delta),
        entropy_term: Some(r.entropy_term),
        l_key: r.l_key,
        corrected_errors: Some(0),
    }
}

#[test]
fn report_of_a_zero_qber_frame() {
    let dir = scratch("report");
    let frames = vec![zero_qber_frame(0, 1_000), zero_qber_frame(1, 1_337)];
    let log = dir.join("frames.csv");
    write_frame_log(&frames, fs::File::create(&log).unwrap()).unwrap();
    assert_eq!(read_frame_log(fs::File::open(&log).unwrap()).unwrap(), frames);

    let r = cmd_report(&log).unwrap();
    assert_eq!(r.breakdowns.len(), 2);
    for ((_, b), f) in r.breakdowns.iter().zip(&frames) {
        assert_eq!(b.error_correction, f.syndrome_bits as f64);
        assert_eq!(b.qber, 0.0);
        assert!(b.entries().iter().all(|(_, v)| *v >= 0.0));
        assert!((b.total() - 20_000.0).abs() <= 1.0);
    }
    let ec = r.totals.iter().find(|(l, _)| *l == "error_correction").unwrap().1;
    assert_eq!(ec, 2_337.0);
    assert_eq!(r.total_syndrome, 2_337);

    let out = qkd()
        .arg("report")
        .arg(&log)
        .arg("--out")
        .arg(dir.join("report.txt"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(dir.join("report.txt")).unwrap(),
        String::from_utf8(out.stdout).unwrap()
    );

    // A row whose categories cannot add up is refused.
    let mut bad = frames.clone();
    bad[0].l_key += 500;
    assert!(matches!(leakage_report(&bad), Err(ExperimentError::Report(_))));
    fs::write(dir.join("junk.csv"), "frame_id,status\n0,ok\n").unwrap();
    assert!(cmd_report(&dir.join("junk.csv")).is_err());
}

#[test]
fn tcp_peers_agree_on_the_key() {
    let dir = scratch("tcp");
    let cfg = write_config(&dir, "noiseless.conf", "noiseless.conf", "frames = 2");
    let (a, b) = pair(&cfg, &cfg);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stdout));
    assert_eq!(digest_line(&a), digest_line(&b));
    assert!(String::from_utf8_lossy(&b.stdout).contains("ok             2"));
    assert_eq!(
        fs::read(dir.join("alice_key.bin")).unwrap(),
        fs::read(dir.join("bob_key.bin")).unwrap()
    );
    assert!(!fs::read(dir.join("bob_key.bin")).unwrap().is_empty());

    let r = cmd_report(&dir.join("bob_frames.csv")).unwrap();
    assert_eq!(r.breakdowns.len(), 2);
    let ec = r.totals.iter().find(|(l, _)| *l == "error_correction").unwrap().1;
    assert_eq!(ec, r.total_leak_ec as f64);
}

#[test]
fn mismatched_peers_refuse_to_start() {
    let dir = scratch("mismatch");
    let a_cfg = write_config(&dir, "a.conf", "noiseless.conf", "frames = 2");
    let b_cfg = write_config(&dir, "b.conf", "noiseless.conf", "frames = 3");
    let (a, b) = pair(&a_cfg, &b_cfg);
    for o in [&a, &b] {
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stdout).contains("ConfigMismatch"));
    }
    assert!(fs::read(dir.join("bob_key.bin")).unwrap().is_empty());
}

#[test]
fn killed_peer_gives_a_clean_abort() {
    let dir = scratch("kill");
    let cfg = write_config(
        &dir,
        "noiseless.conf",
        "noiseless.conf",
        "frames = 1000\ntimeout_s = 10",
    );
    let addr = format!("127.0.0.1:{}", free_port());
    let mut alice = qkd()
        .args(["alice", "--config"])
        .arg(&cfg)
        .args(["--listen", &addr])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    thread::sleep(Duration::from_millis(300));
    let bob = qkd()
        .args(["bob", "--config"])
        .arg(&cfg)
        .args(["--connect", &addr])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    thread::sleep(Duration::from_secs(6));
    alice.kill().unwrap();
    alice.wait().unwrap();
    let out = bob.wait_with_output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(2), "{text}");
    assert!(text.contains("aborted (Transport"), "{text}");
    // The frame log and summary are still written.
    let frames = read_frame_log(fs::File::open(dir.join("bob_frames.csv")).unwrap()).unwrap();
    assert!(frames.len() < 1000);
    assert!(fs::read_to_string(dir.join("bob_summary.txt"))
        .unwrap()
        .contains("aborted"));
}

#[test]
fn day_one_replay_keeps_a_quarter_of_the_block() {
    let dir = scratch("day1");
    let cfg = write_config(&dir, "day1.conf", "day1.conf", "frames = 3");
    let (a, b) = pair(&cfg, &cfg);
    assert!(
        a.status.success() && b.status.success(),
        "{}",
        String::from_utf8_lossy(&b.stdout)
    );
    assert_eq!(digest_line(&a), digest_line(&b));
    let out = qkd().arg("report").arg(dir.join("bob_frames.csv")).output().unwrap();
    assert!(out.status.success());
    let r = cmd_report(&dir.join("bob_frames.csv")).unwrap();
    let frac = r.secret_fraction();
    assert!((0.20..=0.26).contains(&frac), "{frac}\n{}", r.to_text());
    for (_, b) in &r.breakdowns {
        assert!(b.entries().iter().all(|(_, v)| *v >= -1e-6));
    }
}
