use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use tracelab_cli::tracefile::{decode, encode, HEADER_LEN};

const KEY: &str = "677689798898a65765f765775b87688c";

fn tracelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracelab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn synth(dir: &TempDir, name: &str, extra: &[&str]) -> String {
    let out = path(dir, name);
    let mut args = vec!["synth", "--key", KEY, "-o", &out];
    args.extend_from_slice(extra);
    let o = tracelab(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn cipher_subcommand_prints_known_vectors() {
    let o = tracelab(&[
        "cipher",
        "--alg",
        "speck",
        "--key",
        "0f0e0d0c0b0a09080706050403020100",
        "--pt",
        "6c617669757165207469206564616d20",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "a65d9851797832657860fedf5c570d18");
    let o = tracelab(&[
        "cipher",
        "--alg",
        "aes",
        "--key",
        "000102030405060708090a0b0c0d0e0f",
        "--pt",
        "00112233445566778899aabbccddeeff",
    ]);
    assert_eq!(stdout(&o).trim(), "69c4e0d86a7b0430d8cdb78070b4c55a");
}

#[test]
fn synth_is_reproducible_from_its_seed() {
    let dir = TempDir::new().unwrap();
    let a = synth(&dir, "a.trc", &["--cipher", "aes", "-n", "50", "--seed", "9"]);
    let b = synth(&dir, "b.trc", &["--cipher", "aes", "-n", "50", "--seed", "9"]);
    let c = synth(&dir, "c.trc", &["--cipher", "aes", "-n", "50", "--seed", "10"]);
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn attack_recovers_and_writes_reports() {
    let dir = TempDir::new().unwrap();
    let input = synth(&dir, "aes.trc", &["--cipher", "aes", "-n", "300"]);
    let (report, csv, corr) = (path(&dir, "r.txt"), path(&dir, "r.csv"), path(&dir, "c.csv"));
    let o = tracelab(&[
        "attack", "-i", &input, "--true-key", KEY, "--report", &report, "--csv", &csv, "--correlation-csv", &corr,
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains(&format!("recovered key: {KEY}")), "{text}");
    assert!(text.contains("lanes correct: 16/16"));
    assert!(text.starts_with("# tracelab attack"), "report records its invocation");
    assert_eq!(std::fs::read_to_string(&report).unwrap(), text);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 16 * 256);
    assert_eq!(std::fs::read_to_string(&corr).unwrap().lines().count(), 1 + 256);
}

#[test]
fn speck_attack_and_sweep() {
    let dir = TempDir::new().unwrap();
    let p1 = synth(&dir, "p1.trc", &["--cipher", "speck", "--phase", "1", "-n", "500"]);
    let p2 = synth(&dir, "p2.trc", &["--cipher", "speck", "--phase", "2", "-n", "500", "--seed", "2"]);
    let o = tracelab(&["speck-attack", "--phase1", &p1, "--phase2", &p2, "--true-key", KEY]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("success: yes"));

    let traj = path(&dir, "traj.csv");
    let o = tracelab(&["sweep", "-i", &p1, "--selection", "speck-r1", "--grid", "lin:10:500:10", "-o", &traj]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(&traj).unwrap();
    assert_eq!(csv.lines().count(), 257);
    assert!(csv.starts_with("guess,10,20,"));

    // Five traces are not enough for every lane, so the target is not reached.
    let o = tracelab(&["sweep", "-i", &p1, "--selection", "speck-r1", "--grid", "2,3,4", "--true-key", KEY]);
    assert_eq!(code(&o), 4);
    // Phase-2 selection cannot run without K2.
    let o = tracelab(&["sweep", "-i", &p2, "--selection", "speck-r2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn zero_key_demo_shows_the_anomaly() {
    let dir = TempDir::new().unwrap();
    let curves = path(&dir, "curves.csv");
    let o = tracelab(&["zero-key-demo", "-n", "300", "--curves-csv", &curves]);
    assert_eq!(code(&o), 0);
    assert!(Path::new(&curves).exists());
    assert!(stdout(&o).contains(KEY), "loads excluded should give the key back");
}

#[test]
fn counter_experiment_reports_unreached_budget() {
    let o = tracelab(&["counter-experiment", "--axis", "injection", "--levels", "0,1", "--seeds", "1,2,3", "--budget", "2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = tracelab(&["counter-experiment", "--axis", "shuffle", "--levels", "0,1", "--seeds", "1,2,3", "--budget", "40"]);
    assert_eq!(code(&o), 4);
    let o = tracelab(&["counter-experiment", "--axis", "sideways", "--levels", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn randtest_verdicts() {
    let dir = TempDir::new().unwrap();
    let hist = path(&dir, "h.csv");
    let o = tracelab(&["randtest", "--source", "bits:0.01", "-m", "100", "--histogram-csv", &hist]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("FAIL"));
    assert_eq!(std::fs::read_to_string(&hist).unwrap().lines().count(), 101);
    let o = tracelab(&["randtest", "--source", "prng"]);
    assert!(!stdout(&o).contains("FAIL"));
    assert_eq!(code(&tracelab(&["randtest", "--source", "dice"])), 2);
}

#[test]
fn exit_codes_partition_failures() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&tracelab(&["attack", "--bogus"])), 2);
    assert_eq!(code(&tracelab(&["synth", "--cipher", "aes", "--key", "xyz", "-o", "/dev/null"])), 2);
    assert_eq!(code(&tracelab(&["attack", "-i", &path(&dir, "missing.trc")])), 3);

    let good = synth(&dir, "g.trc", &["--cipher", "aes", "-n", "20"]);
    let bytes = std::fs::read(&good).unwrap();
    let truncated = path(&dir, "t.trc");
    std::fs::write(&truncated, &bytes[..bytes.len() - 7]).unwrap();
    assert_eq!(code(&tracelab(&["attack", "-i", &truncated])), 3);
    let bad_magic = path(&dir, "m.trc");
    let mut b = bytes.clone();
    b[0] = b'X';
    std::fs::write(&bad_magic, b).unwrap();
    assert_eq!(code(&tracelab(&["attack", "-i", &bad_magic])), 3);

    // Identical plaintexts leave every hypothesis column constant.
    let mut set = decode(&bytes).unwrap();
    let p = set.traces[0].plaintext;
    set.traces.iter_mut().for_each(|t| t.plaintext = p);
    let degenerate = path(&dir, "d.trc");
    std::fs::write(&degenerate, encode(&set).unwrap()).unwrap();
    assert_eq!(code(&tracelab(&["attack", "-i", &degenerate])), 4);

    // AES traces handed to the Speck attack.
    assert_eq!(code(&tracelab(&["speck-attack", "--phase1", &good, "--phase2", &good])), 2);
    assert!(bytes.len() > HEADER_LEN);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&tracelab(&["--help"])), 0);
    assert_eq!(code(&tracelab(&["synth", "--help"])), 0);
}
