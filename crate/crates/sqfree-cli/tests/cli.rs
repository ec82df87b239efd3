use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sqfree::seqgen::{write_sequence, BitSequence};

fn sqfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqfree")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.msf");
    let b = dir.path().join("b.msf");
    let o = sqfree(&["gen", "--start", "1", "--count", "1000", "--out", p(&a)]);
    assert_eq!(code(&o), 0);
    let line = stdout(&o);
    assert!(line.contains("[1, 1001)"), "{line}");
    let density: f64 = line.rsplit(' ').next().unwrap().trim().parse().unwrap();
    assert!((density - 0.5).abs() < 0.05);
    assert_eq!(code(&sqfree(&["gen", "--count", "1e3", "--out", p(&b)])), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&a).unwrap().len(), 22 + 125);
}

#[test]
fn unwritable_path_is_an_error() {
    let o = sqfree(&["gen", "--count", "10", "--out", "/nonexistent-dir/x.msf"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/x.msf"));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&sqfree(&["gen", "--count", "1.5", "--out", "x"])), 2);
    assert_eq!(code(&sqfree(&["battery", "--sieve", "--tests", "nope"])), 2);
    assert_eq!(code(&sqfree(&["battery", "--fair-coin", "--tests", "monobit"])), 2);
    assert_eq!(code(&sqfree(&["battery", "--sieve", "--fair-coin"])), 2);
    assert_eq!(code(&sqfree(&["battery", "--sieve", "--tests", "monobit", "--alpha", "1.5"])), 2);
    assert_eq!(code(&sqfree(&["battery", "--sieve"])), 2, "default selection draws randomness");
}

#[test]
fn monobit_battery_counts_lines() {
    let o = sqfree(&[
        "battery",
        "--sieve",
        "--tests",
        "monobit",
        "--blocks",
        "100",
        "--block-len",
        "1e5",
        "--start",
        "1e9",
    ]);
    assert!(code(&o) <= 1);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines.iter().filter(|l| l.contains("\"test\":\"monobit\"")).count(), 100);
    let summary: serde_json::Value = serde_json::from_str(lines[100]).unwrap();
    assert_eq!(summary["summary"], "monobit");
    assert_eq!(summary["samples"], 100);
}

#[test]
fn stored_input_and_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.msf");
    assert_eq!(code(&sqfree(&["gen", "--start", "1000", "--count", "2e5", "--out", p(&f)])), 0);
    let args =
        ["battery", "--input", p(&f), "--tests", "monobit,serial_frequency", "--blocks", "10", "--block-len", "2e4"];
    let o = sqfree(&args);
    assert!(code(&o) <= 1);
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("block_start")).count(), 40);
    let mut wide = args.to_vec();
    wide[6] = "11";
    assert_eq!(code(&sqfree(&wide)), 2);
    let o = sqfree(&[
        "battery",
        "--input",
        p(&f),
        "--tests",
        "monobit",
        "--start",
        "10",
        "--blocks",
        "1",
        "--block-len",
        "10",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn failing_sequence_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("ones.msf");
    write_sequence(&BitSequence::from_bits(1, &vec![1u8; 100_000]), &f).unwrap();
    let o = sqfree(&["battery", "--input", p(&f), "--tests", "monobit", "--blocks", "10", "--block-len", "1e4"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn seeded_battery_is_byte_identical() {
    let run = |threads: &str| {
        let o = sqfree(&[
            "--threads",
            threads,
            "battery",
            "--fair-coin",
            "--seed",
            "11",
            "--blocks",
            "12",
            "--block-len",
            "4e4",
            "--mean-gap",
            "100",
        ]);
        assert!(code(&o) <= 1);
        o.stdout
    };
    let a = run("1");
    assert!(!a.is_empty());
    assert_eq!(a, run("1"));
    assert_eq!(a, run("2"));
}

#[test]
fn tables() {
    let o = sqfree(&["tables", "--which", "pi", "--n", "1e6"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1000000");
    assert_eq!(row[1].parse::<f64>().unwrap(), 124_281.0);
    assert!((row[2].parse::<f64>().unwrap() - 124_419.0).abs() <= 2.0);
    assert!((row[3].parse::<f64>().unwrap() - 1.1e-3).abs() < 1e-4);

    let text = stdout(&sqfree(&["tables", "--which", "tau"]));
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((first[1].parse::<f64>().unwrap() - 0.5908).abs() < 1e-4);
    assert_eq!(text.lines().count(), 11);

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("r.csv");
    assert_eq!(code(&sqfree(&["tables", "--which", "residue", "--q", "7", "--X", "1e6", "--out", p(&f)])), 0);
    assert_eq!(fs::read_to_string(&f).unwrap().lines().count(), 8);
    assert_eq!(code(&sqfree(&["tables", "--which", "residue", "--q", "8"])), 2);
}

#[test]
fn extremes() {
    assert_eq!(code(&sqfree(&["extremes", "--fair-coin", "--seed", "3", "--segments", "100", "--T", "100"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let seg = dir.path().join("seg.csv");
    let fits = dir.path().join("fits");
    let o = sqfree(&[
        "extremes",
        "--fair-coin",
        "--seed",
        "5",
        "--segments",
        "4000",
        "--T",
        "2000",
        "--out",
        p(&seg),
        "--fits",
        p(&fits),
    ]);
    assert!(code(&o) <= 1);
    let text = stdout(&o);
    assert!(text.contains("arcsine (time of minimum)") && text.contains("tau/T"));
    let m1 = text.lines().find(|l| l.contains("<|tau/T|^1>")).unwrap();
    let sample: f64 = m1.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((sample / 0.5908629 - 1.0).abs() < 0.02, "{m1}");
    assert_eq!(fs::read_to_string(&seg).unwrap().lines().count(), 4001);
    for f in ["arcsine_min.csv", "arcsine_max.csv", "tau.csv"] {
        assert!(fits.join(f).exists());
    }
}
