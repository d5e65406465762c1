use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "1048576";

fn codic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codic")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = codic(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    codic(args).status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["simulate", "--variant", "nope"]), 2);
    let bad = write(dir.path(), "bad.toml", "[signal.wl]\ninit_ns = 9\nend_ns = 4\n");
    let o = codic(&["simulate", "--schedule", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("wl: init >= end"));
    let cfg = write(dir.path(), "cfg.toml", "[timings]\ntrcd_typo = 3\n");
    assert_eq!(code(&["--config", &cfg, "config"]), 2);
    let cfg = write(dir.path(), "cfg2.toml", "[timings]\ntrc = 5\n");
    assert_eq!(code(&["--config", &cfg, "config"]), 2);
    assert_eq!(code(&["nist", "/nonexistent/stream.bin"]), 1);
    assert_eq!(code(&["puf", "respond", "--reads", "3", "--threshold", "4", "--cells", SMALL]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn example_outputs() {
    assert_eq!(ok(&["destruct", "mrs", "--variant", "sig"]), "name,image,mask\nsig,0x2d8f600000,1100\n");
    let t = ok(&["puf", "eval-time", "--reads", "5", "--threshold", "5"]);
    assert_eq!(t, "mechanism,reads,threshold,segment_bytes,eval_time_ms\ncodic_sig,5,5,8192,4.41\n");
    let t = ok(&["puf", "eval-time", "--mech", "latency_puf", "--reads", "100", "--threshold", "91"]);
    assert!(t.ends_with(",88.2\n"), "{t}");
    assert!(ok(&["destruct", "gate", "--progress", "0.5"]).ends_with(",RD,external,REJECTED\n"));
    assert!(ok(&["destruct", "gate", "--progress", "1.5"]).ends_with(",ACCEPTED\n"));
    let sweep = ok(&["destruct", "sweep", "--capacities", "64MB", "--mech", "codic"]);
    assert_eq!(sweep, "capacity_bytes,mechanism,latency_ns,energy_nj\n67108864,codic,61477.500,140902.400\n");
    let wave = ok(&["simulate", "--variant", "sig"]);
    assert!(wave.starts_with("t_ns,v_cell,v_bl,v_blb,wl,eq,sense_p,sense_n\n"));
    assert!(wave.lines().last().unwrap().starts_with("25.000,0.750000,0.750000,"));
}

#[test]
fn json_output_is_records() {
    let j = ok(&["--format", "json", "puf", "eval-time"]);
    let v: serde_json::Value = serde_json::from_str(&j).unwrap();
    assert_eq!(v[0]["eval_time_ms"], 4.41);
    assert_eq!(v[0]["mechanism"], "codic_sig");
    let c: serde_json::Value = serde_json::from_str(&ok(&["--format", "json", "config"])).unwrap();
    assert_eq!(c["seeds"]["seed"], 1);
}

#[test]
fn outputs_are_deterministic() {
    let runs = [
        vec!["--seed", "7", "puf", "respond", "--segment", "3", "--cells", SMALL],
        vec!["--seed", "7", "puf", "far-frr", "--pairs", "200", "--cells", SMALL],
        vec!["simulate", "--variant", "det_zero", "--pv", "4", "--seed", "3"],
        vec!["variation", "esa", "--n", "10000", "--pv", "5"],
        vec!["destruct", "sweep", "--capacities", "64MB..128MB"],
    ];
    for args in runs {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
    }
    let a = ok(&["--seed", "7", "puf", "respond", "--segment", "3", "--cells", SMALL]);
    let b = ok(&["--seed", "8", "puf", "respond", "--segment", "3", "--cells", SMALL]);
    assert_ne!(a, b);
}

#[test]
fn respond_jaccard_auth_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let (a, b) = (p("nested/a.txt"), p("b.txt"));
    ok(&["--out", &a, "puf", "respond", "--segment", "1", "--cells", SMALL]);
    ok(&["--out", &b, "--read-seed", "9", "puf", "respond", "--segment", "1", "--cells", SMALL]);
    assert_eq!(ok(&["puf", "jaccard", &a, &a]), "jaccard\n1.000000\n");
    let j: f64 = ok(&["puf", "jaccard", &a, &b]).lines().nth(1).unwrap().parse().unwrap();
    assert!((0.9..=1.0).contains(&j), "{j}");
    assert!(ok(&["puf", "auth", &a, &a]).starts_with("decision,jaccard\nACCEPT,"));
}

#[test]
fn stream_file_feeds_nist() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.bin");
    let s = s.to_str().unwrap();
    ok(&["--out", s, "puf", "stream", "--bits", "200000"]);
    assert_eq!(fs::metadata(s).unwrap().len(), 25_000);
    let first = fs::read(s).unwrap();
    ok(&["--out", s, "puf", "stream", "--bits", "200000"]);
    assert_eq!(fs::read(s).unwrap(), first);
    let report = ok(&["nist", s]);
    assert!(report.starts_with("test,p_value,verdict\n"));
    assert_eq!(report.lines().count(), 8);
    let zeros = dir.path().join("z.txt");
    fs::write(&zeros, "0".repeat(10_000)).unwrap();
    let report = ok(&["nist", zeros.to_str().unwrap()]);
    assert!(report.contains("monobit,0.000000,FAIL"), "{report}");
}

#[test]
fn mrs_decode_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let toml = ok(&["destruct", "mrs", "--decode", "0x2d8f600000/1100"]);
    let path = write(dir.path(), "sig.toml", &toml);
    assert_eq!(ok(&["destruct", "mrs", "--schedule", &path]).lines().nth(1).unwrap().split(',').nth(1), Some("0x2d8f600000"));
    assert_eq!(code(&["destruct", "mrs", "--decode", "0xzz"]), 2);
}

#[test]
fn replay_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "t.txt", "# frees\nFREE 0 0 8\nDEMAND 1 3 100\nFREE 2 10 4\n");
    let out = ok(&["destruct", "replay", &trace, "--capacity", "64MB"]);
    let cycles: Vec<u64> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(cycles.len(), 4);
    assert!(cycles.windows(2).all(|w| w[0] <= w[1]), "{out}");
    let bad = write(dir.path(), "bad.txt", "FREE 0 0\n");
    assert_eq!(code(&["destruct", "replay", &bad]), 2);
    let t = ok(&["destruct", "trace", "--capacity", "64MB", "--mech", "codic"]);
    assert!(t.starts_with("cycle,kind,bank,row\n0,CODIC_DET_ZERO,0,0\n"));
    assert_eq!(t.lines().count(), 1 + 8192);
}

#[test]
fn config_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let cfg = write(dir.path(), "c.toml", &format!("[output]\ndir = {:?}\n", out.to_str().unwrap()));
    assert_eq!(ok(&["--config", &cfg, "destruct", "mrs", "--variant", "det_zero"]), "");
    assert!(fs::read_to_string(out.join("destruct.csv")).unwrap().starts_with("name,image,mask\n"));
    // The printed config loads back unchanged.
    let printed = ok(&["config"]);
    let again = write(dir.path(), "again.toml", &printed);
    assert_eq!(ok(&["--config", &again, "config"]), printed);
}
