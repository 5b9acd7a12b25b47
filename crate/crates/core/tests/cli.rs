mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_keccak-fd"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).stdin(Stdio::null()).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn hash_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.bin");
    std::fs::write(&empty, b"").unwrap();
    let o = run(&[
        "hash",
        "--mode",
        "sha3-256",
        "--in",
        empty.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).trim(),
        "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a"
    );
}

#[test]
fn hash_stdin_with_and_without_fd() {
    let msg = vec![0xa3u8; 200];
    let plain = run_with_stdin(&["hash", "--mode", "sha3-512"], &msg);
    for fd in ["c-plane", "z-sheet"] {
        for unroll in ["1", "24"] {
            let o = run_with_stdin(
                &["hash", "--mode", "sha3-512", "--fd", fd, "--unroll", unroll],
                &msg,
            );
            assert_eq!(o.status.code(), Some(0));
            assert_eq!(stdout(&o), stdout(&plain));
        }
    }
    let expected = common::oracle::hash("sha3-512", &msg, 64);
    assert_eq!(stdout(&plain).trim(), hex::encode(expected));
}

#[test]
fn hash_xof_length_and_errors() {
    let o = run_with_stdin(&["hash", "--mode", "shake128", "--out-len", "300"], b"abc");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim().len(), 600);
    assert_eq!(
        run(&["hash", "--mode", "shake128", "--out-len", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["hash", "--mode", "sha3-1024"]).status.code(), Some(2));
    assert_eq!(
        run(&["hash", "--mode", "sha3-256", "--in", "/nonexistent"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn hash_masked_output_exits_3() {
    let o = run_with_stdin(
        &[
            "hash",
            "--mode",
            "sha3-224",
            "--fd",
            "c-plane",
            "--unroll",
            "4",
            "--inject",
            "state:1000",
            "--inject-at",
            "0:5",
        ],
        b"x",
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
}

#[test]
fn kat_fixtures_pass_and_corruption_fails() {
    let good = common::fixture("ShortMsgKAT_SHA3-256.txt");
    let o = run(&["kat", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("ShortMsgKAT_SHA3-256.txt");
    let text = std::fs::read_to_string(&good).unwrap();
    std::fs::write(&bad, text.replacen("MD = A7FF", "MD = A7FE", 1)).unwrap();
    let o = run(&["kat", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL Len = 0"));

    let empty = dir.path().join("SHA3-256-empty.txt");
    std::fs::write(&empty, "# no records\n").unwrap();
    assert_eq!(
        run(&["kat", empty.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn kat_xof_file() {
    let f = common::fixture("SHAKE256VariableOut.rsp");
    let o = run(&["kat", "--fd", "z-sheet", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn campaign_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &std::path::Path| {
        vec![
            "campaign".to_string(),
            "--scheme".into(),
            "z-sheet".into(),
            "--k".into(),
            "4".into(),
            "--strategy".into(),
            "random".into(),
            "--trials".into(),
            "50000".into(),
            "--seed".into(),
            "7".into(),
            "--report".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let o1 = bin()
        .args(args(&a))
        .env("KECCAK_FD_WORKERS", "1")
        .output()
        .unwrap();
    let o2 = bin()
        .args(args(&b))
        .env("KECCAK_FD_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(o1.status.code(), Some(0));
    assert_eq!(o2.status.code(), Some(0));
    let ra = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ra, std::fs::read_to_string(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&ra).unwrap();
    assert_eq!(v["total"], 50000);
    assert!(v["rate"].as_f64().unwrap() >= 0.9999);
    assert_eq!(v["strategy"], "random");
}

#[test]
fn campaign_exit_codes() {
    let o = run(&[
        "campaign",
        "--scheme",
        "z-sheet",
        "--k",
        "3",
        "--strategy",
        "exhaustive-sheet",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rate 1.0000000"), "{}", stdout(&o));
    let o = run(&[
        "campaign",
        "--scheme",
        "c-plane",
        "--k",
        "1",
        "--strategy",
        "exhaustive-global",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1600/1600"));
    assert_eq!(
        run(&[
            "campaign",
            "--scheme",
            "z-sheet",
            "--k",
            "0",
            "--strategy",
            "random"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "campaign",
            "--scheme",
            "z-sheet",
            "--k",
            "2",
            "--strategy",
            "sideways"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "campaign",
            "--scheme",
            "z-sheet",
            "--k",
            "3",
            "--strategy",
            "exhaustive-global",
            "--audit-global",
            "--budget",
            "100"
        ])
        .status
        .code(),
        Some(4)
    );
}

#[test]
fn census_and_throughput() {
    let o = run(&["census", "--scheme", "z-sheet", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("100800 undetected"));
    let o = run(&["throughput", "--mode", "sha3-384", "--fd", "none"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("3095.2") && out.contains("3094.00"), "{out}");
    assert_eq!(
        run(&["throughput", "--mode", "blake3"]).status.code(),
        Some(2)
    );
}
