use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

fn biasbench(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_biasbench"));
    cmd.args(args).env_remove("BIASBENCH_OUT");
    if let Some(dir) = env_out {
        cmd.env("BIASBENCH_OUT", dir);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn report_without_analysis_exits_nonzero_with_error_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = biasbench(
        &[
            "run",
            "--stages",
            "report",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("error.json")).unwrap()).unwrap();
    assert_eq!(report["kind"], "missing_artifact");
    assert_eq!(report["stage"], "report");
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing_artifact"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "no_such_field = 1\n").unwrap();
    let out = biasbench(
        &[
            "world",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"kind\":\"config\""));

    let out = biasbench(
        &[
            "run",
            "--stages",
            "world,bogus",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_beats_environment_and_second_run_is_cached() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = biasbench(&["run", "--stages", "world,sample"], Some(env_dir.path()));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout(&out), "world\tran\nsample\tran\n");
    assert!(env_dir.path().join("world.json").exists());

    let again = biasbench(&["sample"], Some(env_dir.path()));
    assert_eq!(stdout(&again), "sample\tcached\n");

    let flagged = biasbench(
        &["world", "--out", flag_dir.path().to_str().unwrap()],
        Some(env_dir.path()),
    );
    assert!(flagged.status.success());
    assert!(flag_dir.path().join("world.json").exists());
}

#[test]
fn toml_config_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "out_dir = {:?}\nthreads = 2\n[sample]\ncount = 300\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = biasbench(
        &[
            "run",
            "--stages",
            "world,sample",
            "--config",
            cfg.to_str().unwrap(),
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines = std::fs::read_to_string(out_dir.join("training.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 300);
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port()
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut s = TcpStream::connect(("127.0.0.1", port)).ok()?;
    s.set_read_timeout(Some(Duration::from_secs(10))).ok()?;
    write!(
        s,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .ok()?;
    let mut buf = String::new();
    s.read_to_string(&mut buf).ok()?;
    Some(buf)
}

#[test]
fn annotate_serve_hands_out_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let prep = biasbench(
        &[
            "run",
            "--stages",
            "world,sample,directions,prototypes,curate,variants,pairs",
            "--out",
            d,
        ],
        None,
    );
    assert!(
        prep.status.success(),
        "{}",
        String::from_utf8_lossy(&prep.stderr)
    );

    let port = free_port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_biasbench"))
        .args(["annotate", "serve", "--port", &port.to_string(), "--out", d])
        .env_remove("BIASBENCH_OUT")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let start = Instant::now();
    let mut progress = None;
    while start.elapsed() < Duration::from_secs(60) {
        if let Some(r) = http_get(port, "/api/progress") {
            progress = Some(r);
            break;
        }
        std::thread::sleep(Duration::from_millis(100));
    }
    let task = http_get(port, "/api/tasks/next?worker=tester&kind=pair");
    child.kill().unwrap();
    child.wait().unwrap();
    let progress = progress.expect("server came up");
    assert!(progress.starts_with("HTTP/1.1 200"), "{progress}");
    assert!(progress.contains("\"items\":"));
    let task = task.unwrap();
    assert!(task.starts_with("HTTP/1.1 200"), "{task}");
    assert!(task.contains("PairIdentity"));
}
