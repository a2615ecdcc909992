use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn precise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_precise"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn model_args() -> Vec<String> {
    vec![
        "--schema".into(),
        fixture("movies.schema.json").display().to_string(),
        "--lexicon".into(),
        fixture("movies.lexicon.json").display().to_string(),
    ]
}

fn translate(extra: &[&str]) -> Output {
    let mut args: Vec<String> = vec!["translate".into()];
    args.extend(model_args());
    args.extend(extra.iter().map(|s| s.to_string()));
    precise(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn answered_question_exits_zero() {
    let attachments = fixture("attachments/siegal.att").display().to_string();
    let out = translate(&[
        "--question",
        "what films did Don Siegal direct with lead Clint Eastwood?",
        "--attachments",
        &attachments,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("ANSWERED\n"));
    assert!(text.contains(
        "SELECT movie.* FROM movie WHERE movie.director = 'Don Siegal' AND movie.lead = 'Clint Eastwood'"
    ));
}

#[test]
fn rejected_question_exits_two() {
    let out = translate(&["--question", "what is zorgon"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.starts_with("REJECTED UNKNOWN_WORD"));
    assert!(text.contains("unknown words: zorgon"));
}

#[test]
fn json_format() {
    let out = translate(&[
        "--question",
        "what movies at the westwood",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "ANSWERED");
    assert_eq!(v["interpretations"][0]["sql"].as_array().unwrap().len(), 2);
}

#[test]
fn legacy_flag_is_accepted() {
    // the movie relation is named but none of its attributes or values is
    let out = translate(&[
        "--question",
        "what movies at the westwood",
        "--legacy-constraint4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("REJECTED NO_VALID_MAPPING"));
}

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(precise(&["translate"]).status.code(), Some(1));
    assert_eq!(precise(&["bogus"]).status.code(), Some(1));
    let out = precise(&[
        "translate",
        "--schema",
        "/nonexistent/schema.json",
        "--lexicon",
        "/nonexistent/lexicon.json",
        "--question",
        "what",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(translate(&["--question", ""]).status.code(), Some(1));
    assert_eq!(precise(&["--help"]).status.code(), Some(0));
}

#[test]
fn batch_writes_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let mut args: Vec<String> = vec!["batch".into()];
    args.extend(model_args());
    for extra in [
        "--questions".to_string(),
        fixture("movies_mini.txt").display().to_string(),
        "--attachments-dir".into(),
        fixture("attachments").display().to_string(),
        "--gold".into(),
        fixture("movies_mini.gold").display().to_string(),
        "--out".into(),
        report_path.display().to_string(),
    ] {
        args.push(extra);
    }
    let out = precise(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let table = stdout(&out);
    let rows: Vec<(String, usize)> = table
        .lines()
        .map(|l| {
            let mut cols = l.split_whitespace();
            (
                cols.next().unwrap().to_string(),
                cols.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert!(rows.contains(&("ANSWERED".into(), 3)));
    assert!(rows.contains(&("AMBIGUOUS".into(), 2)));
    assert!(rows.contains(&("TOTAL".into(), 10)));
    assert!(rows.contains(&("GOLD_EXACT".into(), 2)));

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["total"], 10);
    assert_eq!(report["answered"], 3);
    assert_eq!(report["rejected"]["NO_WH"], 2);
    assert_eq!(report["outcomes"].as_array().unwrap().len(), 10);
}

struct Server(std::process::Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port()
}

fn http(port: u16, method: &str, path: &str, body: &str) -> String {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\n\
         Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    response
}

#[test]
fn serve_answers_and_logs_feedback() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("feedback.jsonl");
    let port = free_port();
    let mut args: Vec<String> = vec!["serve".into()];
    args.extend(model_args());
    args.extend([
        "--port".into(),
        port.to_string(),
        "--feedback-log".into(),
        log.display().to_string(),
    ]);
    let child = Command::new(env!("CARGO_BIN_EXE_precise"))
        .args(&args)
        .env("RUST_LOG", "info")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut server = Server(child);
    let stderr = server.0.stderr.take().unwrap();
    let mut lines = BufReader::new(stderr).lines();
    let deadline = Instant::now() + Duration::from_secs(20);
    loop {
        assert!(Instant::now() < deadline, "server did not start");
        match lines.next() {
            Some(Ok(line)) if line.contains("listening") => break,
            Some(_) => continue,
            None => panic!("server exited early"),
        }
    }

    assert!(http(port, "GET", "/api/health", "").ends_with("ok"));
    let response = http(
        port,
        "POST",
        "/api/translate",
        r#"{"question": "what are the titles of the clint eastwood films"}"#,
    );
    assert!(response.starts_with("HTTP/1.1 200"));
    assert!(response.contains("AMBIGUOUS"));
    let response = http(
        port,
        "POST",
        "/api/feedback",
        r#"{"question": "what are the titles of the clint eastwood films", "chosen_interpretation": 0, "chosen_sql": 0, "client": "cli-test"}"#,
    );
    assert!(response.starts_with("HTTP/1.1 204"), "{response}");
    let logged = std::fs::read_to_string(&log).unwrap();
    assert_eq!(logged.lines().count(), 1);
    assert!(logged.contains("cli-test"));
}
