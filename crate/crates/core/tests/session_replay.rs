mod common;

use std::io::BufReader;

use gradarg_core::resolver::ResolveConfig;
use gradarg_core::session::{Session, SessionStore};

#[test]
fn script_has_twenty_events() {
    let s = common::script::run(&ResolveConfig::default());
    assert_eq!(s.event_log.len(), 20);
    assert!(s.decision_history.len() >= 5);
    assert!(s.pending_tie.is_none());
}

#[test]
fn log_replay_reproduces_history() {
    let cfg = ResolveConfig::default();
    let s = common::script::run(&cfg);
    let mut buf = Vec::new();
    s.write_log(&mut buf).unwrap();
    let back = Session::replay_log(BufReader::new(&buf[..]), &cfg).unwrap();
    assert_eq!(back.decision_history, s.decision_history);
    assert_eq!(back.framework, s.framework);
    assert_eq!(back.event_log, s.event_log);
    assert_eq!(back, s);
    for k in 0..s.decision_history.len() as i64 {
        assert_eq!(
            back.get_explanation(k, &cfg).unwrap(),
            s.get_explanation(k, &cfg).unwrap()
        );
    }
}

#[test]
fn replay_rejects_tampered_logs() {
    let cfg = ResolveConfig::default();
    let s = common::script::run(&cfg);
    let mut buf = Vec::new();
    s.write_log(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(1, 2);
    let e = Session::replay_log(BufReader::new(lines.join("\n").as_bytes()), &cfg).unwrap_err();
    assert_eq!(e.code(), "BAD_REQUEST");
    assert!(Session::replay_log(BufReader::new(&b""[..]), &cfg).is_err());
}

#[test]
fn store_reopens_from_disk() {
    let cfg = ResolveConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let s = common::script::run(&cfg);
    let mut buf = Vec::new();
    s.write_log(&mut buf).unwrap();
    std::fs::write(dir.path().join("scripted.jsonl"), buf).unwrap();
    let store = SessionStore::open(dir.path(), cfg).unwrap();
    assert_eq!(store.len(), 1);
    let history = store.read("scripted", |r| Ok(r.decision_history.clone())).unwrap();
    assert_eq!(history, s.decision_history);
}
