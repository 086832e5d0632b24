use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use homeminer::events::Event;
use homeminer_service::fixtures::{self, ScriptedHome};
use homeminer_service::intake::{run_tail, Tail, DEFAULT_POLL_INTERVAL};
use homeminer_service::journal::Record;
use homeminer_service::Store;

fn line(record: Record) -> String {
    match record {
        Record::Event { event } => serde_json::to_string(&event).unwrap() + "\n",
        _ => unreachable!(),
    }
}

#[tokio::test]
async fn appended_events_arrive_within_a_poll_interval() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("live.jsonl");
    let home = ScriptedHome::new(1);
    let [on, hall] = home.trigger(0, fixtures::start());
    std::fs::write(&path, line(on)).unwrap();

    let mut store = Store::in_memory();
    store.submit(home.load()).unwrap();
    let store = store.shared();
    let stop = Arc::new(AtomicBool::new(false));
    // existing content is history, not news
    let tail = Tail::open_at_end(&path).unwrap();
    let task = tokio::spawn(run_tail(store.clone(), tail, DEFAULT_POLL_INTERVAL, stop.clone()));

    tokio::time::sleep(Duration::from_millis(100)).await;
    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    let [on2, _] = home.trigger(0, fixtures::start() + chrono::Duration::seconds(30));
    write!(f, "{}{}", line(on2), line(hall)).unwrap();
    f.flush().unwrap();
    let appended = Instant::now();

    let deadline = appended + DEFAULT_POLL_INTERVAL + Duration::from_millis(500);
    loop {
        let n = store.lock().unwrap().state().recommendations().count();
        if n == 1 {
            break;
        }
        assert!(Instant::now() < deadline, "tailed events not delivered in time");
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    assert!(appended.elapsed() <= DEFAULT_POLL_INTERVAL + Duration::from_millis(500));
    assert_eq!(store.lock().unwrap().state().applied(), 3);

    stop.store(true, Ordering::Relaxed);
    tokio::time::timeout(Duration::from_secs(3), task).await.unwrap().unwrap();
}

#[test]
fn malformed_tailed_lines_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("live.jsonl");
    std::fs::write(&path, "").unwrap();
    let mut tail = Tail::open(&path).unwrap();
    let event: Event = match ScriptedHome::new(1).trigger(0, fixtures::start())[0].clone() {
        Record::Event { event } => event,
        _ => unreachable!(),
    };
    std::fs::write(&path, format!("not json\n{}\n", serde_json::to_string(&event).unwrap())).unwrap();
    assert_eq!(tail.poll().unwrap(), vec![event]);
    assert_eq!(tail.skipped, 1);
}
