use std::time::{Duration, Instant};

use lakecover::error::Error;
use lakecover::store::ObjectStore;

#[test]
fn ticks_and_listing() {
    let s = ObjectStore::new();
    assert_eq!(s.current_tick(), 0);
    assert_eq!(s.put("data/t/b", vec![1]).unwrap(), 1);
    assert_eq!(s.put("data/t/a", vec![2]).unwrap(), 2);
    assert_eq!(s.put("other/x", vec![3]).unwrap(), 3);
    assert_eq!(s.list("data/t/"), vec!["data/t/a", "data/t/b"]);
    assert_eq!(s.files_created_after("data/t/", 0), vec!["data/t/a", "data/t/b"]);
    assert_eq!(s.files_created_after("data/t/", 1), vec!["data/t/a"]);
    assert!(s.files_created_after("data/t/", 3).is_empty());
    assert_eq!(s.created_at("data/t/a"), Some(2));

    // overwriting gives a new tick
    assert_eq!(s.put("data/t/b", vec![9]).unwrap(), 4);
    assert_eq!(s.files_created_after("data/t/", 2), vec!["data/t/b"]);
    assert_eq!(s.len(), 3);
}

#[test]
fn reads_are_counted_but_metadata_is_free() {
    let s = ObjectStore::new();
    s.put("k1", vec![0; 10]).unwrap();
    s.put("k2", vec![0; 5]).unwrap();
    s.list("");
    s.files_created_after("", 0);
    s.contains("k1");
    assert_eq!(s.reads(), 0);
    s.get("k1").unwrap();
    s.get("k2").unwrap();
    s.get("k1").unwrap();
    assert_eq!((s.reads(), s.bytes_read()), (3, 25));
    assert!(matches!(s.get("missing"), Err(Error::NotFound(_))));
    s.reset_reads();
    assert_eq!((s.reads(), s.bytes_read()), (0, 0));
}

#[test]
fn deletes_remove_from_every_view() {
    let s = ObjectStore::new();
    s.put("p/a", vec![1]).unwrap();
    s.put("p/b", vec![1]).unwrap();
    assert!(s.delete("p/a").unwrap());
    assert!(!s.delete("p/a").unwrap());
    assert!(!s.contains("p/a"));
    assert_eq!(s.list("p/"), vec!["p/b"]);
    assert_eq!(s.files_created_after("p/", 0), vec!["p/b"]);
}

#[test]
fn empty_keys_are_rejected() {
    assert!(ObjectStore::new().put("", vec![1]).is_err());
}

#[test]
fn latency_applies_per_read() {
    let s = ObjectStore::with_latency(Duration::from_millis(2));
    s.put("k", vec![1]).unwrap();
    let start = Instant::now();
    for _ in 0..5 {
        s.get("k").unwrap();
    }
    assert!(start.elapsed() >= Duration::from_millis(10));
    s.set_latency(Duration::ZERO);
    assert_eq!(s.latency(), Duration::ZERO);
}

#[test]
fn directory_store_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    {
        let s = ObjectStore::open_dir(dir.path()).unwrap();
        s.put("data/t/a", b"one".to_vec()).unwrap();
        s.put("data/t/b", b"two".to_vec()).unwrap();
        s.put("data/t/c", b"three".to_vec()).unwrap();
        s.delete("data/t/b").unwrap();
    }
    let s = ObjectStore::open_dir(dir.path()).unwrap();
    assert_eq!(s.list("data/t/"), vec!["data/t/a", "data/t/c"]);
    assert_eq!(&*s.get("data/t/c").unwrap(), b"three");
    assert_eq!(s.current_tick(), 3);
    assert_eq!(s.created_at("data/t/c"), Some(3));
    assert_eq!(s.put("data/t/d", vec![]).unwrap(), 4);
    assert_eq!(s.files_created_after("data/t/", 3), vec!["data/t/d"]);
}
