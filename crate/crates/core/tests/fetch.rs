//! Remote sources against a scripted loopback HTTP server.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use letterdyn::corpus::{cache_path, fetch, load_document_with, CorpusError, CorpusManifest, FetchConfig};
use tempfile::TempDir;

struct Server {
    base: String,
    hits: Arc<AtomicUsize>,
}

/// Serves `script` responses in order, one per connection, then stops
/// accepting.
fn serve(script: Vec<(u16, Vec<u8>)>) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    std::thread::spawn(move || {
        for (status, body) in script {
            let Ok((mut stream, _)) = listener.accept() else { return };
            counter.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            while reader.read_line(&mut line).is_ok_and(|n| n > 0) {
                if line == "\r\n" {
                    break;
                }
                line.clear();
            }
            let head = format!(
                "HTTP/1.1 {status} X\r\nContent-Length: {}\r\nContent-Type: text/plain\r\nConnection: close\r\n\r\n",
                body.len()
            );
            let _ = stream.write_all(head.as_bytes());
            let _ = stream.write_all(&body);
            let _ = stream.flush();
        }
    });
    Server { base, hits }
}

fn config(cache: &Path) -> FetchConfig {
    FetchConfig { timeout: Duration::from_secs(10), max_bytes: 1024, retries: 1, cache_dir: cache.to_path_buf() }
}

const BOOK: &[u8] = b"Produced by volunteers\n*** START OF THE BOOK ***\nCall me Ishmael.\n*** END OF THE BOOK ***\nlicense";

#[test]
fn retries_server_error_then_caches() {
    let cache = TempDir::new().unwrap();
    let srv = serve(vec![(503, b"busy".to_vec()), (200, BOOK.to_vec())]);
    let url = format!("{}/book.txt", srv.base);
    let cfg = config(cache.path());

    let (bytes, hit) = fetch(&url, &cfg).unwrap();
    assert_eq!(bytes, BOOK);
    assert!(!hit);
    assert_eq!(srv.hits.load(Ordering::SeqCst), 2);
    assert_eq!(std::fs::read(cache_path(cache.path(), &url)).unwrap(), BOOK);

    // second call never reaches the network
    let (bytes, hit) = fetch(&url, &cfg).unwrap();
    assert_eq!(bytes, BOOK);
    assert!(hit);
    assert_eq!(srv.hits.load(Ordering::SeqCst), 2);
}

#[test]
fn client_errors_are_not_retried() {
    let cache = TempDir::new().unwrap();
    let srv = serve(vec![(404, b"gone".to_vec()), (200, BOOK.to_vec())]);
    let url = format!("{}/missing.txt", srv.base);
    let err = fetch(&url, &config(cache.path())).unwrap_err();
    assert!(matches!(&err, CorpusError::Fetch { message, .. } if message.contains("404")), "{err}");
    assert_eq!(srv.hits.load(Ordering::SeqCst), 1);
    assert!(!cache_path(cache.path(), &url).exists());
}

#[test]
fn retries_are_bounded() {
    let cache = TempDir::new().unwrap();
    let srv = serve(vec![(500, vec![]), (502, vec![]), (200, BOOK.to_vec())]);
    let url = format!("{}/flaky.txt", srv.base);
    let err = fetch(&url, &config(cache.path())).unwrap_err();
    assert!(err.to_string().contains("502"), "{err}");
    assert_eq!(srv.hits.load(Ordering::SeqCst), 2);
}

#[test]
fn oversized_body_is_rejected_and_not_cached() {
    let cache = TempDir::new().unwrap();
    let srv = serve(vec![(200, vec![b'a'; 4096])]);
    let url = format!("{}/huge.txt", srv.base);
    let err = fetch(&url, &config(cache.path())).unwrap_err();
    assert!(err.to_string().contains("exceeds"), "{err}");
    assert!(!cache_path(cache.path(), &url).exists());
}

#[test]
fn remote_manifest_entry_is_stripped() {
    let cache = TempDir::new().unwrap();
    let srv = serve(vec![(200, BOOK.to_vec())]);
    let manifest = CorpusManifest::parse(
        &format!("category\tnovel\ndoc\tmoby\tnovel\t{}/moby.txt\tstrip\tchapter one\n", srv.base),
        Path::new("."),
    )
    .unwrap();
    let cfg = config(cache.path());
    let doc = load_document_with(&manifest.entries[0], &cfg).unwrap();
    assert_eq!(doc.text, "Call me Ishmael.");
    assert!(doc.source_note.contains("boilerplate stripped"), "{}", doc.source_note);
    assert!(doc.source_note.ends_with("chapter one"));

    let again = load_document_with(&manifest.entries[0], &cfg).unwrap();
    assert_eq!(again.text, doc.text);
    assert!(again.source_note.contains("(cached)"));
}

#[test]
fn unreachable_host_is_a_fetch_error() {
    // bind then drop to get a port with nothing listening
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cache = TempDir::new().unwrap();
    let mut cfg = config(cache.path());
    cfg.retries = 0;
    let err = fetch(&format!("http://127.0.0.1:{port}/x"), &cfg).unwrap_err();
    assert!(matches!(err, CorpusError::Fetch { .. }));
}
