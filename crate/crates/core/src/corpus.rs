//! Corpus manifests, document loading and e-book boilerplate removal.
//!
//! A manifest is a tab-separated text file. Blank lines and lines starting
//! with `#` are ignored. Two record kinds exist:
//!
//! ```text
//! category<TAB>NAME
//! doc<TAB>DOC_ID<TAB>CATEGORY<TAB>SOURCE<TAB>strip|raw[<TAB>NOTE]
//! ```
//!
//! Categories must be declared before documents refer to them. `SOURCE` is
//! either an `http://`/`https://` URL or a path, resolved relative to the
//! manifest's directory. `NOTE` is free text carried into the document's
//! `source_note` (used to record stand-in texts).
//!
//! Remote sources are cached under `$LETTERDYN_CACHE_DIR` (default
//! `$XDG_CACHE_HOME/letterdyn`, then `$HOME/.cache/letterdyn`) as
//! `<sha256(url) hex>.txt`, written through a temporary file and renamed
//! into place.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

pub const CACHE_DIR_ENV: &str = "LETTERDYN_CACHE_DIR";
pub const START_MARKER: &str = "*** START OF";
pub const END_MARKER: &str = "*** END OF";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: bad {field}: {message}")]
    Parse { line: usize, field: &'static str, message: String },
    #[error("line {line}: duplicate doc id '{doc_id}' (first seen on line {first_line})")]
    DuplicateDocId { doc_id: String, line: usize, first_line: usize },
    #[error("line {line}: category '{category}' was not declared")]
    UnknownCategory { category: String, line: usize },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("fetching {url}: {message}")]
    Fetch { url: String, message: String },
    #[error("document '{doc_id}' is empty after loading")]
    EmptyAfterStrip { doc_id: String },
    #[error("end marker on line {end_line} precedes any start marker")]
    MarkerOrder { end_line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Local(PathBuf),
    Remote(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Local(p) => write!(f, "{}", p.display()),
            Source::Remote(u) => f.write_str(u),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub category: String,
    pub source: Source,
    pub strip_boilerplate: bool,
    pub note: Option<String>,
    /// 1-based line in the manifest.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusManifest {
    pub categories: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    /// Parses manifest text; relative local sources are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<CorpusManifest, CorpusError> {
        let mut m = CorpusManifest::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            let parse_err = |field, message: &str| CorpusError::Parse { line, field, message: message.to_owned() };
            match fields[0] {
                "category" => {
                    if fields.len() != 2 {
                        return Err(parse_err("record", "expected: category<TAB>NAME"));
                    }
                    let name = fields[1];
                    if !valid_name(name) {
                        return Err(parse_err("category", "names use [A-Za-z0-9_.-]"));
                    }
                    if m.categories.iter().any(|c| c == name) {
                        return Err(parse_err("category", "declared twice"));
                    }
                    m.categories.push(name.to_owned());
                }
                "doc" => {
                    if !(5..=6).contains(&fields.len()) {
                        return Err(parse_err("record", "expected: doc<TAB>ID<TAB>CATEGORY<TAB>SOURCE<TAB>strip|raw[<TAB>NOTE]"));
                    }
                    let doc_id = fields[1];
                    if !valid_name(doc_id) {
                        return Err(parse_err("doc_id", "ids use [A-Za-z0-9_.-]"));
                    }
                    if let Some(&first_line) = seen.get(doc_id) {
                        return Err(CorpusError::DuplicateDocId { doc_id: doc_id.to_owned(), line, first_line });
                    }
                    let category = fields[2];
                    if !m.categories.iter().any(|c| c == category) {
                        return Err(CorpusError::UnknownCategory { category: category.to_owned(), line });
                    }
                    let src = fields[3].trim();
                    if src.is_empty() {
                        return Err(parse_err("source", "empty"));
                    }
                    let source = if src.starts_with("http://") || src.starts_with("https://") {
                        Source::Remote(src.to_owned())
                    } else {
                        Source::Local(base.join(src))
                    };
                    let strip_boilerplate = match fields[4] {
                        "strip" => true,
                        "raw" => false,
                        _ => return Err(parse_err("strip flag", "expected 'strip' or 'raw'")),
                    };
                    let note = fields.get(5).map(|s| s.trim().to_owned()).filter(|s| !s.is_empty());
                    seen.insert(doc_id.to_owned(), line);
                    m.entries.push(ManifestEntry {
                        doc_id: doc_id.to_owned(),
                        category: category.to_owned(),
                        source,
                        strip_boilerplate,
                        note,
                        line,
                    });
                }
                other => {
                    return Err(CorpusError::Parse {
                        line,
                        field: "record",
                        message: format!("unknown record kind '{other}'"),
                    })
                }
            }
        }
        Ok(m)
    }

    /// Document count per declared category, in declaration order.
    pub fn category_counts(&self) -> Vec<(String, usize)> {
        self.categories
            .iter()
            .map(|c| (c.clone(), self.entries.iter().filter(|e| &e.category == c).count()))
            .collect()
    }

    pub fn entries_in<'a>(&'a self, category: &'a str) -> impl Iterator<Item = &'a ManifestEntry> + 'a {
        self.entries.iter().filter(move |e| e.category == category)
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b"_.-".contains(&b))
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusManifest, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_owned(), source })?;
    CorpusManifest::parse(&text, path.parent().unwrap_or(Path::new("")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub category: String,
    pub text: String,
    pub source_note: String,
}

/// Result of [`strip_boilerplate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stripped<'a> {
    pub text: &'a str,
    /// False when no markers were found and the input came back unchanged.
    pub markers_found: bool,
}

/// Returns the lines between the e-book start and end markers.
///
/// The body begins after the last start-marker line that precedes the first
/// end-marker line (so stripping twice is the same as stripping once) and
/// stops before that end-marker line. A start marker with no end marker
/// keeps everything after it. Leading and trailing blank lines of the body
/// are dropped, as is the final line break.
pub fn strip_boilerplate(text: &str) -> Result<Stripped<'_>, CorpusError> {
    let mut start: Option<usize> = None; // byte offset just past the start-marker line
    let mut end: Option<usize> = None; // byte offset of the end-marker line
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if line.contains(END_MARKER) {
            if start.is_none() {
                return Err(CorpusError::MarkerOrder { end_line: i + 1 });
            }
            end = Some(offset);
            break;
        }
        offset += line.len();
        if line.contains(START_MARKER) {
            start = Some(offset);
        }
    }
    let Some(start) = start else {
        return Ok(Stripped { text, markers_found: false });
    };
    let body = &text[start..end.unwrap_or(text.len())];
    Ok(Stripped { text: trim_blank_lines(body), markers_found: true })
}

fn trim_blank_lines(body: &str) -> &str {
    let mut lo = 0;
    let mut hi = 0;
    let mut seen_content = false;
    let mut offset = 0;
    for line in body.split_inclusive('\n') {
        if !line.trim().is_empty() {
            if !seen_content {
                lo = offset;
                seen_content = true;
            }
            hi = offset + line.trim_end_matches(['\n', '\r']).len();
        }
        offset += line.len();
    }
    &body[lo..hi]
}

/// Network settings for remote sources.
#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub timeout: Duration,
    /// Responses larger than this are rejected.
    pub max_bytes: u64,
    /// Extra attempts after the first failure.
    pub retries: u32,
    pub cache_dir: PathBuf,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            timeout: Duration::from_secs(30),
            max_bytes: 32 * 1024 * 1024,
            retries: 1,
            cache_dir: default_cache_dir(),
        }
    }
}

pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return PathBuf::from(dir).join("letterdyn");
    }
    if let Some(home) = std::env::var_os("HOME").filter(|d| !d.is_empty()) {
        return PathBuf::from(home).join(".cache").join("letterdyn");
    }
    std::env::temp_dir().join("letterdyn-cache")
}

/// Cache file for `url`.
pub fn cache_path(cache_dir: &Path, url: &str) -> PathBuf {
    cache_dir.join(format!("{}.txt", hex::encode(Sha256::digest(url.as_bytes()))))
}

/// Returns the bytes at `url`, from the cache when present. The boolean is
/// true on a cache hit.
pub fn fetch(url: &str, cfg: &FetchConfig) -> Result<(Vec<u8>, bool), CorpusError> {
    let cached = cache_path(&cfg.cache_dir, url);
    if let Ok(bytes) = std::fs::read(&cached) {
        return Ok((bytes, true));
    }
    let fetch_err = |message: String| CorpusError::Fetch { url: url.to_owned(), message };
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(cfg.timeout))
        .http_status_as_error(false)
        .build()
        .into();

    let mut last = String::new();
    let mut bytes = None;
    for _ in 0..=cfg.retries {
        match fetch_once(&agent, url, cfg.max_bytes) {
            Ok(b) => {
                bytes = Some(b);
                break;
            }
            Err(FetchFailure::Fatal(m)) => return Err(fetch_err(m)),
            Err(FetchFailure::Transient(m)) => last = m,
        }
    }
    let bytes = bytes.ok_or_else(|| fetch_err(last))?;

    let io_err = |source| CorpusError::Io { path: cfg.cache_dir.clone(), source };
    std::fs::create_dir_all(&cfg.cache_dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&cfg.cache_dir).map_err(io_err)?;
    io::Write::write_all(&mut tmp, &bytes).map_err(io_err)?;
    tmp.persist(&cached).map_err(|e| io_err(e.error))?;
    Ok((bytes, false))
}

enum FetchFailure {
    /// Worth retrying: connection problems, timeouts, 5xx.
    Transient(String),
    Fatal(String),
}

fn fetch_once(agent: &ureq::Agent, url: &str, max_bytes: u64) -> Result<Vec<u8>, FetchFailure> {
    let mut resp = agent.get(url).call().map_err(|e| FetchFailure::Transient(e.to_string()))?;
    let status = resp.status();
    if status.is_server_error() {
        return Err(FetchFailure::Transient(format!("HTTP {status}")));
    }
    if !status.is_success() {
        return Err(FetchFailure::Fatal(format!("HTTP {status}")));
    }
    match resp.body_mut().with_config().limit(max_bytes).read_to_vec() {
        Ok(buf) => Ok(buf),
        Err(ureq::Error::BodyExceedsLimit(_)) => Err(FetchFailure::Fatal(format!("response exceeds {max_bytes} bytes"))),
        Err(e) => Err(FetchFailure::Transient(e.to_string())),
    }
}

/// Loads one manifest entry with the default fetch settings.
pub fn load_document(entry: &ManifestEntry) -> Result<Document, CorpusError> {
    load_document_with(entry, &FetchConfig::default())
}

pub fn load_document_with(entry: &ManifestEntry, cfg: &FetchConfig) -> Result<Document, CorpusError> {
    let (bytes, origin) = match &entry.source {
        Source::Local(path) => {
            let b = std::fs::read(path).map_err(|source| CorpusError::Io { path: path.clone(), source })?;
            (b, format!("file {}", path.display()))
        }
        Source::Remote(url) => {
            let (b, hit) = fetch(url, cfg)?;
            (b, format!("url {url}{}", if hit { " (cached)" } else { "" }))
        }
    };
    let decoded = String::from_utf8_lossy(&bytes);
    let mut note = format!("{origin}; {} bytes", bytes.len());
    let text = if entry.strip_boilerplate {
        let s = strip_boilerplate(&decoded)?;
        note.push_str(if s.markers_found { "; boilerplate stripped" } else { "; no boilerplate markers found" });
        s.text.to_owned()
    } else {
        decoded.into_owned()
    };
    if text.trim().is_empty() {
        return Err(CorpusError::EmptyAfterStrip { doc_id: entry.doc_id.clone() });
    }
    if let Some(n) = &entry.note {
        note.push_str("; ");
        note.push_str(n);
    }
    Ok(Document { doc_id: entry.doc_id.clone(), category: entry.category.clone(), text, source_note: note })
}

/// Loads every entry, in manifest order, keeping one result per entry.
/// Loads run on scoped threads; results are independent of scheduling.
pub fn load_all(manifest: &CorpusManifest, cfg: &FetchConfig) -> Vec<Result<Document, CorpusError>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    let chunk = manifest.entries.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = manifest
            .entries
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|e| load_document_with(e, cfg)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("loader thread panicked")).collect()
    })
}
