//! Page loaders: a fixture-corpus loader for offline runs and a live HTTP
//! loader with per-host politeness. Both implement [`PageLoader`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;
use url::Url;

use crate::hyperlink::{resolve_url, HyperlinkPath};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DEFAULT_USER_AGENT: &str = concat!("keypage/", env!("CARGO_PKG_VERSION"));
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_DELAY: Duration = Duration::from_millis(500);
pub const MAX_REDIRECTS: usize = 5;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("request timed out")]
    Timeout,
    #[error("too many redirects")]
    TooManyRedirects,
    #[error("HTTP status {0}")]
    HttpStatus(u16),
    #[error("not an HTML document")]
    NotHtml,
    #[error("`{0}` is not in the fixture corpus")]
    NotInCorpus(String),
    #[error("`{url}` is outside the allowed host `{host}`")]
    OutsideDomain { url: String, host: String },
    #[error("unsupported URL `{0}`")]
    BadUrl(String),
    #[error("network error: {0}")]
    Network(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct PageLoadResult {
    pub requested_url: Url,
    /// URL after redirects; equal to `requested_url` for fixture loads.
    pub final_url: Url,
    pub body: Vec<u8>,
    pub content_type: String,
    pub elapsed: Duration,
}

pub trait PageLoader {
    fn load(&self, url: &Url) -> Result<PageLoadResult, LoadError>;
}

impl<L: PageLoader + ?Sized> PageLoader for &L {
    fn load(&self, url: &Url) -> Result<PageLoadResult, LoadError> {
        (**self).load(url)
    }
}

fn is_html_content_type(ct: &str) -> bool {
    let mime = ct.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
    mime == "text/html" || mime == "application/xhtml+xml"
}

fn host_word(url: &Url) -> Result<String, LoadError> {
    HyperlinkPath::from_url(url).map(|h| h.head().to_string()).map_err(|_| LoadError::BadUrl(url.to_string()))
}

fn check_host(url: &Url, allowed: Option<&str>) -> Result<String, LoadError> {
    let host = host_word(url)?;
    match allowed {
        Some(a) if a != host => Err(LoadError::OutsideDomain { url: url.to_string(), host: a.to_string() }),
        _ => Ok(host),
    }
}

// --- fixture corpus ---------------------------------------------------------

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed manifest: {0}")]
    Malformed(String),
    #[error("manifest entry `{url}` points at missing file {path}")]
    MissingFile { url: String, path: PathBuf },
    #[error("duplicate manifest URL `{0}`")]
    DuplicateUrl(String),
}

/// URL-to-file map of an offline corpus.
///
/// On disk this is `manifest.json`:
/// `{"corpus": "...", "seed": 7, "entries": {"<url>": "<relative path>"}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureManifest {
    pub corpus: String,
    pub seed: u64,
    pub entries: BTreeMap<String, PathBuf>,
    /// Directory the entry paths are relative to.
    pub root: PathBuf,
}

/// Map entries kept in file order so duplicates can be reported.
struct EntryList(Vec<(String, String)>);

impl<'de> Deserialize<'de> for EntryList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;
        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = EntryList;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map of URL to relative path")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<EntryList, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, String>()? {
                    out.push(entry);
                }
                Ok(EntryList(out))
            }
        }
        deserializer.deserialize_map(EntriesVisitor)
    }
}

#[derive(Deserialize)]
struct RawManifest {
    corpus: String,
    seed: u64,
    entries: EntryList,
}

#[derive(Serialize)]
struct ManifestOut<'a> {
    corpus: &'a str,
    seed: u64,
    entries: BTreeMap<&'a str, String>,
}

/// Normalized form used as the corpus key.
pub fn normalize_url(raw: &str) -> Option<String> {
    resolve_url(raw, None).ok().map(String::from)
}

/// Loads `manifest.json` from `path`, which may be the file itself or the
/// corpus directory.
pub fn load_manifest(path: &Path) -> Result<FixtureManifest, ManifestError> {
    let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file).map_err(|source| ManifestError::Io { path: file.clone(), source })?;
    let raw: RawManifest = serde_json::from_str(&text).map_err(|e| ManifestError::Malformed(e.to_string()))?;
    let root = file.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut entries = BTreeMap::new();
    for (url, rel) in raw.entries.0 {
        let key = normalize_url(&url).ok_or_else(|| ManifestError::Malformed(format!("bad entry URL `{url}`")))?;
        let rel = PathBuf::from(rel);
        if !root.join(&rel).is_file() {
            return Err(ManifestError::MissingFile { url, path: root.join(rel) });
        }
        if entries.insert(key.clone(), rel).is_some() {
            return Err(ManifestError::DuplicateUrl(key));
        }
    }
    Ok(FixtureManifest { corpus: raw.corpus, seed: raw.seed, entries, root })
}

impl FixtureManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn path_for(&self, url: &Url) -> Option<PathBuf> {
        let key = normalize_url(url.as_str())?;
        self.entries.get(&key).map(|rel| self.root.join(rel))
    }

    /// Writes `manifest.json` into `root` with keys in sorted order.
    pub fn write(&self) -> std::io::Result<PathBuf> {
        let out = ManifestOut {
            corpus: &self.corpus,
            seed: self.seed,
            entries: self.entries.iter().map(|(k, v)| (k.as_str(), v.to_string_lossy().replace('\\', "/"))).collect(),
        };
        let path = self.root.join(MANIFEST_FILE);
        let mut json = serde_json::to_string_pretty(&out).map_err(std::io::Error::other)?;
        json.push('\n');
        fs::write(&path, json)?;
        Ok(path)
    }
}

/// Serves pages from a [`FixtureManifest`].
#[derive(Debug)]
pub struct FixtureLoader {
    manifest: FixtureManifest,
    allowed_host: Option<String>,
    requests: Mutex<Vec<Url>>,
}

impl FixtureLoader {
    pub fn new(manifest: FixtureManifest) -> Self {
        Self { manifest, allowed_host: None, requests: Mutex::new(Vec::new()) }
    }

    pub fn open(path: &Path) -> Result<Self, ManifestError> {
        load_manifest(path).map(Self::new)
    }

    /// Refuse URLs whose host word differs from `host`.
    pub fn restrict_to_host(mut self, host: impl Into<String>) -> Self {
        self.allowed_host = Some(host.into());
        self
    }

    pub fn manifest(&self) -> &FixtureManifest {
        &self.manifest
    }

    /// Every URL passed to `load`, in call order.
    pub fn requests(&self) -> Vec<Url> {
        self.requests.lock().unwrap().clone()
    }
}

impl PageLoader for FixtureLoader {
    fn load(&self, url: &Url) -> Result<PageLoadResult, LoadError> {
        let start = Instant::now();
        check_host(url, self.allowed_host.as_deref())?;
        self.requests.lock().unwrap().push(url.clone());
        let path = self.manifest.path_for(url).ok_or_else(|| LoadError::NotInCorpus(url.to_string()))?;
        let body = fs::read(path)?;
        if body.is_empty() {
            return Err(LoadError::NotHtml);
        }
        Ok(PageLoadResult {
            requested_url: url.clone(),
            final_url: url.clone(),
            body,
            content_type: "text/html".to_string(),
            elapsed: start.elapsed(),
        })
    }
}

// --- live HTTP --------------------------------------------------------------

pub trait Clock: Send + Sync {
    fn now(&self) -> Instant;
    fn sleep(&self, d: Duration);
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Instant {
        Instant::now()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d)
    }
}

#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub user_agent: String,
    pub timeout: Duration,
    /// Minimum gap between two requests to the same host.
    pub delay: Duration,
    pub allowed_host: Option<String>,
    pub use_system_proxy: bool,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            user_agent: DEFAULT_USER_AGENT.to_string(),
            timeout: DEFAULT_TIMEOUT,
            delay: DEFAULT_DELAY,
            allowed_host: None,
            use_system_proxy: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestRecord {
    pub url: Url,
    pub at: Instant,
}

#[derive(Default)]
struct PolitenessState {
    last_request: HashMap<String, Instant>,
    log: Vec<RequestRecord>,
}

/// Blocking HTTP loader. Requests are serialized; consecutive requests to one
/// host are spaced by at least `delay`.
pub struct LiveLoader {
    client: reqwest::blocking::Client,
    config: LiveConfig,
    clock: Arc<dyn Clock>,
    state: Mutex<PolitenessState>,
}

impl LiveLoader {
    pub fn new(config: LiveConfig) -> Result<Self, LoadError> {
        Self::with_clock(config, Arc::new(SystemClock))
    }

    pub fn with_clock(config: LiveConfig, clock: Arc<dyn Clock>) -> Result<Self, LoadError> {
        let mut builder = reqwest::blocking::Client::builder()
            .user_agent(config.user_agent.clone())
            .timeout(config.timeout)
            .redirect(reqwest::redirect::Policy::limited(MAX_REDIRECTS));
        if !config.use_system_proxy {
            builder = builder.no_proxy();
        }
        let client = builder.build().map_err(|e| LoadError::Network(e.to_string()))?;
        Ok(Self { client, config, clock, state: Mutex::new(PolitenessState::default()) })
    }

    pub fn requests(&self) -> Vec<RequestRecord> {
        self.state.lock().unwrap().log.clone()
    }
}

impl PageLoader for LiveLoader {
    fn load(&self, url: &Url) -> Result<PageLoadResult, LoadError> {
        let host = check_host(url, self.config.allowed_host.as_deref())?;

        let mut state = self.state.lock().unwrap();
        if let Some(&last) = state.last_request.get(&host) {
            let since = self.clock.now().saturating_duration_since(last);
            if since < self.config.delay {
                self.clock.sleep(self.config.delay - since);
            }
        }
        let at = self.clock.now();
        state.last_request.insert(host, at);
        state.log.push(RequestRecord { url: url.clone(), at });

        let start = Instant::now();
        let resp = self.client.get(url.clone()).send().map_err(map_reqwest_error)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(LoadError::HttpStatus(status.as_u16()));
        }
        let final_url = resp.url().clone();
        let content_type =
            resp.headers().get(reqwest::header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("").to_string();
        if !is_html_content_type(&content_type) {
            return Err(LoadError::NotHtml);
        }
        let body = resp.bytes().map_err(map_reqwest_error)?.to_vec();
        if body.is_empty() {
            return Err(LoadError::NotHtml);
        }
        Ok(PageLoadResult { requested_url: url.clone(), final_url, body, content_type, elapsed: start.elapsed() })
    }
}

fn map_reqwest_error(e: reqwest::Error) -> LoadError {
    if e.is_timeout() {
        LoadError::Timeout
    } else if e.is_redirect() {
        LoadError::TooManyRedirects
    } else {
        LoadError::Network(e.to_string())
    }
}
