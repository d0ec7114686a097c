#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;
use std::time::Duration;

use keypage::dom::{get_links, DomTree};
use keypage::fetcher::{LoadError, PageLoadResult, PageLoader};
use keypage::FixtureManifest;
use url::Url;

/// In-memory site: URL -> HTML.
#[derive(Default)]
pub struct MapLoader {
    pages: HashMap<Url, String>,
    redirects: HashMap<Url, Url>,
}

impl MapLoader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn page(mut self, url: &str, html: impl Into<String>) -> Self {
        self.pages.insert(Url::parse(url).unwrap(), html.into());
        self
    }

    /// Serve `to`'s content when `from` is requested, reporting `to` as final URL.
    pub fn redirect(mut self, from: &str, to: &str) -> Self {
        self.redirects.insert(Url::parse(from).unwrap(), Url::parse(to).unwrap());
        self
    }
}

impl PageLoader for MapLoader {
    fn load(&self, url: &Url) -> Result<PageLoadResult, LoadError> {
        let final_url = self.redirects.get(url).unwrap_or(url);
        let body = self.pages.get(final_url).ok_or_else(|| LoadError::NotInCorpus(url.to_string()))?;
        Ok(PageLoadResult {
            requested_url: url.clone(),
            final_url: final_url.clone(),
            body: body.clone().into_bytes(),
            content_type: "text/html".into(),
            elapsed: Duration::ZERO,
        })
    }
}

/// Records every call before delegating.
pub struct CountingLoader<L> {
    pub inner: L,
    calls: Mutex<Vec<Url>>,
}

impl<L> CountingLoader<L> {
    pub fn new(inner: L) -> Self {
        Self { inner, calls: Mutex::new(Vec::new()) }
    }

    pub fn calls(&self) -> Vec<Url> {
        self.calls.lock().unwrap().clone()
    }
}

impl<L: PageLoader> PageLoader for CountingLoader<L> {
    fn load(&self, url: &Url) -> Result<PageLoadResult, LoadError> {
        self.calls.lock().unwrap().push(url.clone());
        self.inner.load(url)
    }
}

pub fn anchors_page(hrefs: &[&str]) -> String {
    let items: String = hrefs.iter().map(|h| format!("<li><a href=\"{h}\">x</a></li>")).collect();
    format!("<html><body><nav><ul>{items}</ul></nav></body></html>")
}

/// Outgoing links of a corpus page, re-read from disk.
pub fn corpus_links(manifest: &FixtureManifest, url: &Url) -> BTreeSet<Url> {
    let body = std::fs::read(manifest.path_for(url).expect("in corpus")).unwrap();
    let tree = DomTree::parse(&body).unwrap();
    get_links(&tree, url, None, None).iter().map(|l| l.absolute_url.clone()).collect()
}

/// Size of the largest pairwise-adjacent subset, by enumerating every subset.
pub fn brute_max_clique(nodes: usize, adjacent: impl Fn(usize, usize) -> bool) -> usize {
    assert!(nodes <= 25, "exhaustive enumeration only for small graphs");
    let mut best = 0;
    for mask in 0u32..(1u32 << nodes) {
        let members: Vec<usize> = (0..nodes).filter(|i| mask & (1 << i) != 0).collect();
        if members.len() <= best {
            continue;
        }
        if members.iter().enumerate().all(|(x, &a)| members[x + 1..].iter().all(|&b| adjacent(a, b))) {
            best = members.len();
        }
    }
    best
}
