//! Incremental search for a complete subdigraph (CS): a set of pages that all
//! link to each other.
//!
//! The key page's links are explored in relevance order. After each page is
//! loaded its links to other reachable pages are recorded, and the largest CS
//! containing that page is computed. The search stops as soon as a CS of the
//! requested size exists.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;
use url::Url;

use crate::dom::{get_links, DomTree, LinkSet};
use crate::fetcher::{LoadError, PageLoader};
use crate::hyperlink::{parse_hyperlink, resolve_url, HyperlinkError, HyperlinkPath};
use crate::relevance::{sort_links, RankedLink};

pub const DEFAULT_CS_SIZE: usize = 3;
pub const DEFAULT_MAX_LOADS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("`{0}` is not a reachable link")]
    NotReachable(Url),
    #[error("`{0}` was already processed")]
    AlreadyProcessed(Url),
    #[error("`{0}` has not been processed")]
    NotProcessed(Url),
}

/// Reachable links, the ones processed so far and the directed links observed
/// between them.
#[derive(Debug, Clone, Default)]
pub struct ConnectionGraph {
    reachable: Vec<Url>,
    index: HashMap<Url, usize>,
    processed: Vec<usize>,
    is_processed: Vec<bool>,
    edges: BTreeSet<(usize, usize)>,
}

impl ConnectionGraph {
    pub fn new<I: IntoIterator<Item = Url>>(reachable: I) -> Self {
        let mut g = Self::default();
        for url in reachable {
            if !g.index.contains_key(&url) {
                g.index.insert(url.clone(), g.reachable.len());
                g.reachable.push(url);
                g.is_processed.push(false);
            }
        }
        g
    }

    pub fn from_link_set(links: &LinkSet) -> Self {
        Self::new(links.iter().map(|l| l.absolute_url.clone()))
    }

    pub fn reachable(&self) -> &[Url] {
        &self.reachable
    }

    pub fn is_reachable(&self, url: &Url) -> bool {
        self.index.contains_key(url)
    }

    /// Processed links in processing order.
    pub fn processed(&self) -> impl Iterator<Item = &Url> + '_ {
        self.processed.iter().map(|&i| &self.reachable[i])
    }

    pub fn processed_len(&self) -> usize {
        self.processed.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Url, &Url)> + '_ {
        self.edges.iter().map(|&(a, b)| (&self.reachable[a], &self.reachable[b]))
    }

    pub fn has_edge(&self, from: &Url, to: &Url) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }

    fn mutual(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b)) && self.edges.contains(&(b, a))
    }

    pub fn mutually_adjacent(&self, a: &Url, b: &Url) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&a), Some(&b)) => self.mutual(a, b),
            _ => false,
        }
    }

    /// Marks `link` processed and records `link -> u` for every reachable `u`
    /// among `page_links`. Returns the number of new edges.
    pub fn record_page(&mut self, link: &Url, page_links: &LinkSet) -> Result<usize, GraphError> {
        let &from = self.index.get(link).ok_or_else(|| GraphError::NotReachable(link.clone()))?;
        if self.is_processed[from] {
            return Err(GraphError::AlreadyProcessed(link.clone()));
        }
        self.is_processed[from] = true;
        self.processed.push(from);
        let mut added = 0;
        for l in page_links.iter() {
            if let Some(&to) = self.index.get(&l.absolute_url) {
                if to != from && self.edges.insert((from, to)) {
                    added += 1;
                }
            }
        }
        Ok(added)
    }

    /// Largest set of processed links that contains `link`, is pairwise
    /// mutually linked and has at most `cap` members. Members are returned in
    /// processing order. Among equally large sets the one that comes first in
    /// processing order wins.
    pub fn maximal_cs_containing(&self, link: &Url, cap: usize) -> Result<Vec<Url>, GraphError> {
        let &root = self.index.get(link).ok_or_else(|| GraphError::NotReachable(link.clone()))?;
        if !self.is_processed[root] {
            return Err(GraphError::NotProcessed(link.clone()));
        }
        if cap == 0 {
            return Ok(Vec::new());
        }
        let candidates: Vec<usize> =
            self.processed.iter().copied().filter(|&v| v != root && self.mutual(root, v)).collect();
        let mut current = vec![root];
        let mut best = current.clone();
        self.extend_clique(&mut current, &candidates, &mut best, cap);

        let position: HashMap<usize, usize> = self.processed.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        best.sort_by_key(|v| position[v]);
        Ok(best.into_iter().map(|v| self.reachable[v].clone()).collect())
    }

    fn extend_clique(&self, current: &mut Vec<usize>, candidates: &[usize], best: &mut Vec<usize>, cap: usize) {
        if current.len() > best.len() {
            best.clone_from(current);
        }
        for (i, &v) in candidates.iter().enumerate() {
            if best.len() >= cap || current.len() + (candidates.len() - i) <= best.len() {
                return;
            }
            let next: Vec<usize> = candidates[i + 1..].iter().copied().filter(|&w| self.mutual(v, w)).collect();
            current.push(v);
            self.extend_clique(current, &next, best, cap);
            current.pop();
        }
    }

    /// Mutual pairs among `members`, as `(a, b)` with `a` before `b`.
    pub fn mutual_pairs(&self, members: &[Url]) -> Vec<(Url, Url)> {
        let mut out = Vec::new();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if self.mutually_adjacent(a, b) {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Upper bound on page loads, key page included.
    pub max_loads: usize,
    /// Keep links to other hosts in the reachable set.
    pub include_external: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { max_loads: DEFAULT_MAX_LOADS, include_external: false }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("CS size must be at least 1")]
    InvalidSize,
    #[error("invalid key page URL: {0}")]
    BadUrl(#[from] HyperlinkError),
    #[error("cannot load key page `{url}`: {source}")]
    KeyPageUnreachable { url: String, source: LoadError },
}

/// One loop iteration of the search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub url: String,
    pub hd: i64,
    pub loaded: bool,
    pub loads_attempted: usize,
    pub loads_succeeded: usize,
    /// Size of the largest CS containing this link (0 if the load failed).
    pub cs_size: usize,
}

#[derive(Debug, Clone)]
pub struct CsResult {
    pub key_page: Url,
    pub members: Vec<Url>,
    pub requested_n: usize,
    pub found_size: usize,
    /// Successful loads, key page included.
    pub loads_succeeded: usize,
    pub loads_attempted: usize,
    /// The load budget ran out before every link was explored.
    pub truncated: bool,
    pub edge_evidence: Vec<(Url, Url)>,
    pub ranked: Vec<RankedLink>,
    pub trace: Vec<TraceRecord>,
    pub graph: ConnectionGraph,
}

impl CsResult {
    /// True when no CS of the requested size was found.
    pub fn is_fallback(&self) -> bool {
        self.found_size < self.requested_n
    }

    pub fn report(&self, with_trace: bool) -> Report {
        Report {
            key_page: self.key_page.to_string(),
            requested_size: self.requested_n,
            found_size: self.found_size,
            members: self.members.iter().map(Url::to_string).collect(),
            loads_succeeded: self.loads_succeeded,
            loads_attempted: self.loads_attempted,
            truncated: self.truncated,
            trace: with_trace.then(|| self.trace.clone()),
        }
    }
}

/// JSON report shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub key_page: String,
    pub requested_size: usize,
    pub found_size: usize,
    pub members: Vec<String>,
    pub loads_succeeded: usize,
    pub loads_attempted: usize,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

/// Runs the full search from `initial_link`.
pub fn find_ncs<L: PageLoader + ?Sized>(
    loader: &L,
    initial_link: &str,
    n: usize,
    options: &SearchOptions,
) -> Result<CsResult, SearchError> {
    if n == 0 {
        return Err(SearchError::InvalidSize);
    }
    let key_url = resolve_url(initial_link, None)?;
    let reference = parse_hyperlink(initial_link, None)?;

    let unreachable = |source| SearchError::KeyPageUnreachable { url: key_url.to_string(), source };
    let key_page = loader.load(&key_url).map_err(unreachable)?;
    let key_tree = DomTree::parse(&key_page.body).map_err(|_| unreachable(LoadError::NotHtml))?;

    // The domain follows the page actually served, in case of a host redirect.
    let domain = (!options.include_external).then(|| HyperlinkPath::from_url(&key_page.final_url)).transpose()?;
    let reachable = get_links(&key_tree, &key_url, Some(&key_page.final_url), domain.as_ref());
    let ranked = sort_links(&reachable.links, &reference);

    let mut graph = ConnectionGraph::from_link_set(&reachable);
    let mut loads_attempted = 1;
    let mut loads_succeeded = 1;
    let mut best: Vec<Url> = Vec::new();
    let mut trace = Vec::new();
    let mut truncated = false;

    for r in &ranked {
        if loads_attempted >= options.max_loads {
            truncated = true;
            break;
        }
        let link = &r.link.absolute_url;
        loads_attempted += 1;
        let page = loader.load(link).ok().and_then(|p| DomTree::parse(&p.body).ok().map(|t| (p, t)));
        let Some((page, tree)) = page else {
            trace.push(TraceRecord {
                url: link.to_string(),
                hd: r.hd,
                loaded: false,
                loads_attempted,
                loads_succeeded,
                cs_size: 0,
            });
            continue;
        };
        loads_succeeded += 1;

        let page_links = get_links(&tree, link, Some(&page.final_url), domain.as_ref());
        graph.record_page(link, &page_links).expect("sorted links are reachable and unique");
        let cs = graph.maximal_cs_containing(link, n).expect("link was just processed");
        trace.push(TraceRecord {
            url: link.to_string(),
            hd: r.hd,
            loaded: true,
            loads_attempted,
            loads_succeeded,
            cs_size: cs.len(),
        });
        if cs.len() > best.len() {
            best = cs;
        }
        if best.len() == n {
            break;
        }
    }
    let edge_evidence = graph.mutual_pairs(&best);
    Ok(CsResult {
        key_page: key_url,
        found_size: best.len(),
        members: best,
        requested_n: n,
        loads_succeeded,
        loads_attempted,
        truncated,
        edge_evidence,
        ranked,
        trace,
        graph,
    })
}
