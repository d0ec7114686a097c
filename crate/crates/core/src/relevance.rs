//! Link relevance and DOM relevance preorders, and the two-level link sort
//! that combines them.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::dom::{d_distance, LinkNode};
use crate::hyperlink::{h_distance, HyperlinkPath};

/// A link placed in exploration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedLink {
    pub link: LinkNode,
    /// Hyperlink distance from the reference hyperlink to this link.
    pub hd: i64,
    /// Minimum DOM distance to the links already emitted from the same
    /// distance block, `None` for the first link of a block.
    pub min_dd: Option<usize>,
}

/// Rank of a hyperlink distance: 0 first, then +1, +2, ... then -1, -2, ...
fn distance_rank(hd: i64) -> (u8, u64) {
    if hd >= 0 {
        (0, hd as u64)
    } else {
        (1, hd.unsigned_abs())
    }
}

/// Compares two hyperlink distances under link relevance. `Less` means the
/// first is more relevant.
pub fn compare_distances(hd1: i64, hd2: i64) -> Ordering {
    distance_rank(hd1).cmp(&distance_rank(hd2))
}

pub fn link_rel_compare(n1: &LinkNode, n2: &LinkNode, h: &HyperlinkPath) -> Ordering {
    compare_distances(h_distance(h, &n1.hyperlink), h_distance(h, &n2.hyperlink))
}

fn min_dom_distance(candidate: &LinkNode, selected: &[&LinkNode]) -> Option<usize> {
    selected.iter().map(|s| d_distance(&s.node_path, &candidate.node_path)).min()
}

/// Picks the candidate farthest (by minimum DOM distance) from every link in
/// `selected`. Ties, including the empty-`selected` case, go to the earliest
/// node in document order. Returns the index into `candidates`.
///
/// Panics if `candidates` is empty.
pub fn dom_rel_select(candidates: &[&LinkNode], selected: &[&LinkNode]) -> usize {
    assert!(!candidates.is_empty(), "dom_rel_select needs at least one candidate");
    let mut best = 0;
    let mut best_dd = min_dom_distance(candidates[0], selected);
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let dd = min_dom_distance(c, selected);
        let better = match dd.cmp(&best_dd) {
            Ordering::Greater => true,
            Ordering::Equal => c.node_path < candidates[best].node_path,
            Ordering::Less => false,
        };
        if better {
            best = i;
            best_dd = dd;
        }
    }
    best
}

/// Orders `links` for exploration relative to the key page hyperlink `h`.
///
/// Links are grouped by hyperlink distance, groups are ordered by link
/// relevance, and each group is emitted greedily by DOM relevance against the
/// links already emitted from that group.
pub fn sort_links(links: &[LinkNode], h: &HyperlinkPath) -> Vec<RankedLink> {
    let mut with_hd: Vec<(i64, &LinkNode)> = links.iter().map(|l| (h_distance(h, &l.hyperlink), l)).collect();
    with_hd.sort_by(|a, b| compare_distances(a.0, b.0));

    let mut out = Vec::with_capacity(links.len());
    for block in with_hd.chunk_by(|a, b| a.0 == b.0) {
        let hd = block[0].0;
        let mut remaining: Vec<&LinkNode> = block.iter().map(|(_, l)| *l).collect();
        let mut emitted: Vec<&LinkNode> = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let pick = dom_rel_select(&remaining, &emitted);
            let link = remaining.remove(pick);
            out.push(RankedLink { link: link.clone(), hd, min_dd: min_dom_distance(link, &emitted) });
            emitted.push(link);
        }
    }
    out
}

/// One tab-separated line per link: rank, signed distance, node path,
/// hyperlink and URL.
pub fn explain(sorted: &[RankedLink]) -> String {
    let mut out = String::new();
    for (rank, r) in sorted.iter().enumerate() {
        let _ =
            writeln!(out, "{rank}\t{:+}\t{}\t{}\t{}", r.hd, r.link.node_path, r.link.hyperlink, r.link.absolute_url);
    }
    out
}
