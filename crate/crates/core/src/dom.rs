//! Element trees, DOM paths and hyperlink node extraction.

use std::collections::HashSet;
use std::fmt;

use scraper::{ElementRef, Html};
use serde::Serialize;
use thiserror::Error;
use url::Url;

use crate::hyperlink::{resolve_url, HyperlinkError, HyperlinkPath};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomError {
    #[error("content is not HTML")]
    NotHtml,
    #[error("unknown node {0:?}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
pub struct Element {
    pub tag: String,
    pub attrs: Vec<(String, String)>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

/// Element-only tree of one page. Text and comment nodes are not kept, so
/// child indices count elements only. Immutable once built.
#[derive(Debug, Clone)]
pub struct DomTree {
    nodes: Vec<Element>,
}

impl DomTree {
    /// Parses raw HTML bytes with browser-style error recovery.
    ///
    /// The charset comes from a `<meta charset>` declaration when present,
    /// otherwise the bytes are decoded as UTF-8 with lossy replacement.
    pub fn parse(html: &[u8]) -> Result<Self, DomError> {
        if looks_binary(html) {
            return Err(DomError::NotHtml);
        }
        let text = decode(html);
        Ok(Self::from_html(&Html::parse_document(&text)))
    }

    pub fn parse_str(html: &str) -> Result<Self, DomError> {
        Self::parse(html.as_bytes())
    }

    fn from_html(doc: &Html) -> Self {
        let mut tree = DomTree { nodes: Vec::new() };
        let root = doc.root_element();
        tree.nodes.push(element_record(root, None));
        let mut stack = vec![(root, NodeId(0))];
        while let Some((el, id)) = stack.pop() {
            let mut children = Vec::new();
            for child in el.children().filter_map(ElementRef::wrap) {
                let child_id = NodeId(tree.nodes.len());
                tree.nodes.push(element_record(child, Some(id)));
                children.push(child_id);
                stack.push((child, child_id));
            }
            tree.nodes[id.0].children = children;
        }
        tree
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<&Element> {
        self.nodes.get(id.0)
    }

    /// All node ids in document (pre-)order.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root()];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id.0].children.iter().rev().copied());
        }
        out
    }

    /// Follows `path` from the root.
    pub fn node_at(&self, path: &NodePath) -> Option<NodeId> {
        let mut id = self.root();
        for &i in &path.0 {
            id = *self.nodes[id.0].children.get(i)?;
        }
        Some(id)
    }
}

fn element_record(el: ElementRef<'_>, parent: Option<NodeId>) -> Element {
    let v = el.value();
    Element {
        tag: v.name().to_string(),
        attrs: v.attrs().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        parent,
        children: Vec::new(),
    }
}

fn looks_binary(bytes: &[u8]) -> bool {
    let sample = &bytes[..bytes.len().min(1024)];
    if sample.contains(&0) {
        return true;
    }
    let control = sample.iter().filter(|&&b| b < 0x20 && !matches!(b, b'\t' | b'\n' | b'\r' | 0x0c)).count();
    control * 10 > sample.len()
}

fn decode(bytes: &[u8]) -> String {
    match declared_charset(bytes).and_then(|l| encoding_rs::Encoding::for_label(l.as_bytes())) {
        // An ASCII-compatible page cannot really be UTF-16.
        Some(enc) if enc != encoding_rs::UTF_16LE && enc != encoding_rs::UTF_16BE => enc.decode(bytes).0.into_owned(),
        _ => String::from_utf8_lossy(bytes).into_owned(),
    }
}

/// Charset label from the first `<meta ... charset=...>` in the head bytes.
fn declared_charset(bytes: &[u8]) -> Option<String> {
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(1024)]).to_ascii_lowercase();
    let mut rest = head.as_str();
    while let Some(start) = rest.find("<meta") {
        let tag = &rest[start..];
        let tag = &tag[..tag.find('>').unwrap_or(tag.len())];
        if let Some(pos) = tag.find("charset=") {
            let value = tag[pos + "charset=".len()..].trim_start_matches(['"', '\'', ' ']);
            let label: String =
                value.chars().take_while(|c| !matches!(c, '"' | '\'' | ' ' | ';' | '/' | '>')).collect();
            if !label.is_empty() {
                return Some(label);
            }
        }
        rest = &rest[start + "<meta".len()..];
    }
    None
}

/// Child indices (over element children) from the root to a node.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for NodePath {
    fn from(v: Vec<usize>) -> Self {
        NodePath(v)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for NodePath {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub fn dom_path(tree: &DomTree, node: NodeId) -> Result<NodePath, DomError> {
    let mut indices = Vec::new();
    let mut cur = tree.get(node).ok_or(DomError::UnknownNode(node))?;
    let mut cur_id = node;
    while let Some(parent_id) = cur.parent {
        let parent = &tree.nodes[parent_id.0];
        let idx = parent.children.iter().position(|&c| c == cur_id).expect("child listed under its parent");
        indices.push(idx);
        cur_id = parent_id;
        cur = parent;
    }
    indices.reverse();
    Ok(NodePath(indices))
}

/// Number of tree edges between the nodes at `p` and `q`: the steps from each
/// node up to their deepest common ancestor.
pub fn d_distance(p: &NodePath, q: &NodePath) -> usize {
    let common = p.0.iter().zip(&q.0).take_while(|(a, b)| a == b).count();
    (p.len() - common) + (q.len() - common)
}

/// One `<a href>` occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkNode {
    pub node_path: NodePath,
    pub raw_href: String,
    /// Resolved URL, resource and query kept, fragment removed.
    pub absolute_url: Url,
    pub hyperlink: HyperlinkPath,
}

impl LinkNode {
    pub fn new(node_path: NodePath, raw_href: &str, absolute_url: Url) -> Result<Self, HyperlinkError> {
        let hyperlink = HyperlinkPath::from_url(&absolute_url)?;
        Ok(Self { node_path, raw_href: raw_href.to_string(), absolute_url, hyperlink })
    }
}

/// Counts of anchors that [`get_links`] left out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropCounts {
    pub malformed: usize,
    pub unsupported_scheme: usize,
    pub self_links: usize,
    pub external: usize,
    pub duplicates: usize,
}

/// Distinct links of a page in document order.
#[derive(Debug, Clone, Default)]
pub struct LinkSet {
    pub links: Vec<LinkNode>,
    pub dropped: DropCounts,
}

impl LinkSet {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LinkNode> {
        self.links.iter()
    }

    pub fn contains_url(&self, url: &Url) -> bool {
        self.links.iter().any(|l| &l.absolute_url == url)
    }
}

/// Collects the page's anchors, resolved against `final_url` (or `page_url`
/// when the page was not redirected).
///
/// Drops hrefs that fail to resolve, non-http(s) schemes, links back to the
/// page itself (fragment-only hrefs included) and, with `domain_filter` set,
/// links whose host differs from the filter's head. Repeated URLs keep their
/// first occurrence.
pub fn get_links(
    tree: &DomTree,
    page_url: &Url,
    final_url: Option<&Url>,
    domain_filter: Option<&HyperlinkPath>,
) -> LinkSet {
    let base = final_url.unwrap_or(page_url);
    let own: Vec<Url> = [Some(page_url), final_url]
        .into_iter()
        .flatten()
        .map(|u| {
            let mut u = u.clone();
            u.set_fragment(None);
            u
        })
        .collect();

    let mut set = LinkSet::default();
    let mut seen = HashSet::new();
    for id in tree.preorder() {
        let el = &tree.nodes[id.0];
        if el.tag != "a" {
            continue;
        }
        let Some(href) = el.attr("href") else { continue };
        let url = match resolve_url(href, Some(base)) {
            Ok(u) => u,
            Err(HyperlinkError::MalformedUrl(_)) => {
                set.dropped.malformed += 1;
                continue;
            }
            Err(HyperlinkError::UnsupportedScheme { .. }) => {
                set.dropped.unsupported_scheme += 1;
                continue;
            }
        };
        if own.contains(&url) {
            set.dropped.self_links += 1;
            continue;
        }
        let path = dom_path(tree, id).expect("id from this tree");
        let link = match LinkNode::new(path, href, url) {
            Ok(l) => l,
            Err(_) => {
                set.dropped.malformed += 1;
                continue;
            }
        };
        if let Some(filter) = domain_filter {
            if link.hyperlink.head() != filter.head() {
                set.dropped.external += 1;
                continue;
            }
        }
        if !seen.insert(link.absolute_url.clone()) {
            set.dropped.duplicates += 1;
            continue;
        }
        set.links.push(link);
    }
    set
}
