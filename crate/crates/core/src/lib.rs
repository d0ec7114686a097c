//! Discover a small set of same-site webpages that share a key page's
//! template.
//!
//! The key page's links are ranked by URL directory distance and DOM
//! position, then loaded one by one until `n` of them are found to link to
//! each other pairwise (a complete subdigraph of the site's link graph).

pub mod cs_search;
pub mod dom;
pub mod fetcher;
pub mod hyperlink;
pub mod relevance;
pub mod sitegen;

pub use cs_search::{find_ncs, ConnectionGraph, CsResult, Report, SearchError, SearchOptions};
pub use dom::{d_distance, dom_path, get_links, DomTree, LinkNode, LinkSet, NodePath};
pub use fetcher::{load_manifest, FixtureLoader, FixtureManifest, LiveLoader, PageLoader};
pub use hyperlink::{h_distance, head, parse_hyperlink, HyperlinkPath};
pub use relevance::{link_rel_compare, sort_links, RankedLink};
pub use sitegen::{generate_site, SiteSpec};
