//! Directory-level view of URLs and the signed distance between them.
//!
//! A [`HyperlinkPath`] keeps only the host and the directory words of a URL.
//! The resource name, query and fragment are discarded, so
//! `www.upv.es/research/maths/` and `www.upv.es/research/maths/index.html`
//! denote the same hyperlink.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperlinkError {
    #[error("malformed URL `{0}`")]
    MalformedUrl(String),
    #[error("unsupported scheme `{scheme}` in `{url}`")]
    UnsupportedScheme { scheme: String, url: String },
}

/// Host word followed by directory words. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperlinkPath {
    words: Vec<String>,
}

impl HyperlinkPath {
    /// Builds a path from raw words. Returns `None` if `words` is empty or any
    /// word is empty or contains a `/`.
    pub fn from_words<I, S>(words: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        if words.is_empty() || words.iter().any(|w| w.is_empty() || w.contains('/')) {
            return None;
        }
        Some(Self { words })
    }

    /// Directory view of an absolute http(s) URL.
    pub fn from_url(url: &Url) -> Result<Self, HyperlinkError> {
        check_scheme(url)?;
        let host =
            url.host_str().filter(|h| !h.is_empty()).ok_or_else(|| HyperlinkError::MalformedUrl(url.to_string()))?;
        let mut host = host.to_ascii_lowercase();
        if let Some(port) = url.port() {
            host.push(':');
            host.push_str(&port.to_string());
        }

        let mut words = vec![host];
        if let Some(segments) = url.path_segments() {
            let segments: Vec<&str> = segments.collect();
            // The last segment is the resource name ("" when the path ends in '/').
            let dirs = &segments[..segments.len().saturating_sub(1)];
            words.extend(dirs.iter().filter(|s| !s.is_empty()).map(|s| s.to_string()));
        }
        Ok(Self { words })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Number of words, `|h|`.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn head(&self) -> &str {
        &self.words[0]
    }

    /// Length of the longest common prefix of `self` and `other`.
    pub fn common_prefix_len(&self, other: &HyperlinkPath) -> usize {
        self.words.iter().zip(&other.words).take_while(|(a, b)| a == b).count()
    }

    pub fn is_prefix_of(&self, other: &HyperlinkPath) -> bool {
        self.common_prefix_len(other) == self.len()
    }
}

/// First word of `h`.
pub fn head(h: &HyperlinkPath) -> &str {
    h.head()
}

/// Signed hyperlink distance from `h` to `h_prime`.
///
/// Zero when equal, `+k` when `h_prime` extends `h` by `k` words, and
/// `-k` otherwise, where `k` is the number of words of `h` beyond the
/// longest common prefix. Diverging heads give `-|h|`.
pub fn h_distance(h: &HyperlinkPath, h_prime: &HyperlinkPath) -> i64 {
    let common = h.common_prefix_len(h_prime);
    if common == h.len() {
        (h_prime.len() - common) as i64
    } else {
        -((h.len() - common) as i64)
    }
}

/// Resolves `raw` to an absolute http(s) URL with the fragment removed.
///
/// Relative references are resolved against `base`. Without a base, a
/// scheme-less input such as `www.upv.es/research/` is read as `http://`.
pub fn resolve_url(raw: &str, base: Option<&Url>) -> Result<Url, HyperlinkError> {
    let raw = raw.trim();
    let malformed = || HyperlinkError::MalformedUrl(raw.to_string());
    if raw.is_empty() && base.is_none() {
        return Err(malformed());
    }

    let mut url = match (Url::parse(raw), base) {
        // `www.upv.es:8080/x` parses with scheme `www.upv.es`.
        (Ok(url), None) if url.scheme().contains('.') => {
            Url::parse(&format!("http://{raw}")).map_err(|_| malformed())?
        }
        (Ok(url), _) => url,
        (Err(url::ParseError::RelativeUrlWithoutBase), Some(base)) => base.join(raw).map_err(|_| malformed())?,
        (Err(url::ParseError::RelativeUrlWithoutBase), None) => {
            Url::parse(&format!("http://{raw}")).map_err(|_| malformed())?
        }
        (Err(_), _) => return Err(malformed()),
    };
    check_scheme(&url)?;
    if url.host_str().is_none_or(str::is_empty) {
        return Err(malformed());
    }
    url.set_fragment(None);
    Ok(url)
}

/// Resolves `raw` (against `base` if relative) and returns its hyperlink.
pub fn parse_hyperlink(raw: &str, base: Option<&Url>) -> Result<HyperlinkPath, HyperlinkError> {
    HyperlinkPath::from_url(&resolve_url(raw, base)?)
}

fn check_scheme(url: &Url) -> Result<(), HyperlinkError> {
    match url.scheme() {
        "http" | "https" => Ok(()),
        other => Err(HyperlinkError::UnsupportedScheme { scheme: other.to_string(), url: url.to_string() }),
    }
}

impl fmt::Display for HyperlinkPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.words {
            write!(f, "{w}/")?;
        }
        Ok(())
    }
}

/// Parses the slash-joined word form (`research/maths/`) verbatim, without
/// treating the first word as a host.
impl FromStr for HyperlinkPath {
    type Err = HyperlinkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_words(s.split('/').filter(|w| !w.is_empty()))
            .ok_or_else(|| HyperlinkError::MalformedUrl(s.to_string()))
    }
}

impl Serialize for HyperlinkPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hp(s: &str) -> HyperlinkPath {
        s.parse().unwrap()
    }

    #[test]
    fn parses_resource_away() {
        let h = parse_hyperlink("www.upv.es/research/maths/index.html", None).unwrap();
        assert_eq!(h.words(), ["www.upv.es", "research", "maths"]);
        assert_eq!(h.to_string(), "www.upv.es/research/maths/");
    }

    #[test]
    fn domain_only() {
        assert_eq!(parse_hyperlink("www.tesco.es/", None).unwrap(), hp("www.tesco.es/"));
        assert_eq!(parse_hyperlink("http://www.tesco.es", None).unwrap(), hp("www.tesco.es/"));
    }

    #[test]
    fn relative_against_base() {
        let base = resolve_url("www.upv.es/research/maths/index.html", None).unwrap();
        let rel = parse_hyperlink("pi.html", Some(&base)).unwrap();
        let abs = parse_hyperlink("www.upv.es/research/maths/pi.html", None).unwrap();
        assert_eq!(rel, abs);
        assert_eq!(rel.words(), ["www.upv.es", "research", "maths"]);
    }

    #[test]
    fn normalization_details() {
        let h = parse_hyperlink("HTTPS://WWW.Upv.ES:8080/A/b/?q=1#frag", None).unwrap();
        assert_eq!(h.words(), ["www.upv.es:8080", "A", "b"]);
        // default port is dropped by URL parsing, scheme ignored
        assert_eq!(
            parse_hyperlink("https://h.com:443/x/", None).unwrap(),
            parse_hyperlink("http://h.com/x/y.html", None).unwrap()
        );
        let h = parse_hyperlink("http://h.com/a%20b/c.html", None).unwrap();
        assert_eq!(h.words(), ["h.com", "a%20b"]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_hyperlink("mailto:someone@upv.es", None),
            Err(HyperlinkError::UnsupportedScheme { .. })
        ));
        let base = Url::parse("http://h.com/").unwrap();
        assert!(matches!(
            parse_hyperlink("javascript:void(0)", Some(&base)),
            Err(HyperlinkError::UnsupportedScheme { .. })
        ));
        assert!(matches!(parse_hyperlink("http://", None), Err(HyperlinkError::MalformedUrl(_))));
        assert!(matches!(parse_hyperlink("", None), Err(HyperlinkError::MalformedUrl(_))));
        assert!(matches!(parse_hyperlink("http://exa mple.com/", None), Err(HyperlinkError::MalformedUrl(_))));
    }

    #[test]
    fn head_is_first_word() {
        assert_eq!(head(&hp("dir1/dir2/dir3/")), "dir1");
        assert_eq!(head(&hp("www.upv.es/")), "www.upv.es");
        assert_eq!(head(&hp("www.upv.es/research/maths/")), "www.upv.es");
    }

    #[test]
    fn worked_distances() {
        let key = hp("research/maths/");
        assert_eq!(h_distance(&key, &hp("research/maths/")), 0);
        assert_eq!(h_distance(&key, &hp("research/maths/geometry/")), 1);
        assert_eq!(h_distance(&key, &hp("research/")), -1);
        assert_eq!(h_distance(&key, &hp("research/physics/dynamics/")), -1);
        assert_eq!(h_distance(&key, &hp("www.upv.es/research/")), -2);
        assert_eq!(h_distance(&hp("www.upv.es/research/maths/"), &hp("www.upv.es/sport/")), -2);
    }

    #[test]
    fn from_words_rejects_invalid() {
        assert!(HyperlinkPath::from_words(Vec::<String>::new()).is_none());
        assert!(HyperlinkPath::from_words(["a", ""]).is_none());
        assert!(HyperlinkPath::from_words(["a/b"]).is_none());
        assert!("///".parse::<HyperlinkPath>().is_err());
    }

    /// Reference distance that enumerates every common prefix explicitly.
    fn brute_distance(h: &[String], hp: &[String]) -> i64 {
        if h == hp {
            return 0;
        }
        let mut longest = 0;
        for k in 0..=h.len().min(hp.len()) {
            if h[..k] == hp[..k] {
                longest = k;
            }
        }
        if longest == h.len() {
            (hp.len() - longest) as i64
        } else {
            -((h.len() - longest) as i64)
        }
    }

    fn path_strategy() -> impl Strategy<Value = HyperlinkPath> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 1..6)
            .prop_map(|w| HyperlinkPath::from_words(w).unwrap())
    }

    fn url_path_strategy() -> impl Strategy<Value = HyperlinkPath> {
        ("[a-z]{1,8}\\.(com|es|org)", prop::collection::vec("[a-z0-9_-]{1,8}", 0..5))
            .prop_map(|(host, dirs)| HyperlinkPath::from_words(std::iter::once(host).chain(dirs)).unwrap())
    }

    proptest! {
        #[test]
        fn distance_zero_iff_equal(a in path_strategy(), b in path_strategy()) {
            prop_assert_eq!(h_distance(&a, &a), 0);
            prop_assert_eq!(h_distance(&a, &b) == 0, a == b);
        }

        #[test]
        fn non_negative_iff_prefix(a in path_strategy(), b in path_strategy()) {
            prop_assert_eq!(h_distance(&a, &b) >= 0, a.is_prefix_of(&b));
        }

        #[test]
        fn extension_antisymmetry(a in path_strategy(), ext in prop::collection::vec("[xyz]", 1..4)) {
            let b = HyperlinkPath::from_words(a.words().iter().cloned().chain(ext.clone())).unwrap();
            prop_assert_eq!(h_distance(&a, &b), ext.len() as i64);
            prop_assert_eq!(h_distance(&b, &a), -(ext.len() as i64));
        }

        #[test]
        fn matches_reference_and_bounds(a in path_strategy(), b in path_strategy()) {
            let d = h_distance(&a, &b);
            prop_assert_eq!(d, brute_distance(a.words(), b.words()));
            let lcp = a.common_prefix_len(&b) as i64;
            prop_assert!(-(a.len() as i64) <= d);
            prop_assert!(d <= b.len() as i64 - lcp);
        }

        #[test]
        fn reserialization_is_idempotent(h in url_path_strategy()) {
            let again = parse_hyperlink(&h.to_string(), None).unwrap();
            prop_assert_eq!(&again, &h);
            let via_str: HyperlinkPath = h.to_string().parse().unwrap();
            prop_assert_eq!(via_str, h);
        }
    }
}
