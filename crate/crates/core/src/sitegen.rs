//! Synthetic website corpora with a main menu, per-section submenus and leaf
//! pages.
//!
//! Layout for host `h`:
//!
//! ```text
//! h/section{i}.html               section root, in the main menu
//! h/section{i}/sub{j}.html        subsection root, in section i's submenu
//! h/section{i}/sub{j}/leaf{k}.html
//! ```
//!
//! Every page carries the main menu; every page of section `i` also carries
//! section `i`'s submenu. Section roots are therefore pairwise mutually
//! linked, and so are the subsection roots of one section.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fetcher::FixtureManifest;

#[derive(Debug, Error)]
pub enum SiteGenError {
    #[error("site spec counts must be at least 1")]
    InvalidSpec,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteSpec {
    pub host: String,
    pub sections: usize,
    pub subsections_per_section: usize,
    pub leaves_per_subsection: usize,
    pub seed: u64,
    /// One-way "related" links added to each leaf, pointing at later leaves.
    pub noise: usize,
}

impl Default for SiteSpec {
    fn default() -> Self {
        Self {
            host: "www.example.com".to_string(),
            sections: 5,
            subsections_per_section: 4,
            leaves_per_subsection: 6,
            seed: 42,
            noise: 2,
        }
    }
}

impl SiteSpec {
    pub fn page_count(&self) -> usize {
        let subs = self.sections * self.subsections_per_section;
        self.sections + subs + subs * self.leaves_per_subsection
    }

    pub fn section_url(&self, i: usize) -> String {
        format!("http://{}/section{i}.html", self.host)
    }

    pub fn subsection_url(&self, i: usize, j: usize) -> String {
        format!("http://{}/section{i}/sub{j}.html", self.host)
    }

    pub fn leaf_url(&self, i: usize, j: usize, k: usize) -> String {
        format!("http://{}/section{i}/sub{j}/leaf{k}.html", self.host)
    }

    /// `(section, subsection, leaf)` triples, 1-based, in generation order.
    pub fn leaves(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.sections {
            for j in 1..=self.subsections_per_section {
                for k in 1..=self.leaves_per_subsection {
                    out.push((i, j, k));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), SiteGenError> {
        if self.sections == 0
            || self.subsections_per_section == 0
            || self.leaves_per_subsection == 0
            || self.host.is_empty()
        {
            return Err(SiteGenError::InvalidSpec);
        }
        Ok(())
    }
}

const WORDS: &[&str] = &[
    "river", "forest", "signal", "archive", "harbor", "lattice", "meadow", "quartz", "orbit", "ember", "canyon",
    "vector", "glacier", "pixel", "summit", "tundra", "beacon", "cipher", "delta", "fjord", "garnet", "horizon",
    "island", "jasper", "kernel", "lagoon", "mosaic", "nebula", "oasis", "prairie",
];

fn filler(rng: &mut ChaCha8Rng, words: usize) -> String {
    let mut out = String::new();
    for n in 0..words {
        if n > 0 {
            out.push(' ');
        }
        out.push_str(WORDS.choose(rng).expect("non-empty"));
    }
    out
}

struct Page<'a> {
    title: String,
    main_menu: &'a str,
    submenu: Option<&'a str>,
    content: String,
}

impl Page<'_> {
    fn render(&self) -> String {
        let mut html = String::new();
        let _ = write!(
            html,
            "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n</head>\n<body>\n\
             <header>\n<nav class=\"main-menu\">\n<ul>\n{}</ul>\n</nav>\n</header>\n<div class=\"layout\">\n",
            self.title, self.main_menu
        );
        if let Some(sub) = self.submenu {
            let _ = write!(html, "<aside class=\"submenu\">\n<ul>\n{sub}</ul>\n</aside>\n");
        }
        let _ = write!(
            html,
            "<main class=\"content\">\n<h1>{}</h1>\n{}</main>\n</div>\n<footer>\n<p>{}</p>\n</footer>\n</body>\n</html>\n",
            self.title, self.content, self.title
        );
        html
    }
}

fn menu_item(href: &str, label: &str) -> String {
    format!("<li><a href=\"{href}\">{label}</a></li>\n")
}

fn write_page(out_dir: &Path, rel: &str, html: &str) -> io::Result<()> {
    let path = out_dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, html)
}

/// Writes every page of `spec` plus `manifest.json` under `out_dir`.
pub fn generate_site(spec: &SiteSpec, out_dir: &Path) -> Result<FixtureManifest, SiteGenError> {
    spec.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut manifest = FixtureManifest {
        corpus: format!(
            "{}-{}x{}x{}",
            spec.host, spec.sections, spec.subsections_per_section, spec.leaves_per_subsection
        ),
        seed: spec.seed,
        entries: Default::default(),
        root: out_dir.to_path_buf(),
    };
    let mut add = |url: String, rel: String, html: String| -> io::Result<()> {
        write_page(out_dir, &rel, &html)?;
        manifest.entries.insert(url, PathBuf::from(rel));
        Ok(())
    };

    let main_menu: String =
        (1..=spec.sections).map(|i| menu_item(&format!("/section{i}.html"), &format!("Section {i}"))).collect();
    let leaves = spec.leaves();

    for i in 1..=spec.sections {
        let submenu: String = (1..=spec.subsections_per_section)
            .map(|j| menu_item(&format!("/section{i}/sub{j}.html"), &format!("Topic {i}.{j}")))
            .collect();

        let page = Page {
            title: format!("Section {i}"),
            main_menu: &main_menu,
            submenu: Some(&submenu),
            content: format!("<p>{}</p>\n", filler(&mut rng, 30)),
        };
        add(spec.section_url(i), format!("section{i}.html"), page.render())?;

        for j in 1..=spec.subsections_per_section {
            let mut content = format!("<p>{}</p>\n<ul class=\"articles\">\n", filler(&mut rng, 25));
            for k in 1..=spec.leaves_per_subsection {
                content.push_str(&menu_item(&format!("sub{j}/leaf{k}.html"), &format!("Article {i}.{j}.{k}")));
            }
            content.push_str("</ul>\n");
            let page =
                Page { title: format!("Topic {i}.{j}"), main_menu: &main_menu, submenu: Some(&submenu), content };
            add(spec.subsection_url(i, j), format!("section{i}/sub{j}.html"), page.render())?;

            for k in 1..=spec.leaves_per_subsection {
                let mut content = String::new();
                for _ in 0..rng.gen_range(2..=3) {
                    let n = rng.gen_range(30..=60);
                    let _ = writeln!(content, "<p>{}</p>", filler(&mut rng, n));
                }
                let me = leaves.iter().position(|&l| l == (i, j, k)).expect("leaf listed");
                let later = &leaves[me + 1..];
                let picks: Vec<&(usize, usize, usize)> =
                    later.choose_multiple(&mut rng, spec.noise.min(later.len())).collect();
                if !picks.is_empty() {
                    content.push_str("<section class=\"related\">\n<ul>\n");
                    for &&(a, b, c) in &picks {
                        content.push_str(&menu_item(
                            &format!("/section{a}/sub{b}/leaf{c}.html"),
                            &format!("Article {a}.{b}.{c}"),
                        ));
                    }
                    content.push_str("</ul>\n</section>\n");
                }
                let page = Page {
                    title: format!("Article {i}.{j}.{k}"),
                    main_menu: &main_menu,
                    submenu: Some(&submenu),
                    content,
                };
                add(spec.leaf_url(i, j, k), format!("section{i}/sub{j}/leaf{k}.html"), page.render())?;
            }
        }
    }
    manifest.write()?;
    Ok(manifest)
}

/// A hub page linking to `spokes` pages that link back only to the hub, so no
/// two of the hub's links are mutually linked.
pub fn generate_star_site(
    host: &str,
    spokes: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<FixtureManifest, SiteGenError> {
    if spokes == 0 || host.is_empty() {
        return Err(SiteGenError::InvalidSpec);
    }
    fs::create_dir_all(out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = FixtureManifest {
        corpus: format!("{host}-star{spokes}"),
        seed,
        entries: Default::default(),
        root: out_dir.to_path_buf(),
    };
    let hub_menu: String = (1..=spokes).map(|s| menu_item(&format!("/spoke{s}.html"), &format!("Spoke {s}"))).collect();
    let hub = Page {
        title: "Hub".to_string(),
        main_menu: &hub_menu,
        submenu: None,
        content: format!("<p>{}</p>\n", filler(&mut rng, 30)),
    };
    write_page(out_dir, "index.html", &hub.render())?;
    manifest.entries.insert(star_hub_url(host), PathBuf::from("index.html"));

    let back = menu_item("/index.html", "Hub");
    for s in 1..=spokes {
        let page = Page {
            title: format!("Spoke {s}"),
            main_menu: &back,
            submenu: None,
            content: format!("<p>{}</p>\n", filler(&mut rng, 30)),
        };
        let rel = format!("spoke{s}.html");
        write_page(out_dir, &rel, &page.render())?;
        manifest.entries.insert(format!("http://{host}/{rel}"), PathBuf::from(rel));
    }
    manifest.write()?;
    Ok(manifest)
}

pub fn star_hub_url(host: &str) -> String {
    format!("http://{host}/index.html")
}
