use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::builder::RangedU64ValueParser;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use keypage::cs_search::{find_ncs, CsResult, SearchError, SearchOptions, DEFAULT_CS_SIZE, DEFAULT_MAX_LOADS};
use keypage::fetcher::{FixtureLoader, LiveConfig, LiveLoader, PageLoader, DEFAULT_USER_AGENT};
use keypage::hyperlink::{h_distance, parse_hyperlink};
use keypage::relevance::explain;
use keypage::sitegen::{generate_site, generate_star_site, SiteSpec};

const EXIT_OK: u8 = 0;
const EXIT_FATAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FALLBACK: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "keypage", version, about = "Find pages that share a key page's template")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Output::Json, global = true)]
    output: Output,
    /// Include the per-iteration trace in the report.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a complete subdigraph of pages around a key page.
    Discover {
        /// Key page URL.
        #[arg(long)]
        url: String,
        /// Number of mutually linked pages to find.
        #[arg(long, default_value_t = DEFAULT_CS_SIZE, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
        size: usize,
        /// Serve pages from a fixture corpus (directory or manifest.json) instead of the network.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Load budget, key page included.
        #[arg(long, default_value_t = DEFAULT_MAX_LOADS, value_parser = RangedU64ValueParser::<usize>::new().range(2..))]
        max_loads: usize,
        /// Minimum gap between requests to the same host, in milliseconds
        #[arg(long, env = "KEYPAGE_DELAY_MS", default_value_t = 500)]
        delay_ms: u64,
        /// Per-request timeout, in milliseconds
        #[arg(long, env = "KEYPAGE_TIMEOUT_MS", default_value_t = 10_000)]
        timeout_ms: u64,
        /// User-Agent header sent on live requests
        #[arg(long, env = "KEYPAGE_USER_AGENT", default_value = DEFAULT_USER_AGENT)]
        user_agent: String,
        /// Keep links to other hosts.
        #[arg(long)]
        include_external: bool,
        /// Print the ranked link order to stderr.
        #[arg(long)]
        explain: bool,
    },
    /// Show the hyperlink distance between two URLs in both directions.
    Distance { url_a: String, url_b: String },
    /// Generate a synthetic fixture corpus.
    GenSite {
        /// Directory to write the pages and manifest.json into
        #[arg(long)]
        out: PathBuf,
        /// Host name used in the generated URLs
        #[arg(long, default_value = "www.example.com")]
        host: String,
        #[arg(long, default_value_t = 5)]
        sections: usize,
        #[arg(long, default_value_t = 4)]
        subs: usize,
        #[arg(long, default_value_t = 6)]
        leaves: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// One-way links per leaf page.
        #[arg(long, default_value_t = 2)]
        noise: usize,
        /// Generate a hub with N spokes and no mutual links instead.
        #[arg(long, value_name = "N")]
        star: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Discover {
            url,
            size,
            fixtures,
            max_loads,
            delay_ms,
            timeout_ms,
            user_agent,
            include_external,
            explain: show_ranking,
        } => {
            let host = match parse_hyperlink(&url, None) {
                Ok(h) => h.head().to_string(),
                Err(e) => return usage(&e.to_string()),
            };
            let allowed = (!include_external).then(|| host.clone());
            let loader: Box<dyn PageLoader> = match fixtures {
                Some(path) => match FixtureLoader::open(&path) {
                    Ok(l) => match allowed {
                        Some(h) => Box::new(l.restrict_to_host(h)),
                        None => Box::new(l),
                    },
                    Err(e) => return usage(&e.to_string()),
                },
                None => {
                    let config = LiveConfig {
                        user_agent,
                        timeout: Duration::from_millis(timeout_ms),
                        delay: Duration::from_millis(delay_ms),
                        allowed_host: allowed,
                        ..LiveConfig::default()
                    };
                    match LiveLoader::new(config) {
                        Ok(l) => Box::new(l),
                        Err(e) => return fatal(&e.to_string()),
                    }
                }
            };
            let options = SearchOptions { max_loads, include_external };
            match find_ncs(loader.as_ref(), &url, size, &options) {
                Ok(result) => {
                    if show_ranking {
                        eprint!("{}", explain(&result.ranked));
                    }
                    print_discovery(&result, cli.output, cli.verbose);
                    if result.is_fallback() {
                        EXIT_FALLBACK
                    } else {
                        EXIT_OK
                    }
                }
                Err(e @ (SearchError::InvalidSize | SearchError::BadUrl(_))) => return usage(&e.to_string()),
                Err(e) => return fatal(&e.to_string()),
            }
        }
        Command::Distance { url_a, url_b } => {
            let (a, b) = match (parse_hyperlink(&url_a, None), parse_hyperlink(&url_b, None)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return usage(&e.to_string()),
            };
            let (ab, ba) = (h_distance(&a, &b), h_distance(&b, &a));
            match cli.output {
                Output::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({"a": a, "b": b, "a_to_b": ab, "b_to_a": ba})).unwrap()
                ),
                Output::Text => {
                    println!("a: {a}\nb: {b}\nhDistance(a, b) = {ab:+}\nhDistance(b, a) = {ba:+}");
                }
            }
            EXIT_OK
        }
        Command::GenSite { out, host, sections, subs, leaves, seed, noise, star } => {
            let result = match star {
                Some(spokes) => generate_star_site(&host, spokes, seed, &out),
                None => generate_site(
                    &SiteSpec {
                        host,
                        sections,
                        subsections_per_section: subs,
                        leaves_per_subsection: leaves,
                        seed,
                        noise,
                    },
                    &out,
                ),
            };
            match result {
                Ok(manifest) => {
                    let path = manifest.root.join(keypage::fetcher::MANIFEST_FILE);
                    match cli.output {
                        Output::Json => println!(
                            "{}",
                            serde_json::to_string_pretty(&json!({"manifest": path, "pages": manifest.len()})).unwrap()
                        ),
                        Output::Text => println!("{}\n{} pages", path.display(), manifest.len()),
                    }
                    EXIT_OK
                }
                Err(keypage::sitegen::SiteGenError::InvalidSpec) => return usage("site counts must be at least 1"),
                Err(e) => return fatal(&e.to_string()),
            }
        }
    };
    ExitCode::from(code)
}

fn print_discovery(result: &CsResult, output: Output, verbose: bool) {
    match output {
        Output::Json => {
            println!("{}", serde_json::to_string_pretty(&result.report(verbose)).unwrap());
        }
        Output::Text => {
            for m in &result.members {
                println!("{m}");
            }
            eprintln!(
                "found {} of {} (loads: {} ok / {} attempted{})",
                result.found_size,
                result.requested_n,
                result.loads_succeeded,
                result.loads_attempted,
                if result.truncated { ", load budget exhausted" } else { "" }
            );
            if verbose {
                for t in &result.trace {
                    eprintln!(
                        "{}\t{:+}\t{}\t{}/{}\tcs={}",
                        t.url,
                        t.hd,
                        if t.loaded { "ok" } else { "failed" },
                        t.loads_succeeded,
                        t.loads_attempted,
                        t.cs_size
                    );
                }
            }
        }
    }
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn fatal(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_FATAL)
}
