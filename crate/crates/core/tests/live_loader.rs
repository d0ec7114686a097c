use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use url::Url;

use keypage::cs_search::{find_ncs, SearchOptions};
use keypage::fetcher::{Clock, LiveConfig, LiveLoader, LoadError, PageLoader};

struct Reply {
    status: u16,
    headers: Vec<(&'static str, String)>,
    body: String,
    delay: Duration,
}

fn html(body: impl Into<String>) -> Reply {
    Reply {
        status: 200,
        headers: vec![("Content-Type", "text/html; charset=utf-8".into())],
        body: body.into(),
        delay: Duration::ZERO,
    }
}

fn redirect(to: &str) -> Reply {
    Reply { status: 301, headers: vec![("Location", to.into())], body: String::new(), delay: Duration::ZERO }
}

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    user_agent: String,
}

/// Minimal HTTP/1.1 server answering from `route`, one thread per connection.
struct StubServer {
    base: Url,
    seen: Arc<Mutex<Vec<Seen>>>,
}

impl StubServer {
    fn start(route: impl Fn(&str) -> Reply + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base = Url::parse(&format!("http://{}/", listener.local_addr().unwrap())).unwrap();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let route = Arc::new(route);
        let log = seen.clone();
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let route = route.clone();
                let log = log.clone();
                thread::spawn(move || serve(stream, &*route, &log));
            }
        });
        Self { base, seen }
    }

    fn url(&self, path: &str) -> Url {
        self.base.join(path).unwrap()
    }

    fn host(&self) -> String {
        format!("{}:{}", self.base.host_str().unwrap(), self.base.port().unwrap())
    }

    fn paths(&self) -> Vec<String> {
        self.seen.lock().unwrap().iter().map(|s| s.path.clone()).collect()
    }
}

fn serve(stream: TcpStream, route: &(dyn Fn(&str) -> Reply + Send + Sync), log: &Mutex<Vec<Seen>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() {
        return;
    }
    let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
    let mut user_agent = String::new();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("user-agent") {
                user_agent = v.trim().to_string();
            }
        }
    }
    log.lock().unwrap().push(Seen { path: path.clone(), user_agent });
    let reply = route(&path);
    thread::sleep(reply.delay);
    let mut out =
        format!("HTTP/1.1 {} X\r\nContent-Length: {}\r\nConnection: close\r\n", reply.status, reply.body.len());
    for (k, v) in &reply.headers {
        out.push_str(&format!("{k}: {v}\r\n"));
    }
    out.push_str("\r\n");
    out.push_str(&reply.body);
    let mut stream = stream;
    let _ = stream.write_all(out.as_bytes());
}

fn config() -> LiveConfig {
    LiveConfig {
        delay: Duration::ZERO,
        timeout: Duration::from_secs(5),
        use_system_proxy: false,
        ..LiveConfig::default()
    }
}

#[test]
fn follows_redirect_to_html() {
    let server = StubServer::start(|path| match path {
        "/old" => redirect("/new"),
        "/new" => html("<a href='x'>x</a>"),
        _ => Reply { status: 404, headers: vec![], body: String::new(), delay: Duration::ZERO },
    });
    let loader = LiveLoader::new(config()).unwrap();
    let page = loader.load(&server.url("/old")).unwrap();
    assert_eq!(page.requested_url, server.url("/old"));
    assert_eq!(page.final_url, server.url("/new"));
    assert_eq!(page.body, b"<a href='x'>x</a>");
    assert!(page.content_type.starts_with("text/html"));
    assert_eq!(server.paths(), ["/old", "/new"]);
}

#[test]
fn error_mapping() {
    let server = StubServer::start(|path| match path {
        "/loop" => redirect("/loop"),
        "/pdf" => Reply {
            status: 200,
            headers: vec![("Content-Type", "application/pdf".into())],
            body: "%PDF".into(),
            delay: Duration::ZERO,
        },
        "/empty" => html(""),
        "/slow" => Reply { delay: Duration::from_millis(1500), ..html("late") },
        _ => Reply { status: 404, headers: vec![], body: "gone".into(), delay: Duration::ZERO },
    });
    let loader = LiveLoader::new(LiveConfig { timeout: Duration::from_millis(300), ..config() }).unwrap();
    assert!(matches!(loader.load(&server.url("/loop")), Err(LoadError::TooManyRedirects)));
    assert!(matches!(loader.load(&server.url("/missing")), Err(LoadError::HttpStatus(404))));
    assert!(matches!(loader.load(&server.url("/pdf")), Err(LoadError::NotHtml)));
    assert!(matches!(loader.load(&server.url("/empty")), Err(LoadError::NotHtml)));
    assert!(matches!(loader.load(&server.url("/slow")), Err(LoadError::Timeout)));
}

#[test]
fn sends_user_agent() {
    let server = StubServer::start(|_| html("<p>hi</p>"));
    let loader = LiveLoader::new(LiveConfig { user_agent: "probe/1.0".into(), ..config() }).unwrap();
    loader.load(&server.url("/")).unwrap();
    assert_eq!(server.seen.lock().unwrap()[0].user_agent, "probe/1.0");
}

#[test]
fn refuses_other_hosts() {
    let server = StubServer::start(|_| html("<p>hi</p>"));
    let loader = LiveLoader::new(LiveConfig { allowed_host: Some("elsewhere.test".into()), ..config() }).unwrap();
    assert!(matches!(loader.load(&server.url("/")), Err(LoadError::OutsideDomain { .. })));
    assert!(server.paths().is_empty());
    assert!(loader.requests().is_empty());
}

/// Clock that only moves when slept on.
struct FakeClock {
    now: Mutex<Instant>,
    slept: Mutex<Vec<Duration>>,
}

impl Clock for FakeClock {
    fn now(&self) -> Instant {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
        self.slept.lock().unwrap().push(d);
    }
}

#[test]
fn per_host_delay() {
    let server = StubServer::start(|_| html("<p>hi</p>"));
    let clock = Arc::new(FakeClock { now: Mutex::new(Instant::now()), slept: Mutex::new(Vec::new()) });
    let delay = Duration::from_millis(700);
    let loader = LiveLoader::with_clock(LiveConfig { delay, ..config() }, clock.clone()).unwrap();
    for p in ["/a", "/b", "/c"] {
        loader.load(&server.url(p)).unwrap();
    }
    let log = loader.requests();
    assert_eq!(log.len(), 3);
    for w in log.windows(2) {
        assert!(w[1].at.duration_since(w[0].at) >= delay);
    }
    assert_eq!(*clock.slept.lock().unwrap(), [delay, delay]);
}

#[test]
fn search_over_http() {
    let server = StubServer::start(|path| {
        let menu = "<nav><a href='/s/1.html'>1</a><a href='/s/2.html'>2</a><a href='/s/3.html'>3</a><a href='http://elsewhere.test/'>x</a></nav>";
        match path {
            "/key/index.html" | "/s/1.html" | "/s/2.html" | "/s/3.html" => html(menu),
            _ => Reply { status: 404, headers: vec![], body: String::new(), delay: Duration::ZERO },
        }
    });
    let loader = LiveLoader::new(LiveConfig { allowed_host: Some(server.host()), ..config() }).unwrap();
    let key = server.url("/key/index.html");
    let r = find_ncs(&loader, key.as_str(), 3, &SearchOptions::default()).unwrap();
    assert_eq!(r.found_size, 3);
    assert_eq!(r.loads_succeeded, 4);
    assert_eq!(server.paths(), ["/key/index.html", "/s/1.html", "/s/2.html", "/s/3.html"]);
}
