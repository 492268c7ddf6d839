use rand::seq::IndexedRandom;
use rand::Rng;

const WORDS: &[&str] = &[
    "the",
    "of",
    "and",
    "to",
    "in",
    "is",
    "you",
    "that",
    "it",
    "he",
    "was",
    "for",
    "on",
    "are",
    "as",
    "with",
    "his",
    "they",
    "at",
    "be",
    "this",
    "have",
    "from",
    "or",
    "one",
    "had",
    "by",
    "word",
    "but",
    "not",
    "what",
    "all",
    "were",
    "we",
    "when",
    "your",
    "can",
    "said",
    "there",
    "use",
    "an",
    "each",
    "which",
    "she",
    "do",
    "how",
    "their",
    "if",
    "up",
    "other",
    "about",
    "out",
    "many",
    "then",
    "them",
    "these",
    "so",
    "some",
    "her",
    "would",
    "make",
    "like",
    "him",
    "into",
    "time",
    "has",
    "look",
    "two",
    "more",
    "write",
    "go",
    "see",
    "number",
    "no",
    "way",
    "could",
    "people",
    "my",
    "than",
    "first",
    "water",
    "been",
    "call",
    "who",
    "oil",
    "its",
    "now",
    "find",
    "long",
    "down",
    "day",
    "did",
    "get",
    "come",
    "made",
    "part",
    "over",
    "new",
    "sound",
    "take",
    "only",
    "little",
    "work",
    "know",
    "place",
    "year",
    "live",
    "me",
    "back",
    "give",
    "most",
    "very",
    "after",
    "thing",
    "our",
    "just",
    "name",
    "good",
    "sentence",
    "man",
    "think",
    "say",
    "great",
    "where",
    "help",
    "through",
    "much",
    "before",
    "line",
    "right",
    "too",
    "mean",
    "old",
    "any",
    "same",
    "tell",
    "boy",
    "follow",
    "came",
    "want",
    "show",
    "also",
    "around",
    "form",
    "three",
    "small",
    "set",
    "put",
    "end",
    "does",
    "another",
    "well",
    "large",
    "must",
    "big",
    "even",
    "such",
    "because",
    "turn",
    "here",
    "why",
    "ask",
    "went",
    "men",
    "read",
    "need",
    "land",
    "different",
    "home",
    "us",
    "move",
    "try",
    "kind",
    "hand",
    "picture",
    "again",
    "change",
    "off",
    "play",
    "spell",
    "air",
    "away",
    "animal",
    "house",
    "point",
    "page",
    "letter",
    "mother",
    "answer",
    "found",
    "study",
    "still",
    "learn",
    "should",
    "world",
];

const ACCENTED: &[&str] = &[
    "café",
    "naïve",
    "résumé",
    "über",
    "São Paulo",
    "façade",
    "Zürich",
    "jalapeño",
    "smörgåsbord",
];

const PATHS: &[&str] = &[
    "/",
    "/index.html",
    "/api/v1/status",
    "/cgi-bin/query",
    "/search",
    "/images/logo.png",
    "/static/app.js",
    "/login",
    "/account/settings",
    "/feed.xml",
    "/update/check",
    "/sync",
];

const HOSTS: &[&str] = &[
    "example.com",
    "www.example.org",
    "api.example.net",
    "cdn.example.com",
    "updates.example.io",
    "news.example.org",
];

const AGENTS: &[&str] = &[
    "Mozilla/5.0 (X11; Linux x86_64; rv:54.0) Gecko/20100101 Firefox/54.0",
    "Mozilla/5.0 (iPhone; CPU iPhone OS 10_3 like Mac OS X) AppleWebKit/603.1.30",
    "curl/7.52.1",
    "Dalvik/2.1.0 (Linux; U; Android 7.0)",
    "okhttp/3.8.0",
];

const KEYS: &[&str] = &[
    "id", "action", "page", "lang", "count", "offset", "token", "device", "version", "mode", "q", "sort", "format",
    "callback", "ts", "session",
];

fn word(rng: &mut impl Rng) -> &'static str {
    WORDS.choose(rng).expect("non-empty")
}

fn sentence(rng: &mut impl Rng) -> String {
    let n = rng.random_range(4..16);
    let mut words: Vec<String> = (0..n).map(|_| word(rng).to_string()).collect();
    if let Some(first) = words.first_mut() {
        let mut c = first.chars();
        if let Some(h) = c.next() {
            *first = h.to_uppercase().chain(c).collect();
        }
    }
    let end = [".", ".", ".", "?", "!"].choose(rng).expect("non-empty");
    format!("{}{end}", words.join(" "))
}

fn kv_pairs(rng: &mut impl Rng, n: std::ops::Range<usize>) -> String {
    let n = rng.random_range(n);
    (0..n)
        .map(|_| {
            let k = KEYS.choose(rng).expect("non-empty");
            let v = if rng.random_bool(0.5) {
                rng.random_range(0..100_000u32).to_string()
            } else {
                word(rng).to_string()
            };
            format!("{k}={v}")
        })
        .collect::<Vec<_>>()
        .join("&")
}

fn http_request(rng: &mut impl Rng) -> String {
    let post = rng.random_bool(0.3);
    let path = PATHS.choose(rng).expect("non-empty");
    let query = if rng.random_bool(0.5) {
        format!("?{}", kv_pairs(rng, 1..4))
    } else {
        String::new()
    };
    let mut s = format!(
        "{} {path}{query} HTTP/1.1\r\nHost: {}\r\nUser-Agent: {}\r\nAccept: */*\r\nAccept-Language: en-US,en;q=0.5\r\nConnection: keep-alive\r\n",
        if post { "POST" } else { "GET" },
        HOSTS.choose(rng).expect("non-empty"),
        AGENTS.choose(rng).expect("non-empty"),
    );
    if post {
        let body = kv_pairs(rng, 2..8);
        s.push_str(&format!(
            "Content-Type: application/x-www-form-urlencoded\r\nContent-Length: {}\r\n\r\n{body}",
            body.len()
        ));
    } else {
        s.push_str("\r\n");
    }
    s
}

fn http_response(rng: &mut impl Rng) -> String {
    let body = if rng.random_bool(0.5) {
        format!(
            "{{\"status\":0,\"message\":\"{}\",\"count\":{}}}",
            sentence(rng),
            rng.random_range(0..1000u32)
        )
    } else {
        format!(
            "<html><body><p>{}</p><p>{}</p></body></html>",
            sentence(rng),
            sentence(rng)
        )
    };
    let ctype = if body.starts_with('{') {
        "application/json"
    } else {
        "text/html; charset=utf-8"
    };
    format!(
        "HTTP/1.1 200 OK\r\nServer: nginx\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nCache-Control: no-cache\r\n\r\n{body}",
        body.len()
    )
}

fn prose(rng: &mut impl Rng) -> String {
    format!("{} ", sentence(rng))
}

fn form(rng: &mut impl Rng) -> String {
    format!("{}&", kv_pairs(rng, 3..10))
}

/// Exactly `len` bytes of one template family, with its name. About one
/// item in five carries a non-ASCII word; a multi-byte character cut by the
/// length limit is left cut.
pub(super) fn cleartext(rng: &mut impl Rng, len: usize) -> (Vec<u8>, &'static str) {
    let (note, unit): (&'static str, fn(&mut rand_chacha::ChaCha20Rng) -> String) = match rng.random_range(0..4) {
        0 => ("template:http-request", http_request),
        1 => ("template:http-response", http_response),
        2 => ("template:english", prose),
        _ => ("template:key-value", form),
    };
    // Units draw from their own stream so the family choice above does not
    // shift every later draw.
    let mut unit_rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(rng.random());
    let mut text = String::new();
    while text.len() < len {
        text.push_str(&unit(&mut unit_rng));
    }
    if rng.random_bool(0.2) {
        let w = ACCENTED.choose(rng).expect("non-empty");
        let at = rng.random_range(0..len.saturating_sub(w.len()).max(1));
        let at = (0..=at).rev().find(|&i| text.is_char_boundary(i)).unwrap_or(0);
        text.insert_str(at, w);
    }
    let mut bytes = text.into_bytes();
    bytes.truncate(len);
    (bytes, note)
}
