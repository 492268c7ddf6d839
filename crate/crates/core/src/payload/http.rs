use super::{detect_tls, AppPayload};

pub const HTTP_METHODS: &[&str] = &[
    "GET", "POST", "PUT", "DELETE", "HEAD", "OPTIONS", "PATCH", "CONNECT", "TRACE",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HttpKind {
    Request,
    Response,
}

/// An HTTP/1.x message head found at the start of one payload, plus whatever
/// body bytes followed it in the same packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpMessage {
    pub kind: HttpKind,
    pub method: Option<String>,
    pub url: Option<String>,
    pub status_code: Option<u16>,
    /// Header lines in wire order; malformed lines are dropped.
    pub headers: Vec<(String, String)>,
    /// `Host` header value, lowercased, without a port.
    pub host: Option<String>,
    /// Pairs from `Cookie` and `Set-Cookie` headers.
    pub cookies: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpMessage {
    pub fn is_request(&self) -> bool {
        self.kind == HttpKind::Request
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    /// URL path without query or fragment.
    pub fn path(&self) -> Option<&str> {
        let url = self.url.as_deref()?;
        let no_query = url.split(['?', '#']).next().unwrap_or(url);
        // absolute-form targets: strip scheme and authority
        match no_query.split_once("://") {
            Some((_, rest)) => Some(rest.find('/').map_or("/", |i| &rest[i..])),
            None => Some(no_query),
        }
    }

    /// Raw `key=value` pairs of the URL query string, undecoded.
    pub fn query_pairs(&self) -> Vec<(&str, &str)> {
        let Some(url) = self.url.as_deref() else {
            return Vec::new();
        };
        let Some((_, query)) = url.split_once('?') else {
            return Vec::new();
        };
        let query = query.split('#').next().unwrap_or("");
        split_pairs(query, '&')
    }

    /// Raw pairs of a form-encoded body, if the body looks like one.
    pub fn form_pairs(&self) -> Vec<(&str, &str)> {
        let form_typed = self
            .header("content-type")
            .is_some_and(|ct| ct.to_ascii_lowercase().contains("x-www-form-urlencoded"));
        match std::str::from_utf8(&self.body) {
            Ok(text) if form_typed => split_pairs(text.trim(), '&'),
            _ => Vec::new(),
        }
    }

    /// Wire form of the message head followed by the body.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        match self.kind {
            HttpKind::Request => {
                out.push_str(self.method.as_deref().unwrap_or("GET"));
                out.push(' ');
                out.push_str(self.url.as_deref().unwrap_or("/"));
                out.push_str(" HTTP/1.1\r\n");
            }
            HttpKind::Response => {
                out.push_str(&format!("HTTP/1.1 {}\r\n", self.status_code.unwrap_or(200)));
            }
        }
        for (name, value) in &self.headers {
            out.push_str(name);
            out.push_str(": ");
            out.push_str(value);
            out.push_str("\r\n");
        }
        out.push_str("\r\n");
        let mut bytes = out.into_bytes();
        bytes.extend_from_slice(&self.body);
        bytes
    }
}

fn split_pairs(s: &str, sep: char) -> Vec<(&str, &str)> {
    s.split(sep)
        .filter_map(|kv| {
            let (k, v) = kv.split_once('=')?;
            let k = k.trim();
            (!k.is_empty()).then_some((k, v.trim()))
        })
        .collect()
}

/// Parse a payload that has already been shown not to be TLS. TLS payloads
/// yield `None`.
pub fn parse_http(payload: &AppPayload<'_>) -> Option<HttpMessage> {
    if detect_tls(payload).is_tls {
        return None;
    }
    parse_http_bytes(payload.bytes)
}

/// Recognize an HTTP/1.x request or response head at the start of `bytes`.
///
/// Header parsing is lenient: lines without a colon, with an empty or
/// space-containing name, or folded continuation lines are skipped.
pub fn parse_http_bytes(bytes: &[u8]) -> Option<HttpMessage> {
    let line_end = bytes.iter().position(|&b| b == b'\n').unwrap_or(bytes.len());
    let first = std::str::from_utf8(&bytes[..line_end]).ok()?;
    let first = first.strip_suffix('\r').unwrap_or(first);

    let (kind, method, url, status_code) = if let Some(rest) = first.strip_prefix("HTTP/") {
        let (_version, rest) = rest.split_once(' ')?;
        let code = rest.get(..3)?;
        if !code.bytes().all(|b| b.is_ascii_digit()) || rest.len() > 3 && !rest[3..].starts_with(' ') {
            return None;
        }
        let code: u16 = code.parse().ok()?;
        if !(100..=599).contains(&code) {
            return None;
        }
        (HttpKind::Response, None, None, Some(code))
    } else {
        let mut parts = first.splitn(3, ' ');
        let method = parts.next()?;
        let target = parts.next()?;
        let version = parts.next()?;
        if !HTTP_METHODS.contains(&method) || target.is_empty() || !version.starts_with("HTTP/") {
            return None;
        }
        (
            HttpKind::Request,
            Some(method.to_string()),
            Some(target.to_string()),
            None,
        )
    };

    let mut headers = Vec::new();
    let mut pos = (line_end + 1).min(bytes.len());
    let mut body_start = bytes.len();
    while pos < bytes.len() {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(bytes.len(), |i| pos + i);
        let mut line = &bytes[pos..end];
        if let Some(stripped) = line.strip_suffix(b"\r") {
            line = stripped;
        }
        let next = (end + 1).min(bytes.len());
        if line.is_empty() {
            body_start = next;
            break;
        }
        pos = next;
        if line[0] == b' ' || line[0] == b'\t' {
            continue;
        }
        let text = String::from_utf8_lossy(line);
        let Some((name, value)) = text.split_once(':') else {
            continue;
        };
        if name.is_empty() || name.contains(char::is_whitespace) {
            continue;
        }
        headers.push((name.to_string(), value.trim().to_string()));
    }

    let host = headers
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case("host"))
        .map(|(_, v)| strip_port(v).to_ascii_lowercase())
        .filter(|h| !h.is_empty());

    let mut cookies = Vec::new();
    for (name, value) in &headers {
        if name.eq_ignore_ascii_case("cookie") {
            cookies.extend(split_pairs(value, ';').into_iter().map(owned));
        } else if name.eq_ignore_ascii_case("set-cookie") {
            let first = value.split(';').next().unwrap_or("");
            cookies.extend(split_pairs(first, ';').into_iter().map(owned));
        }
    }

    Some(HttpMessage {
        kind,
        method,
        url,
        status_code,
        headers,
        host,
        cookies,
        body: bytes[body_start..].to_vec(),
    })
}

fn owned((k, v): (&str, &str)) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn strip_port(host: &str) -> &str {
    if let Some(rest) = host.strip_prefix('[') {
        return rest.split(']').next().unwrap_or(rest);
    }
    match host.rsplit_once(':') {
        Some((h, port)) if port.bytes().all(|b| b.is_ascii_digit()) => h,
        _ => host,
    }
}
