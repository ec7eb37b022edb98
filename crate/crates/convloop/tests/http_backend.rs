//! HTTP backend against a local stub server: wire shapes, retry/backoff,
//! rate-limit handling.

use convloop::prompting::PromptText;
use convloop::{BackendError, GenerationBackend, GenerationRequest, HttpApi, HttpBackend, HttpBackendConfig};
use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

/// One canned HTTP exchange: status line + body, connection closed after.
struct CannedResponse {
    status: &'static str,
    headers: Vec<(&'static str, String)>,
    body: String,
}

impl CannedResponse {
    fn ok(body: serde_json::Value) -> CannedResponse {
        CannedResponse {
            status: "200 OK",
            headers: vec![],
            body: body.to_string(),
        }
    }
}

/// Request bodies and auth headers the stub saw, in order.
type SeenRequests = Arc<Mutex<Vec<(String, Option<String>)>>>;

/// Serve the canned responses in order on a fresh port; records request
/// bodies and auth headers.
fn stub_server(responses: Vec<CannedResponse>) -> (String, SeenRequests) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub server");
    let endpoint = format!("http://{}/v1/completions", listener.local_addr().unwrap());
    let seen: SeenRequests = Arc::new(Mutex::new(Vec::new()));
    let record = Arc::clone(&seen);

    std::thread::spawn(move || {
        for response in responses {
            let Ok((mut socket, _)) = listener.accept() else {
                return;
            };
            let mut buf = Vec::new();
            let mut chunk = [0u8; 4096];
            let (headers_end, mut total) = loop {
                let n = socket.read(&mut chunk).unwrap_or(0);
                if n == 0 {
                    break (buf.len(), buf.len());
                }
                buf.extend_from_slice(&chunk[..n]);
                if let Some(pos) = find_headers_end(&buf) {
                    break (pos, buf.len());
                }
            };
            let header_text = String::from_utf8_lossy(&buf[..headers_end]).to_string();
            let content_length = header_text
                .lines()
                .find_map(|line| {
                    let (name, value) = line.split_once(':')?;
                    name.eq_ignore_ascii_case("content-length")
                        .then(|| value.trim().parse::<usize>().ok())?
                })
                .unwrap_or(0);
            let body_start = headers_end + 4;
            while total < body_start + content_length {
                let n = socket.read(&mut chunk).unwrap_or(0);
                if n == 0 {
                    break;
                }
                buf.extend_from_slice(&chunk[..n]);
                total = buf.len();
            }
            let body = String::from_utf8_lossy(&buf[body_start.min(buf.len())..]).to_string();
            let auth = header_text.lines().find_map(|line| {
                let (name, value) = line.split_once(':')?;
                name.eq_ignore_ascii_case("authorization")
                    .then(|| value.trim().to_string())
            });
            record.lock().unwrap().push((body, auth));

            let mut head = format!(
                "HTTP/1.1 {}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n",
                response.status,
                response.body.len()
            );
            for (name, value) in &response.headers {
                head.push_str(&format!("{name}: {value}\r\n"));
            }
            let _ = socket.write_all(format!("{head}\r\n{}", response.body).as_bytes());
        }
    });
    (endpoint, seen)
}

fn find_headers_end(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n")
}

fn request(prompt: &str) -> GenerationRequest {
    GenerationRequest {
        prompt: PromptText::new(prompt.to_string()),
        top_p: 0.95,
        temperature: 1.0,
        max_generation_tokens: 512,
        stop_sequences: vec!["```".to_string()],
        turn: None,
    }
}

fn config(endpoint: &str, api: HttpApi) -> HttpBackendConfig {
    HttpBackendConfig {
        endpoint: endpoint.to_string(),
        model: "stub-model".to_string(),
        api,
        api_key: Some("secret-key".to_string()),
        max_retries: 2,
        backoff_base_ms: 10,
        request_timeout_ms: 5000,
    }
}

#[test]
fn completion_round_trip_and_wire_shape() {
    let canned = serde_json::json!({ "choices": [ { "text": "def sieve(max):\n    return []" } ] });
    let (endpoint, seen) = stub_server(vec![CannedResponse::ok(canned)]);
    let backend = HttpBackend::new(config(&endpoint, HttpApi::Completions)).unwrap();

    let response = backend.generate(&request("fix this")).unwrap();
    assert_eq!(response.raw_text, "def sieve(max):\n    return []");

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 1);
    let (body, auth) = &seen[0];
    let body: serde_json::Value = serde_json::from_str(body).expect("request body is json");
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["prompt"], "fix this");
    assert_eq!(body["top_p"], 0.95);
    assert_eq!(body["temperature"], 1.0);
    assert_eq!(body["max_tokens"], 512);
    assert_eq!(body["stop"][0], "```");
    assert_eq!(auth.as_deref(), Some("Bearer secret-key"));
}

#[test]
fn chat_round_trip() {
    let canned =
        serde_json::json!({ "choices": [ { "message": { "role": "assistant", "content": "patched" } } ] });
    let (endpoint, seen) = stub_server(vec![CannedResponse::ok(canned)]);
    let backend = HttpBackend::new(config(&endpoint, HttpApi::ChatCompletions)).unwrap();

    let response = backend.generate(&request("fix this")).unwrap();
    assert_eq!(response.raw_text, "patched");

    let seen = seen.lock().unwrap();
    let body: serde_json::Value = serde_json::from_str(&seen[0].0).unwrap();
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(body["messages"][0]["content"], "fix this");
    assert!(body.get("prompt").is_none());
}

#[test]
fn rate_limit_honors_retry_after_then_succeeds() {
    let canned = serde_json::json!({ "choices": [ { "text": "ok" } ] });
    let (endpoint, seen) = stub_server(vec![
        CannedResponse {
            status: "429 Too Many Requests",
            headers: vec![("retry-after", "0".to_string())],
            body: "slow down".to_string(),
        },
        CannedResponse::ok(canned),
    ]);
    let backend = HttpBackend::new(config(&endpoint, HttpApi::Completions)).unwrap();
    let response = backend.generate(&request("x")).unwrap();
    assert_eq!(response.raw_text, "ok");
    assert_eq!(seen.lock().unwrap().len(), 2);
}

#[test]
fn server_errors_are_retried() {
    let canned = serde_json::json!({ "choices": [ { "text": "recovered" } ] });
    let (endpoint, seen) = stub_server(vec![
        CannedResponse {
            status: "500 Internal Server Error",
            headers: vec![],
            body: "boom".to_string(),
        },
        CannedResponse {
            status: "502 Bad Gateway",
            headers: vec![],
            body: "boom".to_string(),
        },
        CannedResponse::ok(canned),
    ]);
    let backend = HttpBackend::new(config(&endpoint, HttpApi::Completions)).unwrap();
    let response = backend.generate(&request("x")).unwrap();
    assert_eq!(response.raw_text, "recovered");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_fail_fast() {
    let (endpoint, seen) = stub_server(vec![CannedResponse {
        status: "400 Bad Request",
        headers: vec![],
        body: "bad body".to_string(),
    }]);
    let backend = HttpBackend::new(config(&endpoint, HttpApi::Completions)).unwrap();
    match backend.generate(&request("x")) {
        Err(BackendError::Http { status: 400, body }) => assert!(body.contains("bad body")),
        other => panic!("expected fail-fast 400, got {other:?}"),
    }
    assert_eq!(seen.lock().unwrap().len(), 1, "no retry on client errors");
}

#[test]
fn connection_failure_exhausts_retries_as_network_error() {
    // bind then drop, so the port refuses connections
    let port = {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let backend = HttpBackend::new(config(
        &format!("http://127.0.0.1:{port}/v1/completions"),
        HttpApi::Completions,
    ))
    .unwrap();
    match backend.generate(&request("x")) {
        Err(BackendError::Network { attempts, .. }) => assert_eq!(attempts, 3),
        other => panic!("expected Network error, got {other:?}"),
    }
}

#[test]
fn malformed_success_body_is_reported() {
    let (endpoint, _) = stub_server(vec![CannedResponse::ok(serde_json::json!({ "weird": true }))]);
    let backend = HttpBackend::new(config(&endpoint, HttpApi::Completions)).unwrap();
    match backend.generate(&request("x")) {
        Err(BackendError::Http { body, .. }) => {
            assert!(body.contains("expected completion field"))
        }
        other => panic!("expected shape error, got {other:?}"),
    }
}
