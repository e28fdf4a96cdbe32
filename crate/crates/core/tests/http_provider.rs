use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use reasonforge::llm::{generate, FinishReason, HttpProvider, ProviderProfile, RetryPolicy, SamplingParams};

/// Serves one canned `(status, body)` per connection and records request bodies.
fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut length = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
            }
            let mut request = vec![0u8; length];
            reader.read_exact(&mut request).unwrap();
            log.lock().unwrap().push(String::from_utf8(request).unwrap());
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, seen)
}

fn provider(url: &str) -> HttpProvider {
    let mut profile = ProviderProfile::new("local", url, "m");
    profile.api_key_env = "REASONFORGE_TEST_UNSET_KEY".into();
    HttpProvider::new(profile).unwrap()
}

#[test]
fn server_errors_are_retried_until_success() {
    let ok = r#"{"choices":[{"text":"a","finish_reason":"stop"},{"text":"b","finish_reason":"length"}]}"#;
    let (url, seen) = serve(vec![(500, "{}".into()), (500, "{}".into()), (200, ok.into())]);
    let params = SamplingParams::solution().with_samples(2);
    let out = generate("prompt", &params, &provider(&url), &RetryPolicy::no_delay(5)).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].text, "a");
    assert_eq!(out[1].finish_reason, FinishReason::Length);
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    let body: serde_json::Value = serde_json::from_str(&seen[2]).unwrap();
    assert_eq!(body["prompt"], "prompt");
    assert_eq!(body["n"], 2);
    assert_eq!(body["max_tokens"], 32768);
}

#[test]
fn client_errors_fail_without_retry() {
    let (url, seen) = serve(vec![(401, r#"{"error":"bad key"}"#.into())]);
    let params = SamplingParams::solution().with_samples(1);
    let err = generate("prompt", &params, &provider(&url), &RetryPolicy::no_delay(5)).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("401"), "{err}");
    assert_eq!(seen.lock().unwrap().len(), 1);
}
