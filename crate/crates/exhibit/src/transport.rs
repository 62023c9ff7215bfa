//! JSON-over-HTTP plumbing shared by the remote embedding and chat clients.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::Duration;

use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError {
    pub status: Option<u16>,
    pub message: String,
    /// Network failures, 429 and 5xx.
    pub retryable: bool,
}

pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, api_key: Option<&str>, body: &Value) -> Result<Value, TransportError>;
}

pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        HttpTransport {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport::new(Duration::from_secs(120))
    }
}

impl Transport for HttpTransport {
    fn post_json(&self, url: &str, api_key: Option<&str>, body: &Value) -> Result<Value, TransportError> {
        let mut req = self.agent.post(url).set("Content-Type", "application/json");
        if let Some(key) = api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_json(body) {
            Ok(resp) => resp.into_json::<Value>().map_err(|e| TransportError {
                status: None,
                message: format!("reading response: {e}"),
                retryable: true,
            }),
            Err(ureq::Error::Status(code, resp)) => {
                let text = resp.into_string().unwrap_or_default();
                Err(TransportError {
                    status: Some(code),
                    message: format!("HTTP {code}: {}", text.chars().take(500).collect::<String>()),
                    retryable: code == 429 || code >= 500,
                })
            }
            Err(e) => Err(TransportError {
                status: None,
                message: e.to_string(),
                retryable: true,
            }),
        }
    }
}

/// A transport that refuses every request and counts the attempts.
#[derive(Debug, Default)]
pub struct Offline {
    calls: AtomicUsize,
}

impl Offline {
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for Offline {
    fn post_json(&self, url: &str, _: Option<&str>, _: &Value) -> Result<Value, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Err(TransportError {
            status: None,
            message: format!("network access disabled (POST {url})"),
            retryable: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: usize,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
        }
    }
}

/// Posts until success, a non-retryable failure or the attempt budget runs
/// out, doubling the delay each time. The error carries the attempt count.
pub fn post_with_retry(
    transport: &dyn Transport,
    url: &str,
    api_key: Option<&str>,
    body: &Value,
    policy: &RetryPolicy,
) -> Result<Value, (usize, TransportError)> {
    let mut delay = policy.base_delay;
    let mut attempt = 0;
    loop {
        attempt += 1;
        match transport.post_json(url, api_key, body) {
            Ok(v) => return Ok(v),
            Err(e) if !e.retryable || attempt >= policy.max_attempts.max(1) => return Err((attempt, e)),
            Err(_) => {
                thread::sleep(delay);
                delay = (delay * 2).min(policy.max_delay);
            }
        }
    }
}
