//! Deterministic in-process chat endpoint for offline runs and tests.
//!
//! The server speaks just enough HTTP/1.1 for a blocking chat-completions
//! client: one POST per connection, JSON in, JSON out. Its `Average`
//! behavior reads the positions out of the last user message and answers in
//! the canonical two-part reply form, moving to the average of everything it
//! saw. That is the same arithmetic, in the same order, as the average
//! strategy rule, so records produced through it match strategy records
//! byte for byte.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use consensus_core::strategy::{canonical_reply, reasoning_sentence};
use consensus_core::{Dimension, State, StrategyKind};

/// How the mock responds.
#[derive(Debug, Clone, Copy)]
pub enum MockBehavior {
    /// Reply with the average of all positions in the prompt.
    Average,
    /// Return HTTP 500 for the first `failures` requests, then behave like
    /// `Average`.
    FailThenAverage { failures: usize },
    /// Always reply with prose that contains no number.
    NoNumbers,
}

pub struct MockChatServer {
    addr: SocketAddr,
    requests: Arc<AtomicUsize>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockChatServer {
    pub fn spawn(behavior: MockBehavior, dimension: Dimension) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let requests = Arc::new(AtomicUsize::new(0));
        let shutdown = Arc::new(AtomicBool::new(false));

        let thread_requests = Arc::clone(&requests);
        let thread_shutdown = Arc::clone(&shutdown);
        let handle = std::thread::spawn(move || {
            while !thread_shutdown.load(Ordering::SeqCst) {
                match listener.accept() {
                    Ok((stream, _)) => {
                        let count = thread_requests.fetch_add(1, Ordering::SeqCst) + 1;
                        let _ = handle_connection(stream, behavior, dimension, count);
                    }
                    Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        std::thread::sleep(Duration::from_millis(2));
                    }
                    Err(_) => break,
                }
            }
        });

        Ok(Self {
            addr,
            requests,
            shutdown,
            handle: Some(handle),
        })
    }

    /// Endpoint URL to hand to a client.
    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockChatServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(
    mut stream: TcpStream,
    behavior: MockBehavior,
    dimension: Dimension,
    request_number: usize,
) -> std::io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;

    let body = read_request_body(&mut stream)?;

    if let MockBehavior::FailThenAverage { failures } = behavior {
        if request_number <= failures {
            return respond(
                &mut stream,
                "500 Internal Server Error",
                r#"{"error":"scripted failure"}"#,
            );
        }
    }

    let content = match behavior {
        MockBehavior::NoNumbers => "Let's gather together!".to_string(),
        MockBehavior::Average | MockBehavior::FailThenAverage { .. } => {
            match average_reply(&body, dimension) {
                Some(reply) => reply,
                None => {
                    return respond(
                        &mut stream,
                        "400 Bad Request",
                        r#"{"error":"no positions found in prompt"}"#,
                    )
                }
            }
        }
    };

    let response = serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": content}}]
    });
    respond(&mut stream, "200 OK", &response.to_string())
}

fn read_request_body(stream: &mut TcpStream) -> std::io::Result<String> {
    let mut buffer = Vec::new();
    let mut chunk = [0u8; 4096];
    let header_end = loop {
        let n = stream.read(&mut chunk)?;
        if n == 0 {
            break buffer.len();
        }
        buffer.extend_from_slice(&chunk[..n]);
        if let Some(pos) = find_header_end(&buffer) {
            break pos;
        }
    };

    let headers = String::from_utf8_lossy(&buffer[..header_end]).to_string();
    let content_length = headers
        .lines()
        .find_map(|line| {
            let (name, value) = line.split_once(':')?;
            name.eq_ignore_ascii_case("content-length")
                .then(|| value.trim().parse::<usize>().ok())?
        })
        .unwrap_or(0);

    let body_start = header_end + 4;
    while buffer.len() < body_start + content_length {
        let n = stream.read(&mut chunk)?;
        if n == 0 {
            break;
        }
        buffer.extend_from_slice(&chunk[..n]);
    }
    Ok(String::from_utf8_lossy(&buffer[body_start..]).to_string())
}

fn find_header_end(buffer: &[u8]) -> Option<usize> {
    buffer.windows(4).position(|w| w == b"\r\n\r\n")
}

fn respond(stream: &mut TcpStream, status: &str, body: &str) -> std::io::Result<()> {
    let response = format!(
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(response.as_bytes())?;
    stream.flush()
}

/// Average-include-self over the positions found in the newest user message
/// that mentions any, grouped into components by dimension.
fn average_reply(body: &str, dimension: Dimension) -> Option<String> {
    let request: serde_json::Value = serde_json::from_str(body).ok()?;
    let messages = request.get("messages")?.as_array()?;
    let numbers = messages
        .iter()
        .rev()
        .filter(|m| m.get("role").and_then(|r| r.as_str()) == Some("user"))
        .find_map(|m| {
            let text = m.get("content")?.as_str()?;
            let numbers = crate::parse::extract_numbers(text);
            (!numbers.is_empty()).then_some(numbers)
        })?;

    let size = dimension.size();
    if numbers.len() % size != 0 {
        return None;
    }
    let states: Vec<State<f64>> = numbers
        .chunks(size)
        .map(|chunk| State::from_components(dimension, chunk))
        .collect();
    let mean = State::mean_of(states.iter())?;
    Some(canonical_reply(
        reasoning_sentence(StrategyKind::AverageIncludeSelf),
        &mean,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_reply_matches_strategy_wording() {
        let body = serde_json::json!({
            "model": "mock",
            "messages": [
                {"role": "system", "content": "You are an agent moving in a one-dimensional space."},
                {"role": "user", "content": "Your position is: 20 and the other agent's position is: 80."}
            ]
        })
        .to_string();
        let reply = average_reply(&body, Dimension::One).unwrap();
        assert_eq!(
            reply,
            "Reasoning: Moving to the average of my position and the positions I can observe.\nPosition: 50"
        );
    }

    #[test]
    fn average_reply_pairs_planar_components() {
        let body = serde_json::json!({
            "messages": [
                {"role": "user", "content": "your position is: [0, 10], other people's positions are: [[10, 30]]."}
            ]
        })
        .to_string();
        let reply = average_reply(&body, Dimension::Two).unwrap();
        assert!(reply.ends_with("Position: [5, 20]"));
    }

    #[test]
    fn clarify_messages_without_numbers_use_previous_prompt() {
        let body = serde_json::json!({
            "messages": [
                {"role": "user", "content": "Your position is: 20 and the other agent's position is: 80."},
                {"role": "assistant", "content": "Let's gather together!"},
                {"role": "user", "content": "Please reply with the position you choose."}
            ]
        })
        .to_string();
        let reply = average_reply(&body, Dimension::One).unwrap();
        assert!(reply.ends_with("Position: 50"));
    }
}
