//! Client side of the line-delimited JSON scorer protocol.
//!
//! Requests are `{"id": "...", "a": "...", "b": "..."}`, one per line. The
//! worker answers each id exactly once with `{"id": "...", "score": x}` or
//! `{"id": "...", "error": "..."}`, possibly out of order.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ScoreError, SimilarityScorer};

#[derive(Serialize)]
struct Request<'a> {
    id: String,
    a: &'a str,
    b: &'a str,
}

#[derive(Deserialize)]
struct Response {
    id: String,
    #[serde(default)]
    score: Option<f64>,
    #[serde(default)]
    error: Option<String>,
}

struct Channel {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    next_id: u64,
}

pub struct WorkerScorer {
    channel: Mutex<Channel>,
    child: Option<Mutex<Child>>,
}

impl WorkerScorer {
    /// Spawns `command` (whitespace-separated program and arguments) and talks
    /// to it over stdin/stdout.
    pub fn spawn(command: &str) -> Result<Self, ScoreError> {
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| ScoreError::Protocol("empty worker command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ScoreError::Protocol(format!("cannot start worker `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut scorer = Self::from_streams(BufReader::new(stdout), stdin);
        scorer.child = Some(Mutex::new(child));
        Ok(scorer)
    }

    /// Wraps an already-connected reader/writer pair.
    pub fn from_streams(
        reader: impl BufRead + Send + 'static,
        writer: impl Write + Send + 'static,
    ) -> Self {
        Self {
            channel: Mutex::new(Channel {
                reader: Box::new(reader),
                writer: Box::new(writer),
                next_id: 0,
            }),
            child: None,
        }
    }

    /// Sends every pair, then collects the answers by id. Results come back
    /// in request order.
    pub fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, ScoreError> {
        let mut ch = self.channel.lock().expect("worker channel poisoned");
        let base = ch.next_id;
        ch.next_id += pairs.len() as u64;
        for (i, (a, b)) in pairs.iter().enumerate() {
            let req = Request {
                id: (base + i as u64).to_string(),
                a,
                b,
            };
            let mut line = serde_json::to_string(&req).map_err(|e| ScoreError::Protocol(e.to_string()))?;
            line.push('\n');
            ch.writer.write_all(line.as_bytes())?;
        }
        ch.writer.flush()?;

        let mut pending: HashMap<String, usize> = (0..pairs.len())
            .map(|i| ((base + i as u64).to_string(), i))
            .collect();
        let mut scores = vec![0.0; pairs.len()];
        let mut line = String::new();
        while !pending.is_empty() {
            line.clear();
            if ch.reader.read_line(&mut line)? == 0 {
                return Err(ScoreError::Protocol(format!(
                    "worker closed its output with {} request(s) unanswered",
                    pending.len()
                )));
            }
            if line.trim().is_empty() {
                continue;
            }
            let resp: Response = serde_json::from_str(line.trim())
                .map_err(|e| ScoreError::Protocol(format!("bad response `{}`: {e}", line.trim())))?;
            let Some(slot) = pending.remove(&resp.id) else {
                return Err(ScoreError::Protocol(format!("unexpected response id {}", resp.id)));
            };
            if let Some(err) = resp.error {
                return Err(ScoreError::Protocol(format!("worker error for id {}: {err}", resp.id)));
            }
            scores[slot] = resp
                .score
                .ok_or_else(|| ScoreError::Protocol(format!("response {} has no score", resp.id)))?;
        }
        Ok(scores)
    }
}

impl SimilarityScorer for WorkerScorer {
    fn score(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        Ok(self.score_batch(&[(a, b)])?[0])
    }
}

impl Drop for WorkerScorer {
    fn drop(&mut self) {
        if let Some(child) = self.child.take() {
            let mut child = child.into_inner().unwrap_or_else(|e| e.into_inner());
            // closing stdin lets a well-behaved worker exit on its own
            if let Ok(mut ch) = self.channel.lock() {
                ch.writer = Box::new(std::io::sink());
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}
