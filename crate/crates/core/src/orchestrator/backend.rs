//! Pluggable prover backends. The default null backend never discharges
//! anything; the HTTP backend speaks a minimal chat-completion-style
//! contract so an external prover can be plugged in. Backend output is
//! advisory: a goal is marked discharged only when the backend claims a
//! proof AND the local structural lint accepts it; final authority stays
//! with external proof checking.

use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub enum BackendOutcome {
    Proved(String),
    Failed(String),
}

/// One obligation handed to a backend, with enough context to be
/// self-contained.
#[derive(Clone, Debug, Serialize)]
pub struct DischargeRequest {
    pub goal_lean: String,
    pub goal_internal: String,
    pub identity: String,
    pub certificate: Option<String>,
}

pub trait ProverBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn discharge(&self, req: &DischargeRequest) -> BackendOutcome;
}

/// Default backend: every goal stays open.
pub struct NullBackend;

impl ProverBackend for NullBackend {
    fn name(&self) -> &'static str {
        "null"
    }

    fn discharge(&self, _req: &DischargeRequest) -> BackendOutcome {
        BackendOutcome::Failed("null backend never discharges".to_string())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HttpBackendConfig {
    pub endpoint: String,
    pub timeout_secs: u64,
    pub retries: u32,
    pub model: Option<String>,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        HttpBackendConfig {
            endpoint: String::new(),
            timeout_secs: 60,
            retries: 1,
            model: None,
        }
    }
}

/// Chat-completion-style HTTP backend. Request:
/// `{"model": ..., "messages": [{"role": "user", "content": ...}]}`.
/// The proof is read from the first fenced ```lean block of
/// `choices[0].message.content`.
pub struct HttpBackend {
    config: HttpBackendConfig,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
    messages: Vec<ChatMessage<'a>>,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .expect("http client builds");
        HttpBackend { config, client }
    }

    fn prompt(req: &DischargeRequest) -> String {
        let mut p = String::new();
        p.push_str(
            "Provide a short proof plan identifying the key lemmas and tactics, \
             then output a complete Lean 4 proof script that closes the goal \
             without using sorry, inside a ```lean fenced block.\n\n",
        );
        p.push_str(&format!("Identity under proof:\n{}\n\n", req.identity));
        if let Some(cert) = &req.certificate {
            p.push_str(&format!(
                "Symbolic context: the rational certificate is R(n,k) = {}.\n\n",
                cert
            ));
        }
        p.push_str(&format!("Goal:\n{}\n", req.goal_lean));
        p
    }

    fn attempt(&self, prompt: &str) -> Result<String, String> {
        let body = ChatRequest {
            model: self.config.model.as_deref(),
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
        };
        let resp = self
            .client
            .post(&self.config.endpoint)
            .json(&body)
            .send()
            .map_err(|e| format!("request failed: {}", e))?;
        if !resp.status().is_success() {
            return Err(format!("non-success status {}", resp.status()));
        }
        let parsed: ChatResponse = resp
            .json()
            .map_err(|e| format!("malformed response body: {}", e))?;
        let content = parsed
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| "response carried no choices".to_string())?;
        extract_lean_block(&content).ok_or_else(|| "no fenced lean block in response".to_string())
    }
}

impl ProverBackend for HttpBackend {
    fn name(&self) -> &'static str {
        "http"
    }

    fn discharge(&self, req: &DischargeRequest) -> BackendOutcome {
        let prompt = Self::prompt(req);
        let mut last_err = String::new();
        for _ in 0..=self.config.retries {
            match self.attempt(&prompt) {
                Ok(proof) => return BackendOutcome::Proved(proof),
                Err(e) => last_err = e,
            }
        }
        BackendOutcome::Failed(last_err)
    }
}

/// Extract the body of the first fenced ```lean block (``` fallback).
pub fn extract_lean_block(text: &str) -> Option<String> {
    for marker in ["```lean", "```"] {
        if let Some(start) = text.find(marker) {
            let rest = &text[start + marker.len()..];
            let rest = rest.strip_prefix('\n').unwrap_or(rest);
            if let Some(end) = rest.find("```") {
                let body = rest[..end].trim_end();
                if !body.is_empty() {
                    return Some(body.to_string());
                }
            }
        }
    }
    None
}

/// Structural acceptance check on a backend proof before it is spliced.
pub fn proof_lint(proof: &str) -> Result<(), String> {
    if proof.trim().is_empty() {
        return Err("empty proof".to_string());
    }
    if proof.contains("sorry") || proof.contains("admit") {
        return Err("proof contains a placeholder".to_string());
    }
    let mut depth = 0i64;
    for c in proof.chars() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced delimiters".to_string());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_backend_always_fails() {
        let b = NullBackend;
        let req = DischargeRequest {
            goal_lean: "True".into(),
            goal_internal: "true".into(),
            identity: "x".into(),
            certificate: None,
        };
        assert!(matches!(b.discharge(&req), BackendOutcome::Failed(_)));
    }

    #[test]
    fn fenced_block_extraction() {
        let text = "Plan: trivial.\n```lean\nexact rfl\n```\ndone";
        assert_eq!(extract_lean_block(text).unwrap(), "exact rfl");
        assert!(extract_lean_block("no fence here").is_none());
        let unlabeled = "```\nsimp\n```";
        assert_eq!(extract_lean_block(unlabeled).unwrap(), "simp");
    }

    #[test]
    fn lint_rejects_placeholders_and_imbalance() {
        assert!(proof_lint("exact rfl").is_ok());
        assert!(proof_lint("sorry").is_err());
        assert!(proof_lint("exact (foo").is_err());
        assert!(proof_lint(" ").is_err());
    }
}
