//! Client for OpenAI-compatible `/chat/completions` endpoints with tool calling.

use std::collections::BTreeSet;
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tracing::{debug, warn};

use super::{parse_tool_call, Agent, AgentError, AgentFactory, AgentReply, AgentRequest, ReplyContent, ToolSchema};
use crate::error::{Error, Result};
use crate::prompting::{Conversation, Message, Role, ToolCall};
use crate::tasks::TaskInstance;
use crate::world::ActionName;

fn default_timeout_secs() -> u64 {
    120
}

fn default_max_retries() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    /// Base URL such as `https://api.openai.com/v1`, or the full completions URL.
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    /// Name of the environment variable holding the API key. No key is sent when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Cap on concurrent requests across all episodes using this backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_in_flight: Option<usize>,
}

impl BackendConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            temperature: 0.0,
            api_key_env: None,
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            max_in_flight: None,
        }
    }

    pub fn completions_url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(permits: usize) -> Self {
        Self { free: Mutex::new(permits.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> GatePermit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        GatePermit(self)
    }
}

struct GatePermit<'a>(&'a Gate);

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// Shared, stateless client. One [`RemoteAgent`] is handed out per episode.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    config: BackendConfig,
    api_key: Option<String>,
    http: ureq::Agent,
    gate: Option<Arc<Gate>>,
}

impl RemoteBackend {
    /// Resolves the API key up front so a missing variable fails before any episode runs.
    pub fn new(config: BackendConfig) -> Result<Self> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(
                std::env::var(var)
                    .map_err(|_| Error::Config(format!("environment variable `{var}` for model `{}` is not set", config.model)))?,
            ),
            None => None,
        };
        let http: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let gate = config.max_in_flight.map(|n| Arc::new(Gate::new(n)));
        Ok(Self { config, api_key, http, gate })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// Sends one request, retrying transport failures, 429 and 5xx responses.
    fn post(&self, body: &str) -> std::result::Result<(String, Duration), AgentError> {
        let url = self.config.completions_url();
        let attempts = self.config.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 1..=attempts {
            if attempt > 1 {
                std::thread::sleep(Duration::from_millis(250 * (1 << (attempt - 2).min(5))));
            }
            let _permit = self.gate.as_ref().map(|g| g.acquire());
            let started = Instant::now();
            let mut request = self.http.post(&url).header("Content-Type", "application/json");
            if let Some(key) = &self.api_key {
                request = request.header("Authorization", format!("Bearer {key}"));
            }
            let response = request.send(body).and_then(|mut resp| {
                let status = resp.status().as_u16();
                resp.body_mut().read_to_string().map(|text| (status, text))
            });
            let elapsed = started.elapsed();
            match response {
                Ok((200..=299, text)) => return Ok((text, elapsed)),
                Ok((status, text)) if status == 429 || status >= 500 => {
                    last_error = format!("HTTP {status}: {}", truncate(&text));
                }
                Ok((status, text)) => {
                    return Err(AgentError::Infrastructure { message: format!("HTTP {status}: {}", truncate(&text)), attempts: attempt });
                }
                Err(e @ (ureq::Error::BadUri(_) | ureq::Error::Http(_) | ureq::Error::InvalidProxyUrl)) => {
                    return Err(AgentError::Infrastructure { message: e.to_string(), attempts: attempt });
                }
                Err(e) => last_error = e.to_string(),
            }
            debug!(attempt, error = %last_error, "chat completion attempt failed");
        }
        Err(AgentError::Infrastructure { message: last_error, attempts })
    }
}

fn truncate(text: &str) -> String {
    text.chars().take(300).collect()
}

impl AgentFactory for RemoteBackend {
    fn model(&self) -> &str {
        &self.config.model
    }

    fn temperature(&self) -> f64 {
        self.config.temperature
    }

    fn agent_for(&self, _instance: &TaskInstance) -> Box<dyn Agent + '_> {
        Box::new(RemoteAgent { backend: self })
    }
}

pub struct RemoteAgent<'a> {
    backend: &'a RemoteBackend,
}

impl Agent for RemoteAgent<'_> {
    fn complete(&mut self, request: &AgentRequest<'_>) -> std::result::Result<AgentReply, AgentError> {
        let config = &self.backend.config;
        let body = request_body(request.conversation, request.tools, request.allowed_tools, &config.model, config.temperature);
        let (text, round_trip) = self.backend.post(&body.to_string())?;
        let parse_started = Instant::now();
        let mut reply = parse_response(&text, request.allowed_tools)?;
        reply.wait_time = round_trip + parse_started.elapsed();
        Ok(reply)
    }
}

/// Chat-completions request body. Only `temperature` is set among the
/// sampling parameters; everything else is left to the server defaults.
pub fn request_body(
    conversation: &Conversation,
    tools: &ToolSchema,
    allowed: &BTreeSet<ActionName>,
    model: &str,
    temperature: f64,
) -> Value {
    let messages: Vec<Value> = conversation.messages.iter().map(wire_message).collect();
    json!({
        "model": model,
        "messages": messages,
        "tools": tools.to_tools_json(allowed),
        "tool_choice": "auto",
        "temperature": temperature,
    })
}

fn wire_message(message: &Message) -> Value {
    match (message.role, &message.tool_call) {
        (Role::Assistant, Some(call)) => json!({
            "role": "assistant",
            "content": if message.content.is_empty() { Value::Null } else { Value::String(message.content.clone()) },
            "tool_calls": [{
                "id": call.id,
                "type": "function",
                "function": {
                    "name": call.call.name().as_str(),
                    "arguments": call.call.arguments().to_string(),
                }
            }],
        }),
        (Role::Tool, _) => json!({
            "role": "tool",
            "tool_call_id": message.tool_call_id.clone().unwrap_or_default(),
            "content": message.content,
        }),
        (role, _) => json!({ "role": role, "content": message.content }),
    }
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: WireReply,
}

#[derive(Deserialize)]
struct WireReply {
    #[serde(default)]
    content: Option<String>,
    #[serde(default)]
    tool_calls: Vec<WireToolCall>,
}

#[derive(Deserialize)]
struct WireToolCall {
    #[serde(default)]
    id: String,
    function: WireFunction,
}

#[derive(Deserialize)]
struct WireFunction {
    name: String,
    #[serde(default)]
    arguments: String,
}

/// Classifies a response body. A body that is not a chat completion at all is
/// an infrastructure failure; a completion whose call breaks the tool schema
/// is a malformed reply.
pub fn parse_response(body: &str, allowed: &BTreeSet<ActionName>) -> std::result::Result<AgentReply, AgentError> {
    let parsed: CompletionResponse = serde_json::from_str(body).map_err(|e| AgentError::Infrastructure {
        message: format!("response is not a chat completion: {e}"),
        attempts: 1,
    })?;
    let Some(choice) = parsed.choices.into_iter().next() else {
        return Err(AgentError::Infrastructure { message: "response has no choices".into(), attempts: 1 });
    };
    let reply = choice.message;
    let discarded_calls = reply.tool_calls.len().saturating_sub(1);
    if discarded_calls > 0 {
        warn!(discarded_calls, "agent returned parallel tool calls; only the first is executed");
    }
    let content = match reply.tool_calls.into_iter().next() {
        Some(call) => match parse_tool_call(&call.function.name, &call.function.arguments, allowed) {
            Ok(action) => ReplyContent::ToolCall { call: ToolCall { id: call.id, call: action } },
            Err(reason) => ReplyContent::Malformed { reason },
        },
        None => match reply.content {
            Some(text) if !text.trim().is_empty() => ReplyContent::Text { text },
            _ => ReplyContent::Malformed { reason: "reply has neither text nor a tool call".into() },
        },
    };
    Ok(AgentReply { content, raw: body.to_string(), wait_time: Duration::ZERO, discarded_calls })
}
