//! Agents that answer a conversation with text or a tool call.
//!
//! Three implementations ship with the crate: [`remote`] speaks the
//! chat-completions wire format to any compatible server, [`oracle`] follows
//! the privileged solution plan, and [`replay`] plays back a recorded transcript.

pub mod oracle;
pub mod remote;
pub mod replay;
mod schema;

use std::collections::BTreeSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompting::{Conversation, Expect, ToolCall};
use crate::tasks::TaskInstance;
use crate::world::ActionName;

pub use schema::{parse_tool_call, FunctionSpec, ToolSchema};

/// Everything an agent is given for one turn.
#[derive(Debug, Clone, Copy)]
pub struct AgentRequest<'a> {
    pub conversation: &'a Conversation,
    pub tools: &'a ToolSchema,
    pub allowed_tools: &'a BTreeSet<ActionName>,
    pub expect: Expect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplyContent {
    Text { text: String },
    ToolCall { call: ToolCall },
    Malformed { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplyKind {
    Text,
    ToolCall,
    Malformed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentReply {
    pub content: ReplyContent,
    /// The reply payload exactly as received.
    pub raw: String,
    /// Time spent waiting on the agent for this reply.
    pub wait_time: Duration,
    /// Extra tool calls beyond the first, which are never executed.
    pub discarded_calls: usize,
}

impl AgentReply {
    pub fn text(text: impl Into<String>) -> Self {
        let text = text.into();
        Self { raw: text.clone(), content: ReplyContent::Text { text }, wait_time: Duration::ZERO, discarded_calls: 0 }
    }

    pub fn tool_call(call: ToolCall) -> Self {
        let raw = serde_json::to_string(&call).unwrap_or_default();
        Self { content: ReplyContent::ToolCall { call }, raw, wait_time: Duration::ZERO, discarded_calls: 0 }
    }

    pub fn malformed(reason: impl Into<String>, raw: impl Into<String>) -> Self {
        Self {
            content: ReplyContent::Malformed { reason: reason.into() },
            raw: raw.into(),
            wait_time: Duration::ZERO,
            discarded_calls: 0,
        }
    }

    pub fn kind(&self) -> ReplyKind {
        match self.content {
            ReplyContent::Text { .. } => ReplyKind::Text,
            ReplyContent::ToolCall { .. } => ReplyKind::ToolCall,
            ReplyContent::Malformed { .. } => ReplyKind::Malformed,
        }
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    /// Transport or server failure after all retries; says nothing about the agent's ability.
    #[error("infrastructure failure after {attempts} attempt(s): {message}")]
    Infrastructure { message: String, attempts: u32 },

    #[error("replay diverged at recorded message {index}: expected {expected:?}, got {actual:?}")]
    ReplayMismatch { index: usize, expected: String, actual: String },

    #[error("replay exhausted: no recorded agent reply left after message {index}")]
    ReplayExhausted { index: usize },
}

pub trait Agent: Send {
    fn complete(&mut self, request: &AgentRequest<'_>) -> Result<AgentReply, AgentError>;
}

/// Creates one agent per episode. Implementations are shared across worker threads.
pub trait AgentFactory: Send + Sync {
    /// Model identifier recorded in every result row.
    fn model(&self) -> &str;

    fn temperature(&self) -> f64 {
        0.0
    }

    fn agent_for(&self, instance: &TaskInstance) -> Box<dyn Agent + '_>;
}
