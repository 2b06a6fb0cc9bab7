//! Plays back the agent turns of a recorded transcript and checks that the
//! live simulator answers every call exactly as recorded.

use super::{Agent, AgentError, AgentReply, AgentRequest};
use crate::prompting::{Message, MessageKind};

#[derive(Debug, Clone)]
pub struct ReplayAgent {
    recorded: Vec<Message>,
    cursor: usize,
}

impl ReplayAgent {
    pub fn new(recorded: Vec<Message>) -> Self {
        Self { recorded, cursor: 0 }
    }

    pub fn recorded(&self) -> &[Message] {
        &self.recorded
    }

    /// Agent replies not yet played back.
    pub fn remaining(&self) -> usize {
        self.recorded[self.cursor.min(self.recorded.len())..].iter().filter(|m| m.is_agent_reply()).count()
    }

    /// Index of the next recorded agent reply, if any is left.
    pub fn next_index(&self) -> Option<usize> {
        (self.cursor..self.recorded.len()).find(|&i| self.recorded[i].is_agent_reply())
    }

    /// Returns the next recorded reply after checking the live tool responses.
    pub fn replay_complete(&mut self, live: &[Message]) -> Result<AgentReply, AgentError> {
        let Some(index) = self.next_index() else {
            return Err(AgentError::ReplayExhausted { index: self.recorded.len() });
        };
        verify_tool_results(&self.recorded[..index], live)?;
        self.cursor = index + 1;
        let message = &self.recorded[index];
        Ok(match (&message.tool_call, message.kind) {
            (Some(call), _) => AgentReply::tool_call(call.clone()),
            (None, MessageKind::Malformed) => AgentReply::malformed("recorded malformed reply", message.content.clone()),
            (None, _) => AgentReply::text(message.content.clone()),
        })
    }
}

impl Agent for ReplayAgent {
    fn complete(&mut self, request: &AgentRequest<'_>) -> Result<AgentReply, AgentError> {
        self.replay_complete(&request.conversation.messages)
    }
}

/// Compares the episode's tool responses in `live` with those in `recorded`,
/// in order. Worked-example messages are ignored on both sides.
pub fn verify_tool_results(recorded: &[Message], live: &[Message]) -> Result<(), AgentError> {
    let expected: Vec<(usize, &Message)> =
        recorded.iter().enumerate().filter(|(_, m)| m.kind == MessageKind::Result).collect();
    let actual: Vec<&Message> = live.iter().filter(|m| m.kind == MessageKind::Result).collect();
    for i in 0..expected.len().max(actual.len()) {
        match (expected.get(i), actual.get(i)) {
            (Some((_, e)), Some(a)) if e.content == a.content => {}
            (Some((index, e)), a) => {
                return Err(AgentError::ReplayMismatch {
                    index: *index,
                    expected: e.content.clone(),
                    actual: a.map(|m| m.content.clone()).unwrap_or_else(|| "<no tool response>".into()),
                })
            }
            (None, Some(a)) => {
                return Err(AgentError::ReplayMismatch {
                    index: recorded.len(),
                    expected: "<no tool response>".into(),
                    actual: a.content.clone(),
                })
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(())
}
