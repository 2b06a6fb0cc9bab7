//! The prompt, reply, execute loop for one episode, and experiment matrices.

mod log;
mod matrix;
mod playback;

use std::collections::BTreeSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::backends::{Agent, AgentError, AgentRequest, ReplyContent, ReplyKind, ToolSchema};
use crate::catalog::ObjectCatalog;
use crate::error::{Error, Result};
use crate::prompting::{build_initial_context, Expect, Message, MessageKind, PromptKit, RobotKnowledge, TechniqueConfig};
use crate::tasks::{check_target, TaskInstance, TaskKind};
use crate::world::{ActionCall, ActionName, WorldState};

pub use log::{parse_transcript, read_index, read_transcript, transcript_path, write_index, write_transcript, IndexRow, ResultIndex, Transcript};
pub use matrix::{derive_seed, MatrixSpec};

/// Executed function calls allowed per episode, failed calls included.
pub const CALL_BUDGET: u32 = 40;

/// Agent replies allowed per episode, text replies included.
pub const TURN_LIMIT: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    None,
    MalformedCall,
    BudgetExhaustedTargetUnmet,
    ExitedTargetUnmet,
    InfrastructureError,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::None => "none",
            FailureReason::MalformedCall => "malformed_call",
            FailureReason::BudgetExhaustedTargetUnmet => "budget_exhausted_target_unmet",
            FailureReason::ExitedTargetUnmet => "exited_target_unmet",
            FailureReason::InfrastructureError => "infrastructure_error",
        }
    }
}

/// One agent turn as the harness saw it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub expect: Expect,
    pub allowed_tools: BTreeSet<ActionName>,
    pub inserted: Vec<MessageKind>,
    /// Calls executed before this turn.
    pub calls_before: u32,
    /// Absent when the agent failed to answer.
    pub reply: Option<ReplyKind>,
    pub wait_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub instance: TaskInstance,
    pub technique: TechniqueConfig,
    pub model: String,
    pub temperature: f64,
    pub success: bool,
    pub failure_reason: FailureReason,
    pub calls_used: u32,
    /// Seconds spent waiting on the agent; simulation time is not included.
    pub agent_wait_total_s: f64,
    pub turns: Vec<TurnRecord>,
    pub transcript: Vec<Message>,
    pub final_world: WorldState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infrastructure_error: Option<String>,
}

impl EpisodeResult {
    pub fn kind(&self) -> TaskKind {
        self.instance.kind()
    }

    pub fn summary(&self) -> EpisodeSummary {
        EpisodeSummary {
            model: self.model.clone(),
            temperature: self.temperature,
            task: self.kind(),
            seed: self.instance.seed,
            technique: self.technique.label(),
            success: self.success,
            failure_reason: self.failure_reason,
            calls_used: self.calls_used,
            agent_wait_total_s: self.agent_wait_total_s,
        }
    }
}

/// The per-episode row kept in a results index and consumed by the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub model: String,
    pub temperature: f64,
    pub task: TaskKind,
    pub seed: u64,
    pub technique: String,
    pub success: bool,
    pub failure_reason: FailureReason,
    pub calls_used: u32,
    pub agent_wait_total_s: f64,
}

/// Shared, read-only episode inputs.
#[derive(Debug, Clone)]
pub struct Harness {
    pub catalog: ObjectCatalog,
    pub kit: PromptKit,
    pub tools: ToolSchema,
}

impl Default for Harness {
    fn default() -> Self {
        Self::new(ObjectCatalog::default(), PromptKit::default())
    }
}

impl Harness {
    pub fn new(catalog: ObjectCatalog, kit: PromptKit) -> Self {
        let tools = ToolSchema::from_table(&kit.table);
        Self { catalog, kit, tools }
    }

    /// Runs one episode to completion. Infrastructure failures end up in the
    /// result; only configuration problems and replay divergence are errors.
    pub fn run_episode(
        &self,
        instance: &TaskInstance,
        technique: TechniqueConfig,
        agent: &mut dyn Agent,
        model: &str,
        temperature: f64,
    ) -> Result<EpisodeResult> {
        let mut conversation = build_initial_context(instance, technique, &self.kit)?;
        let mut world = instance.initial_world.clone();
        let mut knowledge = RobotKnowledge::new();
        let mut turns = Vec::new();
        let mut calls = 0u32;
        let mut wait = Duration::ZERO;
        let mut infrastructure_error = None;

        let (success, failure_reason) = loop {
            if calls >= CALL_BUDGET || turns.len() >= TURN_LIMIT {
                break finish(instance, &world, FailureReason::BudgetExhaustedTargetUnmet);
            }
            let turn = conversation.next_turn(&knowledge, &world, &self.kit.table);
            let mut record = TurnRecord {
                expect: turn.expect,
                allowed_tools: turn.allowed_tools,
                inserted: turn.inserted,
                calls_before: calls,
                reply: None,
                wait_s: 0.0,
            };
            let request = AgentRequest {
                conversation: &conversation,
                tools: &self.tools,
                allowed_tools: &record.allowed_tools,
                expect: turn.expect,
            };
            let reply = match agent.complete(&request) {
                Ok(reply) => reply,
                Err(AgentError::Infrastructure { message, attempts }) => {
                    tracing::warn!(seed = instance.seed, attempts, "{message}");
                    infrastructure_error = Some(message);
                    turns.push(record);
                    break (false, FailureReason::InfrastructureError);
                }
                Err(other) => return Err(Error::Agent(other)),
            };
            wait += reply.wait_time;
            record.wait_s = reply.wait_time.as_secs_f64();
            record.reply = Some(reply.kind());
            let allowed = record.allowed_tools.clone();
            turns.push(record);

            match reply.content {
                ReplyContent::Text { text } => conversation.record_text(text),
                ReplyContent::Malformed { .. } => {
                    conversation.record_malformed(reply.raw);
                    break (false, FailureReason::MalformedCall);
                }
                ReplyContent::ToolCall { call } if !allowed.contains(&call.call.name()) => {
                    conversation.record_malformed(reply.raw);
                    break (false, FailureReason::MalformedCall);
                }
                ReplyContent::ToolCall { call } => {
                    calls += 1;
                    let response = world.apply(&call.call, &self.catalog);
                    let is_exit = call.call == ActionCall::Exit;
                    let id = call.id.clone();
                    conversation.record_call(call.clone());
                    if is_exit {
                        break finish(instance, &world, FailureReason::ExitedTargetUnmet);
                    }
                    knowledge.update(&call.call, &response);
                    conversation.record_result(id, response.text);
                }
            }
        };

        Ok(EpisodeResult {
            instance: instance.clone(),
            technique,
            model: model.to_string(),
            temperature,
            success,
            failure_reason,
            calls_used: calls,
            agent_wait_total_s: wait.as_secs_f64(),
            turns,
            transcript: conversation.messages,
            final_world: world,
            infrastructure_error,
        })
    }
}

fn finish(instance: &TaskInstance, world: &WorldState, otherwise: FailureReason) -> (bool, FailureReason) {
    if check_target(instance, world) {
        (true, FailureReason::None)
    } else {
        (false, otherwise)
    }
}
