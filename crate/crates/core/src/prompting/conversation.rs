//! Message context and the per-turn control flow of the prompting techniques.
//!
//! A turn is prepared with [`Conversation::next_turn`], which inserts whatever
//! technique prompts are due, refreshes the state description and reports what
//! kind of reply the agent is asked for. The agent's reply is then folded back
//! with [`Conversation::record_text`], [`Conversation::record_call`] and
//! [`Conversation::record_result`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::example::WorkedExample;
use super::knowledge::{render_state_description, RobotKnowledge};
use super::table::PromptTable;
use super::technique::TechniqueConfig;
use crate::error::Result;
use crate::tasks::TaskInstance;
use crate::world::{available_actions, ActionCall, ActionName, WorldState};

/// Executed calls between two chain-of-thought planning prompts.
pub const REPLAN_INTERVAL: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    System,
    Assistant,
    Tool,
}

/// Why a message is in the context. Not sent to agents; used for context
/// editing, replay and transcript analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Example,
    Instruction,
    PlanPrompt,
    ExecutePrompt,
    ReasonPrompt,
    ActPrompt,
    StateDescription,
    Plan,
    Reasoning,
    Text,
    Call,
    Result,
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolCall {
    pub id: String,
    pub call: ActionCall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call: Option<ToolCall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
    pub kind: MessageKind,
}

impl Message {
    pub fn user(content: impl Into<String>, kind: MessageKind) -> Self {
        Self { role: Role::User, content: content.into(), tool_call: None, tool_call_id: None, kind }
    }

    pub fn system(content: impl Into<String>, kind: MessageKind) -> Self {
        Self { role: Role::System, content: content.into(), tool_call: None, tool_call_id: None, kind }
    }

    pub fn assistant_text(content: impl Into<String>, kind: MessageKind) -> Self {
        Self { role: Role::Assistant, content: content.into(), tool_call: None, tool_call_id: None, kind }
    }

    pub fn assistant_call(call: ToolCall, kind: MessageKind) -> Self {
        Self { role: Role::Assistant, content: String::new(), tool_call: Some(call), tool_call_id: None, kind }
    }

    pub fn tool(id: impl Into<String>, content: impl Into<String>, kind: MessageKind) -> Self {
        Self { role: Role::Tool, content: content.into(), tool_call: None, tool_call_id: Some(id.into()), kind }
    }

    /// Whether the message was produced by the agent during the episode.
    pub fn is_agent_reply(&self) -> bool {
        self.role == Role::Assistant && self.kind != MessageKind::Example
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    TextReply,
    ToolCall,
}

/// What the agent is asked for on one turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub expect: Expect,
    pub allowed_tools: BTreeSet<ActionName>,
    /// Technique messages appended while preparing this turn.
    pub inserted: Vec<MessageKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Awaiting {
    Plan,
    Reasoning,
    Action,
}

/// Fixed prompt text plus the worked example.
#[derive(Debug, Clone)]
pub struct PromptKit {
    pub table: PromptTable,
    pub example: WorkedExample,
}

impl Default for PromptKit {
    fn default() -> Self {
        Self { table: PromptTable::bundled().clone(), example: WorkedExample::bundled() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub messages: Vec<Message>,
    pub calls_since_plan: u32,
    pub has_pending_reasoning: bool,
    technique: TechniqueConfig,
    awaiting: Option<Awaiting>,
    plan_ready: bool,
}

/// Initial context: worked example (with EiP), the instruction, and the first
/// planning prompt (with CoT).
pub fn build_initial_context(instance: &TaskInstance, technique: TechniqueConfig, kit: &PromptKit) -> Result<Conversation> {
    technique.validate()?;
    let mut messages = Vec::new();
    if technique.example_in_prompt {
        messages.extend(kit.example.messages());
    }
    messages.push(Message::user(instance.instruction.clone(), MessageKind::Instruction));
    let mut awaiting = None;
    if technique.cot {
        messages.push(Message::system(kit.table.technique.cot_plan.clone(), MessageKind::PlanPrompt));
        awaiting = Some(Awaiting::Plan);
    }
    Ok(Conversation {
        messages,
        calls_since_plan: 0,
        has_pending_reasoning: false,
        technique,
        awaiting,
        plan_ready: false,
    })
}

impl Conversation {
    pub fn technique(&self) -> TechniqueConfig {
        self.technique
    }

    /// Prepares the next agent turn.
    pub fn next_turn(&mut self, knowledge: &RobotKnowledge, world: &WorldState, table: &PromptTable) -> Turn {
        self.messages.retain(|m| m.kind != MessageKind::StateDescription);
        let mut inserted = Vec::new();
        let expect = match self.awaiting {
            Some(Awaiting::Plan | Awaiting::Reasoning) => Expect::TextReply,
            Some(Awaiting::Action) => Expect::ToolCall,
            None => self.open_turn(table, &mut inserted),
        };
        if self.technique.state_description {
            self.push_prompt(
                Message::system(render_state_description(knowledge, table), MessageKind::StateDescription),
                &mut inserted,
            );
        }
        let allowed_tools = if self.technique.adaptive_functions {
            available_actions(world)
        } else {
            ActionName::all()
        };
        Turn { expect, allowed_tools, inserted }
    }

    fn open_turn(&mut self, table: &PromptTable, inserted: &mut Vec<MessageKind>) -> Expect {
        let prompts = &table.technique;
        if self.technique.cot {
            if self.calls_since_plan >= REPLAN_INTERVAL {
                self.calls_since_plan = 0;
                self.awaiting = Some(Awaiting::Plan);
                self.push_prompt(Message::system(prompts.cot_plan.clone(), MessageKind::PlanPrompt), inserted);
                return Expect::TextReply;
            }
            if self.plan_ready {
                self.plan_ready = false;
                self.push_prompt(Message::system(prompts.cot_execute.clone(), MessageKind::ExecutePrompt), inserted);
            }
        }
        if self.technique.react {
            if self.has_pending_reasoning {
                self.awaiting = Some(Awaiting::Action);
                self.push_prompt(Message::system(prompts.react_act.clone(), MessageKind::ActPrompt), inserted);
                return Expect::ToolCall;
            }
            self.awaiting = Some(Awaiting::Reasoning);
            self.push_prompt(Message::system(prompts.react_reason.clone(), MessageKind::ReasonPrompt), inserted);
            return Expect::TextReply;
        }
        Expect::ToolCall
    }

    fn push_prompt(&mut self, message: Message, inserted: &mut Vec<MessageKind>) {
        inserted.push(message.kind);
        self.messages.push(message);
    }

    /// Records a text reply. A text reply that answers a planning or reasoning
    /// prompt advances the technique; any other text is kept and the pending
    /// request stands.
    pub fn record_text(&mut self, text: impl Into<String>) {
        let kind = match self.awaiting {
            Some(Awaiting::Plan) => {
                self.awaiting = None;
                self.plan_ready = true;
                MessageKind::Plan
            }
            Some(Awaiting::Reasoning) => {
                self.awaiting = None;
                self.has_pending_reasoning = true;
                MessageKind::Reasoning
            }
            Some(Awaiting::Action) | None => MessageKind::Text,
        };
        self.messages.push(Message::assistant_text(text, kind));
    }

    /// Records an executed tool call. A call that arrives where text was
    /// requested consumes the pending planning or reasoning step.
    pub fn record_call(&mut self, call: ToolCall) {
        self.awaiting = None;
        self.plan_ready = false;
        self.has_pending_reasoning = false;
        self.calls_since_plan += 1;
        self.messages.push(Message::assistant_call(call, MessageKind::Call));
    }

    pub fn record_result(&mut self, tool_call_id: impl Into<String>, text: impl Into<String>) {
        self.messages.push(Message::tool(tool_call_id, text, MessageKind::Result));
    }

    pub fn record_malformed(&mut self, raw: impl Into<String>) {
        self.messages.push(Message::assistant_text(raw, MessageKind::Malformed));
    }

    pub fn state_description_count(&self) -> usize {
        self.messages.iter().filter(|m| m.kind == MessageKind::StateDescription).count()
    }
}
