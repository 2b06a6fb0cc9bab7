//! Scripted agent with ground-truth access: follows [`oracle_plan`].

use super::{Agent, AgentError, AgentFactory, AgentReply, AgentRequest};
use crate::prompting::{Expect, ToolCall};
use crate::tasks::{oracle_plan, TaskInstance};
use crate::world::ActionCall;

pub const ORACLE_MODEL: &str = "oracle";

#[derive(Debug, Clone)]
pub struct OracleAgent {
    plan: Vec<ActionCall>,
    cursor: usize,
}

impl OracleAgent {
    pub fn new(instance: &TaskInstance) -> Self {
        Self { plan: oracle_plan(instance), cursor: 0 }
    }
}

impl Agent for OracleAgent {
    fn complete(&mut self, request: &AgentRequest<'_>) -> Result<AgentReply, AgentError> {
        let Some(next) = self.plan.get(self.cursor) else {
            return Ok(AgentReply::text("The plan is complete."));
        };
        if request.expect == Expect::TextReply {
            return Ok(AgentReply::text(format!("Next I will call {next}.")));
        }
        if !request.allowed_tools.contains(&next.name()) {
            return Ok(AgentReply::text(format!("The planned function {} is not available.", next.name())));
        }
        self.cursor += 1;
        Ok(AgentReply::tool_call(ToolCall { id: format!("call_{}", self.cursor), call: next.clone() }))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OracleFactory;

impl AgentFactory for OracleFactory {
    fn model(&self) -> &str {
        ORACLE_MODEL
    }

    fn agent_for(&self, instance: &TaskInstance) -> Box<dyn Agent + '_> {
        Box::new(OracleAgent::new(instance))
    }
}
