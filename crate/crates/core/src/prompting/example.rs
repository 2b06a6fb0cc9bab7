//! The hand-written worked Equals example shown to agents with example-in-prompt.

use serde::{Deserialize, Serialize};

use super::conversation::{Message, MessageKind, ToolCall};
use crate::catalog::ObjectCatalog;
use crate::error::{Error, Result};
use crate::tasks::{check_target, TaskInstance, TaskParams};
use crate::world::{ActionCall, Room, WorldState};

const BUNDLED_EXAMPLE: &str = include_str!("../../data/eip_example.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleStep {
    pub call: ActionCall,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkedExample {
    pub instruction: String,
    pub world: WorldState,
    pub steps: Vec<ExampleStep>,
}

impl WorkedExample {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_EXAMPLE).expect("bundled worked example is valid")
    }

    /// The example as context messages: task, then each call with its response.
    pub fn messages(&self) -> Vec<Message> {
        let mut messages = vec![Message::user(self.instruction.clone(), MessageKind::Example)];
        for (idx, step) in self.steps.iter().enumerate() {
            let id = format!("example_call_{}", idx + 1);
            messages.push(Message::assistant_call(ToolCall { id: id.clone(), call: step.call.clone() }, MessageKind::Example));
            messages.push(Message::tool(id, step.response.clone(), MessageKind::Example));
        }
        messages
    }

    /// Replays the recorded calls against the example's own world and checks
    /// every response byte for byte, the final exit, and the Equals target.
    pub fn verify(&self, catalog: &ObjectCatalog) -> Result<()> {
        let fail = |msg: String| Error::Config(format!("worked example: {msg}"));
        let mut world = self.world.clone();
        for (idx, step) in self.steps.iter().enumerate() {
            let response = world.apply(&step.call, catalog);
            if response.text != step.response {
                return Err(fail(format!(
                    "step {} ({}) recorded {:?} but the simulator answers {:?}",
                    idx + 1,
                    step.call,
                    step.response,
                    response.text
                )));
            }
            if !response.ok {
                return Err(fail(format!("step {} ({}) fails: {}", idx + 1, step.call, response.text)));
            }
        }
        if self.steps.last().map(|s| &s.call) != Some(&ActionCall::Exit) {
            return Err(fail("does not end with exit".into()));
        }
        let task = TaskInstance {
            seed: 0,
            instruction: self.instruction.clone(),
            params: TaskParams::Equals { counted: "apple".into(), moved: "sponge".into(), room: Room::Bedroom },
            initial_world: self.world.clone(),
        };
        if !check_target(&task, &world) {
            return Err(fail("final world does not satisfy the task".into()));
        }
        Ok(())
    }
}
