//! Context construction for the prompting techniques: adaptive functions,
//! chain-of-thought, ReAct, example-in-prompt and state descriptions.

mod conversation;
mod example;
mod knowledge;
mod table;
mod technique;

pub use conversation::{
    build_initial_context, Conversation, Expect, Message, MessageKind, PromptKit, Role, ToolCall, Turn, REPLAN_INTERVAL,
};
pub use example::{ExampleStep, WorkedExample};
pub use knowledge::{render_state_description, RobotKnowledge};
pub use table::{PromptTable, StatePhrases, TechniquePrompts, ToolText};
pub use technique::TechniqueConfig;
