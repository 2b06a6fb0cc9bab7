pub mod backends;
pub mod catalog;
pub mod error;
pub mod prompting;
pub mod report;
pub mod runner;
pub mod tasks;
pub mod validation;
pub mod world;

pub use backends::{Agent, AgentError, AgentFactory, AgentReply};
pub use catalog::ObjectCatalog;
pub use error::{Error, Result};
pub use prompting::{Conversation, Message, TechniqueConfig};
pub use runner::{EpisodeResult, FailureReason, Harness};
pub use tasks::{TaskInstance, TaskKind};
pub use world::{ActionCall, Room, WorldState};
