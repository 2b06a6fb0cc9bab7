use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::ActionName;

const BUNDLED_PROMPTS: &str = include_str!("../../data/prompts.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TechniquePrompts {
    pub cot_plan: String,
    pub cot_execute: String,
    pub react_reason: String,
    pub react_act: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatePhrases {
    pub header: String,
    pub known_objects: String,
    pub nothing_observed: String,
    pub carrying: String,
    pub carrying_nothing: String,
    pub robot_location: String,
    pub operator_location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolText {
    pub description: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
}

/// All fixed prompt text, loaded from a versioned TOML document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTable {
    pub version: u32,
    pub technique: TechniquePrompts,
    pub state: StatePhrases,
    pub tools: BTreeMap<String, ToolText>,
}

impl PromptTable {
    pub fn parse(text: &str) -> Result<Self> {
        let table: PromptTable = toml::from_str(text).map_err(|e| Error::Config(format!("prompt table: {e}")))?;
        for action in ActionName::ALL {
            if !table.tools.contains_key(action.as_str()) {
                return Err(Error::Config(format!("prompt table lacks a description for `{action}`")));
            }
        }
        Ok(table)
    }

    /// The table shipped with the crate.
    pub fn bundled() -> &'static PromptTable {
        static TABLE: OnceLock<PromptTable> = OnceLock::new();
        TABLE.get_or_init(|| PromptTable::parse(BUNDLED_PROMPTS).expect("bundled prompt table is valid"))
    }

    pub fn tool(&self, action: ActionName) -> &ToolText {
        &self.tools[action.as_str()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_parses() {
        let table = PromptTable::bundled();
        assert_eq!(table.technique.cot_plan, "Briefly summarize the next steps to accomplish the task in text form.");
        assert_eq!(table.technique.cot_execute, "From now on only use function calls to execute the task.");
        assert_eq!(table.technique.react_reason, "Briefly state your reasoning for the next single action.");
        assert_eq!(table.technique.react_act, "Now call exactly one function.");
        assert!(table.tool(ActionName::Exit).parameters.is_empty());
        assert!(table.tool(ActionName::DriveToLocation).parameters.contains_key("location"));
    }

    #[test]
    fn missing_tool_is_rejected() {
        let trimmed: String = BUNDLED_PROMPTS.split("[tools.exit]").next().unwrap().to_string();
        assert!(PromptTable::parse(&trimmed).is_err());
    }
}
