//! Tool schema exposed to agents, in chat-completions `tools` form.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::prompting::PromptTable;
use crate::world::{ActionCall, ActionName, Room};

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub name: ActionName,
    pub description: String,
    pub parameters: Value,
}

/// JSON-schema signatures of the five robot functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolSchema {
    functions: Vec<FunctionSpec>,
}

impl ToolSchema {
    pub fn from_table(table: &PromptTable) -> Self {
        let param = |action: ActionName, key: &str| -> String {
            table.tool(action).parameters.get(key).cloned().unwrap_or_default()
        };
        let functions = ActionName::ALL
            .into_iter()
            .map(|action| {
                let parameters = match action {
                    ActionName::DriveToLocation => json!({
                        "type": "object",
                        "properties": {
                            "location": {
                                "type": "string",
                                "enum": Room::ALL.iter().map(|r| r.as_str()).collect::<Vec<_>>(),
                                "description": param(action, "location"),
                            }
                        },
                        "required": ["location"],
                        "additionalProperties": false,
                    }),
                    ActionName::FindObject => json!({
                        "type": "object",
                        "properties": {
                            "object_name_list": {
                                "type": "array",
                                "items": { "type": "string" },
                                "description": param(action, "object_name_list"),
                            }
                        },
                        "required": ["object_name_list"],
                        "additionalProperties": false,
                    }),
                    ActionName::GraspObject | ActionName::PlaceObject => json!({
                        "type": "object",
                        "properties": {
                            "object_name": {
                                "type": "string",
                                "description": param(action, "object_name"),
                            }
                        },
                        "required": ["object_name"],
                        "additionalProperties": false,
                    }),
                    ActionName::Exit => json!({
                        "type": "object",
                        "properties": {},
                        "additionalProperties": false,
                    }),
                };
                FunctionSpec { name: action, description: table.tool(action).description.clone(), parameters }
            })
            .collect();
        Self { functions }
    }

    pub fn functions(&self) -> &[FunctionSpec] {
        &self.functions
    }

    /// The `tools` array restricted to `allowed`, in canonical function order.
    pub fn to_tools_json(&self, allowed: &BTreeSet<ActionName>) -> Value {
        Value::Array(
            self.functions
                .iter()
                .filter(|f| allowed.contains(&f.name))
                .map(|f| {
                    json!({
                        "type": "function",
                        "function": {
                            "name": f.name.as_str(),
                            "description": f.description,
                            "parameters": f.parameters,
                        }
                    })
                })
                .collect(),
        )
    }
}

impl Default for ToolSchema {
    fn default() -> Self {
        Self::from_table(PromptTable::bundled())
    }
}

/// Validates a wire-level function call: the name must be offered this turn
/// and the argument string must be a JSON object matching the schema. An empty
/// argument string is accepted for `exit`.
pub fn parse_tool_call(name: &str, arguments: &str, allowed: &BTreeSet<ActionName>) -> Result<ActionCall, String> {
    let action: ActionName = name.parse()?;
    if !allowed.contains(&action) {
        return Err(format!("function `{name}` was not offered on this turn"));
    }
    let args: Value = if arguments.trim().is_empty() && action == ActionName::Exit {
        Value::Null
    } else {
        serde_json::from_str(arguments).map_err(|e| format!("arguments of `{name}` are not valid JSON: {e}"))?
    };
    ActionCall::from_parts(name, &args)
}
