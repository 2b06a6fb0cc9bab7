//! The four-room household environment and the semantics of the five robot
//! functions.
//!
//! [`WorldState`] is a plain value. [`WorldState::apply`] mutates it in place and
//! [`execute_action`] is the functional form. Semantic failures never raise:
//! they come back as an [`ActionResponse`] with `ok == false` and leave the
//! world untouched apart from the call counter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::catalog::ObjectCatalog;

/// Maximum number of objects the robot can hold at once.
pub const CARRY_CAPACITY: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Room {
    Study,
    Parlor,
    Kitchen,
    Bedroom,
}

impl Room {
    pub const ALL: [Room; 4] = [Room::Study, Room::Parlor, Room::Kitchen, Room::Bedroom];

    pub fn as_str(self) -> &'static str {
        match self {
            Room::Study => "study",
            Room::Parlor => "parlor",
            Room::Kitchen => "kitchen",
            Room::Bedroom => "bedroom",
        }
    }
}

impl fmt::Display for Room {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Room {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Room::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown location `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionName {
    DriveToLocation,
    FindObject,
    GraspObject,
    PlaceObject,
    Exit,
}

impl ActionName {
    pub const ALL: [ActionName; 5] = [
        ActionName::DriveToLocation,
        ActionName::FindObject,
        ActionName::GraspObject,
        ActionName::PlaceObject,
        ActionName::Exit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionName::DriveToLocation => "drive_to_location",
            ActionName::FindObject => "find_object",
            ActionName::GraspObject => "grasp_object",
            ActionName::PlaceObject => "place_object",
            ActionName::Exit => "exit",
        }
    }

    pub fn all() -> BTreeSet<ActionName> {
        Self::ALL.into_iter().collect()
    }
}

impl fmt::Display for ActionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionName::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown function `{s}`"))
    }
}

/// A schema-valid robot function call.
///
/// Serializes as `{"name": ..., "arguments": {...}}` with the argument object
/// exactly as the tool schema declares it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCall", into = "RawCall")]
pub enum ActionCall {
    DriveToLocation { location: Room },
    FindObject { object_name_list: Vec<String> },
    GraspObject { object_name: String },
    PlaceObject { object_name: String },
    Exit,
}

#[derive(Serialize, Deserialize)]
struct RawCall {
    name: String,
    arguments: Value,
}

impl TryFrom<RawCall> for ActionCall {
    type Error = String;

    fn try_from(raw: RawCall) -> Result<Self, Self::Error> {
        ActionCall::from_parts(&raw.name, &raw.arguments)
    }
}

impl From<ActionCall> for RawCall {
    fn from(call: ActionCall) -> Self {
        RawCall { name: call.name().as_str().to_string(), arguments: call.arguments() }
    }
}

impl ActionCall {
    pub fn name(&self) -> ActionName {
        match self {
            ActionCall::DriveToLocation { .. } => ActionName::DriveToLocation,
            ActionCall::FindObject { .. } => ActionName::FindObject,
            ActionCall::GraspObject { .. } => ActionName::GraspObject,
            ActionCall::PlaceObject { .. } => ActionName::PlaceObject,
            ActionCall::Exit => ActionName::Exit,
        }
    }

    pub fn arguments(&self) -> Value {
        match self {
            ActionCall::DriveToLocation { location } => json!({ "location": location.as_str() }),
            ActionCall::FindObject { object_name_list } => json!({ "object_name_list": object_name_list }),
            ActionCall::GraspObject { object_name } | ActionCall::PlaceObject { object_name } => {
                json!({ "object_name": object_name })
            }
            ActionCall::Exit => json!({}),
        }
    }

    /// Validates a function name and argument object against the declared
    /// schema: known name, exactly the declared keys, correct JSON types, and
    /// a location inside the room enum.
    pub fn from_parts(name: &str, arguments: &Value) -> Result<Self, String> {
        let action: ActionName = name.parse()?;
        let empty = Map::new();
        let args = match arguments {
            Value::Object(map) => map,
            Value::Null if action == ActionName::Exit => &empty,
            other => return Err(format!("arguments of `{name}` must be an object, got {other}")),
        };
        let expect_keys = |keys: &[&str]| -> Result<(), String> {
            for key in args.keys() {
                if !keys.contains(&key.as_str()) {
                    return Err(format!("unexpected argument `{key}` for `{name}`"));
                }
            }
            for key in keys {
                if !args.contains_key(*key) {
                    return Err(format!("missing argument `{key}` for `{name}`"));
                }
            }
            Ok(())
        };
        let string_arg = |key: &str| -> Result<String, String> {
            args[key]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| format!("argument `{key}` of `{name}` must be a string"))
        };
        match action {
            ActionName::DriveToLocation => {
                expect_keys(&["location"])?;
                Ok(ActionCall::DriveToLocation { location: string_arg("location")?.parse()? })
            }
            ActionName::FindObject => {
                expect_keys(&["object_name_list"])?;
                let list = args["object_name_list"]
                    .as_array()
                    .ok_or_else(|| "argument `object_name_list` must be an array".to_string())?;
                let object_name_list = list
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| "`object_name_list` entries must be strings".to_string())
                    })
                    .collect::<Result<_, _>>()?;
                Ok(ActionCall::FindObject { object_name_list })
            }
            ActionName::GraspObject => {
                expect_keys(&["object_name"])?;
                Ok(ActionCall::GraspObject { object_name: string_arg("object_name")? })
            }
            ActionName::PlaceObject => {
                expect_keys(&["object_name"])?;
                Ok(ActionCall::PlaceObject { object_name: string_arg("object_name")? })
            }
            ActionName::Exit => {
                expect_keys(&[])?;
                Ok(ActionCall::Exit)
            }
        }
    }
}

impl fmt::Display for ActionCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name(), self.arguments())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionResponse {
    pub text: String,
    pub ok: bool,
    /// Per-name counts reported by a successful `find_object`, in request order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub found: Vec<(String, u32)>,
}

impl ActionResponse {
    fn success(text: String) -> Self {
        Self { text, ok: true, found: Vec::new() }
    }

    fn failure(text: String) -> Self {
        Self { text, ok: false, found: Vec::new() }
    }
}

/// Ground-truth simulation state. Zero counts are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    pub placements: BTreeMap<Room, BTreeMap<String, u32>>,
    pub robot_location: Room,
    pub carried: Vec<String>,
    pub calls_executed: u32,
}

impl Default for WorldState {
    fn default() -> Self {
        Self {
            placements: BTreeMap::new(),
            robot_location: Room::Parlor,
            carried: Vec::new(),
            calls_executed: 0,
        }
    }
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    /// The operator never leaves the parlor.
    pub fn operator_location(&self) -> Room {
        Room::Parlor
    }

    pub fn count(&self, room: Room, name: &str) -> u32 {
        self.placements
            .get(&room)
            .and_then(|objects| objects.get(name))
            .copied()
            .unwrap_or(0)
    }

    pub fn set_count(&mut self, room: Room, name: &str, count: u32) {
        let objects = self.placements.entry(room).or_default();
        if count == 0 {
            objects.remove(name);
            if objects.is_empty() {
                self.placements.remove(&room);
            }
        } else {
            objects.insert(name.to_string(), count);
        }
    }

    pub fn add(&mut self, room: Room, name: &str, delta: u32) {
        let current = self.count(room, name);
        self.set_count(room, name, current + delta);
    }

    /// Per-object totals over all rooms and the gripper.
    pub fn totals(&self) -> BTreeMap<String, u32> {
        let mut totals = BTreeMap::new();
        for objects in self.placements.values() {
            for (name, count) in objects {
                *totals.entry(name.clone()).or_insert(0) += count;
            }
        }
        for name in &self.carried {
            *totals.entry(name.clone()).or_insert(0) += 1;
        }
        totals
    }

    /// Applies `call`, advancing the call counter by one.
    pub fn apply(&mut self, call: &ActionCall, catalog: &ObjectCatalog) -> ActionResponse {
        self.calls_executed += 1;
        let here = self.robot_location;
        match call {
            ActionCall::DriveToLocation { location } => {
                self.robot_location = *location;
                ActionResponse::success(format!("You successfully arrived in the new location {location}."))
            }
            ActionCall::FindObject { object_name_list } => {
                if object_name_list.is_empty() {
                    return ActionResponse::failure("You must name at least one object to search for.".into());
                }
                let found: Vec<(String, u32)> = object_name_list
                    .iter()
                    .map(|name| (name.clone(), self.count(here, name)))
                    .collect();
                let listing = found
                    .iter()
                    .map(|(name, count)| format!("{count} {}", catalog.counted(name, *count)))
                    .collect::<Vec<_>>()
                    .join(", ");
                ActionResponse {
                    text: format!("The following items were found in the {here}: {listing}"),
                    ok: true,
                    found,
                }
            }
            ActionCall::GraspObject { object_name } => {
                if self.carried.len() >= CARRY_CAPACITY {
                    return ActionResponse::failure("You cannot carry more than two objects.".into());
                }
                let count = self.count(here, object_name);
                if count == 0 {
                    return ActionResponse::failure(format!("There is no {object_name} in the {here}."));
                }
                self.set_count(here, object_name, count - 1);
                self.carried.push(object_name.clone());
                ActionResponse::success(format!("You successfully grasped the object {object_name}."))
            }
            ActionCall::PlaceObject { object_name } => {
                let Some(idx) = self.carried.iter().position(|c| c == object_name) else {
                    return ActionResponse::failure(format!("You are not carrying a {object_name}."));
                };
                self.carried.remove(idx);
                self.add(here, object_name, 1);
                ActionResponse::success(format!("You successfully placed the object {object_name}."))
            }
            ActionCall::Exit => ActionResponse::success("The task has ended.".into()),
        }
    }
}

/// Functional form of [`WorldState::apply`].
pub fn execute_action(state: &WorldState, call: &ActionCall, catalog: &ObjectCatalog) -> (WorldState, ActionResponse) {
    let mut next = state.clone();
    let response = next.apply(call, catalog);
    (next, response)
}

/// Functions that can achieve their effect in `state`.
pub fn available_actions(state: &WorldState) -> BTreeSet<ActionName> {
    ActionName::ALL
        .into_iter()
        .filter(|action| match action {
            ActionName::PlaceObject => !state.carried.is_empty(),
            ActionName::GraspObject => state.carried.len() < CARRY_CAPACITY,
            _ => true,
        })
        .collect()
}
