//! What the robot has perceived so far, and its rendering as a state description.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::table::PromptTable;
use crate::world::{ActionCall, ActionResponse, Room};

/// Perceived state, built only from the agent's own calls and their responses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotKnowledge {
    pub observed: BTreeMap<Room, BTreeMap<String, u32>>,
    pub carried: Vec<String>,
    pub robot_location: Room,
    pub operator_location: Room,
}

impl Default for RobotKnowledge {
    fn default() -> Self {
        Self {
            observed: BTreeMap::new(),
            carried: Vec::new(),
            robot_location: Room::Parlor,
            operator_location: Room::Parlor,
        }
    }
}

impl RobotKnowledge {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one executed call and its response into the knowledge. Failed
    /// actions change nothing.
    pub fn update(&mut self, call: &ActionCall, response: &ActionResponse) {
        if !response.ok {
            return;
        }
        let here = self.robot_location;
        match call {
            ActionCall::DriveToLocation { location } => self.robot_location = *location,
            ActionCall::FindObject { .. } => {
                let room = self.observed.entry(here).or_default();
                for (name, count) in &response.found {
                    room.insert(name.clone(), *count);
                }
            }
            ActionCall::GraspObject { object_name } => {
                if let Some(count) = self.observed.get_mut(&here).and_then(|r| r.get_mut(object_name)) {
                    *count = count.saturating_sub(1);
                }
                self.carried.push(object_name.clone());
            }
            ActionCall::PlaceObject { object_name } => {
                *self.observed.entry(here).or_default().entry(object_name.clone()).or_insert(0) += 1;
                if let Some(idx) = self.carried.iter().position(|c| c == object_name) {
                    self.carried.remove(idx);
                }
            }
            ActionCall::Exit => {}
        }
    }
}

/// Deterministic text summary: observed objects per room (rooms in fixed
/// order, objects alphabetical), carried objects, robot and operator location.
pub fn render_state_description(knowledge: &RobotKnowledge, table: &PromptTable) -> String {
    let phrases = &table.state;
    let mut lines = vec![phrases.header.clone()];
    if knowledge.observed.values().all(|objects| objects.is_empty()) {
        lines.push(phrases.nothing_observed.clone());
    } else {
        lines.push(phrases.known_objects.clone());
        for room in Room::ALL {
            let Some(objects) = knowledge.observed.get(&room).filter(|o| !o.is_empty()) else {
                continue;
            };
            let listing = objects
                .iter()
                .map(|(name, count)| format!("{name} ×{count}"))
                .collect::<Vec<_>>()
                .join(", ");
            lines.push(format!("- {room}: {listing}"));
        }
    }
    let carrying = if knowledge.carried.is_empty() {
        phrases.carrying_nothing.clone()
    } else {
        knowledge.carried.join(", ")
    };
    lines.push(format!("{} {carrying}", phrases.carrying));
    lines.push(format!("{} {}", phrases.robot_location, knowledge.robot_location));
    lines.push(format!("{} {}", phrases.operator_location, knowledge.operator_location));
    lines.join("\n")
}
