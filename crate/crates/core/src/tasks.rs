//! Seeded task generation for the four task families, their target
//! conditions, and a privileged plan that solves any generated instance.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::ObjectCatalog;
use crate::error::{Error, Result};
use crate::world::{ActionCall, Room, WorldState, CARRY_CAPACITY};

/// Rooms an object can be fetched from.
const REMOTE_ROOMS: [Room; 3] = [Room::Study, Room::Kitchen, Room::Bedroom];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Fetch,
    Conditional,
    Equals,
    Distribute,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::Fetch, TaskKind::Conditional, TaskKind::Equals, TaskKind::Distribute];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Fetch => "fetch",
            TaskKind::Conditional => "conditional",
            TaskKind::Equals => "equals",
            TaskKind::Distribute => "distribute",
        }
    }

    /// Column heading used in reports.
    pub fn title(self) -> &'static str {
        match self {
            TaskKind::Fetch => "Fetch",
            TaskKind::Conditional => "Conditional",
            TaskKind::Equals => "Equals",
            TaskKind::Distribute => "Distribute",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        TaskKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower)
            .ok_or_else(|| Error::Config(format!("unknown task kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TaskParams {
    Fetch {
        object: String,
        room: Room,
    },
    Conditional {
        probe: String,
        probe_room: Room,
        then_object: String,
        then_room: Room,
        else_object: String,
        else_room: Room,
    },
    Equals {
        counted: String,
        moved: String,
        room: Room,
    },
    Distribute {
        object: String,
        start_room: Room,
    },
}

impl TaskParams {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskParams::Fetch { .. } => TaskKind::Fetch,
            TaskParams::Conditional { .. } => TaskKind::Conditional,
            TaskParams::Equals { .. } => TaskKind::Equals,
            TaskParams::Distribute { .. } => TaskKind::Distribute,
        }
    }

    fn objects(&self) -> Vec<&str> {
        match self {
            TaskParams::Fetch { object, .. } | TaskParams::Distribute { object, .. } => vec![object],
            TaskParams::Conditional { probe, then_object, else_object, .. } => vec![probe, then_object, else_object],
            TaskParams::Equals { counted, moved, .. } => vec![counted, moved],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub seed: u64,
    pub instruction: String,
    pub params: TaskParams,
    pub initial_world: WorldState,
}

impl TaskInstance {
    pub fn kind(&self) -> TaskKind {
        self.params.kind()
    }
}

/// Knobs for distractor placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistractorConfig {
    pub min_kinds: usize,
    pub max_kinds: usize,
    pub min_count: u32,
    pub max_count: u32,
}

impl Default for DistractorConfig {
    fn default() -> Self {
        Self { min_kinds: 2, max_kinds: 4, min_count: 1, max_count: 3 }
    }
}

/// Generates an instance with the default distractor density.
pub fn generate_task(kind: TaskKind, seed: u64, catalog: &ObjectCatalog) -> Result<TaskInstance> {
    generate_task_with(kind, seed, catalog, &DistractorConfig::default())
}

pub fn generate_task_with(
    kind: TaskKind,
    seed: u64,
    catalog: &ObjectCatalog,
    distractors: &DistractorConfig,
) -> Result<TaskInstance> {
    if distractors.min_kinds > distractors.max_kinds || distractors.min_count == 0 || distractors.min_count > distractors.max_count {
        return Err(Error::Config(format!("invalid distractor configuration {distractors:?}")));
    }
    let needed = match kind {
        TaskKind::Fetch | TaskKind::Distribute => 1,
        TaskKind::Equals => 2,
        TaskKind::Conditional => 3,
    };
    let names: Vec<&str> = catalog.names().collect();
    if names.len() < needed {
        return Err(Error::Catalog(format!("{kind} tasks need at least {needed} catalog objects, catalog has {}", names.len())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut world = WorldState::new();
    let pick = |n: usize, rng: &mut ChaCha8Rng| -> Vec<String> {
        names.choose_multiple(rng, n).map(|s| s.to_string()).collect()
    };

    let (params, instruction) = match kind {
        TaskKind::Fetch => {
            let object = pick(1, &mut rng).remove(0);
            let room = *REMOTE_ROOMS.choose(&mut rng).unwrap();
            world.set_count(room, &object, rng.gen_range(1..=3));
            let instruction = format!("Please get me a {object} from the {room}.");
            (TaskParams::Fetch { object, room }, instruction)
        }
        TaskKind::Conditional => {
            let mut objs = pick(3, &mut rng);
            let (else_object, then_object, probe) = (objs.pop().unwrap(), objs.pop().unwrap(), objs.pop().unwrap());
            let probe_room = *REMOTE_ROOMS.choose(&mut rng).unwrap();
            let then_room = *REMOTE_ROOMS.choose(&mut rng).unwrap();
            let else_room = *REMOTE_ROOMS.choose(&mut rng).unwrap();
            if rng.gen_bool(0.5) {
                world.set_count(probe_room, &probe, rng.gen_range(1..=2));
            }
            world.set_count(then_room, &then_object, rng.gen_range(1..=2));
            world.set_count(else_room, &else_object, rng.gen_range(1..=2));
            let instruction = format!(
                "Check if there is a {probe} in the {probe_room}. If you find one, bring me a {then_object} from the {then_room}. If not, bring me a {else_object} from the {else_room}."
            );
            (TaskParams::Conditional { probe, probe_room, then_object, then_room, else_object, else_room }, instruction)
        }
        TaskKind::Equals => {
            let mut objs = pick(2, &mut rng);
            let (moved, counted) = (objs.pop().unwrap(), objs.pop().unwrap());
            let mut room = *REMOTE_ROOMS.choose(&mut rng).unwrap();
            // Reserved for the worked example shown with example-in-prompt.
            if room == Room::Bedroom && counted == "apple" && moved == "sponge" {
                room = *[Room::Study, Room::Kitchen].choose(&mut rng).unwrap();
            }
            let n = rng.gen_range(1..=3);
            world.set_count(room, &counted, n);
            world.set_count(room, &moved, rng.gen_range(n..=n + 2));
            let instruction = format!("For every {counted} in the {room}, move a {moved} from the {room} to the parlor.");
            (TaskParams::Equals { counted, moved, room }, instruction)
        }
        TaskKind::Distribute => {
            let object = pick(1, &mut rng).remove(0);
            let start_room = *Room::ALL.choose(&mut rng).unwrap();
            world.set_count(start_room, &object, rng.gen_range(4..=6));
            let plural = catalog.plural(&object);
            let instruction = format!(
                "Please distribute the {plural} evenly so that each location contains at least one {object}. You can start with the {plural} in the {start_room}."
            );
            (TaskParams::Distribute { object, start_room }, instruction)
        }
    };

    let reserved = params.objects();
    let pool: Vec<&str> = names.iter().copied().filter(|n| !reserved.contains(n)).collect();
    for room in Room::ALL {
        let kinds = rng.gen_range(distractors.min_kinds..=distractors.max_kinds).min(pool.len());
        for name in pool.choose_multiple(&mut rng, kinds) {
            world.set_count(room, name, rng.gen_range(distractors.min_count..=distractors.max_count));
        }
    }

    Ok(TaskInstance { seed, instruction, params, initial_world: world })
}

/// Whether `final_world` satisfies the instance's target condition.
pub fn check_target(instance: &TaskInstance, final_world: &WorldState) -> bool {
    let initial = &instance.initial_world;
    match &instance.params {
        TaskParams::Fetch { object, .. } => final_world.count(Room::Parlor, object) >= 1,
        TaskParams::Conditional { probe, probe_room, then_object, else_object, .. } => {
            let required = if initial.count(*probe_room, probe) >= 1 { then_object } else { else_object };
            final_world.count(Room::Parlor, required) >= 1
        }
        TaskParams::Equals { counted, moved, room } => {
            let n = i64::from(initial.count(*room, counted));
            let parlor_gain = i64::from(final_world.count(Room::Parlor, moved)) - i64::from(initial.count(Room::Parlor, moved));
            let source_loss = i64::from(initial.count(*room, moved)) - i64::from(final_world.count(*room, moved));
            parlor_gain == n && source_loss == n
        }
        TaskParams::Distribute { object, .. } => Room::ALL.iter().all(|r| final_world.count(*r, object) >= 1),
    }
}

/// A call sequence that solves `instance` from its initial world, ending in `exit`.
pub fn oracle_plan(instance: &TaskInstance) -> Vec<ActionCall> {
    let mut plan = PlanBuilder::default();
    let initial = &instance.initial_world;
    match &instance.params {
        TaskParams::Fetch { object, room } => {
            plan.drive(*room);
            plan.find(&[object]);
            plan.grasp(object);
            plan.drive(Room::Parlor);
            plan.place(object);
        }
        TaskParams::Conditional { probe, probe_room, then_object, then_room, else_object, else_room } => {
            plan.drive(*probe_room);
            plan.find(&[probe]);
            let (object, room) = if initial.count(*probe_room, probe) >= 1 {
                (then_object, *then_room)
            } else {
                (else_object, *else_room)
            };
            plan.drive(room);
            plan.find(&[object]);
            plan.grasp(object);
            plan.drive(Room::Parlor);
            plan.place(object);
        }
        TaskParams::Equals { counted, moved, room } => {
            plan.drive(*room);
            plan.find(&[counted]);
            plan.find(&[moved]);
            let mut remaining = initial.count(*room, counted) as usize;
            while remaining > 0 {
                let batch = remaining.min(CARRY_CAPACITY);
                for _ in 0..batch {
                    plan.grasp(moved);
                }
                plan.drive(Room::Parlor);
                for _ in 0..batch {
                    plan.place(moved);
                }
                remaining -= batch;
                if remaining > 0 {
                    plan.drive(*room);
                }
            }
        }
        TaskParams::Distribute { object, start_room } => {
            let targets: Vec<Room> = Room::ALL.into_iter().filter(|r| r != start_room).collect();
            plan.drive(*start_room);
            plan.find(&[object]);
            for chunk in targets.chunks(CARRY_CAPACITY) {
                plan.drive(*start_room);
                for _ in chunk {
                    plan.grasp(object);
                }
                for target in chunk {
                    plan.drive(*target);
                    plan.place(object);
                }
            }
        }
    }
    plan.calls.push(ActionCall::Exit);
    plan.calls
}

/// Accumulates calls while skipping drives to the room the robot is already in.
struct PlanBuilder {
    calls: Vec<ActionCall>,
    at: Room,
}

impl Default for PlanBuilder {
    fn default() -> Self {
        Self { calls: Vec::new(), at: Room::Parlor }
    }
}

impl PlanBuilder {
    fn drive(&mut self, location: Room) {
        if self.at != location {
            self.at = location;
            self.calls.push(ActionCall::DriveToLocation { location });
        }
    }

    fn find(&mut self, names: &[&String]) {
        self.calls.push(ActionCall::FindObject { object_name_list: names.iter().map(|n| n.to_string()).collect() });
    }

    fn grasp(&mut self, name: &str) {
        self.calls.push(ActionCall::GraspObject { object_name: name.to_string() });
    }

    fn place(&mut self, name: &str) {
        self.calls.push(ActionCall::PlaceObject { object_name: name.to_string() });
    }
}
