//! Self-checks run by `taskbot validate`: the oracle suite, the golden Fetch
//! replay, the worked example, and a randomized world fuzz.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backends::oracle::OracleFactory;
use crate::catalog::ObjectCatalog;
use crate::prompting::{MessageKind, TechniqueConfig};
use crate::runner::{parse_transcript, FailureReason, Harness, MatrixSpec, CALL_BUDGET};
use crate::tasks::TaskKind;
use crate::world::{execute_action, ActionCall, ActionResponse, Room, WorldState, CARRY_CAPACITY};

/// Recorded AF + CoT Fetch episode: a sponge from the kitchen in six calls.
pub const GOLDEN_FETCH: &str = include_str!("../data/fixtures/fetch_sponge_cot.jsonl");

/// The find response the golden episode must reproduce.
pub const GOLDEN_FIND_RESPONSE: &str = "The following items were found in the kitchen: 3 sponges";

/// Transition function under test.
pub type StepFn = fn(&WorldState, &ActionCall, &ObjectCatalog) -> (WorldState, ActionResponse);

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub oracle_seeds: u32,
    pub base_seed: u64,
    pub fuzz_sequences: usize,
    pub fuzz_seed: u64,
    pub parallelism: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { oracle_seeds: 50, base_seed: 0, fuzz_sequences: 10_000, fuzz_seed: 0, parallelism: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }

    fn push(&mut self, name: &'static str, outcome: Result<String, String>) {
        let (passed, detail) = match outcome {
            Ok(detail) => (true, detail),
            Err(detail) => (false, detail),
        };
        self.checks.push(CheckOutcome { name, passed, detail });
    }
}

pub fn run_validation(harness: &Harness, options: &ValidationOptions) -> ValidationReport {
    run_validation_with(harness, options, execute_action)
}

/// Like [`run_validation`] with a substitute world transition for the fuzz.
pub fn run_validation_with(harness: &Harness, options: &ValidationOptions, step: StepFn) -> ValidationReport {
    let mut report = ValidationReport::default();
    report.push("oracle suite", oracle_suite(harness, options));
    report.push("golden fetch replay", golden_replay(harness));
    report.push(
        "worked example replay",
        harness.kit.example.verify(&harness.catalog).map(|_| "example replays exactly".into()).map_err(|e| e.to_string()),
    );
    let fuzz = world_fuzz(&harness.catalog, options.fuzz_sequences, options.fuzz_seed, step);
    report.push("conservation", fuzz.conservation);
    report.push("carry limit", fuzz.carry_limit);
    report.push("failure purity", fuzz.failure_purity);
    report
}

fn oracle_suite(harness: &Harness, options: &ValidationOptions) -> Result<String, String> {
    let spec = MatrixSpec {
        kinds: TaskKind::ALL.to_vec(),
        techniques: TechniqueConfig::PRESETS.to_vec(),
        repetitions: options.oracle_seeds,
        base_seed: options.base_seed,
        parallelism: options.parallelism,
    };
    let results = harness.run_matrix(&spec, &[&OracleFactory]).map_err(|e| e.to_string())?;
    if let Some(bad) = results.iter().find(|r| !r.success || r.calls_used > CALL_BUDGET) {
        return Err(format!(
            "{} / {} seed {}: {} after {} calls",
            bad.kind(),
            bad.technique,
            bad.instance.seed,
            bad.failure_reason.as_str(),
            bad.calls_used
        ));
    }
    Ok(format!("{} episodes, all successful", results.len()))
}

fn golden_replay(harness: &Harness) -> Result<String, String> {
    let transcript = parse_transcript(GOLDEN_FETCH, Path::new("fetch_sponge_cot.jsonl")).map_err(|e| e.to_string())?;
    let live = harness.replay(&transcript).map_err(|e| e.to_string())?;
    if !live.transcript.iter().any(|m| m.kind == MessageKind::Result && m.content == GOLDEN_FIND_RESPONSE) {
        return Err(format!("no tool response reads {GOLDEN_FIND_RESPONSE:?}"));
    }
    if !live.success || live.failure_reason != FailureReason::None || live.calls_used != 6 {
        return Err(format!("{} after {} calls", live.failure_reason.as_str(), live.calls_used));
    }
    Ok("byte-identical tool responses, target met in 6 calls".into())
}

#[derive(Debug, Clone)]
pub struct FuzzOutcome {
    pub conservation: Result<String, String>,
    pub carry_limit: Result<String, String>,
    pub failure_purity: Result<String, String>,
}

/// Runs `sequences` random schema-valid call sequences over random worlds
/// through `step` and records the first violation of each property.
pub fn world_fuzz(catalog: &ObjectCatalog, sequences: usize, seed: u64, step: StepFn) -> FuzzOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<&str> = catalog.names().collect();
    let mut conservation = None;
    let mut carry_limit = None;
    let mut failure_purity = None;
    let mut steps = 0usize;

    for case in 0..sequences {
        let mut world = random_world(&mut rng, &names);
        let totals = world.totals();
        for _ in 0..rng.gen_range(1..=30) {
            let call = random_call(&mut rng, &names);
            let (next, response) = step(&world, &call, catalog);
            steps += 1;
            if conservation.is_none() && next.totals() != totals {
                conservation = Some(format!("case {case}: totals changed after {call}"));
            }
            if carry_limit.is_none() && next.carried.len() > CARRY_CAPACITY {
                carry_limit = Some(format!("case {case}: carrying {} objects after {call}", next.carried.len()));
            }
            if failure_purity.is_none() && !response.ok {
                let mut expected = world.clone();
                expected.calls_executed += 1;
                if next != expected {
                    failure_purity = Some(format!("case {case}: failed {call} changed the world"));
                }
            }
            world = next;
        }
    }
    let verdict = |violation: Option<String>| match violation {
        Some(v) => Err(v),
        None => Ok(format!("{sequences} sequences, {steps} calls")),
    };
    FuzzOutcome {
        conservation: verdict(conservation),
        carry_limit: verdict(carry_limit),
        failure_purity: verdict(failure_purity),
    }
}

fn random_world(rng: &mut ChaCha8Rng, names: &[&str]) -> WorldState {
    let mut world = WorldState::new();
    for room in Room::ALL {
        let kinds = rng.gen_range(0..=4);
        for name in names.choose_multiple(rng, kinds) {
            world.set_count(room, name, rng.gen_range(1..=4));
        }
    }
    world.robot_location = *Room::ALL.choose(rng).expect("rooms");
    for _ in 0..rng.gen_range(0..=CARRY_CAPACITY) {
        world.carried.push(names.choose(rng).expect("names").to_string());
    }
    world
}

fn random_call(rng: &mut ChaCha8Rng, names: &[&str]) -> ActionCall {
    let name = |rng: &mut ChaCha8Rng| names.choose(rng).expect("names").to_string();
    match rng.gen_range(0..5) {
        0 => ActionCall::DriveToLocation { location: *Room::ALL.choose(rng).expect("rooms") },
        1 => ActionCall::FindObject { object_name_list: (0..rng.gen_range(0..=3)).map(|_| name(rng)).collect() },
        2 => ActionCall::GraspObject { object_name: name(rng) },
        3 => ActionCall::PlaceObject { object_name: name(rng) },
        _ => ActionCall::Exit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ValidationOptions {
        ValidationOptions { oracle_seeds: 2, fuzz_sequences: 300, ..ValidationOptions::default() }
    }

    #[test]
    fn clean_build_passes_everything() {
        let report = run_validation(&Harness::default(), &quick());
        assert!(report.passed(), "{:?}", report.first_failure());
        assert_eq!(report.checks.len(), 6);
    }

    fn greedy_gripper(state: &WorldState, call: &ActionCall, catalog: &ObjectCatalog) -> (WorldState, ActionResponse) {
        let mut next = state.clone();
        if let ActionCall::GraspObject { object_name } = call {
            let here = next.robot_location;
            let count = next.count(here, object_name);
            if count > 0 && next.carried.len() < 3 {
                next.calls_executed += 1;
                next.set_count(here, object_name, count - 1);
                next.carried.push(object_name.clone());
                return (next, ActionResponse { text: "ok".into(), ok: true, found: Vec::new() });
            }
        }
        execute_action(state, call, catalog)
    }

    #[test]
    fn three_object_gripper_fails_carry_limit_only() {
        let report = run_validation_with(&Harness::default(), &quick(), greedy_gripper);
        let failure = report.first_failure().expect("a failure");
        assert_eq!(failure.name, "carry limit");
        assert_eq!(report.checks.iter().filter(|c| !c.passed).count(), 1);
    }

    #[test]
    fn inconsistent_example_fails_its_check() {
        let mut harness = Harness::default();
        harness.kit.example.steps[2].response = "The following items were found in the bedroom: 2 sponges".into();
        let report = run_validation(&harness, &quick());
        assert_eq!(report.first_failure().map(|c| c.name), Some("worked example replay"));
    }
}
