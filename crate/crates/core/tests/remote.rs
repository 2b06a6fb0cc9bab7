mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use common::{call_completion, fetch_solver, MockServer};
use serde_json::json;
use taskbot::backends::remote::{BackendConfig, RemoteBackend};
use taskbot::runner::MatrixSpec;
use taskbot::tasks::generate_task;
use taskbot::{AgentFactory, Error, FailureReason, Harness, ObjectCatalog, TaskKind, TechniqueConfig};

fn backend(server: &MockServer, configure: impl FnOnce(&mut BackendConfig)) -> RemoteBackend {
    let mut config = BackendConfig::new(&server.base_url, "mock-model");
    config.max_retries = 0;
    config.timeout_secs = 10;
    configure(&mut config);
    RemoteBackend::new(config).unwrap()
}

fn fetch() -> taskbot::TaskInstance {
    generate_task(TaskKind::Fetch, 73, &ObjectCatalog::default()).unwrap()
}

fn run(backend: &RemoteBackend, technique: &str) -> taskbot::EpisodeResult {
    let instance = fetch();
    let mut agent = backend.agent_for(&instance);
    Harness::default()
        .run_episode(&instance, technique.parse().unwrap(), agent.as_mut(), backend.model(), backend.temperature())
        .unwrap()
}

#[test]
fn fetch_episode_over_the_wire() {
    let server = MockServer::start(fetch_solver);
    std::env::set_var("TASKBOT_TEST_KEY_WIRE", "sk-test");
    let backend = backend(&server, |c| c.api_key_env = Some("TASKBOT_TEST_KEY_WIRE".into()));
    let result = run(&backend, "AF + EiP");
    assert!(result.success, "{:?}", result.failure_reason);
    assert_eq!(result.calls_used, 6);

    let requests = server.requests();
    assert_eq!(requests.len(), 6);
    for r in &requests {
        assert_eq!(r.path, "/v1/chat/completions");
        assert_eq!(r.header("authorization"), Some("Bearer sk-test"));
        assert_eq!(r.body["model"], "mock-model");
        assert_eq!(r.body["temperature"], 0.0);
        assert_eq!(r.body["tool_choice"], "auto");
    }
    let first_tools: Vec<&str> =
        requests[0].body["tools"].as_array().unwrap().iter().map(|t| t["function"]["name"].as_str().unwrap()).collect();
    assert_eq!(first_tools, ["drive_to_location", "find_object", "grasp_object", "exit"]);
    let messages = requests[1].body["messages"].as_array().unwrap();
    let call = &messages[messages.len() - 2];
    assert_eq!(call["role"], "assistant");
    assert_eq!(call["tool_calls"][0]["type"], "function");
    assert_eq!(call["tool_calls"][0]["function"]["name"], "drive_to_location");
    assert!(call["tool_calls"][0]["function"]["arguments"].is_string());
    let tool = messages.last().unwrap();
    assert_eq!(tool["role"], "tool");
    assert_eq!(tool["tool_call_id"], call["tool_calls"][0]["id"]);
    assert_eq!(tool["content"], "You successfully arrived in the new location study.");
}

#[test]
fn no_authorization_without_key_variable() {
    let server = MockServer::start(fetch_solver);
    run(&backend(&server, |_| {}), "AF");
    assert!(server.requests().iter().all(|r| r.header("authorization").is_none()));
}

#[test]
fn cot_plan_turns_travel_as_text() {
    let server = MockServer::start(fetch_solver);
    let result = run(&backend(&server, |_| {}), "AF + CoT");
    assert!(result.success);
    assert_eq!(server.requests().len(), 7);
}

#[test]
fn server_errors_are_retried() {
    let server = MockServer::start(|body, n| if n < 2 { (503, "{}".into()) } else { fetch_solver(body, n) });
    let result = run(&backend(&server, |c| c.max_retries = 2), "AF");
    assert!(result.success);
    assert_eq!(server.requests().len(), 8);
}

#[test]
fn exhausted_retries_are_infrastructure_failures() {
    let server = MockServer::start(|_, _| (500, "{\"error\":\"down\"}".into()));
    let result = run(&backend(&server, |c| c.max_retries = 1), "AF");
    assert_eq!(result.failure_reason, FailureReason::InfrastructureError);
    assert!(result.infrastructure_error.unwrap().contains("500"));
    assert_eq!(server.requests().len(), 2);
}

#[test]
fn client_errors_are_not_retried() {
    let server = MockServer::start(|_, _| (400, "{\"error\":\"bad\"}".into()));
    let result = run(&backend(&server, |c| c.max_retries = 3), "AF");
    assert_eq!(result.failure_reason, FailureReason::InfrastructureError);
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn unreachable_server_is_an_infrastructure_failure() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    drop(listener);
    let mut config = BackendConfig::new(url, "m");
    config.max_retries = 0;
    let backend = RemoteBackend::new(config).unwrap();
    let result = run(&backend, "AF");
    assert_eq!(result.failure_reason, FailureReason::InfrastructureError);
}

#[test]
fn schema_violation_is_malformed() {
    let server = MockServer::start(|_, _| (200, call_completion("c", "drive_to_location", json!({ "location": "garage" }))));
    let result = run(&backend(&server, |_| {}), "AF");
    assert_eq!(result.failure_reason, FailureReason::MalformedCall);
    assert_eq!(result.calls_used, 0);
}

#[test]
fn non_completion_body_is_infrastructure() {
    let server = MockServer::start(|_, _| (200, "<html>gateway</html>".into()));
    let result = run(&backend(&server, |_| {}), "AF");
    assert_eq!(result.failure_reason, FailureReason::InfrastructureError);
}

#[test]
fn missing_key_variable_fails_at_construction() {
    let mut config = BackendConfig::new("http://127.0.0.1:9/v1", "m");
    config.api_key_env = Some("TASKBOT_TEST_KEY_SURELY_UNSET".into());
    assert!(matches!(RemoteBackend::new(config), Err(Error::Config(_))));
}

#[test]
fn in_flight_cap_is_respected() {
    let current = Arc::new(AtomicUsize::new(0));
    let peak = Arc::new(AtomicUsize::new(0));
    let (c, p) = (current.clone(), peak.clone());
    let server = MockServer::start(move |body, n| {
        let now = c.fetch_add(1, Ordering::SeqCst) + 1;
        p.fetch_max(now, Ordering::SeqCst);
        std::thread::sleep(Duration::from_millis(5));
        c.fetch_sub(1, Ordering::SeqCst);
        fetch_solver(body, n)
    });
    let backend = backend(&server, |c| c.max_in_flight = Some(2));
    let spec = MatrixSpec {
        kinds: vec![TaskKind::Fetch],
        techniques: vec![TechniqueConfig::PRESETS[1]],
        repetitions: 8,
        base_seed: 3,
        parallelism: 6,
    };
    let results = Harness::default().run_matrix(&spec, &[&backend]).unwrap();
    assert!(results.iter().all(|r| r.success));
    assert!(peak.load(Ordering::SeqCst) <= 2, "peak {}", peak.load(Ordering::SeqCst));
}
