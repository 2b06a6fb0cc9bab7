#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn taskbot(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taskbot")).args(args).current_dir(dir).output().expect("spawn taskbot")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap().flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

const CONFIG: &str = r#"
name = "pilot"
tasks = ["fetch", "distribute"]
techniques = ["Baseline", "AF + CoT + EiP", "af-react-eip-std"]
repetitions = 3
base_seed = 11
parallelism = 2
output_dir = "runs"

[[backends]]
kind = "oracle"
"#;

#[test]
fn oracle_run_from_config_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pilot.toml"), CONFIG).unwrap();
    let o = taskbot(&["run", "--config", "pilot.toml", "--format", "csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert!(csv.lines().skip(1).all(|l| l.contains(",3,3,1.0,")), "{csv}");

    let root = dir.path().join("runs/pilot");
    for name in ["results.json", "report.md", "report.csv", "report.json"] {
        assert!(root.join(name).is_file(), "{name} missing");
    }
    let transcripts: Vec<_> =
        files_under(&root).into_iter().filter(|p| p.extension().is_some_and(|e| e == "jsonl")).collect();
    assert_eq!(transcripts.len(), 18);
    assert_eq!(fs::read_to_string(root.join("report.csv")).unwrap(), csv);
}

#[test]
fn identical_runs_produce_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pilot.toml"), CONFIG).unwrap();
    for out in ["a", "b"] {
        let o = taskbot(&["run", "--config", "pilot.toml", "--out", out, "--parallelism", if out == "a" { "1" } else { "4" }], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = files_under(&dir.path().join("a"));
    let b = files_under(&dir.path().join("b"));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.strip_prefix(dir.path().join("a")).unwrap(), y.strip_prefix(dir.path().join("b")).unwrap());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{} differs", x.display());
    }
}

#[test]
fn overrides_shape_the_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = taskbot(&["run", "--backend", "oracle", "--repetitions", "2", "--tasks", "fetch", "--format", "csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1 + 9);
    let index: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("runs/experiment/results.json")).unwrap()).unwrap();
    assert_eq!(index["episodes"].as_array().unwrap().len(), 18);
}

#[test]
fn combined_cot_and_react_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = taskbot(&["run", "--backend", "oracle", "--techniques", "AF + CoT + ReAct"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("AF + CoT + ReAct"), "{}", stderr(&o));
    assert!(!dir.path().join("runs").exists());
}

#[test]
fn missing_api_key_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
name = "keyless"
tasks = ["fetch"]
techniques = ["AF"]
repetitions = 1
base_seed = 0
parallelism = 1
output_dir = "runs"

[[backends]]
kind = "oracle"

[[backends]]
kind = "remote"
endpoint = "http://127.0.0.1:9/v1"
model = "m"
api_key_env = "TASKBOT_CLI_TEST_KEY_SURELY_UNSET"
"#;
    fs::write(dir.path().join("k.toml"), config).unwrap();
    let o = taskbot(&["run", "--config", "k.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("TASKBOT_CLI_TEST_KEY_SURELY_UNSET"), "{}", stderr(&o));
    assert!(!dir.path().join("runs").exists());
}

#[test]
fn unknown_report_format_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = taskbot(&["run", "--backend", "oracle", "--format", "xml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes_on_the_shipped_simulator() {
    let dir = tempfile::tempdir().unwrap();
    let o = taskbot(&["validate", "--seeds", "5", "--fuzz", "200"], dir.path());
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 6, "{text}");
    assert!(text.ends_with("all 6 checks passed\n"));
}

#[test]
fn validate_fails_on_a_broken_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/catalog.txt")).unwrap();
    fs::write(dir.path().join("cat.txt"), catalog.replace("sponge,household", "sponge,household,spongies")).unwrap();
    let o = taskbot(&["validate", "--seeds", "3", "--fuzz", "50", "--catalog", "cat.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("validation failed: golden fetch replay"), "{}", stdout(&o));
}

fn first_transcript(root: &Path, needle: &str) -> PathBuf {
    files_under(root)
        .into_iter()
        .find(|p| p.to_string_lossy().contains(needle) && p.extension().is_some_and(|e| e == "jsonl"))
        .expect("transcript")
}

#[test]
fn replay_matches_diverges_and_rejects_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let o = taskbot(&["run", "--backend", "oracle", "--tasks", "fetch", "--techniques", "AF + CoT"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let transcript = first_transcript(&dir.path().join("runs"), "fetch");

    let o = taskbot(&["replay", transcript.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("match: "));

    // Pluralising every object differently changes the find response.
    let catalog = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/catalog.txt")).unwrap();
    let altered: String = catalog
        .lines()
        .map(|l| {
            let fields: Vec<&str> = l.split(',').collect();
            if l.starts_with('#') || fields.len() < 2 {
                format!("{l}\n")
            } else {
                format!("{},{},{}zz\n", fields[0], fields[1], fields[0])
            }
        })
        .collect();
    fs::write(dir.path().join("alt.txt"), altered).unwrap();
    let o = taskbot(&["replay", transcript.to_str().unwrap(), "--catalog", "alt.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("divergence at message "), "{}", stdout(&o));

    let text = fs::read_to_string(&transcript).unwrap();
    let truncated: Vec<&str> = text.lines().collect();
    fs::write(dir.path().join("cut.jsonl"), truncated[..truncated.len() - 1].join("\n")).unwrap();
    let o = taskbot(&["replay", "cut.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("truncated"), "{}", stderr(&o));
}

#[test]
fn report_regenerates_the_run_tables() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pilot.toml"), CONFIG).unwrap();
    let run = taskbot(&["run", "--config", "pilot.toml"], dir.path());
    assert!(run.status.success());
    for target in ["runs/pilot", "runs/pilot/results.json"] {
        let o = taskbot(&["report", target], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o), stdout(&run));
        assert_eq!(stdout(&o), fs::read_to_string(dir.path().join("runs/pilot/report.md")).unwrap());
    }
    let o = taskbot(&["report", "runs/pilot", "--format", "json"], dir.path());
    assert_eq!(stdout(&o), fs::read_to_string(dir.path().join("runs/pilot/report.json")).unwrap());
}

#[test]
fn remote_run_against_a_mock_endpoint() {
    let server = common::MockServer::start(common::fetch_solver);
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"
name = "wire"
tasks = ["fetch"]
techniques = ["AF + EiP", "Baseline"]
repetitions = 2
base_seed = 5
parallelism = 2
output_dir = "runs"

[[backends]]
kind = "remote"
endpoint = "{}"
model = "mock-model"
max_retries = 0
"#,
        server.base_url
    );
    fs::write(dir.path().join("w.toml"), config).unwrap();
    let o = taskbot(&["run", "--config", "w.toml", "--format", "csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("mock-model,fetch,") && l.contains(",2,2,1.0,")), "{csv}");
    assert_eq!(server.requests().len(), 4 * 6);
}

#[test]
fn unreachable_endpoint_exits_with_infrastructure_status() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    drop(listener);
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "name = \"down\"\ntasks = [\"fetch\"]\ntechniques = [\"AF\"]\nrepetitions = 1\nbase_seed = 0\nparallelism = 1\noutput_dir = \"runs\"\n\n[[backends]]\nkind = \"remote\"\nendpoint = \"{url}\"\nmodel = \"m\"\nmax_retries = 0\n"
    );
    fs::write(dir.path().join("d.toml"), config).unwrap();
    let o = taskbot(&["run", "--config", "d.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(dir.path().join("runs/down/results.json").is_file());
}
