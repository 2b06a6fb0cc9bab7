//! On-disk episode transcripts (JSONL) and per-experiment result indexes.
//!
//! A transcript file holds a header line, one line per context message and a
//! closing result line. A file without the result line is treated as truncated.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EpisodeResult, EpisodeSummary, FailureReason, TurnRecord};
use crate::error::{Error, Result};
use crate::prompting::{Message, TechniqueConfig};
use crate::tasks::{TaskInstance, TaskKind};
use crate::world::WorldState;

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub experiment: String,
    pub prompt_version: u32,
    pub result: EpisodeResult,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header(Header),
    Message(Message),
    Result(Outcome),
}

#[derive(Serialize, Deserialize)]
struct Header {
    experiment: String,
    model: String,
    temperature: f64,
    technique: TechniqueConfig,
    technique_label: String,
    prompt_version: u32,
    instance: TaskInstance,
}

#[derive(Serialize, Deserialize)]
struct Outcome {
    success: bool,
    failure_reason: FailureReason,
    calls_used: u32,
    agent_wait_total_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    infrastructure_error: Option<String>,
    final_world: WorldState,
    turns: Vec<TurnRecord>,
}

/// `<out>/<experiment>/<kind>/<technique-slug>/<seed>.jsonl`
pub fn transcript_path(out: &Path, experiment: &str, kind: TaskKind, technique: TechniqueConfig, seed: u64) -> PathBuf {
    out.join(experiment).join(kind.as_str()).join(technique.slug()).join(format!("{seed}.jsonl"))
}

pub fn write_transcript(path: &Path, transcript: &Transcript) -> Result<()> {
    let r = &transcript.result;
    let mut lines = Vec::with_capacity(r.transcript.len() + 2);
    lines.push(serde_json::to_string(&Line::Header(Header {
        experiment: transcript.experiment.clone(),
        model: r.model.clone(),
        temperature: r.temperature,
        technique: r.technique,
        technique_label: r.technique.label(),
        prompt_version: transcript.prompt_version,
        instance: r.instance.clone(),
    }))?);
    for message in &r.transcript {
        lines.push(serde_json::to_string(&Line::Message(message.clone()))?);
    }
    lines.push(serde_json::to_string(&Line::Result(Outcome {
        success: r.success,
        failure_reason: r.failure_reason,
        calls_used: r.calls_used,
        agent_wait_total_s: r.agent_wait_total_s,
        infrastructure_error: r.infrastructure_error.clone(),
        final_world: r.final_world.clone(),
        turns: r.turns.clone(),
    }))?);
    let mut text = lines.join("\n");
    text.push('\n');
    write_file(path, &text)
}

pub fn read_transcript(path: &Path) -> Result<Transcript> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_transcript(&text, path)
}

/// Parses transcript text; `path` is only used in error messages.
pub fn parse_transcript(text: &str, path: &Path) -> Result<Transcript> {
    let bad = |reason: String| Error::Transcript { path: path.to_path_buf(), reason };
    let mut header = None;
    let mut messages = Vec::new();
    let mut outcome = None;
    for (n, raw) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        if outcome.is_some() {
            return Err(bad(format!("line {}: content after the result line", n + 1)));
        }
        let line: Line = serde_json::from_str(raw).map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
        match (line, header.is_some()) {
            (Line::Header(h), false) => header = Some(h),
            (Line::Header(_), true) => return Err(bad(format!("line {}: second header", n + 1))),
            (_, false) => return Err(bad("first line is not a header".into())),
            (Line::Message(m), true) => messages.push(m),
            (Line::Result(o), true) => outcome = Some(o),
        }
    }
    let header = header.ok_or_else(|| bad("empty file".into()))?;
    let outcome = outcome.ok_or_else(|| bad("missing result line (truncated file?)".into()))?;
    Ok(Transcript {
        experiment: header.experiment,
        prompt_version: header.prompt_version,
        result: EpisodeResult {
            instance: header.instance,
            technique: header.technique,
            model: header.model,
            temperature: header.temperature,
            success: outcome.success,
            failure_reason: outcome.failure_reason,
            calls_used: outcome.calls_used,
            agent_wait_total_s: outcome.agent_wait_total_s,
            turns: outcome.turns,
            transcript: messages,
            final_world: outcome.final_world,
            infrastructure_error: outcome.infrastructure_error,
        },
    })
}

/// One row of a results index: the episode summary plus where its transcript lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRow {
    #[serde(flatten)]
    pub summary: EpisodeSummary,
    /// Relative to the index file.
    pub transcript: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultIndex {
    pub experiment: String,
    pub prompt_version: u32,
    pub episodes: Vec<IndexRow>,
}

impl ResultIndex {
    pub fn summaries(&self) -> Vec<EpisodeSummary> {
        self.episodes.iter().map(|row| row.summary.clone()).collect()
    }
}

pub fn write_index(path: &Path, index: &ResultIndex) -> Result<()> {
    let mut text = serde_json::to_string_pretty(index)?;
    text.push('\n');
    write_file(path, &text)
}

pub fn read_index(path: &Path) -> Result<ResultIndex> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::oracle::OracleAgent;
    use crate::catalog::ObjectCatalog;
    use crate::runner::Harness;
    use crate::tasks::generate_task;

    fn sample() -> Transcript {
        let instance = generate_task(TaskKind::Conditional, 9, &ObjectCatalog::default()).unwrap();
        let result = Harness::default()
            .run_episode(&instance, TechniqueConfig::PRESETS[8], &mut OracleAgent::new(&instance), "oracle", 0.0)
            .unwrap();
        Transcript { experiment: "demo".into(), prompt_version: 1, result }
    }

    #[test]
    fn transcript_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample();
        let path = transcript_path(dir.path(), "demo", TaskKind::Conditional, t.result.technique, 9);
        assert!(path.ends_with("demo/conditional/af-react-eip-std/9.jsonl"));
        write_transcript(&path, &t).unwrap();
        assert_eq!(read_transcript(&path).unwrap(), t);
    }

    #[test]
    fn truncated_transcript_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        write_transcript(&path, &sample()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: Vec<&str> = text.lines().collect();
        fs::write(&path, cut[..cut.len() - 1].join("\n")).unwrap();
        let err = read_transcript(&path).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(read_transcript(&path), Err(Error::Transcript { .. })));
    }

    #[test]
    fn index_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample();
        let index = ResultIndex {
            experiment: "demo".into(),
            prompt_version: 1,
            episodes: vec![IndexRow { summary: t.result.summary(), transcript: "conditional/x/9.jsonl".into() }],
        };
        let path = dir.path().join("results.json");
        write_index(&path, &index).unwrap();
        assert_eq!(read_index(&path).unwrap(), index);
    }
}
