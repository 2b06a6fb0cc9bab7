use std::io::Write;
use std::path::Path;

use anyhow::Context;
use taskbot::backends::oracle::OracleFactory;
use taskbot::backends::remote::RemoteBackend;
use taskbot::prompting::PromptKit;
use taskbot::report::{aggregate, render, ReportFormat};
use taskbot::runner::{
    read_index, read_transcript, transcript_path, write_index, write_transcript, IndexRow, ResultIndex, Transcript,
};
use taskbot::validation::{run_validation, ValidationOptions};
use taskbot::{AgentError, AgentFactory, Error, FailureReason, Harness, ObjectCatalog};

use crate::config::{parse_tasks, parse_techniques, BackendSpec, ExperimentConfig, Overrides};
use crate::{ReplayArgs, ReportArgs, RunArgs, Status, ValidateArgs};

fn load_catalog(path: Option<&Path>) -> anyhow::Result<ObjectCatalog> {
    Ok(match path {
        Some(path) => ObjectCatalog::load(path)?,
        None => ObjectCatalog::default(),
    })
}

pub fn run(args: RunArgs, out: &mut dyn Write) -> anyhow::Result<Status> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.apply(Overrides {
        backend: args.backend,
        tasks: args.tasks.as_deref().map(parse_tasks).transpose()?,
        techniques: args.techniques.as_deref().map(parse_techniques),
        repetitions: args.repetitions,
        base_seed: args.seed,
        parallelism: args.parallelism,
        output_dir: args.out,
        catalog: args.catalog,
    })?;
    let format: ReportFormat = args.format.parse()?;
    let spec = config.validate()?;
    let harness = Harness::new(load_catalog(config.catalog.as_deref())?, PromptKit::default());

    // Every backend is constructed before any episode so a missing key fails fast.
    let factories = config
        .backends
        .iter()
        .map(|backend| -> anyhow::Result<Box<dyn AgentFactory>> {
            Ok(match backend {
                BackendSpec::Oracle => Box::new(OracleFactory),
                BackendSpec::Remote(remote) => Box::new(RemoteBackend::new(remote.clone())?),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut summaries = Vec::new();
    for (backend, factory) in config.backends.iter().zip(&factories) {
        let experiment = config.experiment_name(backend);
        let dir = config.output_dir.join(&experiment);
        tracing::info!(experiment, episodes = spec.episodes_per_backend(), "starting");
        let results = harness.run_matrix(&spec, &[factory.as_ref()])?;
        let mut rows = Vec::with_capacity(results.len());
        for result in results {
            let path = transcript_path(&config.output_dir, &experiment, result.kind(), result.technique, result.instance.seed);
            let relative = path.strip_prefix(&dir).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            rows.push(IndexRow { summary: result.summary(), transcript: relative });
            let transcript = Transcript { experiment: experiment.clone(), prompt_version: harness.kit.table.version, result };
            write_transcript(&path, &transcript)?;
        }
        let index = ResultIndex { experiment: experiment.clone(), prompt_version: harness.kit.table.version, episodes: rows };
        write_index(&dir.join("results.json"), &index)?;
        let cells = aggregate(&index.summaries())?;
        for (name, fmt) in [("report.md", ReportFormat::Markdown), ("report.csv", ReportFormat::Csv), ("report.json", ReportFormat::Json)] {
            let path = dir.join(name);
            std::fs::write(&path, render(&cells, fmt)?).with_context(|| format!("writing {}", path.display()))?;
        }
        summaries.extend(index.summaries());
    }

    write!(out, "{}", render(&aggregate(&summaries)?, format)?)?;
    if summaries.iter().all(|s| s.failure_reason == FailureReason::InfrastructureError) {
        return Ok(Status::Infrastructure);
    }
    Ok(Status::Ok)
}

pub fn validate(args: ValidateArgs, out: &mut dyn Write) -> anyhow::Result<Status> {
    let harness = Harness::new(load_catalog(args.catalog.as_deref())?, PromptKit::default());
    let options = ValidationOptions {
        oracle_seeds: args.seeds,
        fuzz_sequences: args.fuzz,
        parallelism: args.parallelism.max(1),
        ..ValidationOptions::default()
    };
    let report = run_validation(&harness, &options);
    for check in &report.checks {
        writeln!(out, "{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail)?;
    }
    Ok(match report.first_failure() {
        Some(failure) => {
            writeln!(out, "validation failed: {}", failure.name)?;
            Status::CheckFailed
        }
        None => {
            writeln!(out, "all {} checks passed", report.checks.len())?;
            Status::Ok
        }
    })
}

pub fn replay(args: ReplayArgs, out: &mut dyn Write) -> anyhow::Result<Status> {
    let transcript = read_transcript(&args.transcript)?;
    let harness = Harness::new(load_catalog(args.catalog.as_deref())?, PromptKit::default());
    match harness.replay(&transcript) {
        Ok(live) => {
            writeln!(
                out,
                "match: {} messages reproduced; {} after {} calls",
                live.transcript.len(),
                live.failure_reason.as_str(),
                live.calls_used
            )?;
            Ok(Status::Ok)
        }
        Err(Error::Agent(AgentError::ReplayMismatch { index, expected, actual })) => {
            writeln!(out, "divergence at message {index}: expected {expected:?}, got {actual:?}")?;
            Ok(Status::CheckFailed)
        }
        Err(Error::Agent(AgentError::ReplayExhausted { index })) => {
            writeln!(out, "divergence at message {index}: the live episode asked for more replies than were recorded")?;
            Ok(Status::CheckFailed)
        }
        Err(other) => Err(other.into()),
    }
}

pub fn report(args: ReportArgs, out: &mut dyn Write) -> anyhow::Result<Status> {
    let format: ReportFormat = args.format.parse()?;
    let mut summaries = Vec::new();
    for path in &args.indexes {
        let file = if path.is_dir() { path.join("results.json") } else { path.clone() };
        summaries.extend(read_index(&file)?.summaries());
    }
    write!(out, "{}", render(&aggregate(&summaries)?, format)?)?;
    Ok(Status::Ok)
}
