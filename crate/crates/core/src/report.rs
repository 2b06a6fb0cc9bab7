//! Success-rate and mean-time tables per task and technique.
//!
//! Infrastructure failures are left out of every denominator and counted
//! separately. Mean times are given over all completed runs and over
//! successful runs only; the markdown table shows the former.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prompting::TechniqueConfig;
use crate::runner::{EpisodeSummary, FailureReason};
use crate::tasks::TaskKind;

/// JSON schema that [`render`] output in JSON form conforms to.
pub const REPORT_SCHEMA: &str = include_str!("../data/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub model: String,
    pub task: TaskKind,
    pub technique: String,
    pub n: u32,
    pub successes: u32,
    /// `None` when every run failed on infrastructure.
    pub success_rate: Option<f64>,
    pub mean_time_all_s: Option<f64>,
    pub mean_time_success_s: Option<f64>,
    pub infrastructure_failures: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format `{other}` (expected csv, json or markdown)"))),
        }
    }
}

/// Sort key for technique labels: presets in table order, anything else after.
fn technique_rank(label: &str) -> (usize, String) {
    let rank = label.parse::<TechniqueConfig>().map(|t| t.preset_rank()).unwrap_or(usize::MAX);
    (rank, label.to_string())
}

/// One summary per (model, task, technique), ordered by model, task, then technique.
pub fn aggregate(results: &[EpisodeSummary]) -> Result<Vec<CellSummary>> {
    if results.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut cells: BTreeMap<(String, TaskKind, (usize, String)), Vec<&EpisodeSummary>> = BTreeMap::new();
    for r in results {
        let label = canonical_label(&r.technique);
        cells.entry((r.model.clone(), r.task, technique_rank(&label))).or_default().push(r);
    }
    Ok(cells
        .into_iter()
        .map(|((model, task, (_, technique)), rows)| {
            let completed: Vec<_> = rows.iter().filter(|r| r.failure_reason != FailureReason::InfrastructureError).collect();
            let succeeded: Vec<_> = completed.iter().filter(|r| r.success).collect();
            let all_times: Vec<f64> = completed.iter().map(|r| r.agent_wait_total_s).collect();
            let success_times: Vec<f64> = succeeded.iter().map(|r| r.agent_wait_total_s).collect();
            CellSummary {
                model,
                task,
                technique,
                n: rows.len() as u32,
                successes: succeeded.len() as u32,
                success_rate: (!completed.is_empty()).then(|| succeeded.len() as f64 / completed.len() as f64),
                mean_time_all_s: mean(&all_times),
                mean_time_success_s: mean(&success_times),
                infrastructure_failures: (rows.len() - completed.len()) as u32,
            }
        })
        .collect())
}

/// Mean of `xs`, summed in sorted order so the result does not depend on input order.
fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(sorted.iter().sum::<f64>() / sorted.len() as f64)
}

fn canonical_label(label: &str) -> String {
    label.parse::<TechniqueConfig>().map(|t| t.label()).unwrap_or_else(|_| label.to_string())
}

pub fn render(summaries: &[CellSummary], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(summaries)?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => render_csv(summaries),
        ReportFormat::Markdown => Ok(render_markdown(summaries)),
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    model: String,
    task: TaskKind,
    technique: String,
    n: u32,
    successes: u32,
    success_rate: Option<f64>,
    mean_time_all_s: Option<f64>,
    mean_time_success_s: Option<f64>,
    infra_failures: u32,
}

fn render_csv(summaries: &[CellSummary]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for s in summaries {
        writer.serialize(CsvRow {
            model: s.model.clone(),
            task: s.task,
            technique: s.technique.clone(),
            n: s.n,
            successes: s.successes,
            success_rate: s.success_rate,
            mean_time_all_s: s.mean_time_all_s,
            mean_time_success_s: s.mean_time_success_s,
            infra_failures: s.infrastructure_failures,
        })?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<CellSummary>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let r = row?;
            Ok(CellSummary {
                model: r.model,
                task: r.task,
                technique: r.technique,
                n: r.n,
                successes: r.successes,
                success_rate: r.success_rate,
                mean_time_all_s: r.mean_time_all_s,
                mean_time_success_s: r.mean_time_success_s,
                infrastructure_failures: r.infra_failures,
            })
        })
        .collect()
}

/// One table per model: a row per technique, a (success rate, mean time)
/// column pair per task.
fn render_markdown(summaries: &[CellSummary]) -> String {
    let mut by_model: BTreeMap<&str, Vec<&CellSummary>> = BTreeMap::new();
    for s in summaries {
        by_model.entry(&s.model).or_default().push(s);
    }
    let mut out = String::new();
    for (model, cells) in by_model {
        let mut tasks: Vec<TaskKind> = cells.iter().map(|c| c.task).collect();
        tasks.sort();
        tasks.dedup();
        let mut techniques: Vec<(usize, String)> = cells.iter().map(|c| technique_rank(&c.technique)).collect();
        techniques.sort();
        techniques.dedup();

        let _ = writeln!(out, "### {model}\n");
        out.push_str("| Technique |");
        for task in &tasks {
            let _ = write!(out, " {} success rate | {} mean time [s] |", task.title(), task.title());
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(tasks.len() * 2));
        out.push('\n');
        for (_, technique) in &techniques {
            let _ = write!(out, "| {technique} |");
            for task in &tasks {
                match cells.iter().find(|c| c.task == *task && &c.technique == technique) {
                    Some(c) => {
                        let _ = write!(out, " {} | {} |", fixed2_or_dash(c.success_rate), fixed2_or_dash(c.mean_time_all_s));
                    }
                    None => out.push_str(" - | - |"),
                }
            }
            out.push('\n');
        }
        let infra: Vec<String> = cells
            .iter()
            .filter(|c| c.infrastructure_failures > 0)
            .map(|c| format!("{} / {}: {}", c.task.title(), c.technique, c.infrastructure_failures))
            .collect();
        if !infra.is_empty() {
            let _ = writeln!(out, "\nInfrastructure failures (not counted in success rates): {}", infra.join("; "));
        }
        out.push('\n');
    }
    out
}

fn fixed2_or_dash(value: Option<f64>) -> String {
    value.map(fixed2).unwrap_or_else(|| "-".into())
}

/// Two decimals, rounding half away from zero on the shortest decimal form of
/// `value`, so 0.125 becomes 0.13 and 2.675 becomes 2.68.
pub fn fixed2(value: f64) -> String {
    let text = format!("{}", value.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.extend((0..2).map(|i| frac.get(i).copied().unwrap_or(0)));
    if frac.get(2).is_some_and(|&d| d >= 5) {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let render = |ds: &[u8]| ds.iter().map(|d| char::from(b'0' + d)).collect::<String>();
    let magnitude = format!("{}.{}", render(&digits[..split]), render(&digits[split..]));
    if value.is_sign_negative() && magnitude.bytes().any(|b| (b'1'..=b'9').contains(&b)) {
        format!("-{magnitude}")
    } else {
        magnitude
    }
}
