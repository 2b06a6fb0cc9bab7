use super::{EpisodeResult, Harness, Transcript};
use crate::backends::replay::{verify_tool_results, ReplayAgent};
use crate::backends::AgentError;
use crate::error::{Error, Result};
use crate::prompting::Message;

impl Harness {
    /// Re-runs a recorded episode with its recorded agent replies and checks
    /// that the live transcript matches the recording message for message.
    pub fn replay(&self, transcript: &Transcript) -> Result<EpisodeResult> {
        let recorded = &transcript.result;
        let mut agent = ReplayAgent::new(recorded.transcript.clone());
        let live = self.run_episode(&recorded.instance, recorded.technique, &mut agent, &recorded.model, recorded.temperature)?;
        verify_tool_results(&recorded.transcript, &live.transcript)?;
        if let Some(index) = first_difference(&recorded.transcript, &live.transcript) {
            return Err(Error::Agent(AgentError::ReplayMismatch {
                index,
                expected: describe(recorded.transcript.get(index)),
                actual: describe(live.transcript.get(index)),
            }));
        }
        if live.success != recorded.success || live.failure_reason != recorded.failure_reason || live.calls_used != recorded.calls_used {
            return Err(Error::Agent(AgentError::ReplayMismatch {
                index: recorded.transcript.len(),
                expected: format!("{} after {} calls", recorded.failure_reason.as_str(), recorded.calls_used),
                actual: format!("{} after {} calls", live.failure_reason.as_str(), live.calls_used),
            }));
        }
        Ok(live)
    }
}

fn first_difference(a: &[Message], b: &[Message]) -> Option<usize> {
    (0..a.len().max(b.len())).find(|&i| a.get(i) != b.get(i))
}

fn describe(message: Option<&Message>) -> String {
    match message {
        None => "<end of transcript>".into(),
        Some(m) => match &m.tool_call {
            Some(call) => format!("{:?} call {}", m.role, call.call),
            None => format!("{:?} {:?}", m.role, m.content),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::oracle::OracleAgent;
    use crate::catalog::ObjectCatalog;
    use crate::prompting::{PromptKit, TechniqueConfig};
    use crate::tasks::{generate_task, TaskKind};

    fn recorded(kind: TaskKind, technique: TechniqueConfig) -> Transcript {
        let instance = generate_task(kind, 11, &ObjectCatalog::default()).unwrap();
        let result =
            Harness::default().run_episode(&instance, technique, &mut OracleAgent::new(&instance), "oracle", 0.0).unwrap();
        Transcript { experiment: "t".into(), prompt_version: 1, result }
    }

    #[test]
    fn self_replay_matches() {
        for technique in TechniqueConfig::PRESETS {
            let t = recorded(TaskKind::Equals, technique);
            assert_eq!(Harness::default().replay(&t).unwrap(), t.result);
        }
    }

    #[test]
    fn altered_catalog_diverges() {
        let t = recorded(TaskKind::Distribute, TechniqueConfig::default());
        let text = ObjectCatalog::default().to_text();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        // Give every object an odd plural so find responses change.
        for line in lines.iter_mut().filter(|l| !l.starts_with('#') && !l.is_empty()) {
            let mut parts: Vec<&str> = line.split(',').collect();
            let name = parts[0].to_string();
            let odd = format!("{name}zz");
            parts.truncate(2);
            *line = format!("{},{}", parts.join(","), odd);
        }
        let catalog = ObjectCatalog::parse(&lines.join("\n")).unwrap();
        let err = Harness::new(catalog, PromptKit::default()).replay(&t).unwrap_err();
        assert!(matches!(err, Error::Agent(AgentError::ReplayMismatch { .. })), "{err}");
    }

    #[test]
    fn edited_reply_diverges() {
        let mut t = recorded(TaskKind::Fetch, TechniqueConfig::default());
        let drive = t.result.transcript.iter_mut().find(|m| m.tool_call.is_some()).unwrap();
        drive.tool_call.as_mut().unwrap().call = crate::world::ActionCall::DriveToLocation { location: crate::world::Room::Parlor };
        assert!(Harness::default().replay(&t).is_err());
    }
}
