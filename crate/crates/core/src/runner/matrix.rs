use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{EpisodeResult, Harness};
use crate::backends::AgentFactory;
use crate::error::{Error, Result};
use crate::prompting::TechniqueConfig;
use crate::tasks::{generate_task, TaskInstance, TaskKind};

/// The cells and repetitions of one experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSpec {
    pub kinds: Vec<TaskKind>,
    pub techniques: Vec<TechniqueConfig>,
    pub repetitions: u32,
    pub base_seed: u64,
    pub parallelism: usize,
}

impl MatrixSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.kinds.is_empty() || self.techniques.is_empty() {
            return Err(Error::Config("the matrix needs at least one task kind and one technique".into()));
        }
        for technique in &self.techniques {
            technique.validate()?;
        }
        Ok(())
    }

    pub fn episodes_per_backend(&self) -> usize {
        self.kinds.len() * self.techniques.len() * self.repetitions as usize
    }
}

/// Task seed for one (kind, repetition) pair. The technique is not an input,
/// so every technique is evaluated on the same instances.
pub fn derive_seed(base_seed: u64, kind: TaskKind, repetition: u32) -> u64 {
    let digest = Sha256::digest(format!("{base_seed}:{}:{repetition}", kind.as_str()).as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

impl Harness {
    /// Runs every (backend, kind, technique, repetition) episode on a pool of
    /// `parallelism` workers. Results come back in that nesting order
    /// regardless of scheduling.
    pub fn run_matrix(&self, spec: &MatrixSpec, backends: &[&dyn AgentFactory]) -> Result<Vec<EpisodeResult>> {
        spec.validate()?;
        let instances: Vec<Vec<TaskInstance>> = spec
            .kinds
            .iter()
            .map(|&kind| {
                (0..spec.repetitions)
                    .map(|rep| generate_task(kind, derive_seed(spec.base_seed, kind, rep), &self.catalog))
                    .collect()
            })
            .collect::<Result<_>>()?;

        let mut jobs = Vec::with_capacity(backends.len() * spec.episodes_per_backend());
        for &backend in backends {
            for per_kind in &instances {
                for &technique in &spec.techniques {
                    for instance in per_kind {
                        jobs.push((backend, technique, instance));
                    }
                }
            }
        }

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.parallelism)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            jobs.par_iter()
                .map(|(backend, technique, instance)| {
                    let mut agent = backend.agent_for(instance);
                    let result =
                        self.run_episode(instance, *technique, agent.as_mut(), backend.model(), backend.temperature())?;
                    tracing::debug!(
                        model = backend.model(),
                        task = instance.kind().as_str(),
                        seed = instance.seed,
                        technique = %technique,
                        success = result.success,
                        "episode finished"
                    );
                    Ok(result)
                })
                .collect()
        })
    }
}
