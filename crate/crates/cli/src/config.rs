//! Experiment configuration file (TOML) and command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taskbot::backends::remote::BackendConfig;
use taskbot::error::{Error, Result};
use taskbot::runner::MatrixSpec;
use taskbot::{TaskKind, TechniqueConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSpec {
    Oracle,
    Remote(BackendConfig),
}

impl BackendSpec {
    pub fn model(&self) -> &str {
        match self {
            BackendSpec::Oracle => taskbot::backends::oracle::ORACLE_MODEL,
            BackendSpec::Remote(config) => &config.model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub tasks: Vec<TaskKind>,
    /// Preset labels such as `"AF + CoT + EiP"` or slugs such as `"af-cot-eip"`.
    pub techniques: Vec<String>,
    pub repetitions: u32,
    pub base_seed: u64,
    pub parallelism: usize,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    pub backends: Vec<BackendSpec>,
}

/// Command-line values that replace the corresponding config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub backend: Option<String>,
    pub tasks: Option<Vec<TaskKind>>,
    pub techniques: Option<Vec<String>>,
    pub repetitions: Option<u32>,
    pub base_seed: Option<u64>,
    pub parallelism: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    /// All tasks and presets, one repetition, no backend.
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            tasks: TaskKind::ALL.to_vec(),
            techniques: TechniqueConfig::PRESETS.iter().map(|t| t.label()).collect(),
            repetitions: 1,
            base_seed: 0,
            parallelism: 1,
            output_dir: PathBuf::from("runs"),
            catalog: None,
            backends: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply(&mut self, overrides: Overrides) -> Result<()> {
        if let Some(selector) = overrides.backend {
            self.backends = if selector == taskbot::backends::oracle::ORACLE_MODEL {
                vec![BackendSpec::Oracle]
            } else {
                let kept: Vec<_> = self.backends.iter().filter(|b| b.model() == selector).cloned().collect();
                if kept.is_empty() {
                    return Err(Error::Config(format!("no backend with model `{selector}` in the config")));
                }
                kept
            };
        }
        if let Some(tasks) = overrides.tasks {
            self.tasks = tasks;
        }
        if let Some(techniques) = overrides.techniques {
            self.techniques = techniques;
        }
        if let Some(v) = overrides.repetitions {
            self.repetitions = v;
        }
        if let Some(v) = overrides.base_seed {
            self.base_seed = v;
        }
        if let Some(v) = overrides.parallelism {
            self.parallelism = v;
        }
        if let Some(v) = overrides.output_dir {
            self.output_dir = v;
        }
        if overrides.catalog.is_some() {
            self.catalog = overrides.catalog;
        }
        Ok(())
    }

    /// Resolved techniques, each checked for validity.
    pub fn resolve_techniques(&self) -> Result<Vec<TechniqueConfig>> {
        self.techniques
            .iter()
            .map(|name| {
                let technique: TechniqueConfig =
                    name.parse().map_err(|e| Error::Config(format!("technique preset `{name}`: {e}")))?;
                technique.validate().map_err(|e| Error::Config(format!("technique preset `{name}`: {e}")))?;
                Ok(technique)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<MatrixSpec> {
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("experiment name `{}` must be non-empty and contain no path separators", self.name)));
        }
        if self.backends.is_empty() {
            return Err(Error::Config("no backends configured (add [[backends]] or pass --backend oracle)".into()));
        }
        let spec = MatrixSpec {
            kinds: self.tasks.clone(),
            techniques: self.resolve_techniques()?,
            repetitions: self.repetitions,
            base_seed: self.base_seed,
            parallelism: self.parallelism,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Directory name for one backend's runs.
    pub fn experiment_name(&self, backend: &BackendSpec) -> String {
        if self.backends.len() == 1 {
            self.name.clone()
        } else {
            let model: String =
                backend.model().chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect();
            format!("{}-{model}", self.name)
        }
    }
}

/// Splits a comma-separated task list.
pub fn parse_tasks(list: &str) -> Result<Vec<TaskKind>> {
    if list.trim() == "all" {
        return Ok(TaskKind::ALL.to_vec());
    }
    list.split(',').map(|s| s.trim().parse()).collect()
}

/// Splits a comma-separated technique list; `all` means the nine presets.
pub fn parse_techniques(list: &str) -> Vec<String> {
    if list.trim() == "all" {
        return TechniqueConfig::PRESETS.iter().map(|t| t.label()).collect();
    }
    list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}
