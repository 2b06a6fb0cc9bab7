use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which prompt-engineering techniques are active for an episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TechniqueConfig {
    #[serde(default)]
    pub adaptive_functions: bool,
    #[serde(default)]
    pub cot: bool,
    #[serde(default)]
    pub react: bool,
    #[serde(default)]
    pub example_in_prompt: bool,
    #[serde(default)]
    pub state_description: bool,
}

const fn preset(af: bool, cot: bool, react: bool, eip: bool, std: bool) -> TechniqueConfig {
    TechniqueConfig { adaptive_functions: af, cot, react, example_in_prompt: eip, state_description: std }
}

impl TechniqueConfig {
    /// The nine evaluated combinations, in report row order.
    pub const PRESETS: [TechniqueConfig; 9] = [
        preset(false, false, false, false, false),
        preset(true, false, false, false, false),
        preset(true, false, false, true, false),
        preset(true, true, false, false, false),
        preset(true, true, false, true, false),
        preset(true, false, true, true, false),
        preset(true, false, false, false, true),
        preset(true, true, false, true, true),
        preset(true, false, true, true, true),
    ];

    pub fn validate(&self) -> Result<()> {
        if self.cot && self.react {
            return Err(Error::Config(format!("technique `{}` combines CoT and ReAct, which are mutually exclusive", self.label())));
        }
        Ok(())
    }

    fn parts(&self) -> Vec<&'static str> {
        let mut parts = Vec::new();
        if self.adaptive_functions {
            parts.push("AF");
        }
        if self.cot {
            parts.push("CoT");
        }
        if self.react {
            parts.push("ReAct");
        }
        if self.example_in_prompt {
            parts.push("EiP");
        }
        if self.state_description {
            parts.push("StD");
        }
        parts
    }

    /// Display label, e.g. `AF + CoT + EiP + StD`.
    pub fn label(&self) -> String {
        let parts = self.parts();
        if parts.is_empty() {
            "Baseline".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Filesystem-safe label, e.g. `af-cot-eip-std`.
    pub fn slug(&self) -> String {
        let parts = self.parts();
        if parts.is_empty() {
            "baseline".into()
        } else {
            parts.join("-").to_ascii_lowercase()
        }
    }

    /// Position among [`Self::PRESETS`]; non-preset combinations sort after them.
    pub fn preset_rank(&self) -> usize {
        Self::PRESETS.iter().position(|p| p == self).unwrap_or(Self::PRESETS.len())
    }
}

impl fmt::Display for TechniqueConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Accepts labels (`AF + CoT`) and slugs (`af-cot`), case-insensitively.
impl FromStr for TechniqueConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        if normalized == "baseline" || normalized == "none" {
            return Ok(Self::default());
        }
        let mut config = Self::default();
        for token in normalized.split(['+', '-']) {
            let flag = match token {
                "af" => &mut config.adaptive_functions,
                "cot" => &mut config.cot,
                "react" => &mut config.react,
                "eip" => &mut config.example_in_prompt,
                "std" => &mut config.state_description,
                other => return Err(Error::Config(format!("unknown technique `{other}` in `{s}`"))),
            };
            if *flag {
                return Err(Error::Config(format!("technique `{token}` repeated in `{s}`")));
            }
            *flag = true;
        }
        config.validate()?;
        Ok(config)
    }
}
