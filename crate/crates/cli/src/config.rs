//! Campaign configuration.
//!
//! ```toml
//! [campaign]
//! name = "paper-n2"
//! threads = 4
//! output = "reports"
//! strict = true
//!
//! [[item]]
//! suite = "paper"        # or: identity = "dybe-a"
//! n = 2
//! mode = "random"        # "exact" or "random"
//! seed = 7
//! trials = 3
//! sig = "(1,1)"          # or new, boundary, semi, nondynamical
//! ```

use std::path::{Path, PathBuf};

use dynrefl::checks::AlgebraSignature;
use dynrefl::exactfield::CheckMode;
use serde::Deserialize;
use thiserror::Error;

use crate::identities;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("item {index}: {msg}")]
    Item { index: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub campaign: CampaignSection,
    #[serde(default, rename = "item")]
    pub items: Vec<ItemSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    #[serde(default = "default_name")]
    pub name: String,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    #[serde(default = "yes")]
    pub strict: bool,
}

impl Default for CampaignSection {
    fn default() -> Self {
        Self { name: default_name(), threads: None, output: None, strict: true }
    }
}

fn default_name() -> String {
    "campaign".into()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemSpec {
    pub identity: Option<String>,
    pub suite: Option<String>,
    pub n: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default = "default_sig")]
    pub sig: String,
}

fn default_mode() -> String {
    "exact".into()
}

fn default_trials() -> u32 {
    3
}

fn default_sig() -> String {
    "new".into()
}

/// One resolved campaign entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub identity: String,
    pub n: usize,
    pub mode: CheckMode,
    pub sig: AlgebraSignature,
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub name: String,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub strict: bool,
    pub items: Vec<Item>,
}

pub fn parse_mode(mode: &str, seed: u64, trials: u32) -> Result<CheckMode, String> {
    match mode {
        "exact" => Ok(CheckMode::Exact),
        "random" if trials == 0 => Err("random mode needs at least one trial".into()),
        "random" => Ok(CheckMode::Random { trials, seed }),
        _ => Err(format!("unknown mode {mode:?} (expected exact or random)")),
    }
}

impl ItemSpec {
    pub fn resolve(&self, index: usize) -> Result<Vec<Item>, ConfigError> {
        let err = |msg: String| ConfigError::Item { index, msg };
        if self.n < 2 {
            return Err(err(format!("n must be at least 2, got {}", self.n)));
        }
        if self.n > 7 {
            return Err(err(format!("n = {} exceeds the variable limit (at most 7 with masses)", self.n)));
        }
        let mode = parse_mode(&self.mode, self.seed, self.trials).map_err(err)?;
        let sig: AlgebraSignature = self.sig.parse().map_err(err)?;
        let names: Vec<String> = match (&self.identity, &self.suite) {
            (Some(id), None) => {
                if !identities::is_known(id) {
                    return Err(err(format!("unknown identity {id:?}")));
                }
                if id == "reduction" && self.n != 2 {
                    return Err(err("reduction is only defined for n = 2".into()));
                }
                vec![id.clone()]
            }
            (None, Some(s)) => {
                if !identities::known_suite(s) {
                    return Err(err(format!("unknown suite {s:?} (expected paper or structure)")));
                }
                identities::suite(s, self.n).into_iter().map(String::from).collect()
            }
            _ => return Err(err("give exactly one of identity or suite".into())),
        };
        Ok(names.into_iter().map(|identity| Item { identity, n: self.n, mode, sig }).collect())
    }
}

impl Config {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_str(&text)
    }

    pub fn resolve(&self) -> Result<Campaign, ConfigError> {
        if self.items.is_empty() {
            return Err(ConfigError::Invalid("campaign has no items".into()));
        }
        if self.campaign.threads == Some(0) {
            return Err(ConfigError::Invalid("threads must be positive".into()));
        }
        let mut items = Vec::new();
        for (i, spec) in self.items.iter().enumerate() {
            items.extend(spec.resolve(i + 1)?);
        }
        Ok(Campaign {
            name: self.campaign.name.clone(),
            threads: self.campaign.threads,
            output: self.campaign.output.clone(),
            strict: self.campaign.strict,
            items,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let c = Config::from_str(
            r#"
            [campaign]
            name = "x"
            threads = 2
            [[item]]
            suite = "structure"
            n = 3
            mode = "random"
            seed = 7
            [[item]]
            identity = "reduction"
            n = 2
            "#,
        )
        .unwrap()
        .resolve()
        .unwrap();
        assert_eq!(c.items.len(), 7);
        assert_eq!(c.items[0].mode, CheckMode::Random { trials: 3, seed: 7 });
        assert_eq!(c.items[6].identity, "reduction");
        assert_eq!(c.items[6].sig, AlgebraSignature::NEW);
    }

    #[test]
    fn rejects_bad_items() {
        for bad in [
            "[[item]]\nidentity = \"nope\"\nn = 2",
            "[[item]]\nsuite = \"paper\"\nidentity = \"rll\"\nn = 2",
            "[[item]]\nidentity = \"rll\"\nn = 1",
            "[[item]]\nidentity = \"rll\"\nn = 2\nmode = \"fuzzy\"",
            "[[item]]\nidentity = \"rll\"\nn = 2\nsig = \"(1,x)\"",
            "[[item]]\nidentity = \"reduction\"\nn = 3",
            "[campaign]\nthreads = 0\n[[item]]\nidentity = \"rll\"\nn = 2",
            "[campaign]\nbogus = 1",
            "",
        ] {
            let r = Config::from_str(bad).and_then(|c| c.resolve());
            assert!(r.is_err(), "accepted {bad:?}");
        }
    }
}
