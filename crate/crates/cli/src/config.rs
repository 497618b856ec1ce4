//! Run configuration: one section per pipeline stage, read from TOML or JSON.
//!
//! ```toml
//! [search]
//! k = 1
//! step_size = 0.05
//!
//! [multi_start]
//! n_starts = 16
//! perturbation = 6.0
//!
//! [continuation]
//! n_steps = 100
//! ```
//!
//! Missing sections and fields take their library defaults. The snapshot
//! written next to every run is this same structure in JSON, so it can be fed
//! back through `--config`.

use std::path::Path;

use anyhow::{Context, Result};
use framesaddle::analysis::CertifyConfig;
use framesaddle::continuation::ContinuationConfig;
use framesaddle::search::{MultiStartOptions, SearchConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub search: SearchConfig<f64>,
    pub multi_start: MultiStartOptions<f64>,
    pub certify: CertifyConfig<f64>,
    pub continuation: ContinuationConfig<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let is_toml = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if is_toml {
            toml::from_str(&text).with_context(|| format!("config {}", path.display()))
        } else {
            serde_json::from_str(&text).with_context(|| format!("config {}", path.display()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg: RunConfig =
            toml::from_str("[search]\nstep_size = 0.02\n[multi_start]\nn_starts = 4\n").unwrap();
        assert_eq!(cfg.search.step_size, 0.02);
        assert_eq!(cfg.search.k, 1);
        assert_eq!(cfg.multi_start.n_starts, 4);
        assert_eq!(cfg.continuation, ContinuationConfig::default());
    }

    #[test]
    fn snapshot_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.search.seed = 99;
        cfg.search.eigen_step = Some(0.3);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[search]\nstep = 0.1\n").is_err());
        assert!(toml::from_str::<RunConfig>("[solver]\n").is_err());
    }
}
