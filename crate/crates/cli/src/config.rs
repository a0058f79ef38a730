use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use maiou_core::analysis::{BenchConfig, DEFAULT_BINS};
use maiou_core::anchors::AnchorConfig;
use maiou_core::assigner::AssignerSpec;
use maiou_core::ProximityMeasure;
use serde::{Deserialize, Serialize};

/// Bad invocation: exits with status 2 instead of 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Mob,
    Joint,
}

impl FromStr for Analysis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mob" => Ok(Analysis::Mob),
            "joint" => Ok(Analysis::Joint),
            other => Err(format!("unknown analysis '{other}', expected mob or joint")),
        }
    }
}

/// Everything a run needs. Loaded from a TOML or JSON file, then overridden
/// by command-line flags, then written next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub include_crowd: bool,
    pub anchors: AnchorConfig,
    pub assigners: Vec<AssignerSpec>,
    pub analyses: Vec<Analysis>,
    pub bins: usize,
    pub output: PathBuf,
    pub seed: u64,
    /// 0 lets the thread pool pick.
    pub workers: usize,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            include_crowd: false,
            anchors: AnchorConfig::default(),
            assigners: vec![AssignerSpec::default()],
            analyses: vec![Analysis::Mob, Analysis::Joint],
            bins: DEFAULT_BINS,
            output: PathBuf::from("maiou-out"),
            seed: 0,
            workers: 0,
            bench: BenchConfig::default(),
        }
    }
}

impl RunConfig {
    /// `.toml` files parse as TOML, anything else as JSON.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.anchors.validate().map_err(|e| usage(e.to_string()))?;
        for spec in &self.assigners {
            spec.validate().map_err(|e| usage(e.to_string()))?;
        }
        if self.bins == 0 {
            return Err(usage("bins must be at least 1"));
        }
        Ok(())
    }

    pub fn dataset(&self) -> anyhow::Result<&Path> {
        self.dataset.as_deref().ok_or_else(|| {
            usage("no dataset given; pass --dataset PATH or set `dataset` in the config file")
        })
    }
}

/// Parses an assigner spec, reporting the valid measure names on failure.
pub fn parse_spec(s: &str) -> Result<AssignerSpec, String> {
    s.parse::<AssignerSpec>().map_err(|e| {
        let msg = e.to_string();
        let names: Vec<&str> = ProximityMeasure::ALL.iter().map(|m| m.name()).collect();
        let list = names.join(", ");
        if msg.contains(&list) {
            msg
        } else {
            format!("{msg} (valid measures: {list})")
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_config_with_defaults() {
        let text = r#"
            dataset = "data/instances.json"
            bins = 10
            [anchors]
            scales = [4.0, 8.0]
            [[assigners]]
            kind = "fixed"
            measure = "iou"
            [[assigners]]
            kind = "atss"
            measure = "maiou"
            k = 9
        "#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.bins, 10);
        assert_eq!(cfg.anchors.strides, vec![8, 16, 32, 64, 128]);
        assert_eq!(cfg.anchors.scales, vec![4.0, 8.0]);
        assert_eq!(cfg.assigners.len(), 2);
        assert_eq!(cfg.seed, 0);
        cfg.validate().unwrap();
    }

    #[test]
    fn json_config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        let cfg: RunConfig =
            serde_json::from_str(r#"{"assigners": [{"kind": "atss", "measure": "giou"}]}"#)
                .unwrap();
        assert_eq!(cfg.assigners[0].to_string(), "atss:giou:9");
    }

    #[test]
    fn spec_errors_list_measures() {
        let err = parse_spec("atss:ciou").unwrap_err();
        assert!(err.contains("iou, giou, diou, maiou"), "{err}");
    }
}
