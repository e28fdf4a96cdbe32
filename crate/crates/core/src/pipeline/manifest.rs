use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::StageCounts;
use crate::seed::sha256_hex;
use crate::{Error, Result};

pub const MANIFEST_SCHEMA_ID: &str = "reasonforge.run-manifest.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Dedup,
    Decontaminate,
    Generate,
    Postprocess,
    Critique,
    Execute,
    Evaluate,
}

/// The eight steps of a full run, in order. Post-processing runs twice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Dedup,
    Decontaminate,
    Generate,
    PostprocessSolutions,
    Critique,
    PostprocessCritiques,
    Execute,
    Evaluate,
}

impl Step {
    pub const ALL: [Step; 8] = [
        Step::Dedup,
        Step::Decontaminate,
        Step::Generate,
        Step::PostprocessSolutions,
        Step::Critique,
        Step::PostprocessCritiques,
        Step::Execute,
        Step::Evaluate,
    ];

    pub fn stage(self) -> Stage {
        match self {
            Step::Dedup => Stage::Dedup,
            Step::Decontaminate => Stage::Decontaminate,
            Step::Generate => Stage::Generate,
            Step::PostprocessSolutions | Step::PostprocessCritiques => Stage::Postprocess,
            Step::Critique => Stage::Critique,
            Step::Execute => Stage::Execute,
            Step::Evaluate => Stage::Evaluate,
        }
    }

    /// Directory and manifest name.
    pub fn label(self) -> &'static str {
        match self {
            Step::Dedup => "dedup",
            Step::Decontaminate => "decontaminate",
            Step::Generate => "generate",
            Step::PostprocessSolutions => "postprocess_solutions",
            Step::Critique => "critique",
            Step::PostprocessCritiques => "postprocess_critiques",
            Step::Execute => "execute",
            Step::Evaluate => "evaluate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

impl ArtifactDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), sha256: sha256_hex(&data), bytes: data.len() as u64 })
    }

    /// True when the file still has this content.
    pub fn matches(&self) -> bool {
        Self::of(&self.path).is_ok_and(|now| now.sha256 == self.sha256)
    }
}

/// Provenance of one stage execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub run_id: String,
    pub stage: Stage,
    pub step: Step,
    pub status: StageStatus,
    pub config: serde_json::Value,
    pub inputs: Vec<ArtifactDigest>,
    pub outputs: Vec<ArtifactDigest>,
    pub seeds: BTreeMap<String, u64>,
    /// Unix seconds.
    pub started_at: u64,
    pub finished_at: u64,
    pub provider_profile: String,
    pub counts: StageCounts,
    /// Records taken from checkpoints of an interrupted earlier attempt.
    pub resumed: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub toolchain: BTreeMap<String, String>,
    /// Digest of output content that excludes timing fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub(crate) fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// A completed manifest whose inputs and outputs are unchanged on disk.
    pub fn still_valid(&self, run_id: &str, inputs: &[PathBuf]) -> bool {
        self.status == StageStatus::Completed
            && self.run_id == run_id
            && self.inputs.len() == inputs.len()
            && self.inputs.iter().zip(inputs).all(|(d, p)| &d.path == p && d.matches())
            && self.outputs.iter().all(ArtifactDigest::matches)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_track_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        std::fs::write(&p, "abc").unwrap();
        let d = ArtifactDigest::of(&p).unwrap();
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(d.bytes, 3);
        assert!(d.matches());
        std::fs::write(&p, "abd").unwrap();
        assert!(!d.matches());
    }

    #[test]
    fn steps_map_to_stages() {
        assert_eq!(Step::PostprocessCritiques.stage(), Stage::Postprocess);
        assert_eq!(Step::Critique.stage(), Stage::Critique);
        let labels: Vec<_> = Step::ALL.iter().map(|s| s.label()).collect();
        assert_eq!(labels.len(), 8);
        assert_eq!(serde_json::to_string(&Stage::Decontaminate).unwrap(), "\"decontaminate\"");
    }
}
