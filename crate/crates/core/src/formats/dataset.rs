//! Dataset manifests and JSONL prompt files.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::smeb::{read_smeb, read_smeb_header, EmbeddingMatrix};
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: &str = "1";
pub const DEFAULT_TEMPLATE: &str = "default";

/// One task dataset. Paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskRecord {
    pub task_id: String,
    pub prompts_path: PathBuf,
    pub embeddings_path: PathBuf,
    pub instance_count: usize,
}

/// The ordered task collection. Task order is canonical: every index-based
/// tie-break downstream refers to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub version: String,
    pub tasks: Vec<TaskRecord>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn total_instances(&self) -> u64 {
        self.tasks.iter().map(|t| t.instance_count as u64).sum()
    }

    pub fn capacities(&self) -> Vec<u64> {
        self.tasks.iter().map(|t| t.instance_count as u64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub prompt: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
}

impl InstanceRecord {
    pub fn template(&self) -> &str {
        self.template.as_deref().unwrap_or(DEFAULT_TEMPLATE)
    }
}

/// On-disk manifest layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub version: String,
    pub tasks: Vec<TaskEntryFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntryFile {
    pub task_id: String,
    pub prompts_path: String,
    pub embeddings_path: String,
    pub instance_count: usize,
}

fn parse_manifest_file(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: ManifestFile = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    if raw.version != MANIFEST_VERSION {
        return Err(Error::Schema(format!(
            "unsupported manifest version `{}`",
            raw.version
        )));
    }
    if raw.tasks.is_empty() {
        return Err(Error::Schema("manifest lists no tasks".into()));
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut seen = HashSet::new();
    let mut tasks = Vec::with_capacity(raw.tasks.len());
    for (i, t) in raw.tasks.into_iter().enumerate() {
        if t.task_id.is_empty() {
            return Err(Error::Schema(format!("tasks[{i}].task_id is empty")));
        }
        if !seen.insert(t.task_id.clone()) {
            return Err(Error::Schema(format!(
                "tasks[{i}].task_id `{}` is duplicated",
                t.task_id
            )));
        }
        tasks.push(TaskRecord {
            prompts_path: base.join(&t.prompts_path),
            embeddings_path: base.join(&t.embeddings_path),
            task_id: t.task_id,
            instance_count: t.instance_count,
        });
    }
    Ok(DatasetManifest {
        version: raw.version,
        tasks,
    })
}

/// Loads a manifest and cross-checks every task's prompt and embedding counts.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let manifest = parse_manifest_file(path.as_ref())?;
    for task in &manifest.tasks {
        check_task(task, false).map_err(|e| e.in_task(&task.task_id))?;
    }
    Ok(manifest)
}

fn check_task(task: &TaskRecord, full_embeddings: bool) -> Result<()> {
    let lines = read_prompts(&task.prompts_path)?.len();
    let rows = if full_embeddings {
        read_smeb(&task.embeddings_path)?.n_rows() as u64
    } else {
        read_smeb_header(&task.embeddings_path)?.0
    };
    if lines != task.instance_count || rows != task.instance_count as u64 {
        return Err(Error::CountMismatch {
            task_id: task.task_id.clone(),
            detail: format!(
                "instance_count={}, prompt lines={lines}, embedding rows={rows}",
                task.instance_count
            ),
        });
    }
    Ok(())
}

/// Parses a prompts file; errors name the 1-based line.
pub fn read_prompts(path: impl AsRef<Path>) -> Result<Vec<InstanceRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let at = || format!("{} line {}", path.display(), i + 1);
        let rec: InstanceRecord =
            serde_json::from_str(&line).map_err(|e| Error::Schema(format!("{}: {e}", at())))?;
        if rec.prompt.is_empty() {
            return Err(Error::Schema(format!("{}: empty prompt", at())));
        }
        if rec.template.as_deref() == Some("") {
            return Err(Error::Schema(format!("{}: empty template tag", at())));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Row indices grouped by template tag, tags in sorted order, rows ascending.
pub fn template_partitions(records: &[InstanceRecord]) -> BTreeMap<String, Vec<usize>> {
    let mut parts: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        parts.entry(r.template().to_string()).or_default().push(i);
    }
    parts
}

/// Everything needed to run instance selection on one task.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub records: Vec<InstanceRecord>,
    pub embeddings: EmbeddingMatrix,
}

impl TaskData {
    pub fn load(task: &TaskRecord) -> Result<Self> {
        let load = || -> Result<Self> {
            let records = read_prompts(&task.prompts_path)?;
            let embeddings = read_smeb(&task.embeddings_path)?;
            if records.len() != task.instance_count || embeddings.n_rows() != task.instance_count {
                return Err(Error::CountMismatch {
                    task_id: task.task_id.clone(),
                    detail: format!(
                        "instance_count={}, prompt lines={}, embedding rows={}",
                        task.instance_count,
                        records.len(),
                        embeddings.n_rows()
                    ),
                });
            }
            Ok(Self {
                records,
                embeddings,
            })
        };
        load().map_err(|e| e.in_task(&task.task_id))
    }
}

#[derive(Debug)]
pub struct ValidationReport {
    pub tasks: usize,
    pub instances: u64,
    pub violations: Vec<Error>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs every check, including a full NaN/Inf scan of each embedding file,
/// and collects all per-task violations instead of stopping at the first.
/// Only an unreadable or malformed manifest file is returned as `Err`.
pub fn validate_corpus(path: impl AsRef<Path>) -> Result<ValidationReport> {
    let manifest = parse_manifest_file(path.as_ref())?;
    let violations = manifest
        .tasks
        .iter()
        .filter_map(|t| check_task(t, true).err().map(|e| e.in_task(&t.task_id)))
        .collect();
    Ok(ValidationReport {
        tasks: manifest.len(),
        instances: manifest.total_instances(),
        violations,
    })
}
