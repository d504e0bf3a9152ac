//! Synthetic corpora with planted cluster structure, for tests, benches and
//! demos. Output is a regular dataset directory (manifest, JSONL, SMEB).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::formats::dataset::{ManifestFile, TaskEntryFile, MANIFEST_VERSION};
use crate::formats::{write_smeb, EmbeddingMatrix};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub clusters: usize,
    pub tasks_per_cluster: usize,
    pub per_task: usize,
    pub dim: usize,
    /// Std-dev of each task center around its cluster center.
    pub task_spread: f64,
    /// Std-dev of each instance around its task center.
    pub instance_noise: f64,
    /// Template tags, assigned to rows round-robin. Empty means no tag.
    pub templates: Vec<String>,
    pub seed: u64,
}

impl SynthSpec {
    /// One Gaussian cluster per task around a random unit center.
    pub fn tasks(n_tasks: usize, per_task: usize, dim: usize, seed: u64) -> Self {
        Self {
            clusters: n_tasks,
            tasks_per_cluster: 1,
            per_task,
            dim,
            task_spread: 0.0,
            instance_noise: 0.3,
            templates: Vec::new(),
            seed,
        }
    }

    pub fn with_templates(mut self, tags: &[&str]) -> Self {
        self.templates = tags.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn n_tasks(&self) -> usize {
        self.clusters * self.tasks_per_cluster
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub manifest_path: PathBuf,
    pub task_ids: Vec<String>,
    /// Planted cluster of each task, in manifest order.
    pub labels: Vec<usize>,
    /// Unit cluster centers, indexed by label.
    pub centers: Vec<Vec<f64>>,
}

fn unit_gaussian<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn perturb_unit<R: Rng>(rng: &mut R, center: &[f64], std: f64) -> Vec<f64> {
    let v: Vec<f64> = center
        .iter()
        .map(|c| c + std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 1e-9 {
        v.into_iter().map(|x| x / n).collect()
    } else {
        center.to_vec()
    }
}

/// Writes the corpus into `dir` (created if needed).
pub fn generate(spec: &SynthSpec, dir: impl AsRef<Path>) -> Result<SynthCorpus> {
    let dir = dir.as_ref();
    if spec.clusters == 0 || spec.tasks_per_cluster == 0 || spec.per_task == 0 || spec.dim == 0 {
        return Err(Error::InvalidConfig(
            "synthetic corpus sizes must be positive".into(),
        ));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = rng_for(spec.seed);
    let centers: Vec<Vec<f64>> = (0..spec.clusters)
        .map(|_| unit_gaussian(&mut rng, spec.dim))
        .collect();
    let mut labels: Vec<usize> = (0..spec.n_tasks()).map(|i| i % spec.clusters).collect();
    labels.shuffle(&mut rng);

    let mut entries = Vec::with_capacity(labels.len());
    let mut task_ids = Vec::with_capacity(labels.len());
    for (t, &label) in labels.iter().enumerate() {
        let task_id = format!("task_{t:03}");
        let center = perturb_unit(&mut rng, &centers[label], spec.task_spread);
        let mut data = Vec::with_capacity(spec.per_task * spec.dim);
        let jsonl_path = dir.join(format!("{task_id}.jsonl"));
        let mut jsonl = Vec::new();
        for j in 0..spec.per_task {
            let row = perturb_unit(&mut rng, &center, spec.instance_noise);
            data.extend(row.iter().map(|&x| x as f32));
            let mut rec = serde_json::json!({
                "prompt": format!("{task_id} prompt {j}"),
                "response": format!("{task_id} response {j}"),
            });
            if !spec.templates.is_empty() {
                rec["template"] = spec.templates[j % spec.templates.len()].clone().into();
            }
            writeln!(jsonl, "{rec}").expect("write to Vec");
        }
        fs::write(&jsonl_path, jsonl).map_err(|e| Error::io(&jsonl_path, e))?;
        let m = EmbeddingMatrix::new(spec.per_task, spec.dim, data)?;
        write_smeb(&m, dir.join(format!("{task_id}.smeb")))?;
        entries.push(TaskEntryFile {
            prompts_path: format!("{task_id}.jsonl"),
            embeddings_path: format!("{task_id}.smeb"),
            instance_count: spec.per_task,
            task_id: task_id.clone(),
        });
        task_ids.push(task_id);
    }
    let manifest_path = dir.join("manifest.json");
    let manifest = ManifestFile {
        version: MANIFEST_VERSION.into(),
        tasks: entries,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(SynthCorpus {
        manifest_path,
        task_ids,
        labels,
        centers,
    })
}
