//! The two-stage submodular mixture strategy.
//!
//! Stage 1 scores tasks by their mean prompt embedding and greedily picks
//! `M'` of them with `f1`; the greedy gains become Taylor-softmax weights and
//! then integer instance budgets. Stage 2 runs `f2` inside every task
//! (per template partition) to pick that many instances.
//!
//! Each stage produces a serializable artifact ([`TaskSelection`],
//! [`AllocationPlan`], [`MixtureManifest`]) so the stages can run as
//! separate processes and still produce the same final bytes as
//! [`run_mixture`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::allocate::{
    redistribute_overflow, split_among_templates, taylor_softmax_allocate, Allocation,
};
use crate::error::{Error, Result};
use crate::formats::{
    read_prompts, read_smeb, template_partitions, ConfigEcho, DatasetManifest, MixtureManifest,
    Strategy, TaskData, TaskMixture, TaskRecord, TemplateSelection,
};
use crate::greedy::{lazy_greedy, SelectionResult};
use crate::kernel::{
    build_kernel, build_kernel_from_matrix, mean_embedding, KernelConfig, KernelTransform,
    SimilarityKernel,
};
use crate::par;
use crate::seed::{derive_seed, rng_for, shuffle_prefix};
use crate::submodular::{FunctionSpec, SubmodularFn};

pub const DEFAULT_PER_TASK_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    pub f1: FunctionSpec,
    pub f2: FunctionSpec,
    pub task_budget: usize,
    pub instance_budget: u64,
    pub seed: u64,
    pub kernel: KernelConfig,
    pub per_task_cap: usize,
}

impl MixtureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.task_budget == 0 {
            return Err(Error::InvalidConfig("task budget must be positive".into()));
        }
        if self.instance_budget == 0 {
            return Err(Error::InvalidConfig(
                "instance budget must be positive".into(),
            ));
        }
        if self.per_task_cap == 0 {
            return Err(Error::InvalidConfig("per-task cap must be positive".into()));
        }
        self.f1.validate()?;
        self.f2.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedTask {
    pub task_id: String,
    /// Position in the dataset manifest.
    pub index: usize,
    pub gain: f64,
}

/// Stage-1 output: tasks in greedy order with their gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSelection {
    pub manifest: String,
    pub f1: FunctionSpec,
    pub kernel_transform: KernelTransform,
    pub task_budget: usize,
    pub tasks: Vec<SelectedTask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub task_id: String,
    pub index: usize,
    pub gain: f64,
    pub weight: f64,
    pub budget: u64,
}

/// Per-task instance budgets, in greedy order, after capacity capping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub manifest: String,
    pub f1: FunctionSpec,
    pub kernel_transform: KernelTransform,
    pub task_budget: usize,
    pub instance_budget: u64,
    pub per_task_cap: usize,
    pub tasks: Vec<PlanEntry>,
}

/// Mean prompt embedding of every task, in manifest order.
pub fn task_embeddings(manifest: &DatasetManifest) -> Result<Vec<Vec<f64>>> {
    par::map_slice(&manifest.tasks, |t| {
        read_smeb(&t.embeddings_path)
            .and_then(|m| mean_embedding(&m))
            .map_err(|e| e.in_task(&t.task_id))
    })
    .into_iter()
    .collect()
}

/// Greedy task selection on a task kernel. `task_budget > n` truncates.
pub fn select_tasks(
    task_kernel: &SimilarityKernel,
    f1: FunctionSpec,
    task_budget: usize,
) -> Result<SelectionResult> {
    let mut f = SubmodularFn::new(f1, task_kernel)?;
    lazy_greedy(&mut f, task_budget)
}

/// Stage 1 end to end: embeddings, task kernel, greedy selection.
pub fn run_task_selection(
    manifest: &DatasetManifest,
    manifest_path: &str,
    f1: FunctionSpec,
    kernel: &KernelConfig,
    task_budget: usize,
) -> Result<TaskSelection> {
    let stage = || -> Result<TaskSelection> {
        if task_budget == 0 {
            return Err(Error::InvalidConfig("task budget must be positive".into()));
        }
        if task_budget > manifest.len() {
            log::warn!(
                "task budget {task_budget} exceeds {} tasks; selecting all",
                manifest.len()
            );
        }
        let embeddings = task_embeddings(manifest)?;
        let task_kernel = build_kernel(&embeddings, kernel).map_err(|e| match e {
            Error::ZeroNormVector(i) => {
                Error::ZeroNormVector(i).in_task(&manifest.tasks[i].task_id)
            }
            other => other,
        })?;
        let result = select_tasks(&task_kernel, f1, task_budget)?;
        Ok(TaskSelection {
            manifest: manifest_path.to_string(),
            f1,
            kernel_transform: kernel.transform,
            task_budget,
            tasks: result
                .selected
                .iter()
                .zip(&result.gains)
                .map(|(&index, &gain)| SelectedTask {
                    task_id: manifest.tasks[index].task_id.clone(),
                    index,
                    gain,
                })
                .collect(),
        })
    };
    stage().map_err(|e| e.at_stage("select-tasks"))
}

/// Template tags (sorted) with their row counts.
fn template_counts(task: &TaskRecord) -> Result<Vec<(String, usize)>> {
    let records = read_prompts(&task.prompts_path).map_err(|e| e.in_task(&task.task_id))?;
    Ok(template_partitions(&records)
        .into_iter()
        .map(|(tag, rows)| (tag, rows.len()))
        .collect())
}

/// Instances stage 2 can draw from a task: each template contributes at most
/// `per_task_cap` rows.
pub fn effective_capacity(templates: &[(String, usize)], per_task_cap: usize) -> u64 {
    templates
        .iter()
        .map(|(_, c)| (*c).min(per_task_cap) as u64)
        .sum()
}

/// Taylor-softmax budgets for the selected tasks, capped at task capacity.
pub fn allocate(
    selection: &TaskSelection,
    manifest: &DatasetManifest,
    instance_budget: u64,
    per_task_cap: usize,
) -> Result<AllocationPlan> {
    let stage = || -> Result<AllocationPlan> {
        if instance_budget == 0 {
            return Err(Error::InvalidConfig(
                "instance budget must be positive".into(),
            ));
        }
        if per_task_cap == 0 {
            return Err(Error::InvalidConfig("per-task cap must be positive".into()));
        }
        let gains: Vec<f64> = selection.tasks.iter().map(|t| t.gain).collect();
        let plan = taylor_softmax_allocate(&gains, instance_budget)?;
        let capacities = par::map_slice(&selection.tasks, |t| {
            let task = lookup(manifest, t)?;
            Ok(effective_capacity(&template_counts(task)?, per_task_cap))
        })
        .into_iter()
        .collect::<Result<Vec<u64>>>()?;
        let plan = redistribute_overflow(&plan, &capacities)?;
        Ok(AllocationPlan {
            manifest: selection.manifest.clone(),
            f1: selection.f1,
            kernel_transform: selection.kernel_transform,
            task_budget: selection.task_budget,
            instance_budget,
            per_task_cap,
            tasks: selection
                .tasks
                .iter()
                .zip(plan)
                .map(
                    |(
                        t,
                        Allocation {
                            gain,
                            weight,
                            budget,
                        },
                    )| PlanEntry {
                        task_id: t.task_id.clone(),
                        index: t.index,
                        gain,
                        weight,
                        budget,
                    },
                )
                .collect(),
        })
    };
    stage().map_err(|e| e.at_stage("allocate"))
}

fn lookup<'m>(manifest: &'m DatasetManifest, t: &SelectedTask) -> Result<&'m TaskRecord> {
    manifest
        .tasks
        .get(t.index)
        .filter(|r| r.task_id == t.task_id)
        .ok_or_else(|| {
            Error::Schema(format!(
                "task `{}` at index {} not found in dataset manifest",
                t.task_id, t.index
            ))
        })
}

/// Greedy instance selection inside one template partition.
///
/// `rows` are the partition's global row indices, ascending. Partitions larger
/// than `per_task_cap` are first subsampled uniformly with a generator seeded
/// from `(seed, task_id, template)`. Returns global rows, ascending.
#[allow(clippy::too_many_arguments)]
pub fn select_partition(
    data: &TaskData,
    task_id: &str,
    template: &str,
    rows: &[usize],
    budget: usize,
    f2: FunctionSpec,
    kernel: &KernelConfig,
    seed: u64,
    per_task_cap: usize,
) -> Result<Vec<usize>> {
    let pool: Vec<usize> = if rows.len() > per_task_cap {
        let mut rng = rng_for(derive_seed(seed, task_id, template));
        let mut picks = shuffle_prefix(&mut rng, rows.len(), per_task_cap);
        picks.sort_unstable();
        picks.into_iter().map(|p| rows[p]).collect()
    } else {
        rows.to_vec()
    };
    if budget > pool.len() {
        return Err(Error::CapacityExceeded {
            requested: budget as u64,
            available: pool.len() as u64,
        });
    }
    if budget == 0 {
        return Ok(Vec::new());
    }
    if budget == pool.len() {
        return Ok(pool);
    }
    let sub = data.embeddings.select_rows(&pool);
    let k = build_kernel_from_matrix(&sub, kernel).map_err(|e| match e {
        Error::ZeroNormVector(local) => Error::ZeroNormVector(pool[local]),
        other => other,
    })?;
    let mut f = SubmodularFn::new(f2, &k)?;
    let result = lazy_greedy(&mut f, budget)?;
    let mut chosen: Vec<usize> = result.selected.into_iter().map(|i| pool[i]).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Stage 2 for one task: split its budget over templates, then select.
pub fn select_instances(
    task: &TaskRecord,
    budget: u64,
    f2: FunctionSpec,
    kernel: &KernelConfig,
    seed: u64,
    per_task_cap: usize,
) -> Result<Vec<TemplateSelection>> {
    let run = || -> Result<Vec<TemplateSelection>> {
        let records = read_prompts(&task.prompts_path)?;
        let parts: BTreeMap<String, Vec<usize>> = template_partitions(&records);
        let caps: Vec<u64> = parts
            .values()
            .map(|rows| rows.len().min(per_task_cap) as u64)
            .collect();
        let split = split_among_templates(budget, &caps)?;
        if budget == 0 {
            return Ok(parts
                .into_keys()
                .map(|template| TemplateSelection {
                    template,
                    budget: 0,
                    selected: Vec::new(),
                })
                .collect());
        }
        let data = TaskData::load(task)?;
        parts
            .iter()
            .zip(split)
            .map(|((tag, rows), b)| {
                let selected = select_partition(
                    &data,
                    &task.task_id,
                    tag,
                    rows,
                    b as usize,
                    f2,
                    kernel,
                    seed,
                    per_task_cap,
                )?;
                Ok(TemplateSelection {
                    template: tag.clone(),
                    budget: b,
                    selected,
                })
            })
            .collect()
    };
    run().map_err(|e| match e {
        e @ Error::InTask { .. } => e,
        e => e.in_task(&task.task_id),
    })
}

/// Stage 2 over every planned task; tasks run in parallel when enabled.
pub fn run_instance_selection(
    plan: &AllocationPlan,
    manifest: &DatasetManifest,
    f2: FunctionSpec,
    seed: u64,
) -> Result<MixtureManifest> {
    let stage = || -> Result<MixtureManifest> {
        f2.validate()?;
        let kernel = KernelConfig {
            transform: plan.kernel_transform,
        };
        let tasks = par::map_slice(&plan.tasks, |entry| {
            let task = lookup(
                manifest,
                &SelectedTask {
                    task_id: entry.task_id.clone(),
                    index: entry.index,
                    gain: entry.gain,
                },
            )?;
            let templates =
                select_instances(task, entry.budget, f2, &kernel, seed, plan.per_task_cap)?;
            Ok(TaskMixture {
                task_id: entry.task_id.clone(),
                gain: Some(entry.gain),
                weight: Some(entry.weight),
                budget: entry.budget,
                templates,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(MixtureManifest::new(
            Strategy::Submodular,
            ConfigEcho {
                f1: Some(plan.f1),
                f2: Some(f2),
                kernel_transform: Some(plan.kernel_transform),
                task_budget: Some(plan.task_budget),
                instance_budget: plan.instance_budget,
                seed,
                per_task_cap: Some(plan.per_task_cap),
            },
            tasks,
        ))
    };
    stage().map_err(|e| e.at_stage("select-instances"))
}

/// The full two-stage pipeline.
pub fn run_mixture(
    manifest: &DatasetManifest,
    manifest_path: &str,
    config: &MixtureConfig,
) -> Result<MixtureManifest> {
    config.validate()?;
    let selection = run_task_selection(
        manifest,
        manifest_path,
        config.f1,
        &config.kernel,
        config.task_budget,
    )?;
    let plan = allocate(
        &selection,
        manifest,
        config.instance_budget,
        config.per_task_cap,
    )?;
    run_instance_selection(&plan, manifest, config.f2, config.seed)
}
