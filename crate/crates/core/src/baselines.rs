//! Examples-proportional (EPM) and equal (EM) mixture baselines.

use serde::{Deserialize, Serialize};

use crate::allocate::equal_split;
use crate::error::{Error, Result};
use crate::formats::{
    read_prompts, template_partitions, ConfigEcho, DatasetManifest, MixtureManifest, Strategy,
    TaskMixture, TaskRecord, TemplateSelection,
};
use crate::par;
use crate::seed::{derive_seed, rng_for, shuffle_prefix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineStrategy {
    Epm,
    Em,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineConfig {
    pub strategy: BaselineStrategy,
    pub instance_budget: u64,
    pub seed: u64,
}

// EPM draws from the pooled corpus, so its generator is keyed on a name no
// task id can collide with (task ids never contain 0xFF).
const EPM_STREAM: &str = "\u{0}epm";

fn check_budget(manifest: &DatasetManifest, budget: u64) -> Result<()> {
    let available = manifest.total_instances();
    if budget > available {
        return Err(Error::BudgetExceedsCorpus {
            requested: budget,
            available,
        });
    }
    Ok(())
}

/// Groups a task's selected rows by template, templates in canonical order.
fn by_template(task: &TaskRecord, mut rows: Vec<usize>) -> Result<TaskMixture> {
    rows.sort_unstable();
    let records = read_prompts(&task.prompts_path).map_err(|e| e.in_task(&task.task_id))?;
    let budget = rows.len() as u64;
    let templates = template_partitions(&records)
        .into_keys()
        .map(|tag| {
            let selected: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&r| records[r].template() == tag)
                .collect();
            TemplateSelection {
                budget: selected.len() as u64,
                template: tag,
                selected,
            }
        })
        .collect();
    Ok(TaskMixture {
        task_id: task.task_id.clone(),
        gain: None,
        weight: None,
        budget,
        templates,
    })
}

fn finish(
    strategy: Strategy,
    manifest: &DatasetManifest,
    picks: Vec<Vec<usize>>,
    budget: u64,
    seed: u64,
) -> Result<MixtureManifest> {
    let pairs: Vec<(&TaskRecord, Vec<usize>)> = manifest.tasks.iter().zip(picks).collect();
    let tasks = par::map_slice(&pairs, |(task, rows)| by_template(task, rows.clone()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(MixtureManifest::new(
        strategy,
        ConfigEcho {
            f1: None,
            f2: None,
            kernel_transform: None,
            task_budget: None,
            instance_budget: budget,
            seed,
            per_task_cap: None,
        },
        tasks,
    ))
}

/// Global instance indices chosen by EPM: a seeded Fisher–Yates prefix over
/// the concatenation of all tasks in manifest order.
pub fn epm_global_indices(
    manifest: &DatasetManifest,
    budget: u64,
    seed: u64,
) -> Result<Vec<usize>> {
    check_budget(manifest, budget)?;
    let mut rng = rng_for(derive_seed(seed, EPM_STREAM, ""));
    Ok(shuffle_prefix(
        &mut rng,
        manifest.total_instances() as usize,
        budget as usize,
    ))
}

/// Examples-proportional mixture: uniform sampling without replacement from
/// the pooled corpus.
pub fn epm_sample(manifest: &DatasetManifest, budget: u64, seed: u64) -> Result<MixtureManifest> {
    let global = epm_global_indices(manifest, budget, seed)?;
    let mut offsets = Vec::with_capacity(manifest.len());
    let mut acc = 0usize;
    for t in &manifest.tasks {
        offsets.push(acc);
        acc += t.instance_count;
    }
    let mut picks = vec![Vec::new(); manifest.len()];
    for g in global {
        let task = offsets.partition_point(|&o| o <= g) - 1;
        picks[task].push(g - offsets[task]);
    }
    finish(Strategy::Epm, manifest, picks, budget, seed)
}

/// Equal-mixture budgets: an even split in manifest order, with capacity
/// overflow spread evenly over the remaining tasks.
pub fn em_budgets(manifest: &DatasetManifest, budget: u64) -> Result<Vec<u64>> {
    check_budget(manifest, budget)?;
    equal_split(budget, &manifest.capacities())
}

/// Equal mixture: equal per-task budgets, uniform sampling within each task.
pub fn em_sample(manifest: &DatasetManifest, budget: u64, seed: u64) -> Result<MixtureManifest> {
    let budgets = em_budgets(manifest, budget)?;
    let picks = manifest
        .tasks
        .iter()
        .zip(&budgets)
        .map(|(t, &b)| {
            let mut rng = rng_for(derive_seed(seed, &t.task_id, ""));
            shuffle_prefix(&mut rng, t.instance_count, b as usize)
        })
        .collect();
    finish(Strategy::Em, manifest, picks, budget, seed)
}

pub fn run_baseline(
    manifest: &DatasetManifest,
    config: &BaselineConfig,
) -> Result<MixtureManifest> {
    if config.instance_budget == 0 {
        return Err(Error::InvalidConfig(
            "instance budget must be positive".into(),
        ));
    }
    match config.strategy {
        BaselineStrategy::Epm => epm_sample(manifest, config.instance_budget, config.seed),
        BaselineStrategy::Em => em_sample(manifest, config.instance_budget, config.seed),
    }
}
