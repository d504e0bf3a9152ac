//! Mixture manifests and canonical JSON output.
//!
//! Canonical form: object keys sorted at every level, every float rounded to
//! 9 significant digits and printed in shortest round-trip form, two-space
//! indentation, trailing newline. Equal content always yields equal bytes.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::kernel::KernelTransform;
use crate::submodular::FunctionSpec;

pub const MIXTURE_FORMAT_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Submodular,
    Epm,
    Em,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_transform: Option<KernelTransform>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_budget: Option<usize>,
    pub instance_budget: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_task_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSelection {
    pub template: String,
    pub budget: u64,
    /// Row indices into the task's prompts/embeddings files, ascending.
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMixture {
    pub task_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    pub budget: u64,
    pub templates: Vec<TemplateSelection>,
}

impl TaskMixture {
    pub fn selected_count(&self) -> usize {
        self.templates.iter().map(|t| t.selected.len()).sum()
    }
}

/// The final record of which instances make up a mixture. For the
/// submodular strategy, `tasks` follows greedy selection order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureManifest {
    pub format_version: String,
    pub tool_version: String,
    pub strategy: Strategy,
    pub config: ConfigEcho,
    pub total_selected: u64,
    pub tasks: Vec<TaskMixture>,
}

impl MixtureManifest {
    pub fn new(strategy: Strategy, config: ConfigEcho, tasks: Vec<TaskMixture>) -> Self {
        let total_selected = tasks.iter().map(|t| t.selected_count() as u64).sum();
        Self {
            format_version: MIXTURE_FORMAT_VERSION.into(),
            tool_version: TOOL_VERSION.into(),
            strategy,
            config,
            total_selected,
            tasks,
        }
    }

    pub fn to_canonical_json(&self) -> String {
        to_canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("mixture manifest: {e}")))
    }

    pub fn budget_sum(&self) -> u64 {
        self.tasks.iter().map(|t| t.budget).sum()
    }

    /// Checks the structural invariants: budgets add up at both levels and
    /// selections are ascending and unique within each task.
    /// `task_sizes` maps task id to instance count for bounds checks.
    pub fn check(&self, task_size: impl Fn(&str) -> Option<usize>) -> Result<()> {
        let bad = |m: String| Err(Error::Schema(m));
        if self.budget_sum() != self.config.instance_budget {
            return bad(format!(
                "task budgets sum to {}, expected {}",
                self.budget_sum(),
                self.config.instance_budget
            ));
        }
        for t in &self.tasks {
            let size = task_size(&t.task_id)
                .ok_or_else(|| Error::Schema(format!("unknown task `{}`", t.task_id)))?;
            let tb: u64 = t.templates.iter().map(|s| s.budget).sum();
            if tb != t.budget {
                return bad(format!(
                    "task `{}`: template budgets sum to {tb}",
                    t.task_id
                ));
            }
            let mut seen = HashSet::new();
            for s in &t.templates {
                if s.selected.len() as u64 != s.budget {
                    return bad(format!(
                        "task `{}` template `{}`: {} selected, budget {}",
                        t.task_id,
                        s.template,
                        s.selected.len(),
                        s.budget
                    ));
                }
                if s.selected.windows(2).any(|w| w[0] >= w[1]) {
                    return bad(format!("task `{}`: selection not ascending", t.task_id));
                }
                for &i in &s.selected {
                    if i >= size || !seen.insert(i) {
                        return bad(format!("task `{}`: bad row {i}", t.task_id));
                    }
                }
            }
        }
        if self.total_selected
            != self
                .tasks
                .iter()
                .map(|t| t.selected_count() as u64)
                .sum::<u64>()
        {
            return bad("total_selected disagrees with selections".into());
        }
        Ok(())
    }
}

/// Rounds to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig9(n.as_f64().unwrap_or(0.0));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(canonicalize).collect()),
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonicalize(v));
            }
            Value::Object(out)
        }
        other => other,
    }
}

/// Canonical JSON for any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("manifest types always serialize");
    let mut s = serde_json::to_string_pretty(&canonicalize(v)).expect("value serializes");
    s.push('\n');
    s
}
