//! Cardinality-constrained greedy maximization.
//!
//! Both [`naive_greedy`] and [`lazy_greedy`] break ties toward the smaller
//! index, so on functions with diminishing gains they return identical
//! selections and identical gain sequences, bit for bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::kernel::SimilarityKernel;
use crate::par;
use crate::submodular::{FunctionSpec, SubmodularFn};

/// Largest ground set [`brute_force_opt`] will enumerate.
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Greedy-ordered elements with the marginal gain recorded at each step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub gains: Vec<f64>,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// Sum of gains, i.e. `f` of the selected set.
    pub fn value(&self) -> f64 {
        self.gains.iter().sum()
    }
}

fn effective_budget(budget: usize, n: usize) -> usize {
    if budget > n {
        log::warn!("budget {budget} exceeds ground set size {n}; truncating");
    }
    budget.min(n)
}

fn is_better(gain: f64, index: usize, best: Option<(f64, usize)>) -> bool {
    match best {
        None => true,
        Some((g, i)) => gain > g || (gain == g && index < i),
    }
}

/// Plain greedy: every step scores all remaining candidates and commits the
/// best one (smallest index among equal gains).
pub fn naive_greedy(f: &mut SubmodularFn<'_>, budget: usize) -> Result<SelectionResult> {
    let n = f.n();
    let steps = effective_budget(budget, n);
    let mut out = SelectionResult::default();
    for _ in 0..steps {
        let scores = {
            let f = &*f;
            par::map_range(n, |v| (!f.is_selected(v)).then(|| f.gain_unchecked(v)))
        };
        let mut best: Option<(f64, usize)> = None;
        for (v, g) in scores.into_iter().enumerate() {
            if let Some(g) = g {
                if is_better(g, v, best) {
                    best = Some((g, v));
                }
            }
        }
        let (g, v) = best.expect("a candidate remains while steps <= n");
        f.commit(v)?;
        out.selected.push(v);
        out.gains.push(g);
    }
    Ok(out)
}

/// Heap entry: an upper bound on an element's gain, valid as of `epoch`.
#[derive(Debug, Clone, Copy)]
struct Bound {
    gain: f64,
    index: usize,
    epoch: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    // max-heap on gain, then on smaller index
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Accelerated (lazy) greedy. Stale gains are upper bounds under diminishing
/// returns, so only the heap top needs re-scoring until it is current.
pub fn lazy_greedy(f: &mut SubmodularFn<'_>, budget: usize) -> Result<SelectionResult> {
    let n = f.n();
    let steps = effective_budget(budget, n);
    let mut out = SelectionResult::default();
    if steps == 0 {
        return Ok(out);
    }
    let initial = {
        let f = &*f;
        par::map_range(n, |v| (!f.is_selected(v)).then(|| f.gain_unchecked(v)))
    };
    let mut heap: BinaryHeap<Bound> = initial
        .into_iter()
        .enumerate()
        .filter_map(|(index, g)| {
            g.map(|gain| Bound {
                gain,
                index,
                epoch: 0,
            })
        })
        .collect();
    for step in 0..steps {
        let chosen = loop {
            let mut top = heap.pop().expect("a candidate remains while steps <= n");
            if top.epoch == step {
                break top;
            }
            top.gain = f.gain_unchecked(top.index);
            top.epoch = step;
            heap.push(top);
        };
        f.commit(chosen.index)?;
        out.selected.push(chosen.index);
        out.gains.push(chosen.gain);
    }
    Ok(out)
}

/// Exhaustive search over all subsets of size at most `budget`.
///
/// Values come from [`FunctionSpec::evaluate`]; subsets whose Log Determinant
/// is undefined are skipped. Among equal values the lexicographically
/// smallest sorted index list wins.
pub fn brute_force_opt(
    spec: FunctionSpec,
    kernel: &SimilarityKernel,
    budget: usize,
) -> Result<(Vec<usize>, f64)> {
    let n = kernel.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::GroundSetTooLarge(n));
    }
    spec.validate()?;
    let budget = budget.min(n);
    let by_size = par::map_range(budget + 1, |k| best_of_size(spec, kernel, k));
    let mut best: Option<(Vec<usize>, f64)> = None;
    for candidate in by_size.into_iter().flatten() {
        best = Some(match best {
            None => candidate,
            Some(cur) => pick(cur, candidate),
        });
    }
    best.ok_or(Error::NotPositiveDefinite(0))
}

fn pick(a: (Vec<usize>, f64), b: (Vec<usize>, f64)) -> (Vec<usize>, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

fn best_of_size(
    spec: FunctionSpec,
    kernel: &SimilarityKernel,
    k: usize,
) -> Option<(Vec<usize>, f64)> {
    let n = kernel.n();
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        match spec.evaluate(kernel, &combo) {
            Ok(v) => {
                let cand = (combo.clone(), v);
                best = Some(match best {
                    None => cand,
                    Some(cur) => pick(cur, cand),
                });
            }
            Err(Error::NotPositiveDefinite(_)) => {}
            Err(e) => unreachable!("indices are in range: {e}"),
        }
        // next combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
            return best;
        };
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}
