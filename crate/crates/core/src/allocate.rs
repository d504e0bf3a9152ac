//! Turning greedy gains into integer instance budgets.
//!
//! Every split here goes through [`apportion`] (largest remainder, ties to
//! the earlier position) and, when capacities bind, [`waterfill`]: capped
//! entries are pinned at capacity and the rest of the total is re-apportioned
//! over the uncapped entries by weight until nothing exceeds its capacity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Second-order Taylor expansion of `exp(g)`. Never below 0.5 (at `g = -1`).
pub fn taylor_weight(gain: f64) -> f64 {
    1.0 + gain + 0.5 * gain * gain
}

/// Largest-remainder split of `total` proportional to `weights`.
///
/// Weights must be finite, non-negative and not all zero.
pub fn apportion(weights: &[f64], total: u64) -> Vec<u64> {
    if weights.is_empty() {
        return Vec::new();
    }
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64 / sum).collect();
    let mut out: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let rems: Vec<f64> = quotas
        .iter()
        .zip(&out)
        .map(|(q, &f)| q - f as f64)
        .collect();
    let assigned: u64 = out.iter().sum();

    let mut order: Vec<usize> = (0..weights.len()).collect();
    if assigned <= total {
        // largest remainder first, earlier position on ties
        order.sort_by(|&a, &b| rems[b].total_cmp(&rems[a]).then(a.cmp(&b)));
        let mut left = total - assigned;
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            out[i] += 1;
            left -= 1;
        }
    } else {
        // floor overshoot from rounding in the quotas; take back from the
        // smallest remainders
        order.sort_by(|&a, &b| rems[a].total_cmp(&rems[b]).then(b.cmp(&a)));
        let mut extra = assigned - total;
        for &i in order.iter().cycle() {
            if extra == 0 {
                break;
            }
            if out[i] > 0 {
                out[i] -= 1;
                extra -= 1;
            }
        }
    }
    out
}

/// Apportions `total` by `weights` subject to per-entry `caps`.
pub fn waterfill(weights: &[f64], total: u64, caps: &[u64]) -> Result<Vec<u64>> {
    assert_eq!(weights.len(), caps.len());
    let available: u64 = caps.iter().sum();
    if total > available {
        return Err(Error::CapacityExceeded {
            requested: total,
            available,
        });
    }
    let m = weights.len();
    let mut pinned = vec![false; m];
    let mut out = vec![0u64; m];
    loop {
        let free: Vec<usize> = (0..m).filter(|&i| !pinned[i]).collect();
        let pinned_total: u64 = (0..m).filter(|&i| pinned[i]).map(|i| caps[i]).sum();
        let remaining = total - pinned_total;
        let free_weights: Vec<f64> = free.iter().map(|&i| weights[i]).collect();
        let shares = apportion(&free_weights, remaining);
        let mut overflow = false;
        for (&i, &s) in free.iter().zip(&shares) {
            if s > caps[i] {
                pinned[i] = true;
                out[i] = caps[i];
                overflow = true;
            } else {
                out[i] = s;
            }
        }
        if !overflow {
            return Ok(out);
        }
    }
}

/// Weight and budget derived from one greedy gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub gain: f64,
    pub weight: f64,
    pub budget: u64,
}

/// Taylor-softmax shares of `total`, rounded by largest remainder.
pub fn taylor_softmax_allocate(gains: &[f64], total: u64) -> Result<Vec<Allocation>> {
    if gains.is_empty() {
        return Err(Error::InvalidConfig("no gains to allocate".into()));
    }
    let weights: Vec<f64> = gains.iter().map(|&g| taylor_weight(g)).collect();
    if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
        return Err(Error::NonFiniteGain(i));
    }
    let budgets = apportion(&weights, total);
    Ok(gains
        .iter()
        .zip(weights)
        .zip(budgets)
        .map(|((&gain, weight), budget)| Allocation {
            gain,
            weight,
            budget,
        })
        .collect())
}

/// Caps budgets at `capacities`, moving the excess to uncapped entries in
/// proportion to their weights. A plan already within capacity is returned
/// unchanged.
pub fn redistribute_overflow(plan: &[Allocation], capacities: &[u64]) -> Result<Vec<Allocation>> {
    if plan.len() != capacities.len() {
        return Err(Error::DimensionMismatch {
            left: plan.len(),
            right: capacities.len(),
        });
    }
    let total: u64 = plan.iter().map(|a| a.budget).sum();
    let available: u64 = capacities.iter().sum();
    if total > available {
        return Err(Error::CapacityExceeded {
            requested: total,
            available,
        });
    }
    if plan.iter().zip(capacities).all(|(a, &c)| a.budget <= c) {
        return Ok(plan.to_vec());
    }
    let weights: Vec<f64> = plan.iter().map(|a| a.weight).collect();
    let budgets = waterfill(&weights, total, capacities)?;
    Ok(plan
        .iter()
        .zip(budgets)
        .map(|(a, budget)| Allocation { budget, ..*a })
        .collect())
}

/// Equal split of `budget` over templates (given in canonical order with
/// their capacities); remainders go to the first templates and any template
/// that runs out passes its shortfall to the others.
pub fn split_among_templates(budget: u64, capacities: &[u64]) -> Result<Vec<u64>> {
    if capacities.is_empty() && budget > 0 {
        return Err(Error::CapacityExceeded {
            requested: budget,
            available: 0,
        });
    }
    waterfill(&vec![1.0; capacities.len()], budget, capacities)
}

/// Equal split of `total` across entries with the given capacities.
pub fn equal_split(total: u64, capacities: &[u64]) -> Result<Vec<u64>> {
    split_among_templates(total, capacities)
}
