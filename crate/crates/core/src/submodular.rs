//! Facility Location, Graph Cut and Log Determinant set functions with
//! incremental state.
//!
//! A [`SubmodularFn`] tracks a selected set `X` and caches just enough to
//! answer `gain(v) = f(X ∪ {v}) - f(X)` without recomputing `f`:
//!
//! * Facility Location keeps, for every ground element, its best similarity
//!   to `X`. A gain query is `O(n)`.
//! * Graph Cut keeps the kernel row sums and, per element, `Σ_{j∈X} s_jv`.
//!   A gain query is `O(1)`; a commit is `O(n)`.
//! * Log Determinant keeps the lower Cholesky factor of `S_X + εI`. A gain
//!   query solves one triangular system, `O(|X|²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SimilarityKernel;

pub const DEFAULT_LAMBDA: f64 = 0.4;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Which set function to optimize, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FunctionSpec {
    #[serde(rename = "fl")]
    FacilityLocation,
    #[serde(rename = "gc")]
    GraphCut { lambda: f64 },
    #[serde(rename = "logdet")]
    LogDeterminant { epsilon: f64 },
}

impl FunctionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctionSpec::GraphCut { lambda } if !(lambda >= 0.0 && lambda.is_finite()) => Err(
                Error::InvalidConfig(format!("graph cut lambda must be >= 0, got {lambda}")),
            ),
            FunctionSpec::LogDeterminant { epsilon }
                if !(epsilon >= 0.0 && epsilon.is_finite()) =>
            {
                Err(Error::InvalidConfig(format!(
                    "log-det epsilon must be >= 0, got {epsilon}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `f(X)` computed directly from the definition.
    pub fn evaluate(&self, kernel: &SimilarityKernel, subset: &[usize]) -> Result<f64> {
        let n = kernel.n();
        if let Some(&bad) = subset.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        match *self {
            FunctionSpec::FacilityLocation => {
                if subset.is_empty() {
                    return Ok(0.0);
                }
                Ok((0..n)
                    .map(|i| {
                        subset
                            .iter()
                            .map(|&j| kernel.get(i, j))
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .sum())
            }
            FunctionSpec::GraphCut { lambda } => {
                let cut: f64 = (0..n)
                    .flat_map(|i| subset.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| kernel.get(i, j))
                    .sum();
                let inner: f64 = subset
                    .iter()
                    .flat_map(|&i| subset.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| kernel.get(i, j))
                    .sum();
                Ok(cut - lambda * inner)
            }
            FunctionSpec::LogDeterminant { .. } => {
                let mut f = SubmodularFn::new(*self, kernel)?;
                for &v in subset {
                    f.commit(v)?;
                }
                Ok(f.value())
            }
        }
    }
}

#[derive(Debug, Clone)]
enum State {
    FacilityLocation {
        /// `max_{j∈X} s_ij`; meaningless while `X` is empty.
        best: Vec<f64>,
    },
    GraphCut {
        lambda: f64,
        row_sums: Vec<f64>,
        /// `Σ_{j∈X} s_jv` per element.
        to_selected: Vec<f64>,
    },
    LogDeterminant {
        epsilon: f64,
        /// Row `k` of the lower Cholesky factor of `S_X + εI`, length `k + 1`.
        chol: Vec<Vec<f64>>,
    },
}

/// Set function over a kernel's ground set, with a mutable selection.
///
/// Gain queries take `&self` and may run concurrently; [`commit`] needs
/// exclusive access.
///
/// [`commit`]: SubmodularFn::commit
#[derive(Debug, Clone)]
pub struct SubmodularFn<'k> {
    spec: FunctionSpec,
    kernel: &'k SimilarityKernel,
    selected: Vec<usize>,
    in_set: Vec<bool>,
    value: f64,
    state: State,
}

impl<'k> SubmodularFn<'k> {
    pub fn new(spec: FunctionSpec, kernel: &'k SimilarityKernel) -> Result<Self> {
        spec.validate()?;
        let n = kernel.n();
        let state = match spec {
            FunctionSpec::FacilityLocation => State::FacilityLocation { best: vec![0.0; n] },
            FunctionSpec::GraphCut { lambda } => State::GraphCut {
                lambda,
                row_sums: (0..n).map(|i| kernel.row(i).iter().sum()).collect(),
                to_selected: vec![0.0; n],
            },
            FunctionSpec::LogDeterminant { epsilon } => State::LogDeterminant {
                epsilon,
                chol: Vec::new(),
            },
        };
        Ok(Self {
            spec,
            kernel,
            selected: Vec::new(),
            in_set: vec![false; n],
            value: 0.0,
            state,
        })
    }

    pub fn spec(&self) -> FunctionSpec {
        self.spec
    }

    pub fn kernel(&self) -> &'k SimilarityKernel {
        self.kernel
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    /// Selected elements in commit order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn is_selected(&self, v: usize) -> bool {
        self.in_set.get(v).copied().unwrap_or(false)
    }

    /// `f(X)` for the current selection, maintained incrementally.
    pub fn value(&self) -> f64 {
        self.value
    }

    fn check_candidate(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: v,
                n: self.n(),
            });
        }
        if self.in_set[v] {
            return Err(Error::AlreadySelected(v));
        }
        Ok(())
    }

    /// Solves `L z = s_{X,v}` by forward substitution.
    fn cholesky_column(&self, chol: &[Vec<f64>], v: usize) -> Vec<f64> {
        let mut z = Vec::with_capacity(chol.len());
        for (k, row) in chol.iter().enumerate() {
            let partial: f64 = row[..k].iter().zip(&z).map(|(l, zj)| l * zj).sum();
            z.push((self.kernel.get(self.selected[k], v) - partial) / row[k]);
        }
        z
    }

    fn schur_complement(&self, epsilon: f64, chol: &[Vec<f64>], v: usize) -> (Vec<f64>, f64) {
        let z = self.cholesky_column(chol, v);
        let zz: f64 = z.iter().map(|x| x * x).sum();
        (z, self.kernel.get(v, v) + epsilon - zz)
    }

    /// Marginal gain `f(X ∪ {v}) - f(X)`.
    ///
    /// For Log Determinant a non-positive Schur complement yields `-inf`.
    pub fn gain(&self, v: usize) -> Result<f64> {
        self.check_candidate(v)?;
        Ok(self.gain_unchecked(v))
    }

    pub(crate) fn gain_unchecked(&self, v: usize) -> f64 {
        match &self.state {
            State::FacilityLocation { best } => {
                let col = self.kernel.row(v);
                if self.selected.is_empty() {
                    col.iter().sum()
                } else {
                    col.iter().zip(best).map(|(s, b)| (s - b).max(0.0)).sum()
                }
            }
            State::GraphCut {
                lambda,
                row_sums,
                to_selected,
            } => row_sums[v] - lambda * (2.0 * to_selected[v] + self.kernel.get(v, v)),
            State::LogDeterminant { epsilon, chol } => {
                let (_, schur) = self.schur_complement(*epsilon, chol, v);
                if schur > 0.0 {
                    schur.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Adds `v` to the selection and updates the caches.
    pub fn commit(&mut self, v: usize) -> Result<()> {
        self.check_candidate(v)?;
        let col = self.kernel.row(v);
        let first = self.selected.is_empty();
        let chol_row = match &self.state {
            State::LogDeterminant { epsilon, chol } => {
                let (mut z, schur) = self.schur_complement(*epsilon, chol, v);
                if schur.is_nan() || schur <= 0.0 {
                    return Err(Error::NotPositiveDefinite(v));
                }
                z.push(schur.sqrt());
                Some((z, schur.ln()))
            }
            _ => None,
        };
        let cut_gain = match &self.state {
            State::GraphCut { .. } => self.gain_unchecked(v),
            _ => 0.0,
        };
        match &mut self.state {
            State::FacilityLocation { best } => {
                if first {
                    best.copy_from_slice(col);
                } else {
                    for (b, &s) in best.iter_mut().zip(col) {
                        *b = b.max(s);
                    }
                }
                self.value = best.iter().sum();
            }
            State::GraphCut { to_selected, .. } => {
                for (acc, &s) in to_selected.iter_mut().zip(col) {
                    *acc += s;
                }
                self.value += cut_gain;
            }
            State::LogDeterminant { chol, .. } => {
                let (row, gain) = chol_row.expect("computed above");
                chol.push(row);
                self.value += gain;
            }
        }
        self.selected.push(v);
        self.in_set[v] = true;
        Ok(())
    }
}
