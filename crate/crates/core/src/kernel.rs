//! Mean task embeddings and cosine-similarity kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::EmbeddingMatrix;
use crate::par;

/// Post-processing applied to raw cosine values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelTransform {
    /// `max(0, c)`
    #[default]
    Clamp,
    /// `(1 + c) / 2`
    #[serde(rename = "affine")]
    AffineRescale,
    Identity,
}

impl KernelTransform {
    pub fn apply(self, c: f64) -> f64 {
        match self {
            KernelTransform::Clamp => c.max(0.0),
            KernelTransform::AffineRescale => 0.5 * (1.0 + c),
            KernelTransform::Identity => c,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub transform: KernelTransform,
}

/// Dense symmetric similarity matrix over a ground set `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityKernel {
    n: usize,
    values: Vec<f64>,
    transform: KernelTransform,
}

impl SimilarityKernel {
    /// Wraps a precomputed row-major matrix. Fails unless it is square and
    /// symmetric within 1e-12.
    pub fn from_values(n: usize, values: Vec<f64>, transform: KernelTransform) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: values.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 {
                    return Err(Error::InvalidConfig(format!(
                        "kernel not symmetric/finite at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            values,
            transform,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        Self::from_values(n, rows.concat(), KernelTransform::Identity)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn transform(&self) -> KernelTransform {
        self.transform
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
            transform: self.transform,
        }
    }

    /// The submatrix on `indices`, in that order.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let values = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self {
            n: indices.len(),
            values,
            transform: self.transform,
        }
    }
}

/// Row mean accumulated in `f64`.
pub fn mean_embedding(matrix: &EmbeddingMatrix) -> Result<Vec<f64>> {
    if matrix.n_rows() == 0 {
        return Err(Error::EmptyTask);
    }
    let mut acc = vec![0.0f64; matrix.dim()];
    for row in matrix.rows() {
        for (a, &x) in acc.iter_mut().zip(row) {
            *a += f64::from(x);
        }
    }
    let n = matrix.n_rows() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Cosine similarity, clamped into `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let nu = dot(u, u).sqrt();
    if nu == 0.0 {
        return Err(Error::ZeroNormVector(0));
    }
    let nv = dot(v, v).sqrt();
    if nv == 0.0 {
        return Err(Error::ZeroNormVector(1));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Kernel with entry `(i, j) = transform(cosine(row_i, row_j))`.
///
/// Rows are computed independently (in parallel when enabled); each dot
/// product sums in index order, so the result is identical either way and
/// exactly symmetric. Diagonal entries are `transform(1)`.
pub fn build_kernel(rows: &[Vec<f64>], config: &KernelConfig) -> Result<SimilarityKernel> {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: bad.len(),
        });
    }
    let norms: Vec<f64> = rows.iter().map(|r| dot(r, r).sqrt()).collect();
    if let Some(i) = norms.iter().position(|&x| x == 0.0 || !x.is_finite()) {
        return Err(Error::ZeroNormVector(i));
    }
    let t = config.transform;
    let diag = t.apply(1.0);
    let blocks = par::map_range(n, |i| {
        (0..n)
            .map(|j| {
                if i == j {
                    diag
                } else {
                    t.apply((dot(&rows[i], &rows[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0))
                }
            })
            .collect::<Vec<f64>>()
    });
    Ok(SimilarityKernel {
        n,
        values: blocks.concat(),
        transform: t,
    })
}

/// [`build_kernel`] over the rows of an embedding matrix.
pub fn build_kernel_from_matrix(
    matrix: &EmbeddingMatrix,
    config: &KernelConfig,
) -> Result<SimilarityKernel> {
    let rows: Vec<Vec<f64>> = matrix
        .rows()
        .map(|r| r.iter().map(|&x| f64::from(x)).collect())
        .collect();
    build_kernel(&rows, config)
}
