//! Independent reference implementations used as test oracles. Nothing in
//! here calls into the incremental code paths it is used to check.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric matrix, unit diagonal, off-diagonal entries in [0, 1].
pub fn random_unit_kernel(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v: f64 = rng.random();
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Random PSD kernel: affine-rescaled cosine Gram matrix of random vectors.
pub fn random_psd_kernel(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let vs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        let c: f64 = vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum();
                        0.5 * (1.0 + c)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn random_subset(rng: &mut impl Rng, n: usize, max: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let k = rng.random_range(0..=max.min(n));
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

pub fn fl(k: &[Vec<f64>], x: &[usize]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    k.iter()
        .map(|row| x.iter().map(|&j| row[j]).fold(f64::MIN, f64::max))
        .sum()
}

pub fn gc(k: &[Vec<f64>], x: &[usize], lambda: f64) -> f64 {
    let mut cut = 0.0;
    for row in k {
        for &j in x {
            cut += row[j];
        }
    }
    let mut inner = 0.0;
    for &i in x {
        for &j in x {
            inner += k[i][j];
        }
    }
    cut - lambda * inner
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for cc in c..n {
                a[r][cc] -= f * a[c][cc];
            }
        }
    }
    d
}

pub fn logdet(k: &[Vec<f64>], x: &[usize], eps: f64) -> f64 {
    let sub: Vec<Vec<f64>> = x
        .iter()
        .map(|&i| {
            x.iter()
                .map(|&j| k[i][j] + if i == j { eps } else { 0.0 })
                .collect()
        })
        .collect();
    det(sub).ln()
}

#[derive(Clone, Copy, Debug)]
pub enum Oracle {
    Fl,
    Gc(f64),
    LogDet(f64),
}

impl Oracle {
    pub fn eval(self, k: &[Vec<f64>], x: &[usize]) -> f64 {
        match self {
            Oracle::Fl => fl(k, x),
            Oracle::Gc(l) => gc(k, x, l),
            Oracle::LogDet(e) => logdet(k, x, e),
        }
    }

    pub fn spec(self) -> submix_core::FunctionSpec {
        use submix_core::FunctionSpec::*;
        match self {
            Oracle::Fl => FacilityLocation,
            Oracle::Gc(lambda) => GraphCut { lambda },
            Oracle::LogDet(epsilon) => LogDeterminant { epsilon },
        }
    }

    /// Greedy with from-scratch evaluation of every marginal gain.
    pub fn greedy(self, k: &[Vec<f64>], budget: usize) -> Vec<usize> {
        let n = k.len();
        let mut x: Vec<usize> = Vec::new();
        for _ in 0..budget.min(n) {
            let base = self.eval(k, &x);
            let mut best: Option<(f64, usize)> = None;
            for v in (0..n).filter(|v| !x.contains(v)) {
                let mut y = x.clone();
                y.push(v);
                let g = self.eval(k, &y) - base;
                if best.is_none_or(|(bg, _)| g > bg + 1e-12) {
                    best = Some((g, v));
                }
            }
            x.push(best.unwrap().1);
        }
        x
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Cholesky rows of the K3 test kernel: unit vectors whose pairwise cosines
/// are exactly the kernel entries (up to rounding).
pub fn k3_vectors() -> Vec<Vec<f32>> {
    let k = [[1.0f64, 0.5, 0.2], [0.5, 1.0, 0.1], [0.2, 0.1, 1.0]];
    let mut l = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|m| l[i][m] * l[j][m]).sum();
            l[i][j] = if i == j {
                (k[i][i] - s).sqrt()
            } else {
                (k[i][j] - s) / l[j][j]
            };
        }
    }
    l.iter()
        .map(|r| r.iter().map(|&x| x as f32).collect())
        .collect()
}

pub const K3: [[f64; 3]; 3] = [[1.0, 0.5, 0.2], [0.5, 1.0, 0.1], [0.2, 0.1, 1.0]];

pub fn to_kernel(k: &[Vec<f64>]) -> submix_core::SimilarityKernel {
    submix_core::SimilarityKernel::from_rows(k).unwrap()
}

/// Task id, embedding rows, optional template tag per row.
pub type TaskRows<'a> = (&'a str, Vec<Vec<f32>>, Vec<Option<&'a str>>);

/// Writes a corpus from explicit embedding rows and optional template tags.
pub fn write_corpus(dir: &std::path::Path, tasks: &[TaskRows]) -> std::path::PathBuf {
    use std::io::Write;
    let mut entries = Vec::new();
    for (id, rows, tags) in tasks {
        let mut f = std::fs::File::create(dir.join(format!("{id}.jsonl"))).unwrap();
        for (j, _) in rows.iter().enumerate() {
            let mut rec = serde_json::json!({"prompt": format!("{id} {j}"), "response": "r"});
            if let Some(Some(t)) = tags.get(j) {
                rec["template"] = (*t).into();
            }
            writeln!(f, "{rec}").unwrap();
        }
        let m = submix_core::EmbeddingMatrix::from_rows(rows).unwrap();
        submix_core::formats::write_smeb(&m, dir.join(format!("{id}.smeb"))).unwrap();
        entries.push(serde_json::json!({
            "task_id": id,
            "prompts_path": format!("{id}.jsonl"),
            "embeddings_path": format!("{id}.smeb"),
            "instance_count": rows.len(),
        }));
    }
    let path = dir.join("manifest.json");
    std::fs::write(
        &path,
        serde_json::json!({"version": "1", "tasks": entries}).to_string(),
    )
    .unwrap();
    path
}
