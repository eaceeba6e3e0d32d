//! PAM clustering of generated correlation matrices.
//!
//! Each replicate matrix is turned into dissimilarities `1 - s_ij`, clustered
//! with PAM for every `k` up to `k_max`, the `k` with the largest average
//! silhouette width is kept, and the partition is scored against the truth
//! with the adjusted Rand index.

mod iris;
mod metrics;
mod pam;
mod scenario;

pub use iris::{iris_scenario, IrisData, IRIS_CSV, IRIS_SHA256};
pub use metrics::{adjusted_rand, choose_k, median, silhouette_width};
pub use pam::{pam, PamFit};
pub use scenario::{
    htc_scenario, run_matrix_scenario, run_scenario, ReplicateOutcome, ScenarioPreset, ScenarioResult,
    DEFAULT_K_MAX, HTC_NAMES,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::SymmetricMatrix;

/// Dense symmetric dissimilarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Builds from full rows; rejects asymmetric, negative or nonzero-diagonal input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut d = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { left: row.len(), right: n });
            }
            d.extend_from_slice(row);
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::Parameter(format!("d[{i}][{i}] must be zero")));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !(v >= 0.0) || !v.is_finite() || v != d[j * n + i] {
                    return Err(Error::Parameter(format!(
                        "d[{i}][{j}] = {v} breaks symmetry or nonnegativity"
                    )));
                }
            }
        }
        Ok(Self { n, d })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i.min(j), i.max(j)) }).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }
}

/// `d_ij = 1 - s_ij` clamped to `[0, 2]`, zero diagonal.
pub fn correlation_to_dissimilarity(s: &SymmetricMatrix) -> DissimilarityMatrix {
    let n = s.n();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = (1.0 - s.get(i, j)).clamp(0.0, 2.0);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    DissimilarityMatrix { n, d }
}

/// Cluster labels `1..=k`, every label used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().copied().max().unwrap_or(0);
        if k == 0 || labels.contains(&0) {
            return Err(Error::Parameter("partition labels must start at 1".into()));
        }
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l - 1] = true);
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::Parameter(format!("cluster {} is empty", missing + 1)));
        }
        Ok(Self { labels, k })
    }

    /// Relabels arbitrary labels to `1..=k` in order of first appearance.
    pub fn from_raw<T: PartialEq + Clone>(raw: &[T]) -> Result<Self> {
        let mut seen: Vec<T> = Vec::new();
        let labels = raw
            .iter()
            .map(|x| match seen.iter().position(|s| s == x) {
                Some(p) => p + 1,
                None => {
                    seen.push(x.clone());
                    seen.len()
                }
            })
            .collect();
        Self::new(labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        self.labels.iter().for_each(|&l| s[l - 1] += 1);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dissimilarity_transform() {
        let s = SymmetricMatrix::try_from_rows(
            &[vec![1.0, 1.0, 0.0], vec![1.0, 1.0, -0.5], vec![0.0, -0.5, 1.0]],
            0.0,
        )
        .unwrap();
        let d = correlation_to_dissimilarity(&s);
        assert_eq!(d.get(0, 1), 0.0);
        assert_eq!(d.get(0, 2), 1.0);
        assert_eq!(d.get(2, 1), 1.5);
        assert_eq!(d.get(1, 1), 0.0);
        let mut wild = SymmetricMatrix::identity(2);
        wild.set(0, 1, 1.03);
        assert_eq!(correlation_to_dissimilarity(&wild).get(0, 1), 0.0);
    }

    #[test]
    fn partition_rules() {
        assert!(Partition::new(vec![1, 2, 2]).is_ok());
        assert!(Partition::new(vec![1, 3]).is_err());
        assert!(Partition::new(vec![0, 1]).is_err());
        assert!(Partition::new(vec![]).is_err());
        let p = Partition::from_raw(&["b", "a", "b", "c"]).unwrap();
        assert_eq!(p.labels(), [1, 2, 1, 3]);
        assert_eq!(p.sizes(), [2, 1, 1]);
    }

    #[test]
    fn dissimilarity_checks() {
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
    }
}
