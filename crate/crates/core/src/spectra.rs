//! Dense symmetric-matrix kernel.
//!
//! [`SymmetricMatrix`] stores the upper triangle (diagonal included) packed
//! row-major, so every `(i, j)` pair exists exactly once. Eigenvalues come
//! from cyclic Jacobi rotations; the condition number follows the convention
//! `kappa = lambda_1 / lambda_N`, infinite for singular matrices.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute tolerance used for unit-diagonal, range and PSD checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Jacobi stops once the off-diagonal Frobenius mass drops below this
/// fraction of the input's Frobenius norm.
pub const JACOBI_RELATIVE_OFF_NORM: f64 = 1e-12;

pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        Self {
            n,
            upper: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from `f(i, j)`, evaluated only for `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m.upper[k] = f(i, j);
                k += 1;
            }
        }
        m
    }

    /// Builds a matrix from full rows, rejecting asymmetric or non-finite input.
    ///
    /// Mirrored entries may differ by `sym_tol` (relative to the largest
    /// magnitude); the upper-triangle value is kept.
    pub fn try_from_rows(rows: &[Vec<f64>], sym_tol: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Parameter("matrix must have at least one row".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parameter(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = rows.iter().flatten().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (rows[i][j] - rows[j][i]).abs() > sym_tol * scale {
                    return Err(Error::Parameter(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        // row r starts after n + (n - 1) + ... + (n - r + 1) entries
        r * self.n - r * r.saturating_sub(1) / 2 + (c - r)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.upper[k] = value;
    }

    /// Packed upper triangle, row-major.
    pub fn packed(&self) -> &[f64] {
        &self.upper
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.get(i, j)).collect()
    }

    /// Full row-major copy of the matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                out[i * n + j] = self.upper[k];
                out[j * n + i] = self.upper[k];
                k += 1;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut diag = 0.0;
        let mut off = 0.0;
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.upper[k] * self.upper[k];
                if i == j {
                    diag += v;
                } else {
                    off += v;
                }
                k += 1;
            }
        }
        (diag + 2.0 * off).sqrt()
    }

    /// `self + c I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let v = out.get(i, i);
            out.set(i, i, v + c);
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            n: self.n,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        })
    }

    /// Largest `|self_ij - other_ij|` over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .upper
            .iter()
            .zip(&other.upper)
            .fold(0.0, |acc, (a, b)| f64::max(acc, (a - b).abs())))
    }

    /// Values `(i < j)` of the strict upper triangle, row-major.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| self.get(i, j)))
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

/// Eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Off-diagonal Frobenius mass left by Jacobi, relative to `||A||_F`.
    /// Each eigenvalue is accurate to this times `||A||_F`.
    pub residual_tolerance: f64,
}

impl Spectrum {
    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) struct Decomposition {
    /// Unsorted diagonal after convergence.
    pub values: Vec<f64>,
    /// Column `j` of the row-major `n x n` matrix is the vector for `values[j]`.
    pub vectors: Option<Vec<f64>>,
    pub relative_off_norm: f64,
}

/// Cyclic Jacobi on a dense working copy.
pub(crate) fn jacobi(m: &SymmetricMatrix, tol: f64, want_vectors: bool) -> Result<Decomposition> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.n();
    let mut a = m.to_dense();
    let mut v = want_vectors.then(|| {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        id
    });
    let norm = m.frobenius_norm();
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };
    let target = JACOBI_RELATIVE_OFF_NORM * norm;
    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            let residual = off / norm;
            if residual > tol {
                return Err(Error::NonConvergence { sweeps, residual });
            }
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }
    Ok(Decomposition {
        values: (0..n).map(|i| a[i * n + i]).collect(),
        vectors: v,
        relative_off_norm: if norm > 0.0 { off / norm } else { 0.0 },
    })
}

/// All eigenvalues of `m`, sorted descending.
///
/// Fails only if Jacobi leaves a relative off-diagonal mass above `tol` after
/// [`JACOBI_MAX_SWEEPS`] sweeps, or if `m` has non-finite entries.
pub fn eigenvalues(m: &SymmetricMatrix, tol: f64) -> Result<Spectrum> {
    let d = jacobi(m, tol, false)?;
    let mut values = d.values;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(Spectrum {
        values,
        residual_tolerance: d.relative_off_norm,
    })
}

/// Eigenvalues (descending) with unit eigenvectors; `vectors[j]` belongs to
/// `values[j]`.
pub fn eigenpairs(m: &SymmetricMatrix, tol: f64) -> Result<(Spectrum, Vec<Vec<f64>>)> {
    let d = jacobi(m, tol, true)?;
    let n = m.n();
    let v = d.vectors.expect("vectors were requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d.values[j].total_cmp(&d.values[i]));
    let values = order.iter().map(|&j| d.values[j]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|k| v[k * n + j]).collect())
        .collect();
    Ok((
        Spectrum {
            values,
            residual_tolerance: d.relative_off_norm,
        },
        vectors,
    ))
}

pub fn min_eigenvalue(m: &SymmetricMatrix, tol: f64) -> Result<f64> {
    Ok(eigenvalues(m, tol)?.smallest())
}

/// A Geršgorin interval `[center - radius, center + radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GershgorinInterval {
    pub center: f64,
    pub radius: f64,
}

impl GershgorinInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.radius
    }

    pub fn upper(&self) -> f64 {
        self.center + self.radius
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        (x - self.center).abs() <= self.radius + slack
    }
}

pub fn gershgorin_intervals(m: &SymmetricMatrix) -> Vec<GershgorinInterval> {
    let n = m.n();
    (0..n)
        .map(|i| GershgorinInterval {
            center: m.get(i, i),
            radius: (0..n).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum(),
        })
        .collect()
}

/// Lower-triangular Cholesky factor, packed row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower[i * (i + 1) / 2 + j]
        }
    }

    /// `L x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.lower[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
                row.iter().zip(x).map(|(l, v)| l * v).sum()
            })
            .collect()
    }

    /// `L L^T`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.n, |i, j| {
            let ri = &self.lower[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            let rj = &self.lower[j * (j + 1) / 2..j * (j + 1) / 2 + j + 1];
            ri.iter().zip(rj).map(|(a, b)| a * b).sum()
        })
    }
}

/// Cholesky factorisation `m = L L^T`.
///
/// Any pivot `<= tol` is reported as [`Error::NotPositiveDefinite`] with its
/// zero-based index. Pivots are bounded below by `lambda_N(m)`, so inputs
/// meeting `lambda_N(m) > tol` always factor.
pub fn cholesky(m: &SymmetricMatrix, tol: f64) -> Result<CholeskyFactor> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.n();
    let mut lower = vec![0.0; n * (n + 1) / 2];
    for i in 0..n {
        let ri = i * (i + 1) / 2;
        for j in 0..=i {
            let rj = j * (j + 1) / 2;
            let dot: f64 = (0..j).map(|k| lower[ri + k] * lower[rj + k]).sum();
            let value = m.get(i, j) - dot;
            if i == j {
                if !(value > tol) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value });
                }
                lower[ri + i] = value.sqrt();
            } else {
                lower[ri + j] = value / lower[rj + j];
            }
        }
    }
    Ok(CholeskyFactor { n, lower })
}

fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

/// Outcome of [`validate_correlation`]; failures are carried, not raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub unit_diagonal: bool,
    pub entries_in_range: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub positive_semidefinite: bool,
    /// `lambda_1 / lambda_N`, or infinity when `lambda_N <= tol`.
    #[serde(serialize_with = "serialize_extended")]
    pub condition_number: f64,
}

impl ValidityReport {
    /// Unit diagonal, entries in `[-1, 1]` and positive semidefinite.
    pub fn is_valid(&self) -> bool {
        self.unit_diagonal && self.entries_in_range && self.positive_semidefinite
    }

    pub fn is_positive_definite(&self) -> bool {
        self.is_valid() && self.condition_number.is_finite()
    }
}

pub fn validate_correlation(m: &SymmetricMatrix, tol: f64) -> ValidityReport {
    let n = m.n();
    let unit_diagonal = (0..n).all(|i| (m.get(i, i) - 1.0).abs() <= tol);
    let entries_in_range = m.packed().iter().all(|v| v.abs() <= 1.0 + tol);
    let (min_eigenvalue, max_eigenvalue) = match eigenvalues(m, tol) {
        Ok(s) => (s.smallest(), s.largest()),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let positive_semidefinite = min_eigenvalue >= -tol;
    let condition_number = if min_eigenvalue > tol {
        max_eigenvalue / min_eigenvalue
    } else {
        f64::INFINITY
    };
    ValidityReport {
        unit_diagonal,
        entries_in_range,
        min_eigenvalue,
        max_eigenvalue,
        positive_semidefinite,
        condition_number,
    }
}
