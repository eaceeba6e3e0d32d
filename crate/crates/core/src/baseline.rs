//! Gaussian sample-correlation baseline and difference statistics.
//!
//! The baseline draws `n` Gaussian vectors with covariance `Sigma` and
//! returns their sample correlation matrix, which is singular whenever
//! `n <= N`. [`diff_summary`] and [`spectrum_compare`] put it side by side
//! with matrices from the noise recipes.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, Recipe};
use crate::rng::stream_rng;
use crate::spectra::{cholesky, eigenvalues, Spectrum, SymmetricMatrix, DEFAULT_TOLERANCE};
use crate::templates::CorrelationTemplate;

pub const DEFAULT_BINS: usize = 81;
pub const DEFAULT_RANGE: (f64, f64) = (-0.4, 0.4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GaussianSampleSpec {
    pub sample_size: usize,
    pub seed: u64,
    pub stream: u64,
}

impl GaussianSampleSpec {
    pub fn new(sample_size: usize, seed: u64) -> Result<Self> {
        if sample_size < 2 {
            return Err(Error::Parameter(format!(
                "sample size {sample_size} must be at least 2"
            )));
        }
        Ok(Self {
            sample_size,
            seed,
            stream: 0,
        })
    }

    pub fn for_replicate(mut self, r: u64) -> Self {
        self.stream = r;
        self
    }
}

/// Pearson correlation of `sample_size` draws from `N(0, sigma)`.
///
/// Means are subtracted per variable; the `n` versus `n - 1` denominator
/// cancels in the ratio. A variable with zero sample variance (possible only
/// in degenerate draws) gets zero correlation with everything else.
pub fn gaussian_sample_correlation(
    sigma: &SymmetricMatrix,
    spec: &GaussianSampleSpec,
) -> Result<SymmetricMatrix> {
    if spec.sample_size < 2 {
        return Err(Error::Parameter(format!(
            "sample size {} must be at least 2",
            spec.sample_size
        )));
    }
    let l = cholesky(sigma, 0.0)?;
    let n_var = sigma.n();
    let n_obs = spec.sample_size;
    let mut rng = stream_rng(spec.seed, spec.stream);

    // column-major by variable so each variable's observations are contiguous
    let mut x = vec![0.0; n_var * n_obs];
    let mut z = vec![0.0; n_var];
    for obs in 0..n_obs {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        for (var, value) in l.mul_vec(&z).into_iter().enumerate() {
            x[var * n_obs + obs] = value;
        }
    }
    let mut scale = vec![0.0; n_var];
    for var in 0..n_var {
        let col = &mut x[var * n_obs..(var + 1) * n_obs];
        let mean = col.iter().sum::<f64>() / n_obs as f64;
        col.iter_mut().for_each(|v| *v -= mean);
        let ss = col.iter().map(|v| v * v).sum::<f64>();
        scale[var] = if ss > 0.0 { 1.0 / ss.sqrt() } else { 0.0 };
    }
    Ok(SymmetricMatrix::from_fn(n_var, |i, j| {
        if i == j {
            return 1.0;
        }
        let a = &x[i * n_obs..(i + 1) * n_obs];
        let b = &x[j * n_obs..(j + 1) * n_obs];
        let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
        (dot * scale[i] * scale[j]).clamp(-1.0, 1.0)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
}

/// Statistics of the strict-upper-triangle differences `generated - template`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffSummary {
    pub histogram: Vec<HistogramBin>,
    pub mean: f64,
    /// Population standard deviation of the differences.
    pub sd: f64,
    pub max_abs: f64,
    pub n_offdiag: usize,
}

/// Fixed-width histogram of differences over `range`, or over
/// `[-max_abs, max_abs]` when `range` is `None` (`[-1, 1]` if all differences
/// are zero). Values outside the range are counted in the edge bins so the
/// counts always sum to `n_offdiag`.
pub fn diff_summary(
    generated: &SymmetricMatrix,
    template: &SymmetricMatrix,
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<DiffSummary> {
    summarize_differences(&differences(generated, template)?, bins, range)
}

/// Strict-upper-triangle differences `generated - template`, row by row.
pub fn differences(generated: &SymmetricMatrix, template: &SymmetricMatrix) -> Result<Vec<f64>> {
    if generated.n() != template.n() {
        return Err(Error::DimensionMismatch {
            left: generated.n(),
            right: template.n(),
        });
    }
    Ok(generated
        .off_diagonal()
        .zip(template.off_diagonal())
        .map(|(g, t)| g - t)
        .collect())
}

/// [`diff_summary`] over an explicit list of differences, e.g. several
/// replicates pooled together.
pub fn summarize_differences(
    diffs: &[f64],
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<DiffSummary> {
    if bins == 0 {
        return Err(Error::Parameter("histogram needs at least one bin".into()));
    }
    let count = diffs.len();
    let mean = if count == 0 { 0.0 } else { diffs.iter().sum::<f64>() / count as f64 };
    let var = if count == 0 {
        0.0
    } else {
        diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / count as f64
    };
    let max_abs = diffs.iter().fold(0.0_f64, |m, d| m.max(d.abs()));

    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Parameter(format!("histogram range [{lo}, {hi}] is empty")));
            }
            (lo, hi)
        }
        None if max_abs > 0.0 => (-max_abs, max_abs),
        None => (-1.0, 1.0),
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for d in diffs {
        let k = ((d - lo) / width).floor();
        let k = if k < 0.0 { 0 } else { (k as usize).min(bins - 1) };
        counts[k] += 1;
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            bin_left: lo + k as f64 * width,
            bin_right: lo + (k + 1) as f64 * width,
            count,
        })
        .collect();
    Ok(DiffSummary {
        histogram,
        mean,
        sd: var.sqrt(),
        max_abs,
        n_offdiag: count,
    })
}

/// Root-mean variance of several equally sized summaries.
pub fn pooled_sd(summaries: &[DiffSummary]) -> f64 {
    if summaries.is_empty() {
        return f64::NAN;
    }
    (summaries.iter().map(|s| s.sd * s.sd).sum::<f64>() / summaries.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumComparison {
    pub a: Spectrum,
    pub b: Spectrum,
    pub max_gap: f64,
}

/// Both spectra (descending) and the largest gap between matching eigenvalues.
pub fn spectrum_compare(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<SpectrumComparison> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let sa = eigenvalues(a, DEFAULT_TOLERANCE)?;
    let sb = eigenvalues(b, DEFAULT_TOLERANCE)?;
    let max_gap = sa
        .values
        .iter()
        .zip(&sb.values)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(SpectrumComparison { a: sa, b: sb, max_gap })
}

/// One arm of the method-versus-Gaussian comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComparisonArm {
    /// Noise recipe with unit vectors in `R^dim`.
    Method { label: String, dim: usize, epsilon: f64 },
    /// Sample correlation of `sample_size` Gaussian vectors.
    Gaussian { label: String, sample_size: usize },
}

impl ComparisonArm {
    pub fn label(&self) -> &str {
        match self {
            ComparisonArm::Method { label, .. } | ComparisonArm::Gaussian { label, .. } => label,
        }
    }

    /// Replicate `r` of this arm. Every arm and replicate gets its own stream
    /// of `seed`, so arms are independent and adding an arm changes nothing
    /// for the others.
    pub fn draw(
        &self,
        template: &CorrelationTemplate,
        arm_index: u64,
        seed: u64,
        r: u64,
    ) -> Result<SymmetricMatrix> {
        let stream = (arm_index << 32) | r;
        match *self {
            ComparisonArm::Method { dim, epsilon, .. } => {
                let spec = NoiseSpec::new(epsilon, dim)?.with_seed(seed).for_replicate(stream);
                Recipe::for_template(template)?.draw(&spec)
            }
            ComparisonArm::Gaussian { sample_size, .. } => {
                let sigma = crate::templates::build_template(template)?;
                let spec = GaussianSampleSpec::new(sample_size, seed)?.for_replicate(stream);
                gaussian_sample_correlation(&sigma, &spec)
            }
        }
    }
}

/// The three-group constant-correlation template of the comparison study:
/// sizes (100, 50, 80), within-group correlations (0.7, 0.7, 0.4), `delta = 0.25`.
pub fn comparison_template() -> CorrelationTemplate {
    CorrelationTemplate::constant(&[(100, 0.7), (50, 0.7), (80, 0.4)], 0.25)
        .expect("preset template is valid")
}

/// Arms S2, S3, S25 (`eps = 0.29`) and Gauss25, Gauss250, Gauss1000.
pub fn comparison_arms() -> Vec<ComparisonArm> {
    let mut arms: Vec<ComparisonArm> = [2, 3, 25]
        .into_iter()
        .map(|dim| ComparisonArm::Method {
            label: format!("S{dim}"),
            dim,
            epsilon: 0.29,
        })
        .collect();
    arms.extend([25, 250, 1000].into_iter().map(|n| ComparisonArm::Gaussian {
        label: format!("Gauss{n}"),
        sample_size: n,
    }));
    arms
}
