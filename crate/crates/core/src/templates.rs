//! Template correlation matrices and their analytic spectral certificates.
//!
//! A [`CorrelationTemplate`] is a block-diagonal assembly of groups that all
//! share one [`StructureKind`]:
//!
//! - constant correlation: `1` on the diagonal, `rho_k` elsewhere in the block,
//!   and a common between-group value `delta`;
//! - Toeplitz: `rho_k^{|i-j|}` inside the block, zero between blocks;
//! - hub-Toeplitz: a Toeplitz block whose first row decays from `rho_k` in
//!   steps of `tau_k` (or along a power curve when `gamma != 1`), zero between
//!   blocks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::SymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    ConstantCorrelation,
    Toeplitz,
    HubToeplitz,
}

/// One diagonal block of a template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupSpec {
    pub kind: StructureKind,
    pub size: usize,
    /// Baseline correlation, Toeplitz factor or maximum hub correlation.
    pub rho: f64,
    /// Hub step size; zero for the other kinds.
    pub tau: f64,
    /// Hub decay exponent; `1` is linear decay.
    pub gamma: f64,
}

impl GroupSpec {
    pub fn constant(size: usize, rho: f64) -> Self {
        Self {
            kind: StructureKind::ConstantCorrelation,
            size,
            rho,
            tau: 0.0,
            gamma: 1.0,
        }
    }

    pub fn toeplitz(size: usize, rho: f64) -> Self {
        Self {
            kind: StructureKind::Toeplitz,
            size,
            rho,
            tau: 0.0,
            gamma: 1.0,
        }
    }

    /// Linear hub decay `rho, rho - tau, rho - 2 tau, ...`.
    pub fn hub(size: usize, rho: f64, tau: f64) -> Self {
        Self {
            kind: StructureKind::HubToeplitz,
            size,
            rho,
            tau,
            gamma: 1.0,
        }
    }

    /// Hub decay from `rho_max` (lag 1) down to `rho_min` (lag `size - 1`)
    /// along `((i - 2) / (g - 2))^gamma`.
    pub fn hub_range(size: usize, rho_max: f64, rho_min: f64, gamma: f64) -> Self {
        let tau = if size > 2 {
            (rho_max - rho_min) / (size - 2) as f64
        } else {
            0.0
        };
        Self {
            kind: StructureKind::HubToeplitz,
            size,
            rho: rho_max,
            tau,
            gamma,
        }
    }

    /// Smallest first-row correlation of a hub group, `rho - tau (g - 2)`.
    pub fn hub_rho_min(&self) -> f64 {
        self.rho - self.tau * self.size.saturating_sub(2) as f64
    }

    /// Correlation at lag `d` for `d = 0..size`.
    pub fn lag_profile(&self) -> Result<Vec<f64>> {
        let g = self.size;
        let mut row = Vec::with_capacity(g);
        match self.kind {
            StructureKind::ConstantCorrelation => {
                row.push(1.0);
                row.extend(std::iter::repeat_n(self.rho, g - 1));
            }
            StructureKind::Toeplitz => {
                let mut p = 1.0;
                for _ in 0..g {
                    row.push(p);
                    p *= self.rho;
                }
            }
            StructureKind::HubToeplitz => {
                if self.gamma == 1.0 || g <= 2 {
                    row.push(1.0);
                    row.extend((1..g).map(|d| self.rho - self.tau * (d - 1) as f64));
                } else {
                    row = hub_first_row(g, self.rho, self.hub_rho_min(), self.gamma)?;
                }
            }
        }
        Ok(row)
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(format!("group {}: {msg}", index + 1)));
        if self.size == 0 {
            return bad("size must be positive".into());
        }
        if !self.rho.is_finite() || !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho = {} must lie in [0, 1)", self.rho));
        }
        if self.kind == StructureKind::HubToeplitz {
            if !self.tau.is_finite() || self.tau < 0.0 {
                return bad(format!("tau = {} must be nonnegative", self.tau));
            }
            if !self.gamma.is_finite() || self.gamma <= 0.0 {
                return bad(format!("gamma = {} must be positive", self.gamma));
            }
            let low = self.hub_rho_min();
            if self.size > 2 && low <= -1.0 {
                return bad(format!(
                    "hub correlations decay to {low}, outside (-1, 1); reduce tau"
                ));
            }
            if self.gamma != 1.0 && self.size < 3 {
                return bad("a hub group with gamma != 1 needs at least 3 members".into());
            }
        }
        Ok(())
    }
}

/// Block-diagonal template. All groups share one kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTemplate {
    groups: Vec<GroupSpec>,
    delta: f64,
}

impl CorrelationTemplate {
    pub fn new(groups: Vec<GroupSpec>, delta: f64) -> Result<Self> {
        let first = groups
            .first()
            .ok_or_else(|| Error::Parameter("template needs at least one group".into()))?;
        for (k, g) in groups.iter().enumerate() {
            if g.kind != first.kind {
                return Err(Error::Parameter(format!(
                    "group {}: kind {:?} differs from group 1 ({:?}); mixed templates are not supported, \
                     build the matrix directly and use the general algorithm",
                    k + 1,
                    g.kind,
                    first.kind
                )));
            }
            g.validate(k)?;
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::Parameter(format!("delta = {delta} must be nonnegative")));
        }
        if delta > 0.0 {
            if first.kind != StructureKind::ConstantCorrelation {
                return Err(Error::Parameter(
                    "delta applies only to constant-correlation templates".into(),
                ));
            }
            let (k, rho_min) = groups
                .iter()
                .enumerate()
                .map(|(k, g)| (k, g.rho))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if delta >= rho_min {
                return Err(Error::Parameter(format!(
                    "group {}: delta = {delta} must be below rho_min = {rho_min}",
                    k + 1
                )));
            }
        }
        Ok(Self { groups, delta })
    }

    pub fn constant(groups: &[(usize, f64)], delta: f64) -> Result<Self> {
        Self::new(groups.iter().map(|&(g, r)| GroupSpec::constant(g, r)).collect(), delta)
    }

    pub fn toeplitz(groups: &[(usize, f64)]) -> Result<Self> {
        Self::new(groups.iter().map(|&(g, r)| GroupSpec::toeplitz(g, r)).collect(), 0.0)
    }

    /// Linear hub groups given as `(size, rho_max, rho_min)`.
    pub fn hub(groups: &[(usize, f64, f64)]) -> Result<Self> {
        Self::new(
            groups
                .iter()
                .map(|&(g, hi, lo)| GroupSpec::hub_range(g, hi, lo, 1.0))
                .collect(),
            0.0,
        )
    }

    pub fn groups(&self) -> &[GroupSpec] {
        &self.groups
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kind(&self) -> StructureKind {
        self.groups[0].kind
    }

    /// `N`, the sum of group sizes.
    pub fn n(&self) -> usize {
        self.groups.iter().map(|g| g.size).sum()
    }

    pub fn rho_max(&self) -> f64 {
        self.groups.iter().map(|g| g.rho).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn rho_min(&self) -> f64 {
        self.groups.iter().map(|g| g.rho).fold(f64::INFINITY, f64::min)
    }

    /// One-based group label of every unit, in matrix order.
    pub fn labels(&self) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(k, g)| std::iter::repeat_n(k + 1, g.size))
            .collect()
    }

    /// `true` for a hub template whose decay is not linear.
    pub fn has_nonlinear_hub(&self) -> bool {
        self.kind() == StructureKind::HubToeplitz && self.groups.iter().any(|g| g.gamma != 1.0)
    }
}

fn assemble(t: &CorrelationTemplate, off_block: f64, shift: f64) -> Result<SymmetricMatrix> {
    let n = t.n();
    let mut m = SymmetricMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { off_block });
    let mut start = 0;
    for g in t.groups() {
        let profile = g.lag_profile()?;
        for i in 0..g.size {
            for j in (i + 1)..g.size {
                m.set(start + i, start + j, profile[j - i] - shift);
            }
        }
        start += g.size;
    }
    Ok(m)
}

/// The template matrix `Sigma`.
pub fn build_template(t: &CorrelationTemplate) -> Result<SymmetricMatrix> {
    assemble(t, t.delta(), 0.0)
}

/// First row of a hub block: `1, rho_max, ..., rho_min` with
/// `row_i = rho_max - ((i - 2) / (g - 2))^gamma (rho_max - rho_min)`.
pub fn hub_first_row(g: usize, rho_max: f64, rho_min: f64, gamma: f64) -> Result<Vec<f64>> {
    if g < 3 {
        return Err(Error::Parameter(format!("hub row needs g >= 3, got {g}")));
    }
    if !(-1.0 < rho_min && rho_min <= rho_max && rho_max < 1.0) {
        return Err(Error::Parameter(format!(
            "hub row needs -1 < rho_min <= rho_max < 1, got rho_min = {rho_min}, rho_max = {rho_max}"
        )));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("gamma = {gamma} must be positive")));
    }
    let span = (g - 2) as f64;
    let mut row = vec![1.0];
    row.extend((2..=g).map(|i| {
        let frac = ((i - 2) as f64 / span).powf(gamma);
        rho_max - frac * (rho_max - rho_min)
    }));
    Ok(row)
}

/// Eigenvalue envelope `[(1 - rho) / (1 + rho), (1 + rho) / (1 - rho)]` that
/// contains every eigenvalue of `rho^{|i-j|}` of any size.
pub fn toeplitz_envelope(rho: f64) -> (f64, f64) {
    ((1.0 - rho) / (1.0 + rho), (1.0 + rho) / (1.0 - rho))
}

/// First-row sum `1 + (g - 1) rho - tau (g - 2)(g - 1) / 2` of a linear hub
/// block.
///
/// This equals `lambda_1` when `tau = 0`, but for `tau > 0` the first row is
/// the *smallest* row sum of a nonnegative hub block, so it is not an upper
/// bound on `lambda_1`. [`analytic_bounds`] uses [`hub_lambda1_bound`].
pub fn hub_first_row_sum(g: usize, rho: f64, tau: f64) -> f64 {
    let g = g as f64;
    1.0 + (g - 1.0) * rho - tau * (g - 2.0) * (g - 1.0) / 2.0
}

/// Lower bound `1 - rho - 3 tau / 4` on the smallest eigenvalue of a linear
/// hub block with nonnegative first row.
pub fn hub_lambda_n_lower(rho: f64, tau: f64) -> f64 {
    1.0 - rho - 0.75 * tau
}

/// Largest Geršgorin row bound `max_j 1 + sum_{k != j} |row_{|j-k|}|` of a
/// Toeplitz block with lag profile `profile`.
fn toeplitz_gershgorin_max(profile: &[f64]) -> f64 {
    let g = profile.len();
    let mut prefix = vec![0.0; g];
    for d in 1..g {
        prefix[d] = prefix[d - 1] + profile[d].abs();
    }
    (0..g)
        .map(|j| profile[0] + prefix[j] + prefix[g - 1 - j])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Upper bound on `lambda_1` of a hub group: the largest Geršgorin row sum.
pub fn hub_lambda1_bound(g: &GroupSpec) -> Result<f64> {
    Ok(toeplitz_gershgorin_max(&g.lag_profile()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaFormula {
    /// `(N (1 + eps) + 1) / (1 - rho_max - eps)`.
    BlockDiagonal,
    /// `(lambda1_upper + (N - 1) eps) / (lambda_n_lower - eps)`.
    Weyl,
}

/// Analytic eigenvalue certificate for a template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub lambda1_upper: f64,
    pub lambda_n_lower: f64,
    /// Strict supremum of admissible noise levels.
    pub epsilon_max: f64,
    pub n: usize,
    pub formula: KappaFormula,
}

impl SpectralBounds {
    /// Certificate from computed (or otherwise known) extreme eigenvalues.
    pub fn from_eigenvalues(lambda1: f64, lambda_n: f64, n: usize) -> Self {
        Self {
            lambda1_upper: lambda1,
            lambda_n_lower: lambda_n,
            epsilon_max: lambda_n,
            n,
            formula: KappaFormula::Weyl,
        }
    }

    /// Upper bound on `kappa(S)` for noise level `eps`; infinite outside
    /// `[0, epsilon_max)`.
    pub fn kappa_bound(&self, eps: f64) -> f64 {
        if !(0.0..self.epsilon_max).contains(&eps) {
            return f64::INFINITY;
        }
        let n = self.n as f64;
        match self.formula {
            KappaFormula::BlockDiagonal => (n * (1.0 + eps) + 1.0) / (self.lambda_n_lower - eps),
            KappaFormula::Weyl => {
                (self.lambda1_upper + (n - 1.0) * eps) / (self.lambda_n_lower - eps)
            }
        }
    }
}

/// Analytic eigenvalue bounds for `t`.
///
/// Returns `Ok(None)` when no certificate exists: hub templates with
/// `gamma != 1`, and hub templates whose first row turns negative or whose
/// smallest-eigenvalue bound is not positive. Callers then fall back to
/// computed eigenvalues and the general algorithm.
pub fn analytic_bounds(t: &CorrelationTemplate) -> Result<Option<SpectralBounds>> {
    let n = t.n();
    let rho_max = t.rho_max();
    let bounds = match t.kind() {
        StructureKind::ConstantCorrelation => SpectralBounds {
            lambda1_upper: n as f64 + 1.0,
            lambda_n_lower: 1.0 - rho_max,
            epsilon_max: 1.0 - rho_max,
            n,
            formula: KappaFormula::BlockDiagonal,
        },
        StructureKind::Toeplitz => {
            let (lo, hi) = toeplitz_envelope(rho_max);
            SpectralBounds {
                lambda1_upper: hi,
                lambda_n_lower: lo,
                epsilon_max: lo,
                n,
                formula: KappaFormula::Weyl,
            }
        }
        StructureKind::HubToeplitz => {
            if t.has_nonlinear_hub() {
                return Ok(None);
            }
            // a decay that ends exactly at zero may land a rounding error below it
            if t.groups().iter().any(|g| g.size > 2 && g.hub_rho_min() < -1e-12) {
                return Ok(None);
            }
            let mut upper = f64::NEG_INFINITY;
            let mut lower = f64::INFINITY;
            for g in t.groups() {
                upper = upper.max(hub_lambda1_bound(g)?);
                lower = lower.min(hub_lambda_n_lower(g.rho, g.tau));
            }
            if lower <= 0.0 {
                return Ok(None);
            }
            SpectralBounds {
                lambda1_upper: upper,
                lambda_n_lower: lower,
                epsilon_max: lower,
                n,
                formula: KappaFormula::Weyl,
            }
        }
    };
    Ok(Some(bounds))
}

/// The block part `A = blockdiag(Sigma_k - delta 1)` of a constant-correlation
/// template (zero between blocks).
pub fn block_deflated_part(t: &CorrelationTemplate) -> Result<SymmetricMatrix> {
    require_constant(t)?;
    let n = t.n();
    let mut m = SymmetricMatrix::from_fn(n, |i, j| if i == j { 1.0 - t.delta() } else { 0.0 });
    let mut start = 0;
    for g in t.groups() {
        for i in 0..g.size {
            for j in (i + 1)..g.size {
                m.set(start + i, start + j, g.rho - t.delta());
            }
        }
        start += g.size;
    }
    Ok(m)
}

/// `Sigma' = A + delta 1_N`; entrywise equal to [`build_template`].
pub fn shifted_block_matrix(t: &CorrelationTemplate) -> Result<SymmetricMatrix> {
    let a = block_deflated_part(t)?;
    let delta = t.delta();
    Ok(SymmetricMatrix::from_fn(a.n(), |i, j| a.get(i, j) + delta))
}

fn require_constant(t: &CorrelationTemplate) -> Result<()> {
    if t.kind() != StructureKind::ConstantCorrelation {
        return Err(Error::Parameter(format!(
            "expected a constant-correlation template, got {:?}",
            t.kind()
        )));
    }
    Ok(())
}

/// `(1 - rho^2) / (1 - rho cos(theta) + rho^2)`, the closed form as commonly
/// misprinted. Its value at `theta = 0` is `(1 - rho^2) / (1 - rho + rho^2)`,
/// not the envelope maximum; see [`poisson_kernel_standard`].
pub fn poisson_kernel(rho: f64, theta: f64) -> f64 {
    (1.0 - rho * rho) / (1.0 - rho * theta.cos() + rho * rho)
}

/// Poisson kernel `sum_n rho^{|n|} e^{i n theta} = (1 - rho^2) / (1 - 2 rho cos(theta) + rho^2)`.
///
/// Its range over `[-pi, pi]` is exactly [`toeplitz_envelope`].
pub fn poisson_kernel_standard(rho: f64, theta: f64) -> f64 {
    (1.0 - rho * rho) / (1.0 - 2.0 * rho * theta.cos() + rho * rho)
}
