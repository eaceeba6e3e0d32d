//! Noise generation and the perturbation recipes.
//!
//! Every recipe produces `S = Sigma + eps (E - I)` where `E` is a unit-diagonal
//! positive-semidefinite noise matrix, usually the Gram matrix `U^T U` of `N`
//! random unit vectors in `R^M`. Weyl's inequalities give
//! `lambda_N(S) >= lambda_N(Sigma) - eps` and
//! `lambda_1(S) <= lambda_1(Sigma) + (N - 1) eps`, so `S` is a positive-definite
//! correlation matrix whenever `eps < lambda_N(Sigma)`, and the recipes differ
//! only in how they bound `lambda_N(Sigma)` and `lambda_1(Sigma)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};
use crate::spectra::{eigenvalues, validate_correlation, SymmetricMatrix, DEFAULT_TOLERANCE};
use crate::templates::{
    analytic_bounds, build_template, CorrelationTemplate, KappaFormula, SpectralBounds, StructureKind,
};

/// Density on `[-1, 1]` for the extreme-favouring `alpha_i` of [`alpha_mix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaDensity {
    /// `f(x) = |x|`.
    AbsX,
    /// `f(x) = (2 - 2 sqrt(1 - x^2)) / (4 - pi)`.
    ArcMinusCircle,
    /// `Beta(a, b)` mapped affinely onto `[-1, 1]`.
    BetaSymmetric { a: f64, b: f64 },
}

const BISECTION_TOL: f64 = 1e-10;

impl AlphaDensity {
    pub fn validate(&self) -> Result<()> {
        if let AlphaDensity::BetaSymmetric { a, b } = *self {
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(Error::Parameter(format!(
                    "beta shape parameters must be positive, got a = {a}, b = {b}"
                )));
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        match *self {
            AlphaDensity::AbsX => x.abs(),
            AlphaDensity::ArcMinusCircle => {
                (2.0 - 2.0 * (1.0 - x * x).sqrt()) / (4.0 - std::f64::consts::PI)
            }
            AlphaDensity::BetaSymmetric { a, b } => {
                let y = (x + 1.0) / 2.0;
                let ln_norm = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
                0.5 * (ln_norm + (a - 1.0) * y.ln() + (b - 1.0) * (1.0 - y).ln()).exp()
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match *self {
            AlphaDensity::AbsX => {
                if x < 0.0 {
                    (1.0 - x * x) / 2.0
                } else {
                    (1.0 + x * x) / 2.0
                }
            }
            AlphaDensity::ArcMinusCircle => {
                // antiderivative of 2 - 2 sqrt(1 - x^2) is 2x - x sqrt(1 - x^2) - asin(x)
                let pi = std::f64::consts::PI;
                let upper = 2.0 * x - x * (1.0 - x * x).sqrt() - x.asin();
                let lower = -2.0 + pi / 2.0;
                (upper - lower) / (4.0 - pi)
            }
            AlphaDensity::BetaSymmetric { a, b } => beta_reg(a, b, (x + 1.0) / 2.0),
        }
    }

    /// Inverse-CDF draw by bisection.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p: f64 = rng.random();
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorGenerator {
    /// Normalised standard-normal vectors, uniform on the sphere.
    SphereUniform,
    /// Sphere vectors lifted by extreme-favouring `alpha_i`.
    AlphaMixed(AlphaDensity),
    /// Normalised iid vectors; with a normal base this coincides with
    /// [`VectorGenerator::SphereUniform`].
    IidNormalized,
}

/// Noise level, noise-space dimension, vector generator and random stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpec {
    pub epsilon: f64,
    /// Noise-space dimension `M`.
    pub dim: usize,
    pub generator: VectorGenerator,
    pub seed: u64,
    /// Replicate stream; see [`NoiseSpec::for_replicate`].
    pub stream: u64,
}

impl NoiseSpec {
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::Parameter(format!("epsilon = {epsilon} must be nonnegative")));
        }
        if dim < 2 {
            return Err(Error::Parameter(format!("noise dimension M = {dim} must be at least 2")));
        }
        Ok(Self {
            epsilon,
            dim,
            generator: VectorGenerator::SphereUniform,
            seed: 0,
            stream: 0,
        })
    }

    pub fn with_generator(mut self, generator: VectorGenerator) -> Result<Self> {
        if let VectorGenerator::AlphaMixed(d) = generator {
            d.validate()?;
        }
        self.generator = generator;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        let checked = Self::new(epsilon, self.dim)?;
        self.epsilon = checked.epsilon;
        Ok(self)
    }

    /// Same parameters on the independent stream of replicate `r`.
    pub fn for_replicate(mut self, r: u64) -> Self {
        self.stream = r;
        self
    }

    pub fn rng(&self) -> StreamRng {
        stream_rng(self.seed, self.stream)
    }
}

/// Condition-number budget `kappa_max > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBudget {
    kappa_max: f64,
}

impl NoiseBudget {
    pub fn new(kappa_max: f64) -> Result<Self> {
        if !(kappa_max > 1.0) || !kappa_max.is_finite() {
            return Err(Error::Parameter(format!("kappa_max = {kappa_max} must exceed 1")));
        }
        Ok(Self { kappa_max })
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }
}

/// `n` unit vectors in `R^m`, stored column after column.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVectorSet {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl UnitVectorSet {
    /// Normalises the given columns. Zero columns are rejected.
    pub fn from_columns(m: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(m * columns.len());
        for (i, c) in columns.iter().enumerate() {
            if c.len() != m {
                return Err(Error::DimensionMismatch { left: c.len(), right: m });
            }
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Parameter(format!("column {} cannot be normalised", i + 1)));
            }
            data.extend(c.iter().map(|x| x / norm));
        }
        Ok(Self { m, n: columns.len(), data })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn dot(&self, i: usize, j: usize) -> f64 {
        self.column(i).iter().zip(self.column(j)).map(|(a, b)| a * b).sum()
    }
}

pub(crate) fn draw_unit_vectors<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> UnitVectorSet {
    let mut data = Vec::with_capacity(m * n);
    let mut x = vec![0.0; m];
    for _ in 0..n {
        loop {
            for v in x.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                data.extend(x.iter().map(|v| v / norm));
                break;
            }
        }
    }
    UnitVectorSet { m, n, data }
}

/// `n` unit vectors in `R^M` drawn from the spec's stream.
pub fn sample_unit_vectors(spec: &NoiseSpec, n: usize) -> UnitVectorSet {
    draw_unit_vectors(spec.dim, n, &mut spec.rng())
}

/// Gram matrix `E = U^T U`.
pub fn gram_noise(u: &UnitVectorSet) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(u.len(), |i, j| if i == j { 1.0 } else { u.dot(i, j) })
}

/// `alpha_i alpha_j + sqrt((1 - alpha_i^2)(1 - alpha_j^2)) u_i^T u_j`, the Gram
/// matrix of the lifted unit vectors `(alpha_i, sqrt(1 - alpha_i^2) u_i)`.
pub fn alpha_mix_with(u: &UnitVectorSet, alphas: &[f64]) -> Result<SymmetricMatrix> {
    if alphas.len() != u.len() {
        return Err(Error::DimensionMismatch {
            left: alphas.len(),
            right: u.len(),
        });
    }
    if let Some(a) = alphas.iter().find(|a| !(a.abs() <= 1.0)) {
        return Err(Error::Parameter(format!("alpha = {a} outside [-1, 1]")));
    }
    let scale: Vec<f64> = alphas.iter().map(|a| (1.0 - a * a).max(0.0).sqrt()).collect();
    Ok(SymmetricMatrix::from_fn(u.len(), |i, j| {
        if i == j {
            1.0
        } else {
            alphas[i] * alphas[j] + scale[i] * scale[j] * u.dot(i, j)
        }
    }))
}

/// [`alpha_mix_with`] using `alpha_i` drawn from `density`.
pub fn alpha_mix<R: Rng + ?Sized>(
    u: &UnitVectorSet,
    density: AlphaDensity,
    rng: &mut R,
) -> Result<SymmetricMatrix> {
    density.validate()?;
    let alphas: Vec<f64> = (0..u.len()).map(|_| density.sample(rng)).collect();
    alpha_mix_with(u, &alphas)
}

/// The unit-diagonal PSD noise matrix `E` for one replicate.
pub fn noise_matrix(spec: &NoiseSpec, n: usize) -> Result<SymmetricMatrix> {
    let mut rng = spec.rng();
    let u = draw_unit_vectors(spec.dim, n, &mut rng);
    match spec.generator {
        VectorGenerator::SphereUniform | VectorGenerator::IidNormalized => Ok(gram_noise(&u)),
        VectorGenerator::AlphaMixed(density) => alpha_mix(&u, density, &mut rng),
    }
}

/// `Sigma + eps (E - I)` with an exact unit diagonal.
fn add_noise(sigma: &SymmetricMatrix, eps: f64, e: &SymmetricMatrix) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(sigma.n(), |i, j| {
        if i == j {
            1.0
        } else {
            sigma.get(i, j) + eps * e.get(i, j)
        }
    })
}

/// Applies `Sigma + eps (E - I)` without any admissibility check.
///
/// The result keeps a unit diagonal and entries within `eps` of `sigma`, but
/// it is only guaranteed positive definite when `eps < lambda_N(sigma)`.
pub fn perturb_unchecked(sigma: &SymmetricMatrix, spec: &NoiseSpec) -> Result<SymmetricMatrix> {
    let e = noise_matrix(spec, sigma.n())?;
    Ok(add_noise(sigma, spec.epsilon, &e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Blocks,
    Toeplitz,
    Hub,
    General,
}

/// A template matrix paired with the certificate that governs its noise.
#[derive(Debug, Clone)]
pub struct Recipe {
    sigma: SymmetricMatrix,
    bounds: SpectralBounds,
    route: Route,
}

impl Recipe {
    /// Picks the specialised recipe for the template kind, falling back to the
    /// general algorithm with computed eigenvalues when no analytic
    /// certificate exists.
    pub fn for_template(t: &CorrelationTemplate) -> Result<Self> {
        let sigma = build_template(t)?;
        match analytic_bounds(t)? {
            Some(bounds) => {
                let route = match t.kind() {
                    StructureKind::ConstantCorrelation => Route::Blocks,
                    StructureKind::Toeplitz => Route::Toeplitz,
                    StructureKind::HubToeplitz => Route::Hub,
                };
                Ok(Self { sigma, bounds, route })
            }
            None => Self::for_matrix(sigma),
        }
    }

    /// General algorithm: the certificate is the computed spectrum of `sigma`.
    pub fn for_matrix(sigma: SymmetricMatrix) -> Result<Self> {
        let report = validate_correlation(&sigma, DEFAULT_TOLERANCE);
        if !(report.unit_diagonal && report.entries_in_range) {
            return Err(Error::Parameter(
                "template is not a correlation matrix (diagonal or range check failed)".into(),
            ));
        }
        let spectrum = eigenvalues(&sigma, DEFAULT_TOLERANCE)?;
        let n = sigma.n();
        let bounds = SpectralBounds::from_eigenvalues(spectrum.largest(), spectrum.smallest(), n);
        Ok(Self {
            sigma,
            bounds,
            route: Route::General,
        })
    }

    pub fn template(&self) -> &SymmetricMatrix {
        &self.sigma
    }

    pub fn bounds(&self) -> &SpectralBounds {
        &self.bounds
    }

    pub fn route(&self) -> Route {
        self.route
    }

    fn constraint(&self) -> &'static str {
        match self.route {
            Route::Blocks => "1 - rho_max",
            Route::Toeplitz => "(1 - rho_max) / (1 + rho_max)",
            Route::Hub => "min_k (1 - rho_k - 3 tau_k / 4)",
            Route::General => "lambda_N(sigma)",
        }
    }

    /// Strict admissibility `0 <= eps < epsilon_max`.
    pub fn check(&self, eps: f64) -> Result<()> {
        if self.sigma.n() == 1 {
            return Ok(());
        }
        if !(eps < self.bounds.epsilon_max) {
            return Err(Error::Admissibility {
                constraint: self.constraint().to_string(),
                epsilon: eps,
                limit: self.bounds.epsilon_max,
            });
        }
        Ok(())
    }

    /// Certified bound on `kappa(S)` at noise level `eps`.
    pub fn kappa_bound(&self, eps: f64) -> f64 {
        self.bounds.kappa_bound(eps)
    }

    /// Largest noise level whose certified kappa bound stays within `budget`.
    pub fn epsilon_for_budget(&self, budget: NoiseBudget) -> Result<f64> {
        let b = &self.bounds;
        match b.formula {
            KappaFormula::Weyl => epsilon_for_kappa(b.lambda1_upper, b.lambda_n_lower, budget, b.n),
            KappaFormula::BlockDiagonal => {
                // (N (1 + eps) + 1) / (lambda_n - eps) <= kappa
                let n = b.n as f64;
                let kappa = budget.kappa_max();
                let product = kappa * b.lambda_n_lower;
                if !(product > n + 1.0) {
                    return Err(Error::InfeasibleBudget {
                        product,
                        lambda1: n + 1.0,
                    });
                }
                let eps = (product - n - 1.0) / (kappa + n);
                Ok(eps.min(b.lambda_n_lower * (1.0 - f64::EPSILON)))
            }
        }
    }

    pub fn draw(&self, spec: &NoiseSpec) -> Result<SymmetricMatrix> {
        self.check(spec.epsilon)?;
        if self.sigma.n() == 1 {
            return Ok(SymmetricMatrix::identity(1));
        }
        let e = noise_matrix(spec, self.sigma.n())?;
        Ok(add_noise(&self.sigma, spec.epsilon, &e))
    }
}

/// General algorithm: any positive-definite correlation matrix,
/// `0 <= eps < lambda_N(sigma)`.
pub fn perturb_general(sigma: &SymmetricMatrix, spec: &NoiseSpec) -> Result<SymmetricMatrix> {
    Recipe::for_matrix(sigma.clone())?.draw(spec)
}

fn require_kind(t: &CorrelationTemplate, kind: StructureKind) -> Result<()> {
    if t.kind() != kind {
        return Err(Error::Parameter(format!(
            "recipe needs a {kind:?} template, got {:?}",
            t.kind()
        )));
    }
    Ok(())
}

/// Constant-correlation blocks with between-group baseline `delta`;
/// `0 <= eps < 1 - rho_max`.
pub fn perturb_blocks(t: &CorrelationTemplate, spec: &NoiseSpec) -> Result<SymmetricMatrix> {
    require_kind(t, StructureKind::ConstantCorrelation)?;
    Recipe::for_template(t)?.draw(spec)
}

/// Toeplitz blocks; `eps < (1 - rho_max) / (1 + rho_max)`.
pub fn perturb_toeplitz(t: &CorrelationTemplate, spec: &NoiseSpec) -> Result<SymmetricMatrix> {
    require_kind(t, StructureKind::Toeplitz)?;
    Recipe::for_template(t)?.draw(spec)
}

/// Linear hub-Toeplitz blocks; `eps < min_k (1 - rho_k - 3 tau_k / 4)`.
///
/// Templates without an analytic certificate (nonlinear decay, or a first row
/// that turns negative) yield [`Error::RequiresGeneralAlgorithm`].
pub fn perturb_hub(t: &CorrelationTemplate, spec: &NoiseSpec) -> Result<SymmetricMatrix> {
    require_kind(t, StructureKind::HubToeplitz)?;
    let recipe = Recipe::for_template(t)?;
    if recipe.route() != Route::Hub {
        return Err(Error::RequiresGeneralAlgorithm(
            "hub template with nonlinear or sign-changing decay".into(),
        ));
    }
    recipe.draw(spec)
}

/// Largest `eps` with `(lambda1 + (N - 1) eps) / (lambda_n - eps) <= kappa_max`,
/// i.e. `(kappa_max lambda_n - lambda1) / (kappa_max + N - 1)`.
pub fn epsilon_for_kappa(lambda1: f64, lambda_n: f64, budget: NoiseBudget, n: usize) -> Result<f64> {
    let kappa = budget.kappa_max();
    let product = kappa * lambda_n;
    if !(product > lambda1) {
        return Err(Error::InfeasibleBudget { product, lambda1 });
    }
    let eps = (product - lambda1) / (kappa + n as f64 - 1.0);
    // the formula already sits below lambda_n; keep the inequality strict in floating point
    Ok(eps.min(lambda_n * (1.0 - f64::EPSILON)))
}

/// Density of the dot product of two independent uniform unit vectors in
/// `R^M`: `Gamma(M/2) / (Gamma((M-1)/2) sqrt(pi)) (1 - z^2)^{(M-3)/2}`.
///
/// For `M = 2` the density is infinite (but integrable) at `z = +-1`.
pub fn dot_density(z: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Parameter(format!("M = {m} must be at least 2")));
    }
    if !(z.abs() <= 1.0) {
        return Err(Error::Parameter(format!("z = {z} outside [-1, 1]")));
    }
    let mf = m as f64;
    let one_minus = 1.0 - z * z;
    if one_minus == 0.0 {
        return Ok(match m {
            2 => f64::INFINITY,
            3 => 0.5,
            _ => 0.0,
        });
    }
    let ln_c = ln_gamma(mf / 2.0) - ln_gamma((mf - 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln();
    Ok((ln_c + 0.5 * (mf - 3.0) * one_minus.ln()).exp())
}

/// Standard error `eps / sqrt(M)` of the noise added to each correlation.
pub fn noise_se(epsilon: f64, m: usize) -> f64 {
    epsilon / (m as f64).sqrt()
}
