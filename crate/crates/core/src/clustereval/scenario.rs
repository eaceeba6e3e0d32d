use rayon::prelude::*;
use serde::Serialize;

use super::{adjusted_rand, choose_k, correlation_to_dissimilarity, median, silhouette_width, Partition};
use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, Recipe};
use crate::spectra::SymmetricMatrix;
use crate::templates::{CorrelationTemplate, GroupSpec};

pub const DEFAULT_K_MAX: usize = 10;

pub const HTC_NAMES: [&str; 6] = ["hTC1", "hTC2", "hTC3", "hTC4", "hTC5", "hTC6"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: u64,
    pub k: usize,
    pub silhouette: f64,
    pub adjusted_rand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub replicates: Vec<ReplicateOutcome>,
    pub min_k: usize,
    pub median_k: f64,
    pub max_k: usize,
    pub median_adjusted_rand: f64,
    /// False when the noise level exceeded the certified range and the
    /// matrices were perturbed without a positive-definiteness guarantee.
    pub certified: bool,
}

impl ScenarioResult {
    pub fn from_outcomes(scenario: &str, replicates: Vec<ReplicateOutcome>, certified: bool) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::Parameter("scenario needs at least one replicate".into()));
        }
        let ks: Vec<f64> = replicates.iter().map(|o| o.k as f64).collect();
        let ars: Vec<f64> = replicates.iter().map(|o| o.adjusted_rand).collect();
        Ok(Self {
            scenario: scenario.to_string(),
            min_k: replicates.iter().map(|o| o.k).min().unwrap_or(0),
            max_k: replicates.iter().map(|o| o.k).max().unwrap_or(0),
            median_k: median(&ks),
            median_adjusted_rand: median(&ars),
            replicates,
            certified,
        })
    }
}

/// Clusters replicates `0..replicates` in parallel; results keep replicate order.
pub(crate) fn run_replicates<F>(
    n: usize,
    truth: &Partition,
    replicates: u64,
    k_max: usize,
    draw: F,
) -> Result<Vec<ReplicateOutcome>>
where
    F: Fn(u64) -> Result<SymmetricMatrix> + Sync,
{
    if truth.len() != n {
        return Err(Error::DimensionMismatch {
            left: truth.len(),
            right: n,
        });
    }
    if replicates == 0 {
        return Err(Error::Parameter("replicates must be at least 1".into()));
    }
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let s = draw(r)?;
            let d = correlation_to_dissimilarity(&s);
            let (k, fit) = choose_k(&d, k_max)?;
            Ok(ReplicateOutcome {
                replicate: r,
                k,
                silhouette: silhouette_width(&d, &fit.partition)?,
                adjusted_rand: adjusted_rand(&fit.partition, truth)?,
            })
        })
        .collect()
}

/// Generates `replicates` noisy matrices from `t` (the recipe follows the
/// template kind), clusters each and scores it against `truth`.
pub fn run_scenario(
    name: &str,
    t: &CorrelationTemplate,
    spec: &NoiseSpec,
    truth: &Partition,
    replicates: u64,
    k_max: usize,
) -> Result<ScenarioResult> {
    let recipe = Recipe::for_template(t)?;
    recipe.check(spec.epsilon)?;
    let outcomes = run_replicates(t.n(), truth, replicates, k_max, |r| {
        recipe.draw(&spec.for_replicate(r))
    })?;
    ScenarioResult::from_outcomes(name, outcomes, true)
}

/// [`run_scenario`] for an arbitrary positive-definite correlation matrix.
pub fn run_matrix_scenario(
    name: &str,
    sigma: &SymmetricMatrix,
    spec: &NoiseSpec,
    truth: &Partition,
    replicates: u64,
    k_max: usize,
) -> Result<ScenarioResult> {
    let recipe = Recipe::for_matrix(sigma.clone())?;
    recipe.check(spec.epsilon)?;
    let outcomes = run_replicates(sigma.n(), truth, replicates, k_max, |r| {
        recipe.draw(&spec.for_replicate(r))
    })?;
    ScenarioResult::from_outcomes(name, outcomes, true)
}

/// A named template with its noise settings and ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub name: String,
    pub template: CorrelationTemplate,
    pub noise: NoiseSpec,
    pub truth: Partition,
}

impl ScenarioPreset {
    pub fn run(&self, replicates: u64, k_max: usize) -> Result<ScenarioResult> {
        run_scenario(&self.name, &self.template, &self.noise, &self.truth, replicates, k_max)
    }
}

/// The six hub-Toeplitz clustering scenarios on groups of sizes
/// (100, 50, 80) with linear decay.
///
/// | name | first-row ranges                 | M  | eps  |
/// |------|----------------------------------|----|------|
/// | hTC1 | 0.7 to 0, 0.7 to 0, 0.4 to 0     | 2  | 0.23 |
/// | hTC2 | 0.7 to 0.5, 0.7 to 0.6, 0.4 to 0.2 | 2  | 0.29 |
/// | hTC3 | as hTC2                          | 25 | 0.29 |
/// | hTC4 | as hTC2                          | 2  | 0.10 |
/// | hTC5 | as hTC2                          | 2  | 0.25 |
/// | hTC6 | 0.8 to 0, 0.75 to 0, 0.7 to 0    | 2  | 0.19 |
pub fn htc_scenario(name: &str, seed: u64) -> Result<ScenarioPreset> {
    let decay_to_zero = [(0.7, 0.0), (0.7, 0.0), (0.4, 0.0)];
    let shallow = [(0.7, 0.5), (0.7, 0.6), (0.4, 0.2)];
    let steep = [(0.8, 0.0), (0.75, 0.0), (0.7, 0.0)];
    let (ranges, dim, epsilon) = match name {
        "hTC1" => (decay_to_zero, 2, 0.23),
        "hTC2" => (shallow, 2, 0.29),
        "hTC3" => (shallow, 25, 0.29),
        "hTC4" => (shallow, 2, 0.10),
        "hTC5" => (shallow, 2, 0.25),
        "hTC6" => (steep, 2, 0.19),
        other => {
            return Err(Error::Parameter(format!(
                "unknown scenario '{other}', expected one of {HTC_NAMES:?}"
            )))
        }
    };
    let groups = [100, 50, 80]
        .into_iter()
        .zip(ranges)
        .map(|(g, (hi, lo))| GroupSpec::hub_range(g, hi, lo, 1.0))
        .collect();
    let template = CorrelationTemplate::new(groups, 0.0)?;
    let truth = Partition::new(template.labels())?;
    Ok(ScenarioPreset {
        name: name.to_string(),
        template,
        noise: NoiseSpec::new(epsilon, dim)?.with_seed(seed),
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Route;

    #[test]
    fn presets_are_admissible_hub_templates() {
        for name in HTC_NAMES {
            let p = htc_scenario(name, 1).unwrap();
            assert_eq!(p.template.n(), 230);
            let recipe = Recipe::for_template(&p.template).unwrap();
            assert_eq!(recipe.route(), Route::Hub, "{name}");
            recipe.check(p.noise.epsilon).unwrap();
        }
        assert!(htc_scenario("hTC7", 1).is_err());
    }

    #[test]
    fn noiseless_blocks_are_recovered() {
        let t = CorrelationTemplate::hub(&[(12, 0.7, 0.02), (8, 0.6, 0.02), (10, 0.8, 0.02)]).unwrap();
        let truth = Partition::new(t.labels()).unwrap();
        let spec = NoiseSpec::new(0.0, 2).unwrap();
        let res = run_scenario("clean", &t, &spec, &truth, 3, 6).unwrap();
        assert!(res.replicates.iter().all(|o| o.k == 3 && o.adjusted_rand == 1.0));
        assert_eq!((res.min_k, res.median_k, res.max_k), (3, 3.0, 3));
    }

    #[test]
    fn summary_matches_outcomes() {
        let outcomes = [(4, 0.5), (2, 1.0), (3, 0.25), (7, 0.0)]
            .into_iter()
            .enumerate()
            .map(|(r, (k, ar))| ReplicateOutcome {
                replicate: r as u64,
                k,
                silhouette: 0.0,
                adjusted_rand: ar,
            })
            .collect();
        let res = ScenarioResult::from_outcomes("x", outcomes, true).unwrap();
        assert_eq!((res.min_k, res.max_k), (2, 7));
        assert_eq!(res.median_k, 3.5);
        assert_eq!(res.median_adjusted_rand, 0.375);
        assert!(ScenarioResult::from_outcomes("x", vec![], true).is_err());
    }

    #[test]
    fn truth_length_is_checked() {
        let t = CorrelationTemplate::constant(&[(5, 0.5), (5, 0.5)], 0.0).unwrap();
        let truth = Partition::new(vec![1, 2]).unwrap();
        let spec = NoiseSpec::new(0.1, 3).unwrap();
        assert!(matches!(
            run_scenario("x", &t, &spec, &truth, 2, 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
