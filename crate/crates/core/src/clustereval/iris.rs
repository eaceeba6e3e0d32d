//! Fisher's iris measurements, bundled as `assets/iris.csv`.

use super::scenario::run_replicates;
use super::{Partition, ScenarioResult};
use crate::error::{Error, Result};
use crate::noise::{perturb_unchecked, NoiseSpec, Recipe};
use crate::spectra::SymmetricMatrix;

pub const IRIS_CSV: &str = include_str!("../../assets/iris.csv");

/// SHA-256 of [`IRIS_CSV`].
pub const IRIS_SHA256: &str = "91eb642c3adbc7bad8e99c930c11fa3a5cc8a07262c7a753b4e6ecf405f2e05e";

#[derive(Debug, Clone, PartialEq)]
pub struct IrisData {
    /// Sepal length, sepal width, petal length, petal width.
    pub measurements: Vec<[f64; 4]>,
    pub species: Vec<String>,
}

impl IrisData {
    pub fn bundled() -> Self {
        Self::parse_csv(IRIS_CSV).expect("bundled iris table parses")
    }

    /// Parses a header line followed by rows of four numbers and a species name.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        lines
            .next()
            .ok_or_else(|| Error::Parameter("iris table is empty".into()))?;
        let mut measurements = Vec::new();
        let mut species = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Parameter(format!(
                    "iris row {}: expected 5 fields, found {}",
                    i + 1,
                    fields.len()
                )));
            }
            let mut row = [0.0_f64; 4];
            for (slot, field) in row.iter_mut().zip(&fields[..4]) {
                *slot = field
                    .parse()
                    .map_err(|_| Error::Parameter(format!("iris row {}: bad number '{field}'", i + 1)))?;
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            measurements.push(row);
            species.push(fields[4].to_string());
        }
        if measurements.len() < 3 {
            return Err(Error::Parameter("iris table needs at least 3 rows".into()));
        }
        Ok(Self { measurements, species })
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    /// Observation-by-observation Pearson correlation of the raw
    /// measurements (all four are lengths in centimetres). Rank is at most 3:
    /// each centred 4-vector lies in the plane orthogonal to `(1, 1, 1, 1)`.
    pub fn observation_correlation(&self) -> SymmetricMatrix {
        row_correlation(&self.measurements)
    }

    /// [`IrisData::observation_correlation`] after z-scoring each measurement.
    pub fn standardized_observation_correlation(&self) -> SymmetricMatrix {
        let n = self.len() as f64;
        let mut z = self.measurements.clone();
        for c in 0..4 {
            let mean = z.iter().map(|r| r[c]).sum::<f64>() / n;
            let sd = (z.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            for r in z.iter_mut() {
                r[c] = (r[c] - mean) / sd;
            }
        }
        row_correlation(&z)
    }

    /// Setosa against the merged versicolor and virginica.
    pub fn two_species_truth(&self) -> Partition {
        let labels = self
            .species
            .iter()
            .map(|s| if s.eq_ignore_ascii_case("setosa") { 1 } else { 2 })
            .collect();
        Partition::new(labels).expect("both groups are present")
    }

    pub fn species_truth(&self) -> Result<Partition> {
        Partition::from_raw(&self.species)
    }
}

fn row_correlation(rows: &[[f64; 4]]) -> SymmetricMatrix {
    let unit: Vec<[f64; 4]> = rows
        .iter()
        .map(|r| {
            let mean = r.iter().sum::<f64>() / 4.0;
            let centred = r.map(|v| v - mean);
            let norm = centred.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                centred.map(|v| v / norm)
            } else {
                [0.0; 4]
            }
        })
        .collect();
    SymmetricMatrix::from_fn(rows.len(), |i, j| {
        if i == j {
            1.0
        } else {
            let dot: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
            dot.clamp(-1.0, 1.0)
        }
    })
}

/// Clusters the iris observation-correlation matrix, optionally with noise,
/// against the two-species truth.
///
/// The matrix has rank at most 3, so its smallest eigenvalue is zero up to
/// rounding and no positive noise level is certified. Noise is then added
/// by the same formula without the guarantee, and the result is marked
/// `certified = false`.
pub fn iris_scenario(
    data: &IrisData,
    spec: Option<&NoiseSpec>,
    replicates: u64,
    k_max: usize,
) -> Result<ScenarioResult> {
    let sigma = data.observation_correlation();
    let truth = data.two_species_truth();
    let spec = spec.filter(|s| s.epsilon > 0.0);
    let Some(spec) = spec else {
        let outcomes = run_replicates(sigma.n(), &truth, replicates, k_max, |_| Ok(sigma.clone()))?;
        return ScenarioResult::from_outcomes("iris", outcomes, true);
    };
    let recipe = Recipe::for_matrix(sigma.clone())?;
    let certified = recipe.check(spec.epsilon).is_ok();
    let outcomes = run_replicates(sigma.n(), &truth, replicates, k_max, |r| {
        let s = spec.for_replicate(r);
        if certified {
            recipe.draw(&s)
        } else {
            perturb_unchecked(&sigma, &s)
        }
    })?;
    ScenarioResult::from_outcomes("iris", outcomes, certified)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::eigenvalues;

    #[test]
    fn bundled_table_shape() {
        let iris = IrisData::bundled();
        assert_eq!(iris.len(), 150);
        assert_eq!(iris.species_truth().unwrap().sizes(), [50, 50, 50]);
        assert_eq!(iris.two_species_truth().sizes(), [50, 100]);
        assert_eq!(iris.measurements[0], [5.1, 3.5, 1.4, 0.2]);
    }

    #[test]
    fn observation_correlation_has_rank_three() {
        let iris = IrisData::bundled();
        for s in [iris.observation_correlation(), iris.standardized_observation_correlation()] {
            let spec = eigenvalues(&s, 1e-10).unwrap();
            assert_eq!(spec.values.iter().filter(|v| **v > 1e-8).count(), 3);
            assert!((spec.values.iter().sum::<f64>() - 150.0).abs() < 1e-8);
        }
    }

    #[test]
    fn first_rows_by_hand() {
        // rows 1 and 2: (5.1, 3.5, 1.4, 0.2) and (4.9, 3.0, 1.4, 0.2)
        let a = [5.1, 3.5, 1.4, 0.2];
        let b = [4.9, 3.0, 1.4, 0.2];
        let centre = |r: [f64; 4]| {
            let m = r.iter().sum::<f64>() / 4.0;
            r.map(|v| v - m)
        };
        let (ca, cb) = (centre(a), centre(b));
        let dot: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
        let norm = |c: [f64; 4]| c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = dot / (norm(ca) * norm(cb));
        let s = IrisData::bundled().observation_correlation();
        assert!((s.get(0, 1) - r).abs() < 1e-14);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(IrisData::parse_csv("").is_err());
        assert!(IrisData::parse_csv("h\n1,2,3,setosa\n").is_err());
        assert!(IrisData::parse_csv("h\n1,2,x,4,setosa\n").is_err());
    }
}
