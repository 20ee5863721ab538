use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Per-feature z-scoring parameters (population standard deviation).
/// A feature whose deviation is zero maps to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl NormalizationParams {
    pub fn fit(ds: &Dataset) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = ds.len() as f64;
        let m = ds.n_features();
        let mut mean = vec![0.0; m];
        for ex in ds.examples() {
            for (acc, v) in mean.iter_mut().zip(&ex.features) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= n);
        let mut var = vec![0.0; m];
        for ex in ds.examples() {
            for ((acc, v), mu) in var.iter_mut().zip(&ex.features).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let sd = var
            .iter()
            .zip(&mean)
            .map(|(v, mu)| {
                let sd = (v / n).sqrt();
                // rounding residue of a constant column
                if sd <= 1e-12 * mu.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(NormalizationParams { mean, sd })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: x.len(),
            });
        }
        for ((v, mu), sd) in x.iter_mut().zip(&self.mean).zip(&self.sd) {
            *v = if *sd == 0.0 { 0.0 } else { (*v - mu) / sd };
        }
        Ok(())
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: ds.n_features(),
            });
        }
        Ok(ds.map_features(|x| self.apply(x).expect("dimension checked")))
    }
}

/// Z-scores every feature column and returns the parameters for reuse on
/// unseen rows.
pub fn normalize(ds: &Dataset) -> Result<(Dataset, NormalizationParams)> {
    let params = NormalizationParams::fit(ds)?;
    Ok((params.transform(ds)?, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabeledExample;
    use rand::{Rng, SeedableRng};

    fn column(values: &[f64]) -> Dataset {
        let ex = values
            .iter()
            .enumerate()
            .map(|(i, &v)| LabeledExample::new(vec![v], 1 + i % 2))
            .collect();
        Dataset::new(ex, 1, 2).unwrap()
    }

    fn col0(ds: &Dataset) -> Vec<f64> {
        ds.examples().iter().map(|e| e.features[0]).collect()
    }

    #[test]
    fn two_point_column() {
        let (ds, p) = normalize(&column(&[1.0, 3.0])).unwrap();
        assert_eq!(col0(&ds), [-1.0, 1.0]);
        assert_eq!((p.mean[0], p.sd[0]), (2.0, 1.0));
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let (ds, p) = normalize(&column(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(col0(&ds), [0.0, 0.0, 0.0]);
        assert_eq!(p.sd[0], 0.0);
        let (ds, _) = normalize(&column(&[0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1])).unwrap();
        assert!(col0(&ds).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_rejected() {
        let ds = Dataset::new(vec![], 1, 2).unwrap();
        assert!(matches!(normalize(&ds), Err(Error::EmptyDataset)));
    }

    fn random_dataset(seed: u64) -> Dataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ex = (0..100)
            .map(|i| {
                let f = (0..5)
                    .map(|j| rng.random_range(-3.0..7.0) * (j + 1) as f64)
                    .collect();
                LabeledExample::new(f, 1 + i % 2)
            })
            .collect();
        Dataset::new(ex, 5, 2).unwrap()
    }

    #[test]
    fn columns_standardized() {
        let (ds, _) = normalize(&random_dataset(3)).unwrap();
        let n = ds.len() as f64;
        for j in 0..5 {
            let mean = ds.examples().iter().map(|e| e.features[j]).sum::<f64>() / n;
            let var = ds
                .examples()
                .iter()
                .map(|e| (e.features[j] - mean).powi(2))
                .sum::<f64>()
                / n;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn idempotent() {
        let (once, _) = normalize(&random_dataset(9)).unwrap();
        let (twice, _) = normalize(&once).unwrap();
        for (a, b) in once.examples().iter().zip(twice.examples()) {
            for (x, y) in a.features.iter().zip(&b.features) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
