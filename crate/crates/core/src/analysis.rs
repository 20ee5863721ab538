//! Feature significance and per-class 3-sigma intervals.
//!
//! For feature `j` with class means `x̄_ij` and population variances
//! `s_i(x_j)`:
//!
//! ```text
//! ȳ_j = (1/r) Σ_i x̄_ij
//! v_j = (1/r) Σ_i (x̄_ij - ȳ_j)²
//! d_j = α · v_j / Σ_i s_i(x_j)
//! ```
//!
//! `d_j` is `+inf` when the variances sum to zero but the means differ,
//! and `0` when both are zero.

use std::io::Write;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSignificance {
    pub feature: usize,
    pub name: String,
    pub between_variance: f64,
    pub variance_sum: f64,
    pub d: f64,
    /// 1 is the most significant.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub alpha: f64,
    /// In feature order.
    pub features: Vec<FeatureSignificance>,
    /// `class_means[i][j]`, class `i + 1`.
    pub class_means: Vec<Vec<f64>>,
    pub class_sds: Vec<Vec<f64>>,
}

impl SignificanceReport {
    /// Feature indices, most significant first.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<&FeatureSignificance> = self.features.iter().collect();
        order.sort_by_key(|f| f.rank);
        order.iter().map(|f| f.feature).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["feature", "name", "v", "sum_s", "d", "rank"])?;
        for f in &self.features {
            w.write_record([
                f.feature.to_string(),
                f.name.clone(),
                f.between_variance.to_string(),
                f.variance_sum.to_string(),
                f.d.to_string(),
                f.rank.to_string(),
            ])?;
        }
        w.flush()
            .map_err(|e| Error::io("<significance report>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

type Moments = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Per-class mean and population sd, `[class][feature]`.
fn class_moments(ds: &Dataset) -> Result<Moments> {
    let (r, m) = (ds.n_classes(), ds.n_features());
    let counts = ds.class_counts();
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass { class: empty + 1 });
    }
    let mut means = vec![vec![0.0; m]; r];
    for ex in ds.examples() {
        for (acc, &x) in means[ex.label - 1].iter_mut().zip(&ex.features) {
            *acc += x;
        }
    }
    for (row, &n) in means.iter_mut().zip(&counts) {
        row.iter_mut().for_each(|v| *v /= n as f64);
    }
    let mut vars = vec![vec![0.0; m]; r];
    for ex in ds.examples() {
        let mean = &means[ex.label - 1];
        for ((acc, &x), &mu) in vars[ex.label - 1].iter_mut().zip(&ex.features).zip(mean) {
            *acc += (x - mu) * (x - mu);
        }
    }
    let sds = vars
        .into_iter()
        .zip(&counts)
        .map(|(row, &n)| row.into_iter().map(|v| (v / n as f64).sqrt()).collect())
        .collect();
    Ok((means, sds))
}

pub fn significance(ds: &Dataset, alpha: f64) -> Result<SignificanceReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    if ds.n_features() == 0 {
        return Err(Error::param("dataset has no features"));
    }
    let (means, sds) = class_moments(ds)?;
    let r = ds.n_classes() as f64;
    let names = ds.feature_names_or_default();
    let mut features: Vec<FeatureSignificance> = (0..ds.n_features())
        .map(|j| {
            let y = means.iter().map(|row| row[j]).sum::<f64>() / r;
            let v = means.iter().map(|row| (row[j] - y).powi(2)).sum::<f64>() / r;
            let s: f64 = sds.iter().map(|row| row[j] * row[j]).sum();
            let d = if s > 0.0 {
                alpha * v / s
            } else if v > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            FeatureSignificance {
                feature: j,
                name: names[j].clone(),
                between_variance: v,
                variance_sum: s,
                d,
                rank: 0,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..features.len()).collect();
    // descending d, ties by index
    order.sort_by(|&a, &b| features[b].d.total_cmp(&features[a].d).then(a.cmp(&b)));
    for (rank, &j) in order.iter().enumerate() {
        features[j].rank = rank + 1;
    }
    Ok(SignificanceReport {
        alpha,
        features,
        class_means: means,
        class_sds: sds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaInterval {
    pub class: usize,
    pub mean: f64,
    pub sd: f64,
    pub low: f64,
    pub high: f64,
}

impl SigmaInterval {
    pub fn overlaps(&self, other: &SigmaInterval) -> bool {
        self.low <= other.high && other.low <= self.high
    }
}

/// Mean ± 3σ of `feature` for every class.
pub fn three_sigma_table(ds: &Dataset, feature: usize) -> Result<Vec<SigmaInterval>> {
    if feature >= ds.n_features() {
        return Err(Error::FeatureOutOfRange {
            index: feature,
            n_features: ds.n_features(),
        });
    }
    let (means, sds) = class_moments(ds)?;
    Ok(means
        .iter()
        .zip(&sds)
        .enumerate()
        .map(|(i, (mu, sd))| SigmaInterval {
            class: i + 1,
            mean: mu[feature],
            sd: sd[feature],
            low: mu[feature] - 3.0 * sd[feature],
            high: mu[feature] + 3.0 * sd[feature],
        })
        .collect())
}

pub fn write_sigma_csv<W: Write>(ds: &Dataset, features: &[usize], writer: W) -> Result<()> {
    let names = ds.feature_names_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "feature", "name", "class", "label", "mean", "sd", "low", "high",
    ])?;
    for &j in features {
        for iv in three_sigma_table(ds, j)? {
            let label = ds.class_labels()[iv.class - 1];
            w.write_record([
                j.to_string(),
                names[j].clone(),
                iv.class.to_string(),
                label.to_string(),
                iv.mean.to_string(),
                iv.sd.to_string(),
                iv.low.to_string(),
                iv.high.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<sigma table>", e))?;
    Ok(())
}
