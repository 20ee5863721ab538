use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::decision::winner;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of each class sent to the first (training) part.
    pub train_fraction: f64,
    pub seed: u64,
    /// Split whole recordings instead of segments, so no recording
    /// contributes to both parts.
    pub by_recording: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            seed,
            by_recording: false,
        }
    }
}

/// Largest-remainder allocation of `round(fraction * total)` training units
/// across classes, lower class index winning equal remainders.
fn apportion(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let target = (fraction * total as f64).round() as usize;
    let quotas: Vec<f64> = sizes.iter().map(|&n| fraction * n as f64).collect();
    let mut take: Vec<usize> = quotas
        .iter()
        .zip(sizes)
        .map(|(q, &n)| (q.floor() as usize).min(n))
        .collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = target.saturating_sub(take.iter().sum());
    for &c in order.iter().cycle().take(order.len() * 2) {
        if missing == 0 {
            break;
        }
        if take[c] < sizes[c] {
            take[c] += 1;
            missing -= 1;
        }
    }
    take
}

/// Class-stratified random partition into (train, evaluation).
///
/// Units are examples, or whole recordings when `by_recording` is set (a
/// recording's class is its majority label). Both parts keep the original
/// example order.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::param(format!(
            "train fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    // units[class] = list of example-index groups
    let mut units: Vec<Vec<Vec<usize>>> = vec![Vec::new(); ds.n_classes()];
    if spec.by_recording {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, ex) in ds.examples().iter().enumerate() {
            let id = ex.recording_id.as_deref().ok_or_else(|| {
                Error::param(format!(
                    "example {i} has no recording id for a by-recording split"
                ))
            })?;
            groups.entry(id).or_default().push(i);
        }
        for members in groups.into_values() {
            let mut hist = vec![0usize; ds.n_classes()];
            for &i in &members {
                hist[ds.examples()[i].label - 1] += 1;
            }
            units[winner(&hist) - 1].push(members);
        }
    } else {
        for (i, ex) in ds.examples().iter().enumerate() {
            units[ex.label - 1].push(vec![i]);
        }
    }
    if let Some((q, u)) = units.iter().enumerate().find(|(_, u)| u.len() < 2) {
        return Err(Error::ClassTooSmall {
            class: q + 1,
            count: u.len(),
            needed: 2,
        });
    }

    let sizes: Vec<usize> = units.iter().map(Vec::len).collect();
    let take = apportion(&sizes, spec.train_fraction);
    let mut rng = stream_rng(spec.seed, "split", 0);
    let mut in_train = vec![false; ds.len()];
    for (class_units, k) in units.iter_mut().zip(take) {
        class_units.shuffle(&mut rng);
        for unit in &class_units[..k] {
            for &i in unit {
                in_train[i] = true;
            }
        }
    }
    let (train, eval): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| in_train[i]);
    Ok((ds.subset(&train), ds.subset(&eval)))
}
