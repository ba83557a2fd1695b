//! Pair matching: decide "same class" by thresholding representation
//! distance. The threshold is fit on training pairs only and accuracy is
//! reported on pairs drawn from disjoint held-out items.

use rand::seq::IndexedRandom;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::seed_path;
use crate::stimulus::StimulusSet;
use crate::targets::Target;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub distance: f64,
    pub same: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMatching {
    pub accuracy: f64,
    pub train_accuracy: f64,
    pub threshold: f64,
    pub train_pairs: usize,
    pub test_pairs: usize,
}

/// Item indices split per class into train and test halves.
pub fn split_items(labels: &[usize], seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    let mut rng = rng_from_seed(seed_path!(seed, "split"));
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let half = members.len().div_ceil(2);
        train.extend_from_slice(&members[..half]);
        test.extend_from_slice(&members[half..]);
    }
    Ok((train, test))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Balanced same/different pairs among `items`.
fn sample_pairs(
    items: &[usize],
    labels: &[usize],
    reps: &[Vec<f64>],
    n_pairs: usize,
    rng: &mut Rng,
) -> Result<Vec<LabeledPair>> {
    let mut by_class: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &i in items {
        by_class.entry(labels[i]).or_default().push(i);
    }
    let pairable: Vec<&Vec<usize>> = by_class.values().filter(|m| m.len() >= 2).collect();
    if pairable.is_empty() {
        return Err(Error::DegenerateSplit("no class has two items in a split".into()));
    }
    if by_class.len() < 2 {
        return Err(Error::DegenerateSplit("a split holds fewer than two classes".into()));
    }
    let classes: Vec<&Vec<usize>> = by_class.values().collect();
    let mut pairs = Vec::with_capacity(n_pairs);
    for k in 0..n_pairs {
        let (a, b) = if k % 2 == 0 {
            let members = pairable[rng.random_range(0..pairable.len())];
            let picked: Vec<&usize> = members.choose_multiple(rng, 2).collect();
            (*picked[0], *picked[1])
        } else {
            let picked: Vec<&&Vec<usize>> = classes.choose_multiple(rng, 2).collect();
            (
                *picked[0].choose(rng).expect("non-empty"),
                *picked[1].choose(rng).expect("non-empty"),
            )
        };
        pairs.push(LabeledPair {
            distance: distance(&reps[a], &reps[b]),
            same: labels[a] == labels[b],
        });
    }
    Ok(pairs)
}

pub fn pair_accuracy(pairs: &[LabeledPair], threshold: f64) -> f64 {
    let hits = pairs
        .iter()
        .filter(|p| (p.distance <= threshold) == p.same)
        .count();
    hits as f64 / pairs.len() as f64
}

/// Threshold maximizing training accuracy among the 0..=100th percentiles of
/// the training distances (first maximum wins).
pub fn fit_threshold(train: &[LabeledPair]) -> Result<(f64, f64)> {
    if train.is_empty() {
        return Err(Error::DegenerateSplit("no training pairs".into()));
    }
    let mut d: Vec<f64> = train.iter().map(|p| p.distance).collect();
    d.sort_by(f64::total_cmp);
    let mut best = (f64::NEG_INFINITY, -1.0);
    for q in 0..=100 {
        let idx = ((q as f64 / 100.0) * (d.len() - 1) as f64).round() as usize;
        let t = d[idx];
        let acc = pair_accuracy(train, t);
        if acc > best.1 {
            best = (t, acc);
        }
    }
    Ok(best)
}

/// Held-out pair-matching accuracy of `target`'s representation on `task`.
pub fn pair_matching_performance(
    target: &dyn Target,
    task: &StimulusSet,
    n_pairs: usize,
    split_seed: u64,
) -> Result<PairMatching> {
    let labels = task
        .labels()
        .ok_or_else(|| Error::DegenerateSplit("task set is unlabeled".into()))?;
    if n_pairs < 2 {
        return Err(Error::TooFew {
            required: 2,
            actual: n_pairs,
        });
    }
    let reps = task
        .items()
        .iter()
        .map(|x| target.evaluate(x).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let (train_items, test_items) = split_items(labels, split_seed)?;
    let mut rng = rng_from_seed(seed_path!(split_seed, "train-pairs"));
    let train = sample_pairs(&train_items, labels, &reps, n_pairs, &mut rng)?;
    let mut rng = rng_from_seed(seed_path!(split_seed, "test-pairs"));
    let test = sample_pairs(&test_items, labels, &reps, n_pairs, &mut rng)?;
    score_pairs(&train, &test)
}

/// Fits the threshold on `train` and scores it on `test`.
pub fn score_pairs(train: &[LabeledPair], test: &[LabeledPair]) -> Result<PairMatching> {
    if test.is_empty() {
        return Err(Error::DegenerateSplit("no test pairs".into()));
    }
    let (threshold, train_accuracy) = fit_threshold(train)?;
    Ok(PairMatching {
        accuracy: pair_accuracy(test, threshold),
        train_accuracy,
        threshold,
        train_pairs: train.len(),
        test_pairs: test.len(),
    })
}
