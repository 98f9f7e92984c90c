use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, Example, TrainConfig, TrainingError};
use crate::neural::Network;

/// `tot`: share of examples whose whole crisp output matches the target.
/// `part`: share of individual outputs that match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tot: f64,
    pub part: f64,
    pub n: usize,
    pub k: usize,
}

impl Metrics {
    /// Unweighted mean of `tot` and `part`; `n` is summed.
    pub fn mean(ms: &[Metrics]) -> Metrics {
        if ms.is_empty() {
            return Metrics {
                tot: 0.0,
                part: 0.0,
                n: 0,
                k: 0,
            };
        }
        let len = ms.len() as f64;
        Metrics {
            tot: ms.iter().map(|m| m.tot).sum::<f64>() / len,
            part: ms.iter().map(|m| m.part).sum::<f64>() / len,
            n: ms.iter().map(|m| m.n).sum(),
            k: ms[0].k,
        }
    }
}

/// Compare crisp outputs with targets. An output inside the `a_min` band
/// reads as unknown and matches only an unknown target.
pub fn evaluate(net: &Network, data: &[Example]) -> Result<Metrics, TrainingError> {
    let k = net.n_outputs();
    let mut whole = 0usize;
    let mut single = 0usize;
    for ex in data {
        if ex.target.len() != k {
            return Err(TrainingError::DimensionMismatch {
                expected: k,
                found: ex.target.len(),
            });
        }
        let out = net.forward(&ex.input)?.crisp;
        let hits = out.iter().zip(&ex.target).filter(|(o, c)| o == c).count();
        single += hits;
        if hits == k {
            whole += 1;
        }
    }
    let n = data.len();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(Metrics {
        tot: ratio(whole, n),
        part: ratio(single, n * k),
        n,
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub seed: u64,
    pub fold: usize,
    pub train_n: usize,
    pub test_n: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub mean: Metrics,
    pub folds: Vec<FoldResult>,
}

/// Indices `0..n` shuffled by `seed` and dealt into `folds` nearly equal
/// contiguous parts.
pub fn partition(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = n / folds + usize::from(f < n % folds);
        out.push(idx[start..start + len].to_vec());
        start += len;
    }
    out
}

/// k-fold cross-validation repeated for each seed. `builder(seed, fold)`
/// supplies the untrained network; training uses `cfg` with its seed
/// replaced by one derived from `(seed, fold)`. Folds run in parallel and
/// are reported in `(seed, fold)` order.
pub fn cross_validate<F>(
    builder: F,
    data: &[Example],
    folds: usize,
    seeds: &[u64],
    cfg: &TrainConfig,
) -> Result<CvReport, TrainingError>
where
    F: Fn(u64, usize) -> Network + Sync,
{
    if folds < 2 || data.len() < folds {
        return Err(TrainingError::TooFewExamples {
            n: data.len(),
            folds,
        });
    }
    cfg.validate()?;
    let jobs: Vec<(u64, usize, Vec<Vec<usize>>)> = seeds
        .iter()
        .flat_map(|&s| {
            let parts = partition(data.len(), folds, s);
            (0..folds).map(move |f| (s, f, parts.clone()))
        })
        .collect();
    let results: Result<Vec<FoldResult>, TrainingError> = jobs
        .par_iter()
        .map(|(seed, fold, parts)| {
            let test: Vec<Example> = parts[*fold].iter().map(|&i| data[i].clone()).collect();
            let train_set: Vec<Example> = parts
                .iter()
                .enumerate()
                .filter(|(f, _)| f != fold)
                .flat_map(|(_, p)| p.iter().map(|&i| data[i].clone()))
                .collect();
            let fold_cfg = TrainConfig {
                seed: seed.wrapping_mul(1_000_003).wrapping_add(*fold as u64),
                ..*cfg
            };
            let net = train(&builder(*seed, *fold), &train_set, &fold_cfg)?.network;
            Ok(FoldResult {
                seed: *seed,
                fold: *fold,
                train_n: train_set.len(),
                test_n: test.len(),
                metrics: evaluate(&net, &test)?,
            })
        })
        .collect();
    let folds = results?;
    let ms: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
    Ok(CvReport {
        mean: Metrics::mean(&ms),
        folds,
    })
}
