//! Monte Carlo estimate of `H_{q_k}(y) = μ(M_{q_k} > q_k y)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CirclePoint, MaximumSampler, SimError};
use crate::cf::ConvergentTable;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSurvival {
    pub y_grid: Vec<f64>,
    /// `counts[i]` samples had `M_{q_k} > q_k · y_grid[i]`.
    pub counts: Vec<u64>,
    pub n_samples: u64,
    pub seed: u64,
    pub k: usize,
    /// Samples abandoned on a precision or depth error.
    pub aborted: u64,
}

impl EmpiricalSurvival {
    /// `Ĥ(y_i) = counts[i] / n_samples`.
    pub fn estimates(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n_samples as f64)
            .collect()
    }
}

/// The `i`-th sample point: a nonzero dyadic rational `u / 2^64` drawn from
/// the ChaCha stream `i` under `seed`.
pub fn sample_point(seed: u64, i: u64) -> CirclePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    loop {
        let u = rng.next_u64();
        if u != 0 {
            return CirclePoint::from_dyadic(u);
        }
    }
}

/// Estimates `H_{q_k}` on a sorted grid from `n_samples` uniform points.
///
/// Each sample has its own RNG stream and the tallies are integer sums, so
/// the result does not depend on the number of workers.
pub fn empirical_survival(
    table: &ConvergentTable,
    k: usize,
    n_samples: u64,
    seed: u64,
    y_grid: &[f64],
    options: &SamplingOptions,
) -> Result<EmpiricalSurvival, SimError> {
    if n_samples == 0 {
        return Err(SimError::InvalidInput("n_samples must be at least 1".into()));
    }
    let thresholds = y_grid
        .iter()
        .map(|&y| {
            BigRational::from_f64(y).ok_or_else(|| SimError::InvalidInput(format!("grid value {y} is not finite")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(SimError::InvalidInput("y grid must be sorted".into()));
    }
    let qk = table.q(k)?.clone();
    let sampler = MaximumSampler::new(table.spec(), qk.clone())?;

    // Number of grid points with M > q_k y, i.e. M·den(y) > num(y)·q_k.
    let exceeded = |m: &BigInt| -> usize {
        thresholds.partition_point(|y| m * y.denom() > y.numer() * &qk)
    };
    let run = || -> Vec<Option<usize>> {
        (0..n_samples)
            .into_par_iter()
            .map(|i| sampler.sample(&sample_point(seed, i)).ok().map(|s| exceeded(&s.value)))
            .collect()
    };
    let outcomes = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?
            .install(run),
        None => run(),
    };

    let mut hist = vec![0u64; y_grid.len() + 1];
    let mut aborted = 0u64;
    for o in outcomes {
        match o {
            Some(j) => hist[j] += 1,
            None => aborted += 1,
        }
    }
    // A sample counted in hist[j] exceeds the first j grid points.
    let mut counts = vec![0u64; y_grid.len()];
    let mut acc = 0u64;
    for i in (0..y_grid.len()).rev() {
        acc += hist[i + 1];
        counts[i] = acc;
    }
    Ok(EmpiricalSurvival {
        y_grid: y_grid.to_vec(),
        counts,
        n_samples,
        seed,
        k,
        aborted,
    })
}
