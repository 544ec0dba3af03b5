//! Minibatch index sampling and the minibatched gradient source.

use super::{GradientSource, Objective, ObjectiveError};
use crate::core::{NoiseSource, ParamVector};

/// m indices sampled uniformly without replacement from [0, n).
///
/// Partial Fisher-Yates over a scratch permutation; consumes exactly m draws
/// from the noise source.
pub fn minibatch_sampler(
    n: usize,
    m: usize,
    noise: &mut dyn NoiseSource,
) -> Result<Vec<usize>, ObjectiveError> {
    if m > n {
        return Err(ObjectiveError::BatchTooLarge { m, n });
    }
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = i + noise.index_below(n - i);
        pool.swap(i, j);
    }
    pool.truncate(m);
    Ok(pool)
}

/// How successive minibatches are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchMode {
    /// A fresh without-replacement draw every step.
    Independent,
    /// Shuffle [0, n) once per epoch and hand out consecutive slices.
    Epoch,
}

/// Wraps an objective with per-step minibatch selection.
pub struct Minibatches<'a, O: Objective> {
    objective: &'a O,
    m: usize,
    mode: BatchMode,
    perm: Vec<usize>,
    cursor: usize,
}

impl<'a, O: Objective> Minibatches<'a, O> {
    pub fn new(objective: &'a O, m: usize, mode: BatchMode) -> Result<Self, ObjectiveError> {
        let n = objective.n_data();
        if m == 0 || m > n {
            return Err(ObjectiveError::BatchTooLarge { m, n });
        }
        Ok(Self {
            objective,
            m,
            mode,
            perm: (0..n).collect(),
            cursor: 0,
        })
    }

    fn next_batch(&mut self, noise: &mut dyn NoiseSource) -> Result<Vec<usize>, ObjectiveError> {
        let n = self.objective.n_data();
        match self.mode {
            BatchMode::Independent => minibatch_sampler(n, self.m, noise),
            BatchMode::Epoch => {
                // Reshuffle when the remaining slice cannot fill a batch.
                if self.cursor + self.m > n {
                    self.cursor = 0;
                }
                if self.cursor == 0 {
                    for i in 0..n.saturating_sub(1) {
                        let j = i + noise.index_below(n - i);
                        self.perm.swap(i, j);
                    }
                }
                let batch = self.perm[self.cursor..self.cursor + self.m].to_vec();
                self.cursor += self.m;
                Ok(batch)
            }
        }
    }
}

impl<O: Objective> GradientSource for Minibatches<'_, O> {
    fn dim(&self) -> usize {
        self.objective.dim()
    }

    fn eval(
        &mut self,
        _step: u64,
        theta: &ParamVector,
        noise: &mut dyn NoiseSource,
    ) -> Result<(f64, ParamVector), ObjectiveError> {
        let batch = self.next_batch(noise)?;
        self.objective.eval_batch(theta, &batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::RngStream;

    #[test]
    fn full_batch_is_a_permutation() {
        let mut rng = RngStream::new(5);
        let mut idx = minibatch_sampler(10, 10, &mut rng).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn batch_too_large_is_an_error() {
        let mut rng = RngStream::new(5);
        assert!(minibatch_sampler(4, 5, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_index_stream() {
        let mut a = RngStream::new(11);
        let mut b = RngStream::new(11);
        for _ in 0..50 {
            assert_eq!(
                minibatch_sampler(100, 7, &mut a).unwrap(),
                minibatch_sampler(100, 7, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn draws_are_uniform() {
        // Over 1e5 batches of m = 2 from n = 10, each index appears with
        // frequency 0.2; binomial 3σ band is 0.2 ± 3·√(0.2·0.8/1e5).
        let mut rng = RngStream::new(77);
        let trials = 100_000usize;
        let mut counts = [0usize; 10];
        for _ in 0..trials {
            for i in minibatch_sampler(10, 2, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        let sigma = (0.2 * 0.8 / trials as f64).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / trials as f64;
            assert!(
                (freq - 0.2).abs() <= 3.0 * sigma,
                "index {i}: frequency {freq} outside 0.2 ± {}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn without_replacement_within_batch() {
        let mut rng = RngStream::new(123);
        for _ in 0..200 {
            let mut batch = minibatch_sampler(20, 8, &mut rng).unwrap();
            batch.sort_unstable();
            batch.dedup();
            assert_eq!(batch.len(), 8);
        }
    }

    #[test]
    fn epoch_mode_partitions_each_epoch() {
        struct Six;
        impl Objective for Six {
            fn dim(&self) -> usize {
                1
            }
            fn n_data(&self) -> usize {
                6
            }
            fn eval_batch(
                &self,
                _theta: &ParamVector,
                _batch: &[usize],
            ) -> Result<(f64, ParamVector), ObjectiveError> {
                Ok((0.0, ParamVector::zeros(1)))
            }
        }
        let six = Six;
        let mut mb = Minibatches::new(&six, 2, BatchMode::Epoch).unwrap();
        let mut rng = RngStream::new(9);
        let mut epoch: Vec<usize> = Vec::new();
        for _ in 0..3 {
            epoch.extend(mb.next_batch(&mut rng).unwrap());
        }
        epoch.sort_unstable();
        assert_eq!(epoch, (0..6).collect::<Vec<_>>());
    }
}
