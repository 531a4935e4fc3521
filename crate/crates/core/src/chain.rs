//! Chain configuration, retained draws and multi-chain plumbing shared by
//! both Gibbs samplers.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pig::PigSamplerConfig;
use crate::rng::{RngState, GENERATOR_NAME};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub pig_config: PigSamplerConfig,
    /// Share one concentration across all categories.
    pub homogeneous: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            burn_in: 500,
            thin: 1,
            seed: 1,
            pig_config: PigSamplerConfig::GIBBS,
            homogeneous: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be less than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        self.pig_config.validate()
    }

    /// `floor((iterations - burn_in) / thin)`.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    /// Whether sweep `iter` (1-based) is kept.
    pub fn keeps(&self, iter: usize) -> bool {
        iter > self.burn_in && (iter - self.burn_in).is_multiple_of(self.thin)
    }
}

/// Run metadata echoed next to the draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub sampler: String,
    pub augmentation: String,
    pub seed: u64,
    pub generator: String,
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub trunc_terms: usize,
    pub tail_horizon: usize,
    pub homogeneous: bool,
    /// Sweeps in which some `n_mk + α_k - 1` was negative (Dirichlet only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_shift_sweeps: Option<usize>,
    pub wall_time_secs: f64,
}

impl ChainMeta {
    pub fn new(sampler: &str, augmentation: &str, config: &ChainConfig) -> Self {
        Self {
            sampler: sampler.into(),
            augmentation: augmentation.into(),
            seed: config.seed,
            generator: GENERATOR_NAME.into(),
            chains: 1,
            iterations: config.iterations,
            burn_in: config.burn_in,
            thin: config.thin,
            trunc_terms: config.pig_config.trunc_terms,
            tail_horizon: config.pig_config.tail_horizon,
            homogeneous: config.homogeneous,
            negative_shift_sweeps: None,
            wall_time_secs: 0.0,
        }
    }
}

/// Retained draws, one row per kept sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub names: Vec<String>,
    /// Sweep index of each row, counted from 1 within its chain.
    pub iters: Vec<usize>,
    pub chain_ids: Vec<usize>,
    pub draws: Vec<Vec<f64>>,
    pub meta: ChainMeta,
}

impl PosteriorSamples {
    pub fn new(names: Vec<String>, meta: ChainMeta) -> Self {
        Self {
            names,
            iters: Vec::new(),
            chain_ids: Vec::new(),
            draws: Vec::new(),
            meta,
        }
    }

    pub fn push(&mut self, iter: usize, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.names.len());
        self.iters.push(iter);
        self.chain_ids.push(0);
        self.draws.push(row);
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|r| r[j]).collect()
    }

    /// Concatenate chains in order, tagging rows with their chain index.
    pub fn concat(chains: Vec<PosteriorSamples>) -> Result<Self> {
        let mut iter = chains.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::Config("no chains to merge".into()))?;
        let mut n_chains = 1;
        let mut negative = out.meta.negative_shift_sweeps;
        let mut wall = out.meta.wall_time_secs;
        for (c, chain) in iter.enumerate() {
            if chain.names != out.names {
                return Err(Error::Config("chains disagree on parameter names".into()));
            }
            out.iters.extend(chain.iters);
            out.chain_ids
                .extend(std::iter::repeat_n(c + 1, chain.draws.len()));
            out.draws.extend(chain.draws);
            negative = match (negative, chain.meta.negative_shift_sweeps) {
                (Some(a), Some(b)) => Some(a + b),
                (a, b) => a.or(b),
            };
            wall = wall.max(chain.meta.wall_time_secs);
            n_chains += 1;
        }
        out.meta.chains = n_chains;
        out.meta.negative_shift_sweeps = negative;
        out.meta.wall_time_secs = wall;
        Ok(out)
    }
}

/// Stream used by chain `index` of a run seeded with `seed`.
pub fn chain_stream(seed: u64, index: usize) -> RngState {
    RngState::new(seed).child(index as u64)
}

/// Run `n_chains` chains concurrently, each on its own derived stream, and
/// concatenate the results in chain order.
pub fn run_chains<F>(seed: u64, n_chains: usize, run: F) -> Result<PosteriorSamples>
where
    F: Fn(RngState) -> Result<PosteriorSamples> + Sync,
{
    if n_chains == 0 {
        return Err(Error::Config("chains must be at least 1".into()));
    }
    let results: Vec<Result<PosteriorSamples>> = (0..n_chains)
        .into_par_iter()
        .map(|c| run(chain_stream(seed, c)))
        .collect();
    PosteriorSamples::concat(results.into_iter().collect::<Result<Vec<_>>>()?)
}

pub(crate) struct Stopwatch(Instant);

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self(Instant::now())
    }

    pub(crate) fn secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retained_count_matches_keeps() {
        for (iters, burn, thin) in [(10, 0, 1), (10, 3, 2), (2000, 500, 3), (7, 6, 5)] {
            let c = ChainConfig {
                iterations: iters,
                burn_in: burn,
                thin,
                ..Default::default()
            };
            c.validate().unwrap();
            let kept = (1..=iters).filter(|&i| c.keeps(i)).count();
            assert_eq!(kept, c.retained());
        }
    }

    #[test]
    fn config_rejects_bad_values() {
        let base = ChainConfig::default();
        assert!(ChainConfig {
            burn_in: 2000,
            ..base
        }
        .validate()
        .is_err());
        assert!(ChainConfig { thin: 0, ..base }.validate().is_err());
        assert!(ChainConfig {
            iterations: 0,
            ..base
        }
        .validate()
        .is_err());
    }

    #[test]
    fn concat_tags_chains() {
        let meta = ChainMeta::new("t", "x", &ChainConfig::default());
        let mut a = PosteriorSamples::new(vec!["alpha".into()], meta.clone());
        a.push(1, vec![1.0]);
        let mut b = PosteriorSamples::new(vec!["alpha".into()], meta);
        b.push(1, vec![2.0]);
        b.push(2, vec![3.0]);
        let m = PosteriorSamples::concat(vec![a, b]).unwrap();
        assert_eq!(m.chain_ids, vec![0, 1, 1]);
        assert_eq!(m.iters, vec![1, 1, 2]);
        assert_eq!(m.meta.chains, 2);
    }

    #[test]
    fn chain_streams_differ() {
        let mut a = chain_stream(5, 0);
        let mut b = chain_stream(5, 1);
        assert_ne!(a.uniform(), b.uniform());
    }
}
