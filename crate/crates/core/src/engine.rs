//! Deterministic parallel trial execution.
//!
//! Trials are cut into fixed-size blocks independent of the worker count.
//! Each block is folded sequentially, block results are collected in block
//! order and merged pairwise, so the output is bit-identical for any pool
//! size.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::tree_merge;

pub const DEFAULT_BLOCK: u64 = 256;

#[derive(Debug)]
pub struct Engine {
    pool: rayon::ThreadPool,
    workers: usize,
    block: u64,
}

impl Engine {
    /// `workers = 0` uses one thread per available core.
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let workers = pool.current_num_threads();
        Ok(Self {
            pool,
            workers,
            block: DEFAULT_BLOCK,
        })
    }

    pub fn with_block(mut self, block: u64) -> Self {
        self.block = block.max(1);
        self
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    fn blocks(&self, trials: u64) -> Vec<Range<u64>> {
        (0..trials.div_ceil(self.block))
            .map(|b| b * self.block..((b + 1) * self.block).min(trials))
            .collect()
    }

    /// Runs `f` on every block and returns the block results in order.
    pub fn map_blocks<A, F>(&self, trials: u64, f: F) -> Result<Vec<A>>
    where
        A: Send,
        F: Fn(Range<u64>) -> Result<A> + Sync,
    {
        let blocks = self.blocks(trials);
        self.pool.install(|| blocks.into_par_iter().map(&f).collect())
    }

    /// One value per trial, in trial order.
    pub fn map_trials<T, F>(&self, trials: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync,
    {
        let blocks = self.map_blocks(trials, |r| r.map(&f).collect::<Result<Vec<T>>>())?;
        Ok(blocks.into_iter().flatten().collect())
    }

    /// Folds each block from `init()` with `step`, then merges block
    /// accumulators pairwise in block order.
    pub fn fold<A, I, S, M>(&self, trials: u64, init: I, step: S, merge: M) -> Result<A>
    where
        A: Clone + Send,
        I: Fn() -> A + Sync,
        S: Fn(&mut A, u64) -> Result<()> + Sync,
        M: Fn(&A, &A) -> A,
    {
        let parts = self.map_blocks(trials, |r| {
            let mut acc = init();
            for t in r {
                step(&mut acc, t)?;
            }
            Ok(acc)
        })?;
        Ok(tree_merge(&parts, &merge).unwrap_or_else(init))
    }
}
