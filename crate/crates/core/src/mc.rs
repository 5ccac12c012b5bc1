//! Chunked, reproducible Monte Carlo.
//!
//! `samples` draws are split into `chunks` contiguous blocks; block `c` uses
//! stream `c` of the generator seeded by `seed`. Block results are merged in
//! block order, so the output depends on `(seed, chunks)` only and not on the
//! number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::tensor::{seeded_rng, CMat, SimRng, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub chunks: usize,
}

impl McConfig {
    pub const DEFAULT_CHUNKS: usize = 64;

    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, chunks: Self::DEFAULT_CHUNKS }
    }

    pub fn with_chunks(mut self, chunks: usize) -> Self {
        self.chunks = chunks.max(1);
        self
    }

    fn ranges(&self) -> Vec<(u64, usize)> {
        let chunks = self.chunks.max(1).min(self.samples.max(1));
        (0..chunks)
            .map(|c| {
                let lo = self.samples * c / chunks;
                let hi = self.samples * (c + 1) / chunks;
                (c as u64, hi - lo)
            })
            .collect()
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    /// `|mean - target| <= max(k·stderr, floor)`.
    pub fn agrees_with(&self, target: f64, k: f64, floor: f64) -> bool {
        (self.mean - target).abs() <= (k * self.stderr).max(floor)
    }
}

/// Welford accumulator; merged with the pairwise update.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        let mean = self.mean + delta * o.n as f64 / n as f64;
        let m2 = self.m2 + o.m2 + delta * delta * (self.n as f64 * o.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    fn estimate(self) -> Estimate {
        let n = self.n as f64;
        let var = if self.n > 1 { self.m2 / (n - 1.0) } else { 0.0 };
        Estimate { mean: self.mean, stderr: (var / n).sqrt(), samples: self.n }
    }
}

/// Mean of `sample(rng)` over `cfg.samples` draws.
pub fn estimate<F>(cfg: &McConfig, sample: F) -> Estimate
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    estimate_many::<1, _>(cfg, |rng| [sample(rng)])[0]
}

/// Joint means of `K` statistics computed from the same draws.
pub fn estimate_many<const K: usize, F>(cfg: &McConfig, sample: F) -> [Estimate; K]
where
    F: Fn(&mut SimRng) -> [f64; K] + Sync,
{
    let parts: Vec<[Moments; K]> = cfg
        .ranges()
        .into_par_iter()
        .map(|(stream, n)| {
            let mut rng = seeded_rng(cfg.seed, stream);
            let mut m = [Moments::default(); K];
            for _ in 0..n {
                let xs = sample(&mut rng);
                for k in 0..K {
                    m[k].push(xs[k]);
                }
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold([Moments::default(); K], |acc, m| {
        let mut out = acc;
        for k in 0..K {
            out[k] = acc[k].merge(m[k]);
        }
        out
    });
    total.map(Moments::estimate)
}

/// Entrywise mean of a matrix-valued sample.
pub fn mean_matrix<F>(cfg: &McConfig, rows: usize, cols: usize, sample: F) -> CMat
where
    F: Fn(&mut SimRng) -> CMat + Sync,
{
    let parts: Vec<CMat> = cfg
        .ranges()
        .into_par_iter()
        .map(|(stream, n)| {
            let mut rng = seeded_rng(cfg.seed, stream);
            let mut acc = CMat::zeros(rows, cols);
            for _ in 0..n {
                acc += sample(&mut rng);
            }
            acc
        })
        .collect();
    let sum = parts.into_iter().fold(CMat::zeros(rows, cols), |a, b| a + b);
    sum / C64::new(cfg.samples as f64, 0.0)
}

/// Runs `f(index, rng)` for `index in 0..count`, each with its own stream.
pub fn map_indexed<T, F>(count: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> T + Sync,
{
    (0..count).into_par_iter().map(|i| f(i, &mut seeded_rng(seed, i as u64))).collect()
}
