//! Counter-based Monte Carlo.
//!
//! Every sample index owns its own ChaCha8 stream (key = seed, stream =
//! index), so the draws of sample `i` never depend on how the index range is
//! split between workers. Work is cut into fixed-size chunks whose partial
//! sums are merged in index order, which makes every estimate bit-identical
//! for any worker count.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{NumericsError, Result, SphereDirection};

pub type StreamRng = ChaCha8Rng;

/// Samples per reduction chunk. Fixed so that the reduction tree does not
/// depend on the worker count.
pub const CHUNK_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub samples: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(seed: u64, samples: u64, workers: usize) -> Result<Self> {
        let mc = McConfig {
            seed,
            samples,
            workers,
        };
        mc.validate()?;
        Ok(mc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(NumericsError::InvalidMcConfig("samples must be at least 1"));
        }
        if self.workers == 0 {
            return Err(NumericsError::InvalidMcConfig("workers must be at least 1"));
        }
        Ok(())
    }

    pub fn with_samples(self, samples: u64) -> Self {
        McConfig { samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        McConfig { seed, ..self }
    }
}

/// The random stream of sample `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform direction on the unit sphere in `n` dimensions (normalized
/// Gaussian vector).
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = super::norm(&v);
        if norm > 1e-150 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform point in the ball of radius `radius` about `center`.
pub fn uniform_ball_point<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let n = center.len();
    let dir = uniform_direction(rng, n);
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / n as f64);
    center.iter().zip(dir).map(|(c, d)| c + r * d).collect()
}

/// Directions `0..mc.samples` of the uniform sphere stream for `seed`.
pub fn sample_sphere(n: usize, mc: McConfig) -> Result<impl Iterator<Item = SphereDirection>> {
    if n < 2 {
        return Err(NumericsError::InvalidDimension { got: n, min: 2 });
    }
    mc.validate()?;
    Ok((0..mc.samples).map(move |i| {
        let mut rng = stream_rng(mc.seed, i);
        SphereDirection::from_normalized(uniform_direction(&mut rng, n))
    }))
}

fn chunks(samples: u64) -> Vec<Range<u64>> {
    (0..samples.div_ceil(CHUNK_SIZE))
        .map(|c| c * CHUNK_SIZE..((c + 1) * CHUNK_SIZE).min(samples))
        .collect()
}

/// Maps fixed-size index chunks on `mc.workers` threads; results come back
/// in index order.
pub fn par_map_chunks<T, F>(mc: &McConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    mc.validate()?;
    let ranges = chunks(mc.samples);
    if mc.workers == 1 {
        return Ok(ranges.into_iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.workers)
        .build()
        .map_err(|_| NumericsError::InvalidMcConfig("could not start worker pool"))?;
    Ok(pool.install(|| ranges.into_par_iter().map(&f).collect()))
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    // Chan et al. pairwise merge
    fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }
}

/// Estimates the means of `K` per-sample quantities. `sample(i, rng)` gets the
/// stream of index `i`; all `K` outputs share it, so differences between
/// components keep their correlation.
pub fn mc_estimate<const K: usize, F>(mc: &McConfig, sample: F) -> Result<[McEstimate; K]>
where
    F: Fn(u64, &mut StreamRng) -> [f64; K] + Sync,
{
    let parts = par_map_chunks(mc, |range| {
        let mut acc = [Moments::default(); K];
        for i in range {
            let mut rng = stream_rng(mc.seed, i);
            let xs = sample(i, &mut rng);
            for (a, x) in acc.iter_mut().zip(xs) {
                a.push(x);
            }
        }
        acc
    })?;
    let total = parts
        .into_iter()
        .fold([Moments::default(); K], |mut acc, part| {
            for (a, p) in acc.iter_mut().zip(part) {
                *a = a.merge(p);
            }
            acc
        });
    Ok(total.map(|m| {
        let var = if m.count > 1.0 {
            m.m2 / (m.count - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean: m.mean,
            std_error: (var / m.count).sqrt(),
            samples: mc.samples,
        }
    }))
}
