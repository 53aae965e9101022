//! Counter-addressable random streams.
//!
//! Every variate is a pure function of `(seed, phase, iteration, index)`.
//! The seed keys a ChaCha8 generator, `(phase, iteration)` selects its
//! 64-bit nonce, and the draw index selects the word position. Sample `k`
//! of a batch with `stride` draws per sample always reads draws
//! `counter + k * stride .. counter + (k + 1) * stride`, so any split of
//! the index range across workers reproduces the same numbers.

use std::f64::consts::SQRT_2;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

/// Samples handed to one worker at a time.
const CHUNK: usize = 1024;

/// Which part of an experiment a stream feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pilot,
    Init,
    FinalIs,
    Baseline,
}

impl Phase {
    fn tag(self) -> u64 {
        match self {
            Phase::Pilot => 1,
            Phase::Init => 2,
            Phase::FinalIs => 3,
            Phase::Baseline => 4,
        }
    }
}

/// Coordinates of a reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub phase: Phase,
    pub iteration: u32,
    /// Index of the first draw (in 64-bit units) used by the stream.
    pub counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, phase: Phase) -> Self {
        Self {
            seed,
            phase,
            iteration: 0,
            counter: 0,
        }
    }

    pub fn at_iteration(self, iteration: u32) -> Self {
        Self { iteration, ..self }
    }

    pub fn with_counter(self, counter: u64) -> Self {
        Self { counter, ..self }
    }

    fn nonce(&self) -> u64 {
        (self.phase.tag() << 32) | u64::from(self.iteration)
    }

    /// A cursor positioned at draw `counter + offset`.
    pub fn cursor(&self, offset: u64) -> StreamCursor {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.nonce());
        let mut cursor = StreamCursor { rng };
        cursor.seek(self.counter + offset);
        cursor
    }

    /// Evaluate `f` once per sample index in `0..n`, in parallel, returning
    /// results in index order. The cursor passed for sample `k` starts at
    /// draw `k * stride`; `f` may consume up to `stride` draws.
    pub fn map_samples<T, F>(&self, n: usize, stride: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &mut StreamCursor) -> T + Sync,
    {
        assert!(stride >= 1, "stride must be positive");
        let chunks = n.div_ceil(CHUNK);
        let per_chunk: Vec<Vec<T>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(n);
                let mut cursor = self.cursor((start * stride) as u64);
                let mut out = Vec::with_capacity(end - start);
                for k in start..end {
                    out.push(f(k, &mut cursor));
                    cursor.seek(self.counter + ((k + 1) * stride) as u64);
                }
                out
            })
            .collect();
        per_chunk.into_iter().flatten().collect()
    }
}

/// Sequential reader over a stream.
#[derive(Clone, Debug)]
pub struct StreamCursor {
    rng: ChaCha8Rng,
}

impl StreamCursor {
    fn word_pos(draw: u64) -> u128 {
        u128::from(draw) * 2
    }

    fn seek(&mut self, draw: u64) {
        let target = Self::word_pos(draw);
        if self.rng.get_word_pos() != target {
            self.rng.set_word_pos(target);
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1), 52 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }

    /// Standard normal by inversion of one uniform.
    pub fn std_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.uniform())
    }
}

/// Φ⁻¹(u) for u in (0, 1).
pub fn inverse_normal_cdf(u: f64) -> f64 {
    // 1 - u is exact for u >= 0.5, so both tails keep full relative precision.
    if u < 0.5 {
        -SQRT_2 * erfc_inv(2.0 * u)
    } else {
        SQRT_2 * erfc_inv(2.0 * (1.0 - u))
    }
}
