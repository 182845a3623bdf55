//! Monte-Carlo replay of the sampling algorithm itself.
//!
//! Each episode actually samples `x_t ~ beta(O+1, Z+1)` and predicts 1 iff
//! `x_t > q`, exactly as the algorithm is stated. The threshold is strict;
//! the sampler is continuous, so the boundary event has probability zero and
//! no tie policy is needed. Used to validate the exact engine end to end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution};

use crate::error::Error;
use crate::prediction::{BitSequence, TradeoffParameter};

/// One simulated run of the algorithm over a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Realized weighted loss: q per false positive, 1-q per false negative.
    pub realized_loss: f64,
    /// 1-indexed positions where the prediction was wrong.
    pub error_positions: Vec<usize>,
    pub seed: u64,
}

/// Draw from `beta(a, b)` with integer counts.
pub fn sample_beta_int<R: Rng + ?Sized>(a: u64, b: u64, rng: &mut R) -> Result<f64, Error> {
    if a < 1 || b < 1 {
        return Err(Error::Domain(format!("beta parameters must be >= 1, got ({a},{b})")));
    }
    let dist = Beta::new(a as f64, b as f64)
        .map_err(|e| Error::Domain(format!("beta sampler rejected ({a},{b}): {e}")))?;
    Ok(dist.sample(rng))
}

/// Replay one episode deterministically from a seed.
pub fn run_episode(
    seq: &BitSequence,
    q: TradeoffParameter,
    seed: u64,
) -> Result<EpisodeResult, Error> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let qf = q.as_f64();
    let (mut ones, mut zeros) = (0u64, 0u64);
    let mut loss = 0.0f64;
    let mut errors = Vec::new();
    for (i, &bit) in seq.bits().iter().enumerate() {
        let x = sample_beta_int(ones + 1, zeros + 1, &mut rng)?;
        let prediction = u8::from(x > qf);
        if prediction != bit {
            errors.push(i + 1);
            loss += if prediction == 1 { qf } else { 1.0 - qf };
        }
        if bit == 1 {
            ones += 1;
        } else {
            zeros += 1;
        }
    }
    Ok(EpisodeResult { realized_loss: loss, error_positions: errors, seed })
}

/// Sample mean and standard error of the realized loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// splitmix64; derives independent per-episode seeds from one master seed.
fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Average the realized loss over independent episodes.
pub fn monte_carlo(
    seq: &BitSequence,
    q: TradeoffParameter,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, Error> {
    if trials < 2 {
        return Err(Error::Domain(format!("need trials >= 2, got {trials}")));
    }
    // Welford's streaming mean/variance; order-insensitive up to roundoff.
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for i in 0..trials {
        let loss = run_episode(seq, q, derive_seed(seed, i))?.realized_loss;
        let delta = loss - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (loss - mean);
    }
    let variance = m2 / (trials - 1) as f64;
    Ok(MonteCarloEstimate {
        mean,
        stderr: (variance / trials as f64).sqrt(),
        trials,
    })
}
