//! Antipodal abstraction of on-off keying over an AWGN channel, with soft
//! and hard LLR front ends and the seeded random streams used by every
//! Monte-Carlo routine.
//!
//! Bit 1 (LED on) maps to `+1`, bit 0 to `-1`. The SNR is Es/N0 with unit
//! symbol energy, so the noise standard deviation per sample is
//! `sqrt(1 / (2 Es/N0))`. LLRs are positive when bit 0 is more likely.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::frame::BitFrame;

/// Crossover probabilities are clamped into this interval before forming
/// hard-decision LLR magnitudes.
pub const MIN_CROSSOVER: f64 = 1e-12;
pub const MAX_CROSSOVER: f64 = 0.5;

/// Random stream used for one Monte-Carlo trial.
pub type TrialRng = ChaCha8Rng;

const TRIAL_BITS: u32 = 40;

/// Stream for trial `trial` of sweep point `point` under `master_seed`.
///
/// The master seed keys a ChaCha8 generator and `(point, trial)` selects one
/// of its independent 64-bit stream ids, so any trial can be regenerated in
/// isolation and the result does not depend on scheduling.
pub fn trial_rng(master_seed: u64, point: u64, trial: u64) -> TrialRng {
    assert!(trial < 1 << TRIAL_BITS, "trial index {trial} exceeds 2^{TRIAL_BITS}");
    assert!(point < 1 << (64 - TRIAL_BITS), "point index {point} exceeds 2^{}", 64 - TRIAL_BITS);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((point << TRIAL_BITS) | trial);
    rng
}

/// Channel operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    snr_db: f64,
    sigma: f64,
}

impl ChannelParams {
    pub fn new(snr_db: f64) -> Result<Self> {
        let sigma = (1.0 / (2.0 * 10f64.powf(snr_db / 10.0))).sqrt();
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain(format!("SNR {snr_db} dB gives noise deviation {sigma}")));
        }
        Ok(ChannelParams { snr_db, sigma })
    }

    /// Es/N0 in dB.
    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Probability that a hard decision flips a transmitted bit, `Q(1/sigma)`.
    pub fn crossover_probability(&self) -> f64 {
        q_function(1.0 / self.sigma)
    }
}

/// Per-position log-likelihood ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftFrame(Vec<f64>);

impl SoftFrame {
    pub fn new(llr: Vec<f64>) -> Result<Self> {
        if llr.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("LLRs must be finite"));
        }
        Ok(SoftFrame(llr))
    }

    /// LLRs of magnitude `magnitude` agreeing with a known word.
    pub fn from_word(word: &BitFrame, magnitude: f64) -> Self {
        SoftFrame(word.bits().iter().map(|&b| if b == 1 { -magnitude } else { magnitude }).collect())
    }

    pub fn llr(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for SoftFrame {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `1 -> +1`, `0 -> -1`.
pub fn modulate(word: &BitFrame) -> Vec<f64> {
    word.bits().iter().map(|&b| if b == 1 { 1.0 } else { -1.0 }).collect()
}

pub fn add_awgn_in_place<R: Rng + ?Sized>(signal: &mut [f64], params: &ChannelParams, rng: &mut R) {
    for s in signal.iter_mut() {
        let n: f64 = rng.sample(StandardNormal);
        *s += params.sigma * n;
    }
}

pub fn add_awgn<R: Rng + ?Sized>(signal: &[f64], params: &ChannelParams, rng: &mut R) -> Vec<f64> {
    let mut out = signal.to_vec();
    add_awgn_in_place(&mut out, params, rng);
    out
}

/// Threshold detection at zero: positive samples decide 1.
pub fn hard_decide(received: &[f64]) -> BitFrame {
    BitFrame::from_vec_unchecked(received.iter().map(|&y| (y > 0.0) as u8).collect())
}

/// Soft LLRs `-2 y / sigma²`.
pub fn llr_soft(received: &[f64], params: &ChannelParams) -> SoftFrame {
    let scale = -2.0 / params.variance();
    SoftFrame(received.iter().map(|&y| scale * y).collect())
}

/// Hard-decision LLRs: the sign of the threshold decision with the fixed
/// magnitude `ln((1 - p) / p)` of a binary symmetric channel with crossover
/// `p = Q(1/sigma)`, clamped into `[MIN_CROSSOVER, MAX_CROSSOVER]`.
pub fn llr_hard(received: &[f64], params: &ChannelParams) -> SoftFrame {
    let magnitude = hard_llr_magnitude(params);
    SoftFrame(received.iter().map(|&y| if y > 0.0 { -magnitude } else { magnitude }).collect())
}

pub fn hard_llr_magnitude(params: &ChannelParams) -> f64 {
    let p = params.crossover_probability().clamp(MIN_CROSSOVER, MAX_CROSSOVER);
    ((1.0 - p) / p).ln()
}
