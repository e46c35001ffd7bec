//! Statistics over transmitted frames: run lengths, ones-count histograms,
//! low-rate stream detection and its error rate, and the flicker/throughput
//! arithmetic that turns a run-length bound into a minimum optical clock.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::frame::BitFrame;
use crate::polar::PolarCodeSpec;
use crate::shaping::{LowRateBit, ShapingCodebook};

/// Longest run of identical consecutive symbols in `bits` (0 when empty).
pub fn max_run(bits: &[u8]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut prev = None;
    for &b in bits {
        if Some(b) == prev {
            run += 1;
        } else {
            run = 1;
            prev = Some(b);
        }
        best = best.max(run);
    }
    best
}

/// Run-length statistics of a sequence of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLengthReport {
    /// Reported maximum run: the per-frame maximum, or the stream maximum
    /// when runs were allowed to span frame boundaries.
    pub gamma: usize,
    pub per_frame_p50: usize,
    pub per_frame_max: usize,
    pub stream_max: usize,
    pub frames_observed: usize,
    /// `histogram[r]` counts frames whose longest run is `r`.
    pub histogram: Vec<u64>,
}

/// Run-length statistics over `frames`. With `concatenate`, `gamma` is taken
/// over the frames joined in order.
pub fn max_run_length(frames: &[BitFrame], concatenate: bool) -> Result<RunLengthReport> {
    if frames.is_empty() {
        return Err(Error::domain("run-length analysis needs at least one frame"));
    }
    let mut histogram = Vec::new();
    let mut stream_max = 0;
    let mut run = 0;
    let mut prev = None;
    for f in frames {
        let r = max_run(f.bits());
        if histogram.len() <= r {
            histogram.resize(r + 1, 0);
        }
        histogram[r] += 1;
        for &b in f.bits() {
            if Some(b) == prev {
                run += 1;
            } else {
                run = 1;
                prev = Some(b);
            }
            stream_max = stream_max.max(run);
        }
    }
    let per_frame_max = histogram.len() - 1;
    let half = frames.len().div_ceil(2) as u64;
    let mut seen = 0;
    let per_frame_p50 = histogram
        .iter()
        .position(|&c| {
            seen += c;
            seen >= half
        })
        .unwrap_or(per_frame_max);
    Ok(RunLengthReport {
        gamma: if concatenate { stream_max } else { per_frame_max },
        per_frame_p50,
        per_frame_max,
        stream_max,
        frames_observed: frames.len(),
        histogram,
    })
}

/// Writes run-length rows `mode,frames,gamma,per_frame_p50,per_frame_max,stream_max`.
pub fn write_run_length_csv<W: Write>(mut out: W, rows: &[(String, RunLengthReport)]) -> std::io::Result<()> {
    writeln!(out, "mode,frames,gamma,per_frame_p50,per_frame_max,stream_max")?;
    for (mode, r) in rows {
        writeln!(
            out,
            "{mode},{},{},{},{},{}",
            r.frames_observed, r.gamma, r.per_frame_p50, r.per_frame_max, r.stream_max
        )?;
    }
    Ok(())
}

/// Which polar encoder follows the shaper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FecEncoder {
    Systematic,
    Nonsystematic,
}

impl FecEncoder {
    pub fn encode(self, spec: &PolarCodeSpec, data: &BitFrame) -> Result<BitFrame> {
        match self {
            FecEncoder::Systematic => spec.systematic_encode(data),
            FecEncoder::Nonsystematic => spec.nonsystematic_encode(data),
        }
    }
}

impl fmt::Display for FecEncoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FecEncoder::Systematic => "systematic",
            FecEncoder::Nonsystematic => "nonsystematic",
        })
    }
}

fn check_compatible(cb: &ShapingCodebook, spec: &PolarCodeSpec) -> Result<()> {
    if spec.n_info() != cb.n() {
        return Err(Error::domain(format!(
            "polar code carries {} information bits but the shaper emits {}",
            spec.n_info(),
            cb.n()
        )));
    }
    Ok(())
}

/// Channel codewords for `samples` uniformly random messages.
///
/// Message `i` is drawn from trial stream `(seed, 0, i)`, so for a fixed seed
/// the same messages feed every encoder and both values of `v`.
pub fn sample_codewords(
    cb: &ShapingCodebook,
    spec: &PolarCodeSpec,
    encoder: FecEncoder,
    v: LowRateBit,
    samples: usize,
    seed: u64,
) -> Result<Vec<BitFrame>> {
    check_compatible(cb, spec)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = channel::trial_rng(seed, 0, i);
            let msg = BitFrame::random(&mut rng, cb.k());
            encoder.encode(spec, &cb.encode(v, &msg)?)
        })
        .collect()
}

/// Ones-count distribution of channel codewords for one low-rate value.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaHistogram {
    /// `bins[w]` counts codewords with `w` ones, `w = 0..=l`.
    pub bins: Vec<u64>,
    pub total: u64,
    pub range: LowRateBit,
}

impl OmegaHistogram {
    pub fn from_frames(frames: &[BitFrame], l: usize, range: LowRateBit) -> Self {
        let mut bins = vec![0u64; l + 1];
        for f in frames {
            bins[f.weight()] += 1;
        }
        OmegaHistogram { bins, total: frames.len() as u64, range }
    }

    /// Smallest and largest populated ones-count.
    pub fn support(&self) -> Option<(usize, usize)> {
        let lo = self.bins.iter().position(|&c| c > 0)?;
        let hi = self.bins.iter().rposition(|&c| c > 0)?;
        Some((lo, hi))
    }

    pub fn mean_ratio(&self) -> f64 {
        let l = (self.bins.len() - 1) as f64;
        let sum: f64 = self.bins.iter().enumerate().map(|(w, &c)| w as f64 * c as f64).sum();
        sum / (self.total as f64 * l)
    }

    /// Ones-counts populated in both histograms.
    pub fn overlap(&self, other: &OmegaHistogram) -> Vec<usize> {
        self.bins
            .iter()
            .zip(&other.bins)
            .enumerate()
            .filter(|(_, (a, b))| **a > 0 && **b > 0)
            .map(|(w, _)| w)
            .collect()
    }
}

/// Histogram of codeword ones-counts after shaping and polar encoding.
pub fn omega_histogram(
    cb: &ShapingCodebook,
    spec: &PolarCodeSpec,
    encoder: FecEncoder,
    v: LowRateBit,
    samples: usize,
    seed: u64,
) -> Result<OmegaHistogram> {
    let frames = sample_codewords(cb, spec, encoder, v, samples, seed)?;
    Ok(OmegaHistogram::from_frames(&frames, spec.l(), v))
}

/// Writes paired histograms as `ones_count,count_v0,count_v1`.
pub fn write_histogram_csv<W: Write>(mut out: W, v0: &OmegaHistogram, v1: &OmegaHistogram) -> std::io::Result<()> {
    writeln!(out, "ones_count,count_v0,count_v1")?;
    for (w, (a, b)) in v0.bins.iter().zip(&v1.bins).enumerate() {
        writeln!(out, "{w},{a},{b}")?;
    }
    Ok(())
}

/// How the low-rate receiver turns a received frame into a brightness level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowRateDetector {
    /// Hard-detect every sample, then compare the ones fraction with 1/2.
    #[default]
    HardCount,
    /// Compare the mean received amplitude with 0.
    MeanAmplitude,
}

impl FromStr for LowRateDetector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard-count" | "hard_count" | "count" => Ok(LowRateDetector::HardCount),
            "mean" | "mean-amplitude" | "mean_amplitude" => Ok(LowRateDetector::MeanAmplitude),
            other => Err(Error::Usage(format!("unknown low-rate detector {other:?}"))),
        }
    }
}

/// Low-rate decision for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub v: LowRateBit,
    /// The statistic sat exactly on the threshold; ties decide 1.
    pub tie: bool,
}

pub fn detect_low_rate_with(received: &[f64], detector: LowRateDetector) -> Detection {
    match detector {
        LowRateDetector::HardCount => {
            let ones = received.iter().filter(|&&y| y > 0.0).count();
            let twice = 2 * ones;
            Detection { v: (twice >= received.len()).into(), tie: twice == received.len() }
        }
        LowRateDetector::MeanAmplitude => {
            let sum: f64 = received.iter().sum();
            Detection { v: (sum >= 0.0).into(), tie: sum == 0.0 }
        }
    }
}

/// Low-rate bit from the ones fraction of the hard-detected frame.
pub fn detect_low_rate(received: &[f64]) -> LowRateBit {
    detect_low_rate_with(received, LowRateDetector::HardCount).v
}

/// Probability that hard-count detection misreads the low-rate bit of a
/// frame with `weight` ones out of `l` when each bit flips independently
/// with probability `p`.
pub fn low_rate_error_probability(weight: usize, l: usize, p: f64, v: LowRateBit) -> f64 {
    // Received ones = surviving ones + flipped zeros.
    let keep = binomial_pmf(weight, 1.0 - p);
    let flip = binomial_pmf(l - weight, p);
    let mut count = vec![0.0; l + 1];
    for (a, pa) in keep.iter().enumerate() {
        for (b, pb) in flip.iter().enumerate() {
            count[a + b] += pa * pb;
        }
    }
    let threshold = l.div_ceil(2);
    let p_one: f64 = count[threshold..].iter().sum();
    match v {
        LowRateBit::Zero => p_one,
        LowRateBit::One => 1.0 - p_one,
    }
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for i in 0..n {
        for j in (0..=i + 1).rev() {
            let stay = if j <= i { pmf[j] * (1.0 - p) } else { 0.0 };
            let step = if j > 0 { pmf[j - 1] * p } else { 0.0 };
            pmf[j] = stay + step;
        }
    }
    pmf
}

/// `Es/N0 - 10 log10(k / l)`.
pub fn ebn0_db(esn0_db: f64, k: usize, l: usize) -> f64 {
    esn0_db - 10.0 * (k as f64 / l as f64).log10()
}

/// One point of the uncoded low-rate stream sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRateRecord {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub frames: u64,
    pub errors: u64,
    pub ties: u64,
    pub ber: f64,
    /// Mean of the per-frame binomial-flip error probability over the
    /// transmitted frames. Only defined for hard-count detection.
    pub oracle_ber: Option<f64>,
}

impl LowRateRecord {
    /// Binomial standard error of `ber` around the oracle value.
    pub fn standard_error(&self) -> Option<f64> {
        self.oracle_ber.map(|p| (p * (1.0 - p) / self.frames as f64).sqrt())
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct LowRateTally {
    errors: u64,
    ties: u64,
    oracle: f64,
}

impl LowRateTally {
    fn merge(self, o: Self) -> Self {
        LowRateTally { errors: self.errors + o.errors, ties: self.ties + o.ties, oracle: self.oracle + o.oracle }
    }
}

/// Monte-Carlo error rate of the low-rate stream, without error correction.
///
/// Each trial draws `v` and the message from stream `(seed, point, trial)`,
/// sends the systematic codeword and detects `v` from the received samples.
pub fn low_rate_ber_sweep(
    cb: &ShapingCodebook,
    spec: &PolarCodeSpec,
    snrs_db: &[f64],
    frames: u64,
    seed: u64,
    detector: LowRateDetector,
) -> Result<Vec<LowRateRecord>> {
    check_compatible(cb, spec)?;
    if frames == 0 {
        return Err(Error::Usage("at least one frame per point is required".into()));
    }
    let l = spec.l();
    snrs_db
        .iter()
        .enumerate()
        .map(|(point, &snr_db)| {
            let params = ChannelParams::new(snr_db)?;
            let p = params.crossover_probability();
            let tally = (0..frames)
                .into_par_iter()
                .map(|trial| -> Result<LowRateTally> {
                    let mut rng = channel::trial_rng(seed, point as u64, trial);
                    let v = LowRateBit::from(rng.random::<bool>());
                    let msg = BitFrame::random(&mut rng, cb.k());
                    let x = spec.systematic_encode(&cb.encode(v, &msg)?)?;
                    let mut y = channel::modulate(&x);
                    channel::add_awgn_in_place(&mut y, &params, &mut rng);
                    let d = detect_low_rate_with(&y, detector);
                    let oracle = match detector {
                        LowRateDetector::HardCount => low_rate_error_probability(x.weight(), l, p, v),
                        LowRateDetector::MeanAmplitude => 0.0,
                    };
                    Ok(LowRateTally { errors: (d.v != v) as u64, ties: d.tie as u64, oracle })
                })
                .try_reduce(LowRateTally::default, |a, b| Ok(a.merge(b)))?;
            Ok(LowRateRecord {
                snr_db,
                ebn0_db: ebn0_db(snr_db, cb.k(), l),
                frames,
                errors: tally.errors,
                ties: tally.ties,
                ber: tally.errors as f64 / frames as f64,
                oracle_ber: (detector == LowRateDetector::HardCount).then(|| tally.oracle / frames as f64),
            })
        })
        .collect()
}

/// Writes low-rate rows `snr_db,ebn0_db,frames,low_rate_errors,ties,low_rate_ber,oracle_ber`.
pub fn write_low_rate_csv<W: Write>(mut out: W, rows: &[LowRateRecord]) -> std::io::Result<()> {
    writeln!(out, "snr_db,ebn0_db,frames,low_rate_errors,ties,low_rate_ber,oracle_ber")?;
    for r in rows {
        let oracle = r.oracle_ber.map(|p| format!("{p:.6e}")).unwrap_or_default();
        writeln!(
            out,
            "{:.4},{:.4},{},{},{},{:.6e},{oracle}",
            r.snr_db, r.ebn0_db, r.frames, r.errors, r.ties, r.ber
        )?;
    }
    Ok(())
}

/// Flicker and throughput figures for a transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkBudget {
    pub gamma: u64,
    pub mftp_s: Ratio<u64>,
    /// `gamma / mftp`: slowest clock that keeps every run within the
    /// flicker period.
    pub min_clock_hz: Ratio<u64>,
    /// Shaping efficiency `k / n` (FEC excluded).
    pub spectral_efficiency: Ratio<u64>,
    /// `k / l`, message bits per channel symbol including FEC overhead.
    pub fec_included_efficiency: Ratio<u64>,
    pub clock_hz: Ratio<u64>,
    /// `clock * k / n`.
    pub bit_rate_bps: Ratio<u64>,
}

pub fn link_budget(
    gamma: u64,
    mftp_s: Ratio<u64>,
    k: u64,
    n: u64,
    l: u64,
    clock_hz: Ratio<u64>,
) -> Result<LinkBudget> {
    if gamma == 0 || k == 0 || n == 0 || l == 0 || *mftp_s.numer() == 0 || *clock_hz.numer() == 0 {
        return Err(Error::domain("link budget inputs must be positive"));
    }
    let spectral_efficiency = Ratio::new(k, n);
    Ok(LinkBudget {
        gamma,
        mftp_s,
        min_clock_hz: Ratio::from_integer(gamma) / mftp_s,
        spectral_efficiency,
        fec_included_efficiency: Ratio::new(k, l),
        clock_hz,
        bit_rate_bps: clock_hz * spectral_efficiency,
    })
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl LinkBudget {
    pub fn min_clock_hz_f64(&self) -> f64 {
        ratio_f64(self.min_clock_hz)
    }

    pub fn spectral_efficiency_f64(&self) -> f64 {
        ratio_f64(self.spectral_efficiency)
    }

    pub fn bit_rate_bps_f64(&self) -> f64 {
        ratio_f64(self.bit_rate_bps)
    }
}

/// Parses a non-negative decimal such as `"5"` or `"0.005"` exactly.
pub fn parse_decimal(text: &str) -> Result<Ratio<u64>> {
    let bad = || Error::Usage(format!("{text:?} is not a non-negative decimal number"));
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: u64 = digits.parse().map_err(|_| bad())?;
    let denom = 10u64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    Ok(Ratio::new(numer, denom))
}

/// Writes link-budget rows
/// `source,gamma,mftp_s,min_clock_hz,spectral_efficiency,fec_included_efficiency,clock_hz,bit_rate_bps`.
pub fn write_link_budget_csv<W: Write>(mut out: W, rows: &[(String, LinkBudget)]) -> std::io::Result<()> {
    writeln!(out, "source,gamma,mftp_s,min_clock_hz,spectral_efficiency,fec_included_efficiency,clock_hz,bit_rate_bps")?;
    for (source, b) in rows {
        writeln!(
            out,
            "{source},{},{},{},{},{},{},{}",
            b.gamma,
            ratio_f64(b.mftp_s),
            ratio_f64(b.min_clock_hz),
            ratio_f64(b.spectral_efficiency),
            ratio_f64(b.fec_included_efficiency),
            ratio_f64(b.clock_hz),
            ratio_f64(b.bit_rate_bps),
        )?;
    }
    Ok(())
}
