//! End-to-end pipeline, Monte-Carlo sweeps, figure data and file I/O.
//!
//! A transmission runs shaper -> systematic polar encoder -> antipodal
//! modulation -> AWGN -> soft or hard LLRs -> SC decoder -> inverse shaper.
//! The low-rate bit is read from the same received samples before decoding.
//! Every trial draws from its own stream `(master_seed, point, trial)`, so
//! results are identical for any thread count.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;

use crate::analysis::{self, FecEncoder, LinkBudget, LowRateDetector};
use crate::channel::{self, ChannelParams, TrialRng};
use crate::combinatorics;
use crate::error::{Error, Result};
use crate::frame::{self, BitFrame};
use crate::polar::{CheckRule, FrozenMode, PolarCodeSpec};
use crate::shaping::{LowRateBit, ShapingCodebook};

/// Receiver front end feeding the polar decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecoderKind {
    /// Channel LLRs.
    #[default]
    Sd,
    /// Threshold decisions with a fixed LLR magnitude.
    Hd,
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sd" | "soft" => Ok(DecoderKind::Sd),
            "hd" | "hard" => Ok(DecoderKind::Hd),
            other => Err(Error::Usage(format!("unknown decoder {other:?} (expected sd or hd)"))),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Sd => "sd",
            DecoderKind::Hd => "hd",
        })
    }
}

/// Everything that determines a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Shaped word length, equal to the number of polar information bits.
    pub n: usize,
    pub upsilon0: f64,
    pub l: usize,
    pub n_info: usize,
    pub design_snr_db: f64,
    pub frozen_mode: FrozenMode,
    pub decoder: DecoderKind,
    pub check_rule: CheckRule,
    pub low_rate_detector: LowRateDetector,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n: 100,
            upsilon0: 0.36,
            l: 128,
            n_info: 100,
            design_snr_db: 0.0,
            frozen_mode: FrozenMode::Rla,
            decoder: DecoderKind::Sd,
            check_rule: CheckRule::MinSum,
            low_rate_detector: LowRateDetector::HardCount,
            master_seed: 1,
            threads: None,
        }
    }
}

/// Immutable tables for one configuration.
#[derive(Debug, Clone)]
pub struct System {
    config: SystemConfig,
    codebook: ShapingCodebook,
    code: PolarCodeSpec,
}

/// Outcome of one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Roundtrip {
    /// Low-rate bit read from the received brightness.
    pub v_detected: LowRateBit,
    pub low_rate_tie: bool,
    /// Inverse-shaper output, `None` when it rejected the decoded word.
    pub decoded: Option<(LowRateBit, BitFrame)>,
    pub frame_error: bool,
    pub bit_errors: usize,
}

impl System {
    pub fn new(config: SystemConfig) -> Result<Self> {
        if config.n_info != config.n {
            return Err(Error::Usage(format!(
                "n_info={} must equal the shaped length n={}",
                config.n_info, config.n
            )));
        }
        if !config.l.is_power_of_two() || config.l < config.n {
            return Err(Error::Usage(format!("l={} must be a power of two no smaller than n={}", config.l, config.n)));
        }
        let code = PolarCodeSpec::construct(config.l, config.n_info, config.design_snr_db, config.frozen_mode)?;
        Self::with_code(config, code)
    }

    /// Uses an existing code instead of constructing one; the config's code
    /// fields are overwritten from it.
    pub fn with_code(mut config: SystemConfig, code: PolarCodeSpec) -> Result<Self> {
        let codebook = ShapingCodebook::build(config.n, config.upsilon0)?;
        if code.n_info() != codebook.n() {
            return Err(Error::Usage(format!(
                "code carries {} information bits, shaper emits {}",
                code.n_info(),
                codebook.n()
            )));
        }
        config.l = code.l();
        config.n_info = code.n_info();
        config.frozen_mode = code.frozen_mode();
        if let Some(snr) = code.design_snr_db() {
            config.design_snr_db = snr;
        }
        Ok(System { config, codebook, code })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn codebook(&self) -> &ShapingCodebook {
        &self.codebook
    }

    pub fn code(&self) -> &PolarCodeSpec {
        &self.code
    }

    /// Message bits per frame.
    pub fn k(&self) -> usize {
        self.codebook.k()
    }

    /// Channel codeword for `(v, msg)`.
    pub fn transmit(&self, v: LowRateBit, msg: &BitFrame) -> Result<BitFrame> {
        let shaped = self.codebook.encode(v, msg)?;
        self.code.systematic_encode(&shaped)
    }

    /// SC decoding followed by the inverse shaper.
    pub fn receive(&self, llr: &[f64]) -> Result<(LowRateBit, BitFrame)> {
        let (_, data) = self.code.sc_decode(llr, self.config.check_rule)?;
        self.codebook.decode(&data)
    }

    fn front_end(&self, received: &[f64], params: Option<&ChannelParams>) -> Vec<f64> {
        match (params, self.config.decoder) {
            (None, _) => received.iter().map(|y| -2.0 * y).collect(),
            (Some(p), DecoderKind::Sd) => channel::llr_soft(received, p).llr().to_vec(),
            (Some(p), DecoderKind::Hd) => channel::llr_hard(received, p).llr().to_vec(),
        }
    }

    /// One transmission of `(v, msg)`; `params = None` is a noiseless channel.
    ///
    /// A word rejected by the inverse shaper is a frame error; its bit errors
    /// are counted against an all-zero message estimate.
    pub fn pipeline_roundtrip(
        &self,
        v: LowRateBit,
        msg: &BitFrame,
        params: Option<&ChannelParams>,
        rng: &mut TrialRng,
    ) -> Result<Roundtrip> {
        let x = self.transmit(v, msg)?;
        let mut y = channel::modulate(&x);
        if let Some(p) = params {
            channel::add_awgn_in_place(&mut y, p, rng);
        }
        let detection = analysis::detect_low_rate_with(&y, self.config.low_rate_detector);
        let llr = self.front_end(&y, params);
        let decoded = match self.receive(&llr) {
            Ok(d) => Some(d),
            Err(e) if e.is_frame_error() => None,
            Err(e) => return Err(e),
        };
        let bit_errors = match &decoded {
            Some((_, m)) => m.hamming_distance(msg),
            None => msg.weight(),
        };
        let frame_error = decoded.as_ref().is_none_or(|(_, m)| m != msg);
        Ok(Roundtrip { v_detected: detection.v, low_rate_tie: detection.tie, decoded, frame_error, bit_errors })
    }

    fn trial(&self, params: &ChannelParams, point: u64, trial: u64) -> Result<Tally> {
        let mut rng = channel::trial_rng(self.config.master_seed, point, trial);
        let v = LowRateBit::from(rng.random::<bool>());
        let msg = BitFrame::random(&mut rng, self.k());
        let r = self.pipeline_roundtrip(v, &msg, Some(params), &mut rng)?;
        Ok(Tally {
            bit_errors: r.bit_errors as u64,
            frame_errors: r.frame_error as u64,
            decode_failures: r.decoded.is_none() as u64,
            low_rate_errors: (r.v_detected != v) as u64,
            low_rate_ties: r.low_rate_tie as u64,
        })
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    bit_errors: u64,
    frame_errors: u64,
    decode_failures: u64,
    low_rate_errors: u64,
    low_rate_ties: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            bit_errors: self.bit_errors + o.bit_errors,
            frame_errors: self.frame_errors + o.frame_errors,
            decode_failures: self.decode_failures + o.decode_failures,
            low_rate_errors: self.low_rate_errors + o.low_rate_errors,
            low_rate_ties: self.low_rate_ties + o.low_rate_ties,
        }
    }
}

/// One measured SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    /// Frames the inverse shaper rejected (a subset of the frame errors).
    pub decode_failures: u64,
    pub low_rate_errors: u64,
    pub low_rate_ties: u64,
    pub ber: f64,
    pub fer: f64,
    pub low_rate_ber: f64,
    pub elapsed_s: f64,
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Usage("thread count must be positive".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Usage(format!("cannot start {t} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// High-rate and low-rate error rates at each SNR, `frames` trials per point.
pub fn fer_sweep(system: &System, snrs_db: &[f64], frames: u64) -> Result<Vec<SweepRecord>> {
    if frames == 0 {
        return Err(Error::Usage("at least one frame per point is required".into()));
    }
    with_threads(system.config.threads, || {
        snrs_db
            .iter()
            .enumerate()
            .map(|(point, &snr_db)| {
                let params = ChannelParams::new(snr_db)?;
                let start = Instant::now();
                let t = (0..frames)
                    .into_par_iter()
                    .map(|trial| system.trial(&params, point as u64, trial))
                    .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
                let k = system.k() as u64;
                Ok(SweepRecord {
                    snr_db,
                    ebn0_db: analysis::ebn0_db(snr_db, system.k(), system.code.l()),
                    frames,
                    bit_errors: t.bit_errors,
                    frame_errors: t.frame_errors,
                    decode_failures: t.decode_failures,
                    low_rate_errors: t.low_rate_errors,
                    low_rate_ties: t.low_rate_ties,
                    ber: t.bit_errors as f64 / (frames * k) as f64,
                    fer: t.frame_errors as f64 / frames as f64,
                    low_rate_ber: t.low_rate_errors as f64 / frames as f64,
                    elapsed_s: start.elapsed().as_secs_f64(),
                })
            })
            .collect()
    })?
}

/// SNR at which the frame error rate crosses `target`, by linear
/// interpolation of `log10(FER)` between the bracketing points.
pub fn snr_at_fer(records: &[SweepRecord], target: f64) -> Option<f64> {
    records.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.fer >= target && b.fer <= target && b.fer > 0.0 {
            if a.fer == b.fer {
                return Some(a.snr_db);
            }
            let (la, lb, lt) = (a.fer.log10(), b.fer.log10(), target.log10());
            Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}

/// Writes sweep rows `snr_db,ebn0_db,frames,bit_errors,frame_errors,ber,fer`.
pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRecord]) -> std::io::Result<()> {
    writeln!(out, "snr_db,ebn0_db,frames,bit_errors,frame_errors,ber,fer")?;
    for r in rows {
        writeln!(
            out,
            "{:.4},{:.4},{},{},{},{:.6e},{:.6e}",
            r.snr_db, r.ebn0_db, r.frames, r.bit_errors, r.frame_errors, r.ber, r.fer
        )?;
    }
    Ok(())
}

/// Inclusive arithmetic grid `start, start + step, ..., <= stop`.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Usage(format!("bad SNR grid {start}:{step}:{stop}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Codewords for `samples` transmissions with `v` and the message drawn per
/// trial from stream `(seed, 0, trial)`.
pub fn sample_transmissions(system: &System, code: &PolarCodeSpec, samples: usize, seed: u64) -> Result<Vec<BitFrame>> {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = channel::trial_rng(seed, 0, i);
            let v = LowRateBit::from(rng.random::<bool>());
            let msg = BitFrame::random(&mut rng, system.k());
            code.systematic_encode(&system.codebook.encode(v, &msg)?)
        })
        .collect()
}

/// Run-length reports for zero-valued and run-length-aware frozen bits over
/// the same transmissions.
pub fn run_length_comparison(system: &System, samples: usize, seed: u64) -> Result<Vec<(FrozenMode, analysis::RunLengthReport)>> {
    [FrozenMode::AllZero, FrozenMode::Rla]
        .into_iter()
        .map(|mode| {
            let code = system.code.with_frozen_mode(mode)?;
            let frames = sample_transmissions(system, &code, samples, seed)?;
            Ok((mode, analysis::max_run_length(&frames, false)?))
        })
        .collect()
}

/// Figure and table data sets the tool can regenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Rate loss of the fixed-weight and flexible controllers.
    Fig2,
    /// Ones-count histograms after systematic and nonsystematic encoding.
    Fig3,
    /// Maximum run length with zero and run-length-aware frozen values.
    Fig4,
    /// Error rates of the high-rate (SD and HD) and low-rate streams.
    Fig5,
    /// Flicker-limited clock and throughput.
    Table1,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Table1];
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "table1" => Ok(Figure::Table1),
            other => Err(Error::Usage(format!("unknown figure {other:?} (expected fig2, fig3, fig4, fig5 or table1)"))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Table1 => "table1",
        })
    }
}

/// Knobs for figure regeneration.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    /// Code lengths for the rate-loss table.
    pub n_list: Vec<usize>,
    pub phi_grid: Vec<f64>,
    /// Codewords per range for histograms and run lengths.
    pub samples: usize,
    /// Frames per SNR point for the error-rate sweeps.
    pub frames: u64,
    pub high_rate_snrs_db: Vec<f64>,
    pub low_rate_snrs_db: Vec<f64>,
    /// Run length used for the reported link-budget row.
    pub reported_gamma: u64,
    pub mftp_s: Ratio<u64>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            n_list: vec![50, 100, 200, 400],
            phi_grid: (1..100).map(|i| i as f64 / 100.0).collect(),
            samples: 100_000,
            frames: 100_000,
            high_rate_snrs_db: (0..=16).map(|i| 1.0 + 0.5 * i as f64).collect(),
            low_rate_snrs_db: vec![-16.0, -14.0, -12.0, -10.0, -8.0, -6.0],
            reported_gamma: 63,
            mftp_s: Ratio::new(5, 1000),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn link_budget_for(system: &System, gamma: u64, mftp_s: Ratio<u64>) -> Result<LinkBudget> {
    let min_clock = Ratio::from_integer(gamma) / mftp_s;
    analysis::link_budget(
        gamma,
        mftp_s,
        system.k() as u64,
        system.codebook.n() as u64,
        system.code.l() as u64,
        min_clock,
    )
}

/// Writes the CSV files of one figure into `out_dir` and returns their paths.
pub fn regenerate_figure(which: Figure, system: &System, opts: &FigureOptions, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let seed = system.config.master_seed;
    let cb = &system.codebook;
    let code = &system.code;
    let mut written = Vec::new();
    match which {
        Figure::Fig2 => {
            let rows = combinatorics::rate_loss_table(&opts.n_list, &opts.phi_grid)?;
            let path = out_dir.join("fig2_rate_loss.csv");
            combinatorics::write_rate_loss_csv(create(&path)?, &rows)?;
            written.push(path);
        }
        Figure::Fig3 => {
            with_threads(system.config.threads, || -> Result<()> {
                for (encoder, name) in [(FecEncoder::Systematic, "spe"), (FecEncoder::Nonsystematic, "nspe")] {
                    let h0 = analysis::omega_histogram(cb, code, encoder, LowRateBit::Zero, opts.samples, seed)?;
                    let h1 = analysis::omega_histogram(cb, code, encoder, LowRateBit::One, opts.samples, seed)?;
                    let path = out_dir.join(format!("fig3_omega_{name}.csv"));
                    analysis::write_histogram_csv(create(&path)?, &h0, &h1)?;
                    written.push(path);
                }
                Ok(())
            })??;
        }
        Figure::Fig4 => {
            let reports = with_threads(system.config.threads, || run_length_comparison(system, opts.samples, seed))??;
            let rows: Vec<(String, analysis::RunLengthReport)> =
                reports.into_iter().map(|(m, r)| (m.to_string(), r)).collect();
            let path = out_dir.join("fig4_run_length.csv");
            analysis::write_run_length_csv(create(&path)?, &rows)?;
            written.push(path);
        }
        Figure::Fig5 => {
            for decoder in [DecoderKind::Sd, DecoderKind::Hd] {
                let sys = System::with_code(SystemConfig { decoder, ..system.config.clone() }, code.clone())?;
                let records = fer_sweep(&sys, &opts.high_rate_snrs_db, opts.frames)?;
                let path = out_dir.join(format!("fig5_fer_{decoder}.csv"));
                write_sweep_csv(create(&path)?, &records)?;
                written.push(path);
            }
            let low = with_threads(system.config.threads, || {
                analysis::low_rate_ber_sweep(
                    cb,
                    code,
                    &opts.low_rate_snrs_db,
                    opts.frames,
                    seed,
                    system.config.low_rate_detector,
                )
            })??;
            let path = out_dir.join("fig5_low_rate.csv");
            analysis::write_low_rate_csv(create(&path)?, &low)?;
            written.push(path);
        }
        Figure::Table1 => {
            let mut rows = vec![("reported".to_string(), link_budget_for(system, opts.reported_gamma, opts.mftp_s)?)];
            let code = code.with_frozen_mode(FrozenMode::Rla)?;
            let frames = with_threads(system.config.threads, || sample_transmissions(system, &code, opts.samples, seed))??;
            let measured = analysis::max_run_length(&frames, false)?;
            rows.push(("measured".to_string(), link_budget_for(system, measured.gamma as u64, opts.mftp_s)?));
            let path = out_dir.join("table1_link_budget.csv");
            analysis::write_link_budget_csv(create(&path)?, &rows)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Shapes and encodes every message line of `input` into a channel codeword
/// line of `output`. Returns the number of frames.
pub fn encode_file(system: &System, v: LowRateBit, input: &Path, output: &Path) -> Result<usize> {
    let msgs = frame::read_frames(BufReader::new(File::open(input)?), system.k())?;
    let codewords = msgs
        .iter()
        .enumerate()
        .map(|(i, m)| system.transmit(v, m).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() }))
        .collect::<Result<Vec<_>>>()?;
    let mut out = create(output)?;
    frame::write_frames(&mut out, &codewords)?;
    out.flush()?;
    Ok(codewords.len())
}

/// Decodes codeword lines of `input` as noiseless hard decisions and writes
/// the recovered messages to `output`, and the low-rate bits to
/// `low_rate_out` when given.
pub fn decode_file(system: &System, input: &Path, output: &Path, low_rate_out: Option<&Path>) -> Result<usize> {
    let words = frame::read_frames(BufReader::new(File::open(input)?), system.code.l())?;
    let decoded = words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let llr = channel::SoftFrame::from_word(w, 1.0);
            system.receive(llr.llr()).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })
        })
        .collect::<Result<Vec<_>>>()?;
    let msgs: Vec<BitFrame> = decoded.iter().map(|(_, m)| m.clone()).collect();
    let mut out = create(output)?;
    frame::write_frames(&mut out, &msgs)?;
    out.flush()?;
    if let Some(path) = low_rate_out {
        let mut out = create(path)?;
        for (v, _) in &decoded {
            writeln!(out, "{}", v.as_bit())?;
        }
        out.flush()?;
    }
    Ok(decoded.len())
}

pub fn write_code_spec(code: &PolarCodeSpec, path: &Path) -> Result<()> {
    fs::write(path, code.to_json()? + "\n")?;
    Ok(())
}

pub fn read_code_spec(path: &Path) -> Result<PolarCodeSpec> {
    PolarCodeSpec::from_json(&fs::read_to_string(path)?)
}

/// Reads a file of `0`/`1` low-rate values, one per line.
pub fn read_low_rate_bits<R: BufRead>(reader: R) -> Result<Vec<LowRateBit>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let line = line?;
            match line.as_str() {
                "0" => Ok(LowRateBit::Zero),
                "1" => Ok(LowRateBit::One),
                _ => Err(Error::Parse { line: i + 1, message: format!("expected 0 or 1, found {line:?}") }),
            }
        })
        .collect()
}
