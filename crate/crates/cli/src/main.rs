use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use roishape::analysis::{self, FecEncoder};
use roishape::combinatorics::{rate_loss_dc, rate_loss_fdc};
use roishape::harness::{self, Figure, FigureOptions, System, SystemConfig};
use roishape::{Error, LowRateBit};

/// Probabilistic-shaping region-of-interest link simulator.
#[derive(Debug, Parser)]
#[command(name = "roishape", version)]
struct Cli {
    #[command(flatten)]
    system: SystemArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// Shaped word length (polar information bits).
    #[arg(long, global = true, default_value_t = 100)]
    n: usize,
    /// Upper ones-ratio of the low range.
    #[arg(long, global = true, default_value_t = 0.36)]
    upsilon0: f64,
    /// Polar code length.
    #[arg(long, global = true, default_value_t = 128)]
    l: usize,
    /// Construction SNR in dB.
    #[arg(long = "design-snr", global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    design_snr: f64,
    /// Frozen bit values: rla or all_zero.
    #[arg(long = "frozen-mode", global = true, default_value = "rla")]
    frozen_mode: String,
    /// Front end: sd or hd.
    #[arg(long, global = true, default_value = "sd")]
    decoder: String,
    /// Check-node rule: minsum or exact.
    #[arg(long = "check-rule", global = true, default_value = "minsum")]
    check_rule: String,
    /// Low-rate detector: hard_count or mean_amplitude.
    #[arg(long = "low-rate-detector", global = true, default_value = "hard_count")]
    low_rate_detector: String,
    /// Master seed for all random streams.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "ROISHAPE_THREADS")]
    threads: Option<usize>,
    /// Code-spec file to use instead of constructing the code.
    #[arg(long, global = true)]
    code: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SnrArgs {
    #[arg(long = "snr-start", allow_negative_numbers = true)]
    snr_start: f64,
    #[arg(long = "snr-stop", allow_negative_numbers = true)]
    snr_stop: f64,
    #[arg(long = "snr-step", default_value_t = 0.5)]
    snr_step: f64,
    /// Frames per SNR point.
    #[arg(long, default_value_t = 10_000)]
    frames: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the polar code and write its code-spec file.
    Construct {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shape and encode a message file into channel codewords.
    Encode {
        #[arg(long)]
        input: PathBuf,
        /// Low-rate bit for every frame.
        #[arg(long, default_value_t = 0)]
        v: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a codeword file back into messages.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the recovered low-rate bits, one per line.
        #[arg(long = "low-rate-out")]
        low_rate_out: Option<PathBuf>,
    },
    /// Monte-Carlo FER/BER sweep of the high-rate stream.
    Simulate {
        #[command(flatten)]
        snr: SnrArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Individual analyses.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
    /// Regenerate figure and table data as CSV files.
    Figures {
        /// Comma-separated subset of fig2, fig3, fig4, fig5, table1.
        #[arg(long, value_delimiter = ',')]
        which: Vec<String>,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        /// Codewords per range for histograms and run lengths.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Frames per SNR point for error-rate sweeps.
        #[arg(long, default_value_t = 100_000)]
        frames: u64,
    },
    /// Print the derived parameters of the configuration.
    Info,
}

#[derive(Debug, Subcommand)]
enum Analysis {
    /// Rate loss of the fixed-weight and flexible controllers.
    RateLoss,
    /// Ones-count histogram of channel codewords for both ranges.
    Histogram {
        /// Systematic (spe) or nonsystematic (nspe) encoding.
        #[arg(long, default_value = "spe")]
        encoder: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum run length with zero and run-length-aware frozen values.
    RunLength {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum clock and throughput for a run length.
    LinkBudget {
        #[arg(long, default_value_t = 63)]
        gamma: u64,
        /// Maximum flickering time period in seconds.
        #[arg(long, default_value = "0.005")]
        mftp: String,
        /// Clock in Hz; defaults to the minimum clock.
        #[arg(long)]
        clock: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error rate of the uncoded low-rate stream.
    LowRate {
        #[command(flatten)]
        snr: SnrArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl SystemArgs {
    fn config(&self) -> roishape::Result<SystemConfig> {
        Ok(SystemConfig {
            n: self.n,
            upsilon0: self.upsilon0,
            l: self.l,
            n_info: self.n,
            design_snr_db: self.design_snr,
            frozen_mode: parse_usage(&self.frozen_mode)?,
            decoder: self.decoder.parse()?,
            check_rule: parse_usage(&self.check_rule)?,
            low_rate_detector: parse_usage(&self.low_rate_detector)?,
            master_seed: self.seed,
            threads: self.threads,
        })
    }

    fn system(&self) -> roishape::Result<System> {
        let config = self.config()?;
        match &self.code {
            Some(path) => System::with_code(config, harness::read_code_spec(path)?),
            None => System::new(config),
        }
    }
}

/// Parses a flag value, reporting failures as usage errors.
fn parse_usage<T: std::str::FromStr<Err = Error>>(text: &str) -> roishape::Result<T> {
    text.parse().map_err(|e: Error| match e {
        Error::Usage(_) => e,
        other => Error::Usage(other.to_string()),
    })
}

fn output(path: Option<&Path>) -> roishape::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn snr_list(args: &SnrArgs) -> roishape::Result<Vec<f64>> {
    harness::snr_grid(args.snr_start, args.snr_stop, args.snr_step)
}

fn run(cli: Cli) -> roishape::Result<()> {
    let sys_args = &cli.system;
    match cli.command {
        Command::Construct { out } => {
            let config = sys_args.config()?;
            let code = roishape::PolarCodeSpec::construct(config.l, config.n_info, config.design_snr_db, config.frozen_mode)?;
            match out {
                Some(path) => harness::write_code_spec(&code, &path)?,
                None => println!("{}", code.to_json()?),
            }
        }
        Command::Encode { input, v, out } => {
            let v = LowRateBit::from_bit(v).map_err(|e| Error::Usage(e.to_string()))?;
            let frames = harness::encode_file(&sys_args.system()?, v, &input, &out)?;
            eprintln!("encoded {frames} frames");
        }
        Command::Decode { input, out, low_rate_out } => {
            let frames = harness::decode_file(&sys_args.system()?, &input, &out, low_rate_out.as_deref())?;
            eprintln!("decoded {frames} frames");
        }
        Command::Simulate { snr, out } => {
            let sys = sys_args.system()?;
            let records = harness::fer_sweep(&sys, &snr_list(&snr)?, snr.frames)?;
            for r in &records {
                eprintln!(
                    "{:>7.2} dB  fer {:.3e}  ber {:.3e}  low-rate ber {:.3e}  ({:.1} s)",
                    r.snr_db, r.fer, r.ber, r.low_rate_ber, r.elapsed_s
                );
            }
            let mut w = output(out.as_deref())?;
            harness::write_sweep_csv(&mut w, &records)?;
            w.flush()?;
        }
        Command::Analyze { what } => analyze(sys_args, what)?,
        Command::Figures { which, out, samples, frames } => {
            let figures = if which.is_empty() {
                Figure::ALL.to_vec()
            } else {
                which.iter().map(|w| w.parse()).collect::<roishape::Result<Vec<Figure>>>()?
            };
            let sys = sys_args.system()?;
            let opts = FigureOptions { samples, frames, ..FigureOptions::default() };
            for fig in figures {
                for path in harness::regenerate_figure(fig, &sys, &opts, &out)? {
                    println!("{}", path.display());
                }
            }
        }
        Command::Info => {
            let sys = sys_args.system()?;
            let cb = sys.codebook();
            let code = sys.code();
            let c = sys.config();
            println!("shaping      n={} upsilon0={} upsilon1={} w_max={} k={}", cb.n(), cb.upsilon0(), cb.upsilon1(), cb.w_max(), cb.k());
            println!("codebook     {} words per range", cb.size());
            println!("rate loss    {:.4}", cb.rate_loss());
            println!(
                "polar        l={} n_info={} design_snr={} dB frozen_mode={}",
                code.l(),
                code.n_info(),
                c.design_snr_db,
                code.frozen_mode()
            );
            println!("frozen set   {:?}", code.frozen_set());
            println!("frozen vals  {:?}", code.frozen_values());
            println!("decoder      {} ({})", c.decoder, c.check_rule);
            println!("code rate    {}/{} = {:.4}", sys.k(), code.l(), sys.k() as f64 / code.l() as f64);
        }
    }
    Ok(())
}

fn analyze(sys_args: &SystemArgs, what: Analysis) -> roishape::Result<()> {
    match what {
        Analysis::RateLoss => {
            let n = sys_args.n;
            let fdc = rate_loss_fdc(n, sys_args.upsilon0)?;
            let dc = rate_loss_dc(n, roishape::combinatorics::floor_weight(n, sys_args.upsilon0))?;
            println!("fdc k={} delta={} ({:.4})", fdc.k, fdc.delta_exact(), fdc.delta);
            println!("dc  k={} delta={} ({:.4})", dc.k, dc.delta_exact(), dc.delta);
        }
        Analysis::Histogram { encoder, samples, out } => {
            let encoder = match encoder.as_str() {
                "spe" => FecEncoder::Systematic,
                "nspe" => FecEncoder::Nonsystematic,
                other => return Err(Error::Usage(format!("unknown encoder {other:?} (expected spe or nspe)"))),
            };
            let sys = sys_args.system()?;
            let seed = sys.config().master_seed;
            let (h0, h1) = harness::with_threads(sys.config().threads, || -> roishape::Result<_> {
                let h = |v| analysis::omega_histogram(sys.codebook(), sys.code(), encoder, v, samples, seed);
                Ok((h(LowRateBit::Zero)?, h(LowRateBit::One)?))
            })??;
            let mut w = output(out.as_deref())?;
            analysis::write_histogram_csv(&mut w, &h0, &h1)?;
            w.flush()?;
        }
        Analysis::RunLength { samples, out } => {
            let sys = sys_args.system()?;
            let reports = harness::with_threads(sys.config().threads, || {
                harness::run_length_comparison(&sys, samples, sys.config().master_seed)
            })??;
            let rows: Vec<_> = reports.into_iter().map(|(m, r)| (m.to_string(), r)).collect();
            let mut w = output(out.as_deref())?;
            analysis::write_run_length_csv(&mut w, &rows)?;
            w.flush()?;
        }
        Analysis::LinkBudget { gamma, mftp, clock, out } => {
            let sys = sys_args.system()?;
            let mftp = analysis::parse_decimal(&mftp)?;
            if *mftp.numer() == 0 {
                return Err(Error::Usage("mftp must be positive".into()));
            }
            let clock = match clock {
                Some(c) => analysis::parse_decimal(&c)?,
                None => Ratio::from_integer(gamma) / mftp,
            };
            let budget = analysis::link_budget(
                gamma,
                mftp,
                sys.k() as u64,
                sys.codebook().n() as u64,
                sys.code().l() as u64,
                clock,
            )?;
            let mut w = output(out.as_deref())?;
            analysis::write_link_budget_csv(&mut w, &[("configured".to_string(), budget)])?;
            w.flush()?;
        }
        Analysis::LowRate { snr, out } => {
            let sys = sys_args.system()?;
            let c = sys.config();
            let records = harness::with_threads(c.threads, || {
                analysis::low_rate_ber_sweep(
                    sys.codebook(),
                    sys.code(),
                    &snr_list(&snr)?,
                    snr.frames,
                    c.master_seed,
                    c.low_rate_detector,
                )
            })??;
            let mut w = output(out.as_deref())?;
            analysis::write_low_rate_csv(&mut w, &records)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Usage(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("roishape: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
