//! Command-line front end: scenario file + overrides in, CSV out.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fairlink::config::{Scheme, SimConfig};
use fairlink::curves;
use fairlink::experiment;
use fairlink_core::channel::pathloss;
use fairlink_core::csi::error_variance;
use fairlink_core::rate_adapt::{build_lut, log_grid, RateLut, DEFAULT_LUT_SPAN};
use fairlink_core::{CsiConfig64, LinkParams64};

/// Monte-Carlo experiments for outage-constrained rate adaptation and
/// proportional-fair scheduling under noisy, delayed channel knowledge.
#[derive(Parser)]
#[command(name = "fairlink", version, about)]
struct Cli {
    /// JSON scenario file; defaults apply where fields (or the file) are
    /// absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by the single-link curve subcommands.
#[derive(Args)]
struct LinkOpts {
    /// Cell-edge SNR in dB (default: first configured value).
    #[arg(long)]
    snr_db: Option<f64>,

    /// CSI delay in slots (default: first configured value).
    #[arg(long)]
    delay: Option<u32>,

    /// Output CSV path.
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assigned rate versus estimated amplitude for each rate rule.
    RateCurve {
        #[command(flatten)]
        link: LinkOpts,

        /// Amplitude grid points.
        #[arg(long, default_value_t = 121)]
        points: usize,
    },

    /// Empirical outage versus estimated amplitude for each rate rule.
    OutageCurve {
        #[command(flatten)]
        link: LinkOpts,

        /// Amplitude grid points.
        #[arg(long, default_value_t = 61)]
        points: usize,

        /// Conditional Monte-Carlo draws per grid point.
        #[arg(long, default_value_t = 20_000)]
        draws: u64,

        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
    },

    /// Expected decoded throughput of the robust rule versus outage target.
    ThroughputVsTarget {
        #[command(flatten)]
        link: LinkOpts,

        /// Target grid points.
        #[arg(long, default_value_t = 40)]
        points: usize,

        /// Estimate draws averaged per target.
        #[arg(long, default_value_t = 2_000)]
        draws: u64,

        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
    },

    /// Estimation-error variance versus delay for each configured SNR.
    UncertaintyCurve {
        /// Largest delay on the grid.
        #[arg(long, default_value_t = 20)]
        max_delay: u32,

        /// Output CSV path.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },

    /// Full scheduling sweep over schemes, delays, and SNRs.
    ScheduleSim {
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,

        /// Drops per (scheme, delay, SNR) cell.
        #[arg(long)]
        drops: Option<usize>,

        /// Slots per drop.
        #[arg(long)]
        slots: Option<usize>,

        /// SNR grid override (repeatable).
        #[arg(long = "snr-db")]
        snr_db: Vec<f64>,

        /// Delay grid override (repeatable).
        #[arg(long = "delay")]
        delays: Vec<u32>,

        /// Scheme override (repeatable): perfect-csi, nonrobust(a),
        /// robust-immediate, robust-delayed.
        #[arg(long = "scheme", value_parser = parse_scheme)]
        schemes: Vec<Scheme>,

        /// Worker threads for the drop loop.
        #[arg(long)]
        workers: Option<usize>,

        /// Output CSV path.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },

    /// Robust-rate lookup tables.
    Lut {
        #[command(subcommand)]
        cmd: LutCmd,
    },
}

#[derive(Subcommand)]
enum LutCmd {
    /// Precompute a robust-rate table for one (SNR, delay) operating point.
    Build {
        /// Cell-edge SNR in dB (default: first configured value).
        #[arg(long)]
        snr_db: Option<f64>,

        /// CSI delay in slots (default: first configured value).
        #[arg(long)]
        delay: Option<u32>,

        /// Outage target override.
        #[arg(long)]
        p_target: Option<f64>,

        /// Amplitude grid points.
        #[arg(long, default_value_t = 512)]
        points: usize,

        /// Output CSV path.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },

    /// Summarize a stored table.
    Inspect {
        /// Table CSV path.
        path: PathBuf,
    },
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fairlink: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };

    match cli.cmd {
        Cmd::RateCurve { link, points } => {
            cfg.validate()?;
            let (snr_db, delay) = link_point(&cfg, &link);
            let rows = curves::rate_curve(&cfg, snr_db, delay, points);
            let n = rows.len();
            write_out(&link.out, |w| curves::write_rate_csv(&rows, w))?;
            println!("wrote {n} rate points to {}", link.out.display());
        }
        Cmd::OutageCurve {
            link,
            points,
            draws,
            seed,
        } => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let (snr_db, delay) = link_point(&cfg, &link);
            let rows = curves::outage_curve(&cfg, snr_db, delay, points, draws);
            let n = rows.len();
            write_out(&link.out, |w| curves::write_outage_csv(&rows, w))?;
            println!("wrote {n} outage points to {}", link.out.display());
        }
        Cmd::ThroughputVsTarget {
            link,
            points,
            draws,
            seed,
        } => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let (snr_db, delay) = link_point(&cfg, &link);
            let rows = curves::throughput_vs_target(&cfg, snr_db, delay, points, draws);
            let n = rows.len();
            write_out(&link.out, |w| curves::write_target_csv(&rows, w))?;
            println!("wrote {n} target points to {}", link.out.display());
        }
        Cmd::UncertaintyCurve { max_delay, out } => {
            cfg.validate()?;
            let rows = curves::uncertainty_curve(&cfg, max_delay);
            let n = rows.len();
            write_out(&out, |w| curves::write_uncertainty_csv(&rows, w))?;
            println!("wrote {n} uncertainty points to {}", out.display());
        }
        Cmd::ScheduleSim {
            seed,
            drops,
            slots,
            snr_db,
            delays,
            schemes,
            workers,
            out,
        } => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = drops {
                cfg.drops = d;
            }
            if let Some(s) = slots {
                cfg.slots = s;
            }
            if !snr_db.is_empty() {
                cfg.snr_db = snr_db;
            }
            if !delays.is_empty() {
                cfg.delays = delays;
            }
            if !schemes.is_empty() {
                cfg.schemes = schemes;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let rows = experiment::run_experiment(&cfg)?;
            let n = rows.len();
            write_out(&out, |w| experiment::write_metrics_csv(&rows, w))?;
            println!(
                "wrote {n} rows ({} drops x {} slots, seed {}) to {}",
                cfg.drops,
                cfg.slots,
                cfg.seed,
                out.display()
            );
        }
        Cmd::Lut { cmd } => match cmd {
            LutCmd::Build {
                snr_db,
                delay,
                p_target,
                points,
                out,
            } => {
                if let Some(p) = p_target {
                    cfg.p_target = p;
                }
                cfg.validate()?;
                let snr_db = snr_db.unwrap_or(cfg.snr_db[0]);
                let delay = delay.unwrap_or(cfg.delays[0]);
                let lambda = pathloss(cfg.radius_m, cfg.pathloss_exponent, cfg.pathloss_intercept);
                let rho = experiment::calibrate_power(&cfg, snr_db);
                let params = LinkParams64::new(lambda, cfg.coherence_slots, rho);
                let csi =
                    CsiConfig64::new(delay, cfg.window, cfg.pilots, cfg.feedback_bits, params);
                let eps = error_variance(&csi);
                let scale = lambda.sqrt();
                let grid = log_grid(
                    DEFAULT_LUT_SPAN.0 * scale,
                    DEFAULT_LUT_SPAN.1 * scale,
                    points,
                );
                let lut = build_lut(grid, eps, rho, cfg.p_target, cfg.rate_tol)?;
                write_out(&out, |w| lut.write_csv(w))?;
                println!(
                    "wrote a {points}-point table (snr {snr_db} dB, delay {delay}) to {}",
                    out.display()
                );
            }
            LutCmd::Inspect { path } => {
                let file = File::open(&path)?;
                let lut: RateLut<f64> = RateLut::read_csv(BufReader::new(file))?;
                let amps = lut.amplitudes();
                let rates = lut.rates();
                println!("table: {}", path.display());
                println!("points: {}", amps.len());
                println!(
                    "amplitude span: [{}, {}]",
                    amps.first().unwrap(),
                    amps.last().unwrap()
                );
                println!(
                    "rate span: [{}, {}] bits/s/Hz",
                    rates.first().unwrap(),
                    rates.last().unwrap()
                );
            }
        },
    }
    Ok(())
}

/// SNR/delay of a single-link sweep: explicit flags, else the first
/// configured values.
fn link_point(cfg: &SimConfig, link: &LinkOpts) -> (f64, u32) {
    (
        link.snr_db.unwrap_or(cfg.snr_db[0]),
        link.delay.unwrap_or(cfg.delays[0]),
    )
}

/// Writes a CSV through a buffered writer, flushing before returning.
fn write_out<F>(path: &PathBuf, body: F) -> Result<(), std::io::Error>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), std::io::Error>,
{
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()
}
